//! Linear readouts, the lagged-reconstruction memory task, and memory
//! capacity.
//!
//! Readouts are affine projections of the reservoir state trained by ridge
//! regression. The penalty is scaled as `lambda^2 * T_s * ||R||^2` so that
//! ridge with parameter `lambda` matches, in expectation, least squares on
//! states corrupted by additive measurement noise of amplitude `lambda`. The
//! constant regressor is never penalized.

use nalgebra::{DMatrixView, DVector};
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::replica::{readout_consistency, replica_run};
use crate::reservoir::{run, NetworkRealization, ReservoirState, Trajectory};
use crate::rng::derive_seed;
use crate::signals::Drive;
use crate::stats::pearson;

/// A trained affine readout `y(t) = R . x(t) + R0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub weights: DVector<f64>,
    pub bias: f64,
    /// Ridge parameter used in training.
    pub lambda: f64,
    /// Target lag when trained for the memory task.
    pub lag: Option<usize>,
}

/// Shared ridge factorization: the normal system depends only on the states
/// and `lambda`, so many targets (one per lag) reuse one Cholesky.
struct RidgeSolver {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    state_mean: DVector<f64>,
    samples: usize,
    lambda: f64,
}

impl RidgeSolver {
    fn new(states: DMatrixView<f64>, lambda: f64) -> Result<Self> {
        assert!(lambda >= 0.0, "contract violation: lambda must be >= 0");
        assert!(states.ncols() >= 2, "contract violation: need at least 2 samples");
        let t_s = states.ncols();
        let state_mean = states.column_mean();
        // Centered scatter via the uncentered Gram matrix minus the rank-1
        // mean term.
        let mut scatter = &states * states.transpose();
        scatter.ger(-(t_s as f64), &state_mean, &state_mean, 1.0);
        let reg = lambda * lambda * t_s as f64;
        for i in 0..scatter.nrows() {
            scatter[(i, i)] += reg;
        }
        let chol = scatter.cholesky().ok_or(Error::RankDeficientDesign)?;
        Ok(Self { chol, state_mean, samples: t_s, lambda })
    }

    fn fit(&self, states: DMatrixView<f64>, targets: &[f64], lag: Option<usize>) -> Readout {
        assert_eq!(states.ncols(), targets.len(), "contract violation: target length mismatch");
        assert_eq!(states.ncols(), self.samples);
        let t_s = targets.len() as f64;
        let target_mean = targets.iter().sum::<f64>() / t_s;
        let z = DVector::from_column_slice(targets);
        let mut rhs = &states * z;
        rhs.axpy(-t_s * target_mean, &self.state_mean, 1.0);
        let weights = self.chol.solve(&rhs);
        let bias = target_mean - weights.dot(&self.state_mean);
        Readout { weights, bias, lambda: self.lambda, lag }
    }
}

/// Ridge regression of a scalar target on reservoir states (columns are
/// samples). Minimizes `sum_t (y(t) - z(t))^2 + lambda^2 * T_s * ||R||^2`
/// with an unpenalized intercept.
pub fn ridge_fit(states: DMatrixView<f64>, targets: &[f64], lambda: f64) -> Result<Readout> {
    let solver = RidgeSolver::new(states, lambda)?;
    Ok(solver.fit(states, targets, None))
}

/// The affine projection per time step.
pub fn apply_readout(states: DMatrixView<f64>, readout: &Readout) -> Vec<f64> {
    assert_eq!(
        states.nrows(),
        readout.weights.len(),
        "contract violation: readout width mismatch"
    );
    let mut y = states.tr_mul(&readout.weights);
    y.add_scalar_mut(readout.bias);
    y.as_slice().to_vec()
}

/// Per-lag reconstruction accuracy and readout consistency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryProfile {
    /// Lags 0..=tau_max.
    pub lags: Vec<usize>,
    /// Held-out reconstruction correlation M(tau).
    pub m: Vec<f64>,
    /// In-sample M(tau), when requested.
    pub m_in_sample: Option<Vec<f64>>,
    /// Readout consistency Gamma_R^2 per lag, when a replica was provided
    /// (NaN marks degenerate readouts).
    pub gamma_r_sq: Option<Vec<f64>>,
    /// Truncated memory capacity: sum of held-out M(tau)^2 over tau >= 1.
    pub capacity: f64,
    pub lambda: f64,
    pub train_len: usize,
    pub test_len: usize,
    /// Pairing between states and drive samples; 0 pairs the state produced
    /// by injecting sample k with lag-0 target k.
    pub alignment_offset: usize,
    /// Always evaluated on held-out samples.
    pub held_out: bool,
}

impl MemoryProfile {
    /// Square roots of the per-lag readout consistencies (negative estimates
    /// clamp to zero).
    pub fn gamma_r(&self) -> Option<Vec<f64>> {
        self.gamma_r_sq
            .as_ref()
            .map(|g| g.iter().map(|&v| if v > 0.0 { v.sqrt() } else { 0.0 }).collect())
    }

    /// CSV: lag, M, M_squared, Gamma_R_squared, Gamma_R (consistency columns
    /// empty when no replica was evaluated).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "lag,M,M_squared,Gamma_R_squared,Gamma_R")?;
        let gr = self.gamma_r();
        for (i, &lag) in self.lags.iter().enumerate() {
            let m = self.m[i];
            let (gsq, g) = match (&self.gamma_r_sq, &gr) {
                (Some(gsq), Some(g)) => (gsq[i].to_string(), g[i].to_string()),
                _ => (String::new(), String::new()),
            };
            writeln!(w, "{lag},{m},{},{gsq},{g}", m * m)?;
        }
        Ok(())
    }
}

/// Truncated memory capacity: `sum_{tau >= 1} M(tau)^2` (lag 0 excluded,
/// non-finite entries skipped).
pub fn memory_capacity(m_by_lag: &[f64]) -> f64 {
    m_by_lag.iter().skip(1).filter(|v| v.is_finite()).map(|v| v * v).sum()
}

/// Settings of the lagged-reconstruction task.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MemoryTaskConfig {
    pub tau_max: usize,
    pub lambda: f64,
    pub in_sample: bool,
    /// 0 pairs the state that has just absorbed drive sample k with target
    /// index k; 1 reproduces the one-step-lagged input labeling of the noisy
    /// update equation.
    pub alignment_offset: usize,
}

impl Default for MemoryTaskConfig {
    fn default() -> Self {
        Self { tau_max: 50, lambda: 1e-6, in_sample: false, alignment_offset: 0 }
    }
}

/// Memory profile from already-computed trajectories.
///
/// For every lag the kept samples are split into contiguous train/test
/// halves (the same window for all lags); readouts are fit on the first half
/// and M(tau) is reported on the second. When a replica trajectory is given,
/// the same trained readout is applied to it and Gamma_R^2(tau) is the
/// consistency of the two readout series over the test window.
pub fn memory_profile(
    traj: &Trajectory,
    replica: Option<&Trajectory>,
    drive: &Drive,
    cfg: &MemoryTaskConfig,
) -> Result<MemoryProfile> {
    assert_eq!(drive.width(), 1, "contract violation: memory task needs a scalar drive");
    if let Some(rep) = replica {
        assert_eq!(rep.dim(), traj.dim(), "contract violation: replica width mismatch");
        assert_eq!(rep.len(), traj.len(), "contract violation: replica length mismatch");
    }
    let washout = traj.washout();
    let kept = traj.len();
    let offset = cfg.alignment_offset;

    // Common sample window valid for every lag: drive index
    // washout + j - tau + offset must stay inside [0, drive.len()).
    let j_lo = (cfg.tau_max as i64 - offset as i64 - washout as i64).max(0) as usize;
    let j_hi_excl = kept - offset; // tau = 0 limits the top end
    assert!(
        j_hi_excl > j_lo + 3,
        "contract violation: tau_max must be well below the usable sample length"
    );
    let n_use = j_hi_excl - j_lo;
    let n_train = n_use / 2;
    let n_test = n_use - n_train;
    let train = traj.states().columns(j_lo, n_train);
    let test = traj.states().columns(j_lo + n_train, n_test);

    let solver = RidgeSolver::new(train.as_view(), cfg.lambda)?;

    let target = |j: usize, tau: usize| -> f64 {
        drive.scalar(washout + j - tau + offset)
    };

    let mut m = Vec::with_capacity(cfg.tau_max + 1);
    let mut m_in = cfg.in_sample.then(|| Vec::with_capacity(cfg.tau_max + 1));
    let mut gamma = replica.map(|_| Vec::with_capacity(cfg.tau_max + 1));

    for tau in 0..=cfg.tau_max {
        let z_train: Vec<f64> = (0..n_train).map(|jj| target(j_lo + jj, tau)).collect();
        let readout = solver.fit(train.as_view(), &z_train, Some(tau));

        let z_test: Vec<f64> = (0..n_test).map(|jj| target(j_lo + n_train + jj, tau)).collect();
        let y_test = apply_readout(test.as_view(), &readout);
        // A degenerate (constant) readout has no reconstruction accuracy.
        m.push(pearson(&y_test, &z_test).unwrap_or(0.0));

        if let Some(acc) = m_in.as_mut() {
            let y_train = apply_readout(train.as_view(), &readout);
            acc.push(pearson(&y_train, &z_train).unwrap_or(0.0));
        }
        if let (Some(acc), Some(rep)) = (gamma.as_mut(), replica) {
            let rep_test = rep.states().columns(j_lo + n_train, n_test);
            let y_rep = apply_readout(rep_test.as_view(), &readout);
            let g = match readout_consistency(&y_test, &y_rep) {
                Ok(v) => v,
                Err(Error::ZeroVarianceReadout) => f64::NAN,
                Err(e) => return Err(e),
            };
            acc.push(g);
        }
    }

    let capacity = memory_capacity(&m);
    Ok(MemoryProfile {
        lags: (0..=cfg.tau_max).collect(),
        m,
        m_in_sample: m_in,
        gamma_r_sq: gamma,
        capacity,
        lambda: cfg.lambda,
        train_len: n_train,
        test_len: n_test,
        alignment_offset: offset,
        held_out: true,
    })
}

/// Run parameters for [`memory_task`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MemoryRunConfig {
    pub washout: usize,
    pub noise_mix: f64,
    /// Also run a replica and report Gamma_R^2 per lag.
    pub with_replica: bool,
    pub master_seed: u64,
    pub task: MemoryTaskConfig,
}

impl Default for MemoryRunConfig {
    fn default() -> Self {
        Self {
            washout: 1000,
            noise_mix: 0.0,
            with_replica: false,
            master_seed: 0,
            task: MemoryTaskConfig::default(),
        }
    }
}

/// Convenience wrapper: run the network (plus a replica if requested) under
/// the drive and evaluate the memory profile.
pub fn memory_task(
    net: &NetworkRealization,
    drive: &Drive,
    cfg: &MemoryRunConfig,
) -> Result<MemoryProfile> {
    if cfg.with_replica {
        let ens = replica_run(net, drive, 2, cfg.washout, cfg.noise_mix, cfg.master_seed)?;
        memory_profile(ens.trajectory(0), Some(ens.trajectory(1)), drive, &cfg.task)
    } else {
        let seed = derive_seed(cfg.master_seed, 0);
        let x0 = ReservoirState::random(net.size(), seed);
        let traj = run(net, drive, &x0, cfg.washout, cfg.noise_mix, seed)?;
        memory_profile(&traj, None, drive, &cfg.task)
    }
}
