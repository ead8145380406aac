//! Decomposition of the reservoir response into consistent and inconsistent
//! components, and the consistency profile.
//!
//! The full response covariance `C_xx` is whitened by its symmetric inverse
//! square root `T = Q S^-1 Q^T`. The consistent component's covariance `C_c`
//! (estimated as the cross-covariance of two replicas, which equals it in the
//! ergodic limit) is transformed into those coordinates; its eigenvalues are
//! the consistency levels per direction and its eigenvectors, pulled back
//! through the transform, are the consistency-direction readouts.
//!
//! Covariances are mean-removed: with a uniform bias the nodes have nonzero
//! means, and centering makes the profile levels correlations. This choice is
//! recorded in the serialized output.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::replica::{consistency_report, readout_consistency, ReplicaEnsemble, ReplicaSeed};
use crate::reservoir::Trajectory;
use crate::rng::{derive_seed, stream_rng, STREAM_DRIVE, STREAM_MEASUREMENT, STREAM_RUN_NOISE};

/// Covariance matrix with its principal decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceDecomposition {
    /// Symmetric mean-removed second-moment matrix.
    pub matrix: DMatrix<f64>,
    /// Orthonormal principal directions, one column per component, ordered by
    /// descending component size.
    pub directions: DMatrix<f64>,
    /// Component sizes sigma^2, nonincreasing, clamped at zero.
    pub sizes: DVector<f64>,
}

fn mean_removed_cross(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "contract violation: trajectory widths differ");
    assert_eq!(a.ncols(), b.ncols(), "contract violation: trajectory lengths differ");
    assert!(a.ncols() >= 2, "contract violation: need at least 2 samples");
    let t = a.ncols() as f64;
    let ma = a.column_mean();
    let mb = b.column_mean();
    let mut c = a * b.transpose() / t;
    c.ger(-1.0, &ma, &mb, 1.0);
    // The ergodic limit is symmetric; finite samples are not.
    let ct = c.transpose();
    (c + ct) * 0.5
}

fn decompose_symmetric(matrix: DMatrix<f64>) -> CovarianceDecomposition {
    let eig = matrix.clone().symmetric_eigen();
    let n = matrix.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let mut directions = DMatrix::zeros(n, n);
    let mut sizes = DVector::zeros(n);
    for (k, &i) in order.iter().enumerate() {
        directions.set_column(k, &eig.eigenvectors.column(i));
        sizes[k] = eig.eigenvalues[i].max(0.0);
    }
    CovarianceDecomposition { matrix, directions, sizes }
}

/// Mean-removed covariance of a trajectory with its principal decomposition.
pub fn covariance(traj: &Trajectory) -> CovarianceDecomposition {
    decompose_symmetric(mean_removed_cross(traj.states(), traj.states()))
}

/// Mean-removed cross-covariance of two replica trajectories, symmetrized as
/// `(C + C^T)/2` before any decomposition. In the ergodic limit this equals
/// the covariance of the consistent component.
pub fn cross_covariance(a: &Trajectory, b: &Trajectory) -> DMatrix<f64> {
    mean_removed_cross(a.states(), b.states())
}

/// Pointwise mean of the replica states: the consistent component.
pub fn consistent_component(ensemble: &ReplicaEnsemble) -> Trajectory {
    let k = ensemble.replica_count() as f64;
    let mut acc = ensemble.trajectory(0).states().clone();
    for i in 1..ensemble.replica_count() {
        acc += ensemble.trajectory(i).states();
    }
    Trajectory::from_states(acc / k, ensemble.trajectory(0).washout())
}

/// Residual of replica `i` against the consistent component (the replica's
/// inconsistent component).
pub fn residual_component(ensemble: &ReplicaEnsemble, i: usize) -> Trajectory {
    let xc = consistent_component(ensemble);
    Trajectory::from_states(
        ensemble.trajectory(i).states() - xc.states(),
        ensemble.trajectory(i).washout(),
    )
}

/// Unbiased estimate of the inconsistent component's covariance: the mean of
/// the residual covariances, scaled by `K/(K-1)` to undo the shrinkage from
/// subtracting the K-replica mean.
pub fn residual_covariance(ensemble: &ReplicaEnsemble) -> DMatrix<f64> {
    let k = ensemble.replica_count();
    let n = ensemble.dim();
    let mut acc = DMatrix::zeros(n, n);
    for i in 0..k {
        let r = residual_component(ensemble, i);
        acc += mean_removed_cross(r.states(), r.states());
    }
    acc * (1.0 / (k - 1) as f64)
}

/// Whitening transform of a response: the symmetric inverse square root of
/// its covariance on the retained subspace.
#[derive(Debug, Clone)]
pub struct Whitening {
    /// `T = Q S^{-1} Q^T` over the retained directions (N x N, rank =
    /// `retained`).
    pub matrix: DMatrix<f64>,
    /// Retained principal directions (N x retained).
    pub basis: DMatrix<f64>,
    /// `1/sigma` per retained direction.
    pub inv_sigma: DVector<f64>,
    pub retained: usize,
    /// Near-null directions projected out.
    pub discarded: usize,
}

impl Whitening {
    /// Reduced whitening map `B = diag(1/sigma) Q^T` (retained x N); rows are
    /// whitened coordinates.
    pub fn reduced(&self) -> DMatrix<f64> {
        let mut b = self.basis.transpose();
        for (r, mut row) in b.row_iter_mut().enumerate() {
            row *= self.inv_sigma[r];
        }
        b
    }
}

/// Build the whitening transform, projecting out directions whose component
/// size falls below `null_threshold * max(sigma^2)`.
pub fn whitening_transform(
    decomposition: &CovarianceDecomposition,
    null_threshold: f64,
) -> Result<Whitening> {
    let n = decomposition.sizes.len();
    let max_size = decomposition.sizes.max();
    if !(max_size > 0.0) {
        return Err(Error::DegenerateResponse);
    }
    let cutoff = null_threshold * max_size;
    let retained: Vec<usize> = (0..n).filter(|&i| decomposition.sizes[i] > cutoff).collect();
    if retained.is_empty() {
        return Err(Error::DegenerateResponse);
    }
    let m = retained.len();
    let mut basis = DMatrix::zeros(n, m);
    let mut inv_sigma = DVector::zeros(m);
    for (k, &i) in retained.iter().enumerate() {
        basis.set_column(k, &decomposition.directions.column(i));
        inv_sigma[k] = 1.0 / decomposition.sizes[i].sqrt();
    }
    let mut scaled = basis.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= inv_sigma[k];
    }
    let matrix = &scaled * basis.transpose();
    Ok(Whitening { matrix, basis, inv_sigma, retained: m, discarded: n - m })
}

/// Which estimator produces the consistent component's covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistentEstimator {
    /// Cross-covariance of replicas 1 and 2 (unbiased; the default).
    CrossPair,
    /// Covariance of the ensemble mean (biased by residual variance / K).
    EnsembleMean,
}

/// Settings for a consistency profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProfileConfig {
    /// Measurement-noise amplitude added to every state sample, independent
    /// per replica, before any covariance is formed. Equivalent to ridge
    /// regularization of readouts.
    pub lambda: f64,
    /// Relative size cutoff below which directions are projected out of the
    /// whitening transform.
    pub null_threshold: f64,
    /// Levels above this count towards the effective consistent dimension.
    pub level_threshold: f64,
    /// Seed for the measurement-noise streams.
    pub measurement_seed: u64,
    pub estimator: ConsistentEstimator,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            null_threshold: 1e-10,
            level_threshold: 0.5,
            measurement_seed: 0,
            estimator: ConsistentEstimator::CrossPair,
        }
    }
}

/// Ordered consistency levels per response direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyProfile {
    /// Consistency level per retained direction, descending. Eigenvalues of
    /// the whitened consistent covariance; small negative estimates clamp to
    /// zero.
    pub levels: Vec<f64>,
    /// Readout vectors realizing each level, in original coordinates
    /// (N x retained; not orthonormal).
    #[serde(skip)]
    pub directions: DMatrix<f64>,
    /// Component sizes of the full response, descending (length N).
    pub full_sizes: Vec<f64>,
    /// Global consistency of the ensemble's first replica pair, measured on
    /// the raw (pre-measurement-noise) trajectories.
    pub gamma_hat_sq: f64,
    /// Directions projected out of the whitening transform.
    pub discarded_directions: usize,
    /// Negative level estimates clamped to zero.
    pub clamped_negative_levels: usize,
    /// Count of levels above the configured threshold.
    pub effective_dim: usize,
    pub level_threshold: f64,
    pub lambda: f64,
    pub estimator: ConsistentEstimator,
    /// Covariances are mean-removed before decomposition.
    pub mean_removed: bool,
}

impl ConsistencyProfile {
    /// CSV: direction index, full-response sigma^2, consistency level,
    /// retained flag. Discarded directions carry empty level cells.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "direction,sigma_sq,level,retained")?;
        for (i, &s) in self.full_sizes.iter().enumerate() {
            if let Some(level) = self.levels.get(i) {
                writeln!(w, "{i},{s},{level},1")?;
            } else {
                writeln!(w, "{i},{s},,0")?;
            }
        }
        Ok(())
    }
}

fn add_measurement_noise(states: &DMatrix<f64>, lambda: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, STREAM_MEASUREMENT);
    let mut out = states.clone();
    // Column-major: per time step, nodes ascending.
    for v in out.iter_mut() {
        *v += lambda * rng.sample::<f64, _>(StandardNormal);
    }
    out
}

/// A copy of the trajectory with IID measurement noise of amplitude `lambda`
/// added to every sample (drawn from the measurement stream of `seed`,
/// column-major).
pub fn with_measurement_noise(traj: &Trajectory, lambda: f64, seed: u64) -> Trajectory {
    Trajectory::from_states(
        add_measurement_noise(traj.states(), lambda, seed),
        traj.washout(),
    )
}

/// Compute the consistency profile of a replica ensemble.
///
/// Pipeline: optionally corrupt each replica's states with independent
/// measurement noise; take the full covariance from replica 1 and the
/// consistent covariance from the configured estimator; whiten; the
/// eigenvalues of the whitened consistent covariance are the levels and the
/// pulled-back eigenvectors are the consistency-direction readouts.
pub fn profile(ensemble: &ReplicaEnsemble, cfg: &ProfileConfig) -> Result<ConsistencyProfile> {
    let report = consistency_report(ensemble)?;

    let noisy: Option<Vec<DMatrix<f64>>> = (cfg.lambda > 0.0).then(|| {
        (0..ensemble.replica_count())
            .map(|i| {
                add_measurement_noise(
                    ensemble.trajectory(i).states(),
                    cfg.lambda,
                    derive_seed(cfg.measurement_seed, i as u64),
                )
            })
            .collect()
    });
    let states = |i: usize| -> &DMatrix<f64> {
        match &noisy {
            Some(v) => &v[i],
            None => ensemble.trajectory(i).states(),
        }
    };

    let dec_full = decompose_symmetric(mean_removed_cross(states(0), states(0)));
    let consistent_cov = match cfg.estimator {
        ConsistentEstimator::CrossPair => mean_removed_cross(states(0), states(1)),
        ConsistentEstimator::EnsembleMean => {
            let k = ensemble.replica_count() as f64;
            let mut acc = states(0).clone();
            for i in 1..ensemble.replica_count() {
                acc += states(i);
            }
            acc /= k;
            mean_removed_cross(&acc, &acc)
        }
    };

    let whitening = whitening_transform(&dec_full, cfg.null_threshold)?;
    let reduced = whitening.reduced();
    let mut transformed = &reduced * consistent_cov * reduced.transpose();
    let tt = transformed.transpose();
    transformed = (transformed + tt) * 0.5;

    let eig = transformed.symmetric_eigen();
    let m = whitening.retained;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());

    let mut levels = Vec::with_capacity(m);
    let mut clamped = 0usize;
    let mut whitened_dirs = DMatrix::zeros(m, m);
    for (k, &i) in order.iter().enumerate() {
        let v = eig.eigenvalues[i];
        if v < 0.0 {
            clamped += 1;
        }
        levels.push(v.max(0.0));
        whitened_dirs.set_column(k, &eig.eigenvectors.column(i));
    }
    // Pull eigenvectors back through the whitening map: the readout realizing
    // whitened direction q is R = Q S^{-1} q.
    let mut pullback = whitening.basis.clone();
    for (c, mut col) in pullback.column_iter_mut().enumerate() {
        col *= whitening.inv_sigma[c];
    }
    let directions = pullback * whitened_dirs;

    let effective_dim = levels.iter().filter(|&&v| v > cfg.level_threshold).count();
    Ok(ConsistencyProfile {
        levels,
        directions,
        full_sizes: dec_full.sizes.iter().copied().collect(),
        gamma_hat_sq: report.gamma_hat_sq,
        discarded_directions: whitening.discarded,
        clamped_negative_levels: clamped,
        effective_dim,
        level_threshold: cfg.level_threshold,
        lambda: cfg.lambda,
        estimator: cfg.estimator,
        mean_removed: true,
    })
}

/// Readout consistencies along a set of directions: for each column `q` of
/// `directions`, the consistency correlation of the projections `q . a(t)`
/// and `q . b(t)`. Zero-variance projections are excluded (NaN).
pub fn pc_readout_consistencies(
    a: &Trajectory,
    b: &Trajectory,
    directions: &DMatrix<f64>,
) -> Vec<f64> {
    assert_eq!(a.dim(), directions.nrows(), "contract violation: direction length mismatch");
    assert_eq!(a.dim(), b.dim(), "contract violation: trajectory widths differ");
    assert_eq!(a.len(), b.len(), "contract violation: trajectory lengths differ");
    let pa = a.states().tr_mul(directions);
    let pb = b.states().tr_mul(directions);
    (0..directions.ncols())
        .map(|c| {
            let ya: Vec<f64> = pa.column(c).iter().copied().collect();
            let yb: Vec<f64> = pb.column(c).iter().copied().collect();
            match readout_consistency(&ya, &yb) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            }
        })
        .collect()
}

/// The planar test system with an arbitrary replica count: a shared
/// two-component consistent process plus independent per-replica
/// inconsistent processes.
pub fn test_system_ensemble(len: usize, replicas: usize, seed: u64) -> ReplicaEnsemble {
    assert!(len >= 2, "contract violation: need at least 2 samples");
    assert!(replicas >= 2, "contract violation: need at least 2 replicas");
    let mut shared = stream_rng(derive_seed(seed, 0), STREAM_DRIVE);
    let mut replica_rngs: Vec<_> = (0..replicas)
        .map(|i| stream_rng(derive_seed(seed, 1 + i as u64), STREAM_RUN_NOISE))
        .collect();
    let mut states = vec![DMatrix::zeros(2, len); replicas];
    for t in 0..len {
        let xi1: f64 = shared.sample(StandardNormal);
        let xi2: f64 = shared.sample(StandardNormal);
        let xc = [xi1 + 0.5 * xi2, xi1 - 0.5 * xi2];
        for (i, rng) in replica_rngs.iter_mut().enumerate() {
            let nu1: f64 = rng.sample(StandardNormal);
            let nu2: f64 = rng.sample(StandardNormal);
            states[i][(0, t)] = xc[0] + nu1;
            states[i][(1, t)] = xc[1] + 0.3 * nu2;
        }
    }
    let seeds = (0..replicas)
        .map(|i| {
            let s = derive_seed(seed, 1 + i as u64);
            ReplicaSeed { init_seed: s, noise_seed: s }
        })
        .collect();
    let trajectories =
        states.into_iter().map(|s| Trajectory::from_states(s, 0)).collect();
    ReplicaEnsemble::from_parts(trajectories, None, seeds, 0.0)
}

/// The planar test system with two replicas:
/// `x^i(t) = xi_1 (1,1) + xi_2 (0.5,-0.5) + nu_1i (1,0) + nu_2i (0,0.3)`,
/// all coefficients IID standard-normal. Analytic covariances:
/// consistent `[[1.25, 0.75], [0.75, 1.25]]`, full `[[2.25, 0.75], [0.75, 1.34]]`.
pub fn test_system_sample(len: usize, seed: u64) -> ReplicaEnsemble {
    test_system_ensemble(len, 2, seed)
}

/// Analytic consistent covariance of the test system.
pub fn test_system_consistent_cov() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.25, 0.75, 0.75, 1.25])
}

/// Analytic full covariance of the test system.
pub fn test_system_full_cov() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[2.25, 0.75, 0.75, 1.34])
}
