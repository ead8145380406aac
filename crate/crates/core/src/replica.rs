//! The replica test.
//!
//! Identical copies of a network are driven with the same signal from
//! different initial conditions (and, for noisy dynamics, different noise
//! streams). Consistency correlations compare the responses: per node,
//! globally averaged, and for scalar readouts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::reservoir::{run, NetworkRealization, ReservoirState, Trajectory};
use crate::rng::derive_seed;
use crate::signals::Drive;
use crate::stats::{centered_sums, pearson, EPS_VAR};

/// Seeds that produced one replica's initial condition and noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaSeed {
    pub init_seed: u64,
    pub noise_seed: u64,
}

/// K >= 2 trajectories driven by the identical input sequence.
#[derive(Debug, Clone)]
pub struct ReplicaEnsemble {
    trajectories: Vec<Trajectory>,
    /// The shared drive; `None` for synthetic ensembles built directly from
    /// sample processes.
    drive: Option<Drive>,
    seeds: Vec<ReplicaSeed>,
    noise_mix: f64,
}

impl ReplicaEnsemble {
    pub fn from_parts(
        trajectories: Vec<Trajectory>,
        drive: Option<Drive>,
        seeds: Vec<ReplicaSeed>,
        noise_mix: f64,
    ) -> Self {
        assert!(trajectories.len() >= 2, "contract violation: an ensemble needs K >= 2 replicas");
        let (n, t) = (trajectories[0].dim(), trajectories[0].len());
        assert!(
            trajectories.iter().all(|tr| tr.dim() == n && tr.len() == t),
            "contract violation: replica trajectories must share shape"
        );
        Self { trajectories, drive, seeds, noise_mix }
    }

    pub fn replica_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn dim(&self) -> usize {
        self.trajectories[0].dim()
    }

    pub fn len(&self) -> usize {
        self.trajectories[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories[0].is_empty()
    }

    pub fn trajectory(&self, k: usize) -> &Trajectory {
        &self.trajectories[k]
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn drive(&self) -> Option<&Drive> {
        self.drive.as_ref()
    }

    pub fn seeds(&self) -> &[ReplicaSeed] {
        &self.seeds
    }

    pub fn noise_mix(&self) -> f64 {
        self.noise_mix
    }
}

/// Run K replicas of `net` under the shared `drive`.
///
/// Replica `k` draws its initial condition from `derive_seed(master_seed, k)`
/// and, when `noise_mix > 0`, its per-step noise from the same derived seed's
/// run-noise stream, so replicas share the drive and differ only in those
/// streams. Runs execute in parallel; results are kept in replica order.
pub fn replica_run(
    net: &NetworkRealization,
    drive: &Drive,
    replicas: usize,
    washout: usize,
    noise_mix: f64,
    master_seed: u64,
) -> Result<ReplicaEnsemble> {
    assert!(replicas >= 2, "contract violation: replica test needs K >= 2");
    let seeds: Vec<ReplicaSeed> = (0..replicas)
        .map(|k| {
            let s = derive_seed(master_seed, k as u64);
            ReplicaSeed { init_seed: s, noise_seed: s }
        })
        .collect();
    let trajectories: Result<Vec<Trajectory>> = seeds
        .par_iter()
        .map(|seed| {
            let x0 = ReservoirState::random(net.size(), seed.init_seed);
            run(net, drive, &x0, washout, noise_mix, seed.noise_seed)
        })
        .collect();
    Ok(ReplicaEnsemble::from_parts(trajectories?, Some(drive.clone()), seeds, noise_mix))
}

/// Per-node consistency: the Pearson correlation of each node's two
/// normalized time series. Nodes failing the variance guard in either
/// trajectory are excluded and reported as NaN.
pub fn node_consistency(a: &Trajectory, b: &Trajectory) -> Vec<f64> {
    assert_eq!(a.dim(), b.dim(), "contract violation: trajectory widths differ");
    assert_eq!(a.len(), b.len(), "contract violation: trajectory lengths differ");
    assert!(a.len() >= 2, "contract violation: need at least 2 samples");
    (0..a.dim())
        .map(|i| {
            let sa = a.node_series(i);
            let sb = b.node_series(i);
            pearson(&sa, &sb).unwrap_or(f64::NAN)
        })
        .collect()
}

/// Mean of the included per-node consistencies.
pub fn global_consistency(gamma_sq: &[f64]) -> Result<f64> {
    let included: Vec<f64> = gamma_sq.iter().copied().filter(|v| !v.is_nan()).collect();
    if included.is_empty() {
        return Err(Error::DegenerateEnsemble);
    }
    Ok(included.iter().sum::<f64>() / included.len() as f64)
}

/// Consistency correlation of two scalar readout series (both normalized).
pub fn readout_consistency(y: &[f64], y_replica: &[f64]) -> Result<f64> {
    assert_eq!(y.len(), y_replica.len(), "contract violation: readout lengths differ");
    assert!(y.len() >= 2, "contract violation: need at least 2 samples");
    pearson(y, y_replica).ok_or(Error::ZeroVarianceReadout)
}

/// Per-node and global consistency of one replica pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// gamma_i^2 per node; NaN marks excluded nodes.
    pub node_gamma_sq: Vec<f64>,
    /// Mean over included nodes.
    pub gamma_hat_sq: f64,
    /// Nodes dropped by the variance guard.
    pub excluded_nodes: usize,
    /// Sample length the correlations were computed over.
    pub sample_len: usize,
    /// Readout consistency, when a readout pair was evaluated.
    pub readout_gamma_sq: Option<f64>,
}

impl ConsistencyReport {
    /// Flat CSV: node index, gamma_i^2 (NaN for excluded nodes).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node,gamma_sq")?;
        for (i, g) in self.node_gamma_sq.iter().enumerate() {
            writeln!(w, "{i},{g}")?;
        }
        Ok(())
    }
}

/// Build a [`ConsistencyReport`] from the first replica pair of an ensemble.
/// With K > 2 the extra replicas are kept for ensemble averages elsewhere;
/// the two-response definition uses the first pair.
pub fn consistency_report(ensemble: &ReplicaEnsemble) -> Result<ConsistencyReport> {
    let gamma = node_consistency(ensemble.trajectory(0), ensemble.trajectory(1));
    let gamma_hat_sq = global_consistency(&gamma)?;
    let excluded = gamma.iter().filter(|v| v.is_nan()).count();
    Ok(ConsistencyReport {
        sample_len: ensemble.len(),
        node_gamma_sq: gamma,
        gamma_hat_sq,
        excluded_nodes: excluded,
        readout_gamma_sq: None,
    })
}

/// Variance guard check used by the node exclusion rule, exposed for tests.
pub fn node_variance_excluded(series: &[f64]) -> bool {
    let (_, s, _) = centered_sums(series, series);
    (s / series.len() as f64) < EPS_VAR
}
