//! Shared per-cell measurements used by the recipes and the acceptance
//! suite: realization banks, consistency cells, memory cells, Lyapunov
//! cells, and the matched-consistency bisection.
//!
//! Seed discipline: every quantity derives from the master seed and the
//! realization index through fixed tags, so results are independent of
//! execution order and parallelism. The same realization index reuses the
//! same base network draw and drive across the whole grid; grid radii are
//! applied by exact rescaling.

use anyhow::{anyhow, Result};
use esn_core::lyapunov::{cle_spectrum, CleConfig, LyapunovReport};
use esn_core::readout::{memory_profile, MemoryProfile, MemoryTaskConfig};
use esn_core::replica::{consistency_report, replica_run, ReplicaEnsemble};
use esn_core::reservoir::{build_network, NetworkRealization, NetworkSpec};
use esn_core::rng::derive_seed;
use esn_core::signals::{gaussian_drive, Drive};

use crate::config::ExperimentConfig;

// Seed-derivation tags (documented constants; part of reproducibility).
pub const TAG_NETWORK: u64 = 0x0100_0000;
pub const TAG_DRIVE: u64 = 0x0200_0000;
pub const TAG_REPLICAS: u64 = 0x0300_0000;
pub const TAG_INIT: u64 = 0x0400_0000;
pub const TAG_MEASUREMENT: u64 = 0x0500_0000;

/// Base network for one realization, drawn at unit spectral radius; grid
/// points rescale it exactly.
pub fn base_network(cfg: &ExperimentConfig, realization: usize) -> Result<NetworkRealization> {
    let spec = NetworkSpec {
        size: cfg.network.size,
        wiring_p: cfg.network.wiring_p,
        spectral_radius: 1.0,
        input_dim: cfg.network.input_dim,
        bias: cfg.network.bias,
        seed: derive_seed(cfg.master_seed, TAG_NETWORK + realization as u64),
    };
    Ok(build_network(&spec)?)
}

/// The shared drive for one realization.
pub fn drive_for(cfg: &ExperimentConfig, realization: usize) -> Drive {
    gaussian_drive(
        cfg.drive_len,
        cfg.network.input_dim,
        derive_seed(cfg.master_seed, TAG_DRIVE + realization as u64),
    )
}

pub fn replica_seed(cfg: &ExperimentConfig, realization: usize) -> u64 {
    derive_seed(cfg.master_seed, TAG_REPLICAS + realization as u64)
}

/// Replica ensemble plus its global consistency.
pub struct ConsistencyCell {
    pub gamma_hat_sq: f64,
    pub ensemble: ReplicaEnsemble,
}

pub fn consistency_cell(
    cfg: &ExperimentConfig,
    net: &NetworkRealization,
    drive: &Drive,
    noise_mix: f64,
    realization: usize,
) -> Result<ConsistencyCell> {
    let ensemble = replica_run(
        net,
        drive,
        cfg.replicas,
        cfg.washout,
        noise_mix,
        replica_seed(cfg, realization),
    )?;
    let gamma_hat_sq = consistency_report(&ensemble)?.gamma_hat_sq;
    Ok(ConsistencyCell { gamma_hat_sq, ensemble })
}

/// Consistency plus the held-out memory profile of the first replica (the
/// second replica supplies the readout-consistency column).
pub struct MemoryCell {
    pub gamma_hat_sq: f64,
    pub profile: MemoryProfile,
}

pub fn memory_cell(
    cfg: &ExperimentConfig,
    net: &NetworkRealization,
    drive: &Drive,
    noise_mix: f64,
    ridge_lambda: f64,
    realization: usize,
) -> Result<MemoryCell> {
    let cell = consistency_cell(cfg, net, drive, noise_mix, realization)?;
    let task = MemoryTaskConfig { tau_max: cfg.tau_max, lambda: ridge_lambda, ..Default::default() };
    let profile = memory_profile(
        cell.ensemble.trajectory(0),
        Some(cell.ensemble.trajectory(1)),
        drive,
        &task,
    )?;
    Ok(MemoryCell { gamma_hat_sq: cell.gamma_hat_sq, profile })
}

/// Conditional Lyapunov spectrum of one cell (deterministic dynamics only).
pub fn lyapunov_cell(
    cfg: &ExperimentConfig,
    net: &NetworkRealization,
    drive: &Drive,
    realization: usize,
    n_exponents: Option<usize>,
) -> Result<LyapunovReport> {
    let n_steps = cfg.cle_steps.min(drive.len().saturating_sub(cfg.washout));
    Ok(cle_spectrum(
        net,
        drive,
        &CleConfig {
            n_steps,
            washout: cfg.washout,
            n_exponents,
            init_seed: derive_seed(cfg.master_seed, TAG_INIT + realization as u64),
            ..Default::default()
        },
    )?)
}

/// Bisect the noise mix at a base network until the global consistency
/// matches `target` within `tol`. The consistency is monotone decreasing in
/// the mix, from 1 at r = 0.
pub fn match_noise_level(
    cfg: &ExperimentConfig,
    base: &NetworkRealization,
    drive: &Drive,
    target: f64,
    tol: f64,
    realization: usize,
) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let gamma = consistency_cell(cfg, base, drive, mid, realization)?.gamma_hat_sq;
        if (gamma - target).abs() <= tol {
            return Ok((mid, gamma));
        }
        if gamma > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(anyhow!(
        "noise bisection did not reach consistency {target:.4} within tolerance {tol}"
    ))
}
