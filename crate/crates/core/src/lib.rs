//! Echo-state networks and the consistency of driven reservoirs.
//!
//! This crate builds random echo-state networks, runs their deterministic or
//! noise-injected dynamics, and measures how much of the response is a
//! function of the drive:
//!
//! - [`reservoir`] — network construction, spectral-radius scaling, stepping.
//! - [`signals`] — Gaussian drives and single-sample perturbed families.
//! - [`replica`] — the replica test and consistency correlations.
//! - [`readout`] — ridge-trained linear readouts, the lagged-reconstruction
//!   memory task, memory capacity.
//! - [`lyapunov`] — conditional Lyapunov spectra and the Kaplan-Yorke
//!   dimension.
//! - [`profile`] — covariance PCA, whitening, and the consistency profile.
//!
//! Everything is a pure function of explicit seeds; see [`rng`] for the
//! stream discipline.

pub mod error;
pub mod lyapunov;
pub mod profile;
pub mod readout;
pub mod replica;
pub mod reservoir;
pub mod rng;
pub mod signals;
mod stats;

pub use error::{Error, Result};
pub use lyapunov::{cle_spectrum, jacobian, kaplan_yorke, CleConfig, LyapunovReport};
pub use profile::{
    consistent_component, covariance, cross_covariance, pc_readout_consistencies, profile,
    residual_component, test_system_ensemble, test_system_sample, whitening_transform,
    with_measurement_noise,
    ConsistencyProfile, ConsistentEstimator, CovarianceDecomposition, ProfileConfig, Whitening,
};
pub use readout::{
    apply_readout, memory_capacity, memory_profile, memory_task, ridge_fit, MemoryProfile,
    MemoryRunConfig, MemoryTaskConfig, Readout,
};
pub use replica::{
    consistency_report, global_consistency, node_consistency, readout_consistency, replica_run,
    ConsistencyReport, ReplicaEnsemble, ReplicaSeed,
};
pub use reservoir::{
    build_network, run, spectral_radius, step, NetworkRealization, NetworkSpec, ReservoirState,
    Trajectory,
};
pub use signals::{gaussian_drive, perturbed_family, Drive};
