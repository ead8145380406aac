//! Cross-module behavior of driven echo-state networks at moderate scale:
//! ergodicity of the consistent-component estimators, memory against the
//! consistency transition, and the stability crossing.

use esn_core::lyapunov::{cle_spectrum, CleConfig};
use esn_core::profile::{consistent_component, covariance, cross_covariance};
use esn_core::readout::{memory_profile, MemoryTaskConfig};
use esn_core::replica::{consistency_report, replica_run};
use esn_core::reservoir::{build_network, NetworkSpec};
use esn_core::signals::gaussian_drive;
use nalgebra::DMatrix;

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn spec(n: usize, p: f64, rho: f64, seed: u64) -> NetworkSpec {
    NetworkSpec { size: n, wiring_p: p, spectral_radius: rho, input_dim: 1, bias: 1.0, seed }
}

/// Covariance of the 16-replica mean matches the cross-covariance of one
/// replica pair: the ensemble mean converges to the consistent component.
#[test]
fn ergodicity_identity_in_the_inconsistent_regime() {
    let net = build_network(&spec(200, 0.025, 3.0, 301)).unwrap();
    let drive = gaussian_drive(101_000, 1, 302);
    let ens = replica_run(&net, &drive, 16, 1000, 0.0, 303).unwrap();

    let xc = consistent_component(&ens);
    let cov_mean = covariance(&xc).matrix;
    let cov_pair = cross_covariance(ens.trajectory(0), ens.trajectory(1));
    let rel = frobenius(&(&cov_mean - &cov_pair)) / frobenius(&cov_pair);
    assert!(rel <= 0.05, "ergodicity mismatch {rel}");
}

/// In the inconsistent regime the reconstruction accuracy at large lags
/// exceeds the fully consistent network's, while the instantaneous input
/// stays strongly recoverable at unit radius.
#[test]
fn large_lag_memory_survives_inconsistency() {
    let drive = gaussian_drive(21_000, 1, 310);
    let task = MemoryTaskConfig { tau_max: 25, ..Default::default() };

    let net1 = build_network(&spec(500, 0.10, 1.0, 311)).unwrap();
    let ens1 = replica_run(&net1, &drive, 2, 1000, 0.0, 312).unwrap();
    let prof1 = memory_profile(ens1.trajectory(0), None, &drive, &task).unwrap();
    assert!(prof1.m[0] > 0.99, "M(0) = {}", prof1.m[0]);

    let net3 = net1.rescaled(3.0).unwrap();
    let ens3 = replica_run(&net3, &drive, 2, 1000, 0.0, 312).unwrap();
    let prof3 = memory_profile(ens3.trajectory(0), None, &drive, &task).unwrap();

    let mean = |m: &[f64], lo: usize, hi: usize| -> f64 {
        m[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
    };
    let late1 = mean(&prof1.m, 11, 20);
    let late3 = mean(&prof3.m, 11, 20);
    assert!(
        late3 > late1,
        "expected rho=3 to beat rho=1 at lags 11..20: {late3} vs {late1}"
    );
}

/// Memory capacity peaks at the consistency transition (coarse grid).
#[test]
fn memory_capacity_peaks_at_the_transition() {
    let rhos = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let realizations = 2u64;
    let mut mean_gamma = vec![0.0; rhos.len()];
    let mut mean_imc = vec![0.0; rhos.len()];
    for j in 0..realizations {
        let base = build_network(&spec(300, 0.10, 1.0, 320 + j)).unwrap();
        let drive = gaussian_drive(9000, 1, 330 + j);
        for (gi, &rho) in rhos.iter().enumerate() {
            let net = base.rescaled(rho).unwrap();
            let ens = replica_run(&net, &drive, 2, 1000, 0.0, 340 + j).unwrap();
            let report = consistency_report(&ens).unwrap();
            let prof = memory_profile(
                ens.trajectory(0),
                None,
                &drive,
                &MemoryTaskConfig { tau_max: 40, ..Default::default() },
            )
            .unwrap();
            mean_gamma[gi] += report.gamma_hat_sq / realizations as f64;
            mean_imc[gi] += prof.capacity / realizations as f64;
        }
    }
    let transition = rhos
        .iter()
        .zip(&mean_gamma)
        .find(|(_, &g)| g < 0.99)
        .map(|(&r, _)| r)
        .expect("no transition found on the grid");
    let argmax = rhos
        .iter()
        .zip(&mean_imc)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(&r, _)| r)
        .unwrap();
    assert!(
        (argmax - transition).abs() <= 0.51,
        "I_MC argmax {argmax} vs transition {transition}; gamma {mean_gamma:?} imc {mean_imc:?}"
    );
}

/// The largest conditional Lyapunov exponent crosses zero where global
/// consistency departs from one (single realization, coarse grid).
#[test]
fn stability_crossing_matches_consistency_loss() {
    let base = build_network(&spec(200, 0.025, 1.0, 350)).unwrap();
    let drive = gaussian_drive(10_000, 1, 351);
    let rhos: Vec<f64> = (0..11).map(|k| 1.0 + 0.25 * k as f64).collect();
    let mut first_unstable = None;
    let mut first_inconsistent = None;
    for &rho in &rhos {
        let net = base.rescaled(rho).unwrap();
        let cle = cle_spectrum(
            &net,
            &drive,
            &CleConfig {
                n_steps: 8000,
                washout: 1000,
                n_exponents: Some(1),
                init_seed: 7,
                ..Default::default()
            },
        )
        .unwrap();
        if first_unstable.is_none() && cle.lambda_max() > 0.0 {
            first_unstable = Some(rho);
        }
        let ens = replica_run(&net, &drive, 2, 1000, 0.0, 352).unwrap();
        let report = consistency_report(&ens).unwrap();
        if first_inconsistent.is_none() && report.gamma_hat_sq < 0.99 {
            first_inconsistent = Some(rho);
        }
    }
    let (u, i) = (first_unstable.expect("no crossing"), first_inconsistent.expect("stays consistent"));
    assert!((u - i).abs() <= 0.26, "lambda crossing {u} vs consistency loss {i}");
}
