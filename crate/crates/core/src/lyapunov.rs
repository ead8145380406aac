//! Conditional Lyapunov spectra of the driven map, by tangent-space
//! propagation with Gram-Schmidt (QR) reorthonormalization, and the
//! Kaplan-Yorke dimension.
//!
//! The tangent dynamics of `x(t+1) = tanh(W x(t) + V u(t+1) + beta)` is
//! `v(t+1) = diag(1 - x(t+1)^2) W v(t)`; an orthonormal frame is pushed along
//! the driven trajectory and the per-direction log growth factors accumulate
//! from the `R` diagonals of periodic QR factorizations. Exponents are in
//! nats per step. Only deterministic dynamics (noise mix 0) are supported.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{NetworkRealization, ReservoirState};
use crate::signals::Drive;

/// Settings for a spectrum computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CleConfig {
    /// Tangent-propagation steps after washout.
    pub n_steps: usize,
    /// Transient steps before accumulation starts.
    pub washout: usize,
    /// QR reorthonormalization period. 1 is the default: the contracting
    /// tail of the spectrum underflows quickly at these sizes.
    pub reortho_interval: usize,
    /// Number of leading exponents to compute; `None` for the full spectrum.
    pub n_exponents: Option<usize>,
    /// Must be 0; the conditional spectrum is defined for the deterministic
    /// map.
    pub noise_mix: f64,
    /// Convergence diagnostic: the running largest-exponent estimate over
    /// the final 10% of steps must drift less than this.
    pub drift_threshold: f64,
    /// Seed for the initial reservoir state.
    pub init_seed: u64,
}

impl Default for CleConfig {
    fn default() -> Self {
        Self {
            n_steps: 10_000,
            washout: 1000,
            reortho_interval: 1,
            n_exponents: None,
            noise_mix: 0.0,
            drift_threshold: 0.005,
            init_seed: 0,
        }
    }
}

/// A computed conditional Lyapunov spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// Exponents sorted descending, nats per step.
    pub exponents: Vec<f64>,
    pub n_steps: usize,
    pub reortho_interval: usize,
    /// Kaplan-Yorke dimension of the computed spectrum.
    pub kaplan_yorke: f64,
    /// Fraction of exponents below zero.
    pub negative_fraction: f64,
    /// Drift of the running largest-exponent estimate over the final 10%.
    pub lambda_max_drift: f64,
    /// Whether the drift stayed below the configured threshold.
    pub converged: bool,
}

impl LyapunovReport {
    pub fn lambda_max(&self) -> f64 {
        self.exponents[0]
    }
}

/// Exact linearization of the update map at a step with preactivation `a`:
/// `diag(1 - tanh(a)^2) * W`.
pub fn jacobian(preactivation: &DVector<f64>, weights: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(
        preactivation.len(),
        weights.nrows(),
        "contract violation: preactivation length mismatch"
    );
    let mut j = weights.clone();
    for i in 0..j.nrows() {
        let th = preactivation[i].tanh();
        let scale = 1.0 - th * th;
        for c in 0..j.ncols() {
            j[(i, c)] *= scale;
        }
    }
    j
}

/// Propagate an orthonormal frame through the tangent dynamics along the
/// driven trajectory and return the per-step exponents.
pub fn cle_spectrum(
    net: &NetworkRealization,
    drive: &Drive,
    cfg: &CleConfig,
) -> Result<LyapunovReport> {
    if cfg.noise_mix != 0.0 {
        return Err(Error::NoisyTangent);
    }
    assert!(cfg.n_steps >= 10, "contract violation: n_steps too small");
    assert!(cfg.reortho_interval >= 1, "contract violation: reortho interval must be >= 1");
    assert!(
        drive.len() >= cfg.washout + cfg.n_steps,
        "contract violation: drive shorter than washout + n_steps"
    );
    assert_eq!(drive.width(), net.input_dim(), "contract violation: drive width mismatch");
    drive.validate()?;

    let n = net.size();
    let k = cfg.n_exponents.unwrap_or(n).min(n).max(1);

    let mut x = ReservoirState::random(n, cfg.init_seed).0.as_slice().to_vec();
    let mut a = vec![0.0; n];
    let mut u = vec![0.0; drive.width()];

    let mut advance = |x: &mut Vec<f64>, a: &mut Vec<f64>, t: usize| {
        for (l, ul) in u.iter_mut().enumerate() {
            *ul = drive.value(t, l);
        }
        net.preactivation_into(x, &u, a);
        for (xi, &ai) in x.iter_mut().zip(a.iter()) {
            *xi = ai.tanh();
        }
    };

    for t in 0..cfg.washout {
        advance(&mut x, &mut a, t);
    }

    let mut frame = DMatrix::<f64>::identity(n, k);
    let mut acc = vec![0.0; k];
    let mut col_in = vec![0.0; n];
    let mut col_out = vec![0.0; n];

    let tail_start = cfg.n_steps - cfg.n_steps / 10;
    let mut tail_min = f64::INFINITY;
    let mut tail_max = f64::NEG_INFINITY;

    let mut since_reortho = 0usize;
    for t in 0..cfg.n_steps {
        advance(&mut x, &mut a, cfg.washout + t);
        // Tangent map: columns through W, rows scaled by sech^2 = 1 - x^2.
        for c in 0..k {
            for (i, v) in col_in.iter_mut().enumerate() {
                *v = frame[(i, c)];
            }
            net.weights_mul_into(&col_in, &mut col_out);
            for i in 0..n {
                frame[(i, c)] = (1.0 - x[i] * x[i]) * col_out[i];
            }
        }
        since_reortho += 1;
        let last = t + 1 == cfg.n_steps;
        if since_reortho == cfg.reortho_interval || last {
            let qr = frame.qr();
            let r = qr.r();
            for (c, av) in acc.iter_mut().enumerate() {
                *av += r[(c, c)].abs().ln();
            }
            frame = qr.q();
            since_reortho = 0;
            if t + 1 > tail_start {
                let running = acc[0] / (t + 1) as f64;
                tail_min = tail_min.min(running);
                tail_max = tail_max.max(running);
            }
        }
    }

    let mut exponents: Vec<f64> = acc.iter().map(|v| v / cfg.n_steps as f64).collect();
    exponents.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let negative_fraction = exponents.iter().filter(|&&v| v < 0.0).count() as f64 / k as f64;
    let drift = if tail_max.is_finite() { tail_max - tail_min } else { f64::INFINITY };
    Ok(LyapunovReport {
        kaplan_yorke: kaplan_yorke(&exponents),
        negative_fraction,
        lambda_max_drift: drift,
        converged: drift <= cfg.drift_threshold,
        exponents,
        n_steps: cfg.n_steps,
        reortho_interval: cfg.reortho_interval,
    })
}

/// Kaplan-Yorke dimension of a descending spectrum: 0 when the largest
/// exponent is negative; otherwise `j + (sum of the first j) / |lambda_{j+1}|`
/// with `j` the largest index keeping the cumulative sum nonnegative (capped
/// at the spectrum length).
pub fn kaplan_yorke(sorted_desc: &[f64]) -> f64 {
    assert!(
        sorted_desc.windows(2).all(|w| w[0] >= w[1]),
        "contract violation: spectrum must be sorted descending"
    );
    if sorted_desc.is_empty() || sorted_desc[0] < 0.0 {
        return 0.0;
    }
    let mut cumsum = 0.0;
    for (idx, &lam) in sorted_desc.iter().enumerate() {
        if cumsum + lam < 0.0 {
            // idx items so far kept the sum nonnegative; interpolate into
            // the (idx+1)-th.
            return idx as f64 + cumsum / lam.abs();
        }
        cumsum += lam;
    }
    sorted_desc.len() as f64
}
