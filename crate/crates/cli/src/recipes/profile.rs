//! Response-profile experiments: principal-component profiles with readout
//! consistencies (consistent, inconsistent, and regularized settings), the
//! planar test system's nested-ellipse geometry in original and whitened
//! coordinates, and the consistency profile of a network tuned to a target
//! global consistency.

use anyhow::{anyhow, Result};
use esn_core::profile::{
    covariance, cross_covariance, pc_readout_consistencies, profile, residual_covariance,
    test_system_consistent_cov, test_system_full_cov, test_system_sample, whitening_transform,
    with_measurement_noise, ProfileConfig,
};
use esn_core::replica::ReplicaEnsemble;
use esn_core::reservoir::Trajectory;
use esn_core::rng::derive_seed;
use nalgebra::DMatrix;
use serde_json::json;

use crate::artifact::{fmt_f64, write_csv, write_meta};
use crate::config::ExperimentConfig;
use crate::measure::{base_network, consistency_cell, drive_for, TAG_MEASUREMENT};

/// PC sizes of the full response and readout consistencies along the PC
/// directions, optionally after adding measurement noise to both replicas.
fn pc_profile(
    ensemble: &ReplicaEnsemble,
    lambda: f64,
    measurement_seed: u64,
) -> (Vec<f64>, Vec<f64>, usize) {
    let (a, b): (Trajectory, Trajectory) = if lambda > 0.0 {
        (
            with_measurement_noise(ensemble.trajectory(0), lambda, derive_seed(measurement_seed, 0)),
            with_measurement_noise(ensemble.trajectory(1), lambda, derive_seed(measurement_seed, 1)),
        )
    } else {
        (ensemble.trajectory(0).clone(), ensemble.trajectory(1).clone())
    };
    let dec = covariance(&a);
    let gammas = pc_readout_consistencies(&a, &b, &dec.directions);
    let effective = gammas.iter().filter(|g| !g.is_nan() && **g > 0.5).count();
    (dec.sizes.iter().copied().collect(), gammas, effective)
}

fn write_pc_profile(
    cfg: &ExperimentConfig,
    tag: &str,
    sizes: &[f64],
    gammas: &[f64],
    extra: serde_json::Value,
) -> Result<()> {
    let rows: Vec<String> = sizes
        .iter()
        .zip(gammas)
        .enumerate()
        .map(|(i, (s, g))| format!("{i},{},{}", fmt_f64(*s), fmt_f64(*g)))
        .collect();
    let path = cfg.out_dir.join(format!("pc_profile_{tag}.csv"));
    write_csv(&path, "pc,sigma_sq,gamma_sq", &rows)?;
    write_meta(&path, cfg, extra)
}

fn axis_rows(label: &str, frame: &str, dirs: &DMatrix<f64>, sizes: &[f64]) -> Vec<String> {
    (0..dirs.ncols())
        .map(|k| {
            format!(
                "{frame},{label},{k},{},{},{}",
                fmt_f64(dirs[(0, k)]),
                fmt_f64(dirs[(1, k)]),
                fmt_f64(sizes[k]),
            )
        })
        .collect()
}

/// The planar test system's component ellipses: PC axes of the full and
/// consistent responses plus the consistency directions, in original and
/// whitened coordinates, with an analytic-versus-empirical audit.
fn run_test_system(cfg: &ExperimentConfig) -> Result<()> {
    let ens = test_system_sample(
        cfg.profile.test_system_len,
        derive_seed(cfg.master_seed, TAG_MEASUREMENT + 1),
    );
    let dec_full = covariance(ens.trajectory(0));
    let c_c = cross_covariance(ens.trajectory(0), ens.trajectory(1));
    let dec_c = {
        let eig = c_c.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..2).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let mut dirs = DMatrix::zeros(2, 2);
        let mut sizes = vec![0.0; 2];
        for (k, &i) in order.iter().enumerate() {
            dirs.set_column(k, &eig.eigenvectors.column(i));
            sizes[k] = eig.eigenvalues[i].max(0.0);
        }
        (dirs, sizes)
    };

    let prof = profile(&ens, &ProfileConfig::default())?;
    let whitening = whitening_transform(&dec_full, 1e-10)?;
    let reduced = whitening.reduced();

    let whiten_matrix = |m: &DMatrix<f64>| -> DMatrix<f64> {
        let w = &reduced * m * reduced.transpose();
        let wt = w.transpose();
        (w + wt) * 0.5
    };
    let wc = whiten_matrix(&c_c);
    let wn = whiten_matrix(&residual_covariance(&ens));
    let eig_wc = wc.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..2).collect();
    order.sort_by(|&i, &j| eig_wc.eigenvalues[j].partial_cmp(&eig_wc.eigenvalues[i]).unwrap());
    let mut wc_dirs = DMatrix::zeros(2, 2);
    let mut wc_sizes = vec![0.0; 2];
    for (k, &i) in order.iter().enumerate() {
        wc_dirs.set_column(k, &eig_wc.eigenvectors.column(i));
        wc_sizes[k] = eig_wc.eigenvalues[i].max(0.0);
    }

    let mut rows = Vec::new();
    let full_sizes: Vec<f64> = dec_full.sizes.iter().copied().collect();
    rows.extend(axis_rows("full_response", "original", &dec_full.directions, &full_sizes));
    rows.extend(axis_rows("consistent_response", "original", &dec_c.0, &dec_c.1));
    rows.extend(axis_rows("consistency_direction", "original", &prof.directions, &prof.levels));
    let white_full = whiten_matrix(&dec_full.matrix);
    let eye_sizes: Vec<f64> = (0..2).map(|i| white_full[(i, i)]).collect();
    rows.extend(axis_rows("full_response", "whitened", &DMatrix::identity(2, 2), &eye_sizes));
    rows.extend(axis_rows("consistent_response", "whitened", &wc_dirs, &wc_sizes));

    let path = cfg.out_dir.join("test_system_axes.csv");
    write_csv(&path, "frame,object,index,x,y,size", &rows)?;
    write_meta(&path, cfg, json!({ "samples": cfg.profile.test_system_len }))?;

    // Audit: analytic versus empirical matrices and the complementarity sums.
    let to_vec = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
    };
    let axis_cos: Vec<f64> = {
        let eig_wn = wn.clone().symmetric_eigen();
        let mut order_n: Vec<usize> = (0..2).collect();
        order_n.sort_by(|&i, &j| {
            eig_wn.eigenvalues[i].partial_cmp(&eig_wn.eigenvalues[j]).unwrap()
        });
        (0..2)
            .map(|k| {
                wc_dirs
                    .column(k)
                    .dot(&eig_wn.eigenvectors.column(order_n[k]))
                    .abs()
            })
            .collect()
    };
    let level_sums: Vec<f64> = (0..2)
        .map(|k| {
            let q = wc_dirs.column(k);
            (q.transpose() * &wc * q)[(0, 0)] + (q.transpose() * &wn * q)[(0, 0)]
        })
        .collect();
    let audit = json!({
        "analytic_consistent_cov": to_vec(&test_system_consistent_cov()),
        "empirical_consistent_cov": to_vec(&c_c),
        "analytic_full_cov": to_vec(&test_system_full_cov()),
        "empirical_full_cov": to_vec(&dec_full.matrix),
        "whitened_full_cov": to_vec(&white_full),
        "whitened_axis_cosines": axis_cos,
        "per_axis_level_sums": level_sums,
        "consistency_levels": prof.levels,
    });
    let audit_path = cfg.out_dir.join("test_system_audit.json");
    std::fs::write(&audit_path, serde_json::to_string_pretty(&audit)?)?;
    write_meta(&audit_path, cfg, json!({}))?;
    Ok(())
}

/// Bisect the spectral radius until the global consistency lands in the
/// configured band; returns the tuned radius and its ensemble.
pub fn tune_to_gamma_band(
    cfg: &ExperimentConfig,
    realization: usize,
) -> Result<(f64, f64, ReplicaEnsemble)> {
    let base = base_network(cfg, realization)?;
    let drive = drive_for(cfg, realization);
    let (lo_band, hi_band) = cfg.profile.gamma_band;
    let target = 0.5 * (lo_band + hi_band);
    let (mut lo, mut hi) = (1.0f64, 16.0f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let cell = consistency_cell(cfg, &base.rescaled(mid)?, &drive, 0.0, realization)?;
        if cell.gamma_hat_sq > lo_band && cell.gamma_hat_sq < hi_band {
            return Ok((mid, cell.gamma_hat_sq, cell.ensemble));
        }
        if cell.gamma_hat_sq > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(anyhow!(
        "radius bisection did not reach global consistency in [{lo_band}, {hi_band}]"
    ))
}

pub fn run_recipe(cfg: &ExperimentConfig) -> Result<()> {
    let base = base_network(cfg, 0)?;
    let drive = drive_for(cfg, 0);

    // Consistent and inconsistent PC profiles.
    let consistent = consistency_cell(
        cfg,
        &base.rescaled(cfg.profile.rho_consistent)?,
        &drive,
        0.0,
        0,
    )?;
    let (sizes, gammas, eff) = pc_profile(&consistent.ensemble, 0.0, 0);
    write_pc_profile(
        cfg,
        "consistent",
        &sizes,
        &gammas,
        json!({ "rho": cfg.profile.rho_consistent, "lambda": 0.0,
                "gamma_hat_sq": consistent.gamma_hat_sq, "effective_dim": eff }),
    )?;

    let inconsistent = consistency_cell(
        cfg,
        &base.rescaled(cfg.profile.rho_inconsistent)?,
        &drive,
        0.0,
        0,
    )?;
    let (sizes, gammas, eff) = pc_profile(&inconsistent.ensemble, 0.0, 0);
    write_pc_profile(
        cfg,
        "inconsistent",
        &sizes,
        &gammas,
        json!({ "rho": cfg.profile.rho_inconsistent, "lambda": 0.0,
                "gamma_hat_sq": inconsistent.gamma_hat_sq, "effective_dim": eff }),
    )?;

    // Regularized settings: consistent network with measurement noise.
    let mut effective_dims = Vec::new();
    for (li, &lambda) in cfg.lambda.values().iter().enumerate() {
        let seed = derive_seed(cfg.master_seed, TAG_MEASUREMENT + 10 + li as u64);
        let (sizes, gammas, eff) = pc_profile(&consistent.ensemble, lambda, seed);
        effective_dims.push(eff);
        write_pc_profile(
            cfg,
            &format!("regularized{li}"),
            &sizes,
            &gammas,
            json!({ "rho": cfg.profile.rho_consistent, "lambda": lambda,
                    "effective_dim": eff }),
        )?;
    }

    run_test_system(cfg)?;

    // Tuned consistency profile with per-direction readout consistencies.
    let tuned_cfg = ExperimentConfig {
        drive_len: cfg.profile.tuned_len + cfg.washout,
        ..cfg.clone()
    };
    let (rho_star, gamma_star, ensemble) = tune_to_gamma_band(&tuned_cfg, 0)?;
    let prof = profile(&ensemble, &ProfileConfig::default())?;
    let mut buf = Vec::new();
    prof.write_csv(&mut buf)?;
    let levels_path = cfg.out_dir.join("consistency_profile.csv");
    if let Some(parent) = levels_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&levels_path, buf)?;
    write_meta(
        &levels_path,
        cfg,
        json!({ "rho_tuned": rho_star, "gamma_hat_sq": gamma_star,
                "effective_dim": prof.effective_dim,
                "discarded_directions": prof.discarded_directions,
                "mean_removed": prof.mean_removed,
                "regularized_effective_dims": effective_dims }),
    )?;

    let mut dir_gammas =
        pc_readout_consistencies(ensemble.trajectory(0), ensemble.trajectory(1), &prof.directions);
    dir_gammas.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let rows: Vec<String> = prof
        .levels
        .iter()
        .zip(&dir_gammas)
        .enumerate()
        .map(|(i, (l, g))| format!("{i},{},{}", fmt_f64(*l), fmt_f64(*g)))
        .collect();
    let agree_path = cfg.out_dir.join("consistency_profile_agreement.csv");
    write_csv(&agree_path, "direction,level,direction_gamma_sq", &rows)?;
    write_meta(&agree_path, cfg, json!({ "rho_tuned": rho_star, "gamma_hat_sq": gamma_star }))?;
    Ok(())
}
