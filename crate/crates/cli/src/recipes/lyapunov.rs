//! Conditional Lyapunov spectra against the spectral radius, with global
//! consistency and the normalized Kaplan-Yorke dimension alongside.

use anyhow::Result;
use rayon::prelude::*;
use serde_json::json;

use crate::artifact::{fmt_f64, write_csv, write_meta};
use crate::config::{ExperimentConfig, UsageError};
use crate::measure::{base_network, consistency_cell, drive_for, lyapunov_cell};

pub fn run_recipe(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.noise.values().iter().any(|&r| r != 0.0) {
        return Err(UsageError(
            "the Lyapunov experiment is defined for deterministic dynamics; set noise to [0]"
                .into(),
        )
        .into());
    }
    let rhos = cfg.rho.values();
    let bases: Vec<_> = (0..cfg.realizations)
        .map(|j| base_network(cfg, j))
        .collect::<Result<_>>()?;
    let drives: Vec<_> = (0..cfg.realizations).map(|j| drive_for(cfg, j)).collect();

    let mut cells: Vec<(usize, usize)> = Vec::new();
    for ri in 0..rhos.len() {
        for j in 0..cfg.realizations {
            cells.push((ri, j));
        }
    }
    let rows: Vec<String> = cells
        .par_iter()
        .map(|&(ri, j)| -> Result<String> {
            let net = bases[j].rescaled(rhos[ri])?;
            let report = lyapunov_cell(cfg, &net, &drives[j], j, None)?;
            let gamma = consistency_cell(cfg, &net, &drives[j], 0.0, j)?.gamma_hat_sq;
            let n = cfg.network.size as f64;
            let mut row = format!(
                "{},{j},{},{},{},{},{},{}",
                fmt_f64(rhos[ri]),
                fmt_f64(gamma),
                fmt_f64(report.lambda_max()),
                fmt_f64(report.kaplan_yorke),
                fmt_f64(report.kaplan_yorke / n),
                fmt_f64(report.negative_fraction),
                u8::from(report.converged),
            );
            for lam in &report.exponents {
                row.push(',');
                row.push_str(&fmt_f64(*lam));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut header = String::from(
        "rho,realization,gamma_hat_sq,lambda_max,d_ky,d_ky_over_n,negative_fraction,converged",
    );
    for i in 0..cfg.network.size {
        header.push_str(&format!(",lambda_{i}"));
    }
    let path = cfg.out_dir.join("lyapunov.csv");
    write_csv(&path, &header, &rows)?;
    write_meta(
        &path,
        cfg,
        json!({ "cle_steps": cfg.cle_steps, "reortho_interval": 1 }),
    )?;
    Ok(())
}
