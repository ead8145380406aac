//! Generic (rho x noise x lambda x realization) product sweep over a named
//! metric set. Each cell writes its own CSV and status sidecar under
//! `cells/`, so an interrupted sweep resumes by skipping completed cells;
//! results merge in deterministic parameter order regardless of execution
//! order. Failed cells are recorded and the sweep continues.

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::artifact::{fmt_f64, mean_stderr, meta_path, write_csv, write_meta};
use crate::config::ExperimentConfig;
use crate::measure::{base_network, drive_for, lyapunov_cell, memory_cell};

pub const KNOWN_METRICS: [&str; 5] = ["gamma2", "imc", "lambda_max", "d_ky", "neg_fraction"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellIndex {
    pub rho: usize,
    pub noise: usize,
    pub lambda: usize,
    pub realization: usize,
}

pub struct SweepOutcome {
    pub completed: usize,
    pub failed: usize,
}

fn cell_stem(idx: CellIndex) -> String {
    format!(
        "cell_r{}_n{}_l{}_k{}",
        idx.rho, idx.noise, idx.lambda, idx.realization
    )
}

fn compute_cell(
    cfg: &ExperimentConfig,
    metrics: &[String],
    rho: f64,
    noise: f64,
    lambda: f64,
    realization: usize,
) -> Result<Vec<f64>> {
    let net = base_network(cfg, realization)?.rescaled(rho)?;
    let drive = drive_for(cfg, realization);

    let needs_memory = metrics.iter().any(|m| m == "gamma2" || m == "imc");
    let needs_cle = metrics.iter().any(|m| m == "lambda_max" || m == "d_ky" || m == "neg_fraction");
    let needs_full_cle = metrics.iter().any(|m| m == "d_ky" || m == "neg_fraction");

    let memory = if needs_memory {
        Some(memory_cell(cfg, &net, &drive, noise, lambda, realization)?)
    } else {
        None
    };
    let cle = if needs_cle {
        if noise != 0.0 {
            return Err(anyhow!(
                "Lyapunov metrics are defined for deterministic dynamics (noise mix 0)"
            ));
        }
        let k = if needs_full_cle { None } else { Some(1) };
        Some(lyapunov_cell(cfg, &net, &drive, realization, k)?)
    } else {
        None
    };

    metrics
        .iter()
        .map(|m| -> Result<f64> {
            Ok(match m.as_str() {
                "gamma2" => memory.as_ref().unwrap().gamma_hat_sq,
                "imc" => memory.as_ref().unwrap().profile.capacity,
                "lambda_max" => cle.as_ref().unwrap().lambda_max(),
                "d_ky" => cle.as_ref().unwrap().kaplan_yorke,
                "neg_fraction" => cle.as_ref().unwrap().negative_fraction,
                other => return Err(anyhow!("unknown metric `{other}`")),
            })
        })
        .collect()
}

fn cell_row(rho: f64, noise: f64, lambda: f64, realization: usize, values: &[f64]) -> String {
    let mut row = format!(
        "{},{},{},{realization}",
        fmt_f64(rho),
        fmt_f64(noise),
        fmt_f64(lambda)
    );
    for v in values {
        row.push(',');
        row.push_str(&fmt_f64(*v));
    }
    row
}

fn parse_completed_cell(path: &PathBuf, n_metrics: usize) -> Option<Vec<f64>> {
    let text = std::fs::read_to_string(path).ok()?;
    let data_line = text.lines().nth(1)?;
    let fields: Vec<&str> = data_line.split(',').collect();
    if fields.len() != 4 + n_metrics {
        return None;
    }
    fields[4..].iter().map(|s| s.parse::<f64>().ok()).collect()
}

pub fn run_recipe(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    for m in &cfg.metrics {
        if !KNOWN_METRICS.contains(&m.as_str()) {
            return Err(crate::config::UsageError(format!(
                "unknown metric `{m}`; known: {}",
                KNOWN_METRICS.join(", ")
            ))
            .into());
        }
    }
    if cfg.metrics.is_empty() {
        return Err(crate::config::UsageError("metric set is empty".into()).into());
    }
    let rhos = cfg.rho.values();
    let noises = cfg.noise.values();
    let lambdas = cfg.lambda.values();
    let cells_dir = cfg.out_dir.join("cells");
    std::fs::create_dir_all(&cells_dir)?;

    let mut indices = Vec::new();
    for (ri, _) in rhos.iter().enumerate() {
        for (ni, _) in noises.iter().enumerate() {
            for (li, _) in lambdas.iter().enumerate() {
                for j in 0..cfg.realizations {
                    indices.push(CellIndex { rho: ri, noise: ni, lambda: li, realization: j });
                }
            }
        }
    }

    let metric_header = {
        let mut h = String::from("rho,noise,lambda,realization");
        for m in &cfg.metrics {
            h.push(',');
            h.push_str(m);
        }
        h
    };

    // Each cell: skip when already complete, else compute and persist.
    let results: Vec<(CellIndex, Result<Vec<f64>, String>)> = indices
        .par_iter()
        .map(|&idx| {
            let stem = cell_stem(idx);
            let csv_path = cells_dir.join(format!("{stem}.csv"));
            let status_path = meta_path(&csv_path);
            if let Ok(text) = std::fs::read_to_string(&status_path) {
                if let Ok(doc) = serde_json::from_str::<serde_json::Value>(&text) {
                    if doc["extra"]["status"] == "complete" {
                        if let Some(values) = parse_completed_cell(&csv_path, cfg.metrics.len()) {
                            return (idx, Ok(values));
                        }
                    }
                }
            }
            let (rho, noise, lambda) = (rhos[idx.rho], noises[idx.noise], lambdas[idx.lambda]);
            match compute_cell(cfg, &cfg.metrics, rho, noise, lambda, idx.realization) {
                Ok(values) => {
                    let row = cell_row(rho, noise, lambda, idx.realization, &values);
                    if let Err(e) = write_csv(&csv_path, &metric_header, &[row])
                        .and_then(|()| write_meta(&csv_path, cfg, json!({ "status": "complete" })))
                    {
                        return (idx, Err(format!("persisting cell: {e}")));
                    }
                    (idx, Ok(values))
                }
                Err(e) => {
                    let _ = write_meta(&csv_path, cfg, json!({ "status": "error", "error": e.to_string() }));
                    (idx, Err(e.to_string()))
                }
            }
        })
        .collect();

    // Merge in deterministic parameter order (indices are already ordered).
    let mut merged_rows = Vec::new();
    let mut groups: BTreeMap<(usize, usize, usize), Vec<Vec<f64>>> = BTreeMap::new();
    let mut failed = 0usize;
    for (idx, res) in &results {
        match res {
            Ok(values) => {
                merged_rows.push(cell_row(
                    rhos[idx.rho],
                    noises[idx.noise],
                    lambdas[idx.lambda],
                    idx.realization,
                    values,
                ));
                groups
                    .entry((idx.rho, idx.noise, idx.lambda))
                    .or_default()
                    .push(values.clone());
            }
            Err(e) => {
                failed += 1;
                eprintln!(
                    "cell (rho {}, noise {}, lambda {}, realization {}): {e}",
                    rhos[idx.rho], noises[idx.noise], lambdas[idx.lambda], idx.realization
                );
            }
        }
    }
    let merged_path = cfg.out_dir.join("sweep.csv");
    write_csv(&merged_path, &metric_header, &merged_rows)?;
    write_meta(
        &merged_path,
        cfg,
        json!({ "cells": indices.len(), "failed": failed }),
    )?;

    // Per-point summary (mean and standard error over realizations).
    let mut summary_header = String::from("rho,noise,lambda,n");
    for m in &cfg.metrics {
        summary_header.push_str(&format!(",{m}_mean,{m}_stderr"));
    }
    let summary_rows: Vec<String> = groups
        .iter()
        .map(|(&(ri, ni, li), rows)| {
            let mut line = format!(
                "{},{},{},{}",
                fmt_f64(rhos[ri]),
                fmt_f64(noises[ni]),
                fmt_f64(lambdas[li]),
                rows.len()
            );
            for (mi, _) in cfg.metrics.iter().enumerate() {
                let vals: Vec<f64> = rows.iter().map(|r| r[mi]).collect();
                let (mean, se) = mean_stderr(&vals);
                line.push_str(&format!(",{},{}", fmt_f64(mean), fmt_f64(se)));
            }
            line
        })
        .collect();
    let summary_path = cfg.out_dir.join("sweep_summary.csv");
    write_csv(&summary_path, &summary_header, &summary_rows)?;
    write_meta(&summary_path, cfg, json!({ "failed": failed }))?;

    Ok(SweepOutcome { completed: indices.len() - failed, failed })
}
