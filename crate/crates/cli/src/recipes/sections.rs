//! Input-output section portraits: re-drive the network with a reference
//! sequence in which a single sample (a fixed number of steps before the
//! end) is swapped for each grid value, and record the final activations of
//! selected nodes. Rendered side by side for a consistent and an
//! inconsistent spectral radius.
//!
//! Runs are deterministic, so each family member only needs to be replayed
//! from the cached state just before the replaced sample.

use anyhow::Result;
use esn_core::reservoir::{run, step, NetworkRealization, ReservoirState};
use esn_core::rng::derive_seed;
use esn_core::signals::Drive;
use nalgebra::DVector;
use serde_json::json;

use crate::artifact::{fmt_f64, write_csv, write_meta};
use crate::config::ExperimentConfig;
use crate::measure::{base_network, drive_for, TAG_INIT};

/// Final activations of one node across the replacement grid.
pub struct SectionCurve {
    pub node: usize,
    pub values: Vec<f64>,
}

/// Section curves for every requested node at one (radius, lag) setting.
pub fn section_curves(
    net: &NetworkRealization,
    drive: &Drive,
    x0: &ReservoirState,
    lag: usize,
    grid: &[f64],
    nodes: &[usize],
) -> Result<Vec<SectionCurve>> {
    let total = drive.len();
    assert!(lag + 1 < total, "contract violation: lag must leave room for a prefix");
    let pos = total - 1 - lag;

    // Deterministic prefix: state after consuming sample pos-1.
    let prefix = run(net, drive, x0, 0, 0.0, 0)?;
    let cached = ReservoirState(prefix.state_at(pos - 1));

    let mut curves: Vec<SectionCurve> =
        nodes.iter().map(|&node| SectionCurve { node, values: Vec::with_capacity(grid.len()) }).collect();
    for &value in grid {
        let mut x = cached.clone();
        for k in pos..total {
            let mut u = DVector::zeros(drive.width());
            for l in 0..drive.width() {
                u[l] = if k == pos && l == 0 { value } else { drive.value(k, l) };
            }
            x = step(&x, &u, net, 0.0, &DVector::zeros(net.size()));
        }
        for curve in curves.iter_mut() {
            curve.values.push(x.0[curve.node]);
        }
    }
    Ok(curves)
}

/// Indices of the `count` highest-variance nodes over the post-washout part
/// of a reference run.
pub fn highest_variance_nodes(
    net: &NetworkRealization,
    drive: &Drive,
    x0: &ReservoirState,
    washout: usize,
    count: usize,
) -> Result<Vec<usize>> {
    let traj = run(net, drive, x0, washout, 0.0, 0)?;
    let mut vars: Vec<(usize, f64)> = (0..net.size())
        .map(|i| {
            let s = traj.node_series(i);
            let m = s.iter().sum::<f64>() / s.len() as f64;
            let v = s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / s.len() as f64;
            (i, v)
        })
        .collect();
    vars.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(vars.into_iter().take(count).map(|(i, _)| i).collect())
}

pub fn run_recipe(cfg: &ExperimentConfig) -> Result<()> {
    let net_base = base_network(cfg, 0)?;
    let drive = drive_for(cfg, 0);
    let x0 = ReservoirState::random(
        cfg.network.size,
        derive_seed(cfg.master_seed, TAG_INIT),
    );
    let grid: Vec<f64> = (0..cfg.section.grid_points)
        .map(|i| {
            cfg.section.grid_min
                + (cfg.section.grid_max - cfg.section.grid_min) * i as f64
                    / (cfg.section.grid_points - 1).max(1) as f64
        })
        .collect();

    let nodes = if cfg.section.nodes.is_empty() {
        let reference = net_base.rescaled(cfg.section.rhos[0])?;
        highest_variance_nodes(&reference, &drive, &x0, cfg.washout, 3)?
    } else {
        cfg.section.nodes.clone()
    };

    // One curve set per (rho, lag, node); files per lag with one column per
    // (rho, node) pair.
    let mut per_rho: Vec<Vec<Vec<SectionCurve>>> = Vec::new(); // [rho][lag][node]
    for &rho in &cfg.section.rhos {
        let net = net_base.rescaled(rho)?;
        let mut per_lag = Vec::new();
        for &lag in &cfg.section.lags {
            per_lag.push(section_curves(&net, &drive, &x0, lag, &grid, &nodes)?);
        }
        per_rho.push(per_lag);
    }

    for (li, &lag) in cfg.section.lags.iter().enumerate() {
        let mut header = String::from("replacement");
        for (ri, &rho) in cfg.section.rhos.iter().enumerate() {
            let _ = ri;
            for &node in &nodes {
                header.push_str(&format!(",x{node}_rho{rho}"));
            }
        }
        let rows: Vec<String> = grid
            .iter()
            .enumerate()
            .map(|(gi, &g)| {
                let mut row = fmt_f64(g);
                for (ri, _) in cfg.section.rhos.iter().enumerate() {
                    for curve in &per_rho[ri][li] {
                        row.push(',');
                        row.push_str(&fmt_f64(curve.values[gi]));
                    }
                }
                row
            })
            .collect();
        let path = cfg.out_dir.join(format!("sections_lag{lag}.csv"));
        write_csv(&path, &header, &rows)?;
        write_meta(
            &path,
            cfg,
            json!({ "lag": lag, "nodes": nodes, "rhos": cfg.section.rhos, "node_selection":
                if cfg.section.nodes.is_empty() { "auto_top_variance" } else { "explicit" } }),
        )?;
    }
    Ok(())
}
