//! Generate a single network realization and write its JSON document.

use anyhow::{Context, Result};
use esn_core::reservoir::{build_network, NetworkSpec};
use std::path::Path;

pub fn run_recipe(spec: &NetworkSpec, out_file: &Path) -> Result<()> {
    let net = build_network(spec)?;
    if let Some(parent) = out_file.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let json = serde_json::to_string_pretty(&net)?;
    std::fs::write(out_file, json).with_context(|| format!("writing {}", out_file.display()))?;
    println!(
        "wrote {} (N={}, nonzeros={}, achieved radius {})",
        out_file.display(),
        net.size(),
        net.nonzero_count(),
        net.achieved_radius()
    );
    Ok(())
}
