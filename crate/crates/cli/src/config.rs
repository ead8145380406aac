//! Experiment configuration: JSON config files merged over per-recipe
//! defaults, then overridden by CLI flags. Precedence (lowest to highest):
//! recipe defaults, config file, flags. The fully resolved config is embedded
//! in every artifact's sidecar metadata.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// A parameter grid: either an explicit list or an inclusive range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl Grid {
    pub fn list(values: &[f64]) -> Self {
        Grid::List(values.to_vec())
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                assert!(*step > 0.0, "grid step must be positive");
                let mut out = Vec::new();
                let mut k = 0usize;
                loop {
                    let x = start + step * k as f64;
                    if x > stop + 0.5 * step {
                        break;
                    }
                    // Round to 9 decimals so grid points print cleanly.
                    out.push((x * 1e9).round() / 1e9);
                    k += 1;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub size: usize,
    pub wiring_p: f64,
    pub input_dim: usize,
    pub bias: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { size: 200, wiring_p: 0.025, input_dim: 1, bias: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    /// Lags rendered by the section experiment.
    pub lags: Vec<usize>,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
    /// Node indices to plot; empty selects the three highest-variance nodes
    /// of the reference run.
    pub nodes: Vec<usize>,
    /// Spectral radii rendered side by side (consistent and inconsistent).
    pub rhos: Vec<f64>,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            lags: vec![0, 1, 2, 3],
            grid_min: -3.0,
            grid_max: 3.0,
            grid_points: 61,
            nodes: Vec::new(),
            rhos: vec![2.2, 3.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileRecipeConfig {
    pub rho_consistent: f64,
    pub rho_inconsistent: f64,
    /// Target band for the tuned global consistency of the profiled network.
    pub gamma_band: (f64, f64),
    /// Post-washout samples for the tuned consistency profile.
    pub tuned_len: usize,
    pub test_system_len: usize,
}

impl Default for ProfileRecipeConfig {
    fn default() -> Self {
        Self {
            rho_consistent: 1.0,
            rho_inconsistent: 3.0,
            gamma_band: (0.13, 0.17),
            tuned_len: 4000,
            test_system_len: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchNoiseConfig {
    /// Run the matched-consistency comparison: tune the noise mix at the
    /// first grid radius until global consistency matches the last grid
    /// radius, then compare memory profiles.
    pub enabled: bool,
    pub tolerance: f64,
}

impl Default for MatchNoiseConfig {
    fn default() -> Self {
        Self { enabled: false, tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    /// Drive length per run (washout included).
    pub drive_len: usize,
    pub washout: usize,
    pub rho: Grid,
    /// Dynamical noise mix grid.
    pub noise: Grid,
    /// Regularization amplitudes: the ridge parameter for memory readouts
    /// and the measurement-noise amplitude for regularized profiles.
    pub lambda: Grid,
    pub replicas: usize,
    pub tau_max: usize,
    pub section: SectionConfig,
    pub profile: ProfileRecipeConfig,
    pub match_noise: MatchNoiseConfig,
    pub realizations: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// Metric set for generic sweeps.
    pub metrics: Vec<String>,
    /// Worker threads; 0 = auto.
    pub threads: usize,
    /// Tangent-propagation steps per Lyapunov spectrum.
    pub cle_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            drive_len: 100_000,
            washout: 1000,
            rho: Grid::list(&[1.0]),
            noise: Grid::list(&[0.0]),
            lambda: Grid::list(&[1e-6]),
            replicas: 2,
            tau_max: 50,
            section: SectionConfig::default(),
            profile: ProfileRecipeConfig::default(),
            match_noise: MatchNoiseConfig::default(),
            realizations: 1,
            master_seed: 42,
            out_dir: PathBuf::from("out"),
            metrics: vec!["gamma2".to_string()],
            threads: 0,
            cle_steps: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    Sections,
    Memory,
    Lyapunov,
    Profile,
    Sweep,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::Sections => "sections",
            Recipe::Memory => "memory",
            Recipe::Lyapunov => "lyapunov",
            Recipe::Profile => "profile",
            Recipe::Sweep => "sweep",
        }
    }
}

impl ExperimentConfig {
    /// Paper-scale defaults per recipe.
    pub fn for_recipe(recipe: Recipe) -> Self {
        let mut cfg = Self::default();
        match recipe {
            Recipe::Sections => {
                cfg.network = NetworkConfig { size: 200, wiring_p: 0.025, input_dim: 1, bias: 1.0 };
            }
            Recipe::Memory => {
                cfg.network = NetworkConfig { size: 500, wiring_p: 0.10, input_dim: 1, bias: 1.0 };
                cfg.rho = Grid::Range { start: 1.0, stop: 4.0, step: 0.1 };
                cfg.realizations = 10;
            }
            Recipe::Lyapunov => {
                cfg.network = NetworkConfig { size: 200, wiring_p: 0.025, input_dim: 1, bias: 1.0 };
                cfg.rho = Grid::Range { start: 1.0, stop: 4.0, step: 0.1 };
                cfg.drive_len = 11_000;
            }
            Recipe::Profile => {
                cfg.network = NetworkConfig { size: 100, wiring_p: 0.10, input_dim: 1, bias: 1.0 };
                cfg.lambda = Grid::list(&[0.03, 0.1, 0.3]);
            }
            Recipe::Sweep => {
                cfg.network = NetworkConfig { size: 500, wiring_p: 0.10, input_dim: 1, bias: 1.0 };
                cfg.drive_len = 10_000;
            }
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let nonempty = |g: &Grid, name: &str| -> Result<(), UsageError> {
            if g.values().is_empty() {
                Err(UsageError(format!("grid `{name}` is empty")))
            } else {
                Ok(())
            }
        };
        nonempty(&self.rho, "rho")?;
        nonempty(&self.noise, "noise")?;
        nonempty(&self.lambda, "lambda")?;
        if self.realizations < 1 {
            return Err(UsageError("realizations must be >= 1".into()));
        }
        if self.replicas < 2 {
            return Err(UsageError("replicas must be >= 2".into()));
        }
        if self.washout >= self.drive_len {
            return Err(UsageError("washout must be smaller than drive_len".into()));
        }
        if self.noise.values().iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(UsageError("noise mixes must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// A configuration or argument problem (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn merge_json(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Load a config: recipe defaults, overlaid with the JSON file when given.
/// Syntax errors report line/column; unknown or ill-typed fields report the
/// field path.
pub fn load_config(recipe: Recipe, path: Option<&Path>) -> Result<ExperimentConfig, UsageError> {
    let defaults = ExperimentConfig::for_recipe(recipe);
    let Some(path) = path else {
        return Ok(defaults);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    let file_value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
    let mut merged = serde_json::to_value(&defaults).expect("defaults serialize");
    merge_json(&mut merged, file_value);
    serde_path_to_error::deserialize(merged)
        .map_err(|e| UsageError(format!("config {}: field `{}`: {}", path.display(), e.path(), e.inner())))
}

/// Flag overrides applied on top of the loaded config.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub rho: Option<Vec<f64>>,
    pub noise: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub realizations: Option<usize>,
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, ov: &Overrides) {
    if let Some(s) = ov.seed {
        cfg.master_seed = s;
    }
    if let Some(out) = &ov.out {
        cfg.out_dir = out.clone();
    }
    if let Some(t) = ov.threads {
        cfg.threads = t;
    }
    if let Some(r) = &ov.rho {
        cfg.rho = Grid::list(r);
    }
    if let Some(n) = &ov.noise {
        cfg.noise = Grid::list(n);
    }
    if let Some(l) = &ov.lambda {
        cfg.lambda = Grid::list(l);
    }
    if let Some(k) = ov.realizations {
        cfg.realizations = k;
    }
}
