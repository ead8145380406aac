//! Driving signals.
//!
//! The reservoir experiments use IID standard-normal drives, plus perturbed
//! families of a reference drive in which exactly one sample is swapped for a
//! grid value. The latter renders input-output section portraits: the final
//! reservoir state as a function of the replaced sample.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_DRIVE};

/// A finite driving sequence: `len` steps of `width` channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// Row `t` holds the sample injected at step `t`.
    samples: DMatrix<f64>,
    seed: u64,
    distribution: String,
}

impl Drive {
    /// Wrap raw samples (row per step). Intended for tests and synthetic
    /// inputs; the generators below are the usual entry points.
    pub fn from_samples(samples: DMatrix<f64>, seed: u64, distribution: impl Into<String>) -> Self {
        Self { samples, seed, distribution: distribution.into() }
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn width(&self) -> usize {
        self.samples.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> &str {
        &self.distribution
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    /// Sample of channel `l` at step `t`.
    #[inline]
    pub fn value(&self, t: usize, l: usize) -> f64 {
        self.samples[(t, l)]
    }

    /// Scalar sample at step `t` (requires `width == 1`).
    #[inline]
    pub fn scalar(&self, t: usize) -> f64 {
        debug_assert_eq!(self.width(), 1, "contract violation: scalar access on multichannel drive");
        self.samples[(t, 0)]
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_invalid(&self) -> Option<usize> {
        (0..self.len()).find(|&t| (0..self.width()).any(|l| !self.samples[(t, l)].is_finite()))
    }

    pub fn validate(&self) -> Result<()> {
        match self.first_invalid() {
            Some(index) => Err(Error::InvalidDrive { index }),
            None => Ok(()),
        }
    }

    /// Write one CSV row per time step (audit format).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.width()).map(|l| format!("u{l}")).collect();
        writeln!(w, "step,{}", header.join(","))?;
        for t in 0..self.len() {
            let row: Vec<String> =
                (0..self.width()).map(|l| self.samples[(t, l)].to_string()).collect();
            writeln!(w, "{t},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// IID standard-normal drive of `len` steps and `width` channels.
///
/// Samples come from the drive stream of `seed`, drawn step-major
/// (all channels of step 0, then step 1, ...), so extending `len`
/// regenerates the same prefix.
pub fn gaussian_drive(len: usize, width: usize, seed: u64) -> Drive {
    assert!(len >= 1, "contract violation: drive length must be >= 1");
    assert!(width >= 1, "contract violation: drive width must be >= 1");
    let mut rng = stream_rng(seed, STREAM_DRIVE);
    let mut samples = DMatrix::zeros(len, width);
    for t in 0..len {
        for l in 0..width {
            samples[(t, l)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    Drive { samples, seed, distribution: "standard_normal".to_string() }
}

/// One drive per grid value, each equal to `reference` except that the sample
/// `lag` steps before the end (position `T - lag`, 1-indexed) is replaced by
/// the grid value. Scalar drives only.
pub fn perturbed_family(reference: &Drive, lag: usize, grid: &[f64]) -> Vec<Drive> {
    assert!(lag < reference.len(), "contract violation: lag must be < drive length");
    assert_eq!(reference.width(), 1, "contract violation: perturbed families are scalar");
    let pos = reference.len() - 1 - lag;
    grid.iter()
        .map(|&v| {
            let mut d = reference.clone();
            d.samples[(pos, 0)] = v;
            d.distribution = format!("{}+perturbed(lag={lag})", reference.distribution);
            d
        })
        .collect()
}
