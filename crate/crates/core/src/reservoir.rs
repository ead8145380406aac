//! Echo-state network construction and dynamics.
//!
//! A network is a fixed random realization: internal weights `W` (entries
//! present independently with probability `p`, standard-normal values,
//! globally rescaled to a target spectral radius), input weights `V` uniform
//! on [-1, 1], and a uniform bias vector. The state advances by the
//! element-wise map
//!
//! `x(t+1) = tanh((1 - r) * (W x(t) + V u(t+1) + beta) + r * xi(t))`
//!
//! which at noise mix `r = 0` is the plain deterministic update.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, STREAM_INPUT, STREAM_RUN_NOISE, STREAM_STATE_INIT, STREAM_WEIGHTS};
use crate::signals::Drive;

/// Relative tolerance on the achieved spectral radius.
pub const RADIUS_RTOL: f64 = 1e-9;

/// Below this, a draw's spectral radius is treated as zero (degenerate).
const RADIUS_DEGENERATE: f64 = 1e-9;

/// Parameters that define a network ensemble member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Node count N.
    pub size: usize,
    /// Wiring probability p in [0, 1]; each entry of W (diagonal included) is
    /// present independently with this probability.
    pub wiring_p: f64,
    /// Target spectral radius rho >= 0.
    pub spectral_radius: f64,
    /// Input dimension L.
    pub input_dim: usize,
    /// Uniform bias value applied to every node.
    pub bias: f64,
    /// Seed for the weight and input streams.
    pub seed: u64,
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size < 1 {
            return Err(Error::InvalidParameter("size must be >= 1".into()));
        }
        if self.input_dim < 1 {
            return Err(Error::InvalidParameter("input_dim must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.wiring_p) {
            return Err(Error::InvalidParameter("wiring_p must lie in [0, 1]".into()));
        }
        if !self.spectral_radius.is_finite() || self.spectral_radius < 0.0 {
            return Err(Error::InvalidParameter("spectral_radius must be >= 0".into()));
        }
        if !self.bias.is_finite() {
            return Err(Error::InvalidParameter("bias must be finite".into()));
        }
        Ok(())
    }
}

/// Compressed sparse rows over the nonzeros of `W`, used for fast stepping.
/// Row-major, columns ascending within a row; the summation order is part of
/// the reproducibility contract.
#[derive(Debug, Clone, PartialEq)]
struct SparseRows {
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRows {
    fn from_dense(w: &DMatrix<f64>) -> Self {
        let n = w.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..w.ncols() {
                let v = w[(i, j)];
                if v != 0.0 {
                    col_idx.push(j as u32);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { row_ptr, col_idx, values }
    }

    /// `out[i] += sum_j W[i,j] x[j]`, columns ascending.
    #[inline]
    fn accumulate_mul(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            out[i] += acc;
        }
    }
}

/// A concrete random network: the object the replica test is run on.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    weights: DMatrix<f64>,
    input_weights: DMatrix<f64>,
    bias: DVector<f64>,
    achieved_radius: f64,
    spec: NetworkSpec,
    sparse: SparseRows,
}

impl NetworkRealization {
    pub fn size(&self) -> usize {
        self.spec.size
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.input_weights
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    /// Spectral radius measured on the scaled matrix.
    pub fn achieved_radius(&self) -> f64 {
        self.achieved_radius
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn nonzero_count(&self) -> usize {
        self.sparse.values.len()
    }

    pub fn density(&self) -> f64 {
        self.nonzero_count() as f64 / (self.spec.size * self.spec.size) as f64
    }

    /// The same network with `W` multiplied so its spectral radius becomes
    /// `target`. Scaling a matrix scales its spectrum exactly, so no new
    /// eigensolve is needed; the spec's radius field is updated to `target`.
    pub fn rescaled(&self, target: f64) -> Result<Self> {
        if !target.is_finite() || target < 0.0 {
            return Err(Error::InvalidParameter("spectral_radius must be >= 0".into()));
        }
        if self.achieved_radius <= 0.0 && target > 0.0 {
            return Err(Error::DegenerateConnectivity);
        }
        let factor = if target == 0.0 { 0.0 } else { target / self.achieved_radius };
        let weights = &self.weights * factor;
        let sparse = SparseRows::from_dense(&weights);
        Ok(Self {
            weights,
            input_weights: self.input_weights.clone(),
            bias: self.bias.clone(),
            achieved_radius: self.achieved_radius * factor,
            spec: NetworkSpec { spectral_radius: target, ..self.spec },
            sparse,
        })
    }

    /// Wrap explicit matrices as a realization (synthetic networks for tests
    /// and analysis). The spec fields are reconstructed: the radius is
    /// measured, wiring probability is the density, and the bias field holds
    /// the common value when the vector is uniform (NaN otherwise).
    pub fn from_parts(
        weights: DMatrix<f64>,
        input_weights: DMatrix<f64>,
        bias: DVector<f64>,
    ) -> Result<Self> {
        if weights.nrows() != weights.ncols() {
            return Err(Error::InvalidParameter("weights must be square".into()));
        }
        let n = weights.nrows();
        if input_weights.nrows() != n || bias.len() != n {
            return Err(Error::InvalidParameter("input/bias dimensions must match".into()));
        }
        if input_weights.ncols() == 0 {
            return Err(Error::InvalidParameter("input_dim must be >= 1".into()));
        }
        let achieved_radius = spectral_radius(&weights);
        let sparse = SparseRows::from_dense(&weights);
        let uniform_bias = if bias.iter().all(|&b| b == bias[0]) { bias[0] } else { f64::NAN };
        let spec = NetworkSpec {
            size: n,
            wiring_p: sparse.values.len() as f64 / (n * n).max(1) as f64,
            spectral_radius: achieved_radius,
            input_dim: input_weights.ncols(),
            bias: uniform_bias,
            seed: 0,
        };
        Ok(Self { weights, input_weights, bias, achieved_radius, spec, sparse })
    }

    /// `out = W x` through the sparse path (same summation order as stepping).
    pub(crate) fn weights_mul_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        self.sparse.accumulate_mul(x, out);
    }

    /// `out = W x + V u + beta`. Fixed summation order: bias, then input
    /// channels ascending, then internal weights with columns ascending.
    #[inline]
    pub(crate) fn preactivation_into(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.spec.size);
        debug_assert_eq!(u.len(), self.spec.input_dim);
        out.copy_from_slice(self.bias.as_slice());
        for (l, &ul) in u.iter().enumerate() {
            let col = self.input_weights.column(l);
            for i in 0..out.len() {
                out[i] += col[i] * ul;
            }
        }
        self.sparse.accumulate_mul(x, out);
    }
}

/// Activation vector of the reservoir at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState(pub DVector<f64>);

impl ReservoirState {
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// Components uniform on (-1, 1), the state space of tanh nodes.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = stream_rng(seed, STREAM_STATE_INIT);
        let dist = Uniform::new(-1.0, 1.0).expect("valid range");
        Self(DVector::from_fn(n, |_, _| rng.sample(dist)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Largest eigenvalue magnitude of a square real matrix, via a dense Schur
/// decomposition (robust for the complex spectra of nonsymmetric random
/// matrices, where power iteration can stall on conjugate pairs).
pub fn spectral_radius(w: &DMatrix<f64>) -> f64 {
    assert_eq!(w.nrows(), w.ncols(), "contract violation: spectral_radius needs a square matrix");
    assert!(w.iter().all(|v| v.is_finite()), "contract violation: non-finite matrix entry");
    if w.nrows() == 0 {
        return 0.0;
    }
    let eig = nalgebra::Schur::try_new(w.clone(), f64::EPSILON, 100_000)
        .map(|s| s.complex_eigenvalues())
        .or_else(|| {
            nalgebra::Schur::try_new(w.clone(), 1e-13, 500_000).map(|s| s.complex_eigenvalues())
        })
        .expect("Schur iteration failed to converge");
    eig.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Draw a realization from the spec.
///
/// Entries of `W` are present independently with probability `p` and drawn
/// standard-normal (row-major order, weight stream); the draw is rescaled so
/// its spectral radius equals the target. `V` is uniform on [-1, 1]
/// (row-major, input stream); the bias vector is uniform.
pub fn build_network(spec: &NetworkSpec) -> Result<NetworkRealization> {
    spec.validate()?;
    let n = spec.size;

    let mut wrng = stream_rng(spec.seed, STREAM_WEIGHTS);
    let mut weights = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if wrng.random_bool(spec.wiring_p) {
                weights[(i, j)] = wrng.sample::<f64, _>(StandardNormal);
            }
        }
    }

    let mut vrng = stream_rng(spec.seed, STREAM_INPUT);
    let vdist = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut input_weights = DMatrix::zeros(n, spec.input_dim);
    for i in 0..n {
        for l in 0..spec.input_dim {
            input_weights[(i, l)] = vrng.sample(vdist);
        }
    }

    let bias = DVector::from_element(n, spec.bias);

    let (weights, achieved_radius) = if spec.spectral_radius == 0.0 {
        (DMatrix::zeros(n, n), 0.0)
    } else {
        let draw_radius = spectral_radius(&weights);
        if draw_radius < RADIUS_DEGENERATE {
            return Err(Error::DegenerateConnectivity);
        }
        let scaled = weights * (spec.spectral_radius / draw_radius);
        let achieved = spectral_radius(&scaled);
        (scaled, achieved)
    };

    let sparse = SparseRows::from_dense(&weights);
    Ok(NetworkRealization {
        weights,
        input_weights,
        bias,
        achieved_radius,
        spec: *spec,
        sparse,
    })
}

/// One update step:
/// `tanh((1 - r) * (W x + V u + beta) + r * xi)` element-wise.
///
/// At `r = 0` the noise term is skipped entirely, so the result is bit-exact
/// with the deterministic update.
pub fn step(
    x: &ReservoirState,
    input: &DVector<f64>,
    net: &NetworkRealization,
    noise_mix: f64,
    noise_sample: &DVector<f64>,
) -> ReservoirState {
    assert_eq!(x.len(), net.size(), "contract violation: state dimension mismatch");
    assert_eq!(input.len(), net.input_dim(), "contract violation: input dimension mismatch");
    assert!(
        (0.0..=1.0).contains(&noise_mix),
        "contract violation: noise mix must lie in [0, 1]"
    );
    let mut a = vec![0.0; net.size()];
    net.preactivation_into(x.0.as_slice(), input.as_slice(), &mut a);
    if noise_mix > 0.0 {
        assert_eq!(noise_sample.len(), net.size(), "contract violation: noise dimension mismatch");
        let keep = 1.0 - noise_mix;
        for (ai, &xi) in a.iter_mut().zip(noise_sample.iter()) {
            *ai = keep * *ai + noise_mix * xi;
        }
    }
    ReservoirState(DVector::from_iterator(net.size(), a.into_iter().map(f64::tanh)))
}

/// Time-indexed reservoir states for one run; column `t` is the state after
/// the drive sample `washout + t` was injected.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: DMatrix<f64>,
    washout: usize,
}

impl Trajectory {
    pub fn from_states(states: DMatrix<f64>, washout: usize) -> Self {
        Self { states, washout }
    }

    /// Node count.
    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    /// Number of retained steps.
    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }

    pub fn washout(&self) -> usize {
        self.washout
    }

    /// N x T state matrix (column per step).
    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    /// Time series of one node.
    pub fn node_series(&self, node: usize) -> Vec<f64> {
        self.states.row(node).iter().copied().collect()
    }

    /// State at retained step `t`.
    pub fn state_at(&self, t: usize) -> DVector<f64> {
        self.states.column(t).into_owned()
    }
}

/// Iterate the update map over a drive and keep the post-washout states.
///
/// Step `k` (k = 0, 1, ...) consumes drive row `k`; states for `k >= washout`
/// are retained, so the result has `drive.len() - washout` columns. Noise
/// samples (used only when `noise_mix > 0`) come from the run-noise stream of
/// `noise_seed`, drawn node-major per step. Deterministic given all seeds.
pub fn run(
    net: &NetworkRealization,
    drive: &Drive,
    x0: &ReservoirState,
    washout: usize,
    noise_mix: f64,
    noise_seed: u64,
) -> Result<Trajectory> {
    assert!(washout < drive.len(), "contract violation: washout must be < drive length");
    assert_eq!(x0.len(), net.size(), "contract violation: state dimension mismatch");
    assert_eq!(drive.width(), net.input_dim(), "contract violation: drive width mismatch");
    assert!(
        (0.0..=1.0).contains(&noise_mix),
        "contract violation: noise mix must lie in [0, 1]"
    );
    drive.validate()?;

    let n = net.size();
    let total = drive.len();
    let kept = total - washout;
    let mut states = DMatrix::zeros(n, kept);
    let mut noise_rng = stream_rng(noise_seed, STREAM_RUN_NOISE);

    let mut x = x0.0.as_slice().to_vec();
    let mut a = vec![0.0; n];
    let mut u = vec![0.0; drive.width()];
    let keep = 1.0 - noise_mix;
    for k in 0..total {
        for l in 0..drive.width() {
            u[l] = drive.value(k, l);
        }
        net.preactivation_into(&x, &u, &mut a);
        if noise_mix > 0.0 {
            for ai in a.iter_mut() {
                let xi: f64 = noise_rng.sample(StandardNormal);
                *ai = keep * *ai + noise_mix * xi;
            }
        }
        for (xi, &ai) in x.iter_mut().zip(a.iter()) {
            *xi = ai.tanh();
        }
        if k >= washout {
            states.column_mut(k - washout).copy_from_slice(&x);
        }
    }
    Ok(Trajectory { states, washout })
}

// ---- serialization -------------------------------------------------------

/// Weight matrices denser than this serialize as dense row-major arrays;
/// sparser ones as (row, col, value) triplets.
pub const SPARSE_FORMAT_DENSITY: f64 = 0.10;

#[derive(Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
enum WeightsRepr {
    Dense { rows: usize, cols: usize, data: Vec<f64> },
    Sparse { rows: usize, cols: usize, triplets: Vec<(usize, usize, f64)> },
}

impl WeightsRepr {
    fn from_matrix(w: &DMatrix<f64>, density: f64) -> Self {
        if density < SPARSE_FORMAT_DENSITY {
            let mut triplets = Vec::new();
            for i in 0..w.nrows() {
                for j in 0..w.ncols() {
                    if w[(i, j)] != 0.0 {
                        triplets.push((i, j, w[(i, j)]));
                    }
                }
            }
            WeightsRepr::Sparse { rows: w.nrows(), cols: w.ncols(), triplets }
        } else {
            let data = (0..w.nrows())
                .flat_map(|i| (0..w.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| w[(i, j)])
                .collect();
            WeightsRepr::Dense { rows: w.nrows(), cols: w.ncols(), data }
        }
    }

    fn into_matrix(self) -> DMatrix<f64> {
        match self {
            WeightsRepr::Dense { rows, cols, data } => {
                DMatrix::from_row_slice(rows, cols, &data)
            }
            WeightsRepr::Sparse { rows, cols, triplets } => {
                let mut m = DMatrix::zeros(rows, cols);
                for (i, j, v) in triplets {
                    m[(i, j)] = v;
                }
                m
            }
        }
    }
}

/// On-disk form of a realization. Field names are the stable JSON schema.
#[derive(Serialize, Deserialize)]
struct NetworkJson {
    spec: NetworkSpec,
    achieved_radius: f64,
    weights: WeightsRepr,
    input_weights: WeightsRepr,
    bias: Vec<f64>,
}

impl Serialize for NetworkRealization {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkJson {
            spec: self.spec,
            achieved_radius: self.achieved_radius,
            weights: WeightsRepr::from_matrix(&self.weights, self.density()),
            input_weights: WeightsRepr::from_matrix(&self.input_weights, 1.0),
            bias: self.bias.iter().copied().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NetworkRealization {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = NetworkJson::deserialize(deserializer)?;
        let weights = raw.weights.into_matrix();
        let sparse = SparseRows::from_dense(&weights);
        Ok(NetworkRealization {
            input_weights: raw.input_weights.into_matrix(),
            bias: DVector::from_vec(raw.bias),
            achieved_radius: raw.achieved_radius,
            spec: raw.spec,
            weights,
            sparse,
        })
    }
}
