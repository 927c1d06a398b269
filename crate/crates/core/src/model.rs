//! Stochastic signal model: scenario description, snapshot simulation under
//! circular complex Gaussian sources and nonuniform noise, and the sample
//! covariance sufficient statistic.
//!
//! Convention: CN(0, S) means E[z zᴴ] = S and E[z zᵀ] = 0, i.e. real and
//! imaginary parts are jointly Gaussian with variance S/2 each. The LLF
//! constant in the likelihood module is only consistent with this convention.
//!
//! RNG: ChaCha8 (counter-based, seekable). A snapshot draw is fully
//! determined by its `u64` seed; Monte Carlo trials derive disjoint seeds
//! from (base_seed, L index, trial index) and may run concurrently.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::{DoaVector, manifold};
use crate::error::{DoaError, Result};
use crate::linalg::{
    C64, CMatrix, CVector, hermitian_eigen, hermitian_eigenvalues, hermitianize, is_hermitian,
    PdFactor,
};

/// V x V Hermitian PSD source covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCovariance {
    matrix: CMatrix,
}

impl SourceCovariance {
    /// Validates Hermitian symmetry (1e-12) and positive semi-definiteness
    /// (eigenvalues >= -1e-10 * spectral norm), then stores the symmetrized
    /// matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(DoaError::invalid("source covariance must be square"));
        }
        if !is_hermitian(&matrix, 1e-12) {
            return Err(DoaError::invalid("source covariance is not Hermitian within 1e-12"));
        }
        let matrix = hermitianize(&matrix);
        let vals = hermitian_eigenvalues(&matrix);
        let norm = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if vals.iter().any(|&v| v < -1e-10 * norm) {
            return Err(DoaError::invalid(format!(
                "source covariance is not PSD: min eigenvalue {} vs norm {}",
                vals[0], norm
            )));
        }
        Ok(SourceCovariance { matrix })
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let v = rows.len();
        let m = CMatrix::from_fn(v, v, |i, j| C64::new(rows[i][j], 0.0));
        Self::new(m)
    }

    pub fn identity(sources: usize) -> Self {
        SourceCovariance {
            matrix: CMatrix::identity(sources, sources),
        }
    }

    pub fn zero(sources: usize) -> Self {
        SourceCovariance {
            matrix: CMatrix::zeros(sources, sources),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sources(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Strictly positive per-sensor noise powers (the diagonal of Q).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVariances {
    delta: DVector<f64>,
}

impl NoiseVariances {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.is_empty() {
            return Err(DoaError::invalid("noise variance vector is empty"));
        }
        if delta.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(DoaError::invalid("noise variances must all be strictly positive"));
        }
        Ok(NoiseVariances {
            delta: DVector::from_vec(delta),
        })
    }

    pub fn uniform(sensors: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; sensors])
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn as_slice(&self) -> &[f64] {
        self.delta.as_slice()
    }

    pub fn sensors(&self) -> usize {
        self.delta.len()
    }

    /// diag(delta) as a dense complex matrix.
    pub fn q_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.delta.len(), self.delta.len(), |i, j| {
            if i == j {
                C64::new(self.delta[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// Ground truth for simulation: geometry plus the true covariances.
#[derive(Debug, Clone)]
pub struct Scenario {
    sensors: usize,
    betas: DoaVector,
    source_cov: SourceCovariance,
    noise: NoiseVariances,
}

impl Scenario {
    pub fn new(
        sensors: usize,
        betas: DoaVector,
        source_cov: SourceCovariance,
        noise: NoiseVariances,
    ) -> Result<Self> {
        if betas.len() >= sensors {
            return Err(DoaError::invalid(format!(
                "need more sensors than sources (V = {} must be < W = {})",
                betas.len(),
                sensors
            )));
        }
        if source_cov.sources() != betas.len() {
            return Err(DoaError::invalid("source covariance dimension does not match angle count"));
        }
        if noise.sensors() != sensors {
            return Err(DoaError::invalid("noise variance length does not match sensor count"));
        }
        Ok(Scenario {
            sensors,
            betas,
            source_cov,
            noise,
        })
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn sources(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &DoaVector {
        &self.betas
    }

    pub fn source_cov(&self) -> &SourceCovariance {
        &self.source_cov
    }

    pub fn noise(&self) -> &NoiseVariances {
        &self.noise
    }

    /// True snapshot covariance G = A O Aᴴ + Q.
    pub fn model_covariance(&self) -> Result<CMatrix> {
        model_covariance(&self.betas, &self.source_cov, &self.noise)
    }
}

/// W x L matrix of simulated snapshots, column t = r(t), plus the seed that
/// produced it.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix {
    data: CMatrix,
    seed: u64,
}

impl SnapshotMatrix {
    pub fn new(data: CMatrix, seed: u64) -> Result<Self> {
        if data.ncols() < 1 {
            return Err(DoaError::invalid("snapshot matrix needs at least one snapshot"));
        }
        Ok(SnapshotMatrix { data, seed })
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// W x W Hermitian PSD sample covariance and the snapshot count behind it.
#[derive(Debug, Clone)]
pub struct SampleCovariance {
    matrix: CMatrix,
    snapshots: usize,
}

impl SampleCovariance {
    pub fn new(matrix: CMatrix, snapshots: usize) -> Result<Self> {
        if snapshots < 1 {
            return Err(DoaError::invalid("sample covariance needs L >= 1"));
        }
        if !is_hermitian(&matrix, 1e-12) {
            return Err(DoaError::invalid("sample covariance is not Hermitian within 1e-12"));
        }
        let matrix = hermitianize(&matrix);
        let vals = hermitian_eigenvalues(&matrix);
        let norm = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if vals.iter().any(|&v| v < -1e-10 * norm.max(1.0)) {
            return Err(DoaError::invalid(format!(
                "sample covariance is not PSD: min eigenvalue {}",
                vals[0]
            )));
        }
        Ok(SampleCovariance { matrix, snapshots })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sensors(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }
}

/// Factor S with S Sᴴ = O, via eigendecomposition.
///
/// Eigenvalues in [-1e-10 * ||O||, 0) are clipped to zero so exactly
/// rank-deficient covariances (coherent sources) factor cleanly; anything
/// more negative is an error.
pub fn psd_sqrt(source_cov: &SourceCovariance) -> Result<CMatrix> {
    let o = source_cov.matrix();
    let (vals, vecs) = hermitian_eigen(o);
    let norm = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut scaled = vecs;
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda < -1e-10 * norm {
            return Err(DoaError::invalid(format!(
                "cannot factor source covariance: eigenvalue {lambda} too negative"
            )));
        }
        let root = lambda.max(0.0).sqrt();
        for i in 0..scaled.nrows() {
            scaled[(i, k)] *= C64::new(root, 0.0);
        }
    }
    Ok(scaled)
}

/// True covariance G = A O Aᴴ + diag(delta); errors if the result is not
/// positive definite (cannot happen for valid inputs, guards corruption).
pub fn model_covariance(
    betas: &DoaVector,
    source_cov: &SourceCovariance,
    noise: &NoiseVariances,
) -> Result<CMatrix> {
    if source_cov.sources() != betas.len() {
        return Err(DoaError::invalid("source covariance dimension does not match angle count"));
    }
    let a = manifold(betas, noise.sensors())?;
    let mut g = a.matrix() * source_cov.matrix() * a.matrix().adjoint();
    for w in 0..noise.sensors() {
        g[(w, w)] += C64::new(noise.delta()[w], 0.0);
    }
    let g = hermitianize(&g);
    PdFactor::new(&g, "model covariance")?;
    Ok(g)
}

fn standard_complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws one snapshot r = A S z_k + sqrt(delta) .* z_j into `out`.
fn draw_snapshot(
    rng: &mut ChaCha8Rng,
    a_times_s: &CMatrix,
    noise_sqrt: &DVector<f64>,
    out: &mut CVector,
) {
    let sources = a_times_s.ncols();
    let sensors = noise_sqrt.len();
    let z_k = CVector::from_fn(sources, |_, _| standard_complex_normal(rng));
    out.copy_from(&(a_times_s * z_k));
    for w in 0..sensors {
        out[w] += C64::new(noise_sqrt[w], 0.0) * standard_complex_normal(rng);
    }
}

/// Simulates L snapshots of the scenario; bit-identical for equal
/// (scenario, L, seed).
pub fn sample_snapshots(scenario: &Scenario, snapshots: usize, seed: u64) -> Result<SnapshotMatrix> {
    if snapshots < 1 {
        return Err(DoaError::invalid("snapshot count must be at least 1"));
    }
    let a = manifold(scenario.betas(), scenario.sensors())?;
    let s = psd_sqrt(scenario.source_cov())?;
    let a_times_s = a.matrix() * s;
    let noise_sqrt = scenario.noise().delta().map(|d| d.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = CMatrix::zeros(scenario.sensors(), snapshots);
    let mut column = CVector::zeros(scenario.sensors());
    for t in 0..snapshots {
        draw_snapshot(&mut rng, &a_times_s, &noise_sqrt, &mut column);
        data.set_column(t, &column);
    }
    SnapshotMatrix::new(data, seed)
}

/// R_hat = (1/L) sum_t r(t) r(t)ᴴ.
pub fn sample_covariance(snapshots: &SnapshotMatrix) -> SampleCovariance {
    let l = snapshots.snapshots();
    let w = snapshots.sensors();
    let mut acc = CMatrix::zeros(w, w);
    for t in 0..l {
        let r = snapshots.data().column(t);
        for i in 0..w {
            for j in 0..w {
                acc[(i, j)] += r[i] * r[j].conj();
            }
        }
    }
    acc.scale_mut(1.0 / l as f64);
    SampleCovariance {
        matrix: hermitianize(&acc),
        snapshots: l,
    }
}

/// Simulates L snapshots and accumulates the sample covariance without ever
/// materializing the snapshot matrix. Draw-for-draw identical to
/// `sample_covariance(&sample_snapshots(...))`.
pub fn simulate_sample_covariance(
    scenario: &Scenario,
    snapshots: usize,
    seed: u64,
) -> Result<SampleCovariance> {
    if snapshots < 1 {
        return Err(DoaError::invalid("snapshot count must be at least 1"));
    }
    let a = manifold(scenario.betas(), scenario.sensors())?;
    let s = psd_sqrt(scenario.source_cov())?;
    let a_times_s = a.matrix() * s;
    let noise_sqrt = scenario.noise().delta().map(|d| d.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = scenario.sensors();
    let mut acc = CMatrix::zeros(w, w);
    let mut column = CVector::zeros(w);
    for _ in 0..snapshots {
        draw_snapshot(&mut rng, &a_times_s, &noise_sqrt, &mut column);
        for i in 0..w {
            for j in 0..w {
                acc[(i, j)] += column[i] * column[j].conj();
            }
        }
    }
    acc.scale_mut(1.0 / snapshots as f64);
    Ok(SampleCovariance {
        matrix: hermitianize(&acc),
        snapshots,
    })
}
