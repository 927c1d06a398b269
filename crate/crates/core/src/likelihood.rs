//! Log-likelihood evaluation and the concentrated objectives.
//!
//! The snapshot LLF is J = f - L(log|G| + trace[G⁻¹R̂]) with G = A O Aᴴ + Q
//! and the constant f fixed to -L·W·log(pi), the circular complex Gaussian
//! normalization, so absolute values are comparable across implementations.
//!
//! Concentrating the source covariance out of J yields the objective H over
//! (angles, noise) alone; under uniform noise both nuisance parameters
//! concentrate away, leaving a determinant criterion over angles only. Both
//! reductions are used by the initializer and the diagnostics, not by the
//! ECME iteration itself.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::array::{DoaVector, manifold, manifold_derivative};
use crate::error::{DoaError, Result};
use crate::linalg::{
    C64, CMatrix, PdFactor, hermitian_eigenvalues, hermitianize, trace_of_product,
};
use crate::model::{NoiseVariances, SampleCovariance, SourceCovariance, model_covariance};

/// G condition estimate beyond which the LLF refuses to evaluate.
const SINGULARITY_THRESHOLD: f64 = 1e14;

/// One iterate of the full parameter triple (angles, source covariance,
/// noise variances).
#[derive(Debug, Clone)]
pub struct ModelParams {
    betas: DoaVector,
    source_cov: SourceCovariance,
    noise: NoiseVariances,
}

impl ModelParams {
    pub fn new(betas: DoaVector, source_cov: SourceCovariance, noise: NoiseVariances) -> Result<Self> {
        if source_cov.sources() != betas.len() {
            return Err(DoaError::invalid(
                "source covariance dimension does not match angle count",
            ));
        }
        if betas.len() >= noise.sensors() {
            return Err(DoaError::invalid("model requires fewer sources than sensors"));
        }
        Ok(ModelParams {
            betas,
            source_cov,
            noise,
        })
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

    pub fn sources(&self) -> usize {
        self.betas.len()
    }

    pub fn sensors(&self) -> usize {
        self.noise.sensors()
    }

    pub fn with_betas(&self, betas: DoaVector) -> Result<Self> {
        Self::new(betas, self.source_cov.clone(), self.noise.clone())
    }

    pub fn with_covariances(&self, source_cov: SourceCovariance, noise: NoiseVariances) -> Result<Self> {
        Self::new(self.betas.clone(), source_cov, noise)
    }

    /// G = A O Aᴴ + Q at this iterate.
    pub fn model_covariance(&self) -> Result<CMatrix> {
        model_covariance(&self.betas, &self.source_cov, &self.noise)
    }
}

/// J(params; R̂) = -L·W·log(pi) - L(log|G| + trace[G⁻¹R̂]).
pub fn log_likelihood(r_hat: &SampleCovariance, params: &ModelParams) -> Result<f64> {
    if r_hat.sensors() != params.sensors() {
        return Err(DoaError::invalid("sample covariance dimension does not match model"));
    }
    let g = params.model_covariance()?;
    let factor = PdFactor::new(&g, "model covariance G")?;
    if factor.condition_estimate() > SINGULARITY_THRESHOLD {
        return Err(DoaError::singular(format!(
            "G is numerically singular (condition estimate {:.2e})",
            factor.condition_estimate()
        )));
    }
    let l = r_hat.snapshots() as f64;
    let w = params.sensors() as f64;
    let trace = factor.solve(r_hat.matrix()).trace().re;
    Ok(-l * w * PI.ln() - l * (factor.log_det() + trace))
}

/// The noise-whitened pair Ã = Q^(-1/2)A and R̃ = Q^(-1/2)·R̂·Q^(-1/2).
#[derive(Debug, Clone)]
pub struct WhitenedModel {
    a_tilde: CMatrix,
    r_tilde: CMatrix,
}

impl WhitenedModel {
    pub fn a_tilde(&self) -> &CMatrix {
        &self.a_tilde
    }

    pub fn r_tilde(&self) -> &CMatrix {
        &self.r_tilde
    }
}

pub fn whiten(betas: &DoaVector, r_hat: &SampleCovariance, noise: &NoiseVariances) -> Result<WhitenedModel> {
    if r_hat.sensors() != noise.sensors() {
        return Err(DoaError::invalid("sample covariance dimension does not match noise vector"));
    }
    let w = noise.sensors();
    let a = manifold(betas, w)?;
    let inv_sqrt: Vec<f64> = noise.delta().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut a_tilde = a.matrix().clone();
    for i in 0..w {
        for v in 0..betas.len() {
            a_tilde[(i, v)] *= C64::new(inv_sqrt[i], 0.0);
        }
    }
    let mut r_tilde = r_hat.matrix().clone();
    for i in 0..w {
        for j in 0..w {
            r_tilde[(i, j)] *= C64::new(inv_sqrt[i] * inv_sqrt[j], 0.0);
        }
    }
    Ok(WhitenedModel { a_tilde, r_tilde })
}

fn whitened_gram(wm: &WhitenedModel) -> Result<PdFactor> {
    let gram = hermitianize(&(wm.a_tilde.adjoint() * &wm.a_tilde));
    PdFactor::new(&gram, "whitened Gram matrix ÃᴴÃ (coincident angles?)")
}

/// Source covariance that maximizes J for fixed (angles, noise):
/// (ÃᴴÃ)⁻¹ Ãᴴ (R̃ - I) Ã (ÃᴴÃ)⁻¹.
///
/// Hermitian by construction but NOT guaranteed PSD — this is the
/// concentration formula, not an ECME update, so it is returned
/// un-projected as a plain matrix.
pub fn concentrated_source_cov(
    betas: &DoaVector,
    noise: &NoiseVariances,
    r_hat: &SampleCovariance,
) -> Result<CMatrix> {
    let wm = whiten(betas, r_hat, noise)?;
    let gram = whitened_gram(&wm)?;
    let w = r_hat.sensors();
    let centered = &wm.r_tilde - CMatrix::identity(w, w);
    let projected = wm.a_tilde.adjoint() * centered * &wm.a_tilde;
    Ok(hermitianize(&gram.solve(&gram.solve(&projected).adjoint()).adjoint()))
}

/// Concentrated objective H(angles, noise) =
/// log|Q^(1/2)(Π R̃ Π + Π⊥)Q^(1/2)| + trace[(Π R̃ Π + Π⊥)⁻¹ R̃],
/// where Π projects onto the whitened manifold's column space.
pub fn concentrated_objective(
    betas: &DoaVector,
    noise: &NoiseVariances,
    r_hat: &SampleCovariance,
) -> Result<f64> {
    let wm = whiten(betas, r_hat, noise)?;
    let gram = whitened_gram(&wm)?;
    let w = r_hat.sensors();
    let projector = &wm.a_tilde * gram.solve(&wm.a_tilde.adjoint());
    let id = CMatrix::identity(w, w);
    let core = hermitianize(&(&projector * &wm.r_tilde * &projector + (&id - &projector)));
    let factor = PdFactor::new(&core, "concentrated covariance")?;
    let log_det_q: f64 = noise.delta().iter().map(|d| d.ln()).sum();
    let trace = factor.solve(&wm.r_tilde).trace().re;
    Ok(log_det_q + factor.log_det() + trace)
}

/// Fully concentrated uniform-noise criterion: determinant value, the
/// concentrated noise level, and the concentrated source covariance.
pub struct UniformConcentration {
    pub g_value: f64,
    pub delta_hat: f64,
    pub o_hat: CMatrix,
}

/// Under uniform noise both O and the noise level concentrate out:
/// delta_hat = trace[(I - Π_A)R̂]/(W-V), O_hat from the unwhitened Eq.-(4)
/// form, and the criterion |A O_hat Aᴴ + delta_hat I| to be minimized over
/// angles.
pub fn uniform_concentrated_objective(
    betas: &DoaVector,
    r_hat: &SampleCovariance,
) -> Result<UniformConcentration> {
    let w = r_hat.sensors();
    let v = betas.len();
    if v >= w {
        return Err(DoaError::invalid("uniform concentration needs W > V"));
    }
    let a = manifold(betas, w)?;
    let gram = hermitianize(&(a.matrix().adjoint() * a.matrix()));
    let gram = PdFactor::new(&gram, "manifold Gram matrix AᴴA (coincident angles?)")?;
    let projector = a.matrix() * gram.solve(&a.matrix().adjoint());
    let id = CMatrix::identity(w, w);
    let residual_trace = ((&id - &projector) * r_hat.matrix()).trace().re;
    let delta_hat = residual_trace / (w - v) as f64;
    if !(delta_hat > 0.0) {
        return Err(DoaError::singular(format!(
            "concentrated uniform noise level is not positive ({delta_hat}); degenerate sample covariance"
        )));
    }
    let centered = r_hat.matrix() - id.scale(delta_hat);
    let projected = a.matrix().adjoint() * centered * a.matrix();
    let o_hat = hermitianize(&gram.solve(&gram.solve(&projected).adjoint()).adjoint());
    let g_matrix = hermitianize(&(a.matrix() * &o_hat * a.matrix().adjoint() + id.scale(delta_hat)));
    let g_value = hermitian_eigenvalues(&g_matrix).iter().product();
    Ok(UniformConcentration {
        g_value,
        delta_hat,
        o_hat,
    })
}

/// G⁻¹ through the V-dimensional inversion identity
/// Q^(-1/2)[I - Ã(OÃᴴÃ + I)⁻¹OÃᴴ]Q^(-1/2); valid for singular O.
pub fn fast_inverse(
    betas: &DoaVector,
    source_cov: &SourceCovariance,
    noise: &NoiseVariances,
) -> Result<CMatrix> {
    let w = noise.sensors();
    let v = betas.len();
    if source_cov.sources() != v {
        return Err(DoaError::invalid("source covariance dimension does not match angle count"));
    }
    let a = manifold(betas, w)?;
    let inv_sqrt: Vec<f64> = noise.delta().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut a_tilde = a.matrix().clone();
    for i in 0..w {
        for c in 0..v {
            a_tilde[(i, c)] *= C64::new(inv_sqrt[i], 0.0);
        }
    }
    let o = source_cov.matrix();
    let small = o * (a_tilde.adjoint() * &a_tilde) + CMatrix::identity(v, v);
    let solved = small
        .lu()
        .solve(o)
        .ok_or_else(|| DoaError::singular("OÃᴴÃ + I is singular"))?;
    let mut inner = CMatrix::identity(w, w) - &a_tilde * solved * a_tilde.adjoint();
    for i in 0..w {
        for j in 0..w {
            inner[(i, j)] *= C64::new(inv_sqrt[i] * inv_sqrt[j], 0.0);
        }
    }
    Ok(inner)
}

/// Gradient of J with respect to the angles, holding (O, delta) fixed:
/// dJ/dbeta_v = -L·trace[(G⁻¹ - G⁻¹R̂G⁻¹)(D_v + D_vᴴ)] with
/// D_v = a'(beta_v)·e_vᵀ·O·Aᴴ.
pub fn llf_gradient_beta(
    betas: &DoaVector,
    source_cov: &SourceCovariance,
    noise: &NoiseVariances,
    r_hat: &SampleCovariance,
) -> Result<DVector<f64>> {
    let w = noise.sensors();
    let v = betas.len();
    let g = model_covariance(betas, source_cov, noise)?;
    let factor = PdFactor::new(&g, "model covariance G")?;
    let g_inv = factor.inverse();
    let weight = hermitianize(&(&g_inv - &g_inv * r_hat.matrix() * &g_inv));
    let a = manifold(betas, w)?;
    let a_dot = manifold_derivative(betas, w)?;
    let oa_h = source_cov.matrix() * a.matrix().adjoint(); // V x W
    let l = r_hat.snapshots() as f64;
    let mut grad = DVector::zeros(v);
    for src in 0..v {
        // trace[weight · D] for rank-one D = a_dot_col · row; doubled for D + Dᴴ.
        let row = oa_h.row(src); // 1 x W
        let col = a_dot.column(src); // W x 1
        let scalar: C64 = (row * &weight * col)[(0, 0)];
        grad[src] = -l * 2.0 * scalar.re;
    }
    Ok(grad)
}
