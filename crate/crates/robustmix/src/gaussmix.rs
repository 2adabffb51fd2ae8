//! Gaussian and two-component mixture models: sampling, densities, exact
//! moment formulas, Hermite tensors and their expectations, total-variation
//! surrogates and separation diagnostics.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, EIGEN_FLOOR};
use crate::tensor::{self, IndexPartition, Tensor};

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;
const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Mean and covariance of a single Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianParams {
    /// Validates symmetry (within 1e−12) and positive semidefiniteness
    /// (smallest eigenvalue ≥ −1e−10). The stored covariance is exactly
    /// symmetrized.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::InvalidModel(format!(
                "covariance {}x{} does not match mean dimension {}",
                cov.nrows(),
                cov.ncols(),
                mean.len()
            )));
        }
        if !linalg::is_symmetric(&cov, SYMMETRY_TOL) {
            return Err(Error::InvalidModel(
                "covariance is not symmetric within 1e-12".into(),
            ));
        }
        let cov = linalg::symmetrize_matrix(&cov);
        let min_eig = linalg::min_eigenvalue(&cov);
        if min_eig < PSD_TOL {
            return Err(Error::InvalidModel(format!(
                "covariance has eigenvalue {min_eig:.3e} below -1e-10"
            )));
        }
        Ok(GaussianParams { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Standard normal N(0, I_d).
    pub fn standard(d: usize) -> Self {
        GaussianParams {
            mean: DVector::zeros(d),
            cov: DMatrix::identity(d, d),
        }
    }
}

/// Equal-weight (or, for evaluation purposes, general-weight) mixture of two
/// Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureModelJson", into = "MixtureModelJson")]
pub struct MixtureModel {
    components: [GaussianParams; 2],
    weights: [f64; 2],
}

impl MixtureModel {
    pub fn new(components: [GaussianParams; 2], weights: [f64; 2]) -> Result<Self> {
        if components[0].dim() != components[1].dim() {
            return Err(Error::InvalidModel(
                "components have different dimensions".into(),
            ));
        }
        if weights[0] <= 0.0 || weights[1] <= 0.0 {
            return Err(Error::InvalidModel("weights must be positive".into()));
        }
        if (weights[0] + weights[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(
                "weights must sum to 1 within 1e-12".into(),
            ));
        }
        Ok(MixtureModel {
            components,
            weights,
        })
    }

    /// The (½, ½) mixture the learner targets.
    pub fn equal_weight(g1: GaussianParams, g2: GaussianParams) -> Result<Self> {
        MixtureModel::new([g1, g2], [0.5, 0.5])
    }

    /// N(0, I_d) written as an equal mixture with itself.
    pub fn spherical(d: usize) -> Self {
        MixtureModel {
            components: [GaussianParams::standard(d), GaussianParams::standard(d)],
            weights: [0.5, 0.5],
        }
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn components(&self) -> &[GaussianParams; 2] {
        &self.components
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    /// Mixture mean Σ wᵢ μᵢ.
    pub fn mean(&self) -> DVector<f64> {
        self.components[0].mean() * self.weights[0] + self.components[1].mean() * self.weights[1]
    }

    /// Mixture covariance Σ wᵢ(Σᵢ + μᵢμᵢᵀ) − μ̄μ̄ᵀ.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut cov = DMatrix::zeros(self.dim(), self.dim());
        for (g, w) in self.components.iter().zip(self.weights) {
            cov += (g.cov() + g.mean() * g.mean().transpose()) * w;
        }
        cov -= &mean * mean.transpose();
        linalg::symmetrize_matrix(&cov)
    }
}

/// Serialized form: `{"d": .., "weights": [..], "components": [{"mean": [..],
/// "cov": [[..]]}, ..]}` with a row-major covariance.
#[derive(Serialize, Deserialize)]
struct MixtureModelJson {
    #[serde(default = "default_format_version")]
    format_version: u32,
    d: usize,
    weights: [f64; 2],
    components: Vec<ComponentJson>,
}

#[derive(Serialize, Deserialize)]
struct ComponentJson {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

pub(crate) fn default_format_version() -> u32 {
    1
}

impl From<MixtureModel> for MixtureModelJson {
    fn from(m: MixtureModel) -> Self {
        let d = m.dim();
        MixtureModelJson {
            format_version: 1,
            d,
            weights: m.weights,
            components: m
                .components
                .iter()
                .map(|g| ComponentJson {
                    mean: g.mean().iter().copied().collect(),
                    cov: (0..d)
                        .map(|i| (0..d).map(|j| g.cov()[(i, j)]).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MixtureModelJson> for MixtureModel {
    type Error = Error;

    fn try_from(j: MixtureModelJson) -> Result<Self> {
        if j.components.len() != 2 {
            return Err(Error::InvalidModel(format!(
                "expected 2 components, got {}",
                j.components.len()
            )));
        }
        let mut comps = Vec::with_capacity(2);
        for c in &j.components {
            if c.mean.len() != j.d || c.cov.len() != j.d || c.cov.iter().any(|r| r.len() != j.d) {
                return Err(Error::InvalidModel(
                    "component dimensions disagree with d".into(),
                ));
            }
            let mean = DVector::from_vec(c.mean.clone());
            let flat: Vec<f64> = c.cov.iter().flatten().copied().collect();
            let cov = DMatrix::from_row_slice(j.d, j.d, &flat);
            comps.push(GaussianParams::new(mean, cov)?);
        }
        let g2 = comps.pop().unwrap();
        let g1 = comps.pop().unwrap();
        MixtureModel::new([g1, g2], j.weights)
    }
}

/// Parameters (μ, Σ) of the canonical mixture
/// ½N(μ, I−μμᵀ+Σ) + ½N(−μ, I−μμᵀ−Σ), which has mean 0 and covariance I.
/// Σ is a symmetric difference parameter, not itself a covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMixtureParams {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl CanonicalMixtureParams {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::InvalidModel(
                "sigma shape does not match mu dimension".into(),
            ));
        }
        if !linalg::is_symmetric(&sigma, SYMMETRY_TOL) {
            return Err(Error::InvalidModel("sigma must be symmetric".into()));
        }
        if mu.norm() >= 1.0 {
            return Err(Error::InvalidModel(format!(
                "|mu| = {:.4} must be < 1",
                mu.norm()
            )));
        }
        let sigma = linalg::symmetrize_matrix(&sigma);
        let base = DMatrix::identity(d, d) - &mu * mu.transpose();
        for sign in [1.0, -1.0] {
            let cov = &base + &sigma * sign;
            let min_eig = linalg::min_eigenvalue(&cov);
            if min_eig < PSD_TOL {
                return Err(Error::InvalidModel(format!(
                    "I - mu mu^T {} sigma has eigenvalue {min_eig:.3e} below -1e-10",
                    if sign > 0.0 { "+" } else { "-" }
                )));
            }
        }
        Ok(CanonicalMixtureParams { mu, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// The mixture ½N(μ, I−μμᵀ+Σ) + ½N(−μ, I−μμᵀ−Σ).
    pub fn to_mixture(&self) -> Result<MixtureModel> {
        let d = self.dim();
        let base = DMatrix::identity(d, d) - &self.mu * self.mu.transpose();
        // tiny negative eigenvalues from roundoff are clamped to zero
        let clamp = |m: &DMatrix<f64>| -> DMatrix<f64> {
            let eig = linalg::symmetrize_matrix(m).symmetric_eigen();
            let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
            &eig.eigenvectors
                * DMatrix::from_diagonal(&DVector::from_vec(vals))
                * eig.eigenvectors.transpose()
        };
        let g1 = GaussianParams::new(self.mu.clone(), clamp(&(&base + &self.sigma)))?;
        let g2 = GaussianParams::new(-self.mu.clone(), clamp(&(&base - &self.sigma)))?;
        MixtureModel::equal_weight(g1, g2)
    }
}

/// A symmetric Hermite-moment tensor of order 4 or 6.
#[derive(Debug, Clone)]
pub struct HermiteMoment {
    order: usize,
    tensor: Tensor,
}

impl HermiteMoment {
    pub fn new(order: usize, tensor: Tensor) -> Result<Self> {
        if order != 4 && order != 6 {
            return Err(Error::InvalidArgument(format!(
                "Hermite moment order must be 4 or 6, got {order}"
            )));
        }
        if tensor.order() != order {
            return Err(Error::DimensionMismatch(format!(
                "tensor order {} does not match declared order {order}",
                tensor.order()
            )));
        }
        let defect = tensor.symmetry_defect();
        if defect > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "tensor is not permutation-symmetric: defect {defect:.3e}"
            )));
        }
        Ok(HermiteMoment { order, tensor })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }
}

fn partitions_cached(m: usize) -> &'static [IndexPartition] {
    static CACHE: OnceLock<Vec<Vec<IndexPartition>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=8).map(IndexPartition::enumerate).collect());
    &cache[m]
}

/// Σ over partitions of [m] into singletons and pairs, with `edge` on pairs
/// and `single` entries on singletons.
fn moment_partition_sum(single: &DVector<f64>, edge: &DMatrix<f64>, m: usize) -> Tensor {
    let d = single.len();
    if m == 0 {
        return Tensor::scalar(d, 1.0);
    }
    let parts = partitions_cached(m);
    let len = d.pow(m as u32);
    let mut data = vec![0.0; len];
    let mut idx = vec![0usize; m];
    for (flat, slot) in data.iter_mut().enumerate() {
        tensor::decode_index(flat, d, &mut idx);
        let mut sum = 0.0;
        for p in parts {
            let mut prod = 1.0;
            for &(a, b) in p.pairs() {
                prod *= edge[(idx[a], idx[b])];
                if prod == 0.0 {
                    break;
                }
            }
            if prod != 0.0 {
                for &c in p.singletons() {
                    prod *= single[idx[c]];
                }
            }
            sum += prod;
        }
        *slot = sum;
    }
    Tensor::from_data(d, m, data).expect("sized by construction")
}

/// Raw Gaussian moment tensor E[G^{⊗m}] for G = N(μ, Σ), m ≤ 6.
///
/// Partition expansion: Σ over partitions of [m] into singletons and pairs
/// of Σ on pairs and μ on singletons.
pub fn gaussian_moment(g: &GaussianParams, m: usize) -> Tensor {
    assert!(m <= 6, "moment order capped at 6");
    moment_partition_sum(g.mean(), g.cov(), m)
}

/// Degree-m Hermite polynomial tensor h_m(x): the partition expansion with
/// −I on pairs and x on singletons. Only even orders up to 6 are used.
pub fn hermite_tensor(x: &DVector<f64>, m: usize) -> Tensor {
    assert!(m % 2 == 0 && m <= 6, "hermite order must be even, <= 6");
    let d = x.len();
    let neg_eye = DMatrix::from_diagonal_element(d, d, -1.0);
    moment_partition_sum(x, &neg_eye, m)
}

/// Closed form of E[h_m(G)] for G = N(μ, I+Σ): the partition expansion with
/// Σ on pairs and μ on singletons.
pub fn hermite_expectation(mu: &DVector<f64>, sigma_shift: &DMatrix<f64>, m: usize) -> Tensor {
    assert_eq!(sigma_shift.nrows(), mu.len());
    assert_eq!(sigma_shift.ncols(), mu.len());
    moment_partition_sum(mu, sigma_shift, m)
}

/// Closed form of E[h_m(G) ⊗ h_m(G)] for G = N(μ, I+Σ) as an order-2m
/// tensor: partitions of [2m] with Σ on within-half pairs, I+Σ on
/// cross-half pairs and μ on singletons. m ≤ 4 keeps the output at order 8.
pub fn hermite_second_moment(mu: &DVector<f64>, sigma_shift: &DMatrix<f64>, m: usize) -> Tensor {
    assert!(m <= 4, "second-moment order capped at 4 (order-8 output)");
    let d = mu.len();
    let order = 2 * m;
    if order == 0 {
        return Tensor::scalar(d, 1.0);
    }
    let cross = DMatrix::identity(d, d) + sigma_shift;
    let parts = partitions_cached(order);
    let len = d.pow(order as u32);
    let mut data = vec![0.0; len];
    let mut idx = vec![0usize; order];
    for (flat, slot) in data.iter_mut().enumerate() {
        tensor::decode_index(flat, d, &mut idx);
        let mut sum = 0.0;
        for p in parts {
            let mut prod = 1.0;
            for &(a, b) in p.pairs() {
                let same_half = (a < m) == (b < m);
                let e = if same_half {
                    sigma_shift[(idx[a], idx[b])]
                } else {
                    cross[(idx[a], idx[b])]
                };
                prod *= e;
                if prod == 0.0 {
                    break;
                }
            }
            if prod != 0.0 {
                for &c in p.singletons() {
                    prod *= mu[idx[c]];
                }
            }
            sum += prod;
        }
        *slot = sum;
    }
    Tensor::from_data(d, order, data).expect("sized by construction")
}

/// Population values (E[h₄(X)], E[h₆(X)]) of the canonical mixture:
/// (sym(3Σ⊗Σ − 2μ⊗⁴), 16·μ⊗⁶).
pub fn mixture_h4_h6(params: &CanonicalMixtureParams) -> (Tensor, Tensor) {
    let mu_t = Tensor::from_vector(params.mu());
    let sigma_t = Tensor::from_square_matrix(params.sigma());
    let sig2 = sigma_t.outer(&sigma_t).expect("same dim");
    let mu4 = tensor::tensor_power(&mu_t, 4);
    let h4 = tensor::symmetrize(&sig2.scale(3.0).sub(&mu4.scale(2.0)).expect("same shape"));
    let h6 = tensor::tensor_power(&mu_t, 6).scale(16.0);
    (h4, h6)
}

/// Draw a matrix square root for sampling; tiny negative eigenvalues are
/// clamped to zero so degenerate components sample on their support.
fn sampling_sqrt(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = linalg::symmetrize_matrix(cov).symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    &eig.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(vals))
}

pub(crate) fn sample_gaussian_into<R: Rng>(
    mean: &DVector<f64>,
    sqrt: &DMatrix<f64>,
    rng: &mut R,
) -> DVector<f64> {
    let d = mean.len();
    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    mean + sqrt * z
}

/// Pre-computed component square roots for repeated mixture sampling.
pub struct MixtureSampler {
    means: [DVector<f64>; 2],
    sqrts: [DMatrix<f64>; 2],
    w1: f64,
}

impl MixtureSampler {
    pub fn new(model: &MixtureModel) -> Self {
        let [g1, g2] = model.components();
        MixtureSampler {
            means: [g1.mean().clone(), g2.mean().clone()],
            sqrts: [sampling_sqrt(g1.cov()), sampling_sqrt(g2.cov())],
            w1: model.weights()[0],
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let pick = if rng.random::<f64>() < self.w1 { 0 } else { 1 };
        sample_gaussian_into(&self.means[pick], &self.sqrts[pick], rng)
    }
}

/// n i.i.d. draws from the mixture; reproducible for a fixed seed.
pub fn sample(model: &MixtureModel, n: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let sampler = MixtureSampler::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

/// Pre-computed inverses and log-determinants for repeated density
/// evaluation. Construction fails on singular covariances.
pub struct DensityEvaluator {
    comps: Vec<(DVector<f64>, DMatrix<f64>, f64, f64)>, // mean, inverse, logdet, log weight
    dim: usize,
}

impl DensityEvaluator {
    pub fn new(model: &MixtureModel) -> Result<Self> {
        let mut comps = Vec::with_capacity(2);
        for (g, w) in model.components().iter().zip(model.weights()) {
            let (inv, logdet) = linalg::pd_inverse_logdet(g.cov())?;
            comps.push((g.mean().clone(), inv, logdet, w.ln()));
        }
        Ok(DensityEvaluator {
            comps,
            dim: model.dim(),
        })
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        let d = self.dim as f64;
        let mut terms = [f64::NEG_INFINITY; 2];
        for (k, (mean, inv, logdet, logw)) in self.comps.iter().enumerate() {
            let diff = x - mean;
            let quad = diff.dot(&(inv * &diff));
            terms[k] = logw - 0.5 * (d * LN_2PI + logdet + quad);
        }
        let m = terms[0].max(terms[1]);
        m + ((terms[0] - m).exp() + (terms[1] - m).exp()).ln()
    }
}

/// Log of the mixture probability density at x.
pub fn log_density(model: &MixtureModel, x: &DVector<f64>) -> Result<f64> {
    Ok(DensityEvaluator::new(model)?.log_density(x))
}

/// Triangle-inequality surrogate for the TV distance between two Gaussians:
/// ((μ₁−μ₂)ᵀΣ₁⁻¹(μ₁−μ₂))^{1/2} + ‖Σ₁^{−1/2}Σ₂Σ₁^{−1/2} − I‖_F,
/// with constant 1. An upper-bound ordering, never an exact distance.
pub fn tv_upper_bound(g1: &GaussianParams, g2: &GaussianParams) -> Result<f64> {
    let min_eig = linalg::min_eigenvalue(g1.cov());
    if min_eig <= EIGEN_FLOOR {
        return Err(Error::SingularModel(
            "tv_upper_bound needs a positive definite first covariance".into(),
        ));
    }
    let (inv, _) = linalg::pd_inverse_logdet(g1.cov())?;
    let dm = g1.mean() - g2.mean();
    let mean_term = dm.dot(&(&inv * &dm)).max(0.0).sqrt();
    let w = linalg::psd_inv_sqrt(g1.cov());
    let conj = &w * g2.cov() * &w;
    let d = g1.dim();
    let cov_term = (conj - DMatrix::<f64>::identity(d, d)).norm();
    Ok(mean_term + cov_term)
}

/// Monte-Carlo TV estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TvEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// Monte-Carlo estimate of dtv(m1, m2), sampling from the balanced mixture
/// of the two models so the integrand |p−q|/(p+q) stays in [0,1]:
/// E_{x∼(p+q)/2}[|p−q|/(p+q)] = ½∫|p−q| = dtv.
pub fn estimate_tv(m1: &MixtureModel, m2: &MixtureModel, n: usize, seed: u64) -> Result<TvEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("estimate_tv needs n >= 1".into()));
    }
    let e1 = DensityEvaluator::new(m1)?;
    let e2 = DensityEvaluator::new(m2)?;
    let s1 = MixtureSampler::new(m1);
    let s2 = MixtureSampler::new(m2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let x = if rng.random::<f64>() < 0.5 {
            s1.draw(&mut rng)
        } else {
            s2.draw(&mut rng)
        };
        let lp = e1.log_density(&x);
        let lq = e2.log_density(&x);
        let m = lp.max(lq);
        let (p, q) = ((lp - m).exp(), (lq - m).exp());
        let r = (p - q).abs() / (p + q);
        sum += r;
        sum_sq += r * r;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    Ok(TvEstimate {
        value: mean,
        std_err: (var / n as f64).sqrt(),
    })
}

/// Whitened component spectra and covariance disagreement for a mixture,
/// compared against both δ² and δ³ thresholds (the two candidate powers for
/// the non-separation eigenvalue bound).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationDiagnostics {
    /// Smallest eigenvalue of Σ_X^{−1/2} cov(Gᵢ) Σ_X^{−1/2}, per component.
    pub min_whitened_eigenvalue: [f64; 2],
    /// ‖Σ_X^{−1/2}(cov(G₁) − cov(G₂))Σ_X^{−1/2}‖_F.
    pub whitened_cov_difference: f64,
    pub delta: f64,
    pub delta_squared: f64,
    pub delta_cubed: f64,
    pub min_eig_above_delta_squared: [bool; 2],
    pub min_eig_above_delta_cubed: [bool; 2],
}

pub fn separation_diagnostics(model: &MixtureModel, delta: f64) -> Result<SeparationDiagnostics> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    let sigma_x = model.covariance();
    if linalg::min_eigenvalue(&sigma_x) <= EIGEN_FLOOR {
        return Err(Error::SingularModel(
            "mixture covariance is singular".into(),
        ));
    }
    let w = linalg::psd_inv_sqrt(&sigma_x);
    let whiten = |c: &DMatrix<f64>| -> DMatrix<f64> { &w * c * &w };
    let [g1, g2] = model.components();
    let w1 = whiten(g1.cov());
    let w2 = whiten(g2.cov());
    let min1 = linalg::min_eigenvalue(&w1);
    let min2 = linalg::min_eigenvalue(&w2);
    let diff = (&w1 - &w2).norm();
    let d2 = delta * delta;
    let d3 = d2 * delta;
    Ok(SeparationDiagnostics {
        min_whitened_eigenvalue: [min1, min2],
        whitened_cov_difference: diff,
        delta,
        delta_squared: d2,
        delta_cubed: d3,
        min_eig_above_delta_squared: [min1 >= d2, min2 >= d2],
        min_eig_above_delta_cubed: [min1 >= d3, min2 >= d3],
    })
}
