//! Robust Hermite moment estimation for the standardized mixture and
//! recovery of candidate (μ, Σ) pairs from those moments by low-rank tensor
//! surgery with guess enumeration.
//!
//! Population identities driving the recovery, for the canonical mixture
//! ½N(μ, I−μμᵀ+Σ) + ½N(−μ, I−μμᵀ−Σ):
//!   E[h₄(X)] = sym(3Σ⊗Σ − 2μ⊗⁴)   and   E[h₆(X)] = 16·μ⊗⁶.
//! μ comes out of the best rank-1 unfolding of the sixth moment; Σ out of
//! sym(Σ⊗Σ) via a rank-3 subspace branch and a random-contraction branch,
//! each run over a grid of Frobenius-norm guesses. Every candidate from
//! every branch is kept; selection happens later in the tournament.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gaussmix::{hermite_tensor, MixtureModel};
use crate::linalg;
use crate::normalize::AffineMap;
use crate::robust::{robust_mean_with, FilterConfig};
use crate::select::Hypothesis;
use crate::tensor::{self, Tensor};

/// Robust estimates of E[h₄(X)] and E[h₆(X)], symmetrized on construction.
#[derive(Debug, Clone)]
pub struct MomentEstimates {
    pub m4: Tensor,
    pub m6: Tensor,
    /// Posited accuracy of the estimates, used to size recovery grids.
    pub eta: f64,
}

impl MomentEstimates {
    pub fn new(m4: Tensor, m6: Tensor, eta: f64) -> Result<Self> {
        if m4.order() != 4 || m6.order() != 6 || m4.dim() != m6.dim() {
            return Err(Error::DimensionMismatch(
                "moment estimates must be order-4 and order-6 tensors of one dimension".into(),
            ));
        }
        let m4 = tensor::symmetrize(&m4);
        let m6 = tensor::symmetrize(&m6);
        Ok(MomentEstimates { m4, m6, eta })
    }
}

/// One recovered parameter guess and the branch that produced it.
#[derive(Debug, Clone)]
pub struct CandidateParams {
    pub mu_hat: DVector<f64>,
    pub sigma_hat: DMatrix<f64>,
    pub provenance: String,
}

/// Scale constants and grid resolutions for moment estimation and recovery.
#[derive(Debug, Clone)]
pub struct RecoverConfig {
    /// C in the filter scale σ_m = C·(1 + Σ-proxy + μ-proxy)^m.
    pub moment_c: f64,
    /// Σ-proxy = sigma_proxy_c · log(1/δ); after standardization ‖Σ‖_F is
    /// bounded by a multiple of log(1/δ).
    pub sigma_proxy_c: f64,
    /// |μ|-proxy; the standardized mixture has |μ| < 1.
    pub mu_proxy: f64,
    /// Upper end of the ‖Σ‖_F guess grid.
    pub s_max: f64,
    /// Guess-grid step; `None` uses the posited accuracy η.
    pub s_step: Option<f64>,
    /// Grid step for the bilinear-form guesses A ≈ xᵀΣy, B ≈ zᵀΣw on [−1,1].
    pub ab_step: f64,
    /// Eigenvalue floor when projecting candidate covariances to the PSD cone.
    pub psd_clamp: f64,
    /// Candidates whose clamping moved an eigenvalue by more than this are
    /// dropped as grossly invalid.
    pub clamp_skip: f64,
    /// Override for the posited moment accuracy η.
    pub eta_override: Option<f64>,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            moment_c: 1.0,
            sigma_proxy_c: 4.0,
            mu_proxy: 1.0,
            s_max: 2.0,
            s_step: None,
            ab_step: 0.25,
            psd_clamp: 1e-9,
            clamp_skip: 0.5,
            eta_override: None,
        }
    }
}

fn flatten_hermite(points: &[DVector<f64>], m: usize) -> Vec<DVector<f64>> {
    points
        .iter()
        .map(|x| DVector::from_vec(hermite_tensor(x, m).into_data()))
        .collect()
}

/// Robustly estimate E[h₄(X)], E[h₆(X)] from standardized points.
///
/// Each point maps to its flattened Hermite tensors; the bounded-covariance
/// robust mean runs on those vectors with filter scale
/// σ_m = C·(1 + ‖Σ‖-proxy + |μ|-proxy)^m, and the results are reshaped back
/// and symmetrized. Target error O(√ε·σ_m) in Frobenius norm.
pub fn estimate_hermite_moments(
    points: &[DVector<f64>],
    epsilon: f64,
    delta: f64,
    cfg: &RecoverConfig,
) -> Result<MomentEstimates> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let d = points[0].len();
    let n = points.len();
    let proxy = 1.0 + cfg.sigma_proxy_c * (1.0 / delta).ln() + cfg.mu_proxy;
    let sigma4 = cfg.moment_c * proxy.powi(4);
    let sigma6 = cfg.moment_c * proxy.powi(6);
    let filter_cfg = FilterConfig::default();

    let h4 = flatten_hermite(points, 4);
    let (m4_flat, _) = robust_mean_with(&h4, epsilon, sigma4, &filter_cfg)?;
    drop(h4);
    let h6 = flatten_hermite(points, 6);
    let (m6_flat, _) = robust_mean_with(&h6, epsilon, sigma6, &filter_cfg)?;
    drop(h6);

    let m4 = Tensor::from_data(d, 4, m4_flat.iter().copied().collect())?;
    let m6 = Tensor::from_data(d, 6, m6_flat.iter().copied().collect())?;
    let eta = cfg.eta_override.unwrap_or_else(|| {
        // contamination bias plus sampling noise at the standardized scale
        let bias = (2.0 * epsilon).sqrt() / 4.0;
        let sampling = ((d.pow(6) as f64) / n as f64).sqrt();
        (bias + sampling).clamp(5e-3, 0.25)
    });
    MomentEstimates::new(m4, m6, eta)
}

fn sign_fix(mut v: DVector<f64>) -> DVector<f64> {
    let mut best = 0usize;
    let mut best_abs = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        v = -v;
    }
    v
}

/// Candidate means from an estimate M ≈ 16·μ⊗⁶.
///
/// M/16 unfolds to a d × d⁵ matrix that is η-close to the rank-1 matrix
/// μ(μ⊗⁵)ᵀ; the top singular triple gives the direction and σ₁^{1/6} the
/// magnitude. The probability-1/3 guess over {0, +u, −u} becomes
/// deterministic enumeration: all three are returned. If
/// ‖M/16 − μ⊗⁶‖_F ≤ η, some candidate is within O(η^{1/6}) of μ.
pub fn recover_mu(m6: &Tensor, _eta: f64) -> Vec<DVector<f64>> {
    assert_eq!(m6.order(), 6, "recover_mu needs an order-6 tensor");
    let d = m6.dim();
    let zero = DVector::zeros(d);
    let unfolded = tensor::reshape_to_matrix(&m6.scale(1.0 / 16.0), &[0]);
    let svd = unfolded.svd(true, false);
    let s1 = svd.singular_values[0];
    if !(s1 > 0.0) {
        return vec![zero];
    }
    let u = svd.u.as_ref().expect("requested u").column(0).into_owned();
    let u = sign_fix(u);
    let magnitude = s1.powf(1.0 / 6.0);
    let plus = &u * magnitude;
    let minus = -&plus;
    vec![zero, plus, minus]
}

fn sym_pair_product(sigma: &DMatrix<f64>) -> Tensor {
    let st = Tensor::from_square_matrix(sigma);
    tensor::symmetrize(&st.outer(&st).expect("same dim"))
}

/// Contract M_{i1 i2 i3 i4} a_{i1} b_{i2} into a symmetric d×d matrix.
fn bilinear_contract(m: &Tensor, a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let at = Tensor::from_vector(a);
    let bt = Tensor::from_vector(b);
    let first = tensor::contract(m, &at, &[(0, 0)]).expect("dims match");
    let second = tensor::contract(&first, &bt, &[(0, 0)]).expect("dims match");
    linalg::symmetrize_matrix(&second.to_square_matrix())
}

/// Candidate Σ matrices from an estimate of E[h₄] plus a mean guess.
///
/// M = (m4 + 2·sym(μ̂⊗⁴))/3 estimates sym(Σ⊗Σ). The Frobenius norm of Σ is
/// guessed over a grid; for each guess both branches run on M/s²:
/// a rank-3 branch (top left-singular subspace of the d×d³ unfolding,
/// candidates s·(ûûᵀ+v̂v̂ᵀ+ŵŵᵀ) over deterministic and random triples in the
/// subspace) and a generic branch (random contractions with guessed
/// bilinear forms, rank-4 subspace, random corrections). All candidates are
/// returned, exactly symmetric; the zero matrix is always among them.
pub fn recover_sigma(
    m4: &Tensor,
    mu_hat: &DVector<f64>,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Vec<DMatrix<f64>> {
    recover_sigma_with(m4, mu_hat, eta, trials, seed, &RecoverConfig::default())
}

pub fn recover_sigma_with(
    m4: &Tensor,
    mu_hat: &DVector<f64>,
    eta: f64,
    trials: usize,
    seed: u64,
    cfg: &RecoverConfig,
) -> Vec<DMatrix<f64>> {
    recover_sigma_tagged(m4, mu_hat, eta, trials, seed, cfg)
        .into_iter()
        .map(|(m, _)| m)
        .collect()
}

/// Which guess branch produced a Σ candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaBranch {
    Zero,
    Rank3Deterministic,
    Rank3Random,
    Generic,
}

impl SigmaBranch {
    pub fn label(self) -> &'static str {
        match self {
            SigmaBranch::Zero => "zero",
            SigmaBranch::Rank3Deterministic => "rank3-det",
            SigmaBranch::Rank3Random => "rank3-rand",
            SigmaBranch::Generic => "generic",
        }
    }
}

pub fn recover_sigma_tagged(
    m4: &Tensor,
    mu_hat: &DVector<f64>,
    eta: f64,
    trials: usize,
    seed: u64,
    cfg: &RecoverConfig,
) -> Vec<(DMatrix<f64>, SigmaBranch)> {
    assert_eq!(m4.order(), 4, "recover_sigma needs an order-4 tensor");
    assert!(trials >= 1, "trials must be >= 1");
    let d = m4.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(DMatrix<f64>, SigmaBranch)> =
        vec![(DMatrix::zeros(d, d), SigmaBranch::Zero)];

    let mu_t = Tensor::from_vector(mu_hat);
    let mu4 = tensor::tensor_power(&mu_t, 4);
    let m = m4.add(&mu4.scale(2.0)).expect("same shape").scale(1.0 / 3.0);

    let eta = eta.max(1e-6);
    let s_step = cfg.s_step.unwrap_or(eta).max(1e-6);
    let n_s = ((cfg.s_max / s_step).floor() as usize).max(1);
    let s_at = |k: usize| (k + 1) as f64 * s_step;

    // rank-3 branch basis: the left singular subspace does not depend on
    // the 1/s² scaling, so compute it once
    let unfolded = tensor::reshape_to_matrix(&m, &[0]);
    let svd = unfolded.svd(true, false);
    let rank = 3.min(d);
    let basis: Vec<DVector<f64>> = (0..rank)
        .map(|k| svd.u.as_ref().expect("requested u").column(k).into_owned())
        .collect();

    // deterministic triples over a coarse coefficient grid on a coarse
    // s-subgrid; catches exactly low-rank PSD structure
    let det_coeffs = [0.0, 0.5, 0.8, 1.0];
    let det_s_stride = (n_s / 20).max(1);
    for k in (0..n_s).step_by(det_s_stride) {
        let s = s_at(k);
        for &a in &det_coeffs {
            for &b in &det_coeffs {
                for &c in &det_coeffs {
                    if a == 0.0 && b == 0.0 && c == 0.0 {
                        continue;
                    }
                    let mut cand = DMatrix::zeros(d, d);
                    for (coef, q) in [(a, 0), (b, 1), (c, 2)] {
                        if coef > 0.0 && q < basis.len() {
                            let u = &basis[q] * coef;
                            cand += &u * u.transpose();
                        }
                    }
                    out.push((
                        linalg::symmetrize_matrix(&(cand * s)),
                        SigmaBranch::Rank3Deterministic,
                    ));
                }
            }
        }
    }

    // random triples in the subspace, budgeted across the full s-grid
    let r3_budget = trials / 2;
    let per_s = (r3_budget / n_s).max(1);
    for k in 0..n_s {
        let s = s_at(k);
        for _ in 0..per_s {
            let mut cand = DMatrix::zeros(d, d);
            for _ in 0..rank {
                let radius: f64 = rng.random::<f64>();
                let mut dir = DVector::zeros(d);
                for q in &basis {
                    dir += q * rng.sample::<f64, _>(StandardNormal);
                }
                let norm = dir.norm();
                if norm > 0.0 {
                    let u = dir * (radius / norm);
                    cand += &u * u.transpose();
                }
            }
            out.push((
                linalg::symmetrize_matrix(&(cand * s)),
                SigmaBranch::Rank3Random,
            ));
        }
    }

    // generic branch: random contractions with guessed bilinear forms
    let gauss = |rng: &mut ChaCha8Rng| DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = gauss(&mut rng);
    let y = gauss(&mut rng);
    let z = gauss(&mut rng);
    let w = gauss(&mut rng);
    let mxy = bilinear_contract(&m, &x, &y);
    let mzw = bilinear_contract(&m, &z, &w);
    let mut ab_grid = Vec::new();
    let mut a = -1.0f64;
    while a <= 1.0 + 1e-12 {
        if a.abs() > 1e-9 {
            ab_grid.push(a);
        }
        a += cfg.ab_step;
    }
    let gen_s_stride = (n_s / 50).max(1);
    let gen_s_count = n_s.div_ceil(gen_s_stride);
    let per_combo =
        ((trials - r3_budget) / (gen_s_count * ab_grid.len() * ab_grid.len()).max(1)).max(1);
    for k in (0..n_s).step_by(gen_s_stride) {
        let s = s_at(k);
        let s2 = s * s;
        let mxy_s = &mxy / s2;
        let mzw_s = &mzw / s2;
        for &a in &ab_grid {
            for &b in &ab_grid {
                let dmat = &mzw_s * a - &mxy_s * b;
                let eig = dmat.clone().symmetric_eigen();
                // top-(up to 4) eigen-directions of the symmetric D span V
                let mut order: Vec<usize> = (0..d).collect();
                order.sort_by(|&p, &q| {
                    eig.eigenvalues[q]
                        .abs()
                        .partial_cmp(&eig.eigenvalues[p].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let sub: Vec<DVector<f64>> = order
                    .iter()
                    .take(4.min(d))
                    .map(|&i| eig.eigenvectors.column(i).into_owned())
                    .collect();
                for _ in 0..per_combo {
                    let draw_in_sub = |rng: &mut ChaCha8Rng| {
                        let mut v = DVector::zeros(d);
                        for q in &sub {
                            v += q * rng.sample::<f64, _>(StandardNormal);
                        }
                        let norm = v.norm();
                        if norm > 0.0 {
                            let radius = 2.0 * (d as f64).sqrt() * rng.random::<f64>();
                            v * (radius / norm)
                        } else {
                            v
                        }
                    };
                    let sv = draw_in_sub(&mut rng);
                    let tv = draw_in_sub(&mut rng);
                    let corr = (&sv * tv.transpose() + &tv * sv.transpose()) / 3.0;
                    let cand = (&mxy_s - corr) * (3.0 / a) * s;
                    out.push((linalg::symmetrize_matrix(&cand), SigmaBranch::Generic));
                }
            }
        }
    }
    out
}

/// Convert recovered (μ̂, Σ̂) pairs into mixture hypotheses in the original
/// coordinates: components N(±μ̂, I−μ̂μ̂ᵀ±Σ̂) projected to the PSD cone and
/// pulled back through the standardizing map. Pairs whose projection moved
/// an eigenvalue by more than the configured threshold are dropped, not
/// failed.
pub fn candidates_to_models(
    candidates: &[CandidateParams],
    map: &AffineMap,
) -> Vec<Hypothesis> {
    candidates_to_models_with(candidates, map, &RecoverConfig::default())
}

pub fn candidates_to_models_with(
    candidates: &[CandidateParams],
    map: &AffineMap,
    cfg: &RecoverConfig,
) -> Vec<Hypothesis> {
    let mut out = Vec::new();
    'cand: for cand in candidates {
        let d = cand.mu_hat.len();
        let base = DMatrix::identity(d, d) - &cand.mu_hat * cand.mu_hat.transpose();
        let mut comps = Vec::with_capacity(2);
        for sign in [1.0f64, -1.0] {
            let raw = &base + &cand.sigma_hat * sign;
            let eig = linalg::symmetrize_matrix(&raw).symmetric_eigen();
            let min_eig = eig.eigenvalues.min();
            if min_eig < -cfg.clamp_skip {
                log::debug!(
                    "dropping candidate '{}': eigenvalue {min_eig:.3} beyond clamp threshold",
                    cand.provenance
                );
                continue 'cand;
            }
            let vals: Vec<f64> = eig
                .eigenvalues
                .iter()
                .map(|&l| l.max(cfg.psd_clamp))
                .collect();
            let cov = &eig.eigenvectors
                * DMatrix::from_diagonal(&DVector::from_vec(vals))
                * eig.eigenvectors.transpose();
            let mean = &cand.mu_hat * sign;
            match crate::gaussmix::GaussianParams::new(mean, linalg::symmetrize_matrix(&cov)) {
                Ok(g) => comps.push(g),
                Err(e) => {
                    log::debug!("dropping candidate '{}': {e}", cand.provenance);
                    continue 'cand;
                }
            }
        }
        let g2 = comps.pop().unwrap();
        let g1 = comps.pop().unwrap();
        let standardized = match MixtureModel::equal_weight(g1, g2) {
            Ok(m) => m,
            Err(_) => continue,
        };
        match map.pull_back_model(&standardized) {
            Ok(model) => out.push(Hypothesis {
                model,
                provenance: cand.provenance.clone(),
            }),
            Err(e) => log::debug!("dropping candidate '{}': pull-back failed: {e}", cand.provenance),
        }
    }
    out
}

/// Exact population value sym(Σ⊗Σ), shared by tests and the Σ-recovery
/// contract.
pub fn sym_sigma_squared(sigma: &DMatrix<f64>) -> Tensor {
    sym_pair_product(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussmix::CanonicalMixtureParams;

    fn best_sigma_error(cands: &[DMatrix<f64>], truth: &DMatrix<f64>) -> f64 {
        cands
            .iter()
            .map(|c| (c - truth).norm())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn recover_mu_exact_rank_one() {
        let mu = DVector::from_vec(vec![1.0, 0.0]);
        let m6 = tensor::tensor_power(&Tensor::from_vector(&mu), 6).scale(16.0);
        let cands = recover_mu(&m6, 0.0);
        assert!(cands.iter().any(|c| c.norm() == 0.0));
        let best = cands
            .iter()
            .map(|c| (c - &mu).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "best error {best}");
    }

    #[test]
    fn recover_mu_zero_tensor() {
        let m6 = Tensor::zeros(3, 6);
        let cands = recover_mu(&m6, 0.1);
        assert!(cands.iter().any(|c| c.norm() == 0.0));
    }

    #[test]
    fn recover_mu_candidates_closed_under_negation() {
        let mu = DVector::from_vec(vec![0.6, 0.3]);
        let m6 = tensor::tensor_power(&Tensor::from_vector(&mu), 6).scale(16.0);
        let cands = recover_mu(&m6, 0.0);
        assert_eq!(cands.len(), 3);
        assert!((&cands[1] + &cands[2]).norm() < 1e-12);
    }

    #[test]
    fn recover_mu_perturbed_within_bound() {
        let mu = DVector::from_vec(vec![0.6, 0.3]);
        let exact = tensor::tensor_power(&Tensor::from_vector(&mu), 6).scale(16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let noise_data: Vec<f64> = (0..exact.data().len())
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let noise = Tensor::from_data(2, 6, noise_data).unwrap();
            let eta = 0.01;
            let scaled = noise.scale(eta / noise.frobenius_norm());
            // perturbation applies to M/16, so scale the noise up by 16
            let m6 = exact.add(&scaled.scale(16.0)).unwrap();
            let cands = recover_mu(&m6, eta);
            let best = cands
                .iter()
                .map(|c| (c - &mu).norm())
                .fold(f64::INFINITY, f64::min);
            let bound = 5.0 * eta.powf(1.0 / 6.0);
            assert!(best <= bound, "best {best} over bound {bound}");
        }
    }

    #[test]
    fn recover_mu_rotation_equivariant() {
        let mu = DVector::from_vec(vec![0.5, 0.2]);
        let theta: f64 = 0.9;
        let rot =
            DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let m6 = tensor::tensor_power(&Tensor::from_vector(&mu), 6).scale(16.0);
        let rotated_mu = &rot * &mu;
        let m6_rot = tensor::tensor_power(&Tensor::from_vector(&rotated_mu), 6).scale(16.0);
        let c1 = recover_mu(&m6, 0.0);
        let c2 = recover_mu(&m6_rot, 0.0);
        // the nonzero candidate pair maps to the rotated pair (up to order)
        let best = c1
            .iter()
            .map(|c| {
                let rc = &rot * c;
                c2.iter().map(|c2i| (c2i - &rc).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        assert!(best < 1e-8, "worst matched distance {best}");
    }

    #[test]
    fn recover_sigma_zero_matrix() {
        let m4 = Tensor::zeros(2, 4);
        let cands = recover_sigma(&m4, &DVector::zeros(2), 0.05, 10, 1);
        assert!(cands.iter().any(|c| c.norm() == 0.0));
        for c in &cands {
            assert!(linalg::is_symmetric(c, 0.0), "candidate not exactly symmetric");
        }
    }

    #[test]
    fn recover_sigma_rank_one_psd() {
        let d = 3;
        let u = DVector::from_vec(vec![2.0, -1.0, 0.5]).normalize();
        let sigma = &u * u.transpose() * 0.8;
        let m = sym_sigma_squared(&sigma);
        // exact E[h4] = sym(3Σ⊗Σ − 2μ⊗4) with μ = 0 ⇒ m4 = 3·sym(Σ⊗Σ)
        let m4 = m.scale(3.0);
        let cands = recover_sigma(&m4, &DVector::zeros(d), 0.05, 10_000, 3);
        let best = best_sigma_error(&cands, &sigma);
        assert!(best < 0.05, "best error {best}");
    }

    #[test]
    fn recover_sigma_full_rank_perturbed() {
        let d = 3;
        let sigma = DMatrix::from_row_slice(
            3,
            3,
            &[0.7, 0.1, -0.2, 0.1, -0.5, 0.05, -0.2, 0.05, 0.3],
        );
        let sigma = &sigma / sigma.norm();
        let eta = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let exact = sym_sigma_squared(&sigma);
        let noise_data: Vec<f64> = (0..exact.data().len())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let noise = Tensor::from_data(d, 4, noise_data).unwrap();
        let m = exact
            .add(&noise.scale(eta / noise.frobenius_norm()))
            .unwrap();
        let m4 = m.scale(3.0);
        let cands = recover_sigma(&m4, &DVector::zeros(d), eta, 10_000, 5);
        let best = best_sigma_error(&cands, &sigma);
        // smoke bound; the acceptance suite pins the calibrated constant
        assert!(best <= 4.0 * eta.powf(1.0 / 8.0), "best error {best}");
    }

    #[test]
    fn candidates_to_models_identity_map() {
        let map = AffineMap::identity(2);
        let cands = vec![CandidateParams {
            mu_hat: DVector::zeros(2),
            sigma_hat: DMatrix::zeros(2, 2),
            provenance: "test/zero".into(),
        }];
        let models = candidates_to_models(&cands, &map);
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].model, MixtureModel::spherical(2));
    }

    #[test]
    fn candidates_to_models_drops_grossly_invalid() {
        let map = AffineMap::identity(2);
        let bad = CandidateParams {
            mu_hat: DVector::zeros(2),
            // eigenvalue of I − Σ hits 1 − 1.7 = −0.7, beyond the 0.5 skip
            sigma_hat: DMatrix::from_row_slice(2, 2, &[1.7, 0.0, 0.0, -1.7]),
            provenance: "test/bad".into(),
        };
        let ok = CandidateParams {
            mu_hat: DVector::from_vec(vec![0.3, 0.0]),
            sigma_hat: DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, -0.1]),
            provenance: "test/ok".into(),
        };
        let models = candidates_to_models(&[bad, ok], &map);
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].provenance, "test/ok");
    }

    #[test]
    fn candidates_roundtrip_canonical_model() {
        let mu = DVector::from_vec(vec![0.5, 0.0]);
        let sigma = DMatrix::from_row_slice(2, 2, &[0.14, 0.0, 0.0, -0.14]);
        let truth = CanonicalMixtureParams::new(mu.clone(), sigma.clone())
            .unwrap()
            .to_mixture()
            .unwrap();
        let map = AffineMap::identity(2);
        let cands = vec![CandidateParams {
            mu_hat: mu,
            sigma_hat: sigma,
            provenance: "test/exact".into(),
        }];
        let models = candidates_to_models(&cands, &map);
        assert_eq!(models.len(), 1);
        let tv = crate::gaussmix::estimate_tv(&models[0].model, &truth, 20_000, 9).unwrap();
        assert!(tv.value < 0.01, "tv {}", tv.value);
    }

    #[test]
    fn moment_identity_constants_match_population() {
        // m4 = sym(3Σ⊗Σ − 2μ⊗⁴) ⇒ (m4 + 2·sym(μ⊗⁴))/3 = sym(Σ⊗Σ)
        let mu = DVector::from_vec(vec![0.5, 0.1]);
        let sigma = DMatrix::from_row_slice(2, 2, &[0.1, 0.02, 0.02, -0.08]);
        let params = CanonicalMixtureParams::new(mu.clone(), sigma.clone()).unwrap();
        let (h4, _) = crate::gaussmix::mixture_h4_h6(&params);
        let mu4 = tensor::tensor_power(&Tensor::from_vector(&mu), 4);
        let m = h4.add(&mu4.scale(2.0)).unwrap().scale(1.0 / 3.0);
        let expect = sym_sigma_squared(&sigma);
        assert!(m.sub(&expect).unwrap().frobenius_norm() < 1e-12);
    }
}
