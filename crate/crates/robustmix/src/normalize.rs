//! Standardization of the mixture: robust covariance estimation via pair
//! differences, the affine map to (approximate) zero mean and identity
//! covariance, and a clustering fallback for far-separated components.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussmix::{GaussianParams, MixtureModel};
use crate::linalg;
use crate::robust::{robust_covariance, robust_mean, robust_mean_with, FilterConfig};
use crate::seeding;
use crate::select::Hypothesis;

/// Invertible affine map x ↦ A·x − b with its exact inverse y ↦ A⁻¹(y + b).
#[derive(Debug, Clone)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    linear_inv: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        let d = offset.len();
        if linear.nrows() != d || linear.ncols() != d {
            return Err(Error::DimensionMismatch(
                "affine map shapes disagree".into(),
            ));
        }
        let linear_inv = linear.clone().try_inverse().ok_or_else(|| {
            Error::DegenerateCovariance("affine map linear part is singular".into())
        })?;
        let svd = linear.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        log::debug!(
            "affine map condition number {:.3e}",
            smax / smin.max(f64::MIN_POSITIVE)
        );
        Ok(AffineMap {
            linear,
            linear_inv,
            offset,
        })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap {
            linear: DMatrix::identity(d, d),
            linear_inv: DMatrix::identity(d, d),
            offset: DVector::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x - &self.offset
    }

    pub fn apply_inverse(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.linear_inv * (y + &self.offset)
    }

    /// Pull a model expressed in the image coordinates back through the map:
    /// means via A⁻¹(m + b), covariances via A⁻¹ C A⁻ᵀ.
    pub fn pull_back_model(&self, model: &MixtureModel) -> Result<MixtureModel> {
        let mut comps = Vec::with_capacity(2);
        for g in model.components() {
            let mean = self.apply_inverse(g.mean());
            let cov = &self.linear_inv * g.cov() * self.linear_inv.transpose();
            comps.push(GaussianParams::new(mean, linalg::symmetrize_matrix(&cov))?);
        }
        let g2 = comps.pop().unwrap();
        let g1 = comps.pop().unwrap();
        MixtureModel::new([g1, g2], model.weights())
    }
}

/// Scale constants for the normalization estimators.
#[derive(Debug, Clone)]
pub struct NormalizeConfig {
    /// C in σ = C·log(1/δ) for the pair-difference covariance filter.
    pub cov_sigma_c: f64,
    /// σ for the robust mean of whitened points (their covariance is ≈ I).
    pub mean_sigma: f64,
    /// Fraction of the batch used for covariance pairs; the rest feeds the
    /// mean estimate, keeping the two stages on disjoint samples.
    pub cov_fraction: f64,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig {
            cov_sigma_c: 1.0,
            mean_sigma: 2.0,
            cov_fraction: 0.6,
        }
    }
}

fn covariance_sigma(cfg: &NormalizeConfig, delta: f64) -> f64 {
    // floored at √2, the exact constant for Gaussian outer products; below
    // it the variance promise cannot hold for any mixture. Larger C widens
    // the truncation radius and loosens the filter, so C = 1 keeps the
    // estimator sharp while log(1/δ) still covers covariance disagreement
    // between nearly-separated components.
    (cfg.cov_sigma_c * (1.0 / delta).ln()).max(std::f64::consts::SQRT_2)
}

/// Robust estimate of cov(X) from pair differences.
///
/// After a seeded shuffle, disjoint consecutive samples are paired as
/// Y_i = x_{2i} − x_{2i+1} and Z_i = Y_i Y_iᵀ / 2, so E[Z] = cov(X) exactly
/// for any mixture. The Z_i feed the robust covariance learner at noise rate
/// 2ε (either endpoint of a pair may be corrupted) with σ = C·log(1/δ).
/// Each sample is consumed by at most one pair, keeping the Z_i independent.
pub fn estimate_mixture_covariance(
    points: &[DVector<f64>],
    epsilon: f64,
    delta: f64,
    cfg: &NormalizeConfig,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two points to form a pair".into(),
        ));
    }
    if !(0.0 < delta && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    if order.len() % 2 == 1 {
        log::debug!("odd batch size {}; dropping one sample before pairing", order.len());
        order.pop();
    }
    let z: Vec<DMatrix<f64>> = order
        .chunks_exact(2)
        .map(|pair| {
            let y = &points[pair[0]] - &points[pair[1]];
            (&y * y.transpose()) * 0.5
        })
        .collect();
    let sigma = covariance_sigma(cfg, delta);
    let (est, _report) = robust_covariance(&z, (2.0 * epsilon).min(0.45), sigma)?;
    Ok(est)
}

/// Build the standardizing map L(x) = Σ̂^{−1/2}x − μ̂ and apply it to the
/// whole batch.
///
/// The batch is split (seeded) into a covariance part and a mean part so the
/// two estimates use disjoint samples: Σ̂ comes from pair differences, μ̂
/// from a robust mean of the whitened remainder, whose covariance is ≈ I.
/// Warns when ε ≥ δ³, outside the regime where the transformed population
/// is guaranteed TV-close to a canonical mixture.
pub fn standardize(
    points: &[DVector<f64>],
    epsilon: f64,
    delta: f64,
    cfg: &NormalizeConfig,
    seed: u64,
) -> Result<(AffineMap, Vec<DVector<f64>>)> {
    if epsilon >= delta.powi(3) {
        log::warn!(
            "standardize: epsilon {epsilon:.4} >= delta^3 {:.4}; the standard-form \
             guarantee degrades in this regime",
            delta.powi(3)
        );
    }
    let n = points.len();
    if n < 4 {
        return Err(Error::InvalidArgument("batch too small to standardize".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_cov = ((n as f64 * cfg.cov_fraction) as usize).clamp(2, n - 2);
    let cov_part: Vec<DVector<f64>> = order[..n_cov].iter().map(|&i| points[i].clone()).collect();
    let mean_part: Vec<DVector<f64>> = order[n_cov..].iter().map(|&i| points[i].clone()).collect();

    let sigma_hat =
        estimate_mixture_covariance(&cov_part, epsilon, delta, cfg, seeding::derive(seed, 1))?;
    if linalg::min_eigenvalue(&sigma_hat) <= linalg::EIGEN_FLOOR {
        return Err(Error::DegenerateCovariance(
            "estimated mixture covariance is not positive definite".into(),
        ));
    }
    let w = linalg::psd_inv_sqrt(&sigma_hat);
    let whitened_mean_part: Vec<DVector<f64>> = mean_part.iter().map(|x| &w * x).collect();
    let (mu_hat, _report) = robust_mean(&whitened_mean_part, epsilon, cfg.mean_sigma)?;

    let map = AffineMap::new(w, mu_hat)?;
    let transformed = points.iter().map(|x| map.apply(x)).collect();
    Ok((map, transformed))
}

/// Substitute path for far-separated components: a single-linkage split on
/// Mahalanobis distances, robust per-cluster fits, and always at least the
/// single-Gaussian hypothesis. No accuracy guarantee is claimed; the
/// tournament adjudicates whatever this produces.
pub fn separated_fallback(
    points: &[DVector<f64>],
    epsilon: f64,
    cfg: &NormalizeConfig,
    seed: u64,
) -> Vec<Hypothesis> {
    let mut out = Vec::new();
    if points.is_empty() {
        return out;
    }
    let d = points[0].len();
    let n = points.len();

    // whitening for the distance metric; degraded inputs fall back to the
    // empirical covariance, this path carries no guarantees anyway
    let sigma_hat = estimate_mixture_covariance(points, epsilon, 0.25, cfg, seeding::derive(seed, 1))
        .unwrap_or_else(|e| {
            log::info!("fallback: covariance filter failed ({e}); using empirical covariance");
            empirical_covariance(points)
        });
    let w = linalg::psd_inv_sqrt(&sigma_hat);
    let whitened: Vec<DVector<f64>> = points.iter().map(|x| &w * x).collect();

    // single-Gaussian hypothesis: robust mean and covariance of everything
    if let Some(h) = single_gaussian_hypothesis(points, &whitened, &w, epsilon) {
        out.push(h);
    }

    // single-linkage split of a bounded subsample, then nearest-center
    // assignment of the full batch
    let sub_max = 1500.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(seed, 2));
    order.shuffle(&mut rng);
    let sub: Vec<usize> = order[..sub_max].to_vec();
    if let Some((ca, cb)) = single_linkage_split(&whitened, &sub) {
        let center = |idx: &[usize]| -> DVector<f64> {
            let mut c = DVector::zeros(d);
            for &i in idx {
                c += &whitened[i];
            }
            c / idx.len() as f64
        };
        let (ca_c, cb_c) = (center(&ca), center(&cb));
        let mut cluster_a = Vec::new();
        let mut cluster_b = Vec::new();
        for (i, x) in whitened.iter().enumerate() {
            if (x - &ca_c).norm_squared() <= (x - &cb_c).norm_squared() {
                cluster_a.push(i);
            } else {
                cluster_b.push(i);
            }
        }
        let min_size = (d + 1).max((epsilon * n as f64).ceil() as usize);
        if cluster_a.len() >= min_size && cluster_b.len() >= min_size {
            let ga = fit_cluster(points, &cluster_a, epsilon);
            let gb = fit_cluster(points, &cluster_b, epsilon);
            if let (Some(ga), Some(gb)) = (ga, gb) {
                if let Ok(model) = MixtureModel::equal_weight(ga, gb) {
                    out.push(Hypothesis {
                        model,
                        provenance: format!(
                            "fallback/split:{}+{}",
                            cluster_a.len(),
                            cluster_b.len()
                        ),
                    });
                }
            }
        }
    }
    out
}

fn empirical_covariance(points: &[DVector<f64>]) -> DMatrix<f64> {
    let d = points[0].len();
    let n = points.len() as f64;
    let mean: DVector<f64> = points.iter().sum::<DVector<f64>>() / n;
    let mut cov = DMatrix::zeros(d, d);
    for x in points {
        let c = x - &mean;
        cov += &c * c.transpose();
    }
    cov /= n;
    // keep it usable as a metric even for degenerate batches
    for i in 0..d {
        cov[(i, i)] += 1e-9;
    }
    cov
}

fn single_gaussian_hypothesis(
    points: &[DVector<f64>],
    whitened: &[DVector<f64>],
    w: &DMatrix<f64>,
    epsilon: f64,
) -> Option<Hypothesis> {
    // mean in whitened coordinates (covariance ≈ I there), then undo
    let relaxed = FilterConfig {
        mass_budget_factor: 12.0,
        ..FilterConfig::default()
    };
    let mean_w = match robust_mean_with(whitened, epsilon.max(1e-3), 2.0, &relaxed) {
        Ok((m, _)) => m,
        Err(e) => {
            log::info!("fallback: single-gaussian mean filter failed ({e}); using median");
            coordinate_median(whitened)
        }
    };
    let w_inv = w.clone().try_inverse()?;
    let mean = &w_inv * mean_w;
    let cov = robust_second_moment(points, &mean, epsilon);
    let g = GaussianParams::new(mean, cov).ok()?;
    let model = MixtureModel::equal_weight(g.clone(), g).ok()?;
    Some(Hypothesis {
        model,
        provenance: "fallback/single".into(),
    })
}

fn fit_cluster(
    points: &[DVector<f64>],
    idx: &[usize],
    epsilon: f64,
) -> Option<GaussianParams> {
    let cluster: Vec<DVector<f64>> = idx.iter().map(|&i| points[i].clone()).collect();
    let emp = empirical_covariance(&cluster);
    let scale = linalg::symmetrize_matrix(&emp)
        .symmetric_eigen()
        .eigenvalues
        .max()
        .max(1e-9)
        .sqrt();
    let relaxed = FilterConfig {
        mass_budget_factor: 12.0,
        ..FilterConfig::default()
    };
    let mean = match robust_mean_with(&cluster, epsilon.max(1e-3), 2.0 * scale, &relaxed) {
        Ok((m, _)) => m,
        Err(_) => coordinate_median(&cluster),
    };
    let cov = robust_second_moment(&cluster, &mean, epsilon);
    GaussianParams::new(mean, cov).ok()
}

/// Robust covariance around a fixed center via the matrix filter on the
/// outer products (x−m)(x−m)ᵀ; falls back to the empirical value.
fn robust_second_moment(
    points: &[DVector<f64>],
    center: &DVector<f64>,
    epsilon: f64,
) -> DMatrix<f64> {
    let z: Vec<DMatrix<f64>> = points
        .iter()
        .map(|x| {
            let c = x - center;
            &c * c.transpose()
        })
        .collect();
    let relaxed = FilterConfig {
        mass_budget_factor: 12.0,
        ..FilterConfig::default()
    };
    match robust_covariance_relaxed(&z, epsilon.max(1e-3), 2.0 * std::f64::consts::SQRT_2, &relaxed)
    {
        Ok(cov) => cov,
        Err(e) => {
            log::info!("fallback: covariance filter failed ({e}); using empirical value");
            let d = points[0].len();
            let mut cov = DMatrix::zeros(d, d);
            for zi in &z {
                cov += zi;
            }
            cov /= z.len() as f64;
            for i in 0..d {
                cov[(i, i)] += 1e-9;
            }
            cov
        }
    }
}

fn robust_covariance_relaxed(
    z: &[DMatrix<f64>],
    epsilon: f64,
    sigma: f64,
    cfg: &FilterConfig,
) -> Result<DMatrix<f64>> {
    crate::robust::robust_covariance_with(z, epsilon, sigma, cfg).map(|(m, _)| m)
}

fn coordinate_median(points: &[DVector<f64>]) -> DVector<f64> {
    let d = points[0].len();
    DVector::from_fn(d, |i, _| {
        let mut vals: Vec<f64> = points.iter().map(|p| p[i]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        vals[vals.len() / 2]
    })
}

/// Prim's MST over the subsample, cut at the largest edge; returns the two
/// sides as index lists into the full batch, or None when the subsample is
/// too small to split.
fn single_linkage_split(
    whitened: &[DVector<f64>],
    sub: &[usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = sub.len();
    if m < 4 {
        return None;
    }
    let mut in_tree = vec![false; m];
    let mut best_dist = vec![f64::INFINITY; m];
    let mut best_from = vec![0usize; m];
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(m - 1);
    in_tree[0] = true;
    for j in 1..m {
        best_dist[j] = (&whitened[sub[j]] - &whitened[sub[0]]).norm_squared();
    }
    for _ in 1..m {
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for j in 0..m {
            if !in_tree[j] && best_dist[j] < pick_d {
                pick_d = best_dist[j];
                pick = j;
            }
        }
        if pick == usize::MAX {
            return None;
        }
        in_tree[pick] = true;
        edges.push((best_from[pick], pick, pick_d));
        for j in 0..m {
            if !in_tree[j] {
                let dd = (&whitened[sub[j]] - &whitened[sub[pick]]).norm_squared();
                if dd < best_dist[j] {
                    best_dist[j] = dd;
                    best_from[j] = pick;
                }
            }
        }
    }
    let (cut_idx, _) = edges
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap_or(std::cmp::Ordering::Equal))?;
    // flood fill over the remaining edges
    let mut adj = vec![Vec::new(); m];
    for (k, &(a, b, _)) in edges.iter().enumerate() {
        if k != cut_idx {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut side = vec![false; m];
    let mut stack = vec![edges[cut_idx].0];
    side[edges[cut_idx].0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !side[u] {
                side[u] = true;
                stack.push(u);
            }
        }
    }
    let a: Vec<usize> = (0..m).filter(|&j| side[j]).map(|j| sub[j]).collect();
    let b: Vec<usize> = (0..m).filter(|&j| !side[j]).map(|j| sub[j]).collect();
    if a.is_empty() || b.is_empty() {
        None
    } else {
        Some((a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussmix::{sample, CanonicalMixtureParams};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn affine_map_inverse_roundtrip() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, -0.1, 1.5]);
        let b = DVector::from_vec(vec![0.7, -0.2]);
        let map = AffineMap::new(a, b).unwrap();
        let x = DVector::from_vec(vec![1.2, -3.4]);
        let back = map.apply_inverse(&map.apply(&x));
        assert!((back - &x).norm() < 1e-10);

        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(AffineMap::new(singular, DVector::zeros(2)).is_err());
    }

    #[test]
    fn pair_difference_covariance_on_clean_gaussian() {
        let model = MixtureModel::spherical(5);
        let pts = sample(&model, 20_000, 81).unwrap();
        let est =
            estimate_mixture_covariance(&pts, 0.0, 0.3, &NormalizeConfig::default(), 82).unwrap();
        let err = (est - DMatrix::<f64>::identity(5, 5)).norm();
        assert!(err < 0.15, "error {err}");
    }

    #[test]
    fn pair_difference_covariance_on_clean_mixture() {
        // E[Z] = cov(X) exactly for the canonical mixture
        let params = CanonicalMixtureParams::new(
            DVector::from_vec(vec![0.5, 0.0]),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let model = params.to_mixture().unwrap();
        let pts = sample(&model, 20_000, 83).unwrap();
        let est =
            estimate_mixture_covariance(&pts, 0.0, 0.3, &NormalizeConfig::default(), 84).unwrap();
        let err = (est - DMatrix::<f64>::identity(2, 2)).norm();
        assert!(err < 0.1, "error {err}");
    }

    #[test]
    fn pair_difference_covariance_under_cluster_adversary() {
        let model = MixtureModel::spherical(3);
        let pts = sample(&model, 20_000, 85).unwrap();
        let eps = 0.05;
        let delta = 0.1;
        let bad = crate::contamination::contaminate(
            &pts,
            eps,
            &crate::contamination::AdversaryStrategy::Cluster { distance: 50.0 },
            &model,
            86,
        )
        .unwrap();
        let est =
            estimate_mixture_covariance(&bad.points, eps, delta, &NormalizeConfig::default(), 87)
                .unwrap();
        let rel = (est - DMatrix::<f64>::identity(3, 3)).norm();
        let bound = 10.0 * (1.0f64 / delta).ln() * eps.sqrt();
        assert!(rel <= bound, "error {rel} over bound {bound}");
    }

    #[test]
    fn covariance_estimator_equivariance() {
        let model = MixtureModel::spherical(2);
        let pts = sample(&model, 20_000, 88).unwrap();
        let t = DMatrix::from_row_slice(2, 2, &[1.5, 0.4, 0.0, 0.8]);
        let mapped: Vec<DVector<f64>> = pts.iter().map(|x| &t * x).collect();
        let cfg = NormalizeConfig::default();
        let e1 = estimate_mixture_covariance(&pts, 0.0, 0.3, &cfg, 89).unwrap();
        let e2 = estimate_mixture_covariance(&mapped, 0.0, 0.3, &cfg, 89).unwrap();
        let pushed = &t * e1 * t.transpose();
        assert!((e2.clone() - &pushed).norm() / pushed.norm() < 0.1);
    }

    #[test]
    fn standardize_near_identity_on_canonical_input() {
        let params = CanonicalMixtureParams::new(
            DVector::from_vec(vec![0.4, 0.0, 0.0]),
            DMatrix::zeros(3, 3),
        )
        .unwrap();
        let model = params.to_mixture().unwrap();
        let pts = sample(&model, 20_000, 90).unwrap();
        let (map, transformed) = standardize(&pts, 0.0, 0.3, &NormalizeConfig::default(), 91).unwrap();
        assert!(
            (map.linear() - DMatrix::<f64>::identity(3, 3)).norm() <= 0.05,
            "A deviates: {}",
            (map.linear() - DMatrix::<f64>::identity(3, 3)).norm()
        );
        assert!(map.offset().norm() <= 0.05, "b = {}", map.offset().norm());

        // transformed batch is empirically standardized
        let n = transformed.len() as f64;
        let mean: DVector<f64> = transformed.iter().sum::<DVector<f64>>() / n;
        assert!(mean.norm() <= 0.05, "mean {}", mean.norm());
        let mut cov = DMatrix::<f64>::zeros(3, 3);
        for x in &transformed {
            let c = x - &mean;
            cov += &c * c.transpose();
        }
        cov /= n;
        assert!(
            (cov - DMatrix::<f64>::identity(3, 3)).norm() <= 0.1,
            "covariance off"
        );
    }

    #[test]
    fn standardize_undoes_known_affine_map() {
        let params = CanonicalMixtureParams::new(
            DVector::from_vec(vec![0.4, 0.0, 0.0]),
            DMatrix::zeros(3, 3),
        )
        .unwrap();
        let model = params.to_mixture().unwrap();
        let pts = sample(&model, 20_000, 92).unwrap();
        let m_lin = DMatrix::from_row_slice(3, 3, &[2.0, 0.2, 0.0, 0.0, 0.7, 0.1, 0.0, 0.0, 1.3]);
        let m_off = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let mapped: Vec<DVector<f64>> = pts.iter().map(|x| &m_lin * x + &m_off).collect();
        let (map, _) = standardize(&mapped, 0.0, 0.3, &NormalizeConfig::default(), 93).unwrap();
        // L ∘ M should be near an orthogonal map fixing the canonical form;
        // here covariances are axis-aligned so it should be near ±identity
        let comp = map.linear() * &m_lin;
        let dev = (comp.transpose() * &comp - DMatrix::<f64>::identity(3, 3)).norm();
        assert!(dev <= 0.1, "L∘M not near orthogonal: {dev}");
        let shifted = map.apply(&(&m_lin * DVector::<f64>::zeros(3) + &m_off));
        assert!(shifted.norm() <= 0.1, "center maps to {shifted}");
    }

    #[test]
    fn fallback_recovers_far_clusters() {
        let mut mu = DVector::zeros(3);
        mu[0] = 10.0;
        let g1 = GaussianParams::new(mu.clone(), DMatrix::identity(3, 3)).unwrap();
        let g2 = GaussianParams::new(-mu, DMatrix::identity(3, 3)).unwrap();
        let model = MixtureModel::equal_weight(g1, g2).unwrap();
        let pts = sample(&model, 4000, 94).unwrap();
        let hyps = separated_fallback(&pts, 0.0, &NormalizeConfig::default(), 95);
        assert!(!hyps.is_empty());
        let split = hyps
            .iter()
            .find(|h| h.provenance.starts_with("fallback/split"))
            .expect("split hypothesis for well-separated clusters");
        let mut means: Vec<f64> = split
            .model
            .components()
            .iter()
            .map(|g| g.mean()[0])
            .collect();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((means[0] + 10.0).abs() < 0.1, "mean {}", means[0]);
        assert!((means[1] - 10.0).abs() < 0.1, "mean {}", means[1]);
    }

    #[test]
    fn fallback_single_gaussian_always_present() {
        let model = MixtureModel::spherical(2);
        let pts = sample(&model, 2000, 96).unwrap();
        let hyps = separated_fallback(&pts, 0.05, &NormalizeConfig::default(), 97);
        assert!(hyps.iter().any(|h| h.provenance == "fallback/single"));
        // degenerate single Gaussian: the single hypothesis duplicates the
        // component, and it should be close to the truth
        let single = hyps
            .iter()
            .find(|h| h.provenance == "fallback/single")
            .unwrap();
        let [c1, c2] = single.model.components();
        assert_eq!(c1, c2);
        assert!(c1.mean().norm() < 0.1);
    }

    #[test]
    fn fallback_survives_adversarial_third_cluster() {
        let model = MixtureModel::spherical(2);
        let pts = sample(&model, 4000, 98).unwrap();
        let bad = crate::contamination::contaminate(
            &pts,
            0.05,
            &crate::contamination::AdversaryStrategy::Cluster { distance: 40.0 },
            &model,
            99,
        )
        .unwrap();
        let hyps = separated_fallback(&bad.points, 0.05, &NormalizeConfig::default(), 100);
        assert!(!hyps.is_empty() && hyps.len() <= 3);
    }
}
