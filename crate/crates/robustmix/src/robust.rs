//! Filter-based robust estimation for bounded-covariance data: the
//! iterative reweighting filter, the robust mean estimator built on it, and
//! the robust covariance learner for PSD-matrix-valued samples.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Weighted point multiset with total mass ≤ 1; the filter's working object.
///
/// Points are shared behind an `Arc` so reweighted copies are cheap.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    points: Arc<Vec<DVector<f64>>>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Arc<Vec<DVector<f64>>>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(
                "points and weights lengths differ".into(),
            ));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidMeasure("weights must be finite and >= 0".into()));
        }
        let mass: f64 = weights.iter().sum();
        if !(mass > 0.0 && mass <= 1.0 + 1e-12) {
            return Err(Error::InvalidMeasure(format!(
                "total mass {mass} outside (0, 1]"
            )));
        }
        Ok(DiscreteMeasure { points, weights })
    }

    /// Uniform measure (weight 1/N each) over a batch.
    pub fn uniform(points: Vec<DVector<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("empty point set".into()));
        }
        let n = points.len();
        DiscreteMeasure::new(Arc::new(points), vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Mean of the normalized measure q′ = q/|q|₁.
    pub fn normalized_mean(&self) -> Result<DVector<f64>> {
        let mass = self.mass();
        if mass <= 0.0 {
            return Err(Error::InvalidMeasure("zero mass".into()));
        }
        let d = self.points[0].len();
        let mut mean = DVector::zeros(d);
        for (x, &w) in self.points.iter().zip(&self.weights) {
            if w > 0.0 {
                mean.axpy(w, x, 1.0);
            }
        }
        Ok(mean / mass)
    }

    pub(crate) fn set_weight(&mut self, i: usize, w: f64) {
        self.weights[i] = w;
    }
}

/// Why a filter run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    EigenvalueThreshold,
    SupportExhausted,
    IterationCap,
}

/// Diagnostics from a filter run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterReport {
    pub iterations: usize,
    pub mass_removed: f64,
    /// Top eigenvalue of the final normalized covariance, in units of the
    /// caller's variance promise (i.e. divided by σ²).
    pub final_top_eigenvalue: f64,
    pub terminated_by: Termination,
}

/// Knobs for the filter loop.
#[derive(Debug, Clone)]
pub struct FilterConfig {
    /// Convergence threshold on the top eigenvalue of cov(q′) in promise
    /// units. 3 is the analysis constant.
    pub threshold_b: f64,
    /// Hard cap on filter steps; `None` means support size + 32.
    pub max_iterations: Option<usize>,
    /// Allowed removed mass as a multiple of ε before the run is declared
    /// divergent.
    pub mass_budget_factor: f64,
    pub power_iterations: usize,
    pub power_rel_tol: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            threshold_b: 3.0,
            max_iterations: None,
            mass_budget_factor: 6.0,
            power_iterations: 200,
            power_rel_tol: 1e-8,
        }
    }
}

/// Outcome of one filter step.
#[derive(Debug, Clone)]
pub enum FilterOutcome {
    /// cov(q′) passed the threshold; carries E[q′].
    Converged(DVector<f64>),
    /// Mass was removed; the new measure has strictly smaller support.
    Filtered(DiscreteMeasure),
}

/// Top eigenpair of cov(q′) by power iteration on the implicit operator
/// v ↦ Σ wᵢ′ (xᵢ−μ)((xᵢ−μ)·v). Deterministic start; the returned vector has
/// a non-negative first coordinate.
fn top_covariance_eigenpair(
    q: &DiscreteMeasure,
    mean: &DVector<f64>,
    cfg: &FilterConfig,
) -> (f64, DVector<f64>) {
    let d = mean.len();
    let mass = q.mass();
    let mut v = linalg::deterministic_unit_vector(d);
    let mut lambda = 0.0f64;
    for _ in 0..cfg.power_iterations {
        let mut y = DVector::zeros(d);
        let shift = mean.dot(&v);
        let mut quad = 0.0;
        // Σ w'_i c_i vanishes exactly at the true mean; carried along to keep
        // the operator exact under roundoff
        let mut total_c = 0.0;
        for (x, &w) in q.points().iter().zip(q.weights()) {
            if w <= 0.0 {
                continue;
            }
            let c = x.dot(&v) - shift;
            let wc = w * c / mass;
            y.axpy(wc, x, 1.0);
            quad += wc * c;
            total_c += wc;
        }
        y.axpy(-total_c, mean, 1.0);
        let norm = y.norm();
        if norm == 0.0 {
            return (0.0, v);
        }
        let next = quad; // vᵀ cov v
        v = y / norm;
        if (next - lambda).abs() <= cfg.power_rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    if v[0] < 0.0 {
        v = -v;
    }
    (lambda, v)
}

/// One step of the filter at threshold B (in the caller's promise units,
/// i.e. the measure is assumed scaled so the clean covariance is ≤ I).
///
/// If the top eigenvalue of cov(q′) is at most B, returns `Converged` with
/// E[q′]. Otherwise finds a direction v capturing the top variance, scores
/// points by f(x) = (v·(x − E[q′]))² and returns q₀(x) = q(x)(1 − f(x)/max f);
/// the maximizer's weight becomes exactly zero, so the support shrinks.
pub fn filter_step(q: &DiscreteMeasure, threshold_b: f64) -> Result<FilterOutcome> {
    filter_step_with(q, threshold_b, &FilterConfig::default())
}

pub fn filter_step_with(
    q: &DiscreteMeasure,
    threshold_b: f64,
    cfg: &FilterConfig,
) -> Result<FilterOutcome> {
    if q.mass() <= 0.0 {
        return Err(Error::InvalidMeasure("zero mass".into()));
    }
    let mean = q.normalized_mean()?;
    let (lambda, v) = top_covariance_eigenpair(q, &mean, cfg);
    if lambda <= threshold_b {
        return Ok(FilterOutcome::Converged(mean));
    }
    let shift = mean.dot(&v);
    let mut f_max = 0.0f64;
    let mut arg_max = 0usize;
    let scores: Vec<f64> = q
        .points()
        .iter()
        .zip(q.weights())
        .enumerate()
        .map(|(i, (x, &w))| {
            if w <= 0.0 {
                return 0.0;
            }
            let c = x.dot(&v) - shift;
            let f = c * c;
            if f > f_max {
                f_max = f;
                arg_max = i;
            }
            f
        })
        .collect();
    if f_max <= 0.0 {
        // no spread along v; cannot happen with lambda > B > 0, but guard
        return Ok(FilterOutcome::Converged(mean));
    }
    let mut out = q.clone();
    for (i, &f) in scores.iter().enumerate() {
        if out.weights()[i] > 0.0 {
            // (f_max − f)/f_max hits exactly zero at the maximizer
            let scale = (f_max - f) / f_max;
            out.set_weight(i, out.weights()[i] * scale);
        }
    }
    debug_assert_eq!(out.weights()[arg_max], 0.0);
    debug_assert!(out.support_size() < q.support_size());
    Ok(FilterOutcome::Filtered(out))
}

/// Robust mean of `points` under the promise cov(X) ≤ σ²·I.
///
/// Runs the filter from the uniform measure until the covariance test
/// passes. On ε-contaminated data with the promise satisfied the error is
/// O(σ√ε). Removing more than `mass_budget_factor`·ε mass aborts with
/// [`Error::FilterDivergence`], which signals a violated promise.
pub fn robust_mean(
    points: &[DVector<f64>],
    epsilon: f64,
    sigma: f64,
) -> Result<(DVector<f64>, FilterReport)> {
    robust_mean_with(points, epsilon, sigma, &FilterConfig::default())
}

pub fn robust_mean_with(
    points: &[DVector<f64>],
    epsilon: f64,
    sigma: f64,
    cfg: &FilterConfig,
) -> Result<(DVector<f64>, FilterReport)> {
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let measure = DiscreteMeasure::uniform(points.to_vec())?;
    let (mean, report) = run_filter(measure, epsilon, sigma, cfg)?;
    Ok((mean, report))
}

/// Filter loop shared by the mean and covariance estimators. The threshold
/// is B·σ² in raw units, equivalent to scaling the data by 1/σ.
fn run_filter(
    mut q: DiscreteMeasure,
    epsilon: f64,
    sigma: f64,
    cfg: &FilterConfig,
) -> Result<(DVector<f64>, FilterReport)> {
    let threshold = cfg.threshold_b * sigma * sigma;
    let cap = cfg.max_iterations.unwrap_or(q.len() + 32);
    let budget = cfg.mass_budget_factor * epsilon;
    let mut iterations = 0usize;
    loop {
        if q.support_size() == 0 {
            return Err(Error::InvalidMeasure("support exhausted".into()));
        }
        if q.support_size() == 1 {
            let report = FilterReport {
                iterations,
                mass_removed: 1.0 - q.mass(),
                final_top_eigenvalue: 0.0,
                terminated_by: Termination::SupportExhausted,
            };
            return Ok((q.normalized_mean()?, report));
        }
        match filter_step_with(&q, threshold, cfg)? {
            FilterOutcome::Converged(mean) => {
                let (lambda, _) = top_covariance_eigenpair(&q, &mean, cfg);
                let report = FilterReport {
                    iterations,
                    mass_removed: 1.0 - q.mass(),
                    final_top_eigenvalue: lambda / (sigma * sigma),
                    terminated_by: Termination::EigenvalueThreshold,
                };
                return Ok((mean, report));
            }
            FilterOutcome::Filtered(next) => {
                iterations += 1;
                let removed = 1.0 - next.mass();
                if removed > budget {
                    return Err(Error::FilterDivergence {
                        removed,
                        budget,
                    });
                }
                q = next;
            }
        }
        if iterations >= cap {
            let mean = q.normalized_mean()?;
            let (lambda, _) = top_covariance_eigenpair(&q, &mean, cfg);
            let report = FilterReport {
                iterations,
                mass_removed: 1.0 - q.mass(),
                final_top_eigenvalue: lambda / (sigma * sigma),
                terminated_by: Termination::IterationCap,
            };
            return Ok((mean, report));
        }
    }
}

/// Entrywise median of symmetric matrix samples, eigenvalue-floored so it
/// can serve as a whitening basis. Point masses carrying less than half the
/// total mass cannot move it far, unlike the mean.
fn entrywise_median_psd(samples: &[DMatrix<f64>]) -> DMatrix<f64> {
    let d = samples[0].nrows();
    let mut med = DMatrix::zeros(d, d);
    let mut buf: Vec<f64> = Vec::with_capacity(samples.len());
    for i in 0..d {
        for j in i..d {
            buf.clear();
            buf.extend(samples.iter().map(|z| z[(i, j)]));
            buf.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let m = buf[buf.len() / 2];
            med[(i, j)] = m;
            med[(j, i)] = m;
        }
    }
    let floor = 1e-9 * med.trace().abs().max(1.0);
    let eig = med.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(floor)).collect();
    &eig.eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(vals)) * eig.eigenvectors.transpose()
}

/// Diagnostics from a robust covariance run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub outer_iterations: usize,
    pub filter_mass_removed: f64,
    pub truncated_mass: f64,
    pub final_top_eigenvalue: f64,
    pub terminated_by: Termination,
}

/// Robust covariance learner for symmetric PSD matrix samples Z with
/// E[Z] = Σ and var(tr(AZ)) = O(σ²‖Σ^{1/2}AΣ^{1/2}‖_F²).
///
/// Loop: truncate samples whose whitened norm exceeds D²σ²/ε (first pass
/// whitened by the entrywise median, later passes by the current estimate),
/// whiten by the estimate's inverse square root, flatten to ℝ^{D²}, scale to
/// promise units and run one filter step; repeat on `Filtered`, return E[q′]
/// on `Converged`. Guarantee (tested empirically):
/// ‖Σ^{−1/2}(Σ−Σ̂)Σ^{−1/2}‖_F = O(σ√ε).
pub fn robust_covariance(
    matrix_samples: &[DMatrix<f64>],
    epsilon: f64,
    sigma: f64,
) -> Result<(DMatrix<f64>, CovarianceReport)> {
    robust_covariance_with(matrix_samples, epsilon, sigma, &FilterConfig::default())
}

pub fn robust_covariance_with(
    matrix_samples: &[DMatrix<f64>],
    epsilon: f64,
    sigma: f64,
    cfg: &FilterConfig,
) -> Result<(DMatrix<f64>, CovarianceReport)> {
    if matrix_samples.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let d = matrix_samples[0].nrows();
    for z in matrix_samples {
        if z.nrows() != d || z.ncols() != d {
            return Err(Error::DimensionMismatch(
                "matrix samples must share a square shape".into(),
            ));
        }
        if !linalg::is_symmetric(z, 1e-8) {
            return Err(Error::InvalidArgument(
                "matrix samples must be symmetric".into(),
            ));
        }
    }
    let n = matrix_samples.len();
    let mut weights = vec![1.0 / n as f64; n];
    let radius = if epsilon > 0.0 {
        (d * d) as f64 * sigma * sigma / epsilon
    } else {
        f64::INFINITY
    };
    // The first truncation pass cannot whiten by the weighted mean: heavy
    // corruption inflates it, which shrinks exactly the corrupted points in
    // whitened norm and hides them from both the radius test and the filter.
    // The entrywise median is immune to point masses below half the mass and
    // serves as the whitening basis for that first pass only.
    let median_basis = entrywise_median_psd(matrix_samples);
    // whitened data lives in promise units after dividing by 2σ: the clean
    // whitened covariance is O(σ²) when the estimate dominates Σ/2
    let scale = 1.0 / (2.0 * sigma);
    let budget = cfg.mass_budget_factor * epsilon;
    let cap = cfg.max_iterations.unwrap_or(n + 32);
    let mut truncated_mass = 0.0f64;
    let mut filter_removed = 0.0f64;
    let mut outer_iterations = 0usize;
    let mut previous_est: Option<DMatrix<f64>> = None;

    loop {
        // re-truncation: the first pass whitens by the median basis, later
        // passes by the estimate from the previous iteration
        if radius.is_finite() {
            let tw = linalg::psd_inv_sqrt(previous_est.as_ref().unwrap_or(&median_basis));
            for (i, z) in matrix_samples.iter().enumerate() {
                if weights[i] > 0.0 && (&tw * z * &tw).norm() > radius {
                    truncated_mass += weights[i];
                    weights[i] = 0.0;
                }
            }
            if truncated_mass + filter_removed > budget + 1e-12 {
                return Err(Error::FilterDivergence {
                    removed: truncated_mass + filter_removed,
                    budget,
                });
            }
        }

        let mass: f64 = weights.iter().sum();
        if mass <= 0.0 {
            return Err(Error::InvalidMeasure("support exhausted".into()));
        }
        let mut est = DMatrix::<f64>::zeros(d, d);
        for (z, &w) in matrix_samples.iter().zip(&weights) {
            if w > 0.0 {
                est += z * w;
            }
        }
        est /= mass;
        est = linalg::symmetrize_matrix(&est);
        let min_eig = linalg::min_eigenvalue(&est);
        if min_eig < 1e-10 * est.trace().max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateCovariance(format!(
                "estimate minimum eigenvalue {min_eig:.3e} below 1e-10 x trace"
            )));
        }

        let w_half = linalg::psd_inv_sqrt(&est);
        let mut flats = Vec::with_capacity(n);
        for z in matrix_samples {
            let conj = &w_half * z * &w_half;
            let mut flat = DVector::zeros(d * d);
            for i in 0..d {
                for j in 0..d {
                    flat[i * d + j] = conj[(i, j)];
                }
            }
            flats.push(flat);
        }
        previous_est = Some(est);
        let scaled: Vec<DVector<f64>> = flats.iter().map(|f| f * scale).collect();
        let q = DiscreteMeasure::new(Arc::new(scaled), weights.clone())?;

        match filter_step_with(&q, cfg.threshold_b, cfg)? {
            FilterOutcome::Converged(_) => {
                let mut out = DMatrix::<f64>::zeros(d, d);
                for (z, &w) in matrix_samples.iter().zip(&weights) {
                    if w > 0.0 {
                        out += z * w;
                    }
                }
                out /= mass;
                out = linalg::symmetrize_matrix(&out);
                let min_eig = linalg::min_eigenvalue(&out);
                if min_eig < 1e-10 * out.trace().max(f64::MIN_POSITIVE) {
                    return Err(Error::DegenerateCovariance(format!(
                        "final estimate minimum eigenvalue {min_eig:.3e} below 1e-10 x trace"
                    )));
                }
                let mean = q.normalized_mean()?;
                let (lambda, _) = top_covariance_eigenpair(&q, &mean, cfg);
                let report = CovarianceReport {
                    outer_iterations,
                    filter_mass_removed: filter_removed,
                    truncated_mass,
                    final_top_eigenvalue: lambda,
                    terminated_by: Termination::EigenvalueThreshold,
                };
                return Ok((out, report));
            }
            FilterOutcome::Filtered(q0) => {
                outer_iterations += 1;
                let new_mass = q0.mass();
                filter_removed += mass - new_mass;
                if filter_removed + truncated_mass > budget + 1e-12 {
                    return Err(Error::FilterDivergence {
                        removed: filter_removed + truncated_mass,
                        budget,
                    });
                }
                weights.copy_from_slice(q0.weights());
            }
        }
        if outer_iterations >= cap {
            return Err(Error::FilterDivergence {
                removed: filter_removed + truncated_mass,
                budget,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contamination::{contaminate, AdversaryStrategy};
    use crate::gaussmix::{sample, GaussianParams, MixtureModel};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn filter_converges_on_bounded_measure() {
        let q = DiscreteMeasure::uniform(vec![vec2(1.0, 0.0), vec2(-1.0, 0.0)]).unwrap();
        match filter_step(&q, 3.0).unwrap() {
            FilterOutcome::Converged(mean) => assert!(mean.norm() < 1e-12),
            FilterOutcome::Filtered(_) => panic!("cov diag(1,0) <= 3I must converge"),
        }
    }

    #[test]
    fn filter_zeroes_far_outlier_first() {
        let model = MixtureModel::spherical(2);
        let mut pts = sample(&model, 1000, 21).unwrap();
        pts.push(vec2(1000.0, 0.0));
        let q = DiscreteMeasure::uniform(pts).unwrap();
        match filter_step(&q, 3.0).unwrap() {
            FilterOutcome::Converged(_) => panic!("outlier variance must trigger filtering"),
            FilterOutcome::Filtered(q0) => {
                assert_eq!(q0.weights()[1000], 0.0, "outlier keeps weight");
                assert!(q0.support_size() < q.support_size());
            }
        }
    }

    #[test]
    fn filter_support_strictly_shrinks_every_step() {
        let model = MixtureModel::spherical(2);
        let mut pts = sample(&model, 300, 22).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let r: f64 = rng.sample::<f64, _>(StandardNormal);
            pts.push(vec2(20.0 + r, r));
        }
        let mut q = DiscreteMeasure::uniform(pts).unwrap();
        let mut prev = q.support_size();
        let mut steps = 0;
        loop {
            match filter_step(&q, 3.0).unwrap() {
                FilterOutcome::Converged(_) => break,
                FilterOutcome::Filtered(next) => {
                    assert!(next.support_size() < prev, "support must strictly shrink");
                    prev = next.support_size();
                    q = next;
                    steps += 1;
                    assert!(steps <= 330, "filter must terminate in <= N steps");
                }
            }
        }
    }

    #[test]
    fn filter_rejects_zero_mass() {
        let pts = Arc::new(vec![vec2(0.0, 0.0)]);
        assert!(DiscreteMeasure::new(pts, vec![0.0]).is_err());
    }

    #[test]
    fn robust_mean_trivial_two_points() {
        let pts = vec![vec2(1.0, 1.0), vec2(-1.0, -1.0)];
        let (mean, report) = robust_mean(&pts, 0.0, 2.0).unwrap();
        assert!(mean.norm() < 1e-12);
        assert_eq!(report.terminated_by, Termination::EigenvalueThreshold);
        assert_eq!(report.mass_removed, 0.0);
    }

    #[test]
    fn robust_mean_survives_mean_shift() {
        let d = 10;
        let mu_star = DVector::from_fn(d, |i, _| 0.3 * (i as f64 + 1.0) / d as f64);
        let g = GaussianParams::new(mu_star.clone(), DMatrix::identity(d, d)).unwrap();
        let model = MixtureModel::equal_weight(g.clone(), g).unwrap();
        for seed in 0..3u64 {
            let clean = sample(&model, 10_000, 100 + seed).unwrap();
            let eps = 0.1;
            let bad = contaminate(
                &clean,
                eps,
                &AdversaryStrategy::MeanShift { magnitude: 100.0 },
                &model,
                200 + seed,
            )
            .unwrap();
            let (mean, _) = robust_mean(&bad.points, eps, 1.0).unwrap();
            let err = (mean - &mu_star).norm();
            assert!(err <= 10.0 * eps.sqrt(), "error {err} over bound");
            assert!(err <= 1.0);
        }
    }

    #[test]
    fn robust_mean_survives_cluster() {
        let d = 10;
        let model = MixtureModel::spherical(d);
        let clean = sample(&model, 10_000, 31).unwrap();
        let bad = contaminate(
            &clean,
            0.1,
            &AdversaryStrategy::Cluster { distance: 50.0 },
            &model,
            32,
        )
        .unwrap();
        let (mean, _) = robust_mean(&bad.points, 0.1, 1.0).unwrap();
        assert!(mean.norm() <= 1.0, "error {}", mean.norm());
    }

    #[test]
    fn robust_mean_rotation_equivariant() {
        let model = MixtureModel::spherical(2);
        let clean = sample(&model, 2000, 41).unwrap();
        let bad = contaminate(
            &clean,
            0.1,
            &AdversaryStrategy::MeanShift { magnitude: 30.0 },
            &model,
            42,
        )
        .unwrap();
        let theta: f64 = 0.7;
        let rot = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let rotated: Vec<DVector<f64>> = bad.points.iter().map(|p| &rot * p).collect();
        let (m1, _) = robust_mean(&bad.points, 0.1, 1.0).unwrap();
        let (m2, _) = robust_mean(&rotated, 0.1, 1.0).unwrap();
        assert!((&rot * m1 - m2).norm() < 1e-6);
    }

    #[test]
    fn robust_mean_divergence_on_violated_promise() {
        // variance far above the promised bound forces endless filtering
        let model = MixtureModel::spherical(1);
        let pts: Vec<DVector<f64>> = sample(&model, 2000, 51)
            .unwrap()
            .into_iter()
            .map(|p| p * 100.0)
            .collect();
        let err = robust_mean(&pts, 0.01, 1.0).unwrap_err();
        assert!(matches!(err, Error::FilterDivergence { .. }), "got {err:?}");
    }

    #[test]
    fn robust_covariance_identity_samples() {
        let samples = vec![DMatrix::<f64>::identity(3, 3); 3];
        let (est, report) = robust_covariance(&samples, 0.0, 2.0).unwrap();
        assert!((est - DMatrix::<f64>::identity(3, 3)).norm() < 1e-12);
        assert_eq!(report.outer_iterations, 0);
    }

    #[test]
    fn robust_covariance_recovers_wishart_mean() {
        // Z = GGᵀ for G ~ N(0, Σ*): E[Z] = Σ*, var(tr(AZ)) = 2‖Σ^{1/2}AΣ^{1/2}‖² ⇒ σ = √2
        let d = 3;
        let sigma_star = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])) / 2.0;
        let sqrt = DMatrix::from_diagonal(&sigma_star.diagonal().map(|x: f64| x.sqrt()));
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let n = 20_000;
        let samples: Vec<DMatrix<f64>> = (0..n)
            .map(|_| {
                let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let g = &sqrt * g;
                &g * g.transpose()
            })
            .collect();
        let (est, _) = robust_covariance(&samples, 0.0, std::f64::consts::SQRT_2).unwrap();
        let w = linalg::psd_inv_sqrt(&sigma_star);
        let rel = (&w * (&est - &sigma_star) * &w).norm();
        assert!(rel < 0.1, "relative error {rel}");
        assert!(linalg::min_eigenvalue(&est) > 0.0);
    }

    #[test]
    fn robust_covariance_rejects_asymmetric() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(robust_covariance(&[bad], 0.0, 1.0).is_err());
    }

    #[test]
    fn robust_covariance_survives_cov_inflate() {
        let d = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let n = 10_000;
        let eps = 0.05;
        let sigma = std::f64::consts::SQRT_2;
        let mut samples: Vec<DMatrix<f64>> = (0..n)
            .map(|_| {
                let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                &g * g.transpose()
            })
            .collect();
        let bad_count = (eps * n as f64) as usize;
        for i in 0..bad_count {
            let g = DVector::from_fn(d, |_, _| 10.0 * rng.sample::<f64, _>(StandardNormal));
            samples[i * (n / bad_count)] = &g * g.transpose();
        }
        let (est, _) = robust_covariance(&samples, eps, sigma).unwrap();
        let rel = (&est - DMatrix::<f64>::identity(d, d)).norm();
        let bound = 10.0 * sigma * eps.sqrt();
        assert!(rel <= bound, "relative error {rel} over bound {bound}");
    }
}
