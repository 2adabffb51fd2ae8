//! Strong-contamination simulator: an adversary inspects the clean batch
//! (and the true model) and replaces up to ⌊εN⌋ points before the estimator
//! sees anything. The ground-truth corruption mask is carried alongside the
//! points for evaluation only and is stripped before estimators run.

use std::str::FromStr;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussmix::{MixtureModel, MixtureSampler};

/// A sample batch plus the ground-truth corruption mask.
#[derive(Debug, Clone)]
pub struct ContaminatedSample {
    pub points: Vec<DVector<f64>>,
    /// True where the adversary replaced the point. Hidden from estimators.
    pub corrupted_mask: Vec<bool>,
    /// Contamination budget this batch was produced under.
    pub epsilon: f64,
}

impl ContaminatedSample {
    pub fn new(points: Vec<DVector<f64>>, corrupted_mask: Vec<bool>, epsilon: f64) -> Result<Self> {
        if points.len() != corrupted_mask.len() {
            return Err(Error::InvalidArgument(
                "points and mask lengths differ".into(),
            ));
        }
        // small slack so that epsilon values reconstructed as count/N do not
        // round the budget below the count they came from
        let budget = (epsilon * points.len() as f64 + 1e-9).floor() as usize;
        let used = corrupted_mask.iter().filter(|&&b| b).count();
        if used > budget {
            return Err(Error::InvalidArgument(format!(
                "mask has {used} corrupted points, budget is {budget}"
            )));
        }
        Ok(ContaminatedSample {
            points,
            corrupted_mask,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn corrupted_count(&self) -> usize {
        self.corrupted_mask.iter().filter(|&&b| b).count()
    }

    pub fn corrupted_fraction(&self) -> f64 {
        if self.points.is_empty() {
            0.0
        } else {
            self.corrupted_count() as f64 / self.points.len() as f64
        }
    }
}

/// Named adversary strategies instantiating the arbitrary-replacement
/// oracle. Each receives the whole clean batch and the true model before
/// choosing its replacements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AdversaryStrategy {
    /// No replacements at all.
    Identity,
    /// All replacements placed at magnitude·e₁.
    MeanShift { magnitude: f64 },
    /// Replacements drawn from N(0, λI).
    CovInflate { lambda: f64 },
    /// All replacements at the single point distance·e₁.
    Cluster { distance: f64 },
    /// Removes the ⌊εN⌋ points with the largest first coordinate and
    /// replaces them with fresh draws conditioned below the batch median.
    SubtractiveTail,
    /// Replacements at c·e₁ with c sized to sit near the moment filter's
    /// clipping radius, maximizing h₄-mean bias per unit budget while
    /// staying hard to remove in one step.
    MomentPoison,
}

impl AdversaryStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            AdversaryStrategy::Identity => "identity",
            AdversaryStrategy::MeanShift { .. } => "mean_shift",
            AdversaryStrategy::CovInflate { .. } => "cov_inflate",
            AdversaryStrategy::Cluster { .. } => "cluster",
            AdversaryStrategy::SubtractiveTail => "subtractive_tail",
            AdversaryStrategy::MomentPoison => "moment_poison",
        }
    }

    /// Strategy spec string, e.g. `mean_shift:100`.
    pub fn spec_string(&self) -> String {
        match self {
            AdversaryStrategy::Identity => "identity".into(),
            AdversaryStrategy::MeanShift { magnitude } => format!("mean_shift:{magnitude}"),
            AdversaryStrategy::CovInflate { lambda } => format!("cov_inflate:{lambda}"),
            AdversaryStrategy::Cluster { distance } => format!("cluster:{distance}"),
            AdversaryStrategy::SubtractiveTail => "subtractive_tail".into(),
            AdversaryStrategy::MomentPoison => "moment_poison".into(),
        }
    }
}

impl FromStr for AdversaryStrategy {
    type Err = Error;

    /// Parses `name` or `name:param`. Unknown names are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let num = |default: f64| -> Result<f64> {
            match param {
                None => Ok(default),
                Some(p) => p
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad strategy parameter: {p}"))),
            }
        };
        match name {
            "identity" => Ok(AdversaryStrategy::Identity),
            "mean_shift" => Ok(AdversaryStrategy::MeanShift { magnitude: num(100.0)? }),
            "cov_inflate" => Ok(AdversaryStrategy::CovInflate { lambda: num(100.0)? }),
            "cluster" => Ok(AdversaryStrategy::Cluster { distance: num(50.0)? }),
            "subtractive_tail" => Ok(AdversaryStrategy::SubtractiveTail),
            "moment_poison" => Ok(AdversaryStrategy::MomentPoison),
            other => Err(Error::InvalidArgument(format!(
                "unknown adversary strategy: {other}"
            ))),
        }
    }
}

/// Replace up to ⌊εN⌋ clean points according to the strategy, then return
/// the batch in a uniformly random order so estimators cannot exploit
/// position. Deterministic for fixed inputs and seed.
pub fn contaminate(
    clean: &[DVector<f64>],
    epsilon: f64,
    strategy: &AdversaryStrategy,
    truth: &MixtureModel,
    seed: u64,
) -> Result<ContaminatedSample> {
    if clean.is_empty() {
        return Err(Error::InvalidArgument("empty clean batch".into()));
    }
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in [0, 0.5), got {epsilon}"
        )));
    }
    let n = clean.len();
    let d = clean[0].len();
    let budget = (epsilon * n as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut points: Vec<DVector<f64>> = clean.to_vec();
    let mut mask = vec![false; n];

    if budget > 0 {
        match strategy {
            AdversaryStrategy::Identity => {}
            AdversaryStrategy::MeanShift { magnitude } => {
                let target = scaled_e1(d, *magnitude);
                for i in random_subset(n, budget, &mut rng) {
                    points[i] = target.clone();
                    mask[i] = true;
                }
            }
            AdversaryStrategy::CovInflate { lambda } => {
                let s = lambda.sqrt();
                for i in random_subset(n, budget, &mut rng) {
                    points[i] =
                        DVector::from_fn(d, |_, _| s * rng.sample::<f64, _>(StandardNormal));
                    mask[i] = true;
                }
            }
            AdversaryStrategy::Cluster { distance } => {
                let target = truth.mean() + scaled_e1(d, *distance);
                for i in random_subset(n, budget, &mut rng) {
                    points[i] = target.clone();
                    mask[i] = true;
                }
            }
            AdversaryStrategy::SubtractiveTail => {
                // indices of the `budget` largest first coordinates
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    clean[b][0]
                        .partial_cmp(&clean[a][0])
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                let mut firsts: Vec<f64> = clean.iter().map(|p| p[0]).collect();
                firsts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                let median = firsts[n / 2];
                let sampler = MixtureSampler::new(truth);
                for &i in order.iter().take(budget) {
                    let mut fresh = sampler.draw(&mut rng);
                    for _ in 0..100 {
                        if fresh[0] <= median {
                            break;
                        }
                        fresh = sampler.draw(&mut rng);
                    }
                    if fresh[0] > median {
                        fresh[0] = median;
                    }
                    points[i] = fresh;
                    mask[i] = true;
                }
            }
            AdversaryStrategy::MomentPoison => {
                // c ≈ (4d²/ε)^{1/4}: large enough to bias the empirical h₄
                // mean strongly, small enough to sit near the filter's
                // truncation radius at the default scale constants (chosen
                // empirically against the moment-estimation stress tests).
                let c = (4.0 * (d * d) as f64 / epsilon.max(1e-6)).powf(0.25);
                let target = scaled_e1(d, c);
                for i in random_subset(n, budget, &mut rng) {
                    points[i] = target.clone();
                    mask[i] = true;
                }
            }
        }
    }

    // uniformly random output order
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let points = order.iter().map(|&i| points[i].clone()).collect();
    let corrupted_mask = order.iter().map(|&i| mask[i]).collect();
    ContaminatedSample::new(points, corrupted_mask, epsilon)
}

fn scaled_e1(d: usize, scale: f64) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[0] = scale;
    v
}

fn random_subset<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(k);
    idx
}

/// Randomly partition a batch into k disjoint parts of near-equal size.
///
/// Each part records its actual corrupted fraction as its epsilon; with
/// part sizes large relative to 1/ε the per-part corruption stays below 2ε
/// with high probability (a hypergeometric tail), which tests check
/// empirically rather than this function enforcing it.
pub fn split_batches(
    sample: &ContaminatedSample,
    k: usize,
    seed: u64,
) -> Result<Vec<ContaminatedSample>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let n = sample.len();
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} points into {k} parts"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let base = n / k;
    let extra = n % k;
    let mut parts = Vec::with_capacity(k);
    let mut cursor = 0usize;
    for part_idx in 0..k {
        let size = base + usize::from(part_idx < extra);
        let slice = &order[cursor..cursor + size];
        cursor += size;
        let points: Vec<DVector<f64>> = slice.iter().map(|&i| sample.points[i].clone()).collect();
        let mask: Vec<bool> = slice.iter().map(|&i| sample.corrupted_mask[i]).collect();
        let frac = if size == 0 {
            0.0
        } else {
            mask.iter().filter(|&&b| b).count() as f64 / size as f64
        };
        parts.push(ContaminatedSample::new(points, mask, frac)?);
    }
    Ok(parts)
}

/// Serialized batch format:
/// `{"d": .., "epsilon": .., "strategy": .., "points": [[..]..], "mask": [..]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct BatchJson {
    #[serde(default = "crate::gaussmix::default_format_version")]
    pub format_version: u32,
    pub d: usize,
    pub epsilon: f64,
    pub strategy: String,
    pub points: Vec<Vec<f64>>,
    pub mask: Vec<bool>,
}

impl BatchJson {
    pub fn from_sample(sample: &ContaminatedSample, strategy: &AdversaryStrategy) -> Self {
        let d = sample.points.first().map_or(0, |p| p.len());
        BatchJson {
            format_version: 1,
            d,
            epsilon: sample.epsilon,
            strategy: strategy.spec_string(),
            points: sample
                .points
                .iter()
                .map(|p| p.iter().copied().collect())
                .collect(),
            mask: sample.corrupted_mask.clone(),
        }
    }

    pub fn to_sample(&self) -> Result<ContaminatedSample> {
        if self.points.iter().any(|p| p.len() != self.d) {
            return Err(Error::InvalidArgument(
                "batch point dimensions disagree with d".into(),
            ));
        }
        let points = self
            .points
            .iter()
            .map(|p| DVector::from_vec(p.clone()))
            .collect();
        ContaminatedSample::new(points, self.mask.clone(), self.epsilon)
    }

    /// Points only, mask stripped — what estimators are allowed to see.
    pub fn estimator_points(&self) -> Result<Vec<DVector<f64>>> {
        if self.points.iter().any(|p| p.len() != self.d) {
            return Err(Error::InvalidArgument(
                "batch point dimensions disagree with d".into(),
            ));
        }
        Ok(self
            .points
            .iter()
            .map(|p| DVector::from_vec(p.clone()))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussmix::sample;

    fn toy_model(d: usize) -> MixtureModel {
        MixtureModel::spherical(d)
    }

    #[test]
    fn epsilon_zero_is_permutation() {
        let model = toy_model(2);
        let clean = sample(&model, 100, 1).unwrap();
        let out = contaminate(&clean, 0.0, &AdversaryStrategy::MeanShift { magnitude: 100.0 }, &model, 2).unwrap();
        assert!(out.corrupted_mask.iter().all(|&b| !b));
        // same multiset of points
        let mut a: Vec<Vec<u64>> = clean
            .iter()
            .map(|p| p.iter().map(|x| x.to_bits()).collect())
            .collect();
        let mut b: Vec<Vec<u64>> = out
            .points
            .iter()
            .map(|p| p.iter().map(|x| x.to_bits()).collect())
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_ne!(
            clean.iter().map(|p| p[0].to_bits()).collect::<Vec<_>>(),
            out.points.iter().map(|p| p[0].to_bits()).collect::<Vec<_>>(),
            "output should be shuffled"
        );
    }

    #[test]
    fn mean_shift_moves_empirical_mean() {
        let model = toy_model(2);
        let n = 10_000;
        let eps = 0.1;
        let clean = sample(&model, n, 3).unwrap();
        let out = contaminate(
            &clean,
            eps,
            &AdversaryStrategy::MeanShift { magnitude: 100.0 },
            &model,
            4,
        )
        .unwrap();
        assert_eq!(out.corrupted_count(), (eps * n as f64).floor() as usize);
        let mean = out.points.iter().sum::<DVector<f64>>() / n as f64;
        assert!((mean[0] - 100.0 * eps).abs() < 1.0, "mean[0] = {}", mean[0]);
        assert!(mean[1].abs() < 0.2);
    }

    #[test]
    fn subtractive_tail_budget_and_effect() {
        let model = toy_model(2);
        let n = 5000;
        let clean = sample(&model, n, 5).unwrap();
        let out = contaminate(&clean, 0.05, &AdversaryStrategy::SubtractiveTail, &model, 6).unwrap();
        assert_eq!(out.corrupted_count(), 250);
        let max_first = out
            .points
            .iter()
            .zip(&out.corrupted_mask)
            .filter(|(_, &m)| m)
            .map(|(p, _)| p[0])
            .fold(f64::NEG_INFINITY, f64::max);
        // replacements were conditioned small
        assert!(max_first <= 0.1, "replacement first coord {max_first}");
    }

    #[test]
    fn budget_never_exceeded_across_strategies() {
        let model = toy_model(3);
        let clean = sample(&model, 997, 7).unwrap();
        for spec in [
            "identity",
            "mean_shift",
            "cov_inflate:50",
            "cluster:25",
            "subtractive_tail",
            "moment_poison",
        ] {
            let strategy: AdversaryStrategy = spec.parse().unwrap();
            for seed in 0..5 {
                for eps in [0.0, 0.03, 0.2, 0.49] {
                    let out = contaminate(&clean, eps, &strategy, &model, seed).unwrap();
                    let budget = (eps * 997.0).floor() as usize;
                    assert!(out.corrupted_count() <= budget);
                }
            }
        }
    }

    #[test]
    fn determinism() {
        let model = toy_model(2);
        let clean = sample(&model, 500, 8).unwrap();
        let s: AdversaryStrategy = "cov_inflate".parse().unwrap();
        let a = contaminate(&clean, 0.1, &s, &model, 99).unwrap();
        let b = contaminate(&clean, 0.1, &s, &model, 99).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.corrupted_mask, b.corrupted_mask);
    }

    #[test]
    fn unknown_strategy_rejected() {
        assert!("winsorize".parse::<AdversaryStrategy>().is_err());
        assert!("mean_shift:abc".parse::<AdversaryStrategy>().is_err());
        assert!(matches!(
            "mean_shift:42".parse::<AdversaryStrategy>().unwrap(),
            AdversaryStrategy::MeanShift { magnitude } if magnitude == 42.0
        ));
    }

    #[test]
    fn epsilon_out_of_range_rejected() {
        let model = toy_model(1);
        let clean = sample(&model, 10, 1).unwrap();
        assert!(contaminate(&clean, 0.5, &AdversaryStrategy::Identity, &model, 1).is_err());
        assert!(contaminate(&clean, -0.1, &AdversaryStrategy::Identity, &model, 1).is_err());
    }

    #[test]
    fn split_identity_and_union() {
        let model = toy_model(2);
        let clean = sample(&model, 101, 9).unwrap();
        let s = contaminate(&clean, 0.1, &AdversaryStrategy::Cluster { distance: 50.0 }, &model, 10).unwrap();

        let one = split_batches(&s, 1, 11).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].len(), 101);

        let parts = split_batches(&s, 4, 12).unwrap();
        assert_eq!(parts.iter().map(|p| p.len()).sum::<usize>(), 101);
        let mut whole: Vec<u64> = s.points.iter().map(|p| p[0].to_bits()).collect();
        let mut joined: Vec<u64> = parts
            .iter()
            .flat_map(|p| p.points.iter().map(|q| q[0].to_bits()))
            .collect();
        whole.sort();
        joined.sort();
        assert_eq!(whole, joined);

        assert!(split_batches(&s, 0, 1).is_err());
        assert!(split_batches(&s, 200, 1).is_err());
    }

    #[test]
    fn split_per_part_corruption_hypergeometric() {
        // N=10⁴, ε=0.05, k=2: over 1000 seeded splits, at least 99% of the
        // parts stay at or below 2ε corruption
        let model = toy_model(1);
        let n = 10_000;
        let clean = sample(&model, n, 13).unwrap();
        let s = contaminate(&clean, 0.05, &AdversaryStrategy::MeanShift { magnitude: 10.0 }, &model, 14).unwrap();
        assert_eq!(s.corrupted_count(), 500);
        let mut ok = 0usize;
        let mut total = 0usize;
        for seed in 0..1000u64 {
            for part in split_batches(&s, 2, seed).unwrap() {
                total += 1;
                if part.corrupted_fraction() <= 0.10 {
                    ok += 1;
                }
            }
        }
        assert!(
            ok as f64 >= 0.99 * total as f64,
            "only {ok}/{total} parts within 2x budget"
        );
    }

    #[test]
    fn batch_json_roundtrip() {
        let model = toy_model(2);
        let clean = sample(&model, 40, 15).unwrap();
        let strategy = AdversaryStrategy::MeanShift { magnitude: 7.0 };
        let s = contaminate(&clean, 0.1, &strategy, &model, 16).unwrap();
        let j = BatchJson::from_sample(&s, &strategy);
        let text = serde_json::to_string(&j).unwrap();
        let back: BatchJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.strategy, "mean_shift:7");
        let sample_back = back.to_sample().unwrap();
        assert_eq!(sample_back.points, s.points);
        assert_eq!(sample_back.corrupted_mask, s.corrupted_mask);
        assert_eq!(back.estimator_points().unwrap().len(), 40);
    }
}
