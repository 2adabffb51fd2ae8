//! End-to-end driver: run the clustering fallback and the
//! normalize→moments→recover branch, pool every hypothesis candidate across
//! the guess enumeration, and select a winner by tournament.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussmix::MixtureModel;
use crate::normalize::{self, NormalizeConfig};
use crate::recover::{self, CandidateParams, RecoverConfig};
use crate::seeding;
use crate::select::{tournament, Hypothesis, HypothesisList, TournamentResult};

/// C-knobs for the robust estimators along the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SigmaConstants {
    /// C in σ = C·log(1/δ) for the pair-difference covariance filter.
    pub cov_c: f64,
    /// σ for the robust mean of whitened points.
    pub mean_sigma: f64,
    /// C in the Hermite-moment filter scale.
    pub moment_c: f64,
    /// Σ-proxy coefficient in the moment filter scale.
    pub sigma_proxy_c: f64,
    /// |μ|-proxy in the moment filter scale.
    pub mu_proxy: f64,
}

impl Default for SigmaConstants {
    fn default() -> Self {
        SigmaConstants {
            cov_c: 1.0,
            mean_sigma: 2.0,
            moment_c: 1.0,
            sigma_proxy_c: 4.0,
            mu_proxy: 1.0,
        }
    }
}

/// Pipeline configuration; every randomized stage derives its stream from
/// `seed`, so identical (points, config) give identical results.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Contamination rate the estimators defend against.
    pub epsilon: f64,
    /// δ = ε^delta_exponent; the "very small polynomial in ε" is a knob.
    pub delta_exponent: f64,
    /// Randomized-guess amplification count; `None` = ⌈1/ε⌉ capped at 200.
    pub restarts: Option<usize>,
    pub sigma_constants: SigmaConstants,
    pub seed: u64,
    /// Tournament simulation draws per model; `None` = max(10⁴, ⌈20/ε²⌉).
    pub n_sim: Option<usize>,
    /// Posited moment accuracy; `None` derives a heuristic from ε and N.
    pub eta: Option<f64>,
    /// ‖Σ‖_F guess-grid step used inside the pipeline.
    pub s_step: f64,
    pub s_max: f64,
    /// Random Σ-guesses contributed per restart.
    pub trials_per_restart: usize,
    pub ab_step: f64,
    /// Hypothesis-pool cap fed to the tournament after deduplication.
    pub max_hypotheses: usize,
    /// Parameter-space radius under which two candidates count as duplicates.
    pub dedup_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epsilon: 0.05,
            delta_exponent: 1.0 / 6.0,
            restarts: None,
            sigma_constants: SigmaConstants::default(),
            seed: 0,
            n_sim: None,
            eta: None,
            s_step: 0.1,
            s_max: 2.0,
            trials_per_restart: 40,
            ab_step: 0.25,
            max_hypotheses: 40,
            dedup_tol: 0.05,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.33).contains(&self.epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in [0, 0.33), got {}",
                self.epsilon
            )));
        }
        if let Some(r) = self.restarts {
            if r == 0 {
                return Err(Error::InvalidArgument("restarts must be >= 1".into()));
            }
        }
        if self.s_step <= 0.0 || self.s_max <= 0.0 || self.max_hypotheses == 0 {
            return Err(Error::InvalidArgument(
                "grid steps and hypothesis cap must be positive".into(),
            ));
        }
        Ok(())
    }

    /// ε floored away from zero so δ = ε^exp and 1/ε stay finite on clean
    /// runs.
    pub fn epsilon_effective(&self) -> f64 {
        self.epsilon.max(1e-3)
    }

    pub fn delta(&self) -> f64 {
        self.epsilon_effective().powf(self.delta_exponent)
    }

    pub fn restarts_effective(&self) -> usize {
        self.restarts
            .unwrap_or_else(|| (1.0 / self.epsilon_effective()).ceil().min(200.0) as usize)
    }

    pub fn n_sim_effective(&self) -> usize {
        self.n_sim.unwrap_or_else(|| {
            let eps = self.epsilon_effective();
            ((20.0 / (eps * eps)).ceil() as usize).max(10_000)
        })
    }

    fn normalize_config(&self) -> NormalizeConfig {
        NormalizeConfig {
            cov_sigma_c: self.sigma_constants.cov_c,
            mean_sigma: self.sigma_constants.mean_sigma,
            ..NormalizeConfig::default()
        }
    }

    fn recover_config(&self) -> RecoverConfig {
        RecoverConfig {
            moment_c: self.sigma_constants.moment_c,
            sigma_proxy_c: self.sigma_constants.sigma_proxy_c,
            mu_proxy: self.sigma_constants.mu_proxy,
            s_max: self.s_max,
            s_step: Some(self.s_step),
            ab_step: self.ab_step,
            eta_override: self.eta,
            ..RecoverConfig::default()
        }
    }
}

/// Everything the learner reports besides the winning model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub fallback_hypotheses: usize,
    pub moment_candidates: usize,
    pub deduplicated_hypotheses: usize,
    pub eta: f64,
    pub delta: f64,
    pub restarts: usize,
    pub winner_provenance: String,
    /// Set when the moment branch produced nothing and only fallback
    /// hypotheses entered the tournament.
    pub degraded: bool,
    pub moment_branch_error: Option<String>,
    pub tournament: TournamentResult,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub model: MixtureModel,
    pub transcript: Transcript,
    pub wall_times: BTreeMap<String, f64>,
}

impl PipelineResult {
    pub fn certified(&self) -> bool {
        self.transcript.tournament.certified
    }

    pub fn degraded(&self) -> bool {
        self.transcript.degraded
    }
}

/// Parameter-space distance between two canonical candidates, up to the
/// (μ, Σ) ↔ (−μ, −Σ) relabeling that gives the same mixture.
fn candidate_distance(a: &CandidateParams, b: &CandidateParams) -> f64 {
    let direct = (&a.mu_hat - &b.mu_hat).norm() + (&a.sigma_hat - &b.sigma_hat).norm();
    let flipped = (&a.mu_hat + &b.mu_hat).norm() + (&a.sigma_hat + &b.sigma_hat).norm();
    direct.min(flipped)
}

fn dedup_candidates(mut cands: Vec<CandidateParams>, tol: f64, cap: usize) -> Vec<CandidateParams> {
    let mut tol = tol;
    loop {
        let mut kept: Vec<CandidateParams> = Vec::new();
        for c in &cands {
            if kept.iter().all(|k| candidate_distance(k, c) > tol) {
                kept.push(c.clone());
            }
        }
        if kept.len() <= cap {
            return kept;
        }
        tol *= 1.5;
        cands = kept;
    }
}

/// Learn an equal-weight two-Gaussian mixture from a contaminated batch.
///
/// Stages: (1) split the batch into disjoint standardization, moment and
/// tournament parts (stage estimators run at 2ε to absorb the split
/// inflation); (2) clustering fallback hypotheses; (3) standardize, estimate
/// Hermite moments, recover μ candidates and Σ candidates across the guess
/// enumeration, map everything back through L⁻¹; (4) pool, deduplicate and
/// run the tournament. Never panics on valid input: if every moment-branch
/// candidate drops out, the fallback hypotheses alone reach the tournament
/// and the result carries a degraded flag.
pub fn learn_mixture(points: &[DVector<f64>], config: &PipelineConfig) -> Result<PipelineResult> {
    config.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let d = points[0].len();
    let n = points.len();
    let n_min = n_min_heuristic(d, config.epsilon_effective());
    if n < n_min {
        log::warn!("learn_mixture: N = {n} below the heuristic minimum {n_min} for d = {d}");
    }
    let eps = config.epsilon_effective();
    let eps_stage = (2.0 * eps).min(0.45);
    let delta = config.delta();
    let mut wall = BTreeMap::new();

    // disjoint stage batches
    let t0 = Instant::now();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(config.seed, 1));
    order.shuffle(&mut rng);
    let n_std = n / 2;
    let n_mom = n / 4;
    let std_part: Vec<DVector<f64>> = order[..n_std].iter().map(|&i| points[i].clone()).collect();
    let mom_part: Vec<DVector<f64>> = order[n_std..n_std + n_mom]
        .iter()
        .map(|&i| points[i].clone())
        .collect();
    let ref_part: Vec<DVector<f64>> = order[n_std + n_mom..]
        .iter()
        .map(|&i| points[i].clone())
        .collect();
    wall.insert("split".into(), t0.elapsed().as_secs_f64());

    // fallback branch (no separation test: both branches always run and the
    // tournament adjudicates)
    let t0 = Instant::now();
    let fallback_input: Vec<DVector<f64>> = std_part.iter().chain(&mom_part).cloned().collect();
    let fallback = normalize::separated_fallback(
        &fallback_input,
        eps_stage,
        &config.normalize_config(),
        seeding::derive(config.seed, 2),
    );
    wall.insert("fallback".into(), t0.elapsed().as_secs_f64());
    let fallback_count = fallback.len();

    // moment branch
    let t0 = Instant::now();
    let recover_cfg = config.recover_config();
    let mut moment_error: Option<String> = None;
    let mut eta_used = config.eta.unwrap_or(f64::NAN);
    let mut moment_hyps: Vec<Hypothesis> = Vec::new();
    let mut moment_candidates = 0usize;
    match moment_branch(
        &std_part,
        &mom_part,
        eps_stage,
        delta,
        config,
        &recover_cfg,
    ) {
        Ok(((total, hyps), eta)) => {
            eta_used = eta;
            moment_candidates = total;
            moment_hyps = hyps;
        }
        Err(e) => {
            log::warn!("moment branch failed: {e}; continuing with fallback only");
            moment_error = Some(e.to_string());
        }
    }
    wall.insert("moments".into(), t0.elapsed().as_secs_f64());

    let degraded = moment_hyps.is_empty();
    let mut pool: Vec<Hypothesis> = Vec::new();
    pool.extend(fallback);
    pool.extend(moment_hyps);
    if pool.is_empty() {
        // last resort: fit nothing, return the standard normal
        log::warn!("every branch failed; emitting the standard normal hypothesis");
        pool.push(Hypothesis {
            model: MixtureModel::spherical(d),
            provenance: "degraded/standard-normal".into(),
        });
    }
    if pool.len() > config.max_hypotheses {
        pool.truncate(config.max_hypotheses);
    }
    let list = HypothesisList::new(pool)?;

    // tournament
    let t0 = Instant::now();
    let result = tournament(
        &list,
        &ref_part,
        eps_stage,
        config.n_sim_effective(),
        seeding::derive(config.seed, 3),
    )?;
    wall.insert("tournament".into(), t0.elapsed().as_secs_f64());

    let winner = &list.hypotheses()[result.winner];
    let transcript = Transcript {
        fallback_hypotheses: fallback_count,
        moment_candidates,
        deduplicated_hypotheses: list.len(),
        eta: eta_used,
        delta,
        restarts: config.restarts_effective(),
        winner_provenance: winner.provenance.clone(),
        degraded,
        moment_branch_error: moment_error,
        tournament: result,
    };
    Ok(PipelineResult {
        model: winner.model.clone(),
        transcript,
        wall_times: wall,
    })
}

/// Heuristic sample-size floor: enough points that the order-6 moment
/// filter and the tournament P-estimates are not pure noise. Empirical, not
/// a guarantee.
pub fn n_min_heuristic(d: usize, epsilon: f64) -> usize {
    let moments = 40.0 * (d * d) as f64 / epsilon;
    moments.max(1000.0) as usize
}

fn moment_branch(
    std_part: &[DVector<f64>],
    mom_part: &[DVector<f64>],
    eps_stage: f64,
    delta: f64,
    config: &PipelineConfig,
    recover_cfg: &RecoverConfig,
) -> Result<((usize, Vec<Hypothesis>), f64)> {
    let (map, _) = normalize::standardize(
        std_part,
        eps_stage,
        delta,
        &config.normalize_config(),
        seeding::derive(config.seed, 10),
    )?;
    let transformed: Vec<DVector<f64>> = mom_part.iter().map(|x| map.apply(x)).collect();
    let moments =
        recover::estimate_hermite_moments(&transformed, eps_stage, delta, recover_cfg)?;
    let eta = moments.eta;
    let mu_cands = recover::recover_mu(&moments.m6, eta);
    let trials = config.restarts_effective() * config.trials_per_restart;
    let mut cands: Vec<CandidateParams> = Vec::new();
    for (k, mu_hat) in mu_cands.iter().enumerate() {
        let tagged = recover::recover_sigma_tagged(
            &moments.m4,
            mu_hat,
            eta,
            trials.max(1),
            seeding::derive(config.seed, 20 + k as u64),
            recover_cfg,
        );
        for (i, (sigma_hat, branch)) in tagged.into_iter().enumerate() {
            cands.push(CandidateParams {
                mu_hat: mu_hat.clone(),
                sigma_hat,
                provenance: format!("moments/mu{k}/{}/{i}", branch.label()),
            });
        }
    }
    // branch priority guides which representative survives deduplication
    let priority = |p: &str| -> usize {
        if p.contains("/zero/") {
            0
        } else if p.contains("/rank3-det/") {
            1
        } else if p.contains("/generic/") {
            2
        } else {
            3
        }
    };
    cands.sort_by_key(|c| priority(&c.provenance));
    let total = cands.len();
    let deduped = dedup_candidates(cands, config.dedup_tol, config.max_hypotheses.saturating_sub(3).max(1));
    let hyps = recover::candidates_to_models_with(&deduped, &map, recover_cfg);
    Ok(((total, hyps), eta))
}
