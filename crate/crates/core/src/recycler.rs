//! Repeated passes inside the enclosure cavity.
//!
//! A photon leaving towards M2 is sent back in and the same pass is applied
//! to the ion state conditioned on that branch. The loop ends when a
//! detector fires, an ion scatters the photon, or the pass budget runs out.
//! The dark pair (both ions in the level the photon cannot excite) returns
//! to the mirror with certainty and is reported as stuck mass.
//!
//! Three evaluations are provided: a closed-form sum, an explicit pass chain,
//! and Monte Carlo sampling of that chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{enclosed_pass, Entry, IonPairState, PassResult};
use crate::qcore::{Polarization, NORM_TOL};

pub const DEFAULT_MAX_PASSES: u32 = 30;
pub const DEFAULT_TRUNCATION_EPS: f64 = 1e-12;
/// Cap on fresh-photon rounds under [`TimeoutPolicy::Reinject`].
pub const DEFAULT_MAX_REINJECTIONS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeoutPolicy {
    /// Report whatever is still circulating after `max_passes` as truncated.
    #[default]
    Stop,
    /// After `max_passes`, inject a fresh photon into the surviving ion state.
    Reinject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecycleConfig {
    pub max_passes: u32,
    pub truncation_epsilon: f64,
    pub timeout: TimeoutPolicy,
    pub max_reinjections: u32,
}

impl Default for RecycleConfig {
    fn default() -> Self {
        RecycleConfig {
            max_passes: DEFAULT_MAX_PASSES,
            truncation_epsilon: DEFAULT_TRUNCATION_EPS,
            timeout: TimeoutPolicy::Stop,
            max_reinjections: DEFAULT_MAX_REINJECTIONS,
        }
    }
}

impl RecycleConfig {
    pub fn with_max_passes(max_passes: u32) -> Self {
        RecycleConfig {
            max_passes,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_passes < 1 {
            return Err(Error::NonPositive("max_passes"));
        }
        if self.truncation_epsilon.is_nan() || self.truncation_epsilon < 0.0 {
            return Err(Error::OutOfRange {
                name: "truncation_epsilon",
                range: "[0,inf)",
                value: self.truncation_epsilon,
            });
        }
        Ok(())
    }

    fn pass_budget(&self) -> u64 {
        let rounds = match self.timeout {
            TimeoutPolicy::Stop => 1,
            TimeoutPolicy::Reinject => 1 + u64::from(self.max_reinjections),
        };
        u64::from(self.max_passes) * rounds
    }
}

/// Absolute probability masses of one pass (not conditioned on reaching it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub entering: f64,
    pub detected: f64,
    pub scattered: f64,
    pub recycled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub p_entangled: f64,
    pub p_scattered: f64,
    pub p_stuck: f64,
    pub p_truncated: f64,
    /// Ion state heralded by the lower detector (the same at every pass).
    pub post_entangled: Option<IonPairState>,
    /// Index `k` holds pass `k + 1`.
    pub passes: Vec<PassRecord>,
}

impl IterationResult {
    pub fn total(&self) -> f64 {
        self.p_entangled + self.p_scattered + self.p_stuck + self.p_truncated
    }

    /// Detection probability at each pass index (starting at pass 1).
    pub fn passes_distribution(&self) -> Vec<f64> {
        self.passes.iter().map(|p| p.detected).collect()
    }
}

fn check_normalized(ions: &IonPairState) -> Result<()> {
    let n = ions.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            what: "ion pair state",
            norm_sqr: n,
        });
    }
    Ok(())
}

/// Closed-form sum over infinitely many passes for a sigma+ photon.
///
/// Each pass sends half of the `{|m- m+>, |m+ m->}` weight into scattering,
/// a quarter to the lower detector and a quarter back to the mirror. The
/// `|m+ m+>` weight always scatters on the first pass and `|m- m->` never
/// leaves the cavity.
pub fn iterate_analytic(ions: &IonPairState) -> Result<IterationResult> {
    check_normalized(ions)?;
    let q = ions.c_mp.norm_sqr() + ions.c_pm.norm_sqr();
    let pp = ions.c_pp.norm_sqr();
    let stuck = ions.c_mm.norm_sqr();

    let mut passes = Vec::with_capacity(DEFAULT_MAX_PASSES as usize);
    let mut live = q / 4.0;
    passes.push(PassRecord {
        entering: 1.0,
        detected: q / 4.0,
        scattered: pp + q / 2.0,
        recycled: q / 4.0 + stuck,
    });
    for _ in 1..DEFAULT_MAX_PASSES {
        passes.push(PassRecord {
            entering: live + stuck,
            detected: live / 4.0,
            scattered: live / 2.0,
            recycled: live / 4.0 + stuck,
        });
        live /= 4.0;
    }

    let post_entangled = (q > 0.0).then(|| {
        let n = q.sqrt();
        IonPairState {
            c_mp: ions.c_mp / n,
            c_pm: -ions.c_pm / n,
            c_mm: 0.0.into(),
            c_pp: 0.0.into(),
        }
    });
    Ok(IterationResult {
        p_entangled: q / 3.0,
        p_scattered: pp + q / 2.0 + q / 6.0,
        p_stuck: stuck,
        p_truncated: 0.0,
        post_entangled,
        passes,
    })
}

/// Weight of the state on the dark pair for `pol`.
pub fn dark_weight(ions: &IonPairState, pol: Polarization) -> f64 {
    ions.fidelity_with(&IonPairState::dark(pol))
}

/// Conditional pass results along the recycle branch.
///
/// `chain[k]` is the enclosed pass applied to the ion state that survived
/// `k` recycles. The chain stops at the pass budget, when the photon can no
/// longer recycle, or when the non-dark circulating mass drops below
/// `truncation_epsilon`. `mass_after` is the absolute recycled mass after
/// the last pass and `final_state` the ion state carrying it.
#[derive(Debug, Clone, PartialEq)]
pub struct RecycleChain {
    pub passes: Vec<PassResult>,
    pub mass_after: f64,
    pub final_state: Option<IonPairState>,
}

pub fn recycle_chain(ions: &IonPairState, cfg: &RecycleConfig) -> Result<RecycleChain> {
    check_normalized(ions)?;
    cfg.validate()?;
    let pol = Polarization::SigmaPlus;
    let mut state = *ions;
    let mut mass = 1.0;
    let mut passes = Vec::new();
    let mut final_state = None;
    for _ in 0..cfg.pass_budget() {
        let r = enclosed_pass(&state, pol, Entry::M1_SIDE)?;
        mass *= r.p_recycle;
        let next = r.post_recycle;
        passes.push(r);
        match next {
            Some(s) if mass > 0.0 => {
                state = s;
                final_state = Some(s);
                if mass * (1.0 - dark_weight(&s, pol)) < cfg.truncation_epsilon {
                    break;
                }
            }
            _ => {
                mass = 0.0;
                final_state = None;
                break;
            }
        }
    }
    Ok(RecycleChain {
        passes,
        mass_after: mass,
        final_state,
    })
}

/// Explicit pass-by-pass propagation.
pub fn iterate_numeric(ions: &IonPairState, cfg: &RecycleConfig) -> Result<IterationResult> {
    let chain = recycle_chain(ions, cfg)?;
    let mut mass = 1.0;
    let mut out = IterationResult {
        p_entangled: 0.0,
        p_scattered: 0.0,
        p_stuck: 0.0,
        p_truncated: 0.0,
        post_entangled: None,
        passes: Vec::with_capacity(chain.passes.len()),
    };
    for r in &chain.passes {
        let rec = PassRecord {
            entering: mass,
            detected: mass * r.p_detect_lower,
            scattered: mass * r.p_scatter(),
            recycled: mass * r.p_recycle,
        };
        out.p_entangled += rec.detected;
        out.p_scattered += rec.scattered;
        if out.post_entangled.is_none() {
            out.post_entangled = r.post_detect_lower;
        }
        out.passes.push(rec);
        mass = rec.recycled;
    }
    let dark = chain
        .final_state
        .map_or(0.0, |s| dark_weight(&s, Polarization::SigmaPlus));
    out.p_stuck = chain.mass_after * dark;
    out.p_truncated = chain.mass_after - out.p_stuck;
    Ok(out)
}

/// Pools the iterated outcome over a weighted ensemble of ion states.
pub fn pool<F>(ensemble: &[(f64, IonPairState)], mut eval: F) -> Result<IterationResult>
where
    F: FnMut(&IonPairState) -> Result<IterationResult>,
{
    let mut pooled = IterationResult {
        p_entangled: 0.0,
        p_scattered: 0.0,
        p_stuck: 0.0,
        p_truncated: 0.0,
        post_entangled: None,
        passes: Vec::new(),
    };
    let mut entangled_states = Vec::new();
    for (w, ions) in ensemble {
        let r = eval(ions)?;
        pooled.p_entangled += w * r.p_entangled;
        pooled.p_scattered += w * r.p_scattered;
        pooled.p_stuck += w * r.p_stuck;
        pooled.p_truncated += w * r.p_truncated;
        if pooled.passes.len() < r.passes.len() {
            pooled.passes.resize(
                r.passes.len(),
                PassRecord {
                    entering: 0.0,
                    detected: 0.0,
                    scattered: 0.0,
                    recycled: 0.0,
                },
            );
        }
        for (acc, p) in pooled.passes.iter_mut().zip(&r.passes) {
            acc.entering += w * p.entering;
            acc.detected += w * p.detected;
            acc.scattered += w * p.scattered;
            acc.recycled += w * p.recycled;
        }
        if let Some(s) = r.post_entangled {
            if r.p_entangled > 0.0 {
                entangled_states.push(s);
            }
        }
    }
    // a single pure heralded state only when every contributing member agrees
    pooled.post_entangled = match entangled_states.split_first() {
        Some((first, rest)) if rest.iter().all(|s| s.eq_up_to_phase(first, NORM_TOL)) => {
            Some(*first)
        }
        _ => None,
    };
    Ok(pooled)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Entangled,
    Scattered,
    Stuck,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub entangled: u64,
    pub scattered: u64,
    pub stuck: u64,
    pub truncated: u64,
    /// Detections per pass index (index `k` is pass `k + 1`).
    pub detections_by_pass: Vec<u64>,
}

impl OutcomeCounts {
    fn empty(passes: usize) -> Self {
        OutcomeCounts {
            entangled: 0,
            scattered: 0,
            stuck: 0,
            truncated: 0,
            detections_by_pass: vec![0; passes],
        }
    }

    fn record(mut self, (outcome, pass): (Outcome, usize)) -> Self {
        match outcome {
            Outcome::Entangled => {
                self.entangled += 1;
                self.detections_by_pass[pass] += 1;
            }
            Outcome::Scattered => self.scattered += 1,
            Outcome::Stuck => self.stuck += 1,
            Outcome::Truncated => self.truncated += 1,
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.entangled += other.entangled;
        self.scattered += other.scattered;
        self.stuck += other.stuck;
        self.truncated += other.truncated;
        for (a, b) in self
            .detections_by_pass
            .iter_mut()
            .zip(other.detections_by_pass)
        {
            *a += b;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub p_entangled: f64,
    pub p_scattered: f64,
    pub p_stuck: f64,
    pub p_truncated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub trials: u64,
    pub seed: u64,
    pub counts: OutcomeCounts,
    /// Empirical frequencies; `passes` is left empty.
    pub estimate: IterationResult,
    /// Empirical detection frequency per pass index.
    pub passes_distribution: Vec<f64>,
    pub std_errors: StandardErrors,
}

/// Random source for trial `trial`: ChaCha8 keyed by `seed`, one stream per trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Walks one photon (plus any re-injections) down the chain.
fn sample_trial(chain: &RecycleChain, dark: f64, rng: &mut impl Rng) -> (Outcome, usize) {
    for (k, r) in chain.passes.iter().enumerate() {
        let u: f64 = rng.random();
        let mut acc = r.p_scatter_u + r.p_scatter_l;
        if u < acc {
            return (Outcome::Scattered, k);
        }
        acc += r.p_detect_lower;
        if u < acc {
            return (Outcome::Entangled, k);
        }
        // the upper detector is replaced by M2 in the enclosed setup
        acc += r.p_detect_upper;
        if u < acc {
            return (Outcome::Truncated, k);
        }
    }
    let last = chain.passes.len().saturating_sub(1);
    if chain.mass_after <= 0.0 {
        // rounding left the cumulative sum a hair short of one
        return (Outcome::Scattered, last);
    }
    let u: f64 = rng.random();
    if u < dark {
        (Outcome::Stuck, last)
    } else {
        (Outcome::Truncated, last)
    }
}

fn sample_chain(chain: &RecycleChain, seed: u64, trials: std::ops::Range<u64>) -> OutcomeCounts {
    let dark = chain
        .final_state
        .map_or(0.0, |s| dark_weight(&s, Polarization::SigmaPlus));
    let n = chain.passes.len();
    trials
        .into_par_iter()
        .fold(
            || OutcomeCounts::empty(n),
            |acc, t| acc.record(sample_trial(chain, dark, &mut trial_rng(seed, t))),
        )
        .reduce(|| OutcomeCounts::empty(n), OutcomeCounts::merge)
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn summarize(
    counts: OutcomeCounts,
    trials: u64,
    seed: u64,
    post: Option<IonPairState>,
) -> MonteCarloResult {
    let n = trials as f64;
    let freq = |c: u64| c as f64 / n;
    let estimate = IterationResult {
        p_entangled: freq(counts.entangled),
        p_scattered: freq(counts.scattered),
        p_stuck: freq(counts.stuck),
        p_truncated: freq(counts.truncated),
        post_entangled: post,
        passes: Vec::new(),
    };
    let passes_distribution = counts.detections_by_pass.iter().map(|&d| freq(d)).collect();
    let std_errors = StandardErrors {
        p_entangled: binomial_se(estimate.p_entangled, trials),
        p_scattered: binomial_se(estimate.p_scattered, trials),
        p_stuck: binomial_se(estimate.p_stuck, trials),
        p_truncated: binomial_se(estimate.p_truncated, trials),
    };
    MonteCarloResult {
        trials,
        seed,
        counts,
        estimate,
        passes_distribution,
        std_errors,
    }
}

/// Samples `trials` photons through the enclosure cavity.
///
/// Trial `i` draws from `trial_rng(seed, i)`, so results do not depend on
/// thread count or scheduling.
pub fn monte_carlo(
    ions: &IonPairState,
    trials: u64,
    seed: u64,
    cfg: &RecycleConfig,
) -> Result<MonteCarloResult> {
    if trials == 0 {
        return Err(Error::NonPositive("trials"));
    }
    let chain = recycle_chain(ions, cfg)?;
    let post = chain.passes.iter().find_map(|r| r.post_detect_lower);
    let counts = sample_chain(&chain, seed, 0..trials);
    Ok(summarize(counts, trials, seed, post))
}

/// Monte Carlo over a weighted ensemble: trial `i` first draws its member
/// from the ensemble weights, then walks that member's chain.
pub fn monte_carlo_ensemble(
    ensemble: &[(f64, IonPairState)],
    trials: u64,
    seed: u64,
    cfg: &RecycleConfig,
) -> Result<MonteCarloResult> {
    if trials == 0 {
        return Err(Error::NonPositive("trials"));
    }
    let chains = ensemble
        .iter()
        .map(|(w, s)| {
            let c = recycle_chain(s, cfg)?;
            let dark = c
                .final_state
                .map_or(0.0, |f| dark_weight(&f, Polarization::SigmaPlus));
            Ok((*w, c, dark))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = chains
        .iter()
        .map(|(_, c, _)| c.passes.len())
        .max()
        .unwrap_or(0);
    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || OutcomeCounts::empty(n),
            |acc, t| {
                let mut rng = trial_rng(seed, t);
                let u: f64 = rng.random();
                let mut cum = 0.0;
                let mut pick = chains.len() - 1;
                for (i, (w, _, _)) in chains.iter().enumerate() {
                    cum += w;
                    if u < cum {
                        pick = i;
                        break;
                    }
                }
                let (_, chain, dark) = &chains[pick];
                acc.record(sample_trial(chain, *dark, &mut rng))
            },
        )
        .reduce(|| OutcomeCounts::empty(n), OutcomeCounts::merge);
    let ensemble_results: Vec<(f64, IonPairState)> = ensemble.to_vec();
    let post = pool(&ensemble_results, iterate_analytic)
        .ok()
        .and_then(|r| r.post_entangled);
    Ok(summarize(counts, trials, seed, post))
}
