//! Seeded Monte Carlo simulation of ordered rounds and aggregation into
//! rate estimates with normal-approximation confidence intervals.
//!
//! Every trial derives its own RNG from `(master_seed, trial_index)` and all
//! aggregation happens in exact integer tallies, so an estimate is
//! bit-identical for a fixed master seed no matter how many workers run the
//! trials or how rayon splits them.
//!
//! Randomness per trial, in draw order: the hypothesis (Bernoulli `pi1`),
//! `N` Gaussian observations (ziggurat sampler), then per sensor a
//! malicious coin (Bernoulli `alpha`) followed, for malicious sensors only,
//! by a flip coin (Bernoulli `p`). The trial RNG is ChaCha8 keyed by a
//! SplitMix64-mixed seed; reproducibility is promised within this
//! implementation, not across RNG libraries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::detection::{local_decide, local_llr, AttackModel, SensorModel};
use crate::protocol::{run_unordered, Hypothesis, OrderedRound, RoundOutcome};
use crate::{Error, Result};

/// One simulation campaign: the network, the attack, the fusion threshold,
/// and the trial budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub n: usize,
    pub sensor: SensorModel,
    pub attack: AttackModel,
    pub t: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if !(self.t.is_finite() && self.t > 0.0 && self.t < self.n as f64) {
            return Err(Error::InvalidArgument(format!(
                "fusion threshold must lie in (0, {}), got {}",
                self.n, self.t
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything one trial produced, in sensor order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub hypothesis: Hypothesis,
    pub y: Vec<f64>,
    pub malicious: Vec<bool>,
    /// Honest local decisions.
    pub v: Vec<bool>,
    /// Reported bits; differs from `v` only at malicious sensors.
    pub u: Vec<bool>,
    pub outcome_eeot: RoundOutcome,
    pub decision_unordered: Hypothesis,
}

/// Stateless per-trial seed: a SplitMix64 finalizer over an odd-stride walk,
/// bijective in the trial index for any fixed master seed.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = master_seed
        .wrapping_add(trial_index.wrapping_mul(GAMMA))
        .wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples one complete trial: hypothesis, observations, attack realization,
/// both fusion outcomes. The ordered and unordered decisions are asserted
/// equal on every trial.
pub fn sample_trial(cfg: &TrialConfig, trial_index: u64) -> Result<TrialRecord> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(cfg.master_seed, trial_index));

    let hypothesis = if rng.gen_bool(cfg.sensor.pi1()) {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    let noise = Normal::new(
        cfg.sensor.mean(hypothesis == Hypothesis::H1),
        cfg.sensor.sigma(),
    )
    .expect("sigma > 0");
    let y: Vec<f64> = (0..cfg.n).map(|_| noise.sample(&mut rng)).collect();

    let llrs: Vec<f64> = y.iter().map(|&yi| local_llr(yi, &cfg.sensor)).collect();
    let v: Vec<bool> = llrs.iter().map(|&l| local_decide(l, &cfg.sensor)).collect();

    let alpha = cfg.attack.alpha();
    let p = cfg.attack.p();
    let mut malicious = vec![false; cfg.n];
    let mut u = v.clone();
    for i in 0..cfg.n {
        malicious[i] = rng.gen_bool(alpha);
        if malicious[i] && rng.gen_bool(p) {
            u[i] = !u[i];
        }
    }

    let outcome_eeot = OrderedRound::new(&llrs, &u, cfg.t)?.run();
    let decision_unordered = run_unordered(&u, cfg.t)?;
    assert_eq!(
        outcome_eeot.decision, decision_unordered,
        "ordered and unordered decisions diverged (trial {trial_index})"
    );

    Ok(TrialRecord {
        hypothesis,
        y,
        malicious,
        v,
        u,
        outcome_eeot,
        decision_unordered,
    })
}

/// A rate with its 95% normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub value: f64,
    /// `1.96 * sqrt(value * (1 - value) / samples)`.
    pub half_width: f64,
    pub samples: u64,
}

impl RateEstimate {
    fn from_counts(events: u64, samples: u64) -> Self {
        let value = events as f64 / samples as f64;
        RateEstimate {
            value,
            half_width: 1.96 * (value * (1.0 - value) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Whether a true rate is statistically compatible with this estimate:
    /// within four CI half-widths, or, for an empty (or full) count where
    /// the normal interval collapses to zero width, when that extreme count
    /// itself had at least a 2.5% chance (`(1-p)^n >= 0.025`, i.e.
    /// `p <= -ln(0.025)/n`).
    pub fn consistent_with(&self, true_rate: f64) -> bool {
        if (self.value - true_rate).abs() <= 4.0 * self.half_width {
            return true;
        }
        let zero_plausible = -(0.025f64.ln()) / self.samples as f64;
        (self.value == 0.0 && true_rate <= zero_plausible)
            || (self.value == 1.0 && 1.0 - true_rate <= zero_plausible)
    }
}

/// Aggregated campaign estimates. The error rates apply to the ordered and
/// unordered systems alike: their per-trial decisions are asserted equal.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub trials: u64,
    pub h0_trials: u64,
    pub h1_trials: u64,
    /// Error rate over all trials.
    pub pe: RateEstimate,
    /// False-alarm rate over `H0` trials; `None` when no trial realized `H0`.
    pub pf: Option<RateEstimate>,
    /// Miss rate over `H1` trials; `None` when no trial realized `H1`.
    pub pm: Option<RateEstimate>,
    /// Mean transmissions used per round.
    pub mean_transmissions: f64,
    /// `mean_transmissions / N`, in `[0, 1]`.
    pub fraction_transmissions: f64,
    /// 95% half-width of `fraction_transmissions`.
    pub fraction_half_width: f64,
}

/// Exact integer tallies; merging is associative and commutative, which is
/// what makes the parallel reduction order-insensitive.
#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    h1: u64,
    false_alarms: u64,
    misses: u64,
    sum_k: u64,
    sum_k_sq: u64,
}

impl Tally {
    fn add(&mut self, record: &TrialRecord) {
        let k = record.outcome_eeot.k_star as u64;
        self.sum_k += k;
        self.sum_k_sq += k * k;
        match (record.hypothesis, record.outcome_eeot.decision) {
            (Hypothesis::H0, Hypothesis::H1) => self.false_alarms += 1,
            (Hypothesis::H1, Hypothesis::H0) => {
                self.h1 += 1;
                self.misses += 1;
            }
            (Hypothesis::H1, Hypothesis::H1) => self.h1 += 1,
            (Hypothesis::H0, Hypothesis::H0) => {}
        }
    }

    fn merge(a: Tally, b: Tally) -> Tally {
        Tally {
            h1: a.h1 + b.h1,
            false_alarms: a.false_alarms + b.false_alarms,
            misses: a.misses + b.misses,
            sum_k: a.sum_k + b.sum_k,
            sum_k_sq: a.sum_k_sq + b.sum_k_sq,
        }
    }
}

/// Runs the whole campaign (in parallel on the ambient rayon pool) and
/// aggregates rates, transmissions, and confidence intervals.
pub fn estimate(cfg: &TrialConfig) -> Result<EstimateRecord> {
    cfg.validate()?;
    let tally = (0..cfg.trials)
        .into_par_iter()
        .try_fold(Tally::default, |mut acc, index| {
            let record = sample_trial(cfg, index)?;
            acc.add(&record);
            Ok::<Tally, Error>(acc)
        })
        .try_reduce(Tally::default, |a, b| Ok(Tally::merge(a, b)))?;

    let trials = cfg.trials;
    let h0_trials = trials - tally.h1;
    let h1_trials = tally.h1;
    let pe = RateEstimate::from_counts(tally.false_alarms + tally.misses, trials);
    let pf = (h0_trials > 0).then(|| RateEstimate::from_counts(tally.false_alarms, h0_trials));
    let pm = (h1_trials > 0).then(|| RateEstimate::from_counts(tally.misses, h1_trials));

    // Integer sums below 2^53 convert to f64 exactly; the variance formula
    // is therefore deterministic and (up to one rounding) exact.
    let mean_k = tally.sum_k as f64 / trials as f64;
    let var_k = if trials > 1 {
        let centered = tally.sum_k_sq as f64 - (tally.sum_k as f64).powi(2) / trials as f64;
        (centered / (trials - 1) as f64).max(0.0)
    } else {
        0.0
    };
    let mean_half_width = 1.96 * (var_k / trials as f64).sqrt();

    Ok(EstimateRecord {
        trials,
        h0_trials,
        h1_trials,
        pe,
        pf,
        pm,
        mean_transmissions: mean_k,
        fraction_transmissions: mean_k / cfg.n as f64,
        fraction_half_width: mean_half_width / cfg.n as f64,
    })
}
