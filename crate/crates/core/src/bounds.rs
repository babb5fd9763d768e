//! Lower bounds on the expected number of transmissions an ordered round
//! saves, and the matching upper bound on transmissions used.
//!
//! Deciding `H1` needs at least `ceil(T)` received bits and deciding `H0`
//! at least `N - ceil(T)` plus one per flipped bit, so truncating the
//! stopping-time expectation at `ceil(T) + beta` (respectively
//! `N - ceil(T) + beta`) yields a savings lower bound for every integer
//! slack `beta`. The bound first grows with `beta` (the truncation captures
//! more stopping mass) and eventually shrinks (the retained multiplier
//! `N - ceil(T) - beta` decays), and the turnover is unimodal, so the best
//! slack is the first `beta` at which the weighted early-stop mass reaches
//! the weighted gain of growing the truncation. The recurrence-based search
//! and the exhaustive table are kept as genuinely independent routes and
//! cross-checked in the tests.

use crate::detection::DecisionProbs;
use crate::numerics::{binomial_head_leq, log_choose, Probability};
use crate::{Error, Result};

/// Which decision probabilities parameterize the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbMode {
    /// High-SNR limit: the attacked channel is binary symmetric with flip
    /// rate `alpha*p`. The closed-form recurrence search applies.
    Assumption1,
    /// Exact attacked probabilities from the sensor model. Searched by
    /// exhaustive tabulation only.
    Exact,
}

/// Inputs of the savings bound: network size, fusion threshold, prior, and
/// the attacked decision probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConfig {
    n: u64,
    t: f64,
    pi1: Probability,
    probs: DecisionProbs,
    mode: ProbMode,
}

impl BoundConfig {
    /// Bound config in the high-SNR limit with the given flip rate.
    pub fn assumption1(n: u64, t: f64, pi1: f64, flip_rate: f64) -> Result<Self> {
        Self::validated(
            n,
            t,
            pi1,
            DecisionProbs::assumption1(flip_rate)?,
            ProbMode::Assumption1,
        )
    }

    /// Bound config with exact attacked probabilities.
    pub fn exact(n: u64, t: f64, pi1: f64, probs: DecisionProbs) -> Result<Self> {
        Self::validated(n, t, pi1, probs, ProbMode::Exact)
    }

    fn validated(
        n: u64,
        t: f64,
        pi1: f64,
        probs: DecisionProbs,
        mode: ProbMode,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if !(t.is_finite() && t > 0.0 && t < n as f64) {
            return Err(Error::InvalidArgument(format!(
                "fusion threshold must lie in (0, {n}), got {t}"
            )));
        }
        Ok(BoundConfig {
            n,
            t,
            pi1: Probability::new(pi1)?,
            probs,
            mode,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn pi1(&self) -> f64 {
        self.pi1.value()
    }

    pub fn pi0(&self) -> f64 {
        self.pi1.complement().value()
    }

    pub fn probs(&self) -> &DecisionProbs {
        &self.probs
    }

    pub fn mode(&self) -> ProbMode {
        self.mode
    }

    pub fn ceil_t(&self) -> u64 {
        self.t.ceil() as u64
    }

    pub fn floor_t(&self) -> u64 {
        self.t.floor() as u64
    }

    /// `floor(T) - ceil(T)`: `-1` for fractional thresholds, `0` for
    /// integer ones.
    pub fn t_d(&self) -> i64 {
        self.floor_t() as i64 - self.ceil_t() as i64
    }

    /// Largest feasible slack, `min(N - ceil(T), ceil(T))`: both truncation
    /// windows must stay within the `N` transmissions.
    pub fn beta_max(&self) -> u64 {
        (self.n - self.ceil_t()).min(self.ceil_t())
    }

    fn check_beta(&self, beta: u64) -> Result<()> {
        if beta > self.beta_max() {
            return Err(Error::InvalidArgument(format!(
                "slack beta={beta} exceeds beta_max={}",
                self.beta_max()
            )));
        }
        Ok(())
    }
}

/// Probability that a round the fusion center will close as `H1` has already
/// fired its lower stop within the first `ceil(T) + beta` transmissions:
/// at most `beta` of those bits may have been flipped to zero.
pub fn early_stop_prob_h1(beta: u64, cfg: &BoundConfig) -> Result<Probability> {
    cfg.check_beta(beta)?;
    let window = cfg.ceil_t() + beta;
    Ok(binomial_head_leq(window, cfg.probs().tilde_0_1(), beta as i64))
}

/// Counterpart of [`early_stop_prob_h1`] for rounds closing as `H0`: the
/// upper stop fires within `N - ceil(T) + beta` transmissions when at most
/// `floor(T) - ceil(T) + beta` of them were flipped to one.
pub fn early_stop_prob_h0(beta: u64, cfg: &BoundConfig) -> Result<Probability> {
    cfg.check_beta(beta)?;
    let window = cfg.n() - cfg.ceil_t() + beta;
    Ok(binomial_head_leq(
        window,
        cfg.probs().tilde_1_0(),
        cfg.t_d() + beta as i64,
    ))
}

/// Closed-form increment of [`early_stop_prob_h1`] when `beta` grows by one
/// (Pascal's rule collapses the difference to a single term).
pub fn early_stop_increment_h1(beta: u64, cfg: &BoundConfig) -> Result<f64> {
    cfg.check_beta(beta)?;
    Ok(coefficient_term(
        cfg.ceil_t() + beta,
        beta + 1,
        cfg.probs().tilde_0_1().value(),
        cfg.probs().tilde_1_1().value(),
        cfg.ceil_t(),
    ))
}

/// Closed-form increment of [`early_stop_prob_h0`] when `beta` grows by one.
pub fn early_stop_increment_h0(beta: u64, cfg: &BoundConfig) -> Result<f64> {
    cfg.check_beta(beta)?;
    let flipped = (beta as i64 + cfg.t_d() + 1) as u64;
    let kept = (cfg.n() as i64 - cfg.ceil_t() as i64 - cfg.t_d()) as u64;
    Ok(coefficient_term(
        cfg.n() - cfg.ceil_t() + beta,
        flipped,
        cfg.probs().tilde_1_0().value(),
        cfg.probs().tilde_0_0().value(),
        kept,
    ))
}

/// `C(n, k) * q^k * r^m` in the log domain, with the binomial-expansion
/// convention `0^0 = 1` so zero flip rates stay consistent with the partial
/// sums.
fn coefficient_term(n: u64, k: u64, q: f64, r: f64, m: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut log = log_choose(n, k).expect("k <= n");
    if k > 0 {
        if q == 0.0 {
            return 0.0;
        }
        log += k as f64 * q.ln();
    }
    if m > 0 {
        if r == 0.0 {
            return 0.0;
        }
        log += m as f64 * r.ln();
    }
    log.exp()
}

/// Expected-savings contribution of rounds decided `H1`:
/// `(N - ceil(T) - beta) * early_stop_prob_h1 * pi1`.
pub fn savings_h1(beta: u64, cfg: &BoundConfig) -> Result<f64> {
    cfg.check_beta(beta)?;
    let kept = (cfg.n() - cfg.ceil_t() - beta) as f64;
    Ok(kept * early_stop_prob_h1(beta, cfg)?.value() * cfg.pi1())
}

/// Expected-savings contribution of rounds decided `H0`:
/// `(ceil(T) - beta) * early_stop_prob_h0 * pi0`.
pub fn savings_h0(beta: u64, cfg: &BoundConfig) -> Result<f64> {
    cfg.check_beta(beta)?;
    let kept = (cfg.ceil_t() - beta) as f64;
    Ok(kept * early_stop_prob_h0(beta, cfg)?.value() * cfg.pi0())
}

/// Lower bound on the expected number of transmissions saved at slack
/// `beta`: the sum of the two per-decision contributions.
pub fn savings_lower_bound(beta: u64, cfg: &BoundConfig) -> Result<f64> {
    Ok(savings_h1(beta, cfg)? + savings_h0(beta, cfg)?)
}

/// Relative slack for recognizing ties between adjacent slack values. The
/// integer-threshold grid does produce exact algebraic ties (e.g. integer
/// `T = N/2` with `T*q = 1/4`), which land within a few ulps of each other;
/// genuine gaps on realistic grids are many orders of magnitude wider. Both
/// searches resolve a tie toward the smaller slack.
const TIE_EPS: f64 = 1e-12;

fn effectively_greater(a: f64, b: f64) -> bool {
    a > b + TIE_EPS * a.abs().max(b.abs())
}

/// One row of the per-slack diagnostic table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaDiagnostic {
    pub beta: u64,
    pub savings_h1: f64,
    pub savings_h0: f64,
}

impl BetaDiagnostic {
    pub fn total(&self) -> f64 {
        self.savings_h1 + self.savings_h0
    }
}

/// Result of a slack search: the chosen slack, the savings lower bound
/// there, the matching transmissions upper bound, and the full table for
/// diagnostics (ties between adjacent slacks show up as equal totals).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub beta_star: u64,
    /// Lower bound on expected transmissions saved, in `[0, N]`.
    pub savings_lb: f64,
    /// Upper bound on expected transmissions used, `N - savings_lb`.
    pub transmissions_ub: f64,
    pub per_beta: Vec<BetaDiagnostic>,
}

fn per_beta_table(cfg: &BoundConfig) -> Result<Vec<BetaDiagnostic>> {
    (0..=cfg.beta_max())
        .map(|beta| {
            Ok(BetaDiagnostic {
                beta,
                savings_h1: savings_h1(beta, cfg)?,
                savings_h0: savings_h0(beta, cfg)?,
            })
        })
        .collect()
}

fn result_at(cfg: &BoundConfig, beta_star: u64, per_beta: Vec<BetaDiagnostic>) -> BoundResult {
    let savings_lb = per_beta[beta_star as usize].total();
    BoundResult {
        beta_star,
        savings_lb,
        transmissions_ub: cfg.n() as f64 - savings_lb,
        per_beta,
    }
}

/// Recurrence-based slack search.
///
/// Grows the early-stop probabilities incrementally and stops at the first
/// `beta` where the weighted early-stop mass reaches the weighted gain of
/// another slack step; past that point the savings bound can only shrink,
/// so that `beta` maximizes it. Falls back to `beta_max` when the bound is
/// still growing at the boundary. Only supports [`ProbMode::Assumption1`],
/// whose symmetric probabilities the unimodality argument is stated for;
/// exact configs go through [`brute_force_beta`].
pub fn optimal_beta(cfg: &BoundConfig) -> Result<BoundResult> {
    if cfg.mode() == ProbMode::Exact {
        return Err(Error::UnsupportedMode(
            "the recurrence search applies to assumption1 configs; use brute_force_beta for exact probabilities".into(),
        ));
    }
    let beta_max = cfg.beta_max();
    let mut stop_h1 = early_stop_prob_h1(0, cfg)?.value();
    let mut stop_h0 = early_stop_prob_h0(0, cfg)?.value();
    let mut beta_star = beta_max;
    for beta in 0..=beta_max {
        let inc_h1 = early_stop_increment_h1(beta, cfg)?;
        let inc_h0 = early_stop_increment_h0(beta, cfg)?;
        let stop_mass = cfg.pi1() * stop_h1 + cfg.pi0() * stop_h0;
        let gain_mass = cfg.pi1() * (cfg.n() as i64 - cfg.ceil_t() as i64 - beta as i64 - 1) as f64
            * inc_h1
            + cfg.pi0() * (cfg.ceil_t() as i64 - beta as i64 - 1) as f64 * inc_h0;
        if !effectively_greater(gain_mass, stop_mass) {
            beta_star = beta;
            break;
        }
        stop_h1 += inc_h1;
        stop_h0 += inc_h0;
    }
    Ok(result_at(cfg, beta_star, per_beta_table(cfg)?))
}

/// Exhaustive slack search: evaluates the savings bound at every feasible
/// slack by direct summation and returns the argmax (smallest on ties).
pub fn brute_force_beta(cfg: &BoundConfig) -> Result<BoundResult> {
    let table = per_beta_table(cfg)?;
    let mut best = 0usize;
    for (i, entry) in table.iter().enumerate() {
        if effectively_greater(entry.total(), table[best].total()) {
            best = i;
        }
    }
    Ok(result_at(cfg, best as u64, table))
}

/// Upper bound on the expected number of transmissions used,
/// `N - savings_lb` at the searched slack (recurrence search in
/// assumption1 mode, exhaustive otherwise).
pub fn transmission_upper_bound(cfg: &BoundConfig) -> Result<f64> {
    let result = match cfg.mode() {
        ProbMode::Assumption1 => optimal_beta(cfg)?,
        ProbMode::Exact => brute_force_beta(cfg)?,
    };
    Ok(result.transmissions_ub)
}
