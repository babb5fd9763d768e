//! Local sensor model, the Byzantine transformation of decision
//! probabilities, and the fusion center's analytic detection performance.
//!
//! Each sensor observes `y ~ N(0, sigma^2)` under `H0` and `y ~ N(s, sigma^2)`
//! under `H1`, thresholds its log-likelihood ratio against the shared
//! `lambda = ln(pi0 / pi1)`, and reports one bit. A malicious sensor flips
//! the bit before reporting, which turns the honest conditional probabilities
//! `pi` into the attacked `tilde` probabilities seen by the fusion center.

use crate::numerics::{binomial_head_leq, binomial_tail_geq, q_tail, Probability};
use crate::protocol::{h1_count_cutoff, TieRule};
use crate::{Error, Result};

/// How the shared local threshold `lambda` is mapped to an observation-domain
/// cutoff when computing the conditional decision probabilities.
///
/// The LLR test `(s*y - s^2/2)/sigma^2 > lambda` is equivalent to
/// `y > sigma^2*lambda/s + s/2`, which is the [`ThresholdDomain::Llr`]
/// reading and the default. [`ThresholdDomain::Observation`] instead applies
/// `lambda` to the raw observation; it is kept for experiments that want the
/// literal threshold, but it loses the high-SNR property that honest
/// decisions become error-free as `s` grows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ThresholdDomain {
    #[default]
    Llr,
    Observation,
}

/// The common Gaussian observation law and local test of every sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    s: f64,
    sigma: f64,
    pi1: f64,
}

impl SensorModel {
    /// Requires `s > 0`, `sigma > 0`, and a non-degenerate prior
    /// `0 < pi1 < 1` (the local threshold is `ln(pi0/pi1)`, ruling out the
    /// endpoints).
    pub fn new(s: f64, sigma: f64, pi1: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "signal amplitude s must be finite and > 0, got {s}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise level sigma must be finite and > 0, got {sigma}"
            )));
        }
        if !(pi1.is_finite() && pi1 > 0.0 && pi1 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "prior pi1 must lie strictly inside (0, 1), got {pi1}"
            )));
        }
        Ok(SensorModel { s, sigma, pi1 })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn pi1(&self) -> f64 {
        self.pi1
    }

    pub fn pi0(&self) -> f64 {
        1.0 - self.pi1
    }

    /// The shared local LLR threshold, `ln(pi0 / pi1)`. Derived, never set.
    pub fn lambda(&self) -> f64 {
        (self.pi0() / self.pi1).ln()
    }

    /// Observation mean under each hypothesis.
    pub fn mean(&self, h1: bool) -> f64 {
        if h1 {
            self.s
        } else {
            0.0
        }
    }

    /// The observation-domain cutoff equivalent to the local test under the
    /// chosen threshold reading.
    pub fn observation_cutoff(&self, domain: ThresholdDomain) -> f64 {
        match domain {
            ThresholdDomain::Llr => self.sigma * self.sigma * self.lambda() / self.s + 0.5 * self.s,
            ThresholdDomain::Observation => self.lambda(),
        }
    }
}

/// Per-sensor attack behaviour: malicious with probability `alpha`, and a
/// malicious sensor flips each reported bit with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackModel {
    alpha: Probability,
    p: Probability,
}

impl AttackModel {
    /// Requires the effective flip rate `alpha * p < 0.5`, the regime in
    /// which the attacked channel remains informative and the analytic
    /// threshold and bounds are meaningful.
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        let model = Self::unrestricted(alpha, p)?;
        if model.flip_rate() >= 0.5 {
            return Err(Error::InvalidArgument(format!(
                "effective flip rate alpha*p must be < 0.5, got {}",
                model.flip_rate()
            )));
        }
        Ok(model)
    }

    /// Validates only that `alpha` and `p` are probabilities, allowing
    /// saturated attacks (e.g. every sensor flipping every bit) for
    /// simulation; analytic operations that require `alpha * p < 0.5` fail
    /// on their own when handed the degenerate regime.
    pub fn unrestricted(alpha: f64, p: f64) -> Result<Self> {
        Ok(AttackModel {
            alpha: Probability::new(alpha)
                .map_err(|_| Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")))?,
            p: Probability::new(p)
                .map_err(|_| Error::InvalidArgument(format!("p must lie in [0, 1], got {p}")))?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn p(&self) -> f64 {
        self.p.value()
    }

    /// Effective per-bit flip rate `alpha * p`.
    pub fn flip_rate(&self) -> f64 {
        self.alpha.value() * self.p.value()
    }
}

/// Conditional probabilities of a reported one under each hypothesis,
/// honest (`pi`) and after the attack transformation (`tilde`).
///
/// Complements are exposed as accessors so `pi_0_h = 1 - pi_1_h` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionProbs {
    pi_1_0: Probability,
    pi_1_1: Probability,
    tilde_1_0: Probability,
    tilde_1_1: Probability,
}

impl DecisionProbs {
    pub fn new(
        pi_1_0: Probability,
        pi_1_1: Probability,
        tilde_1_0: Probability,
        tilde_1_1: Probability,
    ) -> Self {
        DecisionProbs {
            pi_1_0,
            pi_1_1,
            tilde_1_0,
            tilde_1_1,
        }
    }

    /// High-SNR limit: honest decisions are error-free, so the attacked
    /// channel reduces to a binary symmetric channel with the given flip
    /// rate.
    pub fn assumption1(flip_rate: f64) -> Result<Self> {
        let fr = Probability::new(flip_rate)?;
        Ok(DecisionProbs {
            pi_1_0: Probability::ZERO,
            pi_1_1: Probability::ONE,
            tilde_1_0: fr,
            tilde_1_1: fr.complement(),
        })
    }

    pub fn pi_1_0(&self) -> Probability {
        self.pi_1_0
    }

    pub fn pi_1_1(&self) -> Probability {
        self.pi_1_1
    }

    pub fn pi_0_0(&self) -> Probability {
        self.pi_1_0.complement()
    }

    pub fn pi_0_1(&self) -> Probability {
        self.pi_1_1.complement()
    }

    pub fn tilde_1_0(&self) -> Probability {
        self.tilde_1_0
    }

    pub fn tilde_1_1(&self) -> Probability {
        self.tilde_1_1
    }

    pub fn tilde_0_0(&self) -> Probability {
        self.tilde_1_0.complement()
    }

    pub fn tilde_0_1(&self) -> Probability {
        self.tilde_1_1.complement()
    }
}

/// Log-likelihood ratio of one observation: `(s*y - s^2/2) / sigma^2`.
/// Strictly increasing in `y`.
pub fn local_llr(y: f64, model: &SensorModel) -> f64 {
    (model.s * y - 0.5 * model.s * model.s) / (model.sigma * model.sigma)
}

/// Local decision rule: report 1 iff the LLR strictly exceeds the shared
/// threshold. A tie (a measure-zero event) resolves to 0.
pub fn local_decide(llr: f64, model: &SensorModel) -> bool {
    llr > model.lambda()
}

/// Conditional probabilities of the reported bit under the default LLR
/// threshold reading.
pub fn decision_probs(model: &SensorModel, attack: &AttackModel) -> Result<DecisionProbs> {
    decision_probs_with(model, attack, ThresholdDomain::default())
}

/// [`decision_probs`] with an explicit threshold reading.
///
/// Honest rates come from the Gaussian tail at the observation cutoff;
/// attacked rates are `tilde_1_h = alpha*p*pi_0_h + (1 - alpha*p)*pi_1_h`.
pub fn decision_probs_with(
    model: &SensorModel,
    attack: &AttackModel,
    domain: ThresholdDomain,
) -> Result<DecisionProbs> {
    let tau = model.observation_cutoff(domain);
    let pi_1_0 = q_tail((tau - model.mean(false)) / model.sigma)?;
    let pi_1_1 = q_tail((tau - model.mean(true)) / model.sigma)?;
    let fr = attack.flip_rate();
    let tilde_1_0 =
        Probability::clamped(fr * pi_1_0.complement().value() + (1.0 - fr) * pi_1_0.value());
    let tilde_1_1 =
        Probability::clamped(fr * pi_1_1.complement().value() + (1.0 - fr) * pi_1_1.value());
    Ok(DecisionProbs {
        pi_1_0,
        pi_1_1,
        tilde_1_0,
        tilde_1_1,
    })
}

/// Analytic detection performance of the fusion count rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcPerformance {
    /// False alarm: deciding `H1` under `H0`.
    pub pf: Probability,
    /// Detection: deciding `H1` under `H1`.
    pub pd: Probability,
    /// Miss, `1 - pd`.
    pub pm: Probability,
    /// Bayes error `pi0*pf + pi1*pm`.
    pub pe: Probability,
}

/// Detection performance of a fusion center that decides `H1` when the count
/// of reported ones reaches `t`, under the default count-at-least-`t` rule.
pub fn fc_performance(
    n: u64,
    t: f64,
    probs: &DecisionProbs,
    model: &SensorModel,
) -> Result<FcPerformance> {
    fc_performance_with(n, t, probs, model, TieRule::default())
}

/// [`fc_performance`] under an explicit integer-threshold tie rule.
pub fn fc_performance_with(
    n: u64,
    t: f64,
    probs: &DecisionProbs,
    model: &SensorModel,
    tie: TieRule,
) -> Result<FcPerformance> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if !(t.is_finite() && t > 0.0 && t < n as f64) {
        return Err(Error::InvalidArgument(format!(
            "fusion threshold must lie in (0, {n}), got {t}"
        )));
    }
    let k0 = h1_count_cutoff(t, tie);
    let pd = binomial_tail_geq(n, probs.tilde_1_1(), k0);
    let pf = binomial_tail_geq(n, probs.tilde_1_0(), k0);
    // Summed directly rather than via 1 - pd: a deep-tail miss rate would
    // otherwise drown in the complement's rounding. The complement identity
    // still holds to well under 1e-12.
    let pm = binomial_head_leq(n, probs.tilde_1_1(), k0 - 1);
    let pe = Probability::clamped(model.pi0() * pf.value() + model.pi1() * pm.value());
    Ok(FcPerformance { pf, pd, pm, pe })
}

/// The Bayes-optimal fusion threshold,
/// `[ln(pi0/pi1) + N ln((1-t10)/(1-t11))] / ln(t11(1-t10) / (t10(1-t11)))`.
///
/// Requires an informative attacked channel, i.e. `tilde_1_1 > tilde_1_0`
/// with both probabilities interior; at `alpha*p -> 0.5` the denominator
/// vanishes and the threshold is undefined.
pub fn optimal_threshold(n: u64, probs: &DecisionProbs, model: &SensorModel) -> Result<f64> {
    let t10 = probs.tilde_1_0().value();
    let t11 = probs.tilde_1_1().value();
    if t11 <= t10 {
        return Err(Error::DegenerateChannel(format!(
            "optimal threshold requires tilde_1_1 > tilde_1_0, got {t11} <= {t10}"
        )));
    }
    if t10 == 0.0 || t11 == 1.0 {
        return Err(Error::DegenerateChannel(
            "optimal threshold is undefined for a noiseless attacked channel".into(),
        ));
    }
    let numerator =
        (model.pi0() / model.pi1()).ln() + n as f64 * ((1.0 - t10) / (1.0 - t11)).ln();
    let denominator = ((t11 * (1.0 - t10)) / (t10 * (1.0 - t11))).ln();
    Ok(numerator / denominator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(s: f64, sigma: f64, pi1: f64) -> SensorModel {
        SensorModel::new(s, sigma, pi1).unwrap()
    }

    #[test]
    fn sensor_model_validates_fields() {
        assert!(SensorModel::new(0.0, 1.0, 0.5).is_err());
        assert!(SensorModel::new(-2.0, 1.0, 0.5).is_err());
        assert!(SensorModel::new(1.0, 0.0, 0.5).is_err());
        assert!(SensorModel::new(1.0, 1.0, 0.0).is_err());
        assert!(SensorModel::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lambda_is_log_prior_ratio() {
        let m = model(10.0, 1.0, 0.3);
        assert!((m.lambda() - (0.7f64 / 0.3).ln()).abs() < 1e-15);
        assert_eq!(model(10.0, 1.0, 0.5).lambda(), 0.0);
    }

    #[test]
    fn attack_model_enforces_flip_rate() {
        assert!(AttackModel::new(0.8, 0.7).is_err());
        assert!(AttackModel::new(0.3, 0.5).is_ok());
        assert!(AttackModel::new(1.2, 0.1).is_err());
        let saturated = AttackModel::unrestricted(1.0, 1.0).unwrap();
        assert_eq!(saturated.flip_rate(), 1.0);
    }

    #[test]
    fn llr_matches_closed_form() {
        let m = model(2.0, 1.0, 0.5);
        assert_eq!(local_llr(1.0, &m), 0.0); // y = s/2 is the crossover
        assert_eq!(local_llr(0.0, &m), -2.0);
        assert_eq!(local_llr(3.0, &m), 4.0);
    }

    #[test]
    fn llr_is_increasing_in_y() {
        let m = model(3.0, 2.0, 0.4);
        let mut prev = f64::NEG_INFINITY;
        for i in -50..=50 {
            let llr = local_llr(i as f64 * 0.2, &m);
            assert!(llr > prev);
            prev = llr;
        }
    }

    #[test]
    fn local_decide_resolves_ties_to_zero() {
        let m = model(10.0, 1.0, 0.3);
        let lambda = m.lambda();
        assert!(local_decide(lambda + 1.0, &m));
        assert!(!local_decide(lambda - 1.0, &m));
        assert!(!local_decide(lambda, &m));
    }

    #[test]
    fn decision_probs_match_gaussian_tail() {
        // pi1 = 0.5 puts the cutoff at s/2 = 2.5, so pi_1_0 = Q(2.5).
        let m = model(5.0, 1.0, 0.5);
        let attack = AttackModel::new(0.0, 0.0).unwrap();
        let probs = decision_probs(&m, &attack).unwrap();
        assert!((probs.pi_1_0().value() - 0.0062097).abs() < 1e-6);
        assert!((probs.pi_1_1().value() - 0.9937903).abs() < 1e-6);
    }

    #[test]
    fn no_attack_leaves_probs_unchanged() {
        let m = model(5.0, 1.0, 0.4);
        let attack = AttackModel::new(0.0, 0.7).unwrap();
        let probs = decision_probs(&m, &attack).unwrap();
        assert_eq!(probs.pi_1_0(), probs.tilde_1_0());
        assert_eq!(probs.pi_1_1(), probs.tilde_1_1());
    }

    #[test]
    fn assumption1_reduces_to_flip_rate() {
        let probs = DecisionProbs::assumption1(0.15).unwrap();
        assert_eq!(probs.tilde_1_0().value(), 0.15);
        assert_eq!(probs.tilde_1_1().value(), 0.85);
        assert_eq!(probs.pi_1_0().value(), 0.0);
        assert_eq!(probs.pi_1_1().value(), 1.0);
    }

    #[test]
    fn attacked_ordering_holds_below_half() {
        let m = model(10.0, 1.0, 0.5);
        for fr in [0.0, 0.1, 0.3, 0.49] {
            let attack = AttackModel::new(fr, 1.0).unwrap();
            let probs = decision_probs(&m, &attack).unwrap();
            assert!(probs.tilde_1_1() > probs.tilde_1_0());
        }
    }

    #[test]
    fn observation_domain_reading_differs() {
        // With pi1 = 0.5 the literal reading thresholds y at 0, so the honest
        // false-one rate is Q(0) = 0.5 instead of the deep tail.
        let m = model(10.0, 1.0, 0.5);
        let attack = AttackModel::new(0.0, 0.0).unwrap();
        let literal = decision_probs_with(&m, &attack, ThresholdDomain::Observation).unwrap();
        assert_eq!(literal.pi_1_0().value(), 0.5);
        let default = decision_probs(&m, &attack).unwrap();
        assert!(default.pi_1_0().value() < 1e-6);
    }

    #[test]
    fn fc_performance_single_sensor() {
        let m = model(10.0, 1.0, 0.5);
        let probs = DecisionProbs::assumption1(0.1).unwrap();
        let perf = fc_performance(1, 0.5, &probs, &m).unwrap();
        assert!((perf.pd.value() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn fc_performance_symmetric_channel_has_pf_equal_pd() {
        let m = model(10.0, 1.0, 0.5);
        let half = Probability::new(0.35).unwrap();
        let probs = DecisionProbs::new(half, half, half, half);
        let perf = fc_performance(20, 9.5, &probs, &m).unwrap();
        assert_eq!(perf.pf, perf.pd);
    }

    #[test]
    fn fc_performance_checks_threshold_range() {
        let m = model(10.0, 1.0, 0.5);
        let probs = DecisionProbs::assumption1(0.1).unwrap();
        assert!(fc_performance(10, 0.0, &probs, &m).is_err());
        assert!(fc_performance(10, 10.0, &probs, &m).is_err());
    }

    #[test]
    fn fc_performance_complements_hold() {
        let m = model(10.0, 1.0, 0.3);
        let probs = DecisionProbs::assumption1(0.2).unwrap();
        let perf = fc_performance(30, 14.5, &probs, &m).unwrap();
        assert!((perf.pm.value() - (1.0 - perf.pd.value())).abs() < 1e-12);
        let pe = m.pi0() * perf.pf.value() + m.pi1() * perf.pm.value();
        assert!((perf.pe.value() - pe).abs() < 1e-12);
    }

    #[test]
    fn optimal_threshold_symmetric_prior_is_half_n() {
        let m = model(10.0, 1.0, 0.5);
        for fr in [0.05, 0.15, 0.3, 0.45] {
            let probs = DecisionProbs::assumption1(fr).unwrap();
            let t = optimal_threshold(100, &probs, &m).unwrap();
            assert!((t - 50.0).abs() < 1e-9, "fr={fr} gave t={t}");
        }
    }

    #[test]
    fn optimal_threshold_skewed_prior() {
        let m = model(10.0, 1.0, 0.3);
        let probs = DecisionProbs::assumption1(0.15).unwrap();
        let t = optimal_threshold(100, &probs, &m).unwrap();
        // Closed form: 50 + ln(7/3) / (2 ln(0.85/0.15)).
        let expected = 50.0 + (7.0f64 / 3.0).ln() / (2.0 * (0.85f64 / 0.15).ln());
        assert!((t - expected).abs() < 1e-12);
        assert!((t - 50.2443).abs() < 1e-3);
    }

    #[test]
    fn optimal_threshold_degenerates_at_half_flip() {
        let m = model(10.0, 1.0, 0.5);
        let probs = DecisionProbs::assumption1(0.5).unwrap();
        assert!(matches!(
            optimal_threshold(100, &probs, &m),
            Err(Error::DegenerateChannel(_))
        ));
    }
}
