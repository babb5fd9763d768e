//! The ordered-transmission protocol: LLR-magnitude ordering, the fusion
//! center's incremental stopping rule, and the unordered baseline.
//!
//! Sensors report in descending order of `|LLR|`. After `k` received bits
//! with running count `z`, the fusion center decides `H1` as soon as
//! `z >= T`, and `H0` as soon as `z < T - (N - k)` (even if every remaining
//! sensor reported a one, the count could no longer reach `T`). Exactly one
//! of the two conditions fires by `k = N`, and the decision always matches
//! the count rule applied to all `N` bits, so stopping early costs nothing
//! in detection performance. The transmission order is realized purely as a
//! sort: the decision and stopping index depend only on the order, not on
//! the (inverse-magnitude) transmission times, and the stop broadcast is
//! modeled as instantaneous and lossless.

use crate::{Error, Result};

/// The binary hypothesis under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0,
    H1,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::H0 => write!(f, "H0"),
            Hypothesis::H1 => write!(f, "H1"),
        }
    }
}

/// Which stopping condition ended the round: the lower stop commits to `H1`,
/// the upper stop to `H0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopKind {
    Lower,
    Upper,
}

/// Boundary convention when the count exactly equals an integer threshold.
///
/// The stopping rule itself always uses count `>= T` for `H1`; this switch
/// only selects the convention of the unordered rule and the analytic tail
/// sums, for experiments that want the strict-inequality variant. The two
/// conventions coincide for the usual half-integer thresholds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TieRule {
    #[default]
    GreaterEqual,
    StrictGreater,
}

/// Smallest integer count that decides `H1` at threshold `t` under the given
/// tie rule.
pub fn h1_count_cutoff(t: f64, tie: TieRule) -> i64 {
    match tie {
        TieRule::GreaterEqual => t.ceil() as i64,
        TieRule::StrictGreater => t.floor() as i64 + 1,
    }
}

/// Result of one ordered round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundOutcome {
    pub decision: Hypothesis,
    /// Transmissions used before the stop broadcast, `1 <= k_star <= N`.
    pub k_star: usize,
    /// Transmissions saved, `N - k_star`.
    pub savings: usize,
    pub stop_kind: StopKind,
}

/// Incremental fusion-center state for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct FcState {
    n: usize,
    t: f64,
    k: usize,
    running_sum: usize,
    decided: Option<Hypothesis>,
}

impl FcState {
    pub fn new(n: usize, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "a round needs at least one sensor".into(),
            ));
        }
        if !(t.is_finite() && t > 0.0 && t < n as f64) {
            return Err(Error::InvalidArgument(format!(
                "fusion threshold must lie in (0, {n}), got {t}"
            )));
        }
        Ok(FcState {
            n,
            t,
            k: 0,
            running_sum: 0,
            decided: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Transmissions received so far.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Count of ones received so far.
    pub fn running_sum(&self) -> usize {
        self.running_sum
    }

    /// The decision, once one of the stopping conditions has fired.
    pub fn decision(&self) -> Option<Hypothesis> {
        self.decided
    }

    /// Feeds the next ordered bit and returns the decision if a stopping
    /// condition fires. Stepping after the round has decided is a protocol
    /// violation.
    pub fn step(&mut self, u: bool) -> Result<Option<Hypothesis>> {
        if self.decided.is_some() {
            return Err(Error::ProtocolViolation(
                "received a transmission after the stop broadcast".into(),
            ));
        }
        debug_assert!(self.k < self.n, "undecided state implies k < n");
        self.k += 1;
        if u {
            self.running_sum += 1;
        }
        let sum = self.running_sum as f64;
        // The two conditions are mutually exclusive: t - (n - k) <= t.
        self.decided = if sum >= self.t {
            Some(Hypothesis::H1)
        } else if sum < self.t - (self.n - self.k) as f64 {
            Some(Hypothesis::H0)
        } else {
            None
        };
        Ok(self.decided)
    }
}

/// Transmission order for the given per-sensor LLRs: a stable descending
/// sort on `|LLR|`, ties broken by ascending sensor index. Indices are
/// zero-based.
pub fn order_sensors(llrs: &[f64]) -> Result<Vec<usize>> {
    if llrs.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot order an empty LLR sequence".into(),
        ));
    }
    if let Some(bad) = llrs.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "LLRs must be finite, got {bad}"
        )));
    }
    let mut order: Vec<usize> = (0..llrs.len()).collect();
    order.sort_by(|&a, &b| {
        llrs[b]
            .abs()
            .partial_cmp(&llrs[a].abs())
            .expect("finite LLRs compare")
    });
    Ok(order)
}

/// Runs the stopping rule over an already-ordered bit sequence and returns
/// the firing index, the decision, and the savings. Equivalent to folding
/// [`FcState::step`] over the sequence.
pub fn stopping_index(u_seq: &[bool], t: f64) -> Result<RoundOutcome> {
    let n = u_seq.len();
    let mut state = FcState::new(n, t)?;
    for (idx, &u) in u_seq.iter().enumerate() {
        if let Some(decision) = state.step(u)? {
            let k_star = idx + 1;
            let stop_kind = match decision {
                Hypothesis::H1 => StopKind::Lower,
                Hypothesis::H0 => StopKind::Upper,
            };
            return Ok(RoundOutcome {
                decision,
                k_star,
                savings: n - k_star,
                stop_kind,
            });
        }
    }
    // At k = n one of `sum >= t` and `sum < t` must hold.
    Err(Error::Internal(
        "stopping rule did not fire by k = N".into(),
    ))
}

/// Decision of the baseline system that always collects all `N` bits:
/// `H1` iff the total count reaches `t`.
pub fn run_unordered(u_seq: &[bool], t: f64) -> Result<Hypothesis> {
    run_unordered_with(u_seq, t, TieRule::default())
}

/// [`run_unordered`] under an explicit integer-threshold tie rule.
pub fn run_unordered_with(u_seq: &[bool], t: f64, tie: TieRule) -> Result<Hypothesis> {
    let n = u_seq.len();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot fuse an empty bit sequence".into(),
        ));
    }
    if !(t.is_finite() && t > 0.0 && t < n as f64) {
        return Err(Error::InvalidArgument(format!(
            "fusion threshold must lie in (0, {n}), got {t}"
        )));
    }
    let z = u_seq.iter().filter(|&&b| b).count() as f64;
    let h1 = match tie {
        TieRule::GreaterEqual => z >= t,
        TieRule::StrictGreater => z > t,
    };
    Ok(if h1 { Hypothesis::H1 } else { Hypothesis::H0 })
}

/// One round with its transmission order fixed: the permutation, the bits in
/// transmission order, and the fusion threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedRound {
    order: Vec<usize>,
    transmissions: Vec<bool>,
    t: f64,
}

impl OrderedRound {
    /// Orders a round from per-sensor LLRs and reported bits.
    pub fn new(llrs: &[f64], u_by_sensor: &[bool], t: f64) -> Result<Self> {
        if llrs.len() != u_by_sensor.len() {
            return Err(Error::InvalidArgument(format!(
                "LLR and bit sequences differ in length: {} vs {}",
                llrs.len(),
                u_by_sensor.len()
            )));
        }
        let order = order_sensors(llrs)?;
        if !(t.is_finite() && t > 0.0 && t < llrs.len() as f64) {
            return Err(Error::InvalidArgument(format!(
                "fusion threshold must lie in (0, {}), got {t}",
                llrs.len()
            )));
        }
        let transmissions = order.iter().map(|&i| u_by_sensor[i]).collect();
        Ok(OrderedRound {
            order,
            transmissions,
            t,
        })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Sensor indices in transmission order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Reported bits in transmission order.
    pub fn transmissions(&self) -> &[bool] {
        &self.transmissions
    }

    /// Runs the stopping rule over the ordered bits.
    pub fn run(&self) -> RoundOutcome {
        stopping_index(&self.transmissions, self.t).expect("round validated at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn order_sensors_descends_by_magnitude() {
        assert_eq!(order_sensors(&[-3.0, 1.0, 2.5]).unwrap(), vec![0, 2, 1]);
        assert_eq!(order_sensors(&[1.0, 1.0]).unwrap(), vec![0, 1]);
        assert_eq!(order_sensors(&[4.2]).unwrap(), vec![0]);
    }

    #[test]
    fn order_sensors_rejects_bad_input() {
        assert!(order_sensors(&[]).is_err());
        assert!(order_sensors(&[1.0, f64::NAN]).is_err());
        assert!(order_sensors(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn fc_step_traces() {
        // Stream 1,1,0,1 at t = 2.5: sums 1,2,2,3, decision at k = 4.
        let mut state = FcState::new(4, 2.5).unwrap();
        assert_eq!(state.step(true).unwrap(), None);
        assert_eq!(state.step(true).unwrap(), None);
        assert_eq!(state.step(false).unwrap(), None);
        assert_eq!(state.step(true).unwrap(), Some(Hypothesis::H1));
        assert_eq!(state.k(), 4);

        // Stream 0,1,0,0 at t = 2.5: upper stop at k = 3 (1 < 2.5 - 1).
        let mut state = FcState::new(4, 2.5).unwrap();
        assert_eq!(state.step(false).unwrap(), None);
        assert_eq!(state.step(true).unwrap(), None);
        assert_eq!(state.step(false).unwrap(), Some(Hypothesis::H0));

        // Single sensor decides immediately.
        let mut state = FcState::new(1, 0.5).unwrap();
        assert_eq!(state.step(true).unwrap(), Some(Hypothesis::H1));
    }

    #[test]
    fn fc_step_after_decision_is_a_violation() {
        let mut state = FcState::new(2, 0.5).unwrap();
        assert_eq!(state.step(true).unwrap(), Some(Hypothesis::H1));
        assert!(matches!(
            state.step(false),
            Err(Error::ProtocolViolation(_))
        ));
    }

    #[test]
    fn stopping_index_reference_traces() {
        let out = stopping_index(&bits("1101"), 2.5).unwrap();
        assert_eq!(out.decision, Hypothesis::H1);
        assert_eq!(out.k_star, 4);
        assert_eq!(out.savings, 0);
        assert_eq!(out.stop_kind, StopKind::Lower);

        let out = stopping_index(&bits("0100"), 2.5).unwrap();
        assert_eq!(out.decision, Hypothesis::H0);
        assert_eq!(out.k_star, 3);
        assert_eq!(out.savings, 1);
        assert_eq!(out.stop_kind, StopKind::Upper);

        // Integer threshold uses the >= convention.
        let out = stopping_index(&bits("111"), 2.0).unwrap();
        assert_eq!(out.decision, Hypothesis::H1);
        assert_eq!(out.k_star, 2);
    }

    #[test]
    fn stopping_index_validates_input() {
        assert!(stopping_index(&[], 0.5).is_err());
        assert!(stopping_index(&bits("101"), 3.0).is_err());
        assert!(stopping_index(&bits("101"), 0.0).is_err());
    }

    #[test]
    fn unordered_rule_examples() {
        assert_eq!(run_unordered(&bits("1101"), 2.5).unwrap(), Hypothesis::H1);
        assert_eq!(run_unordered(&bits("0100"), 2.5).unwrap(), Hypothesis::H0);
        assert_eq!(run_unordered(&bits("0000"), 2.5).unwrap(), Hypothesis::H0);
        // Tie at an integer threshold: >= decides H1, strict > decides H0.
        assert_eq!(run_unordered(&bits("1100"), 2.0).unwrap(), Hypothesis::H1);
        assert_eq!(
            run_unordered_with(&bits("1100"), 2.0, TieRule::StrictGreater).unwrap(),
            Hypothesis::H0
        );
    }

    #[test]
    fn h1_cutoff_conventions() {
        assert_eq!(h1_count_cutoff(2.5, TieRule::GreaterEqual), 3);
        assert_eq!(h1_count_cutoff(2.5, TieRule::StrictGreater), 3);
        assert_eq!(h1_count_cutoff(2.0, TieRule::GreaterEqual), 2);
        assert_eq!(h1_count_cutoff(2.0, TieRule::StrictGreater), 3);
    }

    #[test]
    fn ordered_round_permutes_bits() {
        let llrs = [-3.0, 1.0, 2.5];
        let u = [true, false, true];
        let round = OrderedRound::new(&llrs, &u, 1.5).unwrap();
        assert_eq!(round.order(), &[0, 2, 1]);
        assert_eq!(round.transmissions(), &[true, true, false]);
        let out = round.run();
        assert_eq!(out.decision, Hypothesis::H1);
        assert_eq!(out.k_star, 2);
    }

    #[test]
    fn ordered_round_validates_lengths() {
        assert!(OrderedRound::new(&[1.0, 2.0], &[true], 0.5).is_err());
    }
}
