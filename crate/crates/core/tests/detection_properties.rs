//! Analytic detection-performance invariants: the optimal threshold really
//! minimizes the error probability over integer count cutoffs, error grows
//! with the effective flip rate, the no-attack error floor, and an exact
//! big-integer oracle for the deep-tail error at full scale.

use eeot_core::detection::{
    decision_probs, fc_performance, optimal_threshold, AttackModel, DecisionProbs, SensorModel,
};
use eeot_core::numerics::{binomial_head_leq, binomial_tail_geq};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Integer count cutoff implied by a real threshold under the
/// count-at-least-t rule, tolerating float noise around integer values.
/// Thresholds outside (0, n] (possible for small n with skewed priors)
/// clamp to the nearest cutoff of the scanned family, which implements the
/// same decision rule on counts 0..=n.
fn implied_cutoff(t_star: f64, n: u64) -> i64 {
    ((t_star - 1e-9).ceil() as i64).clamp(1, n as i64)
}

/// Bayes error when the fusion center decides H1 iff the count reaches `k0`.
fn pe_at_cutoff(n: u64, k0: i64, probs: &DecisionProbs, pi1: f64) -> f64 {
    let pf = binomial_tail_geq(n, probs.tilde_1_0(), k0).value();
    let pm = binomial_head_leq(n, probs.tilde_1_1(), k0 - 1).value();
    (1.0 - pi1) * pf + pi1 * pm
}

#[test]
fn optimal_threshold_minimizes_error_over_all_cutoffs() {
    for n in 2..=30u64 {
        for pi1 in [0.3, 0.5, 0.7] {
            for fr in [0.05, 0.15, 0.3, 0.45] {
                let model = SensorModel::new(10.0, 1.0, pi1).unwrap();
                let probs = DecisionProbs::assumption1(fr).unwrap();
                let t_star = optimal_threshold(n, &probs, &model).unwrap();
                let cutoff = implied_cutoff(t_star, n);

                let errors: Vec<f64> =
                    (1..=n as i64).map(|k0| pe_at_cutoff(n, k0, &probs, pi1)).collect();
                let min = errors.iter().cloned().fold(f64::INFINITY, f64::min);
                let tol = 1e-9 * min.max(1e-300);

                let pe_star = errors[(cutoff - 1) as usize];
                assert!(
                    pe_star <= min + tol,
                    "cutoff {cutoff} not optimal: pe={pe_star}, min={min} \
                     (n={n}, pi1={pi1}, fr={fr}, t*={t_star})"
                );
            }
        }
    }
}

#[test]
fn error_grows_with_the_flip_rate() {
    // At the per-rate optimal threshold, a noisier attacked channel can
    // only hurt.
    for pi1 in [0.3, 0.5] {
        let model = SensorModel::new(10.0, 1.0, pi1).unwrap();
        let mut previous = -1.0f64;
        for step in 0..10 {
            let fr = step as f64 * 0.05;
            let probs = DecisionProbs::assumption1(fr).unwrap();
            let t = if fr == 0.0 {
                // Degenerate noiseless channel: any interior threshold.
                50.0 + (model.pi0() / model.pi1()).ln().signum() * 0.5
            } else {
                optimal_threshold(100, &probs, &model).unwrap()
            };
            let pe = fc_performance(100, t, &probs, &model).unwrap().pe.value();
            assert!(
                pe >= previous - 1e-12,
                "pe dipped at fr={fr}: {pe} < {previous}"
            );
            previous = pe;
        }
    }
}

#[test]
fn no_attack_error_floor_near_half_n() {
    let attack = AttackModel::new(0.0, 0.0).unwrap();
    for n in [20u64, 50, 100] {
        let model = SensorModel::new(10.0, 1.0, 0.5).unwrap();
        let probs = decision_probs(&model, &attack).unwrap();
        for t in [n as f64 / 2.0 - 0.5, n as f64 / 2.0 + 0.5] {
            let pe = fc_performance(n, t, &probs, &model).unwrap().pe.value();
            assert!(pe <= 1e-6, "n={n}, t={t}: pe={pe}");
        }
    }
}

/// Exact `P(lo <= X <= hi)` for `X ~ Binomial(n, num/20)`, via big-integer
/// arithmetic.
fn exact_binomial_range(n: u64, num: u64, lo: u64, hi: u64) -> f64 {
    let choose = |n: u64, k: u64| -> BigUint {
        let mut value = BigUint::one();
        let k = k.min(n - k);
        for j in 1..=k {
            value = value * BigUint::from(n - k + j) / BigUint::from(j);
        }
        value
    };
    let mut total = BigUint::zero();
    for i in lo..=hi {
        total += choose(n, i)
            * BigUint::from(num).pow(i as u32)
            * BigUint::from(20 - num).pow((n - i) as u32);
    }
    let denom = BigUint::from(20u64).pow(n as u32);
    total.to_f64().unwrap() / denom.to_f64().unwrap()
}

#[test]
fn deep_tail_error_matches_exact_arithmetic_at_full_scale() {
    // N = 100, t = 49.5, flip rate 0.15, even prior: both error terms sit
    // ten standard deviations into their tails.
    let model = SensorModel::new(10.0, 1.0, 0.5).unwrap();
    let probs = DecisionProbs::assumption1(0.15).unwrap();
    let perf = fc_performance(100, 49.5, &probs, &model).unwrap();

    let pf_exact = exact_binomial_range(100, 3, 50, 100);
    let pm_exact = exact_binomial_range(100, 17, 0, 49);
    let pe_exact = 0.5 * pf_exact + 0.5 * pm_exact;

    assert!(perf.pe.value() < 1e-15, "pe={}", perf.pe.value());
    assert!(
        (perf.pe.value() - pe_exact).abs() <= 1e-9 * pe_exact,
        "pe={} vs exact {pe_exact}",
        perf.pe.value()
    );
    assert!(
        (perf.pf.value() - pf_exact).abs() <= 1e-9 * pf_exact,
        "pf={} vs exact {pf_exact}",
        perf.pf.value()
    );
}
