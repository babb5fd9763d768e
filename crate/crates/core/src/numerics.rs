//! Numerically stable scalar primitives shared by the analytic modules.
//!
//! Everything downstream reduces to three ingredients: the standard-normal
//! tail, log binomial coefficients, and partial binomial sums. The binomial
//! sums that appear at `N = 100` involve terms near `1e-40`, so they are
//! always accumulated as max-shifted log-domain terms with compensated
//! summation rather than by multiplying probabilities directly.

use std::fmt;

use crate::{Error, Result};

/// A probability, guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    /// Validates that `value` lies in `[0, 1]`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "probability must lie in [0, 1], got {value}"
            )))
        }
    }

    /// Wraps a computed value, clamping away the few ulps by which a
    /// floating-point sum of masses may overshoot an endpoint.
    pub(crate) fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }

    /// Natural log of the probability (`-inf` for zero).
    pub fn ln(self) -> LogProb {
        LogProb(self.0.ln())
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A probability stored as its natural logarithm, in `[-inf, 0]`.
///
/// Underflow-safe carrier for quantities like `0.85^50` that appear as
/// factors of the savings bounds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    /// Validates that `value <= 0` (so `exp(value)` is a probability).
    pub fn new(value: f64) -> Result<Self> {
        if value <= 0.0 {
            Ok(LogProb(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "log-probability must be <= 0, got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> Probability {
        Probability::clamped(self.0.exp())
    }
}

/// Upper tail `P(X > x)` of the standard normal distribution.
///
/// Computed through the complementary error function, which the underlying
/// libm port evaluates with vetted rational approximations; relative accuracy
/// is well under `1e-14` across `|x| <= 8`.
pub fn q_tail(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "q_tail requires a finite argument, got {x}"
        )));
    }
    Ok(Probability::clamped(
        0.5 * libm::erfc(x / std::f64::consts::SQRT_2),
    ))
}

/// Natural log of the binomial coefficient `C(n, k)`.
///
/// Summing `ln((n - m + j) / j)` over the short side `m = min(k, n - k)`
/// keeps every partial term positive, so the compensated sum carries no
/// cancellation; relative error stays below `1e-12` up to `n = 1000`.
pub fn log_choose(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "log_choose requires k <= n, got k={k}, n={n}"
        )));
    }
    let m = k.min(n - k);
    let mut sum = CompensatedSum::default();
    for j in 1..=m {
        sum.add(((n - m + j) as f64).ln() - (j as f64).ln());
    }
    Ok(sum.total())
}

/// Upper tail `P(X >= k0)` for `X ~ Binomial(n, q)`.
///
/// `k0 <= 0` covers the full support (returns exactly 1); `k0 > n` is the
/// empty sum (returns exactly 0).
pub fn binomial_tail_geq(n: u64, q: Probability, k0: i64) -> Probability {
    if k0 <= 0 {
        return Probability::ONE;
    }
    if k0 > n as i64 {
        return Probability::ZERO;
    }
    binomial_range_sum(n, q, k0 as u64, n)
}

/// Lower tail `P(X <= k_hi)` for `X ~ Binomial(n, q)`.
///
/// Companion of [`binomial_tail_geq`] for the truncated sums of the savings
/// bounds; `k_hi < 0` is the empty sum.
pub fn binomial_head_leq(n: u64, q: Probability, k_hi: i64) -> Probability {
    if k_hi < 0 {
        return Probability::ZERO;
    }
    if k_hi >= n as i64 {
        return Probability::ONE;
    }
    binomial_range_sum(n, q, 0, k_hi as u64)
}

/// Sum of `Binomial(n, q)` masses over `lo..=hi`.
fn binomial_range_sum(n: u64, q: Probability, lo: u64, hi: u64) -> Probability {
    let q = q.value();
    // Degenerate support: the whole mass sits at 0 (q = 0) or n (q = 1).
    if q == 0.0 {
        return if lo == 0 {
            Probability::ONE
        } else {
            Probability::ZERO
        };
    }
    if q == 1.0 {
        return if hi == n {
            Probability::ONE
        } else {
            Probability::ZERO
        };
    }
    let ln_q = q.ln();
    let ln_1q = (-q).ln_1p();
    let log_terms: Vec<f64> = (lo..=hi)
        .map(|i| {
            log_choose(n, i).expect("i <= n") + i as f64 * ln_q + (n - i) as f64 * ln_1q
        })
        .collect();
    let max = log_terms
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Probability::ZERO;
    }
    let mut sum = CompensatedSum::default();
    for lt in &log_terms {
        sum.add((lt - max).exp());
    }
    Probability::clamped(max.exp() * sum.total())
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}
