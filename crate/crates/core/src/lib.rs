//! Energy-efficient ordered-transmission (EEOT) distributed detection under
//! probabilistic data-falsification attacks.
//!
//! A network of `N` sensors observes a common binary hypothesis through
//! Gaussian noise, quantizes each observation to one bit with a shared
//! likelihood-ratio test, and reports to a fusion center in descending order
//! of LLR magnitude. The fusion center stops the round as soon as the running
//! count of ones can no longer change the final decision, so late
//! (uninformative) sensors never transmit. Each sensor is Byzantine with
//! probability `alpha` and, if so, flips its reported bit with probability
//! `p`.
//!
//! Modules:
//! - [`numerics`] — stable Gaussian-tail and binomial-tail primitives;
//! - [`detection`] — sensor model, attacked decision probabilities, analytic
//!   fusion performance, and the optimal fusion threshold;
//! - [`protocol`] — the ordered round, the incremental stopping rule, and the
//!   unordered baseline it must agree with;
//! - [`bounds`] — slack-optimized lower bounds on expected transmissions
//!   saved and the matching upper bound on transmissions used;
//! - [`monte_carlo`] — a seeded trial simulator whose results are independent
//!   of worker count.

pub mod bounds;
pub mod detection;
pub mod monte_carlo;
pub mod numerics;
pub mod protocol;

use thiserror::Error;

/// Errors produced by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The attacked decision channel carries no information (equal
    /// conditional probabilities), so the requested quantity is undefined.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    /// A round was advanced past its final decision.
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    /// The requested operation does not support the configured mode.
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("internal logic error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
