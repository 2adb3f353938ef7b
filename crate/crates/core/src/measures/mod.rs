//! Probability models on order processes and their distribution function
//! `φ(Z) = μ(Q_Z)`, the probability that a random process dominates `Z`.
//!
//! Models can be sampled ([`MeasureModel::sample`]), evaluated in closed form
//! where one exists ([`phi_exact`]) or by Monte Carlo ([`estimate_phi`]).
//! The [`checks`] module tests the characteristic properties of such
//! functions: normalisation, monotonicity, positive definiteness, continuity
//! from below, independence over disjoint supports, and convergence.

use thiserror::Error;

use crate::relation::Element;

pub mod checks;
mod estimate;
mod exact;
mod model;

pub use checks::{EvalMode, Evaluator, Phi};
pub use estimate::{estimate_phi, estimate_phi_streams, DEFAULT_STREAMS};
pub use exact::{phi_exact, MAX_ENUMERATION};
pub use model::{BaseRelation, CompletionModel, Durations, MeasureModel, ModelKind};

/// Rounding allowance for comparisons between closed-form values that are
/// equal in exact arithmetic but computed along different operation orders.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("no closed form for {0}")]
    NoClosedForm(&'static str),
    #[error("element {element} lies outside the window of size {window}")]
    SupportOutOfWindow { element: Element, window: u32 },
    #[error("precondition violated at input {index}: {reason}")]
    PreconditionViolation { index: usize, reason: String },
}

/// A value of `φ`, exact or estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub exact: bool,
}

impl PhiEstimate {
    pub fn exact(value: f64) -> Self {
        PhiEstimate {
            value,
            stderr: 0.0,
            n: 0,
            exact: true,
        }
    }

    /// Binomial estimate from `hits` out of `n` draws.
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let value = hits as f64 / n as f64;
        PhiEstimate {
            value,
            stderr: (value * (1.0 - value) / n as f64).sqrt(),
            n,
            exact: false,
        }
    }

    /// Standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &PhiEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}
