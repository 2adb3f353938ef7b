//! Algebra and probability of order processes.
//!
//! An *order process* is an increasing, left-continuous family of partial
//! orders (reflexive, transitive, not necessarily antisymmetric relations)
//! indexed by time and starting at the diagonal. Processes with finite
//! support are stored as switching-time maps: the instant after which each
//! pair of elements becomes related.
//!
//! - [`relation`]: finite partial orders, closure and join.
//! - [`process`]: the switching-time encoding, evaluation, join, order,
//!   `Q_Z` membership and time shifts.
//! - [`canon`]: isomorphy classes under relabeling and their semigroup.
//! - [`hereditary`]: finitely generated left-hereditary families and
//!   covering witnesses.
//! - [`measures`]: sampling models, the distribution function
//!   `φ(Z) = P(Z <= Y)` (closed form and Monte Carlo) and property checks.
//! - [`io`] and [`cli`]: file formats and the `orderproc` command.
//!
//! ```
//! use orderproc::OrderProcess;
//!
//! let y = OrderProcess::from_triples([(1, 2, 1.0)]).unwrap();
//! let z = OrderProcess::from_triples([(2, 3, 2.0)]).unwrap();
//! let j = y.join(&z);
//! assert_eq!(j.time(1, 3), Some(2.0));
//! assert!(y.leq(&j) && z.leq(&j));
//! ```
//!
//! The guide under `book/` walks through each concept; its code blocks are
//! compiled and run as doctests of this crate.

pub mod canon;
pub mod cli;
pub mod hereditary;
pub mod io;
pub mod measures;
pub mod process;
pub mod relation;

pub use canon::{Canonicalizer, IsoClass, Permutation};
pub use hereditary::HereditaryFamily;
pub use measures::{estimate_phi, phi_exact, MeasureModel, PhiEstimate};
pub use process::{OrderProcess, ProcessError};
pub use relation::{Element, PartialOrder};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/relations.md")]
    mod relations {}
    #[doc = include_str!("../../../book/src/processes.md")]
    mod processes {}
    #[doc = include_str!("../../../book/src/classes.md")]
    mod classes {}
    #[doc = include_str!("../../../book/src/hereditary.md")]
    mod hereditary {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
