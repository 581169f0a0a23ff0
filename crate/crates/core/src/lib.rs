//! Exact-arithmetic toolkit for sum-product combinatorics.
//!
//! Every set is a finite set of exact [`Rational`]s, so sumsets, ratio sets
//! and realisation counts are computed without rounding. On top of the set
//! layer sit energies and dyadic decompositions ([`energy`]), Cartesian-grid
//! incidence counting ([`incidence`]), the slope-bunching machinery
//! ([`bunching`]), energy regularisation ([`regularise`]), the `AA+AA`
//! pipeline ([`aaaa`]) and exact exponent bookkeeping ([`exponents`]).

pub mod aaaa;
pub mod bunching;
pub mod energy;
pub mod error;
pub mod exponents;
pub mod generators;
mod kernel;
pub mod incidence;
pub mod numeric;
pub mod rational;
pub mod regularise;
pub mod report;
pub mod set;

pub use error::{CoreError, Result};
pub use rational::{q, Rational};
pub use report::{InequalityReport, Verdict};
pub use set::{Op, RSet, RealisationMap};
