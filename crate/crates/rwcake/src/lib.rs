//! An exact-arithmetic laboratory for proportional cake cutting in the
//! cut/eval query model.
//!
//! The crate provides:
//!
//! - [`valuation`]: piecewise-constant player measures on `[0,1]` with exact
//!   prefix values and alpha-points;
//! - [`engine`]: the query referee that answers Cut/Eval against hidden
//!   measures, enforces query legality and the single-subinterval
//!   restriction, and validates allocations;
//! - [`ws`]: the adversarial grid-instance family, its uniform distribution
//!   (sampler, enumerator, lazy adaptive adversary), the eval-to-cut
//!   transformer, and the assignment-permutation checker;
//! - [`protocols`]: cut-and-choose, last-diminisher, the divide-and-conquer
//!   protocol, and fair cuts-only scan strategies;
//! - [`harness`]: seeded experiments with exact query statistics, the exact
//!   decision-tree analyzer with certified expected-depth bounds, and the
//!   convexity gap check.
//!
//! Everything in the core is exact rational arithmetic; floats appear only in
//! display helpers.

pub mod engine;
pub mod harness;
pub mod log3;
pub mod protocols;
pub mod rational;
pub mod valuation;
pub mod ws;

pub use rational::Rational;
