//! The adversarial instance family used for the lower-bound experiments:
//! grid points, instance measures, the hidden-permutation subfamily with its
//! uniform distribution (offline sampler and exhaustive enumerator), the lazy
//! adaptive adversary, the eval-to-cut protocol transformer, and the
//! assignment-permutation checker.

mod adversary;
mod enumerate;
mod instance;
mod primitive;

pub use adversary::{exact_instance_distribution, primitive_chunk_of_alpha, AdversaryState};
pub use enumerate::{enumerate_j, j_count, sample_j, sample_j_seeded, JEnumerator, ENUM_BOUND};
pub use instance::{
    build_measure, default_epsilon, grid_point, ChunkString, JInstance, WsInstance,
};
pub use primitive::{
    chunk_of_position, check_phi_equals_pi_inverse, eval_value_left, eval_value_right,
    run_primitive_on_adversary, run_primitive_on_engine, run_primitive_on_instance, slot_of_position,
    transform_eval_to_cut, EvalToCut, FinishSpec, PrimitiveEvent, PrimitiveOutcome, PrimitiveStep,
    PrimitiveProtocol,
};

use crate::rational::Rational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WsError {
    #[error("index out of range: {what} = {got}, n = {n}")]
    IndexOutOfRange { what: &'static str, got: usize, n: usize },
    #[error("epsilon {epsilon} invalid for n = {n}: need 0 < epsilon < 1/n^4 and n*epsilon <= 1/(n+1)")]
    BadEpsilon { epsilon: Rational, n: usize },
    #[error("{what} is not a permutation of 1..={n}")]
    NotAPermutation { what: &'static str, n: usize },
    #[error("player {player}'s point in chunk {chunk} violates the hidden-permutation constraint")]
    ConstraintViolation { player: usize, chunk: usize },
    #[error("enumeration refused: n = {n} exceeds bound {bound} (instance count grows super-exponentially)")]
    EnumerationTooLarge { n: usize, bound: usize },
    #[error("slot {slot} in chunk {chunk} is not available")]
    SlotUnavailable { chunk: usize, slot: usize },
    #[error("cut at alpha = {alpha} is not primitive (alpha must be i/n for some i in 1..=n)")]
    NonPrimitiveCut { alpha: Rational },
    #[error("eval at {x} is not primitive (argument must be a prior cut answer on the grid)")]
    NonPrimitiveEval { x: Rational },
    #[error("the adversary answers cut queries only; the protocol issued an eval")]
    AdversaryEvalUnsupported,
    #[error("protocol event stream inconsistent: {0}")]
    ProtocolInconsistency(String),
    #[error("allocation is not an ordered partition of the cake into n pieces")]
    NotAPartition,
    #[error("finish specification malformed: {0}")]
    BadFinish(String),
    #[error("strategy {name} does not support n = {n}")]
    UnsupportedN { name: &'static str, n: usize },
}
