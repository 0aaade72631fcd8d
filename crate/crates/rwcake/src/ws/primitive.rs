//! Primitive protocols over the instance family.
//!
//! A primitive protocol cuts only at `i/n`-points and evaluates only at grid
//! points returned by earlier cuts. Protocols are written as pure resumable
//! functions of their event history, which lets the same strategy run against
//! a concrete instance, the live referee, the lazy adversary, or the exact
//! decision-tree analyzer.
//!
//! [`EvalToCut`] wraps a primitive protocol and replaces every grid-point
//! eval by a cut in the same chunk: the cut reveals the player's point, hence
//! its position relative to the eval argument, which pins the eval answer to
//! one of three values. The wrapper's cut count is the wrappee's cut count
//! plus its eval count, and the outcome is identical.

use crate::engine::{Allocation, Engine};
use crate::rational::Rational;
use crate::ws::adversary::AdversaryState;
use crate::ws::instance::JInstance;
use crate::ws::{grid_point, WsError};
use rand::Rng;

/// What a primitive protocol does next, given its history so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitiveStep {
    Cut { player: usize, chunk: usize },
    Eval { player: usize, x: Rational },
    Finish(FinishSpec),
}

/// Termination: `phi[k-1]` is the player receiving the `k`-th piece from the
/// left; `boundaries` are the `n-1` interior piece boundaries, each of which
/// must be the answer of a cut performed during the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinishSpec {
    pub phi: Vec<usize>,
    pub boundaries: Vec<Rational>,
}

/// One answered query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitiveEvent {
    Cut { player: usize, chunk: usize, slot: usize, position: Rational },
    Eval { player: usize, x: Rational, value: Rational },
}

/// A deterministic primitive protocol as a pure function of its history.
/// `next` must be consistent: replaying a prefix yields the same steps.
pub trait PrimitiveProtocol {
    fn name(&self) -> &'static str;
    fn next(&self, n: usize, history: &[PrimitiveEvent]) -> Result<PrimitiveStep, WsError>;
}

impl<P: PrimitiveProtocol + ?Sized> PrimitiveProtocol for &P {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn next(&self, n: usize, history: &[PrimitiveEvent]) -> Result<PrimitiveStep, WsError> {
        (**self).next(n, history)
    }
}

/// Chunk index of a grid position: the chunks partition `(i/(n+1), (i+1)/(n+1))`,
/// so the chunk is recoverable without knowing epsilon.
pub fn chunk_of_position(n: usize, x: &Rational) -> Option<usize> {
    use num_traits::ToPrimitive;
    let scaled = x * &Rational::from(n + 1);
    // floor(x * (n+1))
    let i = (scaled.numer() / scaled.denom()).to_usize()?;
    if (1..=n).contains(&i) && !(&scaled - &Rational::from(i)).is_zero() {
        Some(i)
    } else {
        None
    }
}

/// Chunk and slot of a grid position, requiring exact membership in the grid.
pub fn slot_of_position(n: usize, epsilon: &Rational, x: &Rational) -> Option<(usize, usize)> {
    use num_traits::ToPrimitive;
    let chunk = chunk_of_position(n, x)?;
    let offset = x - &Rational::new(chunk as i64, n as i64 + 1);
    let k = &offset / epsilon;
    if !k.is_integer() {
        return None;
    }
    let k = k.numer().to_usize()?;
    if (1..=n).contains(&k) {
        Some((chunk, k))
    } else {
        None
    }
}

/// Eval answer when the evaluated player's chunk-`i` point lies strictly left
/// of the argument: `i/n + (n-i)/(n^2+n)`.
pub fn eval_value_left(n: usize, i: usize) -> Rational {
    let n = n as i64;
    Rational::new(i as i64, n) + Rational::new(n - i as i64, n * n + n)
}

/// Eval answer when the point lies strictly right of the argument: `i/(n+1)`.
pub fn eval_value_right(n: usize, i: usize) -> Rational {
    Rational::new(i as i64, n as i64 + 1)
}

/// Wrap a primitive protocol so that it issues no evals; see module docs.
pub fn transform_eval_to_cut<P: PrimitiveProtocol>(inner: P) -> EvalToCut<P> {
    EvalToCut { inner }
}

pub struct EvalToCut<P> {
    inner: P,
}

impl<P: PrimitiveProtocol> PrimitiveProtocol for EvalToCut<P> {
    fn name(&self) -> &'static str {
        "evaltocut"
    }

    /// Re-simulate the wrapped protocol against a virtual history
    /// reconstructed from the outer (cuts-only) history.
    fn next(&self, n: usize, history: &[PrimitiveEvent]) -> Result<PrimitiveStep, WsError> {
        let mut virtual_events: Vec<PrimitiveEvent> = Vec::new();
        let mut outer = history.iter();
        loop {
            match self.inner.next(n, &virtual_events)? {
                PrimitiveStep::Cut { player, chunk } => match outer.next() {
                    Some(ev @ PrimitiveEvent::Cut { .. }) => virtual_events.push(ev.clone()),
                    Some(_) => {
                        return Err(WsError::ProtocolInconsistency(
                            "transformer history may only contain cuts".into(),
                        ))
                    }
                    None => return Ok(PrimitiveStep::Cut { player, chunk }),
                },
                PrimitiveStep::Eval { player, x } => {
                    // Legality: the argument must be a previously revealed
                    // grid point (some earlier cut answer of the wrapped run).
                    let known = virtual_events.iter().any(|ev| match ev {
                        PrimitiveEvent::Cut { position, .. } => position == &x,
                        _ => false,
                    });
                    if !known {
                        return Err(WsError::NonPrimitiveEval { x });
                    }
                    let chunk = chunk_of_position(n, &x)
                        .ok_or_else(|| WsError::NonPrimitiveEval { x: x.clone() })?;
                    match outer.next() {
                        Some(PrimitiveEvent::Cut { player: qp, chunk: qc, position, .. }) => {
                            if *qp != player || *qc != chunk {
                                return Err(WsError::ProtocolInconsistency(
                                    "transformed cut does not match the pending eval".into(),
                                ));
                            }
                            let value = match position.cmp(&x) {
                                std::cmp::Ordering::Less => eval_value_left(n, chunk),
                                std::cmp::Ordering::Equal => Rational::new(chunk as i64, n as i64),
                                std::cmp::Ordering::Greater => eval_value_right(n, chunk),
                            };
                            virtual_events.push(PrimitiveEvent::Eval { player, x, value });
                        }
                        Some(_) => {
                            return Err(WsError::ProtocolInconsistency(
                                "transformer history may only contain cuts".into(),
                            ))
                        }
                        None => return Ok(PrimitiveStep::Cut { player, chunk }),
                    }
                }
                PrimitiveStep::Finish(spec) => return Ok(PrimitiveStep::Finish(spec)),
            }
        }
    }
}

/// Outcome of driving a primitive protocol to completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveOutcome {
    pub finish: FinishSpec,
    pub cuts: usize,
    pub evals: usize,
    pub events: Vec<PrimitiveEvent>,
}

/// `phi = pi^{-1}`? The allocation must be an ordered partition of the cake.
pub fn check_phi_equals_pi_inverse(alloc: &Allocation, inst: &JInstance) -> Result<bool, WsError> {
    let n = inst.n();
    let ordered = alloc.ordered_pieces();
    if ordered.len() != n {
        return Err(WsError::NotAPartition);
    }
    let mut cursor = Rational::zero();
    for (_, piece) in &ordered {
        if piece.lo() != &cursor {
            return Err(WsError::NotAPartition);
        }
        cursor = piece.hi().clone();
    }
    if cursor != Rational::one() {
        return Err(WsError::NotAPartition);
    }
    let inv = inst.pi_inverse();
    Ok(ordered.iter().enumerate().all(|(idx, (player, _))| inv[idx] == *player))
}

/// Drive a protocol with answers read off a concrete instance. Measures are
/// materialized only if the protocol actually evaluates.
pub fn run_primitive_on_instance<P: PrimitiveProtocol>(
    protocol: &P,
    inst: &JInstance,
) -> Result<PrimitiveOutcome, WsError> {
    let n = inst.n();
    let mut measures: Option<Vec<crate::valuation::PiecewiseMeasure>> = None;
    let mut events: Vec<PrimitiveEvent> = Vec::new();
    let (mut cuts, mut evals) = (0usize, 0usize);
    loop {
        match protocol.next(n, &events)? {
            PrimitiveStep::Cut { player, chunk } => {
                let slot = inst.slot_of(player, chunk);
                let position = inst.point(player, chunk);
                cuts += 1;
                events.push(PrimitiveEvent::Cut { player, chunk, slot, position });
            }
            PrimitiveStep::Eval { player, x } => {
                let measures = measures.get_or_insert_with(|| inst.measures());
                let value = measures[player - 1]
                    .prefix_value(&x)
                    .map_err(|_| WsError::NonPrimitiveEval { x: x.clone() })?;
                evals += 1;
                events.push(PrimitiveEvent::Eval { player, x, value });
            }
            PrimitiveStep::Finish(finish) => {
                return Ok(PrimitiveOutcome { finish, cuts, evals, events });
            }
        }
    }
}

/// Drive a cuts-only protocol against the lazy adversary. Evals are refused:
/// this interface exists exactly for the cuts-only reduction.
pub fn run_primitive_on_adversary<P: PrimitiveProtocol, R: Rng + ?Sized>(
    protocol: &P,
    state: &mut AdversaryState,
    rng: &mut R,
) -> Result<PrimitiveOutcome, WsError> {
    let n = state.n();
    let mut events: Vec<PrimitiveEvent> = Vec::new();
    let mut cuts = 0usize;
    loop {
        match protocol.next(n, &events)? {
            PrimitiveStep::Cut { player, chunk } => {
                let slot = state.cut_slot(player, chunk, rng)?;
                let position = grid_point(n, state.epsilon(), chunk, slot)?;
                cuts += 1;
                events.push(PrimitiveEvent::Cut { player, chunk, slot, position });
            }
            PrimitiveStep::Eval { .. } => return Err(WsError::AdversaryEvalUnsupported),
            PrimitiveStep::Finish(finish) => {
                return Ok(PrimitiveOutcome { finish, cuts, evals: 0, events });
            }
        }
    }
}

/// Drive a primitive protocol through the live referee, then assign the
/// pieces named by its finish specification. Needs the instance epsilon to
/// recover slots from cut answers.
pub fn run_primitive_on_engine<P: PrimitiveProtocol>(
    protocol: &P,
    engine: &mut Engine,
    epsilon: &Rational,
) -> Result<(Allocation, FinishSpec), WsError> {
    let n = engine.n();
    let mut events: Vec<PrimitiveEvent> = Vec::new();
    let fault = |e: crate::engine::EngineError| WsError::ProtocolInconsistency(e.to_string());
    loop {
        match protocol.next(n, &events)? {
            PrimitiveStep::Cut { player, chunk } => {
                let alpha = Rational::new(chunk as i64, n as i64);
                let position = engine.cut(player, &alpha).map_err(fault)?;
                let (c, slot) = slot_of_position(n, epsilon, &position)
                    .ok_or_else(|| WsError::NonPrimitiveEval { x: position.clone() })?;
                if c != chunk {
                    return Err(WsError::ProtocolInconsistency(
                        "cut answer landed outside the queried chunk".into(),
                    ));
                }
                events.push(PrimitiveEvent::Cut { player, chunk, slot, position });
            }
            PrimitiveStep::Eval { player, x } => {
                let value = engine.eval(player, &x).map_err(fault)?;
                events.push(PrimitiveEvent::Eval { player, x, value });
            }
            PrimitiveStep::Finish(finish) => {
                apply_finish(engine, &finish)?;
                let alloc = engine.finalize().map_err(fault)?;
                return Ok((alloc, finish));
            }
        }
    }
}

/// Issue the assigns described by a finish specification.
pub fn apply_finish(engine: &mut Engine, finish: &FinishSpec) -> Result<(), WsError> {
    let n = engine.n();
    if finish.phi.len() != n || finish.boundaries.len() + 1 != n {
        return Err(WsError::BadFinish(format!(
            "need {} pieces and {} boundaries, got {} and {}",
            n,
            n - 1,
            finish.phi.len(),
            finish.boundaries.len()
        )));
    }
    for w in finish.boundaries.windows(2) {
        if w[0] > w[1] {
            return Err(WsError::BadFinish("boundaries must be sorted".into()));
        }
    }
    let fault = |e: crate::engine::EngineError| WsError::ProtocolInconsistency(e.to_string());
    let mut lo = Rational::zero();
    for (k, player) in finish.phi.iter().enumerate() {
        let hi = if k + 1 == n { Rational::one() } else { finish.boundaries[k].clone() };
        engine.assign(*player, &lo, &hi).map_err(fault)?;
        lo = hi;
    }
    Ok(())
}
