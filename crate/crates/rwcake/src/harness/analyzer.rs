//! Exact decision-tree analysis of cuts-only primitive strategies.
//!
//! The traversal walks the strategy's interaction tree against the lazy
//! adversary, branching over every answer with its exact conditional
//! probability. Two independent routes track the hidden permutation: set
//! filtering by the answer trichotomies, and per-permutation reach weights
//! accumulated from the adversary's uniform-choice factors. At every node
//! the two supports must agree, the weights must be uniform across the
//! surviving permutations, the children's reach probabilities must sum to
//! the parent's, and the subtree's expected node count must dominate
//! `log3(N) + 1`. Any violation aborts with a counterexample.

use crate::log3::{cmp_with_log3_int, factorial, log3_plus_offset_decimal};
use crate::rational::Rational;
use crate::ws::{grid_point, FinishSpec, PrimitiveEvent, PrimitiveProtocol, PrimitiveStep, WsError};
use num_bigint::BigInt;
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("strategy issued an eval; the analyzer serves cuts-only primitive protocols")]
    EvalRefused,
    #[error("strategy is unfair: {0}")]
    Unfair(String),
    #[error("posterior over consistent permutations is not uniform at depth {depth}: {detail}")]
    NonUniformPosterior { depth: usize, detail: String },
    #[error("weight support disagrees with trichotomy filtering at depth {depth}")]
    SupportMismatch { depth: usize },
    #[error("children's reach probabilities sum to {got}, parent has {expected}")]
    ConservationViolation { got: Rational, expected: Rational },
    #[error("expected subtree node count {nodes} falls below log3({n_consistent}) + 1")]
    DepthBoundViolation { nodes: Rational, n_consistent: usize },
    #[error(transparent)]
    Ws(#[from] WsError),
}

/// A state of the traversal, exposed to node visitors and reusable for
/// posterior checks on externally constructed weightings.
#[derive(Debug, Clone)]
pub struct AnalysisNode {
    /// Permutations still consistent with every answer on the path.
    pub consistent_pis: Vec<Vec<usize>>,
    /// `P(pi and reaching this node)` for each consistent permutation,
    /// in the same order as `consistent_pis`.
    pub pi_weights: Vec<Rational>,
    /// Occupied slots per chunk.
    pub occupancy: Vec<Vec<bool>>,
    /// Probability of reaching this node.
    pub reach_probability: Rational,
    /// Cuts issued on the path (node-count depth is this plus one).
    pub depth: usize,
}

/// Uniform posterior: every consistent permutation carries the same
/// conditional probability, computed exactly from the joint weights.
pub fn check_uniform_posterior(node: &AnalysisNode) -> bool {
    let mut nonzero = node.pi_weights.iter().filter(|w| !w.is_zero());
    match nonzero.next() {
        None => false,
        Some(first) => nonzero.all(|w| w == first),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub strategy: String,
    pub n: usize,
    /// Exact expected number of cuts under the uniform instance distribution.
    pub expected_cuts: Rational,
    /// Node-count convention: expected cuts plus one.
    pub expected_nodes: Rational,
    /// `expected_cuts >= log3(n!)`, certified by integer-interval comparison.
    pub meets_bound: bool,
    /// `log3(n!) + 1` rendered to 12 fractional digits.
    pub bound_decimal: String,
    pub nodes_checked: usize,
    pub leaves: usize,
    pub max_depth: usize,
    /// True when the traversal completed; it aborts on any violation, so a
    /// report in hand means every per-node check passed.
    pub uniform_posterior_verified: bool,
}

pub fn exact_expected_depth<P: PrimitiveProtocol>(
    strategy: &P,
    n: usize,
    epsilon: &Rational,
) -> Result<AnalysisReport, AnalyzeError> {
    exact_expected_depth_with_visitor(strategy, n, epsilon, &mut |_| {})
}

pub fn exact_expected_depth_with_visitor<P: PrimitiveProtocol>(
    strategy: &P,
    n: usize,
    epsilon: &Rational,
    visit: &mut dyn FnMut(&AnalysisNode),
) -> Result<AnalysisReport, AnalyzeError> {
    let perms = permutations(n);
    let uniform = Rational::one() / Rational::from(perms.len());
    let mut traversal = Traversal {
        strategy,
        n,
        epsilon: epsilon.clone(),
        perms,
        events: Vec::new(),
        stats: Stats::default(),
        visit,
    };
    let root = State {
        weights: vec![uniform; traversal.perms.len()],
        occupancy: vec![vec![false; n]; n],
        placed: vec![vec![None; n]; n],
        reach: Rational::one(),
        depth: 0,
    };
    let expected_cuts = traversal.node(root)?;
    let expected_nodes = &expected_cuts + &Rational::one();
    let meets_bound = cmp_with_log3_int(&expected_cuts, &factorial(n)) != Ordering::Less;
    Ok(AnalysisReport {
        strategy: strategy.name().to_string(),
        n,
        expected_cuts,
        expected_nodes,
        meets_bound,
        bound_decimal: log3_plus_offset_decimal(&factorial(n), 1, 12),
        nodes_checked: traversal.stats.nodes,
        leaves: traversal.stats.leaves,
        max_depth: traversal.stats.max_depth,
        uniform_posterior_verified: true,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (idx, &head) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(idx);
            for mut tail in rec(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    rec(&(1..=n).collect::<Vec<_>>())
}

#[derive(Default)]
struct Stats {
    nodes: usize,
    leaves: usize,
    max_depth: usize,
}

#[derive(Clone)]
struct State {
    /// Joint probability `P(pi and reach)` per permutation index.
    weights: Vec<Rational>,
    occupancy: Vec<Vec<bool>>,
    /// `placed[p-1][i-1]`: slot revealed for player p's chunk-i point.
    placed: Vec<Vec<Option<usize>>>,
    reach: Rational,
    depth: usize,
}

struct Traversal<'a, P: PrimitiveProtocol> {
    strategy: &'a P,
    n: usize,
    epsilon: Rational,
    perms: Vec<Vec<usize>>,
    events: Vec<PrimitiveEvent>,
    stats: Stats,
    visit: &'a mut dyn FnMut(&AnalysisNode),
}

impl<P: PrimitiveProtocol> Traversal<'_, P> {
    /// Process one node; returns the exact expected number of cuts in its
    /// subtree.
    fn node(&mut self, state: State) -> Result<Rational, AnalyzeError> {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(state.depth);
        let consistent = self.consistent_indices(&state);
        self.verify_node(&state, &consistent)?;

        let step = self.strategy.next(self.n, &self.events)?;
        let expected = match step {
            PrimitiveStep::Eval { .. } => return Err(AnalyzeError::EvalRefused),
            PrimitiveStep::Finish(spec) => {
                self.stats.leaves += 1;
                self.leaf(&state, &consistent, &spec)?;
                Rational::zero()
            }
            PrimitiveStep::Cut { player, chunk } => {
                let subtotal = self.branch(&state, &consistent, player, chunk)?;
                Rational::one() + subtotal / &state.reach
            }
        };
        // Expected node count of this subtree dominates log3(N) + 1;
        // equivalently expected cuts dominate log3(N).
        let n_consistent = consistent.len();
        if cmp_with_log3_int(&expected, &BigInt::from(n_consistent)) == Ordering::Less {
            return Err(AnalyzeError::DepthBoundViolation {
                nodes: &expected + &Rational::one(),
                n_consistent,
            });
        }
        Ok(expected)
    }

    /// Weighted sum over children of `reach_child * expected_cuts_child`.
    fn branch(
        &mut self,
        state: &State,
        consistent: &[usize],
        player: usize,
        chunk: usize,
    ) -> Result<Rational, AnalyzeError> {
        let _ = consistent;
        if let Some(slot) = state.placed[player - 1][chunk - 1] {
            // Repeat cut: deterministic answer, no information, still a query.
            let child = self.child_state(state, player, chunk, slot, None);
            self.push_event(player, chunk, slot);
            let e = self.node(child)?;
            self.events.pop();
            return Ok(&state.reach * e);
        }
        let free_low: Vec<usize> =
            (1..chunk).filter(|&k| !state.occupancy[chunk - 1][k - 1]).collect();
        let free_high: Vec<usize> =
            (chunk + 1..=self.n).filter(|&k| !state.occupancy[chunk - 1][k - 1]).collect();
        let mut total = Rational::zero();
        let mut reach_sum = Rational::zero();
        let mut answer =
            |traversal: &mut Self, slot: usize, class: Ordering, divisor: usize| -> Result<(), AnalyzeError> {
                let child = traversal.child_state(state, player, chunk, slot, Some((class, divisor)));
                if child.reach.is_zero() {
                    return Ok(());
                }
                reach_sum += &child.reach;
                let reach = child.reach.clone();
                traversal.push_event(player, chunk, slot);
                let e = traversal.node(child)?;
                traversal.events.pop();
                total += reach * e;
                Ok(())
            };
        // The pivot answer: the player's hidden value equals the chunk index.
        if !state.occupancy[chunk - 1][chunk - 1] {
            answer(self, chunk, Ordering::Equal, 1)?;
        }
        for &slot in &free_low {
            answer(self, slot, Ordering::Less, free_low.len())?;
        }
        for &slot in &free_high {
            answer(self, slot, Ordering::Greater, free_high.len())?;
        }
        if reach_sum != state.reach {
            return Err(AnalyzeError::ConservationViolation {
                got: reach_sum,
                expected: state.reach.clone(),
            });
        }
        Ok(total)
    }

    /// Weight update for one answer: permutations in the matching trichotomy
    /// class keep their weight scaled by the adversary's uniform-choice
    /// factor; every other permutation drops to zero.
    fn child_state(
        &self,
        state: &State,
        player: usize,
        chunk: usize,
        slot: usize,
        class: Option<(Ordering, usize)>,
    ) -> State {
        let mut child = state.clone();
        child.depth += 1;
        child.placed[player - 1][chunk - 1] = Some(slot);
        child.occupancy[chunk - 1][slot - 1] = true;
        if let Some((class, divisor)) = class {
            let factor = Rational::one() / Rational::from(divisor);
            let mut reach = Rational::zero();
            for idx in 0..self.perms.len() {
                if child.weights[idx].is_zero() {
                    continue;
                }
                let v = self.perms[idx][player - 1];
                if v.cmp(&chunk) == class {
                    child.weights[idx] = &child.weights[idx] * &factor;
                    reach += &child.weights[idx];
                } else {
                    child.weights[idx] = Rational::zero();
                }
            }
            child.reach = reach;
        }
        child
    }

    fn push_event(&mut self, player: usize, chunk: usize, slot: usize) {
        let position = grid_point(self.n, &self.epsilon, chunk, slot)
            .expect("analyzer uses validated grid coordinates");
        self.events.push(PrimitiveEvent::Cut { player, chunk, slot, position });
    }

    /// Permutations consistent with the placements by trichotomy filtering:
    /// the route independent of the weight bookkeeping.
    fn consistent_indices(&self, state: &State) -> Vec<usize> {
        (0..self.perms.len())
            .filter(|&idx| {
                let pi = &self.perms[idx];
                (1..=self.n).all(|p| {
                    (1..=self.n).all(|i| match state.placed[p - 1][i - 1] {
                        None => true,
                        Some(slot) => slot.cmp(&i) == pi[p - 1].cmp(&i),
                    })
                })
            })
            .collect()
    }

    fn verify_node(&mut self, state: &State, consistent: &[usize]) -> Result<(), AnalyzeError> {
        let support: Vec<usize> =
            (0..self.perms.len()).filter(|&i| !state.weights[i].is_zero()).collect();
        if support != consistent {
            return Err(AnalyzeError::SupportMismatch { depth: state.depth });
        }
        let node = AnalysisNode {
            consistent_pis: consistent.iter().map(|&i| self.perms[i].clone()).collect(),
            pi_weights: consistent.iter().map(|&i| state.weights[i].clone()).collect(),
            occupancy: state.occupancy.clone(),
            reach_probability: state.reach.clone(),
            depth: state.depth,
        };
        if !check_uniform_posterior(&node) {
            return Err(AnalyzeError::NonUniformPosterior {
                depth: state.depth,
                detail: format!(
                    "weights {:?} over {:?}",
                    node.pi_weights, node.consistent_pis
                ),
            });
        }
        (self.visit)(&node);
        Ok(())
    }

    /// Leaf checks: a fair strategy must have pinned the permutation down to
    /// one candidate and assign piece `i` to the player with hidden value `i`.
    fn leaf(
        &self,
        state: &State,
        consistent: &[usize],
        spec: &FinishSpec,
    ) -> Result<(), AnalyzeError> {
        if consistent.len() != 1 {
            return Err(AnalyzeError::Unfair(format!(
                "terminated with {} consistent permutations at depth {}",
                consistent.len(),
                state.depth
            )));
        }
        let pi = &self.perms[consistent[0]];
        let mut pi_inverse = vec![0usize; self.n];
        for p in 1..=self.n {
            pi_inverse[pi[p - 1] - 1] = p;
        }
        if spec.phi != pi_inverse {
            return Err(AnalyzeError::Unfair(format!(
                "assignment {:?} differs from the inverse permutation {:?}",
                spec.phi, pi_inverse
            )));
        }
        if spec.boundaries.len() + 1 != self.n {
            return Err(AnalyzeError::Unfair(format!(
                "{} boundaries for {} pieces",
                spec.boundaries.len(),
                self.n
            )));
        }
        Ok(())
    }
}
