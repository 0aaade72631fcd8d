//! The lazy adaptive adversary.
//!
//! The adversary samples a hidden permutation up front and places grid points
//! only when a cut query forces it to, choosing uniformly among the slots
//! still valid for the player's constraint class. Conditioned on any
//! transcript, the completed instance is distributed exactly like the offline
//! sampler; [`exact_instance_distribution`] verifies that claim by exhaustive
//! branch-probability bookkeeping.

use crate::rational::Rational;
use crate::ws::instance::{epsilon_is_valid, ChunkString, JInstance, WsInstance};
use crate::ws::{grid_point, WsError};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;

/// Single-owner mutable state for one protocol run.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    epsilon: Rational,
    pi: Vec<usize>,
    /// `placed[p-1][i-1]` = slot of player `p`'s point in chunk `i`, if placed.
    placed: Vec<Vec<Option<usize>>>,
    /// `taken[i-1][k-1]` = slot `k` of chunk `i` is occupied.
    taken: Vec<Vec<bool>>,
}

impl AdversaryState {
    /// Sample the hidden permutation uniformly; nothing is placed yet.
    pub fn new<R: Rng + ?Sized>(n: usize, epsilon: &Rational, rng: &mut R) -> Result<Self, WsError> {
        let mut pi: Vec<usize> = (1..=n).collect();
        pi.shuffle(rng);
        Self::with_pi(epsilon, pi)
    }

    /// Fixed hidden permutation, for exact traversals.
    pub fn with_pi(epsilon: &Rational, pi: Vec<usize>) -> Result<Self, WsError> {
        let n = pi.len();
        let mut seen = vec![false; n + 1];
        for &v in &pi {
            if v < 1 || v > n || seen[v] {
                return Err(WsError::NotAPermutation { what: "pi", n });
            }
            seen[v] = true;
        }
        if !epsilon_is_valid(n, epsilon) {
            return Err(WsError::BadEpsilon { epsilon: epsilon.clone(), n });
        }
        Ok(AdversaryState {
            epsilon: epsilon.clone(),
            pi,
            placed: vec![vec![None; n]; n],
            taken: vec![vec![false; n]; n],
        })
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn placed_slot(&self, player: usize, chunk: usize) -> Option<usize> {
        self.placed[player - 1][chunk - 1]
    }

    /// Slots still valid for player `p`'s point in chunk `i`, given the
    /// hidden permutation's constraint class and current occupancy.
    pub fn valid_slots(&self, player: usize, chunk: usize) -> Vec<usize> {
        let n = self.n();
        let v = self.pi[player - 1];
        let range: Box<dyn Iterator<Item = usize>> = match v.cmp(&chunk) {
            std::cmp::Ordering::Less => Box::new(1..chunk),
            std::cmp::Ordering::Equal => Box::new(chunk..=chunk),
            std::cmp::Ordering::Greater => Box::new(chunk + 1..=n),
        };
        range.filter(|&k| !self.taken[chunk - 1][k - 1]).collect()
    }

    /// Commit player `p`'s chunk-`i` point to a slot. The slot must be one of
    /// [`Self::valid_slots`].
    pub fn place(&mut self, player: usize, chunk: usize, slot: usize) -> Result<(), WsError> {
        if !self.valid_slots(player, chunk).contains(&slot) {
            return Err(WsError::SlotUnavailable { chunk, slot });
        }
        self.placed[player - 1][chunk - 1] = Some(slot);
        self.taken[chunk - 1][slot - 1] = true;
        Ok(())
    }

    /// Answer a primitive cut: return the (possibly fresh) slot of the
    /// player's chunk-`i` point. Repeat queries return the stored slot and
    /// reveal nothing new.
    pub fn cut_slot<R: Rng + ?Sized>(&mut self, player: usize, chunk: usize, rng: &mut R) -> Result<usize, WsError> {
        let n = self.n();
        if player < 1 || player > n {
            return Err(WsError::IndexOutOfRange { what: "player", got: player, n });
        }
        if chunk < 1 || chunk > n {
            return Err(WsError::IndexOutOfRange { what: "chunk", got: chunk, n });
        }
        if let Some(slot) = self.placed[player - 1][chunk - 1] {
            return Ok(slot);
        }
        let options = self.valid_slots(player, chunk);
        debug_assert!(!options.is_empty(), "a valid slot always remains");
        let slot = options[rng.random_range(0..options.len())];
        self.place(player, chunk, slot)?;
        Ok(slot)
    }

    /// Position-level cut API: `alpha` must be exactly `i/n` for some
    /// `i in 1..=n`; anything else is refused. This is the enforcement point
    /// that keeps the adversary usable only by cuts-only primitive protocols.
    pub fn cut_position<R: Rng + ?Sized>(&mut self, player: usize, alpha: &Rational, rng: &mut R) -> Result<Rational, WsError> {
        let chunk = primitive_chunk_of_alpha(self.n(), alpha)
            .ok_or_else(|| WsError::NonPrimitiveCut { alpha: alpha.clone() })?;
        let slot = self.cut_slot(player, chunk, rng)?;
        grid_point(self.n(), &self.epsilon, chunk, slot)
    }

    /// Unplaced points in the canonical completion order: chunks left to
    /// right, players ascending within a chunk.
    pub fn next_unplaced(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for chunk in 1..=n {
            for player in 1..=n {
                if self.placed[player - 1][chunk - 1].is_none() {
                    return Some((player, chunk));
                }
            }
        }
        None
    }

    pub fn is_complete(&self) -> bool {
        self.next_unplaced().is_none()
    }

    /// Uniformly place everything still missing and return the full instance.
    /// A no-op (beyond conversion) when all points were already queried.
    pub fn finalize<R: Rng + ?Sized>(mut self, rng: &mut R) -> JInstance {
        while let Some((player, chunk)) = self.next_unplaced() {
            let options = self.valid_slots(player, chunk);
            debug_assert!(!options.is_empty());
            let slot = options[rng.random_range(0..options.len())];
            self.place(player, chunk, slot).expect("slot drawn from valid set");
        }
        self.into_instance().expect("complete state forms a valid instance")
    }

    /// Convert a fully placed state into an instance.
    pub fn into_instance(self) -> Result<JInstance, WsError> {
        let n = self.n();
        let mut chunks = vec![vec![0usize; n]; n];
        for player in 1..=n {
            for chunk in 1..=n {
                let slot = self.placed[player - 1][chunk - 1]
                    .ok_or(WsError::SlotUnavailable { chunk, slot: 0 })?;
                chunks[chunk - 1][slot - 1] = player;
            }
        }
        let base = WsInstance::new(self.epsilon, ChunkString::new(chunks)?)?;
        JInstance::new(base, self.pi)
    }
}

/// `alpha == i/n` for integer `i in 1..=n`? Returns the chunk index.
pub fn primitive_chunk_of_alpha(n: usize, alpha: &Rational) -> Option<usize> {
    use num_traits::ToPrimitive;
    let scaled = alpha * &Rational::from(n);
    if !scaled.is_integer() {
        return None;
    }
    let i = scaled.numer().to_usize()?;
    if (1..=n).contains(&i) {
        Some(i)
    } else {
        None
    }
}

/// Exhaustively traverse the adversary against a fixed query order, branching
/// over the hidden permutation and every uniform placement choice (including
/// the finalize completions), and return each complete instance with its
/// exact probability. Queries already answered contribute no branching.
pub fn exact_instance_distribution(
    n: usize,
    epsilon: &Rational,
    query_order: &[(usize, usize)],
) -> Result<BTreeMap<JInstance, Rational>, WsError> {
    let mut out = BTreeMap::new();
    let perms = all_permutations(n);
    let pi_prob = Rational::one() / Rational::from(perms.len());
    for pi in perms {
        let state = AdversaryState::with_pi(epsilon, pi)?;
        explore(state, query_order, pi_prob.clone(), &mut out)?;
    }
    Ok(out)
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
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

fn explore(
    state: AdversaryState,
    queries: &[(usize, usize)],
    prob: Rational,
    out: &mut BTreeMap<JInstance, Rational>,
) -> Result<(), WsError> {
    // Next forced placement: the first pending query, else the canonical
    // finalize order.
    if let Some((&(player, chunk), rest)) = queries.split_first() {
        if state.placed_slot(player, chunk).is_some() {
            return explore(state, rest, prob, out);
        }
        let options = state.valid_slots(player, chunk);
        let branch = &prob / &Rational::from(options.len());
        for slot in options {
            let mut child = state.clone();
            child.place(player, chunk, slot)?;
            explore(child, rest, branch.clone(), out)?;
        }
        return Ok(());
    }
    if let Some((player, chunk)) = state.next_unplaced() {
        let options = state.valid_slots(player, chunk);
        let branch = &prob / &Rational::from(options.len());
        for slot in options {
            let mut child = state.clone();
            child.place(player, chunk, slot)?;
            explore(child, queries, branch.clone(), out)?;
        }
        return Ok(());
    }
    let inst = state.into_instance()?;
    *out.entry(inst).or_insert_with(Rational::zero) += prob;
    Ok(())
}
