//! Grid points, chunk strings and instance measures.
//!
//! For each `i` in `1..=n`, chunk `i` is the set of `n` grid points
//! `i/(n+1) + k*eps` for `k` in `1..=n`. An instance places each player's
//! `i/n`-point on a distinct point of chunk `i`; the player's measure
//! concentrates mass `i/(n^2+n)` immediately left and `(n-i)/(n^2+n)`
//! immediately right of that point, realized as the two halves of a segment
//! of total length `eps` centered on it.
//!
//! Those masses alone sum to `n/(n+1)` per player, leaving every prefix short
//! of the nominal `i/n` values. A filler segment of mass `1/(n+1)` on
//! `[0, 1/(n+1)]` restores normalization and makes the cumulative value at
//! the `i/n`-point exactly `i/n`; any placement left of the first chunk works,
//! and this one is the canonical choice.

use crate::rational::Rational;
use crate::valuation::{Interval, PiecewiseMeasure, Segment};
use crate::ws::WsError;
use serde::{Deserialize, Serialize};

/// Canonical epsilon: `1/(2n^4)`.
pub fn default_epsilon(n: usize) -> Rational {
    let n = n as i64;
    Rational::new(1, 2 * n * n * n * n)
}

pub(crate) fn epsilon_is_valid(n: usize, epsilon: &Rational) -> bool {
    if epsilon <= &Rational::zero() {
        return false;
    }
    let n_i = n as i64;
    // Strictly below 1/n^4, and the last chunk must stay inside the cake.
    epsilon < &Rational::new(1, n_i * n_i * n_i * n_i)
        && &(Rational::from(n) * epsilon) <= &Rational::new(1, n_i + 1)
}

/// The `k`-th point of chunk `i`: `i/(n+1) + k*eps`.
pub fn grid_point(n: usize, epsilon: &Rational, i: usize, k: usize) -> Result<Rational, WsError> {
    if i < 1 || i > n {
        return Err(WsError::IndexOutOfRange { what: "chunk", got: i, n });
    }
    if k < 1 || k > n {
        return Err(WsError::IndexOutOfRange { what: "slot", got: k, n });
    }
    if !epsilon_is_valid(n, epsilon) {
        return Err(WsError::BadEpsilon { epsilon: epsilon.clone(), n });
    }
    Ok(Rational::new(i as i64, n as i64 + 1) + Rational::from(k) * epsilon)
}

/// The combinatorial skeleton of an instance: one permutation per chunk,
/// `chunks[i-1][k-1]` being the player whose `i/n`-point sits on slot `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChunkString {
    chunks: Vec<Vec<usize>>,
}

fn is_permutation(v: &[usize], n: usize) -> bool {
    if v.len() != n {
        return false;
    }
    let mut seen = vec![false; n + 1];
    for &p in v {
        if p < 1 || p > n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

impl ChunkString {
    pub fn new(chunks: Vec<Vec<usize>>) -> Result<Self, WsError> {
        let n = chunks.len();
        if n == 0 {
            return Err(WsError::IndexOutOfRange { what: "n", got: 0, n: 0 });
        }
        for c in &chunks {
            if !is_permutation(c, n) {
                return Err(WsError::NotAPermutation { what: "chunk", n });
            }
        }
        Ok(ChunkString { chunks })
    }

    /// Correct-by-construction fast path for the enumerator.
    pub(crate) fn new_unchecked(chunks: Vec<Vec<usize>>) -> Self {
        ChunkString { chunks }
    }

    pub fn n(&self) -> usize {
        self.chunks.len()
    }

    pub fn chunks(&self) -> &[Vec<usize>] {
        &self.chunks
    }

    /// Slot (1-based) of player `p`'s point in chunk `i`.
    pub fn slot_of(&self, player: usize, chunk: usize) -> usize {
        let row = &self.chunks[chunk - 1];
        row.iter().position(|&q| q == player).expect("chunk rows are permutations") + 1
    }

    /// `slots[p-1][i-1]` = slot of player `p` in chunk `i`, in one pass.
    pub fn slot_table(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut slots = vec![vec![0usize; n]; n];
        for (i, row) in self.chunks.iter().enumerate() {
            for (k, &p) in row.iter().enumerate() {
                slots[p - 1][i] = k + 1;
            }
        }
        slots
    }
}

/// A full instance: `n` players, an epsilon, and every player's grid point
/// per chunk (encoded as the chunk string).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WsInstance {
    epsilon: Rational,
    chunks: ChunkString,
}

impl WsInstance {
    pub fn new(epsilon: Rational, chunks: ChunkString) -> Result<Self, WsError> {
        if !epsilon_is_valid(chunks.n(), &epsilon) {
            return Err(WsError::BadEpsilon { epsilon, n: chunks.n() });
        }
        Ok(WsInstance { epsilon, chunks })
    }

    pub(crate) fn new_unchecked(epsilon: Rational, chunks: ChunkString) -> Self {
        WsInstance { epsilon, chunks }
    }

    pub fn n(&self) -> usize {
        self.chunks.n()
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn chunks(&self) -> &ChunkString {
        &self.chunks
    }

    pub fn slot_of(&self, player: usize, chunk: usize) -> usize {
        self.chunks.slot_of(player, chunk)
    }

    /// Player `p`'s `i/n`-point.
    pub fn point(&self, player: usize, chunk: usize) -> Rational {
        grid_point(self.n(), &self.epsilon, chunk, self.slot_of(player, chunk))
            .expect("instance indices are validated")
    }

    /// The player's private measure; see the module docs for the layout.
    pub fn measure(&self, player: usize) -> PiecewiseMeasure {
        build_measure(self, player)
    }

    pub fn measures(&self) -> Vec<PiecewiseMeasure> {
        (1..=self.n()).map(|p| self.measure(p)).collect()
    }
}

/// An instance from the hidden-permutation subfamily: `pi(p) = i` pins player
/// `p`'s `i/n`-point to the `i`-th slot of chunk `i`; smaller values sit left
/// of it, larger values right of it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "JInstanceRepr", into = "JInstanceRepr")]
pub struct JInstance {
    base: WsInstance,
    pi: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct JInstanceRepr {
    n: usize,
    epsilon: Rational,
    pi: Vec<usize>,
    chunks: Vec<Vec<usize>>,
}

impl TryFrom<JInstanceRepr> for JInstance {
    type Error = WsError;
    fn try_from(r: JInstanceRepr) -> Result<Self, Self::Error> {
        let chunks = ChunkString::new(r.chunks)?;
        if chunks.n() != r.n {
            return Err(WsError::IndexOutOfRange { what: "n", got: r.n, n: chunks.n() });
        }
        JInstance::new(WsInstance::new(r.epsilon, chunks)?, r.pi)
    }
}

impl From<JInstance> for JInstanceRepr {
    fn from(j: JInstance) -> Self {
        JInstanceRepr {
            n: j.base.n(),
            epsilon: j.base.epsilon.clone(),
            pi: j.pi,
            chunks: j.base.chunks.chunks,
        }
    }
}

impl JInstance {
    pub fn new(base: WsInstance, pi: Vec<usize>) -> Result<Self, WsError> {
        let n = base.n();
        if !is_permutation(&pi, n) {
            return Err(WsError::NotAPermutation { what: "pi", n });
        }
        for p in 1..=n {
            let v = pi[p - 1];
            for i in 1..=n {
                let slot = base.slot_of(p, i);
                let ok = match v.cmp(&i) {
                    std::cmp::Ordering::Less => slot < i,
                    std::cmp::Ordering::Equal => slot == i,
                    std::cmp::Ordering::Greater => slot > i,
                };
                if !ok {
                    return Err(WsError::ConstraintViolation { player: p, chunk: i });
                }
            }
        }
        Ok(JInstance { base, pi })
    }

    pub(crate) fn new_unchecked(base: WsInstance, pi: Vec<usize>) -> Self {
        JInstance { base, pi }
    }

    pub fn base(&self) -> &WsInstance {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn epsilon(&self) -> &Rational {
        &self.base.epsilon
    }

    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    /// `pi_inverse[i-1]` = the player `p` with `pi(p) = i`.
    pub fn pi_inverse(&self) -> Vec<usize> {
        let n = self.n();
        let mut inv = vec![0usize; n];
        for p in 1..=n {
            inv[self.pi[p - 1] - 1] = p;
        }
        inv
    }

    pub fn slot_of(&self, player: usize, chunk: usize) -> usize {
        self.base.slot_of(player, chunk)
    }

    pub fn point(&self, player: usize, chunk: usize) -> Rational {
        self.base.point(player, chunk)
    }

    pub fn measure(&self, player: usize) -> PiecewiseMeasure {
        self.base.measure(player)
    }

    pub fn measures(&self) -> Vec<PiecewiseMeasure> {
        self.base.measures()
    }
}

/// Build the player's measure from its grid points. Segment overlap cannot
/// occur for a valid epsilon; the measure constructor still verifies it.
pub fn build_measure(inst: &WsInstance, player: usize) -> PiecewiseMeasure {
    let n = inst.n();
    let n_i = n as i64;
    let half = inst.epsilon() / &Rational::from_integer(2);
    let chunk_mass_denom = n_i * n_i + n_i;
    let mut segments = Vec::with_capacity(2 * n + 1);
    // Filler: mass 1/(n+1) on [0, 1/(n+1)].
    segments.push(
        Segment::new(
            Interval::new(Rational::zero(), Rational::new(1, n_i + 1)).unwrap(),
            Rational::new(1, n_i + 1),
        )
        .unwrap(),
    );
    for i in 1..=n {
        let x = inst.point(player, i);
        let left_mass = Rational::new(i as i64, chunk_mass_denom);
        segments.push(
            Segment::new(Interval::new(&x - &half, x.clone()).unwrap(), left_mass).unwrap(),
        );
        if i < n {
            let right_mass = Rational::new(n_i - i as i64, chunk_mass_denom);
            segments.push(
                Segment::new(Interval::new(x.clone(), &x + &half).unwrap(), right_mass).unwrap(),
            );
        }
        // i == n: the right mass is zero and zero-use segments are not stored.
    }
    let m = PiecewiseMeasure::new(segments).expect("instance measures are well-formed");
    #[cfg(debug_assertions)]
    for i in 1..=n {
        let x = inst.point(player, i);
        let alpha = Rational::new(i as i64, n_i);
        debug_assert_eq!(m.alpha_point(&alpha).unwrap(), x);
        debug_assert_eq!(m.prefix_value(&x).unwrap(), alpha);
    }
    m
}
