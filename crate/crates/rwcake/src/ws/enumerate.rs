//! The uniform distribution over hidden-permutation instances: an offline
//! sampler and an exhaustive (lazy) enumerator usable as its oracle.

use crate::rational::Rational;
use crate::ws::instance::{default_epsilon, ChunkString, JInstance, WsInstance};
use crate::ws::WsError;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Enumeration refuses above this number of players; the instance count is
/// `n! * prod_i (i-1)!(n-i)!`, which is already 9,953,280 at `n = 5`.
pub const ENUM_BOUND: usize = 5;

/// Number of instances with nonzero probability, `n! * prod_i (i-1)!(n-i)!`.
pub fn j_count(n: usize) -> BigInt {
    let mut acc = crate::log3::factorial(n);
    for i in 1..=n {
        acc *= crate::log3::factorial(i - 1) * crate::log3::factorial(n - i);
    }
    acc
}

/// Draw an instance uniformly: a uniform hidden permutation, then per chunk a
/// uniform arrangement of the constrained players on each side of the pivot
/// slot.
pub fn sample_j<R: Rng + ?Sized>(n: usize, epsilon: &Rational, rng: &mut R) -> JInstance {
    assert!(n >= 1);
    let mut pi: Vec<usize> = (1..=n).collect();
    pi.shuffle(rng);
    let mut chunks: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 1..=n {
        let mut row = vec![0usize; n];
        let low: Vec<usize> = (1..=n).filter(|&p| pi[p - 1] < i).collect();
        let high: Vec<usize> = (1..=n).filter(|&p| pi[p - 1] > i).collect();
        let pivot = (1..=n).find(|&p| pi[p - 1] == i).expect("pi is a permutation");
        let mut low_slots: Vec<usize> = (1..i).collect();
        low_slots.shuffle(rng);
        for (p, s) in low.iter().zip(low_slots) {
            row[s - 1] = *p;
        }
        row[i - 1] = pivot;
        let mut high_slots: Vec<usize> = (i + 1..=n).collect();
        high_slots.shuffle(rng);
        for (p, s) in high.iter().zip(high_slots) {
            row[s - 1] = *p;
        }
        chunks.push(row);
    }
    let base = WsInstance::new(epsilon.clone(), ChunkString::new(chunks).expect("rows are permutations"))
        .expect("epsilon validated by caller");
    JInstance::new(base, pi).expect("construction satisfies the subfamily constraints")
}

/// Seeded convenience wrapper with the canonical epsilon.
pub fn sample_j_seeded(n: usize, seed: u64) -> JInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_j(n, &default_epsilon(n), &mut rng)
}

/// Lazily yields every instance with nonzero probability exactly once.
pub fn enumerate_j(n: usize, epsilon: &Rational) -> Result<JEnumerator, WsError> {
    if n > ENUM_BOUND {
        return Err(WsError::EnumerationTooLarge { n, bound: ENUM_BOUND });
    }
    if n == 0 {
        return Err(WsError::IndexOutOfRange { what: "n", got: 0, n: 0 });
    }
    if !crate::ws::instance::epsilon_is_valid(n, epsilon) {
        return Err(WsError::BadEpsilon { epsilon: epsilon.clone(), n });
    }
    Ok(JEnumerator::new(n, epsilon.clone()))
}

/// Iterator over all instances: outer loop over hidden permutations in
/// lexicographic order, inner mixed-radix odometer over the per-chunk
/// arrangements of the low and high player groups.
pub struct JEnumerator {
    n: usize,
    epsilon: Rational,
    perms: Vec<Vec<usize>>,
    pi_idx: usize,
    /// Per chunk: all arrangements of the low players over slots `1..i-1`.
    low_arrangements: Vec<Vec<Vec<usize>>>,
    /// Per chunk: all arrangements of the high players over slots `i+1..n`.
    high_arrangements: Vec<Vec<Vec<usize>>>,
    /// Odometer digits: 2 per chunk (low index, high index).
    digits: Vec<usize>,
    exhausted: bool,
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (idx, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(idx);
        for mut tail in permutations_of(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

impl JEnumerator {
    fn new(n: usize, epsilon: Rational) -> Self {
        let perms = permutations_of(&(1..=n).collect::<Vec<_>>());
        let mut e = JEnumerator {
            n,
            epsilon,
            perms,
            pi_idx: 0,
            low_arrangements: Vec::new(),
            high_arrangements: Vec::new(),
            digits: vec![0; 2 * n],
            exhausted: false,
        };
        e.rebuild_arrangements();
        e
    }

    fn rebuild_arrangements(&mut self) {
        let pi = &self.perms[self.pi_idx];
        self.low_arrangements.clear();
        self.high_arrangements.clear();
        for i in 1..=self.n {
            let low: Vec<usize> = (1..=self.n).filter(|&p| pi[p - 1] < i).collect();
            let high: Vec<usize> = (1..=self.n).filter(|&p| pi[p - 1] > i).collect();
            self.low_arrangements.push(permutations_of(&low));
            self.high_arrangements.push(permutations_of(&high));
        }
        self.digits.iter_mut().for_each(|d| *d = 0);
    }

    fn current_instance(&self) -> JInstance {
        let pi = self.perms[self.pi_idx].clone();
        let n = self.n;
        let mut chunks = Vec::with_capacity(n);
        for i in 1..=n {
            let mut row = vec![0usize; n];
            let low = &self.low_arrangements[i - 1][self.digits[2 * (i - 1)]];
            let high = &self.high_arrangements[i - 1][self.digits[2 * (i - 1) + 1]];
            for (j, &p) in low.iter().enumerate() {
                row[j] = p; // slots 1..i-1
            }
            row[i - 1] = (1..=n).find(|&p| pi[p - 1] == i).expect("pi is a permutation");
            for (j, &p) in high.iter().enumerate() {
                row[i + j] = p; // slots i+1..n
            }
            chunks.push(row);
        }
        // Construction places each group on its own slot range, so the
        // subfamily constraints hold without re-validation; epsilon was
        // checked once up front. Keeps the n=5 stream (10M instances) cheap.
        JInstance::new_unchecked(
            WsInstance::new_unchecked(self.epsilon.clone(), ChunkString::new_unchecked(chunks)),
            pi,
        )
    }

    fn advance(&mut self) {
        // Mixed-radix increment, least-significant digit last.
        for d in (0..self.digits.len()).rev() {
            let radix = if d % 2 == 0 {
                self.low_arrangements[d / 2].len()
            } else {
                self.high_arrangements[d / 2].len()
            };
            self.digits[d] += 1;
            if self.digits[d] < radix {
                return;
            }
            self.digits[d] = 0;
        }
        self.pi_idx += 1;
        if self.pi_idx >= self.perms.len() {
            self.exhausted = true;
        } else {
            self.rebuild_arrangements();
        }
    }
}

impl Iterator for JEnumerator {
    type Item = JInstance;

    fn next(&mut self) -> Option<JInstance> {
        if self.exhausted {
            return None;
        }
        let inst = self.current_instance();
        self.advance();
        Some(inst)
    }
}
