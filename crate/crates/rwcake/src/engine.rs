//! The query referee.
//!
//! An [`Engine`] owns the players' hidden measures and answers Cut/Eval
//! queries exactly, enforcing query legality: Eval arguments and Assign
//! endpoints must be 0, 1, or the answer of an earlier Cut. In
//! [`EngineMode::WoegingerSgall`] each player may be assigned one subinterval
//! only, and finalization checks that the pieces partition the cake exactly.
//!
//! A protocol fault (illegal query) aborts the run; it is a different failure
//! from an unfair-but-legal outcome, which only shows up in
//! [`check_proportional`].

use crate::rational::Rational;
use crate::valuation::{Interval, PiecewiseMeasure};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("player {player} out of range 1..={n}")]
    PlayerOutOfRange { player: usize, n: usize },
    #[error("cut argument {alpha} outside [0, 1]")]
    AlphaOutOfRange { alpha: Rational },
    #[error("point {x} is not 0, 1, or a previous cut answer")]
    UnregisteredPoint { x: Rational },
    #[error("player {player} already holds a piece (single-subinterval mode)")]
    DuplicateAssign { player: usize },
    #[error("assign endpoints out of order: [{lo}, {hi})")]
    BadPiece { lo: Rational, hi: Rational },
    #[error("player {player} received no piece")]
    MissingAssignment { player: usize },
    #[error("pieces overlap at {at}")]
    Overlap { at: Rational },
    #[error("pieces leave a gap starting at {at}")]
    CoverageGap { at: Rational },
    #[error("transcript counters disagree with the record list")]
    CounterMismatch,
}

/// Whether the single-subinterval restriction is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineMode {
    Unrestricted,
    WoegingerSgall,
}

/// One issued query with its exact answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QueryRecord {
    Cut { player: usize, alpha: Rational, answer: Rational },
    Eval { player: usize, x: Rational, answer: Rational },
    Assign { player: usize, lo: Rational, hi: Rational },
}

/// Ordered query record with counters; the unit of query accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<QueryRecord>,
    pub cuts: usize,
    pub evals: usize,
    pub assigns: usize,
}

impl Transcript {
    /// (cuts, evals) counters.
    pub fn query_counts(&self) -> (usize, usize) {
        (self.cuts, self.evals)
    }

    pub fn total_queries(&self) -> usize {
        self.cuts + self.evals
    }

    fn push(&mut self, rec: QueryRecord) {
        match rec {
            QueryRecord::Cut { .. } => self.cuts += 1,
            QueryRecord::Eval { .. } => self.evals += 1,
            QueryRecord::Assign { .. } => self.assigns += 1,
        }
        self.records.push(rec);
    }

    /// Check counters and the reference-point legality of every Eval/Assign
    /// argument, without touching any measure.
    pub fn validate(&self) -> Result<(), EngineError> {
        let mut refs: BTreeSet<Rational> = BTreeSet::new();
        refs.insert(Rational::zero());
        refs.insert(Rational::one());
        let (mut c, mut e, mut a) = (0usize, 0usize, 0usize);
        for rec in &self.records {
            match rec {
                QueryRecord::Cut { answer, .. } => {
                    c += 1;
                    refs.insert(answer.clone());
                }
                QueryRecord::Eval { x, .. } => {
                    e += 1;
                    if !refs.contains(x) {
                        return Err(EngineError::UnregisteredPoint { x: x.clone() });
                    }
                }
                QueryRecord::Assign { lo, hi, .. } => {
                    a += 1;
                    for p in [lo, hi] {
                        if !refs.contains(p) {
                            return Err(EngineError::UnregisteredPoint { x: p.clone() });
                        }
                    }
                }
            }
        }
        if (c, e, a) != (self.cuts, self.evals, self.assigns) {
            return Err(EngineError::CounterMismatch);
        }
        Ok(())
    }

    /// One JSON object per line.
    pub fn to_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for rec in &self.records {
            serde_json::to_writer(&mut w, rec)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn from_jsonl<R: BufRead>(r: R) -> Result<Self, serde_json::Error> {
        let mut t = Transcript::default();
        for line in r.lines() {
            let line = line.map_err(serde_json::Error::io)?;
            if line.trim().is_empty() {
                continue;
            }
            t.push(serde_json::from_str(&line)?);
        }
        Ok(t)
    }
}

/// Final pieces, one half-open interval `[lo, hi)` per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub pieces: BTreeMap<usize, Interval>,
}

impl Allocation {
    /// Pieces sorted left to right as `(player, interval)` pairs.
    pub fn ordered_pieces(&self) -> Vec<(usize, Interval)> {
        let mut v: Vec<_> = self.pieces.iter().map(|(p, iv)| (*p, iv.clone())).collect();
        v.sort_by(|a, b| a.1.lo().cmp(b.1.lo()).then(a.1.hi().cmp(b.1.hi())));
        v
    }
}

pub struct Engine {
    measures: Vec<PiecewiseMeasure>,
    mode: EngineMode,
    transcript: Transcript,
    reference_points: BTreeSet<Rational>,
    pieces: BTreeMap<usize, Interval>,
}

impl Engine {
    pub fn new(measures: Vec<PiecewiseMeasure>, mode: EngineMode) -> Self {
        assert!(!measures.is_empty(), "engine needs at least one player");
        let mut reference_points = BTreeSet::new();
        // Cake endpoints are implicitly registered.
        reference_points.insert(Rational::zero());
        reference_points.insert(Rational::one());
        Engine { measures, mode, transcript: Transcript::default(), reference_points, pieces: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.measures.len()
    }

    pub fn mode(&self) -> EngineMode {
        self.mode
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn measure(&self, player: usize) -> Result<&PiecewiseMeasure, EngineError> {
        if player == 0 || player > self.measures.len() {
            return Err(EngineError::PlayerOutOfRange { player, n: self.measures.len() });
        }
        Ok(&self.measures[player - 1])
    }

    /// Cut(p, alpha): the alpha-point of player p's hidden measure. The
    /// answer becomes a registered reference point.
    pub fn cut(&mut self, player: usize, alpha: &Rational) -> Result<Rational, EngineError> {
        let m = self.measure(player)?;
        let answer = m
            .alpha_point(alpha)
            .map_err(|_| EngineError::AlphaOutOfRange { alpha: alpha.clone() })?;
        self.reference_points.insert(answer.clone());
        self.transcript.push(QueryRecord::Cut {
            player,
            alpha: alpha.clone(),
            answer: answer.clone(),
        });
        Ok(answer)
    }

    /// Eval(p, x): player p's value of `[0, x]`. `x` must be registered.
    pub fn eval(&mut self, player: usize, x: &Rational) -> Result<Rational, EngineError> {
        let m = self.measure(player)?;
        if !self.reference_points.contains(x) {
            return Err(EngineError::UnregisteredPoint { x: x.clone() });
        }
        let answer = m.prefix_value(x).expect("registered points lie in [0,1]");
        self.transcript.push(QueryRecord::Eval { player, x: x.clone(), answer: answer.clone() });
        Ok(answer)
    }

    /// Assign `[lo, hi)` to a player. Endpoints must be registered.
    pub fn assign(&mut self, player: usize, lo: &Rational, hi: &Rational) -> Result<(), EngineError> {
        self.measure(player)?;
        for p in [lo, hi] {
            if !self.reference_points.contains(p) {
                return Err(EngineError::UnregisteredPoint { x: p.clone() });
            }
        }
        if lo > hi {
            return Err(EngineError::BadPiece { lo: lo.clone(), hi: hi.clone() });
        }
        if self.mode == EngineMode::WoegingerSgall && self.pieces.contains_key(&player) {
            return Err(EngineError::DuplicateAssign { player });
        }
        let piece = Interval::new(lo.clone(), hi.clone())
            .map_err(|_| EngineError::BadPiece { lo: lo.clone(), hi: hi.clone() })?;
        self.pieces.insert(player, piece);
        self.transcript.push(QueryRecord::Assign { player, lo: lo.clone(), hi: hi.clone() });
        Ok(())
    }

    /// Terminate and validate the allocation. In single-subinterval mode the
    /// pieces must be pairwise disjoint and cover `[0, 1)` exactly.
    pub fn finalize(&self) -> Result<Allocation, EngineError> {
        for player in 1..=self.n() {
            if !self.pieces.contains_key(&player) {
                return Err(EngineError::MissingAssignment { player });
            }
        }
        let alloc = Allocation { pieces: self.pieces.clone() };
        let ordered = alloc.ordered_pieces();
        // Disjointness in every mode: the same crumb of cake cannot be handed out twice.
        let mut cursor = Rational::zero();
        for (_, piece) in &ordered {
            if *piece.lo() < cursor {
                return Err(EngineError::Overlap { at: piece.lo().clone() });
            }
            if self.mode == EngineMode::WoegingerSgall && *piece.lo() != cursor {
                return Err(EngineError::CoverageGap { at: cursor });
            }
            cursor = piece.hi().clone();
        }
        if self.mode == EngineMode::WoegingerSgall && cursor != Rational::one() {
            return Err(EngineError::CoverageGap { at: cursor });
        }
        Ok(alloc)
    }

    /// Consume the engine, returning the transcript.
    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

/// Per-player proportionality verdicts, exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProportionalityReport {
    pub shares: Vec<PlayerShare>,
    pub all_proportional: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlayerShare {
    pub player: usize,
    pub value: Rational,
    pub proportional: bool,
}

/// Each player's exact value of their own piece, compared against `1/n`.
/// Pieces are half-open, but single points carry no mass, so closed-interval
/// values coincide.
pub fn check_proportional(alloc: &Allocation, measures: &[PiecewiseMeasure]) -> ProportionalityReport {
    let n = measures.len();
    let threshold = Rational::new(1, n as i64);
    let mut shares = Vec::with_capacity(n);
    let mut all = true;
    for (player, m) in measures.iter().enumerate() {
        let player = player + 1;
        let value = match alloc.pieces.get(&player) {
            Some(piece) => m.interval_value(piece),
            None => Rational::zero(),
        };
        let ok = value >= threshold;
        all &= ok;
        shares.push(PlayerShare { player, value, proportional: ok });
    }
    ProportionalityReport { shares, all_proportional: all }
}

/// Re-run a transcript against a fresh engine with the same measures,
/// checking that every answer reproduces exactly and no query faults.
pub fn replay_transcript(
    measures: Vec<PiecewiseMeasure>,
    mode: EngineMode,
    transcript: &Transcript,
) -> Result<(), ReplayError> {
    let mut engine = Engine::new(measures, mode);
    for (idx, rec) in transcript.records.iter().enumerate() {
        match rec {
            QueryRecord::Cut { player, alpha, answer } => {
                let got = engine.cut(*player, alpha).map_err(|e| ReplayError::Fault { idx, source: e })?;
                if &got != answer {
                    return Err(ReplayError::AnswerMismatch {
                        idx,
                        expected: answer.clone(),
                        got,
                    });
                }
            }
            QueryRecord::Eval { player, x, answer } => {
                let got = engine.eval(*player, x).map_err(|e| ReplayError::Fault { idx, source: e })?;
                if &got != answer {
                    return Err(ReplayError::AnswerMismatch {
                        idx,
                        expected: answer.clone(),
                        got,
                    });
                }
            }
            QueryRecord::Assign { player, lo, hi } => {
                engine.assign(*player, lo, hi).map_err(|e| ReplayError::Fault { idx, source: e })?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("record {idx}: engine fault during replay: {source}")]
    Fault { idx: usize, source: EngineError },
    #[error("record {idx}: answer mismatch (expected {expected}, got {got})")]
    AnswerMismatch { idx: usize, expected: Rational, got: Rational },
}
