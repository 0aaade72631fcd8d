//! Player measures on the unit cake.
//!
//! A [`PiecewiseMeasure`] is a nonatomic measure on `[0,1]` given by disjoint
//! constant-density segments whose masses sum to one exactly. Everything here
//! is exact rational arithmetic; queries are answered by binary search over
//! precomputed cumulative masses.

use crate::rational::Rational;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("interval endpoints must satisfy 0 <= lo <= hi <= 1 (got [{lo}, {hi}])")]
    BadInterval { lo: Rational, hi: Rational },
    #[error("segment [{lo}, {hi}] has zero length; mass must live on a positive-length segment")]
    ZeroLengthSegment { lo: Rational, hi: Rational },
    #[error("segment mass {mass} is negative")]
    NegativeMass { mass: Rational },
    #[error("segments must be sorted with pairwise disjoint interiors")]
    OverlappingSegments,
    #[error("measure has no segments")]
    Empty,
    #[error("segment masses sum to {total}, expected exactly 1")]
    NotNormalized { total: Rational },
    #[error("argument {x} outside [0, 1]")]
    OutOfDomain { x: Rational },
}

/// A subinterval of the cake, `0 <= lo <= hi <= 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr", into = "IntervalRepr")]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: Rational,
    hi: Rational,
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = MeasureError;
    fn try_from(r: IntervalRepr) -> Result<Self, Self::Error> {
        Interval::new(r.lo, r.hi)
    }
}

impl From<Interval> for IntervalRepr {
    fn from(iv: Interval) -> Self {
        IntervalRepr { lo: iv.lo, hi: iv.hi }
    }
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, MeasureError> {
        let zero = Rational::zero();
        let one = Rational::one();
        if lo < zero || hi > one || lo > hi {
            return Err(MeasureError::BadInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval { lo: Rational::zero(), hi: Rational::one() }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// One constant-density piece of a measure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SegmentRepr", into = "SegmentRepr")]
pub struct Segment {
    interval: Interval,
    mass: Rational,
}

#[derive(Serialize, Deserialize)]
struct SegmentRepr {
    lo: Rational,
    hi: Rational,
    mass: Rational,
}

impl TryFrom<SegmentRepr> for Segment {
    type Error = MeasureError;
    fn try_from(r: SegmentRepr) -> Result<Self, Self::Error> {
        Segment::new(Interval::new(r.lo, r.hi)?, r.mass)
    }
}

impl From<Segment> for SegmentRepr {
    fn from(s: Segment) -> Self {
        SegmentRepr { lo: s.interval.lo.clone(), hi: s.interval.hi.clone(), mass: s.mass }
    }
}

impl Segment {
    pub fn new(interval: Interval, mass: Rational) -> Result<Self, MeasureError> {
        if interval.is_empty() {
            return Err(MeasureError::ZeroLengthSegment {
                lo: interval.lo.clone(),
                hi: interval.hi.clone(),
            });
        }
        if mass.is_negative() {
            return Err(MeasureError::NegativeMass { mass });
        }
        Ok(Segment { interval, mass })
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    /// Mass per unit length.
    pub fn density(&self) -> Rational {
        &self.mass / &self.interval.length()
    }
}

/// A private valuation: sorted disjoint segments, total mass exactly one.
///
/// Divisibility holds structurally (uniform density within segments) and the
/// measure is atomless, so prefix values are continuous and every
/// `alpha in [0,1]` has an exact alpha-point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct PiecewiseMeasure {
    segments: Vec<Segment>,
    /// cum[i] = total mass of segments[0..=i].
    cum: Vec<Rational>,
}

impl TryFrom<Vec<Segment>> for PiecewiseMeasure {
    type Error = MeasureError;
    fn try_from(segments: Vec<Segment>) -> Result<Self, Self::Error> {
        PiecewiseMeasure::new(segments)
    }
}

impl From<PiecewiseMeasure> for Vec<Segment> {
    fn from(m: PiecewiseMeasure) -> Self {
        m.segments
    }
}

impl PiecewiseMeasure {
    pub fn new(segments: Vec<Segment>) -> Result<Self, MeasureError> {
        if segments.is_empty() {
            return Err(MeasureError::Empty);
        }
        for w in segments.windows(2) {
            if w[0].interval.hi > w[1].interval.lo {
                return Err(MeasureError::OverlappingSegments);
            }
        }
        let mut cum = Vec::with_capacity(segments.len());
        let mut acc = Rational::zero();
        for s in &segments {
            acc += &s.mass;
            cum.push(acc.clone());
        }
        if acc != Rational::one() {
            return Err(MeasureError::NotNormalized { total: acc });
        }
        Ok(PiecewiseMeasure { segments, cum })
    }

    /// The uniform (Lebesgue) measure on `[0,1]`.
    pub fn uniform() -> Self {
        PiecewiseMeasure::new(vec![Segment::new(Interval::unit(), Rational::one()).unwrap()])
            .unwrap()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// `mu([0, x])`, exact. Monotone nondecreasing in `x`.
    pub fn prefix_value(&self, x: &Rational) -> Result<Rational, MeasureError> {
        if x < &Rational::zero() || x > &Rational::one() {
            return Err(MeasureError::OutOfDomain { x: x.clone() });
        }
        // Number of segments entirely to the left of x.
        let idx = self.segments.partition_point(|s| s.interval.hi <= *x);
        let mut value = if idx == 0 { Rational::zero() } else { self.cum[idx - 1].clone() };
        if let Some(s) = self.segments.get(idx) {
            if s.interval.lo < *x {
                // x splits this segment; add the proportional share by length.
                let part = x - &s.interval.lo;
                value += &s.mass * part / s.interval.length();
            }
        }
        Ok(value)
    }

    /// `mu(I)` via additivity of prefixes; always nonnegative.
    pub fn interval_value(&self, iv: &Interval) -> Rational {
        let hi = self.prefix_value(&iv.hi).expect("interval endpoints are in [0,1]");
        let lo = self.prefix_value(&iv.lo).expect("interval endpoints are in [0,1]");
        hi - lo
    }

    /// The smallest `x` with `mu([0,x]) = alpha` (infimum semantics: on a
    /// zero-density plateau the left endpoint is returned).
    pub fn alpha_point(&self, alpha: &Rational) -> Result<Rational, MeasureError> {
        if alpha < &Rational::zero() || alpha > &Rational::one() {
            return Err(MeasureError::OutOfDomain { x: alpha.clone() });
        }
        if alpha.is_zero() {
            return Ok(Rational::zero());
        }
        // First segment whose cumulative mass reaches alpha. Zero-mass
        // segments never satisfy cum[i] >= alpha first, so this segment has
        // positive mass and the interpolation below is well defined.
        let idx = self.cum.partition_point(|c| c < alpha);
        let s = &self.segments[idx];
        let before = if idx == 0 { Rational::zero() } else { self.cum[idx - 1].clone() };
        let need = alpha - &before;
        Ok(s.interval.lo() + need * s.interval.length() / &s.mass)
    }

    /// A randomized well-formed measure for tests and smoke runs: up to
    /// `max_segments` segments at random rational breakpoints, masses
    /// normalized to sum to one exactly. Occasionally includes a zero-mass
    /// segment so plateau handling stays covered.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_segments: usize) -> Self {
        let k = rng.random_range(1..=max_segments.max(1));
        // 2k distinct breakpoints in (0,1), as fractions over one denominator.
        let denom: i64 = rng.random_range(16..=4096);
        let mut points: Vec<i64> = Vec::new();
        while points.len() < 2 * k {
            let p = rng.random_range(0..=denom);
            if !points.contains(&p) {
                points.push(p);
            }
        }
        points.sort_unstable();
        let mut segs = Vec::with_capacity(k);
        for j in 0..k {
            let lo = Rational::new(points[2 * j], denom);
            let hi = Rational::new(points[2 * j + 1], denom);
            let raw_mass = if k > 1 && rng.random_range(0..8) == 0 {
                0i64
            } else {
                rng.random_range(1..=1000)
            };
            segs.push((lo, hi, Rational::from_integer(raw_mass)));
        }
        let total: Rational = crate::rational::sum(segs.iter().map(|(_, _, m)| m));
        let total = if total.is_zero() {
            // All masses drew zero; force the first segment to carry everything.
            segs[0].2 = Rational::one();
            Rational::one()
        } else {
            total
        };
        let segments = segs
            .into_iter()
            .map(|(lo, hi, m)| {
                Segment::new(Interval::new(lo, hi).unwrap(), m / &total).unwrap()
            })
            .collect();
        PiecewiseMeasure::new(segments).expect("random measure construction is well-formed")
    }
}
