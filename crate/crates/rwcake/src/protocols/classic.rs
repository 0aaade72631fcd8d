//! The classic proportional protocols, written directly against the engine.

use crate::engine::{Allocation, Engine};
use crate::protocols::ProtocolError;
use crate::rational::Rational;

/// Endpoint value for a registered subcake endpoint. The cake ends carry the
/// axiom constants 0 and 1; interior endpoints cost an eval.
fn endpoint_value(engine: &mut Engine, player: usize, x: &Rational) -> Result<Rational, ProtocolError> {
    if x.is_zero() {
        Ok(Rational::zero())
    } else if *x == Rational::one() {
        Ok(Rational::one())
    } else {
        Ok(engine.eval(player, x)?)
    }
}

/// Two players: player 1 halves the cake by their own measure, player 2
/// takes whichever piece they value at least one half.
pub fn cut_and_choose(engine: &mut Engine) -> Result<Allocation, ProtocolError> {
    let n = engine.n();
    if n != 2 {
        return Err(ProtocolError::UnsupportedN { protocol: "cutchoose", n });
    }
    let half = Rational::new(1, 2);
    let zero = Rational::zero();
    let one = Rational::one();
    let z = engine.cut(1, &half)?;
    let v = engine.eval(2, &z)?;
    if v >= half {
        engine.assign(2, &zero, &z)?;
        engine.assign(1, &z, &one)?;
    } else {
        engine.assign(1, &zero, &z)?;
        engine.assign(2, &z, &one)?;
    }
    Ok(engine.finalize()?)
}

/// Divide and conquer: every player in the group marks the point splitting
/// the subcake's value `ceil(s/2) : floor(s/2)` by their own measure; the
/// median mark splits the group, ties broken by lowest player index.
pub fn even_paz(engine: &mut Engine) -> Result<Allocation, ProtocolError> {
    let players: Vec<usize> = (1..=engine.n()).collect();
    even_paz_split(engine, &players, &Rational::zero(), &Rational::one())?;
    Ok(engine.finalize()?)
}

fn even_paz_split(
    engine: &mut Engine,
    players: &[usize],
    a: &Rational,
    b: &Rational,
) -> Result<(), ProtocolError> {
    if players.len() == 1 {
        engine.assign(players[0], a, b)?;
        return Ok(());
    }
    let s = players.len();
    let h = s.div_ceil(2);
    let ratio = Rational::from(h) / Rational::from(s);
    let mut marks: Vec<(Rational, usize)> = Vec::with_capacity(s);
    for &p in players {
        let va = endpoint_value(engine, p, a)?;
        let vb = endpoint_value(engine, p, b)?;
        let alpha = &va + (&vb - &va) * &ratio;
        let z = engine.cut(p, &alpha)?;
        marks.push((z, p));
    }
    marks.sort();
    let median = marks[h - 1].0.clone();
    let mut left: Vec<usize> = marks[..h].iter().map(|&(_, p)| p).collect();
    let mut right: Vec<usize> = marks[h..].iter().map(|&(_, p)| p).collect();
    left.sort_unstable();
    right.sort_unstable();
    even_paz_split(engine, &left, a, &median)?;
    even_paz_split(engine, &right, &median, b)
}

/// Successive rounds: every remaining player marks where the remainder first
/// reaches value `1/n` of the whole by their measure; the leftmost marker
/// (ties to the lowest index) takes `[left edge, mark)` and leaves. The last
/// player takes the remainder.
pub fn last_diminisher(engine: &mut Engine) -> Result<Allocation, ProtocolError> {
    let n = engine.n();
    let share = Rational::new(1, n as i64);
    let mut remaining: Vec<usize> = (1..=n).collect();
    let mut left_edge = Rational::zero();
    while remaining.len() > 1 {
        let mut best: Option<(Rational, usize)> = None;
        for &p in &remaining {
            let at_edge = endpoint_value(engine, p, &left_edge)?;
            let alpha = &at_edge + &share;
            let z = engine.cut(p, &alpha)?;
            let candidate = (z, p);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        let (mark, winner) = best.expect("at least two players marked");
        engine.assign(winner, &left_edge, &mark)?;
        remaining.retain(|&q| q != winner);
        left_edge = mark;
    }
    engine.assign(remaining[0], &left_edge, &Rational::one())?;
    Ok(engine.finalize()?)
}
