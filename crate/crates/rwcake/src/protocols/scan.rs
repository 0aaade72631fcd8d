//! Fair cuts-only primitive strategies.
//!
//! A fair strategy on this instance family must pin down the hidden
//! permutation: the player holding piece `i` must be the one whose value-`i`
//! point anchors the boundary structure. Both scans below determine each
//! player's hidden value by cut queries whose answers reveal whether the
//! value is below, at, or above the queried chunk index, then finish with
//! the anchor cuts as piece boundaries.

use crate::rational::Rational;
use crate::ws::{FinishSpec, PrimitiveEvent, PrimitiveProtocol, PrimitiveStep, WsError};

/// Replays a prefix of the event history against the strategy's decision
/// procedure; when the history runs out, the pending query is emitted.
struct Cursor<'a> {
    history: &'a [PrimitiveEvent],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(history: &'a [PrimitiveEvent]) -> Self {
        Cursor { history, pos: 0 }
    }

    /// `Ok(None)` means "emit this cut now".
    fn cut(&mut self, player: usize, chunk: usize) -> Result<Option<(usize, Rational)>, WsError> {
        match self.history.get(self.pos) {
            None => Ok(None),
            Some(PrimitiveEvent::Cut { player: p, chunk: c, slot, position })
                if *p == player && *c == chunk =>
            {
                self.pos += 1;
                Ok(Some((*slot, position.clone())))
            }
            Some(_) => Err(WsError::ProtocolInconsistency(format!(
                "history event {} does not match the pending cut ({player}, {chunk})",
                self.pos
            ))),
        }
    }

    fn eval(&mut self, player: usize, x: &Rational) -> Result<Option<Rational>, WsError> {
        match self.history.get(self.pos) {
            None => Ok(None),
            Some(PrimitiveEvent::Eval { player: p, x: ex, value }) if *p == player && ex == x => {
                self.pos += 1;
                Ok(Some(value.clone()))
            }
            Some(_) => Err(WsError::ProtocolInconsistency(format!(
                "history event {} does not match the pending eval ({player}, {x})",
                self.pos
            ))),
        }
    }
}

/// Linear candidate scan. For each player in index order, unassigned hidden
/// values are probed in ascending order; the answer slot equals the probed
/// chunk exactly when the value matches. The last candidate is forced without
/// a probe; a forced interior value still needs its anchor cut, which doubles
/// as the piece boundary.
///
/// With confirmation enabled, each determined player additionally evaluates
/// their own revealed point, expecting value `v/n`. The eval carries no new
/// information; it exists to exercise eval-bearing primitive runs.
pub struct SeqScan {
    confirm: bool,
}

impl SeqScan {
    pub fn new() -> Self {
        SeqScan { confirm: false }
    }

    pub fn with_confirmation() -> Self {
        SeqScan { confirm: true }
    }
}

impl Default for SeqScan {
    fn default() -> Self {
        SeqScan::new()
    }
}

impl PrimitiveProtocol for SeqScan {
    fn name(&self) -> &'static str {
        if self.confirm {
            "seqscanconfirm"
        } else {
            "seqscan"
        }
    }

    fn next(&self, n: usize, history: &[PrimitiveEvent]) -> Result<PrimitiveStep, WsError> {
        let mut cur = Cursor::new(history);
        let mut taken = vec![false; n + 1];
        let mut anchors: Vec<Option<Rational>> = vec![None; n + 1];
        let mut player_of_value = vec![0usize; n + 1];
        for p in 1..=n {
            let cands: Vec<usize> = (1..=n).filter(|&v| !taken[v]).collect();
            let mut determined: Option<(usize, Option<Rational>)> = None;
            for (idx, &c) in cands.iter().enumerate() {
                if idx + 1 == cands.len() {
                    // Everything smaller was ruled out: forced.
                    determined = Some((c, None));
                    break;
                }
                match cur.cut(p, c)? {
                    None => return Ok(PrimitiveStep::Cut { player: p, chunk: c }),
                    Some((slot, position)) => match slot.cmp(&c) {
                        std::cmp::Ordering::Equal => {
                            determined = Some((c, Some(position)));
                            break;
                        }
                        std::cmp::Ordering::Greater => continue,
                        std::cmp::Ordering::Less => {
                            return Err(WsError::ProtocolInconsistency(format!(
                                "player {p} answered below chunk {c} after ruling out smaller values"
                            )))
                        }
                    },
                }
            }
            let (v, own_point) = determined.expect("candidate scan always determines a value");
            let own_point = match own_point {
                Some(pos) => Some(pos),
                // Forced values still need the boundary anchor when interior.
                None if v < n => match cur.cut(p, v)? {
                    None => return Ok(PrimitiveStep::Cut { player: p, chunk: v }),
                    Some((slot, position)) => {
                        if slot != v {
                            return Err(WsError::ProtocolInconsistency(format!(
                                "anchor cut for value {v} answered slot {slot}"
                            )));
                        }
                        Some(position)
                    }
                },
                None => None,
            };
            if let Some(pos) = &own_point {
                anchors[v] = Some(pos.clone());
                if self.confirm {
                    match cur.eval(p, pos)? {
                        None => return Ok(PrimitiveStep::Eval { player: p, x: pos.clone() }),
                        Some(value) => {
                            if value != Rational::new(v as i64, n as i64) {
                                return Err(WsError::ProtocolInconsistency(format!(
                                    "confirmation eval for player {p} returned {value}"
                                )));
                            }
                        }
                    }
                }
            }
            taken[v] = true;
            player_of_value[v] = p;
        }
        finish_from_anchors(n, &player_of_value, &anchors)
    }
}

/// Binary search over the candidate values: probing chunk `m` narrows the
/// candidate set to below, at, or above `m`. Expected probes per player are
/// logarithmic instead of linear.
pub struct BisectScan;

impl PrimitiveProtocol for BisectScan {
    fn name(&self) -> &'static str {
        "bisectscan"
    }

    fn next(&self, n: usize, history: &[PrimitiveEvent]) -> Result<PrimitiveStep, WsError> {
        let mut cur = Cursor::new(history);
        let mut taken = vec![false; n + 1];
        let mut anchors: Vec<Option<Rational>> = vec![None; n + 1];
        let mut player_of_value = vec![0usize; n + 1];
        for p in 1..=n {
            let mut cands: Vec<usize> = (1..=n).filter(|&v| !taken[v]).collect();
            let mut confirmed: Option<Rational> = None;
            while cands.len() > 1 {
                let m = cands[cands.len() / 2];
                match cur.cut(p, m)? {
                    None => return Ok(PrimitiveStep::Cut { player: p, chunk: m }),
                    Some((slot, position)) => match slot.cmp(&m) {
                        std::cmp::Ordering::Equal => {
                            cands = vec![m];
                            confirmed = Some(position);
                        }
                        std::cmp::Ordering::Less => cands.retain(|&c| c < m),
                        std::cmp::Ordering::Greater => cands.retain(|&c| c > m),
                    },
                }
            }
            let v = *cands.first().ok_or_else(|| {
                WsError::ProtocolInconsistency(format!(
                    "bisection for player {p} emptied the candidate set"
                ))
            })?;
            let own_point = match confirmed {
                Some(pos) => Some(pos),
                None if v < n => match cur.cut(p, v)? {
                    None => return Ok(PrimitiveStep::Cut { player: p, chunk: v }),
                    Some((slot, position)) => {
                        if slot != v {
                            return Err(WsError::ProtocolInconsistency(format!(
                                "anchor cut for value {v} answered slot {slot}"
                            )));
                        }
                        Some(position)
                    }
                },
                None => None,
            };
            if let Some(pos) = own_point {
                anchors[v] = Some(pos);
            }
            taken[v] = true;
            player_of_value[v] = p;
        }
        finish_from_anchors(n, &player_of_value, &anchors)
    }
}

/// Two players, one cut: player 1's halfway point separates the pieces in
/// both branches, because the revealed slot determines the hidden permutation
/// outright and the own-point boundary is proportional either way.
pub struct SingleCut;

impl PrimitiveProtocol for SingleCut {
    fn name(&self) -> &'static str {
        "singlecut"
    }

    fn next(&self, n: usize, history: &[PrimitiveEvent]) -> Result<PrimitiveStep, WsError> {
        if n != 2 {
            return Err(WsError::UnsupportedN { name: "singlecut", n });
        }
        let mut cur = Cursor::new(history);
        match cur.cut(1, 1)? {
            None => Ok(PrimitiveStep::Cut { player: 1, chunk: 1 }),
            Some((slot, position)) => {
                let phi = if slot == 1 { vec![1, 2] } else { vec![2, 1] };
                Ok(PrimitiveStep::Finish(FinishSpec { phi, boundaries: vec![position] }))
            }
        }
    }
}

fn finish_from_anchors(
    n: usize,
    player_of_value: &[usize],
    anchors: &[Option<Rational>],
) -> Result<PrimitiveStep, WsError> {
    let phi: Vec<usize> = (1..=n).map(|v| player_of_value[v]).collect();
    let boundaries: Result<Vec<Rational>, WsError> = (1..n)
        .map(|v| {
            anchors[v]
                .clone()
                .ok_or_else(|| WsError::BadFinish(format!("missing anchor for piece {v}")))
        })
        .collect();
    Ok(PrimitiveStep::Finish(FinishSpec { phi, boundaries: boundaries? }))
}
