//! The final loop shared by both algorithms: agents mark the residue, the
//! leftmost mark wins a residue prefix plus its favourite remaining piece.

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rational::{self, rat, Rational};

use super::TraceEvent;

/// `pieces` must all be tracked and worth at most `1/n` to every agent;
/// `residue` is what is left of the cake.
pub(crate) fn cut_and_match(
    oracle: &mut Oracle<'_>,
    pieces: Vec<Piece>,
    mut residue: Piece,
    trace: &mut Vec<TraceEvent>,
) -> Result<Allocation> {
    let n = oracle.n();
    let share = rat(1, n as i64);
    // Values of the pieces are fixed, so read them once.
    let mut worth = vec![Vec::with_capacity(pieces.len()); n];
    for (agent, row) in worth.iter_mut().enumerate() {
        for p in &pieces {
            row.push(oracle.known_value(agent, p)?);
        }
    }
    let mut available: Vec<Option<Piece>> = pieces.into_iter().map(Some).collect();
    let mut bundles = vec![Piece::empty(); n];
    let mut active: Vec<usize> = (0..n).collect();
    oracle.register_piece(&residue)?;

    while active.len() > 1 {
        trace.push(TraceEvent::residue(&residue));
        let start = residue.start().cloned().unwrap_or_else(rational::zero);
        let mut best: Option<(Rational, usize)> = None;
        for &agent in &active {
            let (_, top) = favourite(&worth[agent], &available)?;
            let target = &share - &top;
            if target < rational::zero() {
                return Err(Error::InvariantViolated(format!(
                    "agent {agent} values a remaining piece at {top} > {share}"
                )));
            }
            let mark = oracle.super_cut(agent, &residue, &start, &target, None)?;
            trace.push(TraceEvent::Mark {
                agent,
                point: mark.clone(),
            });
            if best.as_ref().is_none_or(|(m, _)| &mark < m) {
                best = Some((mark, agent));
            }
        }
        let (mark, winner) = best.expect("at least two agents are active");
        oracle.register_cut(&mark)?;
        let (prefix, rest) = residue.split_at(&mark);
        let (fav, _) = favourite(&worth[winner], &available)?;
        let piece = available[fav].take().expect("favourite is available");

        let bundle = prefix.union(&piece);
        let got = oracle.known_value(winner, &bundle)?;
        if got != share {
            return Err(Error::InvariantViolated(format!(
                "winner {winner} received {got}, expected exactly {share}"
            )));
        }
        active.retain(|&a| a != winner);
        for &other in &active {
            let removed = oracle.known_value(other, &prefix)? + &worth[other][fav];
            if removed > share {
                return Err(Error::InvariantViolated(format!(
                    "agent {other} lost {removed} > {share} to agent {winner}"
                )));
            }
        }
        trace.push(TraceEvent::assign(winner, &bundle));
        bundles[winner] = bundle;
        residue = rest;
    }

    let last = active[0];
    let leftover = available
        .into_iter()
        .flatten()
        .fold(residue, |acc, p| acc.union(&p));
    let got = oracle.known_value(last, &leftover)?;
    if got < share {
        return Err(Error::InvariantViolated(format!(
            "last agent {last} received {got} < {share}"
        )));
    }
    trace.push(TraceEvent::assign(last, &leftover));
    bundles[last] = leftover;
    Ok(Allocation::new(bundles))
}

/// Index and value of the agent's most valued available piece; lowest index
/// on ties.
fn favourite(worth: &[Rational], available: &[Option<Piece>]) -> Result<(usize, Rational)> {
    let mut best: Option<(usize, Rational)> = None;
    for (idx, piece) in available.iter().enumerate() {
        if piece.is_some() && best.as_ref().is_none_or(|(_, b)| &worth[idx] > b) {
            best = Some((idx, worth[idx].clone()));
        }
    }
    best.ok_or_else(|| Error::InvariantViolated("no pieces left to match".into()))
}
