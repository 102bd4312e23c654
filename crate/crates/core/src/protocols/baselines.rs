//! Classic proportional protocols used as baselines.

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::measure::Interval;
use crate::oracle::Oracle;
use crate::rational::{self, int, rat, Rational};

use super::TraceEvent;

fn interval_piece(lo: &Rational, hi: &Rational) -> Piece {
    Piece::from_interval(Interval::new_unchecked(lo.clone(), hi.clone()))
}

/// Agent 0 halves the cake, agent 1 picks. Exactly one `Cut` and one `Eval`.
pub fn cut_and_choose(oracle: &mut Oracle<'_>, trace: &mut Vec<TraceEvent>) -> Result<Allocation> {
    if oracle.n() != 2 {
        return Err(Error::InvalidParameter(format!(
            "cut and choose needs exactly 2 agents, got {}",
            oracle.n()
        )));
    }
    let (zero, one) = (rational::zero(), rational::one());
    let y = oracle.cut(0, &zero, &rat(1, 2))?;
    trace.push(TraceEvent::Mark {
        agent: 0,
        point: y.clone(),
    });
    let left = interval_piece(&zero, &y);
    let right = interval_piece(&y, &one);
    let chooser_left = oracle.eval(1, &Interval::new_unchecked(zero, y))?;
    let pieces = if chooser_left <= rat(1, 2) {
        vec![left, right]
    } else {
        vec![right, left]
    };
    for (agent, p) in pieces.iter().enumerate() {
        trace.push(TraceEvent::assign(agent, p));
    }
    Ok(Allocation::new(pieces))
}

/// Divide and conquer: the agents mark where a `left/k` share of the current
/// segment ends, the segment is split at the `left`-th smallest mark and both
/// halves recurse. Ties in marks go to the lower index.
pub fn even_paz(oracle: &mut Oracle<'_>, trace: &mut Vec<TraceEvent>) -> Result<Allocation> {
    let n = oracle.n();
    let mut pieces = vec![Piece::empty(); n];
    let agents: Vec<usize> = (0..n).collect();
    split_segment(
        oracle,
        &agents,
        &rational::zero(),
        &rational::one(),
        &mut pieces,
        trace,
    )?;
    for (agent, p) in pieces.iter().enumerate() {
        trace.push(TraceEvent::assign(agent, p));
    }
    Ok(Allocation::new(pieces))
}

fn split_segment(
    oracle: &mut Oracle<'_>,
    agents: &[usize],
    lo: &Rational,
    hi: &Rational,
    pieces: &mut [Piece],
    trace: &mut Vec<TraceEvent>,
) -> Result<()> {
    let k = agents.len();
    if k == 1 {
        pieces[agents[0]] = interval_piece(lo, hi);
        return Ok(());
    }
    let left = k / 2;
    let whole_cake = lo == &rational::zero() && hi == &rational::one();
    let mut marks = Vec::with_capacity(k);
    for &agent in agents {
        let value = if whole_cake {
            rational::one()
        } else {
            oracle.eval(agent, &Interval::new_unchecked(lo.clone(), hi.clone()))?
        };
        let target = value * rat(left as i64, k as i64);
        let mark = oracle.cut(agent, lo, &target)?;
        trace.push(TraceEvent::Mark {
            agent,
            point: mark.clone(),
        });
        marks.push((mark, agent));
    }
    marks.sort();
    let split = marks[left - 1].0.clone();
    let left_agents: Vec<usize> = marks[..left].iter().map(|m| m.1).collect();
    let right_agents: Vec<usize> = marks[left..].iter().map(|m| m.1).collect();
    split_segment(oracle, &left_agents, lo, &split, pieces, trace)?;
    split_segment(oracle, &right_agents, &split, hi, pieces, trace)
}

/// Each remaining agent marks where a `1/n` share starting at the current
/// left end ends; the smallest mark (lowest index on ties) takes that piece.
pub fn last_diminisher(oracle: &mut Oracle<'_>, trace: &mut Vec<TraceEvent>) -> Result<Allocation> {
    let n = oracle.n();
    let share = rat(1, n as i64);
    let mut pieces = vec![Piece::empty(); n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut lo = rational::zero();
    while remaining.len() > 1 {
        let mut best: Option<(Rational, usize)> = None;
        for &agent in &remaining {
            let mark = oracle.cut(agent, &lo, &share)?;
            trace.push(TraceEvent::Mark {
                agent,
                point: mark.clone(),
            });
            if best.as_ref().is_none_or(|(m, _)| &mark < m) {
                best = Some((mark, agent));
            }
        }
        let (mark, winner) = best.expect("at least two agents remain");
        pieces[winner] = interval_piece(&lo, &mark);
        trace.push(TraceEvent::assign(winner, &pieces[winner]));
        remaining.retain(|&a| a != winner);
        lo = mark;
    }
    let last = remaining[0];
    pieces[last] = interval_piece(&lo, &int(1));
    trace.push(TraceEvent::assign(last, &pieces[last]));
    Ok(Allocation::new(pieces))
}
