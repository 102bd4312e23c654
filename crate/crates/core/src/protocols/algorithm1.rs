//! Complement-harmonically-bounded allocations for all coalition sizes.
//!
//! `ceil(n/3)` uniform phantoms join the agents, the cake is split into
//! `n + p` near-perfect parts, the phantoms' parts form the residue and the
//! cut-and-match loop hands out residue prefixes plus whole parts.

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rational::{self, rat, Rational};

use super::cut_match::cut_and_match;
use super::perfect::{eps_perfect_partition, Participant};
use super::TraceEvent;

/// Number of phantom agents for `n` real ones.
pub fn phantom_count(n: usize) -> usize {
    n.div_ceil(3)
}

/// Perfection target for the initial partition: the largest `eps` with
/// `1/(n+p) + eps <= 1/n` and `1/(n+p) - eps >= 1/(2n)`.
pub fn algorithm1_eps(n: usize) -> Rational {
    let n_i = n as i64;
    let z = (n + phantom_count(n)) as i64;
    let upper = rat(1, n_i) - rat(1, z);
    let lower = rat(1, z) - rat(1, 2 * n_i);
    rational::min(&upper, &lower)
}

pub fn algorithm1_chb_n(
    oracle: &mut Oracle<'_>,
    trace: &mut Vec<TraceEvent>,
) -> Result<Allocation> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "algorithm 1 needs n >= 2, got {n}"
        )));
    }
    let z = n + phantom_count(n);
    let eps = algorithm1_eps(n);
    let mut participants: Vec<Participant> = (0..n).map(Participant::Agent).collect();
    participants.push(Participant::Uniform);
    let partition = eps_perfect_partition(oracle, &participants, z, &eps, &Piece::whole())?;
    trace.push(TraceEvent::Partition {
        iteration: 1,
        parts: z,
        eps: eps.clone(),
        cuts_introduced: partition.cuts_introduced as usize,
        rounds: partition.rounds,
    });
    let mut parts = partition.parts;
    let residue = parts
        .split_off(n)
        .into_iter()
        .fold(Piece::empty(), |acc, p| acc.union(&p));

    let floor = rat(1, 2 * n as i64);
    let ceiling = rat(1, n as i64);
    for agent in 0..n {
        for piece in &parts {
            let v = oracle.known_value(agent, piece)?;
            if v < floor || v > ceiling {
                return Err(Error::InvariantViolated(format!(
                    "agent {agent} values a partition piece at {v}, outside [{floor}, {ceiling}]"
                )));
            }
        }
    }
    cut_and_match(oracle, parts, residue, trace)
}
