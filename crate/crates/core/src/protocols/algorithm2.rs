//! Complete, proportional and epsilon-perfect allocations.
//!
//! `d` rounds each split the residue into `n + 1` near-perfect parts (one
//! uniform phantom) and hand part `i` to agent `i`'s accumulator; the
//! phantom's part is the next residue. The cut-and-match loop finishes.

use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rational::{self, int, rat, Rational};

use super::cut_match::cut_and_match;
use super::perfect::{eps_perfect_partition, Participant};
use super::TraceEvent;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg2Params {
    pub n: usize,
    #[serde(with = "rational::serde_str")]
    pub eps: Rational,
    /// Per-piece slack `eps / n`.
    #[serde(with = "rational::serde_str")]
    pub eps_tilde: Rational,
    /// Number of partition rounds.
    pub d: u32,
    /// Perfection target of every inner partition.
    #[serde(with = "rational::serde_str")]
    pub eps_prime: Rational,
}

impl Alg2Params {
    /// Parameters for a given per-piece slack. `d` is the smallest depth with
    /// `(1 - (1/(n+1))^d)/n >= 1/n - eps_tilde/2`, equivalently
    /// `(n+1)^-d <= n * eps_tilde / 2`; it starts from the floating-point
    /// closed form and is then settled in exact arithmetic.
    pub fn from_slack(n: usize, eps_tilde: &Rational) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
        }
        if eps_tilde <= &rational::zero() {
            return Err(Error::InvalidParameter(format!(
                "slack must be positive, got {eps_tilde}"
            )));
        }
        let nn = n as i64;
        let goal = eps_tilde * int(nn) / int(2);
        let ratio = rat(1, nn + 1);
        let holds = |d: u32| rational::pow(&ratio, d) <= goal;
        let estimate = (rational::to_f64(&goal).ln() / (1.0 / (nn + 1) as f64).ln()).ceil();
        let mut d = if estimate.is_finite() && estimate > 0.0 {
            estimate as u32
        } else {
            0
        };
        while !holds(d) {
            d += 1;
        }
        while d > 0 && holds(d - 1) {
            d -= 1;
        }
        let eps_prime = eps_tilde * int(nn * nn) / (int(2) * rational::pow(&int(nn + 1), 3));
        Ok(Self {
            n,
            eps: eps_tilde * int(nn),
            eps_tilde: eps_tilde.clone(),
            d,
            eps_prime,
        })
    }

    /// Whether the geometric-sum inequality defining `d` holds exactly.
    pub fn depth_suffices(&self) -> bool {
        let nn = int(self.n as i64);
        let ratio = rat(1, self.n as i64 + 1);
        let lhs = (rational::one() - rational::pow(&ratio, self.d)) / &nn;
        lhs >= rational::one() / nn - &self.eps_tilde / int(2)
    }
}

/// Parameters for target perfection `eps` in `(0, 1)`.
pub fn derive_alg2_params(n: usize, eps: &Rational) -> Result<Alg2Params> {
    if eps <= &rational::zero() || eps >= &rational::one() {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    Alg2Params::from_slack(n, &(eps / int(n as i64)))
}

pub fn algorithm2(
    oracle: &mut Oracle<'_>,
    eps: &Rational,
    trace: &mut Vec<TraceEvent>,
) -> Result<Allocation> {
    let n = oracle.n();
    let params = derive_alg2_params(n, eps)?;
    let mut participants: Vec<Participant> = (0..n).map(Participant::Agent).collect();
    participants.push(Participant::Uniform);
    let mut accumulated = vec![Piece::empty(); n];
    let mut residue = Piece::whole();
    let z = rat(1, n as i64 + 1);
    for t in 1..=params.d {
        let partition =
            eps_perfect_partition(oracle, &participants, n + 1, &params.eps_prime, &residue)?;
        trace.push(TraceEvent::Partition {
            iteration: t as usize,
            parts: n + 1,
            eps: params.eps_prime.clone(),
            cuts_introduced: partition.cuts_introduced as usize,
            rounds: partition.rounds,
        });
        let low = rational::pow(&(&z - &params.eps_prime), t);
        let high = rational::pow(&(&z + &params.eps_prime), t);
        for agent in 0..n {
            for piece in &partition.parts {
                let v = oracle.known_value(agent, piece)?;
                if v < low || v > high {
                    return Err(Error::InvariantViolated(format!(
                        "round {t}: agent {agent} values a piece at {v}, outside [{low}, {high}]"
                    )));
                }
            }
        }
        let mut parts = partition.parts;
        residue = parts.pop().expect("n + 1 parts");
        for (acc, part) in accumulated.iter_mut().zip(parts) {
            *acc = acc.union(&part);
        }
    }
    let low = rat(1, n as i64) - &params.eps_tilde;
    let high = rat(1, n as i64);
    for agent in 0..n {
        for piece in &accumulated {
            let v = oracle.known_value(agent, piece)?;
            if v < low || v > high {
                return Err(Error::InvariantViolated(format!(
                    "agent {agent} values an accumulated piece at {v}, outside [{low}, {high}]"
                )));
            }
        }
    }
    cut_and_match(oracle, accumulated, residue, trace)
}
