//! Lower-bound machinery made executable: the uniform-answer adversary with
//! its active-interval partitions, and the hard instance for the linear
//! complement bound at coalition size two.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::generate;
use crate::measure::{Instance, Interval, Valuation};
use crate::oracle::{Oracle, QueryLedger};
use crate::predicates;
use crate::protocols::{self, ProtocolKind, RunOptions};
use crate::rational::{self, int, rat, Rational};

/// `Π_i^t`: the intervals whose value the adversary has committed to for one
/// agent. Stored as the set of boundary points, which always holds 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivePartition {
    boundaries: BTreeSet<Rational>,
}

impl Default for ActivePartition {
    fn default() -> Self {
        Self::new()
    }
}

impl ActivePartition {
    pub fn new() -> Self {
        Self {
            boundaries: [rational::zero(), rational::one()].into_iter().collect(),
        }
    }

    /// Number of active intervals.
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Splits the active interval containing `x`; `false` if `x` already is
    /// a boundary.
    pub fn split_at(&mut self, x: &Rational) -> bool {
        self.boundaries.insert(x.clone())
    }

    pub fn intervals(&self) -> Vec<Interval> {
        let points: Vec<&Rational> = self.boundaries.iter().collect();
        points
            .windows(2)
            .map(|w| Interval::new_unchecked(w[0].clone(), w[1].clone()))
            .collect()
    }

    /// Longest active interval lying entirely inside `piece`.
    pub fn longest_inside(&self, piece: &Piece) -> Option<Interval> {
        self.intervals()
            .into_iter()
            .filter(|i| piece.intersect_interval(i).length() == i.len())
            .max_by(|a, b| a.len().cmp(&b.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Eval,
    Cut,
}

/// Partition size of one agent before and after one of its queries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthStep {
    pub agent: usize,
    pub kind: QueryKind,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone)]
pub struct AdversarySession {
    pub allocation: Allocation,
    pub partitions: Vec<ActivePartition>,
    pub history: Vec<GrowthStep>,
    pub ledger: QueryLedger,
}

/// Runs `kind` for `n` agents against the uniform-answer adversary.
pub fn adversary_session(
    n: usize,
    kind: ProtocolKind,
    options: &RunOptions,
) -> Result<AdversarySession> {
    let mut oracle = Oracle::adversary(n);
    let outcome = protocols::run_on(kind, &mut oracle, options)?;
    let (ledger, state) = oracle.into_parts();
    let state = state.expect("adversary oracle keeps its state");
    Ok(AdversarySession {
        allocation: outcome.allocation,
        partitions: state.partitions,
        history: state.history,
        ledger,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentGrowth {
    pub agent: usize,
    pub queries: usize,
    pub final_size: usize,
    pub bound: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthAudit {
    pub passed: bool,
    pub max_step_growth: usize,
    /// Index into the history of the first step that grew by more than two.
    pub first_bad_step: Option<usize>,
    pub agents: Vec<AgentGrowth>,
}

/// Checks growth of at most two per query and `|Π_i^T| <= 2 T_i + 1`.
pub fn audit_partition_growth(n: usize, history: &[GrowthStep]) -> GrowthAudit {
    let mut agents: Vec<AgentGrowth> = (0..n)
        .map(|agent| AgentGrowth {
            agent,
            queries: 0,
            final_size: 1,
            bound: 1,
        })
        .collect();
    let mut max_step_growth = 0;
    let mut first_bad_step = None;
    let mut chained = true;
    for (idx, step) in history.iter().enumerate() {
        let growth = step.after.saturating_sub(step.before);
        max_step_growth = max_step_growth.max(growth);
        if growth > 2 && first_bad_step.is_none() {
            first_bad_step = Some(idx);
        }
        let a = &mut agents[step.agent];
        chained &= a.final_size == step.before;
        a.queries += 1;
        a.final_size = step.after;
        a.bound = 2 * a.queries + 1;
    }
    let passed =
        chained && first_bad_step.is_none() && agents.iter().all(|a| a.final_size <= a.bound);
    GrowthAudit {
        passed,
        max_step_growth,
        first_bad_step,
        agents,
    }
}

/// `floor(n/2)` agents valuing by `v1`, `floor(n/2)` by `v2`, and for odd
/// `n` one last agent with their average.
pub fn clb2_hard_instance(n: usize, v1: &Valuation, v2: &Valuation) -> Result<Instance> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "hard instance needs at least 3 agents, got {n}"
        )));
    }
    let half = n / 2;
    let mut valuations = Vec::with_capacity(n);
    valuations.extend(std::iter::repeat_n(v1.clone(), half));
    valuations.extend(std::iter::repeat_n(v2.clone(), half));
    if n % 2 == 1 {
        valuations.push(Valuation::mixture(v1, v2));
    }
    Instance::new(valuations)
}

/// Hard instance whose two measures are drawn pseudo-randomly from `seed`.
pub fn random_clb2_hard_instance(n: usize, seed: u64) -> Result<Instance> {
    let mut rng = generate::rng(seed);
    let v1 = generate::random_piecewise(&mut rng);
    let v2 = generate::random_piecewise(&mut rng);
    clb2_hard_instance(n, &v1, &v2)
}

/// One forced equality `V(piece) = expected`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualityCheck {
    /// `1` or `2`: which of the two measures is evaluated.
    pub measure: u8,
    pub agents: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    #[serde(with = "rational::serde_str")]
    pub expected: Rational,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub n: usize,
    pub checks: Vec<EqualityCheck>,
    pub all_hold: bool,
    #[serde(with = "rational::serde_str")]
    pub max_deviation: Rational,
}

/// Verifies the equalities an allocation satisfying the linear complement
/// bound at size two must have on the hard instance: both measures give the
/// last piece (odd `n`) exactly `1/n` and every pair `A_i ∪ A_{i + n/2}`
/// exactly `2/n`.
pub fn exact_division_implication_check(
    allocation: &Allocation,
    instance: &Instance,
) -> Result<ImplicationReport> {
    let n = instance.n();
    if allocation.n() != n || n < 3 {
        return Err(Error::InvalidParameter(format!(
            "allocation with {} pieces does not fit a hard instance with {n} agents",
            allocation.n()
        )));
    }
    let half = n / 2;
    let measures = [instance.valuation(0)?, instance.valuation(half)?];
    let mut bundles: Vec<(Vec<usize>, Rational)> = (0..half)
        .map(|i| (vec![i, i + half], rat(2, n as i64)))
        .collect();
    if n % 2 == 1 {
        bundles.push((vec![n - 1], rat(1, n as i64)));
    }
    let mut checks = Vec::with_capacity(2 * bundles.len());
    let mut max_deviation = rational::zero();
    for (m, v) in measures.iter().enumerate() {
        for (agents, expected) in &bundles {
            let value = v.eval_piece(&allocation.bundle(agents)?);
            let deviation = rational::abs(&(&value - expected));
            if deviation > max_deviation {
                max_deviation = deviation.clone();
            }
            checks.push(EqualityCheck {
                measure: m as u8 + 1,
                agents: agents.clone(),
                holds: deviation.is_zero(),
                value,
                expected: expected.clone(),
            });
        }
    }
    Ok(ImplicationReport {
        n,
        all_hold: checks.iter().all(|c| c.holds),
        checks,
        max_deviation,
    })
}

/// One row of the hard-instance corpus table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clb2Row {
    pub n: usize,
    pub seed: u64,
    pub protocol: ProtocolKind,
    pub clb2_pass: bool,
    pub equalities_hold: bool,
    #[serde(with = "rational::serde_str")]
    pub max_deviation: Rational,
}

/// Runs every shipped protocol that accepts `n` agents on random hard
/// instances and records whether the exact size-two bound is met.
pub fn clb2_corpus(ns: &[usize], seeds: &[u64], eps: &Rational) -> Result<Vec<Clb2Row>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &seed in seeds {
            let instance = random_clb2_hard_instance(n, seed)?;
            for kind in ProtocolKind::ALL {
                if !kind.accepts(n) {
                    continue;
                }
                let options = RunOptions {
                    eps: Some(eps.clone()),
                    seed,
                    audit: false,
                };
                let result = protocols::run(kind, &instance, &options)?;
                let clb2 = predicates::check_clb(&result.allocation, &instance, 2)?;
                let report = exact_division_implication_check(&result.allocation, &instance)?;
                rows.push(Clb2Row {
                    n,
                    seed,
                    protocol: kind,
                    clb2_pass: clb2.passed(),
                    equalities_hold: report.all_hold,
                    max_deviation: report.max_deviation,
                });
            }
        }
    }
    Ok(rows)
}

/// Splits `[0, 1)` into consecutive intervals worth `weights[j]` each under
/// `v`. Not a protocol: it reads the valuation directly.
pub fn quantile_split(v: &Valuation, weights: &[Rational]) -> Result<Vec<Piece>> {
    let mut lo = rational::zero();
    let mut pieces = Vec::with_capacity(weights.len());
    for (j, w) in weights.iter().enumerate() {
        let hi = if j + 1 == weights.len() {
            int(1)
        } else {
            v.cut(&lo, w)?
        };
        pieces.push(Piece::from_interval(Interval::new(lo.clone(), hi.clone())?));
        lo = hi;
    }
    Ok(pieces)
}
