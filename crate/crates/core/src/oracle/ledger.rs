use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::tracking::TrackedIntervals;
use crate::rational::{self, Rational};

/// Exact per-agent query accounting for one protocol run.
///
/// `eval`/`cut` are the actual Robertson-Webb queries answered by the
/// oracle; `super_eval`/`super_cut` count queries over noncontiguous pieces,
/// whose actual cost is already included in the first two counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLedger {
    pub(crate) eval_count: Vec<u64>,
    pub(crate) cut_count: Vec<u64>,
    pub(crate) super_eval_count: Vec<u64>,
    pub(crate) super_cut_count: Vec<u64>,
    pub(crate) fresh_cuts: u64,
    pub(crate) max_super_charge: u64,
    pub(crate) registration_queries: u64,
    pub(crate) registered_cuts: BTreeSet<Rational>,
    pub(crate) tracked: TrackedIntervals,
}

impl QueryLedger {
    pub fn new(n: usize) -> Self {
        Self {
            eval_count: vec![0; n],
            cut_count: vec![0; n],
            super_eval_count: vec![0; n],
            super_cut_count: vec![0; n],
            fresh_cuts: 0,
            max_super_charge: 0,
            registration_queries: 0,
            registered_cuts: BTreeSet::new(),
            tracked: TrackedIntervals::new(n),
        }
    }

    pub fn n(&self) -> usize {
        self.eval_count.len()
    }

    pub fn eval_count(&self, agent: usize) -> u64 {
        self.eval_count[agent]
    }

    pub fn cut_count(&self, agent: usize) -> u64 {
        self.cut_count[agent]
    }

    pub fn super_eval_count(&self, agent: usize) -> u64 {
        self.super_eval_count[agent]
    }

    pub fn super_cut_count(&self, agent: usize) -> u64 {
        self.super_cut_count[agent]
    }

    /// Actual queries issued to `agent`.
    pub fn agent_queries(&self, agent: usize) -> u64 {
        self.eval_count[agent] + self.cut_count[agent]
    }

    pub fn total_evals(&self) -> u64 {
        self.eval_count.iter().sum()
    }

    pub fn total_cuts(&self) -> u64 {
        self.cut_count.iter().sum()
    }

    /// Total actual queries across all agents.
    pub fn total_queries(&self) -> u64 {
        self.total_evals() + self.total_cuts()
    }

    pub fn total_super_queries(&self) -> u64 {
        self.super_eval_count.iter().sum::<u64>() + self.super_cut_count.iter().sum::<u64>()
    }

    /// Number of cuts that split a tracked interval.
    pub fn fresh_cuts(&self) -> u64 {
        self.fresh_cuts
    }

    /// Every point produced by a cut query or registered for tracking.
    pub fn registered_cuts(&self) -> &BTreeSet<Rational> {
        &self.registered_cuts
    }

    pub fn tracked(&self) -> &TrackedIntervals {
        &self.tracked
    }

    /// Largest number of actual queries any single super-query issued.
    pub fn max_super_charge(&self) -> u64 {
        self.max_super_charge
    }

    /// Actual queries spent registering fresh cut points.
    pub fn registration_queries(&self) -> u64 {
        self.registration_queries
    }

    pub fn export(&self) -> LedgerExport {
        let agents = (0..self.n())
            .map(|i| AgentCounts {
                agent: i,
                eval: self.eval_count[i],
                cut: self.cut_count[i],
                actual: self.agent_queries(i),
                super_eval: self.super_eval_count[i],
                super_cut: self.super_cut_count[i],
            })
            .collect();
        LedgerExport {
            agents,
            totals: Totals {
                eval: self.total_evals(),
                cut: self.total_cuts(),
                actual: self.total_queries(),
                super_eval: self.super_eval_count.iter().sum(),
                super_cut: self.super_cut_count.iter().sum(),
            },
            fresh_cuts: self.fresh_cuts,
            max_super_charge: self.max_super_charge,
            tracked_intervals: self.tracked.len(),
            registered_cuts: self.registered_cuts.iter().map(rational::format).collect(),
        }
    }
}

/// JSON shape of an exported ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerExport {
    pub agents: Vec<AgentCounts>,
    pub totals: Totals,
    pub fresh_cuts: u64,
    pub max_super_charge: u64,
    pub tracked_intervals: usize,
    pub registered_cuts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentCounts {
    pub agent: usize,
    pub eval: u64,
    pub cut: u64,
    pub actual: u64,
    pub super_eval: u64,
    pub super_cut: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub eval: u64,
    pub cut: u64,
    pub actual: u64,
    pub super_eval: u64,
    pub super_cut: u64,
}
