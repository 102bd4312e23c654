//! Cake-cutting protocols. All of them reach valuations only through an
//! [`Oracle`].

mod algorithm1;
mod algorithm2;
mod baselines;
mod cut_match;
mod perfect;

pub use algorithm1::{algorithm1_chb_n, algorithm1_eps, phantom_count};
pub use algorithm2::{algorithm2, derive_alg2_params, Alg2Params};
pub use baselines::{cut_and_choose, even_paz, last_diminisher};
pub use perfect::{eps_perfect_partition, Participant, PerfectPartition};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::measure::Instance;
use crate::oracle::{Oracle, QueryLedger};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProtocolKind {
    #[serde(rename = "cut-choose")]
    CutChoose,
    #[serde(rename = "even-paz")]
    EvenPaz,
    #[serde(rename = "last-dim")]
    LastDiminisher,
    #[serde(rename = "alg1")]
    Algorithm1,
    #[serde(rename = "alg2")]
    Algorithm2,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::CutChoose,
        ProtocolKind::EvenPaz,
        ProtocolKind::LastDiminisher,
        ProtocolKind::Algorithm1,
        ProtocolKind::Algorithm2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::CutChoose => "cut-choose",
            ProtocolKind::EvenPaz => "even-paz",
            ProtocolKind::LastDiminisher => "last-dim",
            ProtocolKind::Algorithm1 => "alg1",
            ProtocolKind::Algorithm2 => "alg2",
        }
    }

    /// Whether the protocol is defined for `n` agents.
    pub fn accepts(self, n: usize) -> bool {
        match self {
            ProtocolKind::CutChoose => n == 2,
            ProtocolKind::EvenPaz | ProtocolKind::LastDiminisher => n >= 1,
            ProtocolKind::Algorithm1 | ProtocolKind::Algorithm2 => n >= 2,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown protocol {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Target perfection for Algorithm 2.
    pub eps: Option<Rational>,
    /// Accepted for reproducibility of the run record; every shipped
    /// protocol is deterministic.
    pub seed: u64,
    /// Check every tracked value against the truth as it is recorded.
    pub audit: bool,
}

/// Default target perfection when none is given.
pub fn default_eps() -> Rational {
    rational::rat(1, 10)
}

/// One step of a protocol, for replay and inspection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Mark {
        agent: usize,
        #[serde(with = "rational::serde_str")]
        point: Rational,
    },
    Assign {
        agent: usize,
        intervals: Vec<(String, String)>,
    },
    Partition {
        iteration: usize,
        parts: usize,
        #[serde(with = "rational::serde_str")]
        eps: Rational,
        cuts_introduced: usize,
        rounds: usize,
    },
    Residue {
        intervals: usize,
        #[serde(with = "rational::serde_str")]
        length: Rational,
    },
}

impl TraceEvent {
    pub(crate) fn assign(agent: usize, piece: &crate::allocation::Piece) -> Self {
        TraceEvent::Assign {
            agent,
            intervals: piece
                .intervals()
                .iter()
                .map(|i| (rational::format(i.lo()), rational::format(i.hi())))
                .collect(),
        }
    }

    pub(crate) fn residue(piece: &crate::allocation::Piece) -> Self {
        TraceEvent::Residue {
            intervals: piece.intervals().len(),
            length: piece.length(),
        }
    }
}

/// Allocation and trace of a run on a caller-supplied oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub allocation: Allocation,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolResult {
    pub allocation: Allocation,
    pub ledger: QueryLedger,
    pub trace: Vec<TraceEvent>,
}

/// Runs `kind` on an existing oracle (honest or adversarial).
pub fn run_on(
    kind: ProtocolKind,
    oracle: &mut Oracle<'_>,
    options: &RunOptions,
) -> Result<Outcome> {
    let n = oracle.n();
    if !kind.accepts(n) {
        return Err(Error::InvalidParameter(format!(
            "{kind} is not defined for {n} agents"
        )));
    }
    let mut trace = Vec::new();
    let allocation = match kind {
        ProtocolKind::CutChoose => cut_and_choose(oracle, &mut trace)?,
        ProtocolKind::EvenPaz => even_paz(oracle, &mut trace)?,
        ProtocolKind::LastDiminisher => last_diminisher(oracle, &mut trace)?,
        ProtocolKind::Algorithm1 => algorithm1_chb_n(oracle, &mut trace)?,
        ProtocolKind::Algorithm2 => {
            let eps = options.eps.clone().unwrap_or_else(default_eps);
            algorithm2(oracle, &eps, &mut trace)?
        }
    };
    let report = allocation.validate(true);
    if !report.is_valid() {
        return Err(Error::InvariantViolated(format!(
            "{kind} produced an invalid allocation: {report:?}"
        )));
    }
    Ok(Outcome { allocation, trace })
}

/// Runs `kind` on `instance` through a fresh honest oracle.
pub fn run(
    kind: ProtocolKind,
    instance: &Instance,
    options: &RunOptions,
) -> Result<ProtocolResult> {
    let mut oracle = Oracle::honest(instance).with_step_audit(options.audit);
    let outcome = run_on(kind, &mut oracle, options)?;
    if options.audit {
        oracle.audit()?;
    }
    Ok(ProtocolResult {
        allocation: outcome.allocation,
        ledger: oracle.into_ledger(),
        trace: outcome.trace,
    })
}
