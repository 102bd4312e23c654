use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("interval [{lo}, {hi}) is not inside [0, 1]")]
    Domain { lo: Rational, hi: Rational },

    #[error("insufficient value: asked for {requested} but only {available} remains")]
    InsufficientValue {
        requested: Rational,
        available: Rational,
    },

    #[error("degenerate residue: agent {agent} assigns it zero value")]
    DegenerateResidue { agent: usize },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("query accounting error: {0}")]
    Accounting(String),

    #[error("perfect-partition subroutine failed: {0}")]
    SubroutineFailure(String),

    #[error("protocol invariant violated: {0}")]
    InvariantViolated(String),

    #[error("parse error: {0}")]
    Parse(String),
}
