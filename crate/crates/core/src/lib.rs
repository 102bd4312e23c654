//! Exact fair division of a one-dimensional cake.
//!
//! Valuations are piecewise-constant densities over `[0, 1)` with rational
//! breakpoints, and every number in the crate is an exact [`Rational`].
//! Protocols never see a valuation directly: they talk to an [`Oracle`] that
//! answers Robertson-Webb `Eval`/`Cut` queries and keeps an exact
//! [`QueryLedger`] of what was asked.
//!
//! The fairness checkers in [`predicates`] cover proportionality,
//! envy-freeness, super envy-freeness, epsilon-perfection and the two
//! complement-bounded families (harmonic and linear), each returning a
//! replayable witness on failure.

// Errors carry exact rationals for diagnostics.
#![allow(clippy::result_large_err)]

pub mod allocation;
pub mod error;
pub mod generate;
pub mod hardness;
pub mod hierarchy;
pub mod io;
pub mod measure;
pub mod oracle;
pub mod predicates;
pub mod protocols;
pub mod rational;
pub mod scaling;

pub use allocation::{Allocation, Piece, ValidationReport};
pub use error::{Error, Result};
pub use measure::{Instance, Interval, Valuation};
pub use oracle::{Oracle, QueryLedger, RegionView};
pub use predicates::{FairnessReport, Notion, Verdict, Witness};
pub use protocols::{ProtocolKind, ProtocolResult};
pub use rational::{rat, Rational};
