//! Pieces of cake and allocations of pieces to agents.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::measure::Interval;
use crate::rational::{self, Rational};

/// A finite union of half-open intervals, kept sorted, non-empty and
/// maximally merged, so equal point sets have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Piece {
    intervals: Vec<Interval>,
}

impl Piece {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole() -> Self {
        Self {
            intervals: vec![Interval::unit()],
        }
    }

    pub fn from_interval(interval: Interval) -> Self {
        Self::from_intervals(std::iter::once(interval))
    }

    /// Canonicalizes an arbitrary collection of intervals (overlaps allowed).
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut raw: Vec<Interval> = intervals.into_iter().filter(|i| !i.is_empty()).collect();
        raw.sort_by(|a, b| a.lo().cmp(b.lo()));
        let mut merged: Vec<Interval> = Vec::with_capacity(raw.len());
        for next in raw {
            match merged.last_mut() {
                Some(last) if next.lo() <= last.hi() => {
                    if next.hi() > last.hi() {
                        *last = Interval::new_unchecked(last.lo().clone(), next.hi().clone());
                    }
                }
                _ => merged.push(next),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue length.
    pub fn length(&self) -> Rational {
        self.intervals
            .iter()
            .fold(rational::zero(), |acc, i| acc + i.len())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Leftmost point of the piece, if any.
    pub fn start(&self) -> Option<&Rational> {
        self.intervals.first().map(Interval::lo)
    }

    pub fn union(&self, other: &Piece) -> Piece {
        Piece::from_intervals(self.intervals.iter().chain(&other.intervals).cloned())
    }

    /// `[0, 1) \ self`.
    pub fn complement(&self) -> Piece {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = rational::zero();
        for i in &self.intervals {
            if i.lo() > &cursor {
                out.push(Interval::new_unchecked(cursor.clone(), i.lo().clone()));
            }
            cursor = i.hi().clone();
        }
        if cursor < rational::one() {
            out.push(Interval::new_unchecked(cursor, rational::one()));
        }
        Piece { intervals: out }
    }

    pub fn intersect_interval(&self, window: &Interval) -> Piece {
        let intervals = self.intervals.iter().filter_map(|i| {
            let lo = i.lo().max(window.lo()).clone();
            let hi = i.hi().min(window.hi()).clone();
            (lo < hi).then(|| Interval::new_unchecked(lo, hi))
        });
        Piece {
            intervals: intervals.collect(),
        }
    }

    pub fn intersection(&self, other: &Piece) -> Piece {
        let mut out = Vec::new();
        let (mut a, mut b) = (0, 0);
        while a < self.intervals.len() && b < other.intervals.len() {
            let x = &self.intervals[a];
            let y = &other.intervals[b];
            let lo = x.lo().max(y.lo());
            let hi = x.hi().min(y.hi());
            if lo < hi {
                out.push(Interval::new_unchecked(lo.clone(), hi.clone()));
            }
            if x.hi() < y.hi() {
                a += 1;
            } else {
                b += 1;
            }
        }
        Piece::from_intervals(out)
    }

    pub fn difference(&self, other: &Piece) -> Piece {
        self.intersection(&other.complement())
    }

    /// Splits at `x` into the parts left and right of it.
    pub fn split_at(&self, x: &Rational) -> (Piece, Piece) {
        let left = Interval::new_unchecked(rational::zero(), x.clone());
        let right = Interval::new_unchecked(x.clone(), rational::one());
        (
            self.intersect_interval(&left),
            self.intersect_interval(&right),
        )
    }
}

/// One piece per agent; index is the agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pieces: Vec<Piece>,
}

/// Outcome of [`Allocation::validate`]. Violations carry a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationReport {
    Valid,
    Overlap {
        first: usize,
        second: usize,
        witness: Interval,
    },
    Incomplete {
        uncovered: Piece,
    },
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationReport::Valid)
    }
}

impl Allocation {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Self { pieces }
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn piece(&self, agent: usize) -> Result<&Piece> {
        self.pieces.get(agent).ok_or(Error::IndexOutOfRange {
            index: agent,
            n: self.pieces.len(),
        })
    }

    /// `A_S`: the union of the pieces of the agents in `agents`.
    pub fn bundle(&self, agents: &[usize]) -> Result<Piece> {
        let mut out = Piece::empty();
        for &a in agents {
            out = out.union(self.piece(a)?);
        }
        Ok(out)
    }

    pub fn covered(&self) -> Piece {
        Piece::from_intervals(
            self.pieces
                .iter()
                .flat_map(|p| p.intervals().iter().cloned()),
        )
    }

    pub fn is_complete(&self) -> bool {
        self.covered() == Piece::whole()
    }

    pub fn validate(&self, require_complete: bool) -> ValidationReport {
        for i in 0..self.pieces.len() {
            for j in (i + 1)..self.pieces.len() {
                let common = self.pieces[i].intersection(&self.pieces[j]);
                if let Some(w) = common.intervals().first() {
                    return ValidationReport::Overlap {
                        first: i,
                        second: j,
                        witness: w.clone(),
                    };
                }
            }
        }
        if require_complete {
            let uncovered = self.covered().complement();
            if !uncovered.length().is_zero() {
                return ValidationReport::Incomplete { uncovered };
            }
        }
        ValidationReport::Valid
    }
}
