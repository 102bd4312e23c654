use std::collections::BTreeMap;
use std::ops::Bound;

use crate::rational::{self, Point, Rational};

/// Every registered cut point splits `[0, 1)` into atomic intervals whose
/// value is known for every agent. Keyed by the left end of each atomic
/// interval; the right end is the next key (or 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedIntervals {
    starts: BTreeMap<Point, Vec<Rational>>,
}

impl TrackedIntervals {
    /// Only the whole cake, worth 1 to every agent by normalization.
    pub fn new(n: usize) -> Self {
        let mut starts = BTreeMap::new();
        starts.insert(Point(rational::zero()), vec![rational::one(); n]);
        Self { starts }
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn is_boundary(&self, x: &Rational) -> bool {
        *x == rational::one() || self.starts.contains_key(&key(x))
    }

    /// The atomic interval `[lo, hi)` containing `x`, for `0 <= x < 1`.
    pub fn containing(&self, x: &Rational) -> (Rational, Rational) {
        let lo = self
            .starts
            .range(..=key(x))
            .next_back()
            .map(|(k, _)| k.0.clone())
            .expect("0 is always a boundary");
        (lo, self.next_boundary_after(x))
    }

    /// Smallest boundary strictly greater than `x`.
    pub fn next_boundary_after(&self, x: &Rational) -> Rational {
        self.starts
            .range((Bound::Excluded(key(x)), Bound::Unbounded))
            .next()
            .map(|(k, _)| k.0.clone())
            .unwrap_or_else(rational::one)
    }

    /// Smallest boundary `>= x`.
    pub fn boundary_at_or_after(&self, x: &Rational) -> Rational {
        if self.is_boundary(x) {
            x.clone()
        } else {
            self.next_boundary_after(x)
        }
    }

    /// Largest boundary `<= x`.
    pub fn boundary_at_or_before(&self, x: &Rational) -> Rational {
        if self.is_boundary(x) {
            return x.clone();
        }
        self.starts
            .range(..key(x))
            .next_back()
            .map(|(k, _)| k.0.clone())
            .expect("0 is always a boundary")
    }

    pub fn values_at(&self, lo: &Rational) -> Option<&[Rational]> {
        self.starts.get(&key(lo)).map(Vec::as_slice)
    }

    /// Records that `[lo, x)` and `[x, hi)` are worth `left` and `right`.
    pub fn split(&mut self, lo: &Rational, x: Rational, left: Vec<Rational>, right: Vec<Rational>) {
        self.starts.insert(key(lo), left);
        self.starts.insert(Point(x), right);
    }

    /// Sum of one agent's tracked values over `[lo, hi)`; both must be
    /// boundaries.
    pub fn sum(&self, agent: usize, lo: &Rational, hi: &Rational) -> Rational {
        rational::sum(self.starts.range(key(lo)..key(hi)).map(|(_, v)| &v[agent]))
    }

    /// Atomic intervals inside `[lo, hi)` (both boundaries) as
    /// `(start, end, values)`.
    pub fn atoms<'a>(
        &'a self,
        lo: &Rational,
        hi: &'a Rational,
    ) -> impl Iterator<Item = (&'a Rational, Rational, &'a [Rational])> + 'a {
        let mut iter = self.starts.range(key(lo)..key(hi)).peekable();
        std::iter::from_fn(move || {
            let (start, values) = iter.next()?;
            let end = iter
                .peek()
                .map(|(k, _)| k.0.clone())
                .unwrap_or_else(|| hi.clone());
            Some((&start.0, end, values.as_slice()))
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, Rational, &[Rational])> + '_ {
        let mut iter = self.starts.iter().peekable();
        std::iter::from_fn(move || {
            let (start, values) = iter.next()?;
            let end = iter
                .peek()
                .map(|(k, _)| k.0.clone())
                .unwrap_or_else(rational::one);
            Some((&start.0, end, values.as_slice()))
        })
    }
}

fn key(x: &Rational) -> Point {
    Point(x.clone())
}
