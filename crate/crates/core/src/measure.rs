//! Piecewise-constant valuation measures on the unit cake.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::allocation::Piece;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Half-open interval `[lo, hi)` with `0 <= lo <= hi <= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo.is_negative() || hi > rational::one() || lo > hi {
            return Err(Error::Domain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self {
            lo: rational::zero(),
            hi: rational::one(),
        }
    }

    pub(crate) fn new_unchecked(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn into_bounds(self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }
}

/// A normalized piecewise-constant density on `[0, 1)`.
///
/// `densities[k]` applies on `[breakpoints[k], breakpoints[k + 1])`. The
/// cumulative value at every breakpoint is cached so evaluation is a binary
/// search plus one multiply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    breakpoints: Vec<Rational>,
    densities: Vec<Rational>,
    cumulative: Vec<Rational>,
}

impl Valuation {
    /// Builds a valuation, rejecting anything that does not integrate to 1.
    pub fn new(breakpoints: Vec<Rational>, densities: Vec<Rational>) -> Result<Self> {
        let v = Self::build(breakpoints, densities)?;
        let total = v.cumulative.last().cloned().unwrap_or_default();
        if total != rational::one() {
            return Err(Error::InvalidValuation(format!(
                "total measure is {total}, expected 1"
            )));
        }
        Ok(v)
    }

    /// Builds a valuation from unnormalized non-negative weights, rescaling so
    /// the cake is worth exactly 1.
    pub fn from_weights(breakpoints: Vec<Rational>, weights: Vec<Rational>) -> Result<Self> {
        let raw = Self::build(breakpoints, weights)?;
        let total = raw.cumulative.last().cloned().unwrap_or_default();
        if !total.is_positive() {
            return Err(Error::InvalidValuation("all weights are zero".into()));
        }
        let densities = raw.densities.iter().map(|d| d / &total).collect();
        Self::new(raw.breakpoints, densities)
    }

    pub fn uniform() -> Self {
        Self::new(
            vec![rational::zero(), rational::one()],
            vec![rational::one()],
        )
        .expect("uniform density is normalized")
    }

    fn build(breakpoints: Vec<Rational>, densities: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() < 2 || densities.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidValuation(format!(
                "{} breakpoints need {} densities, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                densities.len()
            )));
        }
        if !breakpoints[0].is_zero() || breakpoints[breakpoints.len() - 1] != rational::one() {
            return Err(Error::InvalidValuation(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidValuation(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if densities.iter().any(|d| d.is_negative()) {
            return Err(Error::InvalidValuation("negative density".into()));
        }
        let mut cumulative = Vec::with_capacity(breakpoints.len());
        let mut acc = rational::zero();
        cumulative.push(acc.clone());
        for (k, d) in densities.iter().enumerate() {
            acc += d * (&breakpoints[k + 1] - &breakpoints[k]);
            cumulative.push(acc.clone());
        }
        Ok(Self {
            breakpoints,
            densities,
            cumulative,
        })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    /// Index of the segment containing `x` (the last segment for `x == 1`).
    fn segment_of(&self, x: &Rational) -> usize {
        let last = self.densities.len() - 1;
        match self.breakpoints.binary_search_by(|b| rational::cmp(b, x)) {
            Ok(k) => k.min(last),
            Err(k) => (k - 1).min(last),
        }
    }

    /// Value of `[0, x)`.
    pub fn cdf(&self, x: &Rational) -> Rational {
        let k = self.segment_of(x);
        &self.cumulative[k] + &self.densities[k] * (x - &self.breakpoints[k])
    }

    pub fn eval(&self, interval: &Interval) -> Rational {
        if interval.is_empty() {
            return rational::zero();
        }
        let k = self.segment_of(&interval.lo);
        if k + 1 == self.densities.len()
            || rational::cmp(&interval.hi, &self.breakpoints[k + 1]).is_le()
        {
            return &self.densities[k] * interval.len();
        }
        self.cdf(&interval.hi) - self.cdf(&interval.lo)
    }

    pub fn eval_piece(&self, piece: &Piece) -> Rational {
        rational::sum(piece.intervals().iter().map(|i| self.eval(i)))
    }

    /// Smallest `x' >= x` with `eval([x, x')) == value`.
    pub fn cut(&self, x: &Rational, value: &Rational) -> Result<Rational> {
        if x.is_negative() || x > &rational::one() {
            return Err(Error::Domain {
                lo: x.clone(),
                hi: x.clone(),
            });
        }
        if value.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "negative cut value {value}"
            )));
        }
        if value.is_zero() {
            return Ok(x.clone());
        }
        let start = self.cdf(x);
        let available = rational::one() - &start;
        if value > &available {
            return Err(Error::InsufficientValue {
                requested: value.clone(),
                available,
            });
        }
        let target = start + value;
        // First segment whose right-end cumulative reaches the target; its
        // density is necessarily positive because the value strictly grows
        // inside it.
        let first = self.segment_of(x);
        let k = (first..self.densities.len())
            .find(|&k| self.cumulative[k + 1] >= target)
            .expect("target is at most the total measure");
        let offset = (&target - &self.cumulative[k]) / &self.densities[k];
        Ok(&self.breakpoints[k] + offset)
    }

    /// Pointwise average of two valuations.
    pub fn mixture(a: &Valuation, b: &Valuation) -> Valuation {
        let points: BTreeSet<Rational> = a
            .breakpoints
            .iter()
            .chain(b.breakpoints.iter())
            .cloned()
            .collect();
        let points: Vec<Rational> = points.into_iter().collect();
        let half = rational::rat(1, 2);
        let densities = points
            .windows(2)
            .map(|w| {
                let da = &a.densities[a.segment_of(&w[0])];
                let db = &b.densities[b.segment_of(&w[0])];
                (da + db) * &half
            })
            .collect();
        Valuation::new(points, densities).expect("average of normalized measures")
    }

    /// Restricts to `region` and rescales so the region is worth 1.
    pub fn restrict_renormalize(&self, region: &Piece) -> Result<RestrictedView<'_>> {
        RestrictedView::new(self, region.clone())
    }
}

/// A valuation seen through a region: values are of the intersection with the
/// region divided by the region's total value. No density is materialized.
#[derive(Debug, Clone)]
pub struct RestrictedView<'a> {
    valuation: &'a Valuation,
    region: Piece,
    scale: Rational,
}

impl<'a> RestrictedView<'a> {
    pub fn new(valuation: &'a Valuation, region: Piece) -> Result<Self> {
        let scale = valuation.eval_piece(&region);
        if scale.is_zero() {
            return Err(Error::DegenerateResidue { agent: 0 });
        }
        Ok(Self {
            valuation,
            region,
            scale,
        })
    }

    pub fn region_value(&self) -> &Rational {
        &self.scale
    }

    pub fn eval(&self, interval: &Interval) -> Rational {
        let clipped = self.region.intersect_interval(interval);
        self.valuation.eval_piece(&clipped) / &self.scale
    }

    pub fn eval_piece(&self, piece: &Piece) -> Rational {
        self.valuation.eval_piece(&self.region.intersection(piece)) / &self.scale
    }
}

/// The sorted partition of `[0, 1)` induced by every agent's cuts at values
/// `k / parts`, `k = 1..parts`. Each cell is worth at most `1 / parts` to
/// every agent.
pub fn common_refinement(valuations: &[Valuation], parts: usize) -> Vec<Interval> {
    let parts = parts.max(1);
    let mut points = BTreeSet::new();
    points.insert(rational::zero());
    points.insert(rational::one());
    for v in valuations {
        for k in 1..parts {
            let target = rational::rat(k as i64, parts as i64);
            let x = v
                .cut(&rational::zero(), &target)
                .expect("quantiles below 1 always exist");
            points.insert(x);
        }
    }
    let points: Vec<Rational> = points.into_iter().collect();
    points
        .windows(2)
        .filter(|w| w[0].cmp(&w[1]) == Ordering::Less)
        .map(|w| Interval::new_unchecked(w[0].clone(), w[1].clone()))
        .collect()
}

/// The agents' valuations, index = agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    valuations: Vec<Valuation>,
}

impl Instance {
    pub fn new(valuations: Vec<Valuation>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidParameter(
                "instance needs at least one agent".into(),
            ));
        }
        Ok(Self { valuations })
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![Valuation::uniform(); n.max(1)]).expect("non-empty")
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn valuation(&self, agent: usize) -> Result<&Valuation> {
        self.valuations.get(agent).ok_or(Error::IndexOutOfRange {
            index: agent,
            n: self.valuations.len(),
        })
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }
}
