//! The Robertson-Webb query layer.
//!
//! Every protocol reaches valuations only through an [`Oracle`], so the
//! ledger it keeps is a faithful count of the queries a protocol needs. On
//! top of the two primitive queries the oracle maintains a set of tracked
//! cut points with every agent's value for each atomic interval between them;
//! this is what lets queries over noncontiguous pieces (super-queries) be
//! answered with at most two primitive queries each.

mod ledger;
mod tracking;

pub use ledger::{AgentCounts, LedgerExport, QueryLedger, Totals};
pub use tracking::TrackedIntervals;

use num_traits::{Signed, Zero};

use crate::allocation::Piece;
use crate::error::{Error, Result};
use crate::hardness::{ActivePartition, GrowthStep, QueryKind};
use crate::measure::{Instance, Interval};
use crate::rational::{self, Rational};

/// How queries are answered.
#[derive(Debug, Clone)]
enum Mode<'a> {
    Honest(&'a Instance),
    /// Answers every query as if all valuations were uniform, tracking what
    /// the protocol could have learned so far.
    Adversary(AdversaryState),
}

/// Public tag of the answering mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Honest,
    Adversary,
}

/// Active-interval partitions of the uniform adversary and their growth log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryState {
    pub partitions: Vec<ActivePartition>,
    pub history: Vec<GrowthStep>,
}

impl AdversaryState {
    fn new(n: usize) -> Self {
        Self {
            partitions: vec![ActivePartition::new(); n],
            history: Vec::new(),
        }
    }

    fn record(&mut self, agent: usize, kind: QueryKind, points: [&Rational; 2]) {
        let partition = &mut self.partitions[agent];
        let before = partition.len();
        for p in points {
            partition.split_at(p);
        }
        self.history.push(GrowthStep {
            agent,
            kind,
            before,
            after: partition.len(),
        });
    }
}

/// A region of the cake together with every agent's (tracked) value of it,
/// used to answer queries renormalized to the region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionView {
    region: Piece,
    values: Vec<Rational>,
}

impl RegionView {
    pub fn region(&self) -> &Piece {
        &self.region
    }

    pub fn value(&self, agent: usize) -> &Rational {
        &self.values[agent]
    }
}

#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    mode: Mode<'a>,
    n: usize,
    ledger: QueryLedger,
    audit_each_step: bool,
}

impl<'a> Oracle<'a> {
    pub fn honest(instance: &'a Instance) -> Self {
        let n = instance.n();
        Self {
            mode: Mode::Honest(instance),
            n,
            ledger: QueryLedger::new(n),
            audit_each_step: false,
        }
    }

    pub fn adversary(n: usize) -> Self {
        Self {
            mode: Mode::Adversary(AdversaryState::new(n)),
            n,
            ledger: QueryLedger::new(n),
            audit_each_step: false,
        }
    }

    /// When on, every update of the tracked values is checked against the
    /// true valuation as it happens.
    pub fn with_step_audit(mut self, on: bool) -> Self {
        self.audit_each_step = on;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> OracleMode {
        match self.mode {
            Mode::Honest(_) => OracleMode::Honest,
            Mode::Adversary(_) => OracleMode::Adversary,
        }
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn adversary_state(&self) -> Option<&AdversaryState> {
        match &self.mode {
            Mode::Adversary(state) => Some(state),
            Mode::Honest(_) => None,
        }
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    pub fn into_parts(self) -> (QueryLedger, Option<AdversaryState>) {
        match self.mode {
            Mode::Adversary(state) => (self.ledger, Some(state)),
            Mode::Honest(_) => (self.ledger, None),
        }
    }

    fn check_agent(&self, agent: usize) -> Result<()> {
        if agent >= self.n {
            return Err(Error::IndexOutOfRange {
                index: agent,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Ground truth for audits; never counted.
    fn truth(&self, agent: usize, interval: &Interval) -> Rational {
        match &self.mode {
            Mode::Honest(instance) => instance.valuations()[agent].eval(interval),
            Mode::Adversary(_) => interval.len(),
        }
    }

    /// `Eval_i(I)`.
    pub fn eval(&mut self, agent: usize, interval: &Interval) -> Result<Rational> {
        self.check_agent(agent)?;
        self.ledger.eval_count[agent] += 1;
        match &mut self.mode {
            Mode::Honest(instance) => Ok(instance.valuations()[agent].eval(interval)),
            Mode::Adversary(state) => {
                state.record(agent, QueryKind::Eval, [interval.lo(), interval.hi()]);
                Ok(interval.len())
            }
        }
    }

    /// `Cut_i(x, v)`: smallest `x'` with `V_i([x, x')) = v`.
    pub fn cut(&mut self, agent: usize, x: &Rational, value: &Rational) -> Result<Rational> {
        self.check_agent(agent)?;
        self.ledger.cut_count[agent] += 1;
        let point = match &mut self.mode {
            Mode::Honest(instance) => instance.valuations()[agent].cut(x, value)?,
            Mode::Adversary(state) => {
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
                let available = rational::one() - x;
                if value > &available {
                    return Err(Error::InsufficientValue {
                        requested: value.clone(),
                        available,
                    });
                }
                let point = x + value;
                state.record(agent, QueryKind::Cut, [x, &point]);
                point
            }
        };
        self.ledger.registered_cuts.insert(point.clone());
        Ok(point)
    }

    /// Adds `x` to the tracked cut points, spending one `Eval` per agent on
    /// the left fragment and deriving the right one by subtraction. Returns
    /// the number of actual queries issued (0 when `x` is already tracked).
    pub fn register_cut(&mut self, x: &Rational) -> Result<usize> {
        if x.is_negative() || x > &rational::one() {
            return Err(Error::Accounting(format!(
                "cut point {x} is not inside any tracked interval"
            )));
        }
        if self.ledger.tracked.is_boundary(x) {
            return Ok(0);
        }
        let (lo, hi) = self.ledger.tracked.containing(x);
        let whole = self
            .ledger
            .tracked
            .values_at(&lo)
            .expect("containing interval is tracked")
            .to_vec();
        let before = self.ledger.total_queries();
        let left_interval = Interval::new_unchecked(lo.clone(), x.clone());
        let mut left = Vec::with_capacity(self.n);
        let mut right = Vec::with_capacity(self.n);
        for agent in 0..self.n {
            let l = self.eval(agent, &left_interval)?;
            right.push(&whole[agent] - &l);
            left.push(l);
        }
        if self.audit_each_step {
            let right_interval = Interval::new_unchecked(x.clone(), hi);
            for agent in 0..self.n {
                if left[agent] != self.truth(agent, &left_interval)
                    || right[agent] != self.truth(agent, &right_interval)
                {
                    return Err(Error::Accounting(format!(
                        "tracked value drift for agent {agent} around {x}"
                    )));
                }
            }
        }
        self.ledger.tracked.split(&lo, x.clone(), left, right);
        self.ledger.registered_cuts.insert(x.clone());
        self.ledger.fresh_cuts += 1;
        let issued = self.ledger.total_queries() - before;
        self.ledger.registration_queries += issued;
        Ok(issued as usize)
    }

    /// Registers every endpoint of `piece`.
    pub fn register_piece(&mut self, piece: &Piece) -> Result<usize> {
        let mut issued = 0;
        for i in piece.intervals() {
            issued += self.register_cut(i.lo())?;
            issued += self.register_cut(i.hi())?;
        }
        Ok(issued)
    }

    fn ensure_tracked(&self, piece: &Piece) -> Result<()> {
        let tracked = &self.ledger.tracked;
        for i in piece.intervals() {
            if !tracked.is_boundary(i.lo()) || !tracked.is_boundary(i.hi()) {
                return Err(Error::Accounting(format!(
                    "piece interval [{}, {}) is not a union of tracked intervals",
                    i.lo(),
                    i.hi()
                )));
            }
        }
        Ok(())
    }

    /// Value of a tracked piece read straight from the tracked values. Costs
    /// no query: everything it reveals has already been paid for.
    pub fn known_value(&self, agent: usize, piece: &Piece) -> Result<Rational> {
        self.check_agent(agent)?;
        self.ensure_tracked(piece)?;
        Ok(rational::sum(
            piece
                .intervals()
                .iter()
                .map(|i| self.ledger.tracked.sum(agent, i.lo(), i.hi())),
        ))
    }

    /// Snapshot of every agent's value for a tracked region.
    pub fn region_view(&self, region: &Piece) -> Result<RegionView> {
        let mut values = Vec::with_capacity(self.n);
        for agent in 0..self.n {
            let v = self.known_value(agent, region)?;
            if v.is_zero() {
                return Err(Error::DegenerateResidue { agent });
            }
            values.push(v);
        }
        Ok(RegionView {
            region: region.clone(),
            values,
        })
    }

    /// Value of `piece ∩ window` where `piece` is a union of tracked
    /// intervals. Only the two boundary fragments that cut into a tracked
    /// interval cost a query; interior intervals are read from the tracked
    /// values. With a view the result is renormalized to the view's region.
    pub fn super_eval(
        &mut self,
        agent: usize,
        piece: &Piece,
        window: &Interval,
        view: Option<&RegionView>,
    ) -> Result<Rational> {
        self.check_agent(agent)?;
        self.ensure_tracked(piece)?;
        self.ledger.super_eval_count[agent] += 1;
        let before = self.ledger.total_queries();
        let fragments = piece.intersect_interval(window);
        let mut total = rational::zero();
        for frag in fragments.intervals() {
            total += self.fragment_value(agent, frag.lo(), frag.hi())?;
        }
        self.note_super_charge(before);
        Ok(match view {
            Some(v) => total / v.value(agent),
            None => total,
        })
    }

    fn note_super_charge(&mut self, before: u64) {
        let charged = self.ledger.total_queries() - before;
        self.ledger.max_super_charge = self.ledger.max_super_charge.max(charged);
    }

    fn fragment_value(&mut self, agent: usize, a: &Rational, b: &Rational) -> Result<Rational> {
        let tracked = &self.ledger.tracked;
        let a_known = tracked.is_boundary(a);
        let b_known = tracked.is_boundary(b);
        if a_known && b_known {
            return Ok(tracked.sum(agent, a, b));
        }
        let a_next = tracked.boundary_at_or_after(a);
        let b_prev = tracked.boundary_at_or_before(b);
        if a_next > b_prev {
            // Both ends inside the same tracked interval.
            return self.eval(agent, &Interval::new_unchecked(a.clone(), b.clone()));
        }
        let middle = tracked.sum(agent, &a_next, &b_prev);
        let mut total = middle;
        if !a_known {
            total += self.eval(agent, &Interval::new_unchecked(a.clone(), a_next))?;
        }
        if !b_known {
            total += self.eval(agent, &Interval::new_unchecked(b_prev, b.clone()))?;
        }
        Ok(total)
    }

    /// Smallest mark `m` with `value(piece ∩ [start, m)) = value`, where the
    /// value is renormalized to `view` when one is given. At most one `Eval`
    /// (closing the tracked interval `start` falls in) and one `Cut` (inside
    /// the tracked interval where the mark lands).
    pub fn super_cut(
        &mut self,
        agent: usize,
        piece: &Piece,
        start: &Rational,
        value: &Rational,
        view: Option<&RegionView>,
    ) -> Result<Rational> {
        self.check_agent(agent)?;
        self.ensure_tracked(piece)?;
        if value.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "negative cut value {value}"
            )));
        }
        self.ledger.super_cut_count[agent] += 1;
        let before = self.ledger.total_queries();
        let mark = self.super_cut_inner(agent, piece, start, value, view);
        self.note_super_charge(before);
        mark
    }

    fn super_cut_inner(
        &mut self,
        agent: usize,
        piece: &Piece,
        start: &Rational,
        value: &Rational,
        view: Option<&RegionView>,
    ) -> Result<Rational> {
        let target = match view {
            Some(v) => value * v.value(agent),
            None => value.clone(),
        };
        if target.is_zero() {
            return Ok(start.clone());
        }
        let rest =
            piece.intersect_interval(&Interval::new_unchecked(start.clone(), rational::one()));
        let mut acc = rational::zero();
        for frag in rest.intervals() {
            let mut lo = frag.lo().clone();
            if !self.ledger.tracked.is_boundary(&lo) {
                let next = self.ledger.tracked.boundary_at_or_after(&lo);
                let head = self.eval(agent, &Interval::new_unchecked(lo.clone(), next.clone()))?;
                if &acc + &head >= target {
                    let remaining = &target - &acc;
                    return self.cut(agent, &lo, &remaining);
                }
                acc += head;
                lo = next;
            }
            let landing =
                self.ledger
                    .tracked
                    .atoms(&lo, frag.hi())
                    .find_map(|(start, _, values)| {
                        if &acc + &values[agent] >= target {
                            Some((start.clone(), &target - &acc))
                        } else {
                            acc += &values[agent];
                            None
                        }
                    });
            if let Some((atom_start, remaining)) = landing {
                return self.cut(agent, &atom_start, &remaining);
            }
        }
        Err(Error::InsufficientValue {
            requested: target,
            available: acc,
        })
    }

    /// Checks every tracked value against the truth.
    pub fn audit(&self) -> Result<()> {
        for (lo, hi, values) in self.ledger.tracked.iter() {
            let interval = Interval::new_unchecked(lo.clone(), hi);
            for (agent, v) in values.iter().enumerate() {
                if *v != self.truth(agent, &interval) {
                    return Err(Error::Accounting(format!(
                        "tracked value of [{}, {}) for agent {agent} is {v}, truth differs",
                        interval.lo(),
                        interval.hi()
                    )));
                }
            }
        }
        Ok(())
    }
}
