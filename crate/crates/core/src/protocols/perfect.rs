//! Near-perfect partitions of a region into `z` parts.
//!
//! The region is split into cells. Each cell is cut into `z` sub-pieces of
//! equal length, and part `p` receives one sub-piece of every terminal cell,
//! so a uniform participant always sees an exactly perfect partition. A cell
//! whose sub-pieces are worth the same to every agent ("flat") contributes
//! exactly `1/z` of its value to each part. Other cells are refined along
//! the sub-pieces until they are worth at most a threshold `eta` to every
//! agent; such small cells are spread over the parts with a greedy rotation.
//! The result is verified exactly and `eta` shrinks until it passes.

use num_traits::Zero;

use crate::allocation::Piece;
use crate::error::{Error, Result};
use crate::measure::Interval;
use crate::oracle::Oracle;
use crate::rational::{self, int, Rational};

/// Someone whose view of the parts must be near-perfect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Participant {
    Agent(usize),
    /// A phantom with the uniform valuation; answered without queries.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectPartition {
    pub parts: Vec<Piece>,
    /// Fresh cut points registered with the oracle.
    pub cuts_introduced: u64,
    /// Verification rounds needed (1 when the first assembly passed).
    pub rounds: usize,
}

const MAX_ROUNDS: usize = 64;
const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone)]
struct Cell {
    /// `z + 1` equally spaced points from the cell's left to right end.
    points: Vec<Rational>,
    /// `values[a][k]`: agent `a`'s value of sub-piece `k`.
    values: Vec<Vec<Rational>>,
    /// Largest normalized value of the whole cell over the agents.
    weight: Rational,
}

impl Cell {
    fn sub_interval(&self, k: usize) -> Interval {
        Interval::new_unchecked(self.points[k].clone(), self.points[k + 1].clone())
    }

    fn is_flat(&self) -> bool {
        self.values
            .iter()
            .all(|row| row.windows(2).all(|w| w[0] == w[1]))
    }

    fn linked(&self, k: usize) -> bool {
        self.values.iter().all(|row| row[k] == row[k + 1])
    }
}

struct Partitioner<'o, 'a> {
    oracle: &'o mut Oracle<'a>,
    agents: Vec<usize>,
    totals: Vec<Rational>,
    z: usize,
}

impl Partitioner<'_, '_> {
    fn open(&mut self, lo: &Rational, hi: &Rational) -> Result<Cell> {
        let z = self.z;
        let width = (hi - lo) / int(z as i64);
        let mut points = Vec::with_capacity(z + 1);
        points.push(lo.clone());
        for k in 1..z {
            let p = lo + &width * int(k as i64);
            self.oracle.register_cut(&p)?;
            points.push(p);
        }
        points.push(hi.clone());
        let tracked = self.oracle.ledger().tracked();
        let values: Vec<Vec<Rational>> = self
            .agents
            .iter()
            .map(|&a| {
                (0..z)
                    .map(|k| tracked.sum(a, &points[k], &points[k + 1]))
                    .collect()
            })
            .collect();
        let weight = values
            .iter()
            .zip(&self.totals)
            .map(|(row, total)| row.iter().fold(rational::zero(), |acc, v| acc + v) / total)
            .max()
            .unwrap_or_else(rational::zero);
        Ok(Cell {
            points,
            values,
            weight,
        })
    }

    /// Splits a non-flat cell along maximal runs of linked sub-pieces.
    fn children(&mut self, cell: &Cell) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 0..self.z {
            if k + 1 == self.z || !cell.linked(k) {
                out.push(self.open(&cell.points[start], &cell.points[k + 1])?);
                start = k + 1;
            }
        }
        Ok(out)
    }

    /// Processes cells until each is flat or worth at most `eta`.
    fn settle(
        &mut self,
        mut pending: Vec<Cell>,
        eta: &Rational,
        flat: &mut Vec<Cell>,
        small: &mut Vec<Cell>,
    ) -> Result<()> {
        while let Some(cell) = pending.pop() {
            if flat.len() + small.len() + pending.len() > MAX_CELLS {
                return Err(Error::SubroutineFailure(format!(
                    "more than {MAX_CELLS} cells needed"
                )));
            }
            if cell.is_flat() {
                flat.push(cell);
            } else if &cell.weight <= eta {
                small.push(cell);
            } else {
                pending.extend(self.children(&cell)?);
            }
        }
        Ok(())
    }

    /// Gives sub-piece `k` of every flat cell to part `k` and rotates the
    /// small cells greedily to keep the floating-point deviation low.
    fn assemble(&self, flat: &[Cell], small: &[Cell]) -> (Vec<Vec<Interval>>, Vec<Vec<Rational>>) {
        let z = self.z;
        let na = self.agents.len();
        let mut intervals: Vec<Vec<Interval>> = vec![Vec::new(); z];
        let mut values: Vec<Vec<Rational>> = vec![vec![rational::zero(); z]; na];
        let mut place = |cell: &Cell, rotation: usize, intervals: &mut Vec<Vec<Interval>>| {
            for k in 0..z {
                let p = (k + rotation) % z;
                intervals[p].push(cell.sub_interval(k));
                for a in 0..na {
                    values[a][p] += &cell.values[a][k];
                }
            }
        };
        for cell in flat {
            place(cell, 0, &mut intervals);
        }
        let totals: Vec<f64> = self.totals.iter().map(rational::to_f64).collect();
        let mut order: Vec<&Cell> = small.iter().collect();
        order.sort_by(|a, b| b.weight.cmp(&a.weight).then(a.points[0].cmp(&b.points[0])));
        let mut deviation = vec![vec![0.0f64; z]; na];
        for cell in order {
            let contrib: Vec<Vec<f64>> = (0..na)
                .map(|a| {
                    cell.values[a]
                        .iter()
                        .map(|v| rational::to_f64(v) / totals[a])
                        .collect()
                })
                .collect();
            let mean: Vec<f64> = contrib
                .iter()
                .map(|row| row.iter().sum::<f64>() / z as f64)
                .collect();
            let score = |r: usize| {
                let mut worst = 0.0f64;
                for a in 0..na {
                    for k in 0..z {
                        let p = (k + r) % z;
                        worst = worst.max((deviation[a][p] + contrib[a][k] - mean[a]).abs());
                    }
                }
                worst
            };
            let best = (0..z)
                .map(|r| (score(r), r))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
                .map_or(0, |(_, r)| r);
            for a in 0..na {
                for k in 0..z {
                    deviation[a][(k + best) % z] += contrib[a][k] - mean[a];
                }
            }
            place(cell, best, &mut intervals);
        }
        (intervals, values)
    }

    fn within(&self, values: &[Vec<Rational>], eps: &Rational) -> bool {
        let share = rational::rat(1, self.z as i64);
        values.iter().zip(&self.totals).all(|(row, total)| {
            row.iter()
                .all(|v| rational::abs(&(v / total - &share)) <= *eps)
        })
    }
}

/// Partitions `region` into `z` pieces, each worth `1/z ± eps` of the region
/// to every participant (values renormalized to the region).
pub fn eps_perfect_partition(
    oracle: &mut Oracle<'_>,
    participants: &[Participant],
    z: usize,
    eps: &Rational,
    region: &Piece,
) -> Result<PerfectPartition> {
    if z == 0 {
        return Err(Error::InvalidParameter(
            "a partition needs at least one part".into(),
        ));
    }
    if eps < &rational::zero() {
        return Err(Error::InvalidParameter(format!(
            "negative perfection target {eps}"
        )));
    }
    if region.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot partition an empty region".into(),
        ));
    }
    let mut agents: Vec<usize> = participants
        .iter()
        .filter_map(|p| match p {
            Participant::Agent(a) => Some(*a),
            Participant::Uniform => None,
        })
        .collect();
    agents.sort_unstable();
    agents.dedup();
    let fresh_before = oracle.ledger().fresh_cuts();
    oracle.register_piece(region)?;
    let mut totals = Vec::with_capacity(agents.len());
    for &a in &agents {
        let v = oracle.known_value(a, region)?;
        if v.is_zero() {
            return Err(Error::DegenerateResidue { agent: a });
        }
        totals.push(v);
    }
    if z == 1 {
        return Ok(PerfectPartition {
            parts: vec![region.clone()],
            cuts_introduced: oracle.ledger().fresh_cuts() - fresh_before,
            rounds: 1,
        });
    }
    let mut worker = Partitioner {
        oracle,
        agents,
        totals,
        z,
    };
    let mut pending = Vec::with_capacity(region.intervals().len());
    for i in region.intervals().iter().rev() {
        pending.push(worker.open(i.lo(), i.hi())?);
    }
    let mut eta = eps.clone();
    let mut flat = Vec::new();
    let mut small = Vec::new();
    for round in 1..=MAX_ROUNDS {
        worker.settle(pending, &eta, &mut flat, &mut small)?;
        let (intervals, values) = worker.assemble(&flat, &small);
        if worker.within(&values, eps) {
            let parts: Vec<Piece> = intervals.into_iter().map(Piece::from_intervals).collect();
            let region_len = region.length();
            let share = rational::rat(1, z as i64);
            if participants.contains(&Participant::Uniform)
                && parts.iter().any(|p| p.length() / &region_len != share)
            {
                return Err(Error::InvariantViolated(
                    "equal-length split is not exact for the uniform participant".into(),
                ));
            }
            return Ok(PerfectPartition {
                parts,
                cuts_introduced: worker.oracle.ledger().fresh_cuts() - fresh_before,
                rounds: round,
            });
        }
        eta /= int(z as i64);
        let (expand, keep): (Vec<Cell>, Vec<Cell>) =
            small.into_iter().partition(|c| c.weight > eta);
        small = keep;
        pending = Vec::new();
        for cell in &expand {
            pending.extend(worker.children(cell)?);
        }
    }
    Err(Error::SubroutineFailure(format!(
        "no {eps}-perfect partition into {z} parts after {MAX_ROUNDS} rounds"
    )))
}
