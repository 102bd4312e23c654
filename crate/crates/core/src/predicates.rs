//! Exact fairness checkers.
//!
//! Every checker returns a [`FairnessReport`]; a failing report carries a
//! [`Witness`] that can be re-evaluated independently. The complement-bounded
//! families are checked with a sorted-candidate reduction (for agent `i` and
//! coalition size `s`, the worst coalition packs `i` with the `s - 1` pieces
//! `i` values least), and [`brute_force_subset_check`] enumerates every
//! coalition as an independent oracle for it.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::measure::Instance;
use crate::rational::{self, int, Rational};

/// Fairness notion a report is about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "notion", rename_all = "kebab-case")]
pub enum Notion {
    Proportional,
    EnvyFree,
    SuperEnvyFree,
    EpsPerfect {
        #[serde(with = "rational::serde_str")]
        eps: Rational,
    },
    Chb {
        k: usize,
    },
    Clb {
        k: usize,
    },
    DeltaClb {
        k: usize,
        #[serde(with = "rational::serde_str")]
        delta: Rational,
    },
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notion::Proportional => write!(f, "proportional"),
            Notion::EnvyFree => write!(f, "envy-free"),
            Notion::SuperEnvyFree => write!(f, "super-envy-free"),
            Notion::EpsPerfect { eps } => write!(f, "{eps}-perfect"),
            Notion::Chb { k } => write!(f, "CHB-{k}"),
            Notion::Clb { k } => write!(f, "CLB-{k}"),
            Notion::DeltaClb { k, delta } => write!(f, "{delta}-CLB-{k}"),
        }
    }
}

/// A concrete violation: agent `agent` values `lhs` something that must not
/// exceed (or, for lower bounds, fall below) `rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub agent: usize,
    /// Coalition `S` for the complement-bounded families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coalition: Option<Vec<usize>>,
    /// The other agent whose piece is involved, for pairwise notions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<usize>,
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail {
        witness: Witness,
    },
    /// The complement-bounded families are only defined here for complete
    /// allocations.
    NotComplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessReport {
    #[serde(flatten)]
    pub notion: Notion,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl FairnessReport {
    fn new(notion: Notion, witness: Option<Witness>) -> Self {
        let verdict = match witness {
            Some(witness) => Verdict::Fail { witness },
            None => Verdict::Pass,
        };
        Self { notion, verdict }
    }

    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.verdict {
            Verdict::Fail { witness } => Some(witness),
            _ => None,
        }
    }
}

/// `values[i][j] = V_i(A_j)`, computed once per allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    values: Vec<Vec<Rational>>,
    complete: bool,
}

impl ValueTable {
    pub fn new(instance: &Instance, allocation: &Allocation) -> Result<Self> {
        if instance.n() != allocation.n() {
            return Err(Error::InvalidParameter(format!(
                "instance has {} agents, allocation has {} pieces",
                instance.n(),
                allocation.n()
            )));
        }
        let values = instance
            .valuations()
            .iter()
            .map(|v| {
                allocation
                    .pieces()
                    .iter()
                    .map(|p| v.eval_piece(p))
                    .collect()
            })
            .collect();
        Ok(Self {
            values,
            complete: allocation.is_complete(),
        })
    }

    /// A table given directly by its values; completeness is asserted by the
    /// caller.
    pub fn from_values(values: Vec<Vec<Rational>>, complete: bool) -> Self {
        Self { values, complete }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, agent: usize, piece: usize) -> &Rational {
        &self.values[agent][piece]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    fn share(&self) -> Rational {
        rational::rat(1, self.n() as i64)
    }

    pub fn proportional(&self) -> FairnessReport {
        let share = self.share();
        let witness = (0..self.n()).find_map(|i| {
            (self.values[i][i] < share).then(|| Witness {
                agent: i,
                coalition: None,
                other: None,
                lhs: self.values[i][i].clone(),
                rhs: share.clone(),
            })
        });
        FairnessReport::new(Notion::Proportional, witness)
    }

    pub fn envy_free(&self) -> FairnessReport {
        let n = self.n();
        let witness = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find_map(|(i, j)| {
                (self.values[i][j] > self.values[i][i]).then(|| Witness {
                    agent: i,
                    coalition: None,
                    other: Some(j),
                    lhs: self.values[i][j].clone(),
                    rhs: self.values[i][i].clone(),
                })
            });
        FairnessReport::new(Notion::EnvyFree, witness)
    }

    pub fn super_envy_free(&self) -> FairnessReport {
        let share = self.share();
        let n = self.n();
        let witness = (0..n).find_map(|i| {
            if self.values[i][i] < share {
                return Some(Witness {
                    agent: i,
                    coalition: None,
                    other: None,
                    lhs: self.values[i][i].clone(),
                    rhs: share.clone(),
                });
            }
            (0..n).filter(|&j| j != i).find_map(|j| {
                (self.values[i][j] > share).then(|| Witness {
                    agent: i,
                    coalition: None,
                    other: Some(j),
                    lhs: self.values[i][j].clone(),
                    rhs: share.clone(),
                })
            })
        });
        FairnessReport::new(Notion::SuperEnvyFree, witness)
    }

    pub fn eps_perfect(&self, eps: &Rational) -> FairnessReport {
        let share = self.share();
        let upper = &share + eps;
        let lower = &share - eps;
        let n = self.n();
        let witness = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find_map(|(i, j)| {
                let v = &self.values[i][j];
                let bound = if v > &upper {
                    Some(upper.clone())
                } else if v < &lower {
                    Some(lower.clone())
                } else {
                    None
                };
                bound.map(|rhs| Witness {
                    agent: i,
                    coalition: None,
                    other: Some(j),
                    lhs: v.clone(),
                    rhs,
                })
            });
        FairnessReport::new(Notion::EpsPerfect { eps: eps.clone() }, witness)
    }

    fn check_range(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.n() {
            return Err(Error::InvalidParameter(format!(
                "coalition bound k = {k} outside 1..={}",
                self.n()
            )));
        }
        Ok(())
    }

    /// Sorted-candidate check of `sum_{j not in S} V_i(A_j) <= bound(|S|)`
    /// over all `|S| <= k`, `i in S`. Smallest violating size is reported
    /// first, agents in index order.
    fn family_check(&self, k: usize, family: &BoundFamily) -> Option<Witness> {
        let n = self.n();
        for i in 0..n {
            if family.requires_proportionality() && self.values[i][i] < self.share() {
                return Some(Witness {
                    agent: i,
                    coalition: Some(vec![i]),
                    other: None,
                    lhs: self.complement_value(i, &[i]),
                    rhs: family.bound(n, 1),
                });
            }
        }
        // Others in ascending order of how much `i` values them; ties by index.
        let orders: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                others.sort_by(|&a, &b| self.values[i][a].cmp(&self.values[i][b]).then(a.cmp(&b)));
                others
            })
            .collect();
        for size in 1..=k {
            let bound = family.bound(n, size);
            for (i, order) in orders.iter().enumerate() {
                let mut coalition: Vec<usize> = order[..size - 1].to_vec();
                coalition.push(i);
                coalition.sort_unstable();
                let lhs = self.complement_value(i, &coalition);
                if lhs > bound {
                    return Some(Witness {
                        agent: i,
                        coalition: Some(coalition),
                        other: None,
                        lhs,
                        rhs: bound,
                    });
                }
            }
        }
        None
    }

    fn complement_value(&self, agent: usize, coalition: &[usize]) -> Rational {
        (0..self.n())
            .filter(|j| !coalition.contains(j))
            .fold(rational::zero(), |acc, j| acc + &self.values[agent][j])
    }

    fn family_report(
        &self,
        notion: Notion,
        k: usize,
        family: BoundFamily,
    ) -> Result<FairnessReport> {
        self.check_range(k)?;
        if !self.complete {
            return Ok(FairnessReport {
                notion,
                verdict: Verdict::NotComplete,
            });
        }
        Ok(FairnessReport::new(notion, self.family_check(k, &family)))
    }

    pub fn chb(&self, k: usize) -> Result<FairnessReport> {
        self.family_report(Notion::Chb { k }, k, BoundFamily::Harmonic)
    }

    pub fn clb(&self, k: usize) -> Result<FairnessReport> {
        self.family_report(Notion::Clb { k }, k, BoundFamily::Linear)
    }

    pub fn delta_clb(&self, k: usize, delta: &Rational) -> Result<FairnessReport> {
        self.family_report(
            Notion::DeltaClb {
                k,
                delta: delta.clone(),
            },
            k,
            BoundFamily::RelaxedLinear(delta.clone()),
        )
    }

    /// Exhaustive enumeration of every coalition of size at most `k`.
    pub fn brute_force(&self, k: usize, family: &BoundFamily) -> Result<FairnessReport> {
        let n = self.n();
        if n > BRUTE_FORCE_MAX_AGENTS {
            return Err(Error::InvalidParameter(format!(
                "brute force enumeration is limited to {BRUTE_FORCE_MAX_AGENTS} agents, got {n}"
            )));
        }
        self.check_range(k)?;
        let notion = family.notion(k);
        if !self.complete {
            return Ok(FairnessReport {
                notion,
                verdict: Verdict::NotComplete,
            });
        }
        // Same scan order as the fast check: size, then agent, then mask.
        for size in 1..=k {
            let masks: Vec<u32> = (1u32..(1 << n))
                .filter(|m| m.count_ones() as usize == size)
                .collect();
            let bound = family.bound(n, size);
            for i in 0..n {
                for &mask in masks.iter().filter(|&&m| m & (1 << i) != 0) {
                    let lhs = rational::sum(
                        (0..n)
                            .filter(|j| mask & (1 << j) == 0)
                            .map(|j| &self.values[i][j]),
                    );
                    if lhs > bound {
                        return Ok(FairnessReport::new(
                            notion,
                            Some(Witness {
                                agent: i,
                                coalition: Some((0..n).filter(|j| mask & (1 << j) != 0).collect()),
                                other: None,
                                lhs,
                                rhs: bound,
                            }),
                        ));
                    }
                }
            }
        }
        Ok(FairnessReport::new(notion, None))
    }
}

pub const BRUTE_FORCE_MAX_AGENTS: usize = 12;

/// Right-hand side of a complement-bounded constraint as a function of
/// `n` and `|S|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundFamily {
    /// `(n - |S|) / (n - |S| + 1)`
    Harmonic,
    /// `(n - |S|) / n`
    Linear,
    /// `(n - |S|) / n * (1 + delta)` for `|S| >= 2`, proportionality for `|S| = 1`.
    RelaxedLinear(Rational),
}

impl BoundFamily {
    pub fn bound(&self, n: usize, size: usize) -> Rational {
        let rest = int((n - size) as i64);
        match self {
            BoundFamily::Harmonic => &rest / (&rest + Rational::one()),
            BoundFamily::Linear => rest / int(n as i64),
            BoundFamily::RelaxedLinear(delta) => {
                let linear = rest / int(n as i64);
                if size >= 2 {
                    linear * (Rational::one() + delta)
                } else {
                    linear
                }
            }
        }
    }

    fn requires_proportionality(&self) -> bool {
        matches!(self, BoundFamily::RelaxedLinear(_))
    }

    fn notion(&self, k: usize) -> Notion {
        match self {
            BoundFamily::Harmonic => Notion::Chb { k },
            BoundFamily::Linear => Notion::Clb { k },
            BoundFamily::RelaxedLinear(delta) => Notion::DeltaClb {
                k,
                delta: delta.clone(),
            },
        }
    }
}

pub fn is_proportional(allocation: &Allocation, instance: &Instance) -> Result<FairnessReport> {
    Ok(ValueTable::new(instance, allocation)?.proportional())
}

pub fn is_envy_free(allocation: &Allocation, instance: &Instance) -> Result<FairnessReport> {
    Ok(ValueTable::new(instance, allocation)?.envy_free())
}

pub fn is_super_ef(allocation: &Allocation, instance: &Instance) -> Result<FairnessReport> {
    Ok(ValueTable::new(instance, allocation)?.super_envy_free())
}

pub fn is_eps_perfect(
    allocation: &Allocation,
    instance: &Instance,
    eps: &Rational,
) -> Result<FairnessReport> {
    Ok(ValueTable::new(instance, allocation)?.eps_perfect(eps))
}

pub fn check_chb(allocation: &Allocation, instance: &Instance, k: usize) -> Result<FairnessReport> {
    ValueTable::new(instance, allocation)?.chb(k)
}

pub fn check_clb(allocation: &Allocation, instance: &Instance, k: usize) -> Result<FairnessReport> {
    ValueTable::new(instance, allocation)?.clb(k)
}

pub fn check_delta_clb(
    allocation: &Allocation,
    instance: &Instance,
    k: usize,
    delta: &Rational,
) -> Result<FairnessReport> {
    ValueTable::new(instance, allocation)?.delta_clb(k, delta)
}

pub fn brute_force_subset_check(
    allocation: &Allocation,
    instance: &Instance,
    k: usize,
    family: &BoundFamily,
) -> Result<FairnessReport> {
    ValueTable::new(instance, allocation)?.brute_force(k, family)
}

/// Recomputes a witness's left-hand side from scratch and confirms it is a
/// genuine violation of `notion`.
pub fn witness_is_violation(
    notion: &Notion,
    witness: &Witness,
    allocation: &Allocation,
    instance: &Instance,
) -> Result<bool> {
    let v = instance.valuation(witness.agent)?;
    let n = allocation.n();
    let share = rational::rat(1, n as i64);
    Ok(match notion {
        Notion::Proportional => {
            let own = v.eval_piece(allocation.piece(witness.agent)?);
            own == witness.lhs && own < share
        }
        Notion::EnvyFree | Notion::SuperEnvyFree | Notion::EpsPerfect { .. } => {
            let own = v.eval_piece(allocation.piece(witness.agent)?);
            match witness.other {
                Some(j) => {
                    let other = v.eval_piece(allocation.piece(j)?);
                    other == witness.lhs
                        && match notion {
                            Notion::EnvyFree => other > own,
                            Notion::SuperEnvyFree => other > share,
                            Notion::EpsPerfect { eps } => {
                                other > &share + eps || other < &share - eps
                            }
                            _ => unreachable!(),
                        }
                }
                None => own == witness.lhs && own < share,
            }
        }
        Notion::Chb { .. } | Notion::Clb { .. } | Notion::DeltaClb { .. } => {
            let coalition = witness.coalition.clone().unwrap_or_default();
            let outside: Vec<usize> = (0..n).filter(|j| !coalition.contains(j)).collect();
            let lhs = v.eval_piece(&allocation.bundle(&outside)?);
            let family = match notion {
                Notion::Chb { .. } => BoundFamily::Harmonic,
                Notion::Clb { .. } => BoundFamily::Linear,
                Notion::DeltaClb { delta, .. } => BoundFamily::RelaxedLinear(delta.clone()),
                _ => unreachable!(),
            };
            coalition.contains(&witness.agent)
                && lhs == witness.lhs
                && lhs > family.bound(n, coalition.len())
        }
    })
}

/// Value of a piece for an agent, used by callers that only have pieces.
pub fn piece_value(instance: &Instance, agent: usize, piece: &Piece) -> Result<Rational> {
    Ok(instance.valuation(agent)?.eval_piece(piece))
}

/// `true` iff `value` is zero; convenience for report consumers.
pub fn is_zero(value: &Rational) -> bool {
    value.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{self, ValueMatrix};
    use crate::rational::rat;

    fn table(rows: &[&[(i64, i64)]]) -> ValueTable {
        ValueTable::from_values(
            rows.iter()
                .map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect())
                .collect(),
            true,
        )
    }

    fn uniform_split(n: usize) -> (Instance, Allocation) {
        hierarchy::realize_value_matrix(&ValueMatrix::uniform(n)).unwrap()
    }

    #[test]
    fn proportional_examples() {
        let (inst, alloc) = uniform_split(4);
        assert!(is_proportional(&alloc, &inst).unwrap().passed());

        let t = table(&[&[(1, 1), (0, 1)], &[(1, 1), (0, 1)]]);
        let r = t.proportional();
        let w = r.witness().unwrap();
        assert_eq!(
            (w.agent, w.lhs.clone(), w.rhs.clone()),
            (1, rat(0, 1), rat(1, 2))
        );

        let row = [(1, 3), (1, 3), (1, 3), (0, 1)];
        let ef_rows: Vec<Vec<(i64, i64)>> = (0..4)
            .map(|i| (0..4).map(|j| row[(j + 4 - i) % 4]).collect())
            .collect();
        let refs: Vec<&[(i64, i64)]> = ef_rows.iter().map(Vec::as_slice).collect();
        assert!(table(&refs).proportional().passed());
    }

    #[test]
    fn envy_free_examples() {
        let (inst, alloc) = uniform_split(3);
        assert!(is_envy_free(&alloc, &inst).unwrap().passed());
        assert!(table(&[&[(1, 1)]]).envy_free().passed());
        let t = table(&[
            &[(1, 3), (1, 2), (1, 6)],
            &[(1, 6), (1, 3), (1, 2)],
            &[(1, 2), (1, 6), (1, 3)],
        ]);
        let w = t.envy_free().witness().cloned().unwrap();
        assert_eq!((w.agent, w.other), (0, Some(1)));
    }

    #[test]
    fn super_ef_examples() {
        assert!(table(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]])
            .super_envy_free()
            .passed());
        let t = table(&[&[(49, 100), (51, 100)], &[(1, 2), (1, 2)]]);
        assert!(!t.super_envy_free().passed());
        let t = table(&[
            &[(1, 2), (1, 2), (0, 1)],
            &[(0, 1), (1, 2), (1, 2)],
            &[(0, 1), (0, 1), (1, 1)],
        ]);
        assert!(t.clb(3).unwrap().passed() == t.super_envy_free().passed());
    }

    #[test]
    fn eps_perfect_examples() {
        let (inst, alloc) = uniform_split(5);
        assert!(is_eps_perfect(&alloc, &inst, &rat(0, 1)).unwrap().passed());
        let t = table(&[&[(11, 20), (9, 20)], &[(1, 2), (1, 2)]]);
        assert!(!t.eps_perfect(&rat(0, 1)).passed());
        assert!(t.eps_perfect(&rat(1, 20)).passed());
        assert!(!t.eps_perfect(&rat(1, 21)).passed());
    }

    #[test]
    fn chb_k1_is_proportionality_and_bound_arithmetic() {
        assert_eq!(BoundFamily::Harmonic.bound(4, 2), rat(2, 3));
        let t = table(&[&[(1, 4), (3, 4)], &[(1, 1), (0, 1)]]);
        assert_eq!(t.chb(1).unwrap().passed(), t.proportional().passed());
        assert!(t.chb(3).is_err());
        assert!(t.chb(0).is_err());
    }

    #[test]
    fn incomplete_allocations_are_not_evaluated() {
        let t = ValueTable::from_values(
            vec![vec![rat(1, 2), rat(0, 1)], vec![rat(0, 1), rat(1, 2)]],
            false,
        );
        assert_eq!(t.chb(2).unwrap().verdict, Verdict::NotComplete);
        assert_eq!(t.clb(2).unwrap().verdict, Verdict::NotComplete);
    }

    #[test]
    fn brute_force_guard() {
        let t = ValueTable::from_values(vec![vec![rat(1, 13); 13]; 13], true);
        assert!(t.brute_force(2, &BoundFamily::Linear).is_err());
    }

    #[test]
    fn delta_clb_at_zero_is_clb_and_proportional() {
        let t = table(&[
            &[(1, 3), (1, 3), (1, 3)],
            &[(1, 2), (1, 2), (0, 1)],
            &[(1, 3), (1, 3), (1, 3)],
        ]);
        let zero = rat(0, 1);
        for k in 1..=3 {
            assert_eq!(
                t.delta_clb(k, &zero).unwrap().passed(),
                t.clb(k).unwrap().passed() && t.proportional().passed()
            );
        }
    }

    #[test]
    fn report_json_shape() {
        let t = table(&[&[(1, 4), (3, 4)], &[(1, 2), (1, 2)]]);
        let r = t.clb(2).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["notion"], "clb");
        assert_eq!(json["verdict"], "fail");
        assert_eq!(json["witness"]["agent"], 0);
        assert_eq!(json["witness"]["lhs"], "3/4");
        let back: FairnessReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }
}
