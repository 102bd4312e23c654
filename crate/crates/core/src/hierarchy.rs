//! Concrete allocations separating the fairness notions.
//!
//! Each constructor fixes a value matrix `M` (row `i` is agent `i`'s value
//! for every piece) and realizes it as an instance plus an allocation of
//! `n` equal-length intervals. Free index choices are fixed as
//! `j_i = i + 1`, `l_i = i + 2` and `Z_i = {i + 1, ..., i + k}` (mod `n`).

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, Piece};
use crate::error::{Error, Result};
use crate::measure::{Instance, Interval, Valuation};
use crate::rational::{self, int, rat, Rational};

/// Row-stochastic, non-negative `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueMatrix {
    rows: Vec<Vec<Rational>>,
}

impl ValueMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("value matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|x| x.is_negative()) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has a negative entry"
                )));
            }
            let sum = row.iter().fold(rational::zero(), |acc, x| acc + x);
            if sum != rational::one() {
                return Err(Error::InvalidParameter(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            rows: vec![vec![rat(1, n as i64); n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { int(1) } else { int(0) })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }
}

/// Instance and allocation with `V_i(A_j) = M[i][j]`: piece `j` is
/// `[j/n, (j+1)/n)` and agent `i` has density `n * M[i][j]` on it.
pub fn realize_value_matrix(m: &ValueMatrix) -> Result<(Instance, Allocation)> {
    let n = m.n();
    let breakpoints: Vec<Rational> = (0..=n).map(|j| rat(j as i64, n as i64)).collect();
    let scale = int(n as i64);
    let valuations = m
        .rows
        .iter()
        .map(|row| {
            Valuation::new(
                breakpoints.clone(),
                row.iter().map(|x| x * &scale).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let pieces = breakpoints
        .windows(2)
        .map(|w| Piece::from_interval(Interval::new_unchecked(w[0].clone(), w[1].clone())))
        .collect();
    Ok((Instance::new(valuations)?, Allocation::new(pieces)))
}

fn matrix_from(n: usize, entry: impl Fn(usize, usize) -> Rational) -> Result<ValueMatrix> {
    ValueMatrix::new(
        (0..n)
            .map(|i| (0..n).map(|j| entry(i, j)).collect())
            .collect(),
    )
}

/// Offset of `j` after `i`, cyclically.
fn ahead(i: usize, j: usize, n: usize) -> usize {
    (j + n - i) % n
}

/// `V_i(A_i) = 1/(n-k+1)`, `V_i(A_{j_i})` the rest: harmonic bound at `k`
/// holds, at `k + 1` fails (for `k <= n - 2`).
pub fn chb_strict_matrix(n: usize, k: usize) -> Result<ValueMatrix> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= n - 1, got n = {n}, k = {k}"
        )));
    }
    let own = rat(1, (n - k + 1) as i64);
    let rest = rational::one() - &own;
    matrix_from(n, |i, j| match ahead(i, j, n) {
        0 => own.clone(),
        1 => rest.clone(),
        _ => rational::zero(),
    })
}

/// `V_i(A_i) = 1/3`, `V_i(A_{j_i}) = 1/2`, `V_i(A_{l_i}) = 1/6`: every agent
/// envies its successor yet the harmonic bound holds for all coalitions.
pub fn chb_not_ef_matrix(n: usize) -> Result<ValueMatrix> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got {n}")));
    }
    matrix_from(n, |i, j| match ahead(i, j, n) {
        0 => rat(1, 3),
        1 => rat(1, 2),
        2 => rat(1, 6),
        _ => rational::zero(),
    })
}

/// `V_i(A_i) = k/n`, zeros on `Z_i`, and `(1 + 1/(n-k-1))/n` on the other
/// `n - k - 1` pieces.
pub fn clb_strict_matrix(n: usize, k: usize) -> Result<ValueMatrix> {
    if k == 0 || k + 1 >= n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k < n - 1, got n = {n}, k = {k}"
        )));
    }
    let nn = n as i64;
    let spread = (rational::one() + rat(1, (n - k - 1) as i64)) / int(nn);
    matrix_from(n, |i, j| match ahead(i, j, n) {
        0 => rat(k as i64, nn),
        d if d <= k => rational::zero(),
        _ => spread.clone(),
    })
}

/// `V_i(A_i) = (ceil(n/2) - 1)/n` and the rest on `A_{j_i}`.
pub fn clb_not_ef_matrix(n: usize) -> Result<ValueMatrix> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got {n}")));
    }
    let own = rat((n.div_ceil(2) - 1) as i64, n as i64);
    let rest = rational::one() - &own;
    matrix_from(n, |i, j| match ahead(i, j, n) {
        0 => own.clone(),
        1 => rest.clone(),
        _ => rational::zero(),
    })
}

/// `V_i(A_{j_i}) = 0` and `1/(n-1)` for every other piece, own included.
pub fn ef_not_clb2_matrix(n: usize) -> Result<ValueMatrix> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got {n}")));
    }
    let share = rat(1, (n - 1) as i64);
    matrix_from(n, |i, j| match ahead(i, j, n) {
        1 => rational::zero(),
        _ => share.clone(),
    })
}

pub fn counterexample_chb_strict(n: usize, k: usize) -> Result<(Instance, Allocation)> {
    realize_value_matrix(&chb_strict_matrix(n, k)?)
}

pub fn counterexample_chb_not_ef(n: usize) -> Result<(Instance, Allocation)> {
    realize_value_matrix(&chb_not_ef_matrix(n)?)
}

pub fn counterexample_clb_strict(n: usize, k: usize) -> Result<(Instance, Allocation)> {
    realize_value_matrix(&clb_strict_matrix(n, k)?)
}

pub fn counterexample_clb_not_ef(n: usize) -> Result<(Instance, Allocation)> {
    realize_value_matrix(&clb_not_ef_matrix(n)?)
}

pub fn counterexample_ef_not_clb2(n: usize) -> Result<(Instance, Allocation)> {
    realize_value_matrix(&ef_not_clb2_matrix(n)?)
}

/// Named constructors, for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    ChbStrict,
    ChbNotEf,
    ClbStrict,
    ClbNotEf,
    EfNotClb2,
}

impl Case {
    pub const ALL: [Case; 5] = [
        Case::ChbStrict,
        Case::ChbNotEf,
        Case::ClbStrict,
        Case::ClbNotEf,
        Case::EfNotClb2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::ChbStrict => "chb-strict",
            Case::ChbNotEf => "chb-not-ef",
            Case::ClbStrict => "clb-strict",
            Case::ClbNotEf => "clb-not-ef",
            Case::EfNotClb2 => "ef-not-clb2",
        }
    }

    /// Whether the case takes a coalition size parameter.
    pub fn takes_k(self) -> bool {
        matches!(self, Case::ChbStrict | Case::ClbStrict)
    }

    pub fn matrix(self, n: usize, k: usize) -> Result<ValueMatrix> {
        match self {
            Case::ChbStrict => chb_strict_matrix(n, k),
            Case::ChbNotEf => chb_not_ef_matrix(n),
            Case::ClbStrict => clb_strict_matrix(n, k),
            Case::ClbNotEf => clb_not_ef_matrix(n),
            Case::EfNotClb2 => ef_not_clb2_matrix(n),
        }
    }

    pub fn build(self, n: usize, k: usize) -> Result<(Instance, Allocation)> {
        realize_value_matrix(&self.matrix(n, k)?)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown hierarchy case {s:?}")))
    }
}
