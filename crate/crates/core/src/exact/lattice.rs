use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::snf::smith_normal_form;
use crate::error::{Error, Result};

/// A point of the integer lattice `Z^n`.
///
/// The derived ordering is the lexicographic order with the first coordinate
/// most significant, which is the order used by the initial-term valuation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn from_exponent(e: &[u32]) -> Self {
        Self(e.iter().map(|&x| x as i64).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dot(&self, other: &[i64]) -> i64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|a| a * k).collect())
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&a| a >= 0)
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// Whether the differences `alpha - beta` of elements of `points` span `Z^n`
/// as a group.
pub fn differences_generate_lattice(points: &[LatticeVector]) -> Result<bool> {
    let first = points.first().ok_or(Error::EmptyInput("value set"))?;
    let n = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(Error::ArityMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    if n == 0 {
        return Ok(true);
    }
    let rows: Vec<Vec<BigInt>> = points[1..]
        .iter()
        .map(|p| p.sub(first).0.into_iter().map(BigInt::from).collect())
        .collect();
    if rows.len() < n {
        return Ok(false);
    }
    let snf = smith_normal_form(&rows);
    Ok((0..n).all(|i| snf.d[i][i].is_one()))
}
