use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::{determinant, inverse};
use crate::error::{Error, Result};
use crate::scalar::{rat_int, serde_rat_vec};
use crate::Rat;

/// `x ↦ W x + a` with `W ∈ GL(n, Z)` and a rational translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularAffineMap {
    pub w: Vec<Vec<i64>>,
    #[serde(with = "serde_rat_vec")]
    pub a: Vec<Rat>,
}

impl UnimodularAffineMap {
    pub fn new(w: Vec<Vec<i64>>, a: Vec<Rat>) -> Result<Self> {
        let n = w.len();
        if let Some(r) = w.iter().find(|r| r.len() != n) {
            return Err(Error::ArityMismatch {
                expected: n,
                found: r.len(),
            });
        }
        if a.len() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: a.len(),
            });
        }
        let m = Self { w, a };
        if m.det().abs() != 1 {
            return Err(Error::InvalidArgument(format!(
                "matrix {:?} is not unimodular (det {})",
                m.w,
                m.det()
            )));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let w = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        Self {
            w,
            a: vec![Rat::zero(); n],
        }
    }

    pub fn translation(a: Vec<Rat>) -> Self {
        let mut m = Self::identity(a.len());
        m.a = a;
        m
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn det(&self) -> i64 {
        let q: Vec<Vec<Rat>> = self.w_rat();
        determinant(&q).to_integer().to_i64().unwrap_or(0)
    }

    /// Whether `|det W| = 1`; deserialized maps are not validated until this
    /// is called.
    pub fn is_unimodular(&self) -> bool {
        self.w.iter().all(|r| r.len() == self.dim())
            && self.a.len() == self.dim()
            && self.det().abs() == 1
    }

    pub fn w_rat(&self) -> Vec<Vec<Rat>> {
        self.w
            .iter()
            .map(|r| r.iter().map(|&x| rat_int(x)).collect())
            .collect()
    }

    pub fn apply_linear(&self, p: &[Rat]) -> Vec<Rat> {
        self.w
            .iter()
            .map(|row| {
                row.iter()
                    .zip(p)
                    .fold(Rat::zero(), |acc, (&w, x)| acc + x * rat_int(w))
            })
            .collect()
    }

    pub fn apply(&self, p: &[Rat]) -> Vec<Rat> {
        self.apply_linear(p)
            .into_iter()
            .zip(&self.a)
            .map(|(x, a)| x + a)
            .collect()
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim();
        let w = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.w[i][k] * other.w[k][j]).sum())
                    .collect()
            })
            .collect();
        let a = self.apply(&other.a);
        Self { w, a }
    }

    pub fn inverse(&self) -> Self {
        let inv = inverse(&self.w_rat()).expect("unimodular matrix is invertible");
        let w: Vec<Vec<i64>> = inv
            .iter()
            .map(|r| r.iter().map(|x| x.to_integer().to_i64().unwrap()).collect())
            .collect();
        let mut m = Self {
            w,
            a: vec![Rat::zero(); self.dim()],
        };
        m.a = m.apply_linear(&self.a).into_iter().map(|x| -x).collect();
        m
    }
}

pub fn apply_unimodular(t: &UnimodularAffineMap, p: &[Rat]) -> Result<Vec<Rat>> {
    if p.len() != t.dim() {
        return Err(Error::ArityMismatch {
            expected: t.dim(),
            found: p.len(),
        });
    }
    Ok(t.apply(p))
}
