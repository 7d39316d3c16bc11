//! Exact truncated multivariate power series.
//!
//! A [`TruncSeries`] knows every coefficient of total degree `<= trunc`;
//! higher coefficients are unknown, never implicitly zero. Binary operations
//! keep the smaller truncation order of their inputs.

mod implicit;
mod parse;
mod poly;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rat, rat_from_pair, rat_pair, Field, FromRat};
use crate::Rat;

pub use implicit::{implicit_solve, substitute_weighted};
pub use parse::parse_polynomial;
pub use poly::Polynomial;

/// Exponent vector of a monomial; its lexicographic order is the
/// valuation order.
pub type Exponent = Vec<u32>;

pub fn total_degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruncSeries<C> {
    arity: usize,
    trunc: u32,
    terms: BTreeMap<Exponent, C>,
}

/// Binary series operation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
}

impl<C: Field> TruncSeries<C> {
    pub fn zero(arity: usize, trunc: u32) -> Self {
        Self {
            arity,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, trunc: u32, c: C) -> Self {
        Self::monomial(arity, trunc, vec![0; arity], c)
    }

    pub fn one(arity: usize, trunc: u32) -> Self {
        Self::constant(arity, trunc, C::one())
    }

    /// The coordinate function `u_i`.
    pub fn var(arity: usize, trunc: u32, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Self::monomial(arity, trunc, e, C::one())
    }

    pub fn monomial(arity: usize, trunc: u32, exp: Exponent, c: C) -> Self {
        let mut s = Self::zero(arity, trunc);
        s.add_term(exp, c);
        s
    }

    /// Builds a series from terms, summing duplicates and dropping zeros and
    /// terms beyond the truncation order.
    pub fn from_terms(
        arity: usize,
        trunc: u32,
        terms: impl IntoIterator<Item = (Exponent, C)>,
    ) -> Result<Self> {
        let mut s = Self::zero(arity, trunc);
        for (e, c) in terms {
            if e.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: e.len(),
                });
            }
            s.add_term(e, c);
        }
        Ok(s)
    }

    fn add_term(&mut self, e: Exponent, c: C) {
        if total_degree(&e) > self.trunc || c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Nonzero terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::zero)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.arity])
    }

    pub fn support(&self) -> impl Iterator<Item = &Exponent> {
        self.terms.keys()
    }

    /// Lexicographically smallest exponent with a nonzero coefficient.
    pub fn lex_min(&self) -> Option<(&Exponent, &C)> {
        self.terms.iter().next()
    }

    pub fn truncated(&self, d: u32) -> Self {
        let trunc = d.min(self.trunc);
        Self {
            arity: self.arity,
            trunc,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| total_degree(e) <= trunc)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    fn check_arity(&self, other: &Self) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.truncated(other.trunc);
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = Self::zero(self.arity, self.trunc);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * k.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(self.arity, trunc);
        for (ea, ca) in &self.terms {
            let da = total_degree(ea);
            if da > trunc {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + total_degree(eb) > trunc {
                    continue;
                }
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn arith(&self, other: &Self, op: SeriesOp) -> Result<Self> {
        match op {
            SeriesOp::Add => self.add(other),
            SeriesOp::Mul => self.mul(other),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.arity, self.trunc);
        for _ in 0..k {
            acc = acc.mul(self).expect("same arity");
        }
        acc
    }

    /// Multiplicative inverse up to the truncation order, by the Newton
    /// iteration `x ← x (2 − a x)` with doubling precision.
    pub fn invert(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotAUnit);
        }
        let mut x = Self::constant(self.arity, 0, C::one() / c0);
        let mut prec = 0u32;
        while prec < self.trunc {
            prec = (2 * prec + 1).min(self.trunc);
            let a = self.truncated(prec);
            x.trunc = prec;
            let two = Self::constant(self.arity, prec, C::one() + C::one());
            let ax = a.mul(&x)?;
            x = x.mul(&two.sub(&ax)?)?;
        }
        x.trunc = self.trunc;
        Ok(x)
    }

    /// `∂/∂u_i`; the result is exact up to `trunc - 1`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.arity, self.trunc.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut k = C::zero();
            for _ in 0..e[i] {
                k = k + C::one();
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c.clone() * k);
        }
        out
    }

    /// Evaluates the truncated polynomial at a point.
    pub fn eval<T: Field>(&self, point: &[T], lift: impl Fn(&C) -> T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (e, c)| {
            let mut m = lift(c);
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    m = m * x.clone();
                }
            }
            acc + m
        })
    }

    pub fn map_coeffs<D: Field>(&self, f: impl Fn(&C) -> D) -> TruncSeries<D> {
        let mut out = TruncSeries::zero(self.arity, self.trunc);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// Whether every stored exponent respects the invariants.
    pub fn is_well_formed(&self) -> bool {
        self.terms
            .iter()
            .all(|(e, c)| e.len() == self.arity && total_degree(e) <= self.trunc && !c.is_zero())
    }
}

impl TruncSeries<Rat> {
    pub fn lift<T: FromRat>(&self) -> TruncSeries<T> {
        self.map_coeffs(T::from_rat)
    }

    pub fn eval_rat(&self, point: &[Rat]) -> Rat {
        self.eval(point, |c| c.clone())
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            arity: self.arity,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let [num, den] = rat_pair(c);
                    TermJson {
                        exp: e.clone(),
                        num,
                        den,
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            if total_degree(&t.exp) > j.trunc {
                return Err(Error::Parse(format!(
                    "term {:?} exceeds truncation order {}",
                    t.exp, j.trunc
                )));
            }
            terms.push((
                t.exp.clone(),
                rat_from_pair(&[t.num.clone(), t.den.clone()])?,
            ));
        }
        Self::from_terms(j.arity, j.trunc, terms)
    }

    /// Human-readable rendering with the given variable names.
    pub fn display_with(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut by_degree: Vec<(&Exponent, &Rat)> = self.terms.iter().collect();
        by_degree.sort_by(|a, b| total_degree(a.0).cmp(&total_degree(b.0)).then(b.0.cmp(a.0)));
        let mut s = String::new();
        for (k, (e, c)) in by_degree.into_iter().enumerate() {
            let neg = c < &Rat::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .zip(names)
                .filter(|(&p, _)| p > 0)
                .map(|(&p, n)| {
                    if p == 1 {
                        n.to_string()
                    } else {
                        format!("{n}^{p}")
                    }
                })
                .collect();
            if mono.is_empty() {
                s.push_str(&format_rat(&mag));
            } else if mag.is_one() {
                s.push_str(&mono.join("*"));
            } else {
                s.push_str(&format!("{}*{}", format_rat(&mag), mono.join("*")));
            }
        }
        s
    }
}

impl fmt::Debug for TruncSeries<Rat> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.arity).map(|i| format!("u{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        write!(f, "{} + O({})", self.display_with(&refs), self.trunc + 1)
    }
}

impl Serialize for TruncSeries<Rat> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TruncSeries<Rat> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SeriesJson::deserialize(d)?;
        TruncSeries::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Exponent,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub arity: usize,
    pub trunc: u32,
    pub terms: Vec<TermJson>,
}

pub fn series_arith<C: Field>(
    a: &TruncSeries<C>,
    b: &TruncSeries<C>,
    op: SeriesOp,
) -> Result<TruncSeries<C>> {
    a.arith(b, op)
}

pub fn series_invert<C: Field>(a: &TruncSeries<C>) -> Result<TruncSeries<C>> {
    a.invert()
}
