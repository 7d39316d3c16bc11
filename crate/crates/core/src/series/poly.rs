use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::Rat;

use super::{Exponent, TruncSeries};

/// Sparse polynomial with exact coefficients (no truncation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<C> {
    arity: usize,
    terms: BTreeMap<Exponent, C>,
}

impl<C: Field> Polynomial<C> {
    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: C) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(vec![0; arity], c);
        p
    }

    pub fn var(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        let mut p = Self::zero(arity);
        p.add_term(e, C::one());
        p
    }

    pub fn from_terms(
        arity: usize,
        terms: impl IntoIterator<Item = (Exponent, C)>,
    ) -> Result<Self> {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            if e.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: C) {
        if c.is_zero() {
            return;
        }
        let s = match self.terms.remove(&e) {
            Some(old) => old + c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(e, s);
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Degree in variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &C) -> Self {
        let mut out = Self::zero(self.arity);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * k.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.arity);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.arity, C::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.arity);
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

    pub fn eval(&self, point: &[C]) -> C {
        self.terms.iter().fold(C::zero(), |acc, (e, c)| {
            let mut m = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    m = m * x.clone();
                }
            }
            acc + m
        })
    }

    /// Substitutes a series for every variable.
    pub fn compose(&self, args: &[TruncSeries<C>]) -> Result<TruncSeries<C>> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        let first = args
            .first()
            .ok_or(Error::EmptyInput("composition arguments"))?;
        let (arity, trunc) = (first.arity(), args.iter().map(|a| a.trunc()).min().unwrap());
        // cache powers of each argument
        let mut powers: Vec<Vec<TruncSeries<C>>> = Vec::with_capacity(self.arity);
        for (i, a) in args.iter().enumerate() {
            let mut v = vec![TruncSeries::one(arity, trunc)];
            for _ in 0..self.degree_in(i) {
                let next = v.last().unwrap().mul(a)?;
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = TruncSeries::zero(arity, trunc);
        for (e, c) in &self.terms {
            let mut m = TruncSeries::constant(arity, trunc, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = m.mul(&powers[i][k as usize])?;
                }
            }
            out = out.add(&m)?;
        }
        Ok(out)
    }

    pub fn to_series(&self, trunc: u32) -> TruncSeries<C> {
        TruncSeries::from_terms(
            self.arity,
            trunc,
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())),
        )
        .expect("arity matches")
    }
}

impl Polynomial<Rat> {
    pub fn display_with(&self, names: &[&str]) -> String {
        self.to_series(self.degree()).display_with(names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn compose_and_derivative() {
        // G = y^2 - u^3 - 1 in (u, y)
        let u = Polynomial::<Rat>::var(2, 0);
        let y = Polynomial::<Rat>::var(2, 1);
        let g = y
            .pow(2)
            .sub(&u.pow(3))
            .sub(&Polynomial::constant(2, rat_int(1)));
        assert_eq!(g.degree(), 3);
        assert_eq!(g.derivative(1), y.scale(&rat_int(2)));
        assert_eq!(g.eval(&[rat_int(2), rat_int(3)]), rat_int(0));

        let s = TruncSeries::<Rat>::var(1, 4, 0);
        let one = TruncSeries::<Rat>::one(1, 4);
        let composed = g.compose(&[s.clone(), one.add(&s).unwrap()]).unwrap();
        // (1+s)^2 - s^3 - 1 = 2s + s^2 - s^3
        assert_eq!(composed.coeff(&[1]), rat_int(2));
        assert_eq!(composed.coeff(&[3]), rat_int(-1));
        assert_eq!(g.display_with(&["u", "y"]), "-1 + y^2 - u^3");
    }
}
