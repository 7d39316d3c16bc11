//! Root-counting check of the degree of a monomial curve.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use okbody_core::scalar::rat;
use okbody_core::{Error, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliResult;

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
type UPoly = Vec<Rat>;

fn trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn derivative(p: &[Rat]) -> UPoly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rat::from_integer((i as i64).into()))
            .collect(),
    )
}

fn rem(a: &[Rat], b: &[Rat]) -> UPoly {
    let mut r = a.to_vec();
    let lb = b.last().expect("nonzero divisor").clone();
    while r.len() >= b.len() {
        let q = r.last().unwrap().clone() / lb.clone();
        let shift = r.len() - b.len();
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= q.clone() * c;
        }
        r.pop();
        r = trim(r);
    }
    r
}

fn gcd(a: UPoly, b: UPoly) -> UPoly {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

/// Number of distinct roots in `C*` of `Σ a_j c_j u^{β_j − min β}`, or
/// `None` for a draw with a repeated root or vanishing end coefficient.
pub fn distinct_nonzero_roots(values: &[i64], coeffs: &[Rat]) -> Option<usize> {
    let lo = *values.iter().min()?;
    let hi = *values.iter().max()?;
    let mut p = vec![Rat::zero(); (hi - lo) as usize + 1];
    for (&b, c) in values.iter().zip(coeffs) {
        p[(b - lo) as usize] += c;
    }
    let p = trim(p);
    if p.first().is_none_or(|c| c.is_zero()) || p.len() != (hi - lo) as usize + 1 {
        return None;
    }
    let deg = p.len() - 1;
    let g = gcd(p.clone(), derivative(&p));
    if g.len() > 1 {
        return None;
    }
    Some(deg)
}

fn draw(rng: &mut ChaCha8Rng) -> Rat {
    let mut num = 0;
    while num == 0 {
        num = rng.gen_range(-20i64..=20);
    }
    rat(num, rng.gen_range(1i64..=10))
}

/// Degree of the curve `u ↦ (c_j u^{β_j})` by counting roots of random
/// linear sections; majority over `trials` draws (ties go to the smaller
/// count).
pub fn bk_oracle_curve_with(values: &[i64], c: &[Rat], trials: usize, seed: u64) -> CliResult<i64> {
    let mut vals = values.to_vec();
    vals.sort_unstable();
    vals.dedup();
    if vals.len() != values.len() {
        return Err(Error::InvalidArgument("values must be distinct".into()).into());
    }
    if vals.len() < 2 {
        return Err(Error::InvalidArgument("need at least two values".into()).into());
    }
    if c.len() != values.len() {
        return Err(Error::ArityMismatch {
            expected: values.len(),
            found: c.len(),
        }
        .into());
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()).into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..trials {
        let mut retries = 0;
        let count = loop {
            let a: Vec<Rat> = c.iter().map(|cj| draw(&mut rng) * cj).collect();
            if let Some(k) = distinct_nonzero_roots(values, &a) {
                break k;
            }
            retries += 1;
            if retries > 100 {
                return Err(
                    Error::InvalidArgument("every random section was degenerate".into()).into(),
                );
            }
        };
        *votes.entry(count).or_default() += 1;
    }
    let best = votes
        .iter()
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
        .map(|(k, _)| *k)
        .unwrap();
    Ok(best as i64)
}

/// [`bk_oracle_curve_with`] for unit coefficients.
pub fn bk_oracle_curve(values: &[i64], trials: usize, seed: u64) -> CliResult<i64> {
    bk_oracle_curve_with(values, &vec![Rat::one(); values.len()], trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(bk_oracle_curve(&[0, 1, 3], 5, 1).unwrap(), 3);
        assert_eq!(bk_oracle_curve(&[0, 1], 3, 1).unwrap(), 1);
        assert_eq!(bk_oracle_curve(&[2, 7], 3, 1).unwrap(), 5);
        assert_eq!(bk_oracle_curve(&[7, 2], 3, 9).unwrap(), 5);
    }

    #[test]
    fn repeated_roots_are_degenerate() {
        // 1 + 2u + u^2 = (1 + u)^2
        assert_eq!(
            distinct_nonzero_roots(&[0, 1, 2], &[rat(1, 1), rat(2, 1), rat(1, 1)]),
            None
        );
        assert_eq!(
            distinct_nonzero_roots(&[0, 1, 2], &[rat(1, 1), rat(3, 1), rat(1, 1)]),
            Some(2)
        );
        // cancelling top coefficient
        assert_eq!(
            distinct_nonzero_roots(&[0, 2], &[rat(1, 1), rat(0, 1)]),
            None
        );
    }

    #[test]
    fn bad_inputs() {
        assert!(bk_oracle_curve(&[3], 3, 1).is_err());
        assert!(bk_oracle_curve(&[1, 1], 3, 1).is_err());
        assert!(bk_oracle_curve(&[0, 1], 0, 1).is_err());
        assert!(bk_oracle_curve_with(&[0, 1], &[rat(1, 1), rat(0, 1)], 3, 1).is_err());
    }
}
