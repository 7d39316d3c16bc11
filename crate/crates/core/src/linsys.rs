//! Lex initial-term valuation on truncated series, reduction of a linear
//! system to a basis with distinct values, value sets of powers, and the
//! choice of a separating weight vector.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{differences_generate_lattice, LatticeVector};
use crate::scalar::serde_rat;
use crate::series::{total_degree, Exponent};
use crate::{QSeries, Rat};

/// `v(f)`: the lex-smallest exponent with nonzero coefficient. The first
/// coordinate is most significant.
pub fn lex_valuation(f: &QSeries) -> Result<LatticeVector> {
    f.lex_min()
        .map(|(e, _)| LatticeVector::from_exponent(e))
        .ok_or(Error::ValuationUndetermined { trunc: f.trunc() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuedSection {
    pub id: String,
    pub series: QSeries,
    pub beta: LatticeVector,
    #[serde(with = "serde_rat")]
    pub lead_coeff: Rat,
}

impl ValuedSection {
    pub fn new(id: impl Into<String>, series: QSeries) -> Result<Self> {
        let beta = lex_valuation(&series)?;
        let lead_coeff = series
            .lex_min()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rat::zero);
        Ok(ValuedSection {
            id: id.into(),
            series,
            beta,
            lead_coeff,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuedBasis {
    pub sections: Vec<ValuedSection>,
    /// The value set `A`, in section order.
    pub values: Vec<LatticeVector>,
}

impl ValuedBasis {
    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.sections.first().map_or(0, |s| s.series.arity())
    }

    pub fn trunc(&self) -> u32 {
        self.sections
            .iter()
            .map(|s| s.series.trunc())
            .min()
            .unwrap_or(0)
    }

    /// `A` sorted lexicographically.
    pub fn value_set(&self) -> Vec<LatticeVector> {
        let mut a = self.values.clone();
        a.sort();
        a
    }

    pub fn lead_coeffs(&self) -> Vec<Rat> {
        self.sections.iter().map(|s| s.lead_coeff.clone()).collect()
    }
}

/// Exact elimination to pairwise distinct valuation values.
///
/// When two members share a value, the one with fewer stored terms (earlier
/// index on ties) stays and the other has its initial term cancelled. Each
/// member keeps its input position, so `{y/z, 1}` becomes `{y/z − 1, 1}`.
pub fn triangularize(sections: &[(String, QSeries)]) -> Result<ValuedBasis> {
    if sections.is_empty() {
        return Err(Error::EmptyInput(
            "triangularize needs at least one section",
        ));
    }
    let arity = sections[0].1.arity();
    let mut work: Vec<QSeries> = Vec::with_capacity(sections.len());
    for (i, (_, s)) in sections.iter().enumerate() {
        if s.arity() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: s.arity(),
            });
        }
        if s.is_zero() {
            return Err(Error::LinearlyDependent {
                index: i,
                trunc: s.trunc(),
            });
        }
        work.push(s.clone());
    }

    loop {
        let mut collision = None;
        'outer: for i in 0..work.len() {
            let vi = work[i].lex_min().map(|(e, _)| e.clone());
            for j in i + 1..work.len() {
                if work[j].lex_min().map(|(e, _)| e) == vi.as_ref() {
                    collision = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = collision else { break };
        let (pivot, target) = if work[j].len() < work[i].len() {
            (j, i)
        } else {
            (i, j)
        };
        let (_, cp) = work[pivot].lex_min().expect("nonzero");
        let (_, ct) = work[target].lex_min().expect("nonzero");
        let factor = ct.clone() / cp.clone();
        let reduced = work[target].sub(&work[pivot].scale(&factor))?;
        if reduced.is_zero() {
            return Err(Error::LinearlyDependent {
                index: target,
                trunc: reduced.trunc(),
            });
        }
        work[target] = reduced;
    }

    let mut out = Vec::with_capacity(work.len());
    for ((id, _), s) in sections.iter().zip(work) {
        out.push(ValuedSection::new(id.clone(), s)?);
    }
    let values = out.iter().map(|s| s.beta.clone()).collect();
    Ok(ValuedBasis {
        sections: out,
        values,
    })
}

/// The value set `A_k` of the `k`-th power of a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerValueSet {
    pub k: u32,
    /// Distinct values, sorted.
    pub values: Vec<LatticeVector>,
    /// Number of degree-`k` monomials in the basis.
    pub products: usize,
    /// Products that reduced to zero at the working truncation; at most the
    /// number of relations in degree `k`.
    pub dependent: usize,
    pub trunc: u32,
}

fn multisets(r: usize, k: u32) -> Vec<Vec<usize>> {
    fn go(start: usize, r: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            go(i, r, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, r, k, &mut Vec::new(), &mut out);
    out
}

/// Forms every degree-`k` product of basis members, reduces them to distinct
/// values and returns `A_k`. Products that cancel completely are counted as
/// relations and dropped.
pub fn power_value_set(b: &ValuedBasis, k: u32) -> Result<PowerValueSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if b.is_empty() {
        return Err(Error::EmptyInput("basis is empty"));
    }
    let trunc = b.trunc();
    let max_lead = b.values.iter().map(|v| v.total_degree()).max().unwrap_or(0);
    let needed = i64::from(k) * max_lead;
    if needed > i64::from(trunc) {
        return Err(Error::TruncationInsufficient(format!(
            "power {k} needs truncation order >= {needed}, have {trunc}"
        )));
    }

    let idx = multisets(b.len(), k);
    let prods: Vec<Result<QSeries>> = idx
        .par_iter()
        .map(|m| {
            let mut acc = QSeries::one(b.arity(), trunc);
            let mut expect = LatticeVector::zero(b.arity());
            for &i in m {
                acc = acc.mul(&b.sections[i].series)?;
                expect = expect.add(&b.sections[i].beta);
            }
            let got = lex_valuation(&acc)?;
            if got != expect {
                return Err(Error::TruncationInsufficient(format!(
                    "valuation of product {m:?} is {got:?}, expected {expect:?}"
                )));
            }
            Ok(acc)
        })
        .collect();

    // Incremental echelon form keyed by leading exponent; sequential so the
    // reduction order is fixed.
    let mut pivots: std::collections::BTreeMap<Exponent, QSeries> = Default::default();
    let mut dependent = 0;
    for p in prods {
        let mut s = p?;
        loop {
            let Some((e, c)) = s.lex_min().map(|(e, c)| (e.clone(), c.clone())) else {
                dependent += 1;
                break;
            };
            match pivots.get(&e) {
                Some(piv) => {
                    let f = c / piv.coeff(&e);
                    s = s.sub(&piv.scale(&f))?;
                }
                None => {
                    let inv = Rat::one() / c;
                    pivots.insert(e, s.scale(&inv));
                    break;
                }
            }
        }
    }
    let values = pivots
        .keys()
        .map(|e| LatticeVector::from_exponent(e))
        .collect();
    Ok(PowerValueSet {
        k,
        values,
        products: idx.len(),
        dependent,
        trunc,
    })
}

/// Witness that `gamma` singles out each `beta_j` on the stored supports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaCertificate {
    pub gamma: Vec<i64>,
    pub verified_on_trunc: u32,
    pub assumes_full_support: bool,
}

fn separates(gamma: &LatticeVector, supports: &[(Vec<Exponent>, LatticeVector)]) -> bool {
    supports.iter().all(|(supp, beta)| {
        let wb = gamma.dot(beta.coords());
        supp.iter().all(|a| {
            let a = LatticeVector::from_exponent(a);
            a == *beta || gamma.dot(a.coords()) > wb
        })
    })
}

/// Vectors in `[1, m]^n` with max-norm exactly `m`, in lex order.
fn shell(n: usize, m: i64) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    let mut cur = vec![1i64; n];
    loop {
        if cur.contains(&m) {
            out.push(LatticeVector(cur.clone()));
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m {
                cur[i] += 1;
                for x in cur.iter_mut().skip(i + 1) {
                    *x = 1;
                }
                break;
            }
        }
    }
}

/// Smallest (max-norm, then lex) `γ ≥ 1` with `γ·β_j < γ·α` for every other
/// `α` in each support.
pub fn choose_gamma(
    supports: &[(Vec<Exponent>, LatticeVector)],
    bound: u32,
) -> Result<LatticeVector> {
    let Some((_, b0)) = supports.first() else {
        return Err(Error::EmptyInput("no supports"));
    };
    let n = b0.dim();
    for (j, (supp, beta)) in supports.iter().enumerate() {
        if beta.dim() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: beta.dim(),
            });
        }
        let lex = supp.iter().min().map(|e| LatticeVector::from_exponent(e));
        if lex.as_ref() != Some(beta) {
            return Err(Error::InvalidArgument(format!(
                "beta {beta:?} of support {j} is not its lex-minimum"
            )));
        }
    }
    if n == 0 {
        return Ok(LatticeVector(vec![]));
    }
    for m in 1..=i64::from(bound) {
        if let Some(g) = shell(n, m).into_iter().find(|g| separates(g, supports)) {
            return Ok(g);
        }
    }
    Err(Error::NoSeparatingWeight { bound })
}

pub fn basis_supports(b: &ValuedBasis) -> Vec<(Vec<Exponent>, LatticeVector)> {
    b.sections
        .iter()
        .map(|s| (s.series.support().cloned().collect(), s.beta.clone()))
        .collect()
}

/// Runs [`choose_gamma`] on the truncated supports of `b` and packages the
/// result.
pub fn choose_gamma_for_basis(b: &ValuedBasis, bound: u32) -> Result<GammaCertificate> {
    let g = choose_gamma(&basis_supports(b), bound)?;
    Ok(GammaCertificate {
        gamma: g.0,
        verified_on_trunc: b.trunc(),
        assumes_full_support: true,
    })
}

/// Re-checks strict minimality of `γ·β_j` on every stored support.
pub fn verify_gamma(b: &ValuedBasis, gamma: &LatticeVector) -> bool {
    gamma.coords().iter().all(|&g| g >= 1) && separates(gamma, &basis_supports(b))
}

pub fn check_lattice_condition(b: &ValuedBasis) -> bool {
    differences_generate_lattice(&b.values).unwrap_or(false)
}

/// Largest total degree among the stored terms of the basis.
pub fn max_support_degree(b: &ValuedBasis) -> u32 {
    b.sections
        .iter()
        .flat_map(|s| s.series.support().map(|e| total_degree(e)))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use crate::series::{implicit_solve, Polynomial};
    use proptest::prelude::*;

    fn raw_cubic(trunc: u32) -> Vec<(String, QSeries)> {
        let u = Polynomial::<Rat>::var(2, 0);
        let y = Polynomial::<Rat>::var(2, 1);
        let g = y
            .pow(2)
            .sub(&u.pow(3))
            .sub(&Polynomial::constant(2, rat_int(1)));
        let ys = implicit_solve(&g, &rat_int(1), trunc).unwrap();
        vec![
            ("x".into(), QSeries::var(1, trunc, 0)),
            ("y".into(), ys),
            ("z".into(), QSeries::one(1, trunc)),
        ]
    }

    fn cubic_basis(trunc: u32) -> ValuedBasis {
        let mut s = raw_cubic(trunc);
        s[1].1 = s[1].1.sub(&QSeries::one(1, trunc)).unwrap();
        s[1].0 = "w".into();
        triangularize(&s).unwrap()
    }

    fn lv(xs: &[i64]) -> Vec<LatticeVector> {
        xs.iter().map(|&x| LatticeVector(vec![x])).collect()
    }

    #[test]
    fn golden_valuations() {
        let s = raw_cubic(9);
        assert_eq!(lex_valuation(&s[0].1).unwrap(), LatticeVector(vec![1]));
        assert_eq!(lex_valuation(&s[1].1).unwrap(), LatticeVector(vec![0]));
        let w = s[1].1.sub(&s[2].1).unwrap();
        assert_eq!(lex_valuation(&w).unwrap(), LatticeVector(vec![3]));
        assert!(matches!(
            lex_valuation(&QSeries::zero(1, 5)),
            Err(Error::ValuationUndetermined { trunc: 5 })
        ));
    }

    #[test]
    fn lex_order_first_coordinate_dominates() {
        let f = QSeries::from_terms(2, 6, [(vec![1, 0], rat_int(1)), (vec![0, 3], rat_int(2))])
            .unwrap();
        assert_eq!(lex_valuation(&f).unwrap(), LatticeVector(vec![0, 3]));
    }

    #[test]
    fn triangularize_examples() {
        let b = triangularize(&raw_cubic(9)).unwrap();
        assert_eq!(b.values, lv(&[1, 3, 0]));
        assert_eq!(b.sections[1].lead_coeff, rat(1, 2));
        let expect_w = raw_cubic(9)[1].1.sub(&QSeries::one(1, 9)).unwrap();
        assert_eq!(b.sections[1].series, expect_w);
        assert!(check_lattice_condition(&b));

        let one_u = vec![
            ("a".into(), QSeries::one(1, 4)),
            ("b".into(), QSeries::var(1, 4, 0)),
        ];
        let b = triangularize(&one_u).unwrap();
        assert_eq!(b.values, lv(&[0, 1]));
        assert_eq!(b.sections[0].series, one_u[0].1);

        let u = QSeries::var(1, 4, 0);
        let one = QSeries::one(1, 4);
        let b = triangularize(&[
            ("p".into(), one.add(&u).unwrap()),
            ("m".into(), one.sub(&u).unwrap()),
        ])
        .unwrap();
        assert_eq!(b.values, lv(&[0, 1]));
        assert_eq!(b.sections[1].series, u.scale(&rat_int(-2)));
    }

    #[test]
    fn triangularize_detects_dependence() {
        let u = QSeries::var(1, 4, 0);
        let err = triangularize(&[("a".into(), u.clone()), ("b".into(), u.scale(&rat_int(3)))])
            .unwrap_err();
        assert!(matches!(
            err,
            Error::LinearlyDependent { index: 1, trunc: 4 }
        ));
        assert!(triangularize(&[]).is_err());
    }

    #[test]
    fn power_values_cubic_basis() {
        let b = cubic_basis(24);
        let a1 = power_value_set(&b, 1).unwrap();
        assert_eq!(a1.values, lv(&[0, 1, 3]));
        let a2 = power_value_set(&b, 2).unwrap();
        assert_eq!(a2.values, lv(&[0, 1, 2, 3, 4, 6]));
        assert_eq!(a2.dependent, 0);
        // w^2 z + 2 w z^2 = x^3 is the one cubic relation
        let a3 = power_value_set(&b, 3).unwrap();
        assert_eq!(a3.values, lv(&[0, 1, 2, 3, 4, 5, 6, 7, 9]));
        assert_eq!(a3.dependent, 1);
        assert_eq!(a3.products, 10);

        let single = triangularize(&[("z".into(), QSeries::one(1, 4))]).unwrap();
        for k in 1..4 {
            assert_eq!(power_value_set(&single, k).unwrap().values, lv(&[0]));
        }
        assert!(matches!(
            power_value_set(&b, 9),
            Err(Error::TruncationInsufficient(_))
        ));
    }

    #[test]
    fn gamma_examples() {
        let s = cubic_basis(9);
        assert_eq!(
            choose_gamma(&basis_supports(&s), 4).unwrap(),
            LatticeVector(vec![1])
        );

        let supp = vec![(vec![vec![0, 1], vec![2, 0]], LatticeVector(vec![0, 1]))];
        assert_eq!(choose_gamma(&supp, 4).unwrap(), LatticeVector(vec![1, 1]));

        let supp = vec![(vec![vec![0, 0, 0]], LatticeVector(vec![0, 0, 0]))];
        assert_eq!(
            choose_gamma(&supp, 1).unwrap(),
            LatticeVector(vec![1, 1, 1])
        );

        // (0,3) vs (1,0): need 3γ₂ < γ₁, so γ = (4,1)
        let supp = vec![(vec![vec![0, 3], vec![1, 0]], LatticeVector(vec![0, 3]))];
        assert_eq!(choose_gamma(&supp, 4).unwrap(), LatticeVector(vec![4, 1]));
        assert!(matches!(
            choose_gamma(&supp, 3),
            Err(Error::NoSeparatingWeight { bound: 3 })
        ));

        let bad = vec![(vec![vec![0, 1], vec![0, 0]], LatticeVector(vec![0, 1]))];
        assert!(choose_gamma(&bad, 3).is_err());

        let cert = choose_gamma_for_basis(&s, 3).unwrap();
        assert_eq!(
            serde_json::to_string(&cert).unwrap(),
            r#"{"gamma":[1],"verified_on_trunc":9,"assumes_full_support":true}"#
        );
    }

    #[test]
    fn shell_order() {
        let s: Vec<_> = shell(2, 2).into_iter().map(|v| v.0).collect();
        assert_eq!(s, vec![vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn lattice_condition_examples() {
        let mk = |vals: Vec<LatticeVector>| ValuedBasis {
            sections: vec![],
            values: vals,
        };
        assert!(check_lattice_condition(&mk(lv(&[0, 1, 3]))));
        assert!(!check_lattice_condition(&mk(vec![
            LatticeVector(vec![0, 0]),
            LatticeVector(vec![2, 0]),
            LatticeVector(vec![0, 2]),
        ])));
        assert!(!check_lattice_condition(&mk(lv(&[0]))));
    }

    fn series2() -> impl Strategy<Value = QSeries> {
        proptest::collection::vec(((0u32..4, 0u32..4), -3i64..4, 1i64..3), 1..6)
            .prop_map(|ts| {
                QSeries::from_terms(
                    2,
                    12,
                    ts.into_iter().map(|((a, b), n, d)| (vec![a, b], rat(n, d))),
                )
                .unwrap()
            })
            .prop_filter("nonzero", |s| !s.is_zero())
    }

    proptest! {
        #[test]
        fn valuation_axioms(f in series2(), g in series2()) {
            let vf = lex_valuation(&f).unwrap();
            let vg = lex_valuation(&g).unwrap();
            prop_assert_eq!(lex_valuation(&f.mul(&g).unwrap()).unwrap(), vf.add(&vg));
            let s = f.add(&g).unwrap();
            if !s.is_zero() {
                prop_assert!(lex_valuation(&s).unwrap() >= vf.clone().min(vg));
            }
        }

        #[test]
        fn value_set_is_order_independent(seed in 0u64..1000) {
            let mut s = raw_cubic(12);
            s.push(("q".into(), QSeries::var(1, 12, 0).pow(2).add(&QSeries::one(1, 12)).unwrap()));
            let perm = (seed as usize) % s.len();
            s.rotate_left(perm);
            if seed % 2 == 1 { s.reverse(); }
            let b = triangularize(&s).unwrap();
            prop_assert_eq!(b.value_set(), lv(&[0, 1, 2, 3]));
        }

        #[test]
        fn power_values_bounded_and_hull_vertices_present(k in 1u32..4) {
            let b = cubic_basis(24);
            let ak = power_value_set(&b, k).unwrap();
            let r = b.len() as u64;
            let binom = (0..u64::from(k)).fold(1u64, |acc, i| acc * (r + i) / (i + 1));
            prop_assert!(ak.values.len() as u64 <= binom);
            let hull = crate::polytope::delta_k(&ak.values, i64::from(k)).unwrap();
            for v in hull.scaled(&rat_int(i64::from(k))).vertices() {
                let iv: Vec<i64> = v.iter().map(|q| q.to_integer().try_into().unwrap()).collect();
                prop_assert!(ak.values.contains(&LatticeVector(iv)));
            }
        }
    }
}
