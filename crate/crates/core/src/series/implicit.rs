use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::LatticeVector;
use crate::Rat;

use super::{total_degree, Polynomial, TruncSeries};

/// Expands the branch `y(u)` of `G(u, y) = 0` through `y(0) = y0` up to total
/// degree `trunc`. `G` has arity `n + 1` with `y` as its last variable.
///
/// Uses series Newton iteration `y ← y − G(u, y) / G_y(u, y)` with doubling
/// precision, then checks `G(u, y(u)) ≡ 0` exactly.
pub fn implicit_solve(g: &Polynomial<Rat>, y0: &Rat, trunc: u32) -> Result<TruncSeries<Rat>> {
    let arity = g.arity();
    if arity == 0 {
        return Err(Error::InvalidArgument(
            "G needs at least the dependent variable".into(),
        ));
    }
    let n = arity - 1;
    let mut base = vec![Rat::zero(); arity];
    base[n] = y0.clone();
    let residual = g.eval(&base);
    if !residual.is_zero() {
        return Err(Error::PointNotOnVariety { residual });
    }
    let gy = g.derivative(n);
    if gy.eval(&base).is_zero() {
        return Err(Error::NotTransverse);
    }

    let mut y = TruncSeries::constant(n, 0, y0.clone());
    let mut prec = 0u32;
    while prec < trunc {
        prec = (2 * prec + 1).min(trunc);
        let y_p = TruncSeries::from_terms(n, prec, y.terms().map(|(e, c)| (e.clone(), c.clone())))?;
        let mut args: Vec<TruncSeries<Rat>> =
            (0..n).map(|i| TruncSeries::var(n, prec, i)).collect();
        args.push(y_p.clone());
        let gv = g.compose(&args)?;
        let dv = gy.compose(&args)?;
        y = y_p.sub(&gv.mul(&dv.invert()?)?)?;
    }

    let mut args: Vec<TruncSeries<Rat>> = (0..n).map(|i| TruncSeries::var(n, trunc, i)).collect();
    args.push(y.clone());
    debug_assert!(
        g.compose(&args)?.is_zero(),
        "Newton iteration did not converge"
    );
    Ok(y)
}

/// `f̃ = t^{-γ·β} f(t^γ ũ)`: the term `c_α u^α` becomes `c_α ũ^α t^{γ·α − γ·β}`.
///
/// The result has arity `n + 1` (t last) and the same total-degree
/// truncation as `f`, counted jointly over `ũ` and `t`.
pub fn substitute_weighted(
    f: &TruncSeries<Rat>,
    gamma: &LatticeVector,
    beta: &LatticeVector,
) -> Result<TruncSeries<Rat>> {
    let n = f.arity();
    if gamma.dim() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: gamma.dim(),
        });
    }
    if beta.dim() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: beta.dim(),
        });
    }
    if gamma.coords().iter().any(|&g| g < 1) {
        return Err(Error::InvalidArgument(format!(
            "weight vector must be componentwise >= 1, got {:?}",
            gamma
        )));
    }
    let wb = gamma.dot(beta.coords());
    let mut terms = Vec::with_capacity(f.len());
    for (e, c) in f.terms() {
        let w = gamma.dot(&e.iter().map(|&x| x as i64).collect::<Vec<_>>());
        if w < wb {
            return Err(Error::NotGammaMinimal {
                exponent: e.clone(),
                weight: w,
                beta_weight: wb,
            });
        }
        let m = (w - wb) as u32;
        if total_degree(e) + m > f.trunc() {
            continue;
        }
        let mut ex = e.clone();
        ex.push(m);
        terms.push((ex, c.clone()));
    }
    TruncSeries::from_terms(n + 1, f.trunc(), terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use proptest::prelude::*;

    type Q = TruncSeries<Rat>;

    fn elliptic() -> Polynomial<Rat> {
        let u = Polynomial::<Rat>::var(2, 0);
        let y = Polynomial::<Rat>::var(2, 1);
        y.pow(2)
            .sub(&u.pow(3))
            .sub(&Polynomial::constant(2, rat_int(1)))
    }

    fn uni(trunc: u32, cs: &[(u32, Rat)]) -> Q {
        Q::from_terms(1, trunc, cs.iter().map(|(e, c)| (vec![*e], c.clone()))).unwrap()
    }

    #[test]
    fn elliptic_branch() {
        let y = implicit_solve(&elliptic(), &rat_int(1), 9).unwrap();
        let expect = uni(
            9,
            &[
                (0, rat_int(1)),
                (3, rat(1, 2)),
                (6, rat(-1, 8)),
                (9, rat(1, 16)),
            ],
        );
        assert_eq!(y, expect);

        let y = implicit_solve(&elliptic(), &rat_int(-1), 3).unwrap();
        assert_eq!(y, uni(3, &[(0, rat_int(-1)), (3, rat(-1, 2))]));
    }

    #[test]
    fn explicit_graph() {
        let g = Polynomial::<Rat>::var(2, 1).sub(&Polynomial::var(2, 0));
        let y = implicit_solve(&g, &rat_int(0), 6).unwrap();
        assert_eq!(y, Q::var(1, 6, 0));
    }

    #[test]
    fn precondition_errors() {
        match implicit_solve(&elliptic(), &rat_int(2), 4) {
            Err(Error::PointNotOnVariety { residual }) => assert_eq!(residual, rat_int(3)),
            other => panic!("{other:?}"),
        }
        // y^2 - u^3 at (0,0): on the curve but dG/dy = 0
        let g = Polynomial::<Rat>::var(2, 1)
            .pow(2)
            .sub(&Polynomial::var(2, 0).pow(3));
        assert!(matches!(
            implicit_solve(&g, &rat_int(0), 4),
            Err(Error::NotTransverse)
        ));
    }

    #[test]
    fn residual_vanishes_to_high_order() {
        let y = implicit_solve(&elliptic(), &rat_int(1), 24).unwrap();
        let args = vec![Q::var(1, 24, 0), y];
        assert!(elliptic().compose(&args).unwrap().is_zero());
    }

    #[test]
    fn weighted_substitution_examples() {
        let g1 = LatticeVector(vec![1]);
        let u = Q::var(1, 9, 0);
        let ft = substitute_weighted(&u, &g1, &LatticeVector(vec![1])).unwrap();
        assert_eq!(ft, Q::from_terms(2, 9, [(vec![1, 0], rat_int(1))]).unwrap());

        let f = uni(
            18,
            &[
                (0, rat_int(1)),
                (3, rat(1, 2)),
                (6, rat(-1, 8)),
                (9, rat(1, 16)),
            ],
        );
        let ft = substitute_weighted(&f, &g1, &LatticeVector(vec![0])).unwrap();
        let expect = Q::from_terms(
            2,
            18,
            [
                (vec![0, 0], rat_int(1)),
                (vec![3, 3], rat(1, 2)),
                (vec![6, 6], rat(-1, 8)),
                (vec![9, 9], rat(1, 16)),
            ],
        )
        .unwrap();
        assert_eq!(ft, expect);

        let w = uni(9, &[(3, rat(1, 2)), (6, rat(-1, 8))]);
        let wt = substitute_weighted(&w, &g1, &LatticeVector(vec![3])).unwrap();
        let expect =
            Q::from_terms(2, 9, [(vec![3, 0], rat(1, 2)), (vec![6, 3], rat(-1, 8))]).unwrap();
        assert_eq!(wt, expect);
    }

    #[test]
    fn weighted_substitution_rejects_non_minimal_beta() {
        let f = uni(9, &[(1, rat_int(1)), (3, rat_int(1))]);
        let err =
            substitute_weighted(&f, &LatticeVector(vec![1]), &LatticeVector(vec![3])).unwrap_err();
        assert!(matches!(err, Error::NotGammaMinimal { .. }));
        assert!(substitute_weighted(&f, &LatticeVector(vec![0]), &LatticeVector(vec![1])).is_err());
    }

    fn small_series2() -> impl Strategy<Value = Q> {
        proptest::collection::vec(((0u32..4, 0u32..4), -3i64..4, 1i64..3), 1..6).prop_map(|ts| {
            Q::from_terms(
                2,
                8,
                ts.into_iter().map(|((a, b), n, d)| (vec![a, b], rat(n, d))),
            )
            .unwrap()
        })
    }

    proptest! {
        /// At t = 1 the weighted substitution is t^{-γ·β} f(u) with every term
        /// of weight γ·α, truncated by |α| + γ·(α − β) <= D; evaluating both
        /// sides on the surviving terms must agree.
        #[test]
        fn substitution_at_t_one_recovers_f(
            f in small_series2(), g1 in 1i64..3, g2 in 1i64..3,
            x in -4i64..5, y in -4i64..5,
        ) {
            let gamma = LatticeVector(vec![g1, g2]);
            let beta_e = f.lex_min().map(|(e, _)| e.clone());
            prop_assume!(beta_e.is_some());
            // pick the γ-minimal exponent as β
            let beta_e = f.support()
                .min_by_key(|e| (gamma.dot(&[e[0] as i64, e[1] as i64]), (*e).clone()))
                .unwrap().clone();
            let beta = LatticeVector::from_exponent(&beta_e);
            let ft = substitute_weighted(&f, &gamma, &beta).unwrap();
            let wb = gamma.dot(beta.coords());
            let kept = Q::from_terms(2, 8, f.terms().filter(|(e, _)| {
                let w = gamma.dot(&[e[0] as i64, e[1] as i64]);
                total_degree(e) as i64 + w - wb <= 8
            }).map(|(e, c)| (e.clone(), c.clone()))).unwrap();
            let p = [rat(x, 3), rat(y, 5)];
            prop_assert_eq!(ft.eval_rat(&[p[0].clone(), p[1].clone(), rat_int(1)]), kept.eval_rat(&p));

            // constant t-term collects exactly the γ-minimal terms
            let t0: Vec<_> = ft.terms().filter(|(e, _)| e[2] == 0).map(|(e, _)| e[..2].to_vec()).collect();
            for e in &t0 {
                prop_assert_eq!(gamma.dot(&[e[0] as i64, e[1] as i64]), wb);
            }
        }
    }
}
