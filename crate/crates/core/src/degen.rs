//! Degenerated sections `f̃_j(ũ, t)`, the monomial special fiber and the
//! immersion check at the torus fiber.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::matrix::{rank, transpose, Mat};
use crate::exact::{differences_generate_lattice, smith_normal_form, LatticeVector};
use crate::linsys::{lex_valuation, ValuedBasis};
use crate::scalar::{rat_from_pair, rat_pair, serde_rat_mat, serde_rat_vec, Real};
use crate::series::{substitute_weighted, Exponent};
use crate::{QSeries, Rat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerationFamily {
    pub ids: Vec<String>,
    pub gamma: LatticeVector,
    pub betas: Vec<LatticeVector>,
    #[serde(with = "serde_rat_vec")]
    pub lead_coeffs: Vec<Rat>,
    /// Arity `n + 1`, `t` last.
    pub sections_tilde: Vec<QSeries>,
    pub n: usize,
    pub r: usize,
}

/// Builds the family from a basis with distinct values.
pub fn build_family(b: &ValuedBasis, gamma: &LatticeVector) -> Result<DegenerationFamily> {
    let sections: Vec<(String, QSeries)> = b
        .sections
        .iter()
        .map(|s| (s.id.clone(), s.series.clone()))
        .collect();
    build_family_from_sections(&sections, gamma)
}

/// Builds the family from arbitrary sections. Values need not be distinct
/// (e.g. `{x, y, z}` on the elliptic curve, where `y/z` and `z/z` share
/// value 0), but every constant `t`-term must still be a monomial and the
/// value differences must generate the lattice.
pub fn build_family_from_sections(
    sections: &[(String, QSeries)],
    gamma: &LatticeVector,
) -> Result<DegenerationFamily> {
    if sections.is_empty() {
        return Err(Error::EmptyInput("family needs at least one section"));
    }
    let n = sections[0].1.arity();
    let mut betas = Vec::new();
    let mut lead = Vec::new();
    let mut tilde = Vec::new();
    for (j, (_, f)) in sections.iter().enumerate() {
        if f.arity() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: f.arity(),
            });
        }
        let beta = lex_valuation(f)?;
        let ft = substitute_weighted(f, gamma, &beta).map_err(|e| match e {
            Error::NotGammaMinimal { .. } => Error::GammaNotSeparating { section: j },
            e => e,
        })?;
        let c = f.coeff(&to_exp(&beta));
        for (e, _) in ft.terms() {
            if e[n] == 0 && e[..n] != to_exp(&beta)[..] {
                return Err(Error::GammaNotSeparating { section: j });
            }
        }
        betas.push(beta);
        lead.push(c);
        tilde.push(ft);
    }
    if !differences_generate_lattice(&betas)? {
        return Err(Error::LatticeNotGenerated);
    }
    Ok(DegenerationFamily {
        ids: sections.iter().map(|(id, _)| id.clone()).collect(),
        gamma: gamma.clone(),
        betas,
        lead_coeffs: lead,
        sections_tilde: tilde,
        n,
        r: sections.len(),
    })
}

fn to_exp(v: &LatticeVector) -> Exponent {
    v.coords().iter().map(|&x| x as u32).collect()
}

impl DegenerationFamily {
    pub fn trunc(&self) -> u32 {
        self.sections_tilde
            .iter()
            .map(|s| s.trunc())
            .min()
            .unwrap_or(0)
    }

    /// Re-checks that every constant `t`-term is exactly `c_j ũ^{β_j}`.
    pub fn special_fiber_is_monomial(&self) -> bool {
        self.sections_tilde
            .iter()
            .zip(&self.betas)
            .zip(&self.lead_coeffs)
            .all(|((s, b), c)| {
                let t0: Vec<_> = s.terms().filter(|(e, _)| e[self.n] == 0).collect();
                let mut want = to_exp(b);
                want.push(0);
                t0.len() == 1 && *t0[0].0 == want && t0[0].1 == c
            })
    }

    /// Constant `t`-terms as series in `ũ`.
    pub fn special_fiber(&self) -> Vec<QSeries> {
        self.sections_tilde
            .iter()
            .map(|s| {
                let terms = s
                    .terms()
                    .filter(|(e, _)| e[self.n] == 0)
                    .map(|(e, c)| (e[..self.n].to_vec(), c.clone()));
                QSeries::from_terms(self.n, s.trunc(), terms).expect("well-formed")
            })
            .collect()
    }

    /// Chart used at the torus fiber: lex-smallest `β`, last index on ties.
    pub fn default_chart(&self) -> usize {
        let mut best = 0;
        for j in 1..self.r {
            if self.betas[j] <= self.betas[best] {
                best = j;
            }
        }
        best
    }

    /// The `t^m` coefficient of section `j`, as a polynomial in `ũ`.
    pub fn t_coefficient(&self, j: usize, m: u32) -> QSeries {
        let s = &self.sections_tilde[j];
        let terms = s
            .terms()
            .filter(|(e, _)| e[self.n] == m)
            .map(|(e, c)| (e[..self.n].to_vec(), c.clone()));
        QSeries::from_terms(self.n, s.trunc(), terms).expect("well-formed")
    }
}

/// Exact Jacobian of `F` at `(ũ, 0)` in the chart `z_chart ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianAtFiber {
    pub chart: usize,
    /// `r × (n+1)`: rows `∂(f̃_j/f̃_chart)` for `j ≠ chart`, then the `t` row.
    #[serde(with = "serde_rat_mat")]
    pub matrix: Mat<Rat>,
    pub rank: usize,
    /// `λ_j = β_j − β_chart` for `j ≠ chart`.
    pub lambda: Vec<LatticeVector>,
}

impl JacobianAtFiber {
    /// Column layout, `(n+1) × r`.
    pub fn printed(&self) -> Mat<Rat> {
        transpose(&self.matrix)
    }
}

/// Value of `c ũ^e` with `e` possibly negative.
fn laurent(c: &Rat, e: &[i64], u: &[Rat]) -> Rat {
    let mut acc = c.clone();
    for (x, &k) in u.iter().zip(e) {
        let p = num_traits::pow(x.clone(), k.unsigned_abs() as usize);
        acc = if k >= 0 { acc * p } else { acc / p };
    }
    acc
}

pub fn jacobian_at_zero_fiber(fam: &DegenerationFamily, u: &[Rat]) -> Result<JacobianAtFiber> {
    jacobian_at_zero_fiber_in_chart(fam, u, fam.default_chart())
}

pub fn jacobian_at_zero_fiber_in_chart(
    fam: &DegenerationFamily,
    u: &[Rat],
    chart: usize,
) -> Result<JacobianAtFiber> {
    let n = fam.n;
    if u.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: u.len(),
        });
    }
    if u.iter().any(|x| x.is_zero()) {
        return Err(Error::ZeroCoordinate);
    }
    if chart >= fam.r {
        return Err(Error::InvalidArgument(format!(
            "chart {chart} out of range"
        )));
    }
    let cr = &fam.lead_coeffs[chart];
    let br = &fam.betas[chart];
    let fr0 = laurent(cr, br.coords(), u);
    let fr1 = fam.t_coefficient(chart, 1).eval_rat(u);

    let mut matrix = Vec::with_capacity(fam.r);
    let mut lambda = Vec::new();
    for j in (0..fam.r).filter(|&j| j != chart) {
        let lam = fam.betas[j].sub(br);
        let c = fam.lead_coeffs[j].clone() / cr.clone();
        let mut row = Vec::with_capacity(n + 1);
        for i in 0..n {
            if lam.coords()[i] == 0 {
                row.push(Rat::zero());
            } else {
                let mut e = lam.coords().to_vec();
                e[i] -= 1;
                let k = Rat::from_integer(lam.coords()[i].into());
                row.push(laurent(&(c.clone() * k), &e, u));
            }
        }
        let fj0 = laurent(&fam.lead_coeffs[j], fam.betas[j].coords(), u);
        let fj1 = fam.t_coefficient(j, 1).eval_rat(u);
        row.push((fj1 * fr0.clone() - fj0 * fr1.clone()) / (fr0.clone() * fr0.clone()));
        matrix.push(row);
        lambda.push(lam);
    }
    let mut trow = vec![Rat::zero(); n + 1];
    trow[n] = Rat::one();
    matrix.push(trow);
    let rank = rank(&matrix);
    Ok(JacobianAtFiber {
        chart,
        matrix,
        rank,
        lambda,
    })
}

/// Invariant factors of the `λ`-matrix; all ones iff the values generate
/// the lattice (the column-scaled Jacobian is then unimodular).
pub fn lambda_invariant_factors(j: &JacobianAtFiber) -> Vec<i64> {
    let m: Vec<Vec<i64>> = j.lambda.iter().map(|l| l.coords().to_vec()).collect();
    if m.is_empty() {
        return vec![];
    }
    smith_normal_form(&m).invariant_factors()
}

/// Homogeneous coordinates of `F(ũ, t)`, scaled to unit norm.
pub fn evaluate_embedding<T: Real>(
    fam: &DegenerationFamily,
    u: &[Complex<T>],
    t: Complex<T>,
) -> Result<(Vec<Complex<T>>, Complex<T>)> {
    if u.len() != fam.n {
        return Err(Error::ArityMismatch {
            expected: fam.n,
            found: u.len(),
        });
    }
    let mut pt = u.to_vec();
    pt.push(t);
    let z: Vec<Complex<T>> = fam
        .sections_tilde
        .iter()
        .map(|s| s.lift::<Complex<T>>().eval(&pt, |c| *c))
        .collect();
    let norm = z
        .iter()
        .map(|c| c.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt();
    if !(norm > T::min_positive_value().sqrt()) || !norm.is_finite() {
        return Err(Error::IndeterminatePoint);
    }
    Ok((z.into_iter().map(|c| c / norm).collect(), t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSample {
    pub point: Vec<[String; 2]>,
    pub rank: usize,
}

/// Family plus the ranks observed at sample points of the torus fiber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionCertificate {
    pub kind: String,
    pub chart: usize,
    pub expected_rank: usize,
    pub samples: Vec<RankSample>,
    pub lambda_invariant_factors: Vec<i64>,
    pub family: DegenerationFamily,
}

pub fn immersion_certificate(
    fam: &DegenerationFamily,
    points: &[Vec<Rat>],
) -> Result<ImmersionCertificate> {
    let chart = fam.default_chart();
    let mut samples = Vec::with_capacity(points.len());
    let mut factors = vec![];
    for p in points {
        let j = jacobian_at_zero_fiber_in_chart(fam, p, chart)?;
        if factors.is_empty() {
            factors = lambda_invariant_factors(&j);
        }
        samples.push(RankSample {
            point: p.iter().map(rat_pair).collect(),
            rank: j.rank,
        });
    }
    Ok(ImmersionCertificate {
        kind: "immersion".into(),
        chart,
        expected_rank: fam.n + 1,
        samples,
        lambda_invariant_factors: factors,
        family: fam.clone(),
    })
}

/// Recomputes every sample from the embedded family.
pub fn verify_immersion_certificate(c: &ImmersionCertificate) -> Result<()> {
    let fam = &c.family;
    if !fam.special_fiber_is_monomial() {
        return Err(Error::CertificateInvalid(
            "special fiber is not monomial".into(),
        ));
    }
    if !differences_generate_lattice(&fam.betas)? {
        return Err(Error::CertificateInvalid(
            "values do not generate the lattice".into(),
        ));
    }
    if c.expected_rank != fam.n + 1 || c.samples.is_empty() {
        return Err(Error::CertificateInvalid(
            "no samples or wrong expected rank".into(),
        ));
    }
    for s in &c.samples {
        let p = s
            .point
            .iter()
            .map(rat_from_pair)
            .collect::<Result<Vec<_>>>()?;
        let j = jacobian_at_zero_fiber_in_chart(fam, &p, c.chart)?;
        if j.rank != s.rank || j.rank != c.expected_rank {
            return Err(Error::CertificateInvalid(format!(
                "rank {} at {:?}, certificate says {}",
                j.rank, s.point, s.rank
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsys::triangularize;
    use crate::scalar::{rat, rat_int};
    use crate::series::{implicit_solve, Polynomial};

    fn raw_cubic_sections(trunc: u32) -> Vec<(String, QSeries)> {
        let u = Polynomial::<Rat>::var(2, 0);
        let y = Polynomial::<Rat>::var(2, 1);
        let g = y
            .pow(2)
            .sub(&u.pow(3))
            .sub(&Polynomial::constant(2, rat_int(1)));
        vec![
            ("x".into(), QSeries::var(1, trunc, 0)),
            ("y".into(), implicit_solve(&g, &rat_int(1), trunc).unwrap()),
            ("z".into(), QSeries::one(1, trunc)),
        ]
    }

    fn g1() -> LatticeVector {
        LatticeVector(vec![1])
    }

    #[test]
    fn raw_cubic_family() {
        let fam = build_family_from_sections(&raw_cubic_sections(9), &g1()).unwrap();
        let t = |e: Vec<u32>, c: Rat| (e, c);
        // degree budget is shared with t, so only ũ^3 t^3 survives at D = 9
        let y_expect =
            QSeries::from_terms(2, 9, [t(vec![0, 0], rat_int(1)), t(vec![3, 3], rat(1, 2))])
                .unwrap();
        assert_eq!(fam.sections_tilde[1], y_expect);
        let fam18 = build_family_from_sections(&raw_cubic_sections(18), &g1()).unwrap();
        assert_eq!(fam18.sections_tilde[1].coeff(&[6, 6]), rat(-1, 8));
        assert_eq!(fam18.sections_tilde[1].coeff(&[9, 9]), rat(1, 16));
        assert_eq!(fam.sections_tilde[0], QSeries::var(2, 9, 0));
        assert!(fam.special_fiber_is_monomial());
        assert_eq!(fam.default_chart(), 2);

        for x in [rat_int(1), rat_int(2), rat(-3, 7)] {
            let j = jacobian_at_zero_fiber(&fam, &[x]).unwrap();
            let want = vec![
                vec![rat_int(1), rat_int(0), rat_int(0)],
                vec![rat_int(0), rat_int(0), rat_int(1)],
            ];
            assert_eq!(j.printed(), want);
            assert_eq!(j.rank, 2);
        }
        assert!(matches!(
            jacobian_at_zero_fiber(&fam, &[rat_int(0)]),
            Err(Error::ZeroCoordinate)
        ));
    }

    #[test]
    fn cubic_basis_family() {
        let mut s = raw_cubic_sections(12);
        s[1].1 = s[1].1.sub(&QSeries::one(1, 12)).unwrap();
        let b = triangularize(&s).unwrap();
        let fam = build_family(&b, &g1()).unwrap();
        let sf = fam.special_fiber();
        assert_eq!(sf[0], QSeries::var(1, 12, 0));
        assert_eq!(sf[1], QSeries::monomial(1, 12, vec![3], rat(1, 2)));
        assert_eq!(sf[2], QSeries::one(1, 12));
        let j = jacobian_at_zero_fiber(&fam, &[rat_int(1)]).unwrap();
        assert_eq!(j.rank, 2);
        assert_eq!(lambda_invariant_factors(&j), vec![1]);
    }

    #[test]
    fn monomial_family_n2() {
        let m = |e: Vec<u32>| QSeries::monomial(2, 6, e, rat_int(1));
        let s = vec![
            ("a".into(), m(vec![0, 0])),
            ("b".into(), m(vec![1, 0])),
            ("c".into(), m(vec![0, 1])),
        ];
        let fam = build_family_from_sections(&s, &LatticeVector(vec![1, 1])).unwrap();
        let j = jacobian_at_zero_fiber(&fam, &[rat_int(1), rat_int(1)]).unwrap();
        assert_eq!(j.rank, 3);
        assert_eq!(fam.default_chart(), 0);
    }

    #[test]
    fn rank_drops_when_values_do_not_span() {
        let m = |e: Vec<u32>| QSeries::monomial(2, 6, e, rat_int(1));
        let s = vec![
            ("a".into(), m(vec![0, 0])),
            ("b".into(), m(vec![1, 0])),
            ("c".into(), m(vec![2, 0])),
        ];
        assert!(matches!(
            build_family_from_sections(&s, &LatticeVector(vec![1, 1])),
            Err(Error::LatticeNotGenerated)
        ));
    }

    #[test]
    fn rejects_bad_families() {
        let s = vec![("z".into(), QSeries::one(1, 4))];
        assert!(matches!(
            build_family_from_sections(&s, &g1()),
            Err(Error::LatticeNotGenerated)
        ));

        // γ = (1,1) gives u_2 and u_1 equal weight, so the constant t-term of
        // u_2 + u_1 is not a monomial; γ = (2,1) separates them.
        let f = QSeries::from_terms(2, 6, [(vec![0, 1], rat_int(1)), (vec![1, 0], rat_int(1))])
            .unwrap();
        let s = vec![
            ("a".into(), QSeries::one(2, 6)),
            ("b".into(), f),
            ("c".into(), QSeries::var(2, 6, 0)),
        ];
        assert!(matches!(
            build_family_from_sections(&s, &LatticeVector(vec![1, 1])),
            Err(Error::GammaNotSeparating { section: 1 })
        ));
        assert!(build_family_from_sections(&s, &LatticeVector(vec![2, 1])).is_ok());
    }

    #[test]
    fn embedding_values() {
        let fam = build_family_from_sections(&raw_cubic_sections(12), &g1()).unwrap();
        let c = |x: f64| Complex::new(x, 0.0);
        let (z, _) = evaluate_embedding(&fam, &[c(2.0)], c(0.0)).unwrap();
        assert!((z[0] / z[2] - c(2.0)).norm() < 1e-14);
        assert!((z[1] / z[2] - c(1.0)).norm() < 1e-14);

        let mut s = raw_cubic_sections(12);
        s[1].1 = s[1].1.sub(&QSeries::one(1, 12)).unwrap();
        let fam2 = build_family_from_sections(&s, &g1()).unwrap();
        let (z, _) = evaluate_embedding(&fam2, &[c(2.0)], c(0.0)).unwrap();
        assert!((z[1] / z[2] - c(4.0)).norm() < 1e-13);

        // at t = 1 the family is the original chart, up to truncation
        let sec = raw_cubic_sections(24);
        let fam = build_family_from_sections(&sec, &g1()).unwrap();
        for x in [0.2, -0.15, 0.05] {
            let (z, _) = evaluate_embedding(&fam, &[c(x)], c(1.0)).unwrap();
            let direct: Vec<f64> = sec
                .iter()
                .map(|(_, f)| f.lift::<f64>().eval(&[x], |q| *q))
                .collect();
            for k in 0..3 {
                assert!((z[k] / z[2] - c(direct[k] / direct[2])).norm() < 1e-10);
            }
            assert!((z[1] / z[2] - c((1.0 + x * x * x).sqrt())).norm() < 1e-10);
        }
    }

    #[test]
    fn certificate_round_trip() {
        let fam = build_family_from_sections(&raw_cubic_sections(9), &g1()).unwrap();
        let pts = vec![vec![rat_int(1)], vec![rat(5, 3)]];
        let cert = immersion_certificate(&fam, &pts).unwrap();
        verify_immersion_certificate(&cert).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: ImmersionCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        let mut bad = cert.clone();
        bad.samples[0].rank = 1;
        assert!(verify_immersion_certificate(&bad).is_err());
    }
}
