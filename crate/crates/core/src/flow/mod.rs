//! Floating-point Kähler geometry on the family chart.
//!
//! `F(ũ, t) = ([f̃_1 : … : f̃_r], t)` pulls back `ω_FS + (i/2) dt∧dt̄`, with
//! `ω_FS = (i/2) ∂∂̄ log‖Z‖²`. In complex coordinates `z` the form is
//! `(i/2) Σ h_{ab̄} dz_a ∧ dz̄_b`, and for real tangent vectors `v, w`
//! (given by their complex components)
//!
//! ```text
//! g(v, w) = Re Σ h_{ab̄} v_a w̄_b,    ω(v, w) = −Im Σ h_{ab̄} v_a w̄_b = g(Jv, w).
//! ```
//!
//! Two charts are used. Near the special fiber the coordinates are `(ũ, t)`.
//! For `|t| > 0.5` they are `(u, t)` with `u_i = t^{γ_i} ũ_i`, where
//! `f̃_j = t^{−γ·β_j} P_j(u)` and `P_j(u) = f̃_j(u, 1)`. Both describe the
//! same truncated map, so results agree up to rounding.

mod integrate;
mod moment;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::degen::DegenerationFamily;
use crate::error::{Error, Result};
use crate::scalar::{rat_to_f64, Real};

pub use integrate::{
    dopri5, integrate_flow, transport_area_check, AreaCheck, FlowAbort, StepOptions, TrajPoint,
    Trajectory,
};
pub use moment::{fiber_area_n1, moment_map, normalized_fiber_volume_n1};

/// A point `(ũ, t)` of the family chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State<T> {
    pub u_tilde: Vec<Complex<T>>,
    pub t: Complex<T>,
}

impl<T: Real> State<T> {
    pub fn new(u_tilde: Vec<Complex<T>>, t: Complex<T>) -> Self {
        State { u_tilde, t }
    }

    pub fn coords(&self) -> Vec<Complex<T>> {
        let mut z = self.u_tilde.clone();
        z.push(self.t);
        z
    }

    pub fn from_coords(z: &[Complex<T>]) -> Self {
        let (u, t) = z.split_at(z.len() - 1);
        State {
            u_tilde: u.to_vec(),
            t: t[0],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u_tilde
            .iter()
            .chain(std::iter::once(&self.t))
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// Coordinates `(ũ, t)`.
    Degeneration,
    /// Coordinates `(u, t)` with `u = t^γ ũ`.
    Trivial,
}

/// Charts switch at `|t| = 0.5`.
pub const CHART_SWITCH: f64 = 0.5;

type Terms<T> = Vec<(Vec<u32>, T)>;

/// Float copy of a degeneration family, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct FlowFamily<T> {
    pub n: usize,
    pub gamma: Vec<i32>,
    /// `γ·β_j`.
    pub weights: Vec<i32>,
    pub betas: Vec<Vec<i64>>,
    pub lead: Vec<T>,
    tilde: Vec<Terms<T>>,
    trivial: Vec<Terms<T>>,
    max_deg: u32,
}

impl<T: Real> FlowFamily<T> {
    pub fn new(fam: &DegenerationFamily) -> Self {
        let lit = |q: &crate::Rat| T::lit(rat_to_f64(q));
        let tilde: Vec<Terms<T>> = fam
            .sections_tilde
            .iter()
            .map(|s| s.terms().map(|(e, c)| (e.clone(), lit(c))).collect())
            .collect();
        let trivial = tilde
            .iter()
            .map(|ts| {
                let mut acc: std::collections::BTreeMap<Vec<u32>, T> = Default::default();
                for (e, c) in ts {
                    let k = e[..fam.n].to_vec();
                    let v = acc.entry(k).or_insert_with(T::zero);
                    *v = *v + *c;
                }
                acc.into_iter().collect()
            })
            .collect();
        let max_deg = tilde
            .iter()
            .flatten()
            .flat_map(|(e, _)| e.iter().copied())
            .max()
            .unwrap_or(0);
        FlowFamily {
            n: fam.n,
            gamma: fam.gamma.coords().iter().map(|&g| g as i32).collect(),
            weights: fam
                .betas
                .iter()
                .map(|b| fam.gamma.dot(b.coords()) as i32)
                .collect(),
            betas: fam.betas.iter().map(|b| b.coords().to_vec()).collect(),
            lead: fam.lead_coeffs.iter().map(lit).collect(),
            tilde,
            trivial,
            max_deg,
        }
    }

    pub fn r(&self) -> usize {
        self.tilde.len()
    }

    pub fn chart_for(&self, t: Complex<T>) -> Chart {
        if t.norm() > T::lit(CHART_SWITCH) {
            Chart::Trivial
        } else {
            Chart::Degeneration
        }
    }

    /// Section values and holomorphic Jacobian `J_{ja} = ∂f_j/∂z_a` in the
    /// given chart, `z = (ũ or u, t)`.
    pub fn jet(&self, chart: Chart, z: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Vec<Complex<T>>>) {
        let m = self.n + 1;
        match chart {
            Chart::Degeneration => {
                let pw = powers(z, self.max_deg);
                let mut f = Vec::with_capacity(self.r());
                let mut jac = Vec::with_capacity(self.r());
                for ts in &self.tilde {
                    let (v, g) = eval_with_grad(ts, &pw, m);
                    f.push(v);
                    jac.push(g);
                }
                (f, jac)
            }
            Chart::Trivial => {
                let t = z[self.n];
                let pw = powers(&z[..self.n], self.max_deg);
                let mut f = Vec::with_capacity(self.r());
                let mut jac = Vec::with_capacity(self.r());
                for (ts, &w) in self.trivial.iter().zip(&self.weights) {
                    let (p, mut g) = eval_with_grad(ts, &pw, self.n);
                    let s = t.powi(-w);
                    for x in g.iter_mut() {
                        *x = *x * s;
                    }
                    g.push(-p * s * T::from_i32(w).unwrap() / t);
                    f.push(p * s);
                    jac.push(g);
                }
                (f, jac)
            }
        }
    }

    /// Coordinates of `s` in `chart`.
    pub fn to_chart(&self, chart: Chart, s: &State<T>) -> Vec<Complex<T>> {
        match chart {
            Chart::Degeneration => s.coords(),
            Chart::Trivial => {
                let mut z: Vec<_> = s
                    .u_tilde
                    .iter()
                    .zip(&self.gamma)
                    .map(|(u, &g)| *u * s.t.powi(g))
                    .collect();
                z.push(s.t);
                z
            }
        }
    }

    /// Pushes a tangent vector given in `chart` coordinates at `s` to
    /// `(ũ, t)` components: `dũ_i = t^{−γ_i} du_i − γ_i t^{−γ_i−1} u_i dt`.
    pub fn to_tilde_vector(&self, chart: Chart, s: &State<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
        match chart {
            Chart::Degeneration => v.to_vec(),
            Chart::Trivial => {
                let t = s.t;
                let dt = v[self.n];
                let mut out: Vec<_> = (0..self.n)
                    .map(|i| {
                        let g = self.gamma[i];
                        let u = s.u_tilde[i] * t.powi(g);
                        v[i] * t.powi(-g) - u * t.powi(-g - 1) * T::from_i32(g).unwrap() * dt
                    })
                    .collect();
                out.push(dt);
                out
            }
        }
    }

    /// Inverse of [`Self::to_tilde_vector`].
    pub fn from_tilde_vector(
        &self,
        chart: Chart,
        s: &State<T>,
        v: &[Complex<T>],
    ) -> Vec<Complex<T>> {
        match chart {
            Chart::Degeneration => v.to_vec(),
            Chart::Trivial => {
                let t = s.t;
                let dt = v[self.n];
                let mut out: Vec<_> = (0..self.n)
                    .map(|i| {
                        let g = self.gamma[i];
                        v[i] * t.powi(g)
                            + s.u_tilde[i] * t.powi(g - 1) * T::from_i32(g).unwrap() * dt
                    })
                    .collect();
                out.push(dt);
                out
            }
        }
    }

    /// Hermitian matrix `h_{ab̄}` of the pulled-back form in `chart`.
    pub fn hermitian(&self, chart: Chart, z: &[Complex<T>]) -> Result<Vec<Vec<Complex<T>>>> {
        let m = self.n + 1;
        let (f, jac) = self.jet(chart, z);
        let norm = f
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::IndeterminatePoint);
        }
        let fh: Vec<_> = f.iter().map(|c| *c / norm).collect();
        // Q = (I − f̂ f̂^H) J / ‖f‖, so h = Q^H Q.
        let mut q = vec![vec![Complex::new(T::zero(), T::zero()); m]; f.len()];
        for a in 0..m {
            let col: Vec<_> = jac.iter().map(|row| row[a] / norm).collect();
            let proj = fh
                .iter()
                .zip(&col)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
                    acc + x.conj() * y
                });
            for j in 0..f.len() {
                q[j][a] = col[j] - fh[j] * proj;
            }
        }
        let mut h = vec![vec![Complex::new(T::zero(), T::zero()); m]; m];
        for a in 0..m {
            for b in 0..m {
                h[a][b] = q
                    .iter()
                    .fold(Complex::new(T::zero(), T::zero()), |acc, row| {
                        acc + row[a] * row[b].conj()
                    });
            }
        }
        h[m - 1][m - 1] = h[m - 1][m - 1] + T::one();
        Ok(h)
    }
}

fn powers<T: Real>(z: &[Complex<T>], d: u32) -> Vec<Vec<Complex<T>>> {
    z.iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(d as usize + 1);
            p.push(Complex::new(T::one(), T::zero()));
            for k in 1..=d as usize {
                p.push(p[k - 1] * x);
            }
            p
        })
        .collect()
}

fn eval_with_grad<T: Real>(
    ts: &[(Vec<u32>, T)],
    pw: &[Vec<Complex<T>>],
    m: usize,
) -> (Complex<T>, Vec<Complex<T>>) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut v = zero;
    let mut g = vec![zero; m];
    for (e, c) in ts {
        let mut mono = Complex::new(*c, T::zero());
        for i in 0..m {
            mono = mono * pw[i][e[i] as usize];
        }
        v = v + mono;
        for i in 0..m {
            if e[i] > 0 {
                let mut d = Complex::new(*c * T::from_u32(e[i]).unwrap(), T::zero());
                for k in 0..m {
                    d = d * pw[k][if k == i {
                        e[k] as usize - 1
                    } else {
                        e[k] as usize
                    }];
                }
                g[i] = g[i] + d;
            }
        }
    }
    (v, g)
}

/// Cholesky factor `L` with `a = L L^H`; fails unless every pivot exceeds
/// `rel` times the largest diagonal entry.
pub fn cholesky<T: Real>(a: &[Vec<Complex<T>>], rel: T) -> Option<Vec<Vec<Complex<T>>>> {
    let m = a.len();
    let scale = (0..m).map(|i| a[i][i].re).fold(T::zero(), T::max);
    let zero = Complex::new(T::zero(), T::zero());
    let mut l = vec![vec![zero; m]; m];
    for j in 0..m {
        let mut d = a[j][j].re;
        for k in 0..j {
            d = d - l[j][k].norm_sqr();
        }
        if !(d > rel * scale) {
            return None;
        }
        let dj = d.sqrt();
        l[j][j] = Complex::new(dj, T::zero());
        for i in j + 1..m {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / dj;
        }
    }
    Some(l)
}

fn cholesky_solve<T: Real>(l: &[Vec<Complex<T>>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let m = l.len();
    let mut y = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            y[i] = y[i] - l[i][k] * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            y[i] = y[i] - l[k][i].conj() * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    y
}

/// Relative pivot threshold for positive definiteness.
const PD_TOL: f64 = 1e-13;

/// Metric and Kähler form at a point, in real coordinates
/// `(Re z_0, Im z_0, …, Re t, Im t)` of the `(ũ, t)` chart.
#[derive(Debug, Clone)]
pub struct KahlerSample<T> {
    pub point: State<T>,
    pub hermitian: Vec<Vec<Complex<T>>>,
    pub metric: Vec<Vec<T>>,
    pub omega: Vec<Vec<T>>,
}

impl<T: Real> KahlerSample<T> {
    pub fn g(&self, v: &[Complex<T>], w: &[Complex<T>]) -> T {
        herm_form(&self.hermitian, v, w).re
    }

    pub fn omega_of(&self, v: &[Complex<T>], w: &[Complex<T>]) -> T {
        -herm_form(&self.hermitian, v, w).im
    }

    /// `max |Ω − J^T G| / max |G|` for the real matrices.
    pub fn compatibility_residual(&self) -> T {
        let d = self.metric.len();
        let jmat = complex_structure::<T>(d);
        let mut worst = T::zero();
        let mut scale = T::zero();
        for i in 0..d {
            for k in 0..d {
                let jtg = (0..d).fold(T::zero(), |acc, l| acc + jmat[l][i] * self.metric[l][k]);
                worst = worst.max((self.omega[i][k] - jtg).abs());
                scale = scale.max(self.metric[i][k].abs());
            }
        }
        worst / scale
    }

    /// Real Cholesky of the metric succeeds.
    pub fn is_positive_definite(&self) -> bool {
        let d = self.metric.len();
        let mut l = vec![vec![T::zero(); d]; d];
        let scale = (0..d).map(|i| self.metric[i][i]).fold(T::zero(), T::max);
        for j in 0..d {
            let mut s = self.metric[j][j];
            for k in 0..j {
                s = s - l[j][k] * l[j][k];
            }
            if !(s > T::lit(PD_TOL) * scale) {
                return false;
            }
            l[j][j] = s.sqrt();
            for i in j + 1..d {
                let mut x = self.metric[i][j];
                for k in 0..j {
                    x = x - l[i][k] * l[j][k];
                }
                l[i][j] = x / l[j][j];
            }
        }
        true
    }
}

fn herm_form<T: Real>(h: &[Vec<Complex<T>>], v: &[Complex<T>], w: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for a in 0..h.len() {
        for b in 0..h.len() {
            acc = acc + h[a][b] * v[a] * w[b].conj();
        }
    }
    acc
}

/// Real matrix of multiplication by `i` on `(Re, Im)` pairs.
pub fn complex_structure<T: Real>(d: usize) -> Vec<Vec<T>> {
    let mut j = vec![vec![T::zero(); d]; d];
    for a in 0..d / 2 {
        j[2 * a + 1][2 * a] = T::one();
        j[2 * a][2 * a + 1] = -T::one();
    }
    j
}

/// Expresses `h` from `chart` in `(ũ, t)` coordinates: `h̃ = A^T h Ā` with
/// `A = ∂z/∂z̃`.
fn hermitian_tilde<T: Real>(
    fam: &FlowFamily<T>,
    chart: Chart,
    s: &State<T>,
) -> Result<Vec<Vec<Complex<T>>>> {
    let z = fam.to_chart(chart, s);
    let h = fam.hermitian(chart, &z)?;
    if chart == Chart::Degeneration {
        return Ok(h);
    }
    let m = fam.n + 1;
    let zero = Complex::new(T::zero(), T::zero());
    let cols: Vec<Vec<Complex<T>>> = (0..m)
        .map(|a| {
            let mut e = vec![zero; m];
            e[a] = Complex::new(T::one(), T::zero());
            fam.from_tilde_vector(chart, s, &e)
        })
        .collect();
    let mut out = vec![vec![zero; m]; m];
    for a in 0..m {
        for b in 0..m {
            out[a][b] = herm_form(&h, &cols[a], &cols[b]);
        }
    }
    Ok(out)
}

/// Pullback of `ω_FS ⊕ (i/2) dt∧dt̄` at `s`, expressed in `(ũ, t)`.
pub fn pullback_kahler<T: Real>(fam: &FlowFamily<T>, s: &State<T>) -> Result<KahlerSample<T>> {
    pullback_kahler_in(fam, fam.chart_for(s.t), s)
}

pub fn pullback_kahler_in<T: Real>(
    fam: &FlowFamily<T>,
    chart: Chart,
    s: &State<T>,
) -> Result<KahlerSample<T>> {
    let h = hermitian_tilde(fam, chart, s)?;
    if cholesky(&h, T::lit(PD_TOL)).is_none() {
        return Err(Error::PullbackDegenerate);
    }
    let m = h.len();
    let d = 2 * m;
    let mut metric = vec![vec![T::zero(); d]; d];
    let mut omega = vec![vec![T::zero(); d]; d];
    let unit = |p: usize| {
        if p == 0 {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::one())
        }
    };
    for a in 0..m {
        for p in 0..2 {
            for b in 0..m {
                for q in 0..2 {
                    let val = h[a][b] * unit(p) * unit(q).conj();
                    metric[2 * a + p][2 * b + q] = val.re;
                    omega[2 * a + p][2 * b + q] = -val.im;
                }
            }
        }
    }
    Ok(KahlerSample {
        point: s.clone(),
        hermitian: h,
        metric,
        omega,
    })
}

/// `∇ Re(t)` in `chart` coordinates: `conj(h)^{-1} e_t`.
fn grad_re_t<T: Real>(fam: &FlowFamily<T>, chart: Chart, s: &State<T>) -> Result<Vec<Complex<T>>> {
    let z = fam.to_chart(chart, s);
    let h = fam.hermitian(chart, &z)?;
    let hc: Vec<Vec<_>> = h
        .iter()
        .map(|row| row.iter().map(|c| c.conj()).collect())
        .collect();
    let l = cholesky(&hc, T::lit(PD_TOL)).ok_or(Error::PullbackDegenerate)?;
    let m = fam.n + 1;
    let mut e = vec![Complex::new(T::zero(), T::zero()); m];
    e[m - 1] = Complex::new(T::one(), T::zero());
    Ok(cholesky_solve(&l, &e))
}

/// `𝒱 = −∇Re(t)/‖∇Re(t)‖²` evaluated in `chart`, returned as `(ũ, t)`
/// components.
pub fn grad_ham_field_in<T: Real>(
    fam: &FlowFamily<T>,
    chart: Chart,
    s: &State<T>,
) -> Result<Vec<Complex<T>>> {
    let g = grad_re_t(fam, chart, s)?;
    let m = fam.n + 1;
    // ‖∇‖² = g(∇, ∇) = dRe(t)[∇] = Re(∇_t)
    let nrm = g[m - 1].re;
    if !(nrm > T::zero()) {
        return Err(Error::PullbackDegenerate);
    }
    let v: Vec<_> = g.iter().map(|c| -*c / nrm).collect();
    Ok(fam.to_tilde_vector(chart, s, &v))
}

pub fn grad_ham_field<T: Real>(fam: &FlowFamily<T>, s: &State<T>) -> Result<Vec<Complex<T>>> {
    grad_ham_field_in(fam, fam.chart_for(s.t), s)
}

/// Largest component difference between the two charts' fields, relative
/// to the field norm.
pub fn handover_residual<T: Real>(fam: &FlowFamily<T>, s: &State<T>) -> Result<T> {
    let a = grad_ham_field_in(fam, Chart::Degeneration, s)?;
    let b = grad_ham_field_in(fam, Chart::Trivial, s)?;
    let scale = a.iter().map(|c| c.norm()).fold(T::zero(), T::max);
    let diff = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (*x - *y).norm())
        .fold(T::zero(), T::max);
    Ok(diff / scale)
}
