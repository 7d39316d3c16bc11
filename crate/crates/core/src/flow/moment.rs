use num_complex::Complex;

use super::{hermitian_tilde, FlowFamily, State};
use crate::error::{Error, Result};
use crate::exact::LatticeVector;
use crate::scalar::Real;

/// `μ(u) = Σ_j |c_j u^{β_j}|² β_j / Σ_j |c_j u^{β_j}|²`, with weights
/// rescaled in log space.
pub fn moment_map<T: Real>(
    a: &[LatticeVector],
    c: &[Complex<T>],
    u: &[Complex<T>],
) -> Result<Vec<T>> {
    if a.len() != c.len() {
        return Err(Error::ArityMismatch {
            expected: a.len(),
            found: c.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("value set is empty"));
    }
    let n = u.len();
    if let Some(b) = a.iter().find(|b| b.dim() != n) {
        return Err(Error::ArityMismatch {
            expected: n,
            found: b.dim(),
        });
    }
    if u.iter().any(|x| x.norm() == T::zero()) {
        return Err(Error::ZeroCoordinate);
    }
    let lu: Vec<T> = u.iter().map(|x| x.norm().ln()).collect();
    let two = T::lit(2.0);
    let logw: Vec<T> = a
        .iter()
        .zip(c)
        .map(|(b, cj)| {
            let s = b
                .coords()
                .iter()
                .zip(&lu)
                .fold(T::zero(), |acc, (&k, l)| acc + T::from_i64(k).unwrap() * *l);
            two * (cj.norm().ln() + s)
        })
        .collect();
    let mx = logw.iter().copied().fold(T::neg_infinity(), T::max);
    let w: Vec<T> = logw.iter().map(|l| (*l - mx).exp()).collect();
    let total = w.iter().copied().fold(T::zero(), |x, y| x + y);
    Ok((0..n)
        .map(|i| {
            a.iter().zip(&w).fold(T::zero(), |acc, (b, wj)| {
                acc + *wj * T::from_i64(b.coords()[i]).unwrap()
            }) / total
        })
        .collect())
}

/// ω-area of the fiber at `t` of a curve family (`n = 1`), by quadrature in
/// `(log|ũ|, arg ũ)` over `|log|ũ|| ≤ rho_max`.
pub fn fiber_area_n1<T: Real>(
    fam: &FlowFamily<T>,
    t: Complex<T>,
    rho_max: T,
    rho_steps: usize,
    theta_steps: usize,
) -> Result<T> {
    if fam.n != 1 {
        return Err(Error::InvalidArgument(
            "fiber area quadrature is for curves (n = 1)".into(),
        ));
    }
    let chart = fam.chart_for(t);
    let d_rho = (rho_max + rho_max) / T::from_usize(rho_steps).unwrap();
    let d_theta = T::TAU() / T::from_usize(theta_steps).unwrap();
    let mut total = T::zero();
    for i in 0..rho_steps {
        // midpoint rule in ρ, trapezoid (spectral) in θ
        let rho = -rho_max + d_rho * (T::from_usize(i).unwrap() + T::lit(0.5));
        let r = rho.exp();
        for k in 0..theta_steps {
            let th = d_theta * T::from_usize(k).unwrap();
            let s = State::new(vec![Complex::from_polar(r, th)], t);
            let h = hermitian_tilde(fam, chart, &s)?;
            total = total + h[0][0].re * r * r;
        }
    }
    Ok(total * d_rho * d_theta)
}

/// Fiber area divided by `π`; with the `(i/2)∂∂̄` convention this equals
/// the length of `conv(A)` for the special fiber.
pub fn normalized_fiber_volume_n1<T: Real>(fam: &FlowFamily<T>, t: Complex<T>) -> Result<T> {
    Ok(fiber_area_n1(fam, t, T::lit(40.0), 8000, 16)? / T::PI())
}
