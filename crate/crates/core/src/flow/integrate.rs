use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{grad_ham_field, pullback_kahler, FlowFamily, State};
use crate::error::{Error, Result};
use crate::scalar::Real;

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct StepOptions<T> {
    /// Absolute and relative per-step tolerance.
    pub tol: T,
    pub max_steps: usize,
    /// Give up once the step falls below this fraction of the span.
    pub min_step_fraction: T,
}

impl<T: Real> StepOptions<T> {
    pub fn new(tol: T) -> Self {
        StepOptions {
            tol,
            max_steps: 200_000,
            min_step_fraction: T::lit(1e-12),
        }
    }
}

/// Integrates the autonomous system `y' = f(y)` over `[0, span]`, calling
/// `on_step(s, y)` after each accepted step. A failing right-hand side is
/// treated as a rejected step; if the step size underflows the last
/// evaluation error is returned together with the time reached.
pub fn dopri5<T, F>(
    mut f: F,
    y0: &[Complex<T>],
    span: T,
    opts: &StepOptions<T>,
    mut on_step: impl FnMut(T, &[Complex<T>]),
) -> std::result::Result<Vec<Complex<T>>, (Error, T)>
where
    T: Real,
    F: FnMut(&[Complex<T>]) -> Result<Vec<Complex<T>>>,
{
    let dim = y0.len();
    let mut y = y0.to_vec();
    if !(span > T::zero()) {
        return Ok(y);
    }
    let h_min = span * opts.min_step_fraction;
    let mut s = T::zero();
    let mut h = span.min(T::lit(0.01) * span.max(T::one()));
    let mut k0 = f(&y).map_err(|e| (e, s))?;
    let mut steps = 0;
    let mut last_err = Error::LeftChart { s: 0.0 };

    while s < span {
        steps += 1;
        if steps > opts.max_steps || h < h_min {
            let e = if h < h_min {
                last_err
            } else {
                Error::LeftChart {
                    s: s.to_f64().unwrap_or(f64::NAN),
                }
            };
            return Err((e, s));
        }
        let last = s + h >= span;
        if last {
            h = span - s;
        }

        let mut k = vec![k0.clone()];
        let mut failed = None;
        for stage in 1..7 {
            let yi: Vec<_> = (0..dim)
                .map(|i| {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate() {
                        let a = A[stage][j];
                        if a != 0.0 {
                            acc = acc + kj[i] * (h * T::lit(a));
                        }
                    }
                    acc
                })
                .collect();
            match f(&yi) {
                Ok(v) => k.push(v),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            last_err = e;
            h = h * T::lit(0.25);
            continue;
        }

        let y5: Vec<_> = (0..dim)
            .map(|i| (0..7).fold(y[i], |acc, j| acc + k[j][i] * (h * T::lit(B5[j]))))
            .collect();
        let mut err = T::zero();
        for i in 0..dim {
            let e = (0..7).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                acc + k[j][i] * (h * T::lit(B5[j] - B4[j]))
            });
            let sc = opts.tol + opts.tol * y[i].norm().max(y5[i].norm());
            let r = e.norm() / sc;
            err = err + r * r;
        }
        err = (err / T::from_usize(dim).unwrap()).sqrt();

        if err <= T::one() {
            s = if last { span } else { s + h };
            y = y5;
            // FSAL: the last stage was evaluated at y5
            k0 = k.pop().expect("seven stages");
            on_step(s, &y);
        } else {
            last_err = Error::LeftChart {
                s: s.to_f64().unwrap_or(f64::NAN),
            };
        }
        let fac = if err > T::zero() {
            T::lit(0.9) * err.powf(T::lit(-0.2))
        } else {
            T::lit(5.0)
        };
        h = h * fac.max(T::lit(0.2)).min(T::lit(5.0));
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajPoint<T> {
    pub s: T,
    pub state: State<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub points: Vec<TrajPoint<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &State<T> {
        &self
            .points
            .last()
            .expect("trajectory has its start point")
            .state
    }

    /// Largest `|ΔRe t / Δs + 1|` over accepted steps (signed time).
    pub fn max_rate_deviation(&self) -> T {
        self.points
            .windows(2)
            .map(|w| {
                let ds = w[1].s - w[0].s;
                ((w[1].state.t.re - w[0].state.t.re) / ds + T::one()).abs()
            })
            .fold(T::zero(), T::max)
    }

    pub fn max_im_drift(&self) -> T {
        let im0 = self.points[0].state.t.im;
        self.points
            .iter()
            .map(|p| (p.state.t.im - im0).abs())
            .fold(T::zero(), T::max)
    }
}

/// The integrator stopped early; `partial` holds the accepted steps.
#[derive(Debug, Clone)]
pub struct FlowAbort<T> {
    pub error: Error,
    pub partial: Trajectory<T>,
}

fn field_fn<'a, T: Real>(
    fam: &'a FlowFamily<T>,
    sign: T,
    copies: usize,
) -> impl FnMut(&[Complex<T>]) -> Result<Vec<Complex<T>>> + 'a {
    let m = fam.n + 1;
    move |y: &[Complex<T>]| {
        let mut out = Vec::with_capacity(y.len());
        for c in 0..copies {
            let s = State::from_coords(&y[c * m..(c + 1) * m]);
            if !s.is_finite() {
                return Err(Error::LeftChart { s: f64::NAN });
            }
            out.extend(grad_ham_field(fam, &s)?.into_iter().map(|x| x * sign));
        }
        Ok(out)
    }
}

/// Follows `𝒱` for signed time `duration` (negative runs the reversed field).
pub fn integrate_flow<T: Real>(
    fam: &FlowFamily<T>,
    s0: &State<T>,
    duration: T,
    tol: T,
) -> std::result::Result<Trajectory<T>, FlowAbort<T>> {
    let sign = if duration < T::zero() {
        -T::one()
    } else {
        T::one()
    };
    let mut points = vec![TrajPoint {
        s: T::zero(),
        state: s0.clone(),
    }];
    let res = dopri5(
        field_fn(fam, sign, 1),
        &s0.coords(),
        duration.abs(),
        &StepOptions::new(tol),
        |s, y| {
            points.push(TrajPoint {
                s: s * sign,
                state: State::from_coords(y),
            })
        },
    );
    match res {
        Ok(_) => Ok(Trajectory { points }),
        Err((error, _)) => Err(FlowAbort {
            error,
            partial: Trajectory { points },
        }),
    }
}

/// ω-areas of a fiber-tangent parallelogram before and after transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaCheck<T> {
    pub area_before: T,
    pub area_after: T,
    pub final_state: State<T>,
}

impl<T: Real> AreaCheck<T> {
    pub fn relative_drift(&self) -> T {
        ((self.area_after - self.area_before) / self.area_before).abs()
    }
}

/// Transport offset for the finite-difference linearization.
pub const TRANSPORT_OFFSET: f64 = 1e-5;

/// Transports `frame` along the flow by central differences of offset
/// trajectories integrated as one system, and compares ω-areas.
pub fn transport_area_check<T: Real>(
    fam: &FlowFamily<T>,
    s0: &State<T>,
    frame: [&[Complex<T>]; 2],
    duration: T,
    tol: T,
) -> Result<AreaCheck<T>> {
    let m = fam.n + 1;
    for v in frame {
        if v.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                found: v.len(),
            });
        }
        if v[m - 1].norm() != T::zero() {
            return Err(Error::InvalidArgument(
                "frame vectors must be tangent to the fiber (dt = 0)".into(),
            ));
        }
    }
    let before = pullback_kahler(fam, s0)?.omega_of(frame[0], frame[1]);
    if duration == T::zero() {
        return Ok(AreaCheck {
            area_before: before,
            area_after: before,
            final_state: s0.clone(),
        });
    }

    let h = T::lit(TRANSPORT_OFFSET);
    let base = s0.coords();
    let norms: Vec<T> = frame
        .iter()
        .map(|v| {
            v.iter()
                .map(|c| c.norm_sqr())
                .fold(T::zero(), |a, b| a + b)
                .sqrt()
        })
        .collect();
    let mut y0 = base.clone();
    for (v, nv) in frame.iter().zip(&norms) {
        for sgn in [T::one(), -T::one()] {
            y0.extend(
                base.iter()
                    .zip(v.iter())
                    .map(|(b, x)| *b + *x * (sgn * h / *nv)),
            );
        }
    }
    let sign = if duration < T::zero() {
        -T::one()
    } else {
        T::one()
    };
    let y = dopri5(
        field_fn(fam, sign, 5),
        &y0,
        duration.abs(),
        &StepOptions::new(tol),
        |_, _| {},
    )
    .map_err(|(e, _)| e)?;

    let end = State::from_coords(&y[..m]);
    let moved: Vec<Vec<Complex<T>>> = (0..2)
        .map(|k| {
            let p = &y[(1 + 2 * k) * m..(2 + 2 * k) * m];
            let q = &y[(2 + 2 * k) * m..(3 + 2 * k) * m];
            p.iter()
                .zip(q)
                .map(|(a, b)| (*a - *b) * (norms[k] / (h + h)))
                .collect()
        })
        .collect();
    let after = pullback_kahler(fam, &end)?.omega_of(&moved[0], &moved[1]);
    Ok(AreaCheck {
        area_before: before,
        area_after: after,
        final_state: end,
    })
}
