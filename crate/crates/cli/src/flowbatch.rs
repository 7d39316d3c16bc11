//! Seeded batches of gradient-Hamiltonian trajectories and moment-map
//! samples, with CSV/SVG output.

use std::fmt::Write;
use std::path::Path;

use num_complex::Complex;
use okbody_core::degen::DegenerationFamily;
use okbody_core::exact::LatticeVector;
use okbody_core::flow::{
    integrate_flow, moment_map, pullback_kahler, transport_area_check, FlowFamily, Trajectory,
};
use okbody_core::polytope::convex_hull;
use okbody_core::scalar::{rat_int, rat_to_f64};
use okbody_core::{Error, FlowState, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::io::write_text;
use crate::svg::Plot;

type C64 = Complex<f64>;

fn default_duration() -> f64 {
    0.75
}

fn default_tol() -> f64 {
    1e-8
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSettings {
    pub trajectories: usize,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Also transport a fiber-tangent parallelogram along each trajectory.
    #[serde(default = "default_true")]
    pub transport: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub index: usize,
    pub start_u: Vec<[f64; 2]>,
    pub start_t: [f64; 2],
    pub end_u: Vec<[f64; 2]>,
    pub end_t: [f64; 2],
    pub reached_s: f64,
    pub steps: usize,
    pub max_rate_deviation: f64,
    pub max_im_drift: f64,
    pub area_before: Option<f64>,
    pub area_after: Option<f64>,
    pub area_drift: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub report: TrajectoryReport,
    pub trajectory: Trajectory<f64>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Start point on the `t = 1` fiber for trajectory `index`.
pub fn start_state(n: usize, seed: u64, index: usize) -> FlowState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let u = (0..n)
        .map(|_| {
            Complex::from_polar(
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    FlowState::new(u, Complex::new(1.0, 0.0))
}

/// Runs one trajectory; integration failures are recorded, not raised.
pub fn run_trajectory(
    ff: &FlowFamily<f64>,
    s0: &FlowState,
    index: usize,
    cfg: &FlowSettings,
) -> FlowRun {
    let (trajectory, mut error) = match integrate_flow(ff, s0, cfg.duration, cfg.tol) {
        Ok(t) => (t, None),
        Err(a) => (a.partial, Some(a.error.to_string())),
    };
    let last = trajectory.points.last().expect("start point");
    let (mut before, mut after, mut drift) = (None, None, None);
    if cfg.transport && ff.n > 0 && error.is_none() {
        let m = ff.n + 1;
        let mut v1 = vec![C64::new(0.0, 0.0); m];
        let mut v2 = v1.clone();
        v1[0] = C64::new(1e-3, 0.0);
        v2[0] = C64::new(0.0, 1e-3);
        match transport_area_check(ff, s0, [&v1, &v2], cfg.duration, cfg.tol) {
            Ok(chk) => {
                before = Some(chk.area_before);
                after = Some(chk.area_after);
                drift = Some(chk.relative_drift());
            }
            Err(e) => error = Some(format!("transport: {e}")),
        }
    }
    let report = TrajectoryReport {
        index,
        start_u: s0.u_tilde.iter().copied().map(pair).collect(),
        start_t: pair(s0.t),
        end_u: last.state.u_tilde.iter().copied().map(pair).collect(),
        end_t: pair(last.state.t),
        reached_s: last.s,
        steps: trajectory.points.len() - 1,
        max_rate_deviation: trajectory.max_rate_deviation(),
        max_im_drift: trajectory.max_im_drift(),
        area_before: before,
        area_after: after,
        area_drift: drift,
        error,
    };
    FlowRun { report, trajectory }
}

/// Trajectories from seeded points of the `t = 1` fiber, in index order.
pub fn run_flow_batch(fam: &DegenerationFamily, cfg: &FlowSettings, seed: u64) -> Vec<FlowRun> {
    let ff = FlowFamily::<f64>::new(fam);
    (0..cfg.trajectories)
        .map(|i| run_trajectory(&ff, &start_state(fam.n, seed, i), i, cfg))
        .collect()
}

/// Whether a report meets the property checks named in `checks`
/// (`rate`, `im`, `area`, `target`).
pub fn check_report(r: &TrajectoryReport, cfg: &FlowSettings, checks: &[String]) -> Vec<String> {
    let mut failed = Vec::new();
    if let Some(e) = &r.error {
        failed.push(format!("error: {e}"));
        return failed;
    }
    for c in checks {
        let ok = match c.as_str() {
            "rate" => r.max_rate_deviation <= 10.0 * cfg.tol,
            "im" => r.max_im_drift <= 10.0 * cfg.tol,
            "area" => r.area_drift.is_none_or(|d| d <= 1e-3),
            "target" => (r.end_t[0] - (r.start_t[0] - cfg.duration)).abs() <= 1e-6,
            _ => false,
        };
        if !ok {
            failed.push(c.clone());
        }
    }
    failed
}

/// Trajectory CSV: `s, Re t, Im t`, the `ũ` components and the ω-density
/// on the `(Re ũ_1, Im ũ_1)` plane.
pub fn trajectory_csv(ff: &FlowFamily<f64>, tr: &Trajectory<f64>) -> String {
    let n = ff.n;
    let mut s = String::from("s,re_t,im_t");
    for i in 1..=n {
        let _ = write!(s, ",u{i}_re,u{i}_im");
    }
    s.push_str(",omega_u1\n");
    for p in &tr.points {
        let _ = write!(s, "{},{},{}", p.s, p.state.t.re, p.state.t.im);
        for u in &p.state.u_tilde {
            let _ = write!(s, ",{},{}", u.re, u.im);
        }
        let w = if n > 0 {
            pullback_kahler(ff, &p.state)
                .map(|k| k.omega[0][1])
                .unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let _ = writeln!(s, ",{w}");
    }
    s
}

pub fn trajectories_svg(runs: &[FlowRun]) -> String {
    let pts: Vec<Vec<[f64; 2]>> = runs
        .iter()
        .map(|r| {
            r.trajectory
                .points
                .iter()
                .map(|p| pair(p.state.t))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let xr = all
        .clone()
        .fold([f64::INFINITY, f64::NEG_INFINITY], |a, p| {
            [a[0].min(p[0]), a[1].max(p[0])]
        });
    let yr = all.fold([f64::INFINITY, f64::NEG_INFINITY], |a, p| {
        [a[0].min(p[1]), a[1].max(p[1])]
    });
    let mut plot = Plot::new("gradient-Hamiltonian flow", xr, yr);
    for p in &pts {
        plot.polyline(p, "steelblue");
        plot.dots(&p[p.len() - 1..], "firebrick");
    }
    plot.render("Re t", "Im t")
}

/// Writes `trajectory_<i>.csv`, `trajectories.svg` and returns file names.
pub fn write_flow_outputs(
    dir: &Path,
    fam: &DegenerationFamily,
    runs: &[FlowRun],
) -> CliResult<Vec<String>> {
    let ff = FlowFamily::<f64>::new(fam);
    let mut files = Vec::new();
    for r in runs {
        let name = format!("trajectory_{:03}.csv", r.report.index);
        write_text(&dir.join(&name), &trajectory_csv(&ff, &r.trajectory))?;
        files.push(name);
    }
    if !runs.is_empty() {
        write_text(&dir.join("trajectories.svg"), &trajectories_svg(runs))?;
        files.push("trajectories.svg".into());
    }
    Ok(files)
}

fn default_bound() -> u32 {
    8
}

/// Input of the `flow` subcommand. The family comes either from a family
/// JSON file or is built from a variety spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub variety: Option<String>,
    /// Use the spec's sections as given instead of a reduced basis.
    #[serde(default)]
    pub raw: bool,
    #[serde(default)]
    pub trunc: Option<u32>,
    #[serde(default = "default_bound")]
    pub gamma_bound: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub settings: FlowSettings,
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowBatchReport {
    pub settings: FlowSettings,
    pub seed: u64,
    pub checks: Vec<String>,
    pub trajectories: Vec<TrajectoryReport>,
    /// `(trajectory, failed checks)`.
    pub failures: Vec<(usize, Vec<String>)>,
    pub all_passed: bool,
    pub files: Vec<String>,
}

impl FlowConfig {
    pub fn load_family(&self, config_path: &Path) -> CliResult<DegenerationFamily> {
        let pick = |r: &str| {
            if r.starts_with("fixture:") {
                r.to_string()
            } else {
                crate::io::resolve(config_path, r).display().to_string()
            }
        };
        match (&self.family, &self.variety) {
            (Some(f), None) => crate::fixtures::load(&pick(f)),
            (None, Some(v)) => {
                let spec: crate::variety::VarietySpec = crate::fixtures::load(&pick(v))?;
                crate::commands::family_for(&spec, self.trunc, self.gamma_bound, self.raw)
            }
            _ => Err(crate::error::CliError::Usage(
                "flow config needs exactly one of `family` or `variety`".into(),
            )),
        }
    }
}

/// Runs the batch, writes `flow_report.json`, the CSVs and the plot.
pub fn run_flow_config(
    cfg: &FlowConfig,
    fam: &DegenerationFamily,
    out: &Path,
) -> CliResult<FlowBatchReport> {
    for c in &cfg.checks {
        if !["rate", "im", "area", "target"].contains(&c.as_str()) {
            return Err(crate::error::CliError::Usage(format!(
                "unknown check {c:?}"
            )));
        }
    }
    let runs = run_flow_batch(fam, &cfg.settings, cfg.seed);
    let files = write_flow_outputs(out, fam, &runs)?;
    let failures: Vec<(usize, Vec<String>)> = runs
        .iter()
        .map(|r| {
            (
                r.report.index,
                check_report(&r.report, &cfg.settings, &cfg.checks),
            )
        })
        .filter(|(_, f)| !f.is_empty())
        .collect();
    let rep = FlowBatchReport {
        settings: cfg.settings.clone(),
        seed: cfg.seed,
        checks: cfg.checks.clone(),
        trajectories: runs.into_iter().map(|r| r.report).collect(),
        all_passed: failures.is_empty(),
        failures,
        files,
    };
    crate::io::write_json(&out.join("flow_report.json"), &rep)?;
    Ok(rep)
}

/// Moment-map images of random torus points: moduli log-uniform in
/// `[1e−3, 1e3]`, phases uniform.
pub fn moment_samples(
    a: &[LatticeVector],
    c: &[C64],
    count: usize,
    seed: u64,
) -> CliResult<Vec<Vec<f64>>> {
    let n = a
        .first()
        .ok_or(Error::EmptyInput("value set is empty"))?
        .dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u: Vec<C64> = (0..n)
            .map(|_| {
                Complex::from_polar(
                    10f64.powf(rng.gen_range(-3.0..=3.0)),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        out.push(moment_map(a, c, &u)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub count: usize,
    pub n: usize,
    pub all_strictly_inside: bool,
    /// Smallest facet slack over all samples.
    pub min_slack: f64,
    /// Per-coordinate `[min, max]` of the samples.
    pub extent: Vec<[f64; 2]>,
    pub scale: f64,
    /// Whether the sample hull contains conv(A) scaled about its centroid;
    /// evaluated for `n ≤ 2`.
    pub covers_scaled: Option<bool>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull (monotone chain).
fn hull_2d(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut h: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn in_ccw_hull(h: &[[f64; 2]], q: [f64; 2]) -> bool {
    h.len() >= 3 && (0..h.len()).all(|i| cross(h[i], h[(i + 1) % h.len()], q) >= 0.0)
}

pub fn summarize_moments(
    a: &[LatticeVector],
    samples: &[Vec<f64>],
    scale: f64,
) -> CliResult<MomentSummary> {
    let n = a
        .first()
        .ok_or(Error::EmptyInput("value set is empty"))?
        .dim();
    let pts: Vec<Vec<Rat>> = a
        .iter()
        .map(|v| v.coords().iter().map(|&x| rat_int(x)).collect())
        .collect();
    let poly = convex_hull(&pts)?;
    let facets: Vec<(Vec<f64>, f64)> = poly
        .facets()
        .iter()
        .map(|f| {
            (
                f.normal.iter().map(rat_to_f64).collect(),
                rat_to_f64(&f.offset),
            )
        })
        .collect();
    let mut min_slack = f64::INFINITY;
    for s in samples {
        for (nrm, off) in &facets {
            let v = off - nrm.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
            min_slack = min_slack.min(v);
        }
    }
    let extent: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            samples
                .iter()
                .fold([f64::INFINITY, f64::NEG_INFINITY], |a, s| {
                    [a[0].min(s[i]), a[1].max(s[i])]
                })
        })
        .collect();
    let verts: Vec<Vec<f64>> = poly
        .vertices()
        .iter()
        .map(|v| v.iter().map(rat_to_f64).collect())
        .collect();
    let centroid: Vec<f64> = (0..n)
        .map(|i| verts.iter().map(|v| v[i]).sum::<f64>() / verts.len() as f64)
        .collect();
    let scaled: Vec<Vec<f64>> = verts
        .iter()
        .map(|v| {
            v.iter()
                .zip(&centroid)
                .map(|(x, c)| c + scale * (x - c))
                .collect()
        })
        .collect();
    let covers = match n {
        1 => Some(
            scaled
                .iter()
                .all(|v| extent[0][0] <= v[0] && v[0] <= extent[0][1]),
        ),
        2 => {
            let h = hull_2d(&samples.iter().map(|s| [s[0], s[1]]).collect::<Vec<_>>());
            Some(scaled.iter().all(|v| in_ccw_hull(&h, [v[0], v[1]])))
        }
        _ => None,
    };
    Ok(MomentSummary {
        count: samples.len(),
        n,
        all_strictly_inside: poly.is_full_dimensional() && min_slack > 0.0,
        min_slack,
        extent,
        scale,
        covers_scaled: covers,
    })
}

pub fn moment_csv(samples: &[Vec<f64>]) -> String {
    let n = samples.first().map_or(0, |s| s.len());
    let mut s = (1..=n)
        .map(|i| format!("mu{i}"))
        .collect::<Vec<_>>()
        .join(",");
    s.push('\n');
    for p in samples {
        s.push_str(
            &p.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('\n');
    }
    s
}

/// Samples against conv(A); `None` for `n > 2`.
pub fn moment_svg(a: &[LatticeVector], samples: &[Vec<f64>]) -> Option<String> {
    let n = a.first()?.dim();
    let lift = |v: &[f64]| if n == 1 { [v[0], 0.0] } else { [v[0], v[1]] };
    let verts: Vec<[f64; 2]> = a
        .iter()
        .map(|b| lift(&b.coords().iter().map(|&x| x as f64).collect::<Vec<_>>()))
        .collect();
    let xr = verts
        .iter()
        .fold([f64::INFINITY, f64::NEG_INFINITY], |r, p| {
            [r[0].min(p[0]), r[1].max(p[0])]
        });
    let yr = if n == 1 {
        [-1.0, 1.0]
    } else {
        verts
            .iter()
            .fold([f64::INFINITY, f64::NEG_INFINITY], |r, p| {
                [r[0].min(p[1]), r[1].max(p[1])]
            })
    };
    let mut plot = Plot::new("moment map samples", xr, yr);
    match n {
        1 => plot.polyline(&[[xr[0], 0.0], [xr[1], 0.0]], "black"),
        2 => plot.polygon(&hull_2d(&verts), "black"),
        _ => return None,
    }
    let pts: Vec<[f64; 2]> = samples.iter().map(|s| lift(s)).collect();
    plot.dots(&pts, "steelblue");
    Some(plot.render("mu1", if n == 1 { "" } else { "mu2" }))
}
