//! End-to-end run: expansion through certificates, one report per run.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use num_traits::One;
use okbody_core::degen::{
    immersion_certificate, jacobian_at_zero_fiber, verify_immersion_certificate,
};
use okbody_core::gromov::{
    packing_subdivision, search_largest_simplex, simplicial_nobody, verify_packing_certificate,
};
use okbody_core::linsys::GammaCertificate;
use okbody_core::scalar::{format_rat, rat_int};
use okbody_core::{QPolytope, Rat};
use serde::{Deserialize, Serialize};

use crate::commands::{
    family, gamma_file, gap_string, nobody_entry, reduce, simplicial_shape, sub_seed, torus_points,
    valuations, NobodyEntry, ValuationEntry,
};
use crate::error::{CliError, CliResult};
use crate::flowbatch::{run_flow_batch, write_flow_outputs, FlowSettings, TrajectoryReport};
use crate::io::{resolve, to_json_string, write_json, write_text};
use crate::oracle::bk_oracle_curve_with;
use crate::variety::VarietySpec;

fn default_k() -> [u32; 2] {
    [1, 1]
}
fn default_gamma_bound() -> u32 {
    8
}
fn default_samples() -> usize {
    100
}
fn default_trials() -> usize {
    7
}
fn default_simplex_bound() -> u32 {
    1
}
fn default_out() -> String {
    "pipeline_out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Variety spec path (relative to the config) or `fixture:<name>`.
    pub variety: String,
    #[serde(default = "default_k")]
    pub k_range: [u32; 2],
    #[serde(default)]
    pub trunc: Option<u32>,
    #[serde(default = "default_gamma_bound")]
    pub gamma_bound: u32,
    #[serde(default = "default_samples")]
    pub jacobian_samples: usize,
    #[serde(default = "default_trials")]
    pub bk_trials: usize,
    #[serde(default = "default_simplex_bound")]
    pub simplex_bound: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub flow: Option<FlowSettings>,
    #[serde(default = "default_out")]
    pub out: String,
}

impl PipelineConfig {
    pub fn validate(&self) -> CliResult<()> {
        let [lo, hi] = self.k_range;
        if lo < 1 || hi < lo {
            return Err(CliError::Usage(format!(
                "k_range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if self.jacobian_samples == 0 || self.bk_trials == 0 {
            return Err(CliError::Usage(
                "jacobian_samples and bk_trials must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn load_variety(&self, config_path: &Path) -> CliResult<VarietySpec> {
        if self.variety.starts_with("fixture:") {
            crate::fixtures::load(&self.variety)
        } else {
            VarietySpec::load(&resolve(config_path, &self.variety))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionSummary {
    pub chart: usize,
    pub samples: usize,
    pub expected_rank: usize,
    pub all_full_rank: bool,
    pub lambda_invariant_factors: Vec<i64>,
    /// Jacobian at `ũ = 1`, one column per homogeneous coordinate.
    pub matrix_at_one: Vec<Vec<String>>,
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BkSummary {
    pub values: Vec<i64>,
    pub oracle: i64,
    pub normalized_volume: String,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GromovSummary {
    pub target_k: u32,
    pub r: String,
    pub r_sup: String,
    pub open_supremum: bool,
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingSummary {
    pub n: usize,
    pub d: i64,
    pub pieces: Vec<Vec<Vec<i64>>>,
    pub all_checks_pass: bool,
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub settings: FlowSettings,
    pub trajectories: Vec<TrajectoryReport>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub ok: bool,
    pub halted_at: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub variety: String,
    pub seed: u64,
    pub trunc: Option<u32>,
    pub retried_at_double_trunc: bool,
    pub sections: Option<Vec<ValuationEntry>>,
    pub reduced_basis: Option<Vec<ValuationEntry>>,
    pub values: Option<Vec<Vec<i64>>>,
    pub gamma: Option<GammaCertificate>,
    pub special_fiber: Option<Vec<String>>,
    pub immersion: Option<ImmersionSummary>,
    pub nobody: Vec<NobodyEntry>,
    /// `d` when the last approximant is `conv{0, e_1, …, d e_n}`.
    pub simplicial_degree: Option<i64>,
    pub bk: Option<BkSummary>,
    pub gromov: Option<GromovSummary>,
    pub packing: Option<PackingSummary>,
    pub flow: Option<FlowSummary>,
    pub skipped: Vec<String>,
    pub certificates: Vec<String>,
    pub status: Status,
}

impl PipelineReport {
    fn new(variety: &str, seed: u64) -> Self {
        PipelineReport {
            variety: variety.into(),
            seed,
            trunc: None,
            retried_at_double_trunc: false,
            sections: None,
            reduced_basis: None,
            values: None,
            gamma: None,
            special_fiber: None,
            immersion: None,
            nobody: vec![],
            simplicial_degree: None,
            bk: None,
            gromov: None,
            packing: None,
            flow: None,
            skipped: vec![],
            certificates: vec![],
            status: Status {
                ok: true,
                halted_at: None,
                error: None,
            },
        }
    }

    /// Plain-text digest of the report.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variety: {}", self.variety);
        if let Some(d) = self.trunc {
            let _ = writeln!(
                s,
                "truncation order: {d}{}",
                if self.retried_at_double_trunc {
                    " (retried)"
                } else {
                    ""
                }
            );
        }
        if let Some(v) = &self.values {
            let _ = writeln!(s, "value set A: {v:?}");
        }
        if let Some(g) = &self.gamma {
            let _ = writeln!(s, "gamma: {:?}", g.gamma);
        }
        if let Some(f) = &self.special_fiber {
            let _ = writeln!(s, "special fiber: ({})", f.join(" : "));
        }
        if let Some(i) = &self.immersion {
            let _ = writeln!(
                s,
                "immersion: rank {} at {} points: {}",
                i.expected_rank,
                i.samples,
                if i.all_full_rank { "yes" } else { "NO" }
            );
        }
        for e in &self.nobody {
            let _ = writeln!(
                s,
                "Delta_{}: normalized volume {}{}",
                e.k,
                e.normalized_volume,
                e.volume_gap
                    .as_ref()
                    .map(|g| format!(", volume gap {g}"))
                    .unwrap_or_default()
            );
        }
        if let Some(b) = &self.bk {
            let _ = writeln!(
                s,
                "degree check: oracle {} vs volume {} ({})",
                b.oracle,
                b.normalized_volume,
                if b.agree { "agree" } else { "DISAGREE" }
            );
        }
        if let Some(g) = &self.gromov {
            let _ = writeln!(
                s,
                "Gromov width >= {} (supremum {}, Delta_{})",
                g.r, g.r_sup, g.target_k
            );
        }
        if let Some(p) = &self.packing {
            let _ = writeln!(
                s,
                "full packing: {} unit simplices ({})",
                p.d,
                if p.all_checks_pass {
                    "verified"
                } else {
                    "FAILED"
                }
            );
        }
        if let Some(f) = &self.flow {
            let errs = f.trajectories.iter().filter(|t| t.error.is_some()).count();
            let _ = writeln!(
                s,
                "flow: {} trajectories, {} aborted",
                f.trajectories.len(),
                errs
            );
        }
        for k in &self.skipped {
            let _ = writeln!(s, "skipped: {k}");
        }
        match &self.status.halted_at {
            Some(stage) => {
                let _ = writeln!(
                    s,
                    "HALTED at {stage}: {}",
                    self.status.error.as_deref().unwrap_or("")
                );
            }
            None => s.push_str("status: ok\n"),
        }
        s
    }
}

struct Run<'a> {
    out: &'a Path,
    report: PipelineReport,
}

impl Run<'_> {
    fn cert<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<String> {
        write_json(&self.out.join(name), value)?;
        self.report.certificates.push(name.into());
        Ok(name.into())
    }
}

fn stage<T>(name: &str, r: CliResult<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Stage {
        stage: name.into(),
        source: Box::new(e),
    })
}

// Stream ids for sub-seeds.
const SEED_JACOBIAN: u64 = 1;
const SEED_BK: u64 = 2;
const SEED_FLOW: u64 = 3;

fn run_stages(cfg: &PipelineConfig, spec: &VarietySpec, run: &mut Run) -> CliResult<()> {
    let red = stage("expand", reduce(spec, cfg.trunc))?;
    let rep = &mut run.report;
    rep.trunc = Some(red.bundle.trunc);
    rep.retried_at_double_trunc = red.retried;
    rep.sections = Some(stage("expand", valuations(&red.bundle))?);
    let b = red.basis;
    rep.reduced_basis = Some(
        b.sections
            .iter()
            .map(|s| ValuationEntry {
                id: s.id.clone(),
                value: s.beta.0.clone(),
                lead_coeff: format_rat(&s.lead_coeff),
            })
            .collect(),
    );
    rep.values = Some(b.value_set().into_iter().map(|v| v.0).collect());

    let g = stage("gamma", gamma_file(&b, cfg.gamma_bound))?;
    rep.gamma = Some(g.certificate.clone());
    run.cert("gamma.cert.json", &g)?;

    let fam = stage("build_family", family(&b, &g.certificate.gamma, false))?;
    let names = crate::variety::local_names(fam.n);
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    run.report.special_fiber = Some(
        fam.special_fiber()
            .iter()
            .map(|s| s.display_with(&refs))
            .collect(),
    );

    let pts = torus_points(
        fam.n,
        cfg.jacobian_samples,
        sub_seed(cfg.seed, SEED_JACOBIAN),
    );
    let ic = stage(
        "jacobian",
        immersion_certificate(&fam, &pts).map_err(CliError::from),
    )?;
    let at_one = stage(
        "jacobian",
        jacobian_at_zero_fiber(&fam, &vec![Rat::one(); fam.n]).map_err(CliError::from),
    )?;
    let all_full = ic.samples.iter().all(|s| s.rank == ic.expected_rank)
        && verify_immersion_certificate(&ic).is_ok();
    let file = run.cert("immersion.cert.json", &ic)?;
    run.report.immersion = Some(ImmersionSummary {
        chart: ic.chart,
        samples: ic.samples.len(),
        expected_rank: ic.expected_rank,
        all_full_rank: all_full,
        lambda_invariant_factors: ic.lambda_invariant_factors.clone(),
        matrix_at_one: at_one
            .printed()
            .iter()
            .map(|r| r.iter().map(format_rat).collect())
            .collect(),
        certificate: file,
    });

    let mut deltas: Vec<(u32, QPolytope, Rat)> = Vec::new();
    for k in cfg.k_range[0]..=cfg.k_range[1] {
        let (e, vol) = stage("nobody", nobody_entry(&b, k))?;
        deltas.push((k, e.delta.clone(), vol));
        run.report.nobody.push(e);
    }
    let (k_last, last, _) = deltas.last().cloned().expect("nonempty k range");
    let shape = simplicial_shape(&last);
    run.report.simplicial_degree = shape;
    if let Some(d) = shape {
        let body = stage(
            "nobody",
            simplicial_nobody(fam.n, &rat_int(d)).map_err(CliError::from),
        )?;
        for (e, (_, dk, _)) in run.report.nobody.iter_mut().zip(&deltas) {
            e.volume_gap = Some(stage("nobody", gap_string(&body, dk))?);
        }
    }

    if fam.n == 1 {
        let vals: Vec<i64> = b.values.iter().map(|v| v.0[0]).collect();
        let oracle = stage(
            "bk_check",
            bk_oracle_curve_with(
                &vals,
                &b.lead_coeffs(),
                cfg.bk_trials,
                sub_seed(cfg.seed, SEED_BK),
            ),
        )?;
        let (_, vol1) = stage("bk_check", nobody_entry(&b, 1))?;
        run.report.bk = Some(BkSummary {
            values: vals,
            oracle,
            normalized_volume: format_rat(&vol1),
            agree: vol1 == rat_int(oracle),
        });
    } else {
        run.report
            .skipped
            .push("bk_check: root-count oracle is for curves".into());
    }

    if last.is_full_dimensional() && (1..=3).contains(&fam.n) {
        let c = stage(
            "gromov",
            search_largest_simplex(&last, cfg.simplex_bound).map_err(CliError::from),
        )?;
        let file = run.cert("simplex.cert.json", &c)?;
        run.report.gromov = Some(GromovSummary {
            target_k: k_last,
            r: format_rat(&c.r),
            r_sup: format_rat(&c.r_sup),
            open_supremum: c.open_supremum,
            certificate: file,
        });
    } else {
        run.report
            .skipped
            .push("gromov: target not full-dimensional or n > 3".into());
    }

    match shape {
        Some(d) => {
            let c = stage(
                "packing",
                packing_subdivision(fam.n, d).map_err(CliError::from),
            )?;
            let ok = stage(
                "packing",
                verify_packing_certificate(&c).map_err(CliError::from),
            )?
            .all_ok();
            let file = run.cert("packing.cert.json", &c)?;
            run.report.packing = Some(PackingSummary {
                n: fam.n,
                d,
                pieces: c.pieces.iter().map(|p| p.vertices.clone()).collect(),
                all_checks_pass: ok,
                certificate: file,
            });
        }
        None => run
            .report
            .skipped
            .push("packing: last approximant is not simplicial".into()),
    }

    if let Some(fs) = &cfg.flow {
        let runs = run_flow_batch(&fam, fs, sub_seed(cfg.seed, SEED_FLOW));
        let files = stage(
            "flow",
            write_flow_outputs(&run.out.join("flow"), &fam, &runs),
        )?;
        run.report.flow = Some(FlowSummary {
            settings: fs.clone(),
            trajectories: runs.into_iter().map(|r| r.report).collect(),
            files: files.into_iter().map(|f| format!("flow/{f}")).collect(),
        });
    }
    Ok(())
}

/// Runs every stage, writing `report.json`, `summary.txt` and the
/// certificate files to `out`. A failing stage is recorded in the report
/// before the error is returned.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    config_path: &Path,
    out: &Path,
) -> CliResult<PipelineReport> {
    cfg.validate()?;
    let spec = cfg.load_variety(config_path)?;
    let mut run = Run {
        out,
        report: PipelineReport::new(&spec.name, cfg.seed),
    };
    let res = run_stages(cfg, &spec, &mut run);
    if let Err(CliError::Stage { stage, source }) = &res {
        run.report.status = Status {
            ok: false,
            halted_at: Some(stage.clone()),
            error: Some(source.to_string()),
        };
    } else if let Err(e) = &res {
        run.report.status = Status {
            ok: false,
            halted_at: Some("output".into()),
            error: Some(e.to_string()),
        };
    }
    write_text(&out.join("report.json"), &to_json_string(&run.report))?;
    write_text(&out.join("summary.txt"), &run.report.summary())?;
    res.map(|()| run.report)
}

/// Output directory: explicit override, else `cfg.out` next to the config.
pub fn output_dir(cfg: &PipelineConfig, config_path: &Path, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => resolve(config_path, &cfg.out),
    }
}
