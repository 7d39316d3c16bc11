use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex;
use num_traits::One;
use okbody_core::degen::{immersion_certificate, jacobian_at_zero_fiber};
use okbody_core::exact::LatticeVector;
use okbody_core::gromov::{
    packing_subdivision, search_largest_simplex, verify_packing_certificate,
};
use okbody_core::scalar::{format_rat, parse_rat};
use okbody_core::Rat;
use serde_json::json;

use okbody_cli::certs::verify_certificate_file;
use okbody_cli::commands::{
    basis_for, family_for, gamma_file, nobody_entry, parse_points, polytope_from_points, reduce,
    torus_points, valuations,
};
use okbody_cli::error::{CliError, CliResult};
use okbody_cli::fixtures::{fixture_names, fixture_text, load};
use okbody_cli::flowbatch::{
    moment_csv, moment_samples, moment_svg, run_flow_config, summarize_moments, FlowConfig,
};
use okbody_cli::io::{emit_json, read_json, write_text};
use okbody_cli::oracle::bk_oracle_curve;
use okbody_cli::pipeline::{output_dir, run_pipeline, PipelineConfig};
use okbody_cli::VarietySpec;

/// Toric degenerations, Newton-Okounkov bodies and symplectic certificates.
///
/// Inputs that take a spec path also accept `fixture:<name>`.
#[derive(Parser)]
#[command(name = "okbody", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct SpecArgs {
    /// Variety spec (JSON path or fixture:<name>).
    spec: String,
    /// Truncation order, overriding the spec.
    #[arg(long)]
    trunc: Option<u32>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand each section as a power series in local coordinates.
    Expand(SpecArgs),
    /// Lex valuation and leading coefficient of each section.
    Valuate(SpecArgs),
    /// Reduce the sections to a basis with distinct values.
    BasisReduce(SpecArgs),
    /// Choose a separating weight vector and write its certificate.
    Gamma {
        #[command(flatten)]
        args: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u32,
        /// Use the sections as given (values may repeat).
        #[arg(long)]
        raw: bool,
    },
    /// Build the degeneration family.
    Degenerate {
        #[command(flatten)]
        args: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u32,
        #[arg(long)]
        raw: bool,
    },
    /// Exact Jacobian at the torus fiber and an immersion certificate.
    JacobianCheck {
        #[command(flatten)]
        args: SpecArgs,
        #[arg(long, default_value_t = 8)]
        bound: u32,
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Point for the printed matrix, comma separated (default all ones).
        #[arg(long)]
        point: Option<String>,
    },
    /// Value sets A_k and approximants Delta_k for k = 1..=K.
    Nobody {
        #[command(flatten)]
        args: SpecArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Compare the root-count degree oracle with the normalized volume.
    BkCheck {
        /// Integer values, e.g. 0,1,3.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 7)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a seeded batch of flow trajectories.
    Flow {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory.
        #[arg(long, default_value = "flow_out")]
        out: PathBuf,
    },
    /// Sample the moment map of (A, c).
    MomentSample {
        /// Lattice points: 0,1,3 or 0,0;1,0;0,1.
        #[arg(long)]
        values: String,
        /// Coefficients c_j (rationals, comma separated); default all ones.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 10000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "moment_out")]
        out: PathBuf,
    },
    /// Search for a large simplex inside a polytope.
    Gromov {
        /// Vertices: 0,3 or 0,0;1,0;0,2.
        #[arg(long, conflicts_with = "polytope")]
        points: Option<String>,
        /// Polytope JSON file.
        #[arg(long)]
        polytope: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        bound: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subdivide conv{0, e_1, ..., d e_n} into unimodular simplices.
    Pack {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate file.
    VerifyCert { file: PathBuf },
    /// Run every stage from a pipeline config.
    Pipeline {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in fixtures, or print one.
    Fixtures { name: Option<String> },
}

fn spec(reference: &str) -> CliResult<VarietySpec> {
    load(reference)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Expand(a) => {
            let b = spec(&a.spec)?.expand(a.trunc)?;
            emit_json(a.out.as_deref(), &b)
        }
        Cmd::Valuate(a) => {
            let b = spec(&a.spec)?.expand(a.trunc)?;
            emit_json(a.out.as_deref(), &valuations(&b)?)
        }
        Cmd::BasisReduce(a) => {
            let r = reduce(&spec(&a.spec)?, a.trunc)?;
            if r.retried {
                eprintln!("note: retried at truncation order {}", r.bundle.trunc);
            }
            emit_json(a.out.as_deref(), &r.basis)
        }
        Cmd::Gamma { args, bound, raw } => {
            let b = basis_for(&spec(&args.spec)?, args.trunc, raw)?;
            emit_json(args.out.as_deref(), &gamma_file(&b, bound)?)
        }
        Cmd::Degenerate { args, bound, raw } => {
            let fam = family_for(&spec(&args.spec)?, args.trunc, bound, raw)?;
            emit_json(args.out.as_deref(), &fam)
        }
        Cmd::JacobianCheck {
            args,
            bound,
            raw,
            samples,
            seed,
            point,
        } => {
            let fam = family_for(&spec(&args.spec)?, args.trunc, bound, raw)?;
            let p: Vec<Rat> = match point {
                Some(s) => s
                    .split(',')
                    .map(parse_rat)
                    .collect::<okbody_core::Result<_>>()?,
                None => vec![Rat::one(); fam.n],
            };
            let j = jacobian_at_zero_fiber(&fam, &p)?;
            let printed: Vec<Vec<String>> = j
                .printed()
                .iter()
                .map(|r| r.iter().map(format_rat).collect())
                .collect();
            eprintln!(
                "Jacobian at ({}, t = 0), chart {}: {:?}, rank {}",
                p.iter().map(format_rat).collect::<Vec<_>>().join(", "),
                j.chart,
                printed,
                j.rank
            );
            let cert = immersion_certificate(&fam, &torus_points(fam.n, samples, seed))?;
            if let Some(bad) = cert.samples.iter().find(|s| s.rank != cert.expected_rank) {
                return Err(CliError::InvalidCertificate(format!(
                    "rank {} at {:?}",
                    bad.rank, bad.point
                )));
            }
            emit_json(args.out.as_deref(), &cert)
        }
        Cmd::Nobody { args, k } => {
            if k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            let b = reduce(&spec(&args.spec)?, args.trunc)?.basis;
            let entries = (1..=k)
                .map(|k| nobody_entry(&b, k).map(|e| e.0))
                .collect::<CliResult<Vec<_>>>()?;
            emit_json(args.out.as_deref(), &entries)
        }
        Cmd::BkCheck {
            values,
            trials,
            seed,
            out,
        } => {
            let pts = parse_points(&values)?;
            if pts.iter().any(|p| p.len() != 1) {
                return Err(CliError::Usage(
                    "bk-check takes one-dimensional values".into(),
                ));
            }
            let vals: Vec<i64> = pts.iter().map(|p| p[0]).collect();
            let oracle = bk_oracle_curve(&vals, trials, seed)?;
            let vol = polytope_from_points(&pts)?.normalized_volume()?;
            let agree = vol == Rat::from_integer(oracle.into());
            emit_json(
                out.as_deref(),
                &json!({
                    "values": vals, "oracle": oracle, "normalized_volume": format_rat(&vol), "agree": agree
                }),
            )?;
            if agree {
                Ok(())
            } else {
                Err(CliError::InvalidCertificate(format!(
                    "oracle {oracle} != volume {}",
                    format_rat(&vol)
                )))
            }
        }
        Cmd::Flow {
            config,
            seed,
            tol,
            out,
        } => {
            let mut cfg: FlowConfig = load(&config.display().to_string())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.settings.tol = t;
            }
            let fam = cfg.load_family(&config)?;
            let rep = run_flow_config(&cfg, &fam, &out)?;
            eprintln!(
                "{} trajectories, {} failing checks; output in {}",
                rep.trajectories.len(),
                rep.failures.len(),
                out.display()
            );
            if rep.all_passed {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!(
                    "flow checks failed: {:?}",
                    rep.failures
                )))
            }
        }
        Cmd::MomentSample {
            values,
            coeffs,
            count,
            seed,
            out,
        } => {
            let a: Vec<LatticeVector> = parse_points(&values)?
                .into_iter()
                .map(LatticeVector)
                .collect();
            let c: Vec<Complex<f64>> = match coeffs {
                Some(s) => s
                    .split(',')
                    .map(|x| {
                        parse_rat(x).map(|q| Complex::new(okbody_core::scalar::rat_to_f64(&q), 0.0))
                    })
                    .collect::<okbody_core::Result<_>>()?,
                None => vec![Complex::new(1.0, 0.0); a.len()],
            };
            let samples = moment_samples(&a, &c, count, seed)?;
            let summary = summarize_moments(&a, &samples, 0.95)?;
            write_text(&out.join("moment_samples.csv"), &moment_csv(&samples))?;
            if let Some(svg) = moment_svg(&a, &samples) {
                write_text(&out.join("moment_samples.svg"), &svg)?;
            }
            emit_json(Some(&out.join("moment_summary.json")), &summary)?;
            emit_json(None, &summary)
        }
        Cmd::Gromov {
            points,
            polytope,
            bound,
            out,
        } => {
            let target = match (points, polytope) {
                (Some(p), None) => polytope_from_points(&parse_points(&p)?)?,
                (None, Some(f)) => read_json(&f)?,
                _ => return Err(CliError::Usage("give --points or --polytope".into())),
            };
            emit_json(out.as_deref(), &search_largest_simplex(&target, bound)?)
        }
        Cmd::Pack { n, d, out } => {
            let c = packing_subdivision(n, d)?;
            let r = verify_packing_certificate(&c)?;
            if !r.all_ok() {
                return Err(CliError::InvalidCertificate(format!("{r:?}")));
            }
            emit_json(out.as_deref(), &c)
        }
        Cmd::VerifyCert { file } => {
            let v = verify_certificate_file(&file)?;
            emit_json(None, &v)?;
            if v.valid {
                Ok(())
            } else {
                Err(CliError::InvalidCertificate(v.detail))
            }
        }
        Cmd::Pipeline { config, seed, out } => {
            let mut cfg: PipelineConfig = if config.exists() {
                read_json(&config)?
            } else if let Some(name) = config.to_str().and_then(|s| s.strip_prefix("fixture:")) {
                load(&format!("fixture:{name}"))?
            } else {
                read_json(&config)?
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = output_dir(&cfg, &config, out.as_deref());
            let rep = run_pipeline(&cfg, &config, &dir)?;
            print!("{}", rep.summary());
            Ok(())
        }
        Cmd::Fixtures { name } => {
            match name {
                Some(n) => print!("{}", fixture_text(&n)?),
                None => fixture_names().for_each(|n| println!("{n}")),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
