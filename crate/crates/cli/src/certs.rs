//! Stand-alone re-verification of certificate files.

use okbody_core::degen::{verify_immersion_certificate, ImmersionCertificate};
use okbody_core::exact::LatticeVector;
use okbody_core::gromov::{
    verify_packing_certificate, verify_simplex_certificate, PackingCertificate, SimplexCertificate,
};
use okbody_core::linsys::{lex_valuation, verify_gamma};
use okbody_core::scalar::format_rat;
use okbody_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::GammaFile;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: String,
    pub valid: bool,
    pub detail: String,
}

fn parse<T: serde::de::DeserializeOwned>(v: Value, source: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|source_err| CliError::Json {
        path: source.into(),
        source: source_err,
    })
}

fn verify_gamma_file(g: &GammaFile) -> Verdict {
    let fail = |d: String| Verdict {
        kind: "gamma".into(),
        valid: false,
        detail: d,
    };
    let b = &g.basis;
    for (s, v) in b.sections.iter().zip(&b.values) {
        match lex_valuation(&s.series) {
            Ok(beta) if beta == s.beta && &beta == v => {}
            _ => {
                return fail(format!(
                    "recorded value of section {} does not match its series",
                    s.id
                ))
            }
        }
    }
    if b.sections.len() != b.values.len() {
        return fail("values and sections differ in length".into());
    }
    if b.trunc() != g.certificate.verified_on_trunc {
        return fail(format!(
            "basis truncation {} differs from verified_on_trunc {}",
            b.trunc(),
            g.certificate.verified_on_trunc
        ));
    }
    if !verify_gamma(b, &LatticeVector(g.certificate.gamma.clone())) {
        return fail(format!(
            "gamma {:?} does not separate every section",
            g.certificate.gamma
        ));
    }
    Verdict {
        kind: "gamma".into(),
        valid: true,
        detail: format!(
            "gamma {:?} separates {} sections",
            g.certificate.gamma,
            b.len()
        ),
    }
}

/// Checks a certificate given as JSON text, dispatching on its `kind`.
pub fn verify_certificate_text(text: &str, source: &str) -> CliResult<Verdict> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Json {
        path: source.into(),
        source: e,
    })?;
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let verdict = match kind.as_str() {
        "simplex" => {
            let c: SimplexCertificate = parse(v, source)?;
            let r = verify_simplex_certificate(&c)?;
            let detail = match (&r.violated, &r.reason) {
                _ if r.valid => format!(
                    "closed simplex of size {} lies in the interior (supremum {}{})",
                    format_rat(&c.r),
                    format_rat(&c.r_sup),
                    if c.open_supremum {
                        ", not attained"
                    } else {
                        ""
                    }
                ),
                (Some((vx, f)), _) => format!("vertex {vx} violates facet {f}"),
                (None, Some(reason)) => reason.clone(),
                (None, None) => "invalid".into(),
            };
            Verdict {
                kind,
                valid: r.valid,
                detail,
            }
        }
        "packing" => {
            let c: PackingCertificate = parse(v, source)?;
            let r = verify_packing_certificate(&c)?;
            let detail = if r.all_ok() {
                format!(
                    "{} unimodular pieces fill the ambient simplex",
                    c.pieces.len()
                )
            } else {
                format!("failed checks: {r:?}")
            };
            Verdict {
                kind,
                valid: r.all_ok(),
                detail,
            }
        }
        "immersion" => {
            let c: ImmersionCertificate = parse(v, source)?;
            match verify_immersion_certificate(&c) {
                Ok(()) => Verdict {
                    kind,
                    valid: true,
                    detail: format!(
                        "rank {} at all {} sample points",
                        c.expected_rank,
                        c.samples.len()
                    ),
                },
                Err(Error::CertificateInvalid(d)) => Verdict {
                    kind,
                    valid: false,
                    detail: d,
                },
                Err(e) => return Err(e.into()),
            }
        }
        "gamma" => verify_gamma_file(&parse(v, source)?),
        "" => return Err(CliError::Usage(format!("{source}: missing \"kind\""))),
        other => {
            return Err(CliError::Usage(format!(
                "{source}: unknown certificate kind {other:?}"
            )))
        }
    };
    Ok(verdict)
}

pub fn verify_certificate_file(path: &std::path::Path) -> CliResult<Verdict> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    verify_certificate_text(&text, &path.display().to_string())
}
