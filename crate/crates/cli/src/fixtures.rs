//! Golden example inputs compiled into the binary. Any command taking a
//! spec path also accepts `fixture:<name>`.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::variety::VarietySpec;

const FIXTURES: &[(&str, &str)] = &[
    ("elliptic", include_str!("../fixtures/elliptic.json")),
    (
        "elliptic_basis",
        include_str!("../fixtures/elliptic_basis.json"),
    ),
    ("linear", include_str!("../fixtures/linear.json")),
    ("off_variety", include_str!("../fixtures/off_variety.json")),
    (
        "non_generating",
        include_str!("../fixtures/non_generating.json"),
    ),
    (
        "quadric_cone",
        include_str!("../fixtures/quadric_cone.json"),
    ),
    (
        "elliptic_pipeline",
        include_str!("../fixtures/elliptic_pipeline.json"),
    ),
    (
        "non_generating_pipeline",
        include_str!("../fixtures/non_generating_pipeline.json"),
    ),
    (
        "quadric_pipeline",
        include_str!("../fixtures/quadric_pipeline.json"),
    ),
    (
        "elliptic_flow",
        include_str!("../fixtures/elliptic_flow.json"),
    ),
];

pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n)
}

pub fn fixture_text(name: &str) -> CliResult<&'static str> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CliError::Usage(format!("unknown fixture {name:?}")))
}

pub fn fixture_spec(name: &str) -> CliResult<VarietySpec> {
    parse_fixture(name)
}

pub fn parse_fixture<T: serde::de::DeserializeOwned>(name: &str) -> CliResult<T> {
    serde_json::from_str(fixture_text(name)?).map_err(|source| CliError::Json {
        path: format!("fixture:{name}"),
        source,
    })
}

/// Loads a JSON input from a path or a `fixture:` reference.
pub fn load<T: serde::de::DeserializeOwned>(reference: &str) -> CliResult<T> {
    match reference.strip_prefix("fixture:") {
        Some(name) => parse_fixture(name),
        None => crate::io::read_json(Path::new(reference)),
    }
}
