//! Library side of the `okbody` command-line tool: variety specs, golden
//! fixtures, the end-to-end pipeline and certificate re-verification.

pub mod certs;
pub mod commands;
pub mod error;
pub mod fixtures;
pub mod flowbatch;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod svg;
pub mod variety;

pub use error::{CliError, CliResult};
pub use oracle::bk_oracle_curve;
pub use pipeline::{run_pipeline, PipelineConfig, PipelineReport};
pub use variety::{SeriesBundle, VarietySpec};
