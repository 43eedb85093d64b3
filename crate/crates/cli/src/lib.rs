//! Batch runner behind the `mdl` binary.

pub mod config;
pub mod experiments;

use std::io::Write;

use config::{ExperimentConfig, Format};
use experiments::Outcome;

/// Write the records in the configured format.
pub fn emit<W: Write>(cfg: &ExperimentConfig, out: &Outcome, mut w: W) -> std::io::Result<()> {
    match cfg.format {
        Format::Csv => mdl_core::record::write_csv(&out.records, w).map_err(std::io::Error::other),
        Format::Json => writeln!(w, "{}", mdl_core::record::to_json(&out.records)),
    }
}
