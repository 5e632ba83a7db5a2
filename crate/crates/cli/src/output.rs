//! Report writing: a metadata header plus either one JSON document or CSV
//! rows. Output contains no timestamps, so reruns are byte-identical.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    /// One pretty-printed JSON document.
    #[default]
    Json,
    /// `#`-prefixed metadata lines followed by CSV rows.
    Csv,
}

/// Provenance of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    /// Tool name.
    pub tool: &'static str,
    /// Crate version.
    pub version: &'static str,
    /// Subcommand.
    pub command: &'static str,
    /// Seed of the run.
    pub seed: u64,
    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub config_sha256: String,
}

impl Meta {
    pub fn new<C: Serialize>(command: &'static str, seed: u64, config: &C) -> Result<Self, Failure> {
        let canonical = serde_json::to_vec(config).map_err(|e| Failure::Usage(format!("cannot serialise configuration: {e}")))?;
        let digest = Sha256::digest(&canonical);
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self { tool: "multistar", version: env!("CARGO_PKG_VERSION"), command, seed, config_sha256 })
    }
}

#[derive(Serialize)]
struct Document<'a, C: Serialize, R: Serialize> {
    meta: &'a Meta,
    config: &'a C,
    result: &'a R,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("cannot write output: {e}"))
}

/// Write `{meta, config, result}` as JSON, or the metadata and `rows` as CSV.
pub fn emit<C, R, Row>(meta: &Meta, config: &C, result: &R, header: &[&str], rows: &[Row], format: Format, out: Option<&Path>) -> Result<(), Failure>
where
    C: Serialize,
    R: Serialize,
    Row: Serialize,
{
    let mut w = sink(out)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &Document { meta, config, result }).map_err(io_failure)?;
            writeln!(w).map_err(io_failure)?;
        }
        Format::Csv => {
            writeln!(
                w,
                "# tool={} version={} command={} seed={} config_sha256={}",
                meta.tool, meta.version, meta.command, meta.seed, meta.config_sha256
            )
            .map_err(io_failure)?;
            let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(&mut w);
            csv.write_record(header).map_err(io_failure)?;
            for row in rows {
                csv.serialize(row).map_err(io_failure)?;
            }
            csv.flush().map_err(io_failure)?;
        }
    }
    w.flush().map_err(io_failure)
}
