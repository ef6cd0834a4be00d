use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

/// CSV body of a subcommand together with a JSON summary for the manifest.
pub struct Output {
    pub csv: Vec<u8>,
    pub summary: Value,
    /// Additional files written by the subcommand (e.g. a profile dump).
    pub files: Vec<PathBuf>,
    /// Set when the CSV is still worth writing but the run must exit nonzero.
    pub failure: Option<CliError>,
}

impl Output {
    pub fn new(csv: Vec<u8>, summary: Value) -> Self {
        Self {
            csv,
            summary,
            files: Vec::new(),
            failure: None,
        }
    }
}

pub fn table<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|s| s.as_ref()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub critnls: &'static str,
    pub profile: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub argv: Vec<String>,
    pub seed: u64,
    pub config: &'a RunConfig,
    pub versions: Versions,
    pub threads: usize,
    pub started_unix: f64,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
    pub exit_code: u8,
    pub error: Option<String>,
    pub summary: Value,
}

impl Manifest<'_> {
    pub fn versions() -> Versions {
        Versions {
            critnls: critnls::VERSION,
            profile: if cfg!(debug_assertions) {
                "debug"
            } else {
                "release"
            },
        }
    }
}

/// `trace.csv` → `trace.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Shortest round-trip decimal of a float.
pub fn num(x: f64) -> String {
    format!("{x}")
}
