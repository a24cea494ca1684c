//! Run plumbing: error-to-exit-code mapping, CSV emission with a file
//! inventory, and the manifest every run leaves behind.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use boxcore::BoxError;
use serde::Serialize;

pub const MANIFEST_SCHEMA: &str = "boxctl.run/1";

/// Failures after argument parsing. Input mistakes exit 2 like other usage
/// errors; mathematical and I/O failures exit 3 with a JSON error object.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Num(BoxError),
    Io(std::io::Error),
}

impl From<BoxError> for CliError {
    fn from(err: BoxError) -> Self {
        CliError::Num(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }

    /// Machine-readable form for stderr.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(msg) => ("usage", msg.clone()),
            CliError::Io(err) => ("io", err.to_string()),
            CliError::Num(err) => {
                let kind = match err {
                    BoxError::InvalidParameter(_) => "invalid-parameter",
                    BoxError::DegenerateRanks(_, _) => "degenerate-ranks",
                    BoxError::SolverStalled { .. } => "solver-stalled",
                    BoxError::TailOverflow { .. } => "truncation-overflow",
                    BoxError::ProfileNotPositive { .. } => "profile-not-positive",
                    BoxError::OdeFailure(_) => "ode-failure",
                    BoxError::NoBracket(_) => "no-bracket",
                    BoxError::BreakerNotGeneric { .. } => "breaker-not-generic",
                };
                (kind, err.to_string())
            }
        };
        serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
    }
}

/// Format a float with 17 significant digits, enough for exact f64 round
/// trips and therefore byte-identical reruns.
pub fn csv_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
pub struct FileRecord {
    pub name: String,
    /// Data rows, excluding the header.
    pub rows: usize,
    pub bytes: usize,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub boxctl_threads: Option<usize>,
    pub wall_time_seconds: f64,
    pub warnings: Vec<String>,
    pub results: serde_json::Value,
    pub files: Vec<FileRecord>,
}

/// Accumulates outputs for one run and writes the manifest last.
pub struct RunContext {
    dir: PathBuf,
    command: &'static str,
    config: serde_json::Value,
    pub seed: Option<u64>,
    warnings: Vec<String>,
    files: Vec<FileRecord>,
    started: Instant,
}

impl RunContext {
    pub fn new(
        command: &'static str,
        config: &impl Serialize,
        out_dir: &Path,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)?;
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Usage(format!("config not serializable: {e}")))?;
        Ok(RunContext {
            dir: out_dir.to_path_buf(),
            command,
            config,
            seed: None,
            warnings: Vec::new(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Write one CSV file (header plus data rows) and record it in the
    /// inventory.
    pub fn write_csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = String>,
    {
        let mut content = String::new();
        writeln!(content, "{header}").expect("string write");
        let mut count = 0usize;
        for row in rows {
            writeln!(content, "{row}").expect("string write");
            count += 1;
        }
        fs::write(self.dir.join(name), &content)?;
        self.files.push(FileRecord { name: name.to_string(), rows: count, bytes: content.len() });
        Ok(())
    }

    /// Write an auxiliary JSON file (not the manifest) and record it.
    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut content = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Usage(format!("output not serializable: {e}")))?;
        content.push('\n');
        fs::write(self.dir.join(name), &content)?;
        self.files.push(FileRecord { name: name.to_string(), rows: 0, bytes: content.len() });
        Ok(())
    }

    /// Write manifest.json and finish the run.
    pub fn finish(self, results: serde_json::Value) -> Result<(), CliError> {
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: self.config,
            seed: self.seed,
            boxctl_threads: boxctl_threads(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            warnings: self.warnings,
            results,
            files: self.files,
        };
        let mut content = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Usage(format!("manifest not serializable: {e}")))?;
        content.push('\n');
        fs::write(self.dir.join("manifest.json"), content)?;
        Ok(())
    }
}

/// BOXCTL_THREADS is recorded for reproducibility; the modules currently run
/// single-threaded, so it caps nothing yet.
fn boxctl_threads() -> Option<usize> {
    std::env::var("BOXCTL_THREADS").ok().and_then(|raw| raw.parse().ok())
}
