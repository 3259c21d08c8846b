use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::OutArgs;

/// Reals in CSV output: 17 significant digits.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Everything needed to reproduce an output file, plus timing.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Value,
    pub seed: u64,
    pub threads: Option<usize>,
    pub runtime_secs: f64,
    pub summary: Value,
}

impl Manifest {
    pub fn new<C: Serialize>(
        command: &C,
        seed: u64,
        threads: Option<usize>,
        runtime: Duration,
        summary: Value,
    ) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: serde_json::to_value(command).unwrap_or(Value::Null),
            seed,
            threads,
            runtime_secs: runtime.as_secs_f64(),
            summary,
        }
    }
}

/// CSV sink plus where its manifest goes.
pub struct Output {
    csv: csv::Writer<Box<dyn Write>>,
    manifest: Option<PathBuf>,
}

impl Output {
    /// `out_override` replaces the CSV path recorded in `args`.
    pub fn open(args: &OutArgs, out_override: Option<&PathBuf>) -> io::Result<Self> {
        let out = out_override.or(args.out.as_ref());
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let manifest = match (out_override, &args.manifest, out) {
            (Some(path), _, _) => Some(manifest_path(path)),
            (None, Some(m), _) => Some(m.clone()),
            (None, None, Some(path)) => Some(manifest_path(path)),
            (None, None, None) => None,
        };
        Ok(Output {
            csv: csv::Writer::from_writer(sink),
            manifest,
        })
    }

    pub fn header(&mut self, names: &[&str]) -> csv::Result<()> {
        self.csv.write_record(names)
    }

    pub fn row(&mut self, fields: &[String]) -> csv::Result<()> {
        self.csv.write_record(fields)
    }

    /// Flushes the CSV and writes the manifest (to stderr when the CSV went
    /// to stdout and no manifest path was given).
    pub fn finish(mut self, manifest: &Manifest) -> io::Result<()> {
        self.csv.flush()?;
        let text = serde_json::to_string_pretty(manifest)?;
        match &self.manifest {
            Some(path) => std::fs::write(path, text + "\n"),
            None => writeln!(io::stderr(), "{text}"),
        }
    }
}

fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
