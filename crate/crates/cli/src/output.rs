//! Run bookkeeping shared by the subcommands: output files, the run
//! manifest, error payloads and the stdout/stderr split.

use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use syl_core::SylError;

/// A failed command: exit code plus a machine-readable tag.
#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl CmdError {
    pub fn usage(message: impl Into<String>) -> Self {
        CmdError {
            code: 1,
            kind: "USAGE".into(),
            message: message.into(),
        }
    }

    pub fn numerical(kind: &str, message: impl Into<String>) -> Self {
        CmdError {
            code: 2,
            kind: kind.into(),
            message: message.into(),
        }
    }

    fn payload(&self, command: &str) -> Value {
        json!({
            "command": command,
            "error": self.kind,
            "message": self.message,
            "exit_code": self.code,
        })
    }

    pub fn report(&self, command: &str, json: bool) {
        eprintln!("error [{}]: {}", self.kind, self.message);
        if json {
            println!("{}", self.payload(command));
        }
    }
}

impl From<SylError> for CmdError {
    fn from(e: SylError) -> Self {
        CmdError {
            code: if e.is_numerical() { 2 } else { 1 },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        SylError::from(e).into()
    }
}

#[derive(Serialize)]
struct OutputEntry {
    path: String,
    kind: &'static str,
}

/// Provenance record written next to the outputs of every run.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    version: &'static str,
    timestamp: String,
    config: &'a Value,
    inputs: &'a [String],
    outputs: &'a [OutputEntry],
    threads: usize,
    wall_time_s: f64,
    exit_code: u8,
}

pub struct Run {
    command: &'static str,
    dir: PathBuf,
    json: bool,
    start: Instant,
    config: Value,
    inputs: Vec<String>,
    outputs: Vec<OutputEntry>,
}

impl Run {
    pub fn new(command: &'static str, dir: &Path, json: bool) -> Result<Self, CmdError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CmdError::usage(format!("cannot create output directory {}: {e}", dir.display())))?;
        // an error file left by an earlier run would contradict this run's manifest
        let _ = std::fs::remove_file(dir.join(format!("{command}_error.json")));
        Ok(Run {
            command,
            dir: dir.to_path_buf(),
            json,
            start: Instant::now(),
            config: Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn set_config<T: Serialize>(&mut self, config: &T) {
        self.config = serde_json::to_value(config).unwrap_or(Value::Null);
    }

    pub fn add_input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    /// Creates `name` in the output directory and records it in the manifest.
    pub fn write<F>(&mut self, name: &str, kind: &'static str, body: F) -> Result<PathBuf, CmdError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CmdError>,
    {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        self.outputs.push(OutputEntry {
            path: path.display().to_string(),
            kind,
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, kind: &'static str, value: &T) -> Result<PathBuf, CmdError> {
        self.write(name, kind, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(SylError::from)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// Human summary on stderr; the JSON report on stdout when requested.
    pub fn emit<T: Serialize>(&self, report: &T, human: &str) {
        eprintln!("{human}");
        if self.json {
            match serde_json::to_string(report) {
                Ok(s) => println!("{s}"),
                Err(e) => eprintln!("error: cannot serialise report: {e}"),
            }
        }
    }

    /// Records the error payload (if any), writes the manifest and returns
    /// the exit code.
    pub fn finish(mut self, outcome: Result<(), CmdError>) -> Result<u8, CmdError> {
        let code = match &outcome {
            Ok(()) => 0,
            Err(e) => {
                e.report(self.command, self.json);
                let name = format!("{}_error.json", self.command);
                let payload = e.payload(self.command);
                // the manifest still gets written if the error file cannot be
                if let Err(w) = self.write_json(&name, "error", &payload) {
                    eprintln!("error: {}", w.message);
                }
                e.code
            }
        };
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config: &self.config,
            inputs: &self.inputs,
            outputs: &self.outputs,
            threads: rayon::current_num_threads(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
            exit_code: code,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.command));
        let text = serde_json::to_string_pretty(&manifest).map_err(SylError::from)?;
        std::fs::write(&path, text + "\n")?;
        Ok(code)
    }
}

/// Comma-separated floats, e.g. `0.4,0.2,0.1`.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    match parse_list(s)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(format!("expected two comma-separated numbers, got '{s}'")),
    }
}
