//! Run records: a plain-text audit trail written next to each command's
//! outputs, capturing the command name, every resolved configuration value
//! (including defaulted flags), CRC-32 digests of the inputs, the produced
//! files, wall-clock timings, and solver/optimizer report fields.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{CliError, Result};

/// Accumulates one command's audit information, then serializes it.
#[derive(Debug, Clone)]
pub struct RunRecord {
    command: String,
    config: Vec<(String, String)>,
    inputs: Vec<(PathBuf, u32)>,
    outputs: Vec<PathBuf>,
    timings: Vec<(String, Duration)>,
    report: Vec<String>,
}

impl RunRecord {
    /// Starts an empty record for `command`.
    pub fn new(command: &str) -> Self {
        RunRecord {
            command: command.to_string(),
            config: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            report: Vec::new(),
        }
    }

    /// Records one resolved configuration value.
    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    /// Digests an input file (CRC-32 of its raw bytes) into the record.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push((path.to_path_buf(), crc32fast::hash(&bytes)));
        Ok(())
    }

    /// Names an output file produced by the command.
    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Records a labelled wall-clock duration.
    pub fn timing(&mut self, label: &str, elapsed: Duration) {
        self.timings.push((label.to_string(), elapsed));
    }

    /// Appends one free-form report line (solver/optimizer summaries).
    pub fn report_line(&mut self, line: impl Into<String>) {
        self.report.push(line.into());
    }

    /// Serializes the record as text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        if !self.config.is_empty() {
            let _ = writeln!(out, "\n[config]");
            for (k, v) in &self.config {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        if !self.inputs.is_empty() {
            let _ = writeln!(out, "\n[inputs]");
            for (path, crc) in &self.inputs {
                let _ = writeln!(out, "{} crc32=0x{crc:08x}", path.display());
            }
        }
        if !self.outputs.is_empty() {
            let _ = writeln!(out, "\n[outputs]");
            for path in &self.outputs {
                let _ = writeln!(out, "{}", path.display());
            }
        }
        if !self.timings.is_empty() {
            let _ = writeln!(out, "\n[timings]");
            for (label, d) in &self.timings {
                let _ = writeln!(out, "{label} = {:.3} ms", d.as_secs_f64() * 1e3);
            }
        }
        if !self.report.is_empty() {
            let _ = writeln!(out, "\n[report]");
            for line in &self.report {
                let _ = writeln!(out, "{line}");
            }
        }
        out
    }

    /// Writes the rendered record to `path`.
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}

/// Tracks files written by a command so a failure part-way through leaves
/// nothing behind: on drop, any registered file is deleted unless the set
/// was committed.
#[derive(Debug, Default)]
pub struct OutputSet {
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    /// Starts an empty, armed set.
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a file that now exists on disk.
    pub fn track(&mut self, path: &Path) {
        self.written.push(path.to_path_buf());
    }

    /// Declares the command successful; the files stay.
    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}
