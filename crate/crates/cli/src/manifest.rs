use std::fs;
use std::path::{Path, PathBuf};

use ophydro::Tolerances;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

/// What a command produced, before anything touches the disk.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub params: Value,
    pub seeds: Vec<u64>,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub summary: Value,
}

impl RunOutput {
    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    pub seeds: Vec<u64>,
    pub version: String,
    pub timestamp: String,
    pub threads: usize,
    pub tolerances: Tolerances,
    pub outputs: Vec<OutputFile>,
    pub summary: Value,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<(RunManifest, PathBuf)> {
        let file = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
        let text = fs::read_to_string(&file).map_err(CliError::io(&file))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, dir))
    }

    /// The recorded arguments with any `--out` removed.
    pub fn argv_without_out(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.argv.len());
        let mut it = self.argv.iter();
        while let Some(a) = it.next() {
            if a == "--out" {
                it.next();
            } else if !a.starts_with("--out=") {
                out.push(a.clone());
            }
        }
        out
    }
}

pub fn write_run(dir: &Path, command: &str, argv: Vec<String>, run: RunOutput) -> CliResult<RunManifest> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    for (name, contents) in &run.files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(CliError::io(&path))?;
    }
    let manifest = RunManifest {
        command: command.to_string(),
        params: run.params,
        argv,
        seeds: run.seeds,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        threads: rayon::current_num_threads(),
        tolerances: Tolerances::DEFAULT,
        outputs: run
            .files
            .iter()
            .map(|(name, c)| OutputFile {
                name: name.clone(),
                bytes: c.len(),
            })
            .collect(),
        summary: run.summary,
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(manifest)
}

/// Names of recorded outputs whose bytes differ between the two runs.
pub fn compare_outputs(original: &RunManifest, original_dir: &Path, replay_dir: &Path) -> CliResult<Vec<String>> {
    let mut differing = Vec::new();
    for f in &original.outputs {
        let a = original_dir.join(&f.name);
        let b = replay_dir.join(&f.name);
        let a = fs::read(&a).map_err(CliError::io(&a))?;
        match fs::read(&b) {
            Ok(b) if b == a => {}
            _ => differing.push(f.name.clone()),
        }
    }
    Ok(differing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_out_flag_in_both_forms() {
        let m = RunManifest {
            command: "spectrum".into(),
            params: Value::Null,
            argv: ["spectrum", "--p", "0.8", "--out", "a", "--L", "4", "--out=b"]
                .map(String::from)
                .to_vec(),
            seeds: vec![],
            version: String::new(),
            timestamp: String::new(),
            threads: 1,
            tolerances: Tolerances::DEFAULT,
            outputs: vec![],
            summary: Value::Null,
        };
        assert_eq!(m.argv_without_out(), ["spectrum", "--p", "0.8", "--L", "4"]);
    }
}
