mod args;
mod commands;
mod error;
mod manifest;
mod svg;

use std::path::{Path, PathBuf};

use clap::Parser;

use args::{Cli, Command, ReplayArgs};
use error::{CliError, CliResult};
use manifest::{compare_outputs, write_run, RunManifest, RunOutput};

const THREADS_VAR: &str = "OPHYDRO_THREADS";

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let code = match run(cli.command, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn run(command: Command, argv: Vec<String>) -> CliResult<()> {
    configure_threads()?;
    if let Command::Replay(r) = &command {
        return replay(r);
    }
    let dir = out_dir(&command);
    let output = execute(&command)?;
    let m = write_run(&dir, command.name(), argv, output)?;
    println!("{}", serde_json::to_string_pretty(&m.summary).expect("summary serializes"));
    println!("wrote {} files to {}", m.outputs.len() + 1, dir.display());
    Ok(())
}

fn out_dir(command: &Command) -> PathBuf {
    let out = match command {
        Command::Spectrum(a) => &a.output.out,
        Command::Autocorr(a) => &a.output.out,
        Command::ScanGamma(a) => &a.output.out,
        Command::Counterexample(a) => &a.output.out,
        Command::RucCompare(a) => &a.output.out,
        Command::Replay(a) => &a.out,
    };
    out.clone().unwrap_or_else(|| Path::new("runs").join(command.name()))
}

fn execute(command: &Command) -> CliResult<RunOutput> {
    match command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Autocorr(a) => commands::autocorr(a),
        Command::ScanGamma(a) => commands::scan_gamma(a),
        Command::Counterexample(a) => commands::counterexample(a),
        Command::RucCompare(a) => commands::ruc_compare(a),
        Command::Replay(_) => Err(CliError::Validation("a replay cannot replay itself".into())),
    }
}

fn replay(r: &ReplayArgs) -> CliResult<()> {
    let (original, original_dir) = RunManifest::load(&r.manifest)?;
    let out = r.out.clone().unwrap_or_else(|| {
        let mut name = original_dir.file_name().unwrap_or_default().to_os_string();
        name.push("-replay");
        original_dir.with_file_name(name)
    });
    let mut argv = original.argv_without_out();
    let cli = Cli::try_parse_from(std::iter::once("ophydro".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Validation(format!("recorded arguments no longer parse: {e}")))?;
    if cli.command.name() != original.command {
        return Err(CliError::Validation(format!(
            "manifest command `{}` does not match its arguments",
            original.command
        )));
    }
    argv.extend(["--out".to_string(), out.display().to_string()]);
    let output = execute(&cli.command)?;
    write_run(&out, cli.command.name(), argv, output)?;
    let differing = compare_outputs(&original, &original_dir, &out)?;
    if !differing.is_empty() {
        return Err(CliError::Replay(differing.join(", ")));
    }
    println!("replayed {} outputs identically into {}", original.outputs.len(), out.display());
    Ok(())
}
