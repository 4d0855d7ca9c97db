// SPDX-License-Identifier: Apache-2.0
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::Value;

use tfsr_cli::config::{apply_override, defaults, merge, resolve};
use tfsr_cli::{run, CliError, Mode, Options};

/// Time-frequency super-resolution simulator.
///
/// Settings are read from a JSON config merged over built-in defaults, then
/// patched by flags and by any number of `--key.path=value` overrides, e.g.
/// `--params.calibration.v_minus=0.99`. Each run writes `<mode>.csv` and
/// `manifest.json` to the output directory.
#[derive(Debug, Parser)]
#[command(name = "tfsr", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Print the norm of every intermediate field of the pipeline.
    #[arg(long)]
    verbose_stages: bool,
}

fn is_override(arg: &str) -> bool {
    arg.strip_prefix("--")
        .and_then(|rest| rest.split_once('='))
        .is_some_and(|(key, _)| key.contains('.'))
}

fn threads_from_env() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TFSR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "TFSR_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn real_main() -> Result<(), CliError> {
    let (overrides, args): (Vec<String>, Vec<String>) =
        std::env::args().partition(|a| is_override(a));
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default();
            return Err(CliError::Config(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    let level = if cli.verbose_stages { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    threads_from_env()?;

    let mut tree = defaults();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut tree, &file, "")?;
    }
    if let Some(mode) = cli.mode {
        apply_override(&mut tree, &format!("mode=\"{mode}\""))?;
    }
    if let Some(seed) = cli.seed {
        apply_override(&mut tree, &format!("seed={seed}"))?;
    }
    if let Some(out) = &cli.out {
        tree["output_path"] = Value::String(out.display().to_string());
    }
    for o in &overrides {
        apply_override(&mut tree, &o[2..])?;
    }
    let cfg = resolve(tree)?;
    log::info!(
        "mode {} seed {} -> {}",
        cfg.mode,
        cfg.seed,
        cfg.output_path.display()
    );
    let summary = run(
        &cfg,
        &Options {
            verbose_stages: cli.verbose_stages,
        },
    )?;
    println!("{}", summary.csv.display());
    println!("{}", summary.manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
