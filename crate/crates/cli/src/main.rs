//! `oaxis`: config-driven driver for the condensate squeezing pipelines.
//!
//! Every subcommand selects a run mode; the configuration comes from
//! `--preset` or `--config`, optionally patched with `--set key=value`
//! overrides (dot paths into the JSON document). Failures exit nonzero and
//! print a machine-readable JSON error on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oaxis_core::config::{preset, ExperimentConfig, RunMode};
use oaxis_core::pipeline::run_experiment;

#[derive(Parser)]
#[command(name = "oaxis", version, about = "Spin squeezing in a two-component condensate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset: ci-small or paper-3d
    #[arg(long)]
    preset: Option<String>,
    /// Dot-path override, e.g. --set physics.n_atoms=2e4 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master RNG seed (overrides ensemble.master_seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default ./runs)
    #[arg(long, default_value = "runs")]
    out_dir: PathBuf,
    /// Worker threads for trajectory ensembles
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the mean-field ground state and write it as a snapshot
    Groundstate(Common),
    /// Mean-field pulse-sequence run with scalar time series and snapshots
    Gpe(Common),
    /// Truncated-Wigner ensemble with a readout-angle scan
    Tw(Common),
    /// Closed-form two-mode variance scan
    Twomode(Common),
    /// Twisting-phase estimation by both routes
    LambdaEst(Common),
    /// Parameter sweep (omega_r, theta, n_bounces, n_atoms)
    Sweep(Common),
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "kind": kind, "message": message } })
    );
    ExitCode::FAILURE
}

/// Set a dot-path key inside a JSON document, creating objects on the way.
fn apply_override(doc: &mut serde_json::Value, spec: &str) -> Result<(), String> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| format!("override '{spec}' is not KEY=VALUE"))?;
    let value: serde_json::Value =
        serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.to_string()));
    let mut cursor = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if i == parts.len() - 1 {
            match cursor {
                serde_json::Value::Object(map) => {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                _ => return Err(format!("'{path}' does not address an object field")),
            }
        }
        cursor = match cursor {
            serde_json::Value::Object(map) => map
                .entry(part.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default())),
            _ => return Err(format!("'{path}' does not address an object field")),
        };
    }
    Err(format!("empty override path in '{spec}'"))
}

fn load_config(common: &Common, mode: RunMode) -> Result<ExperimentConfig, (String, String)> {
    let mut doc: serde_json::Value = match (&common.config, &common.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ("io".to_string(), format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| ("config".to_string(), e.to_string()))?
        }
        (None, Some(name)) => {
            let cfg = preset(name).map_err(|e| ("config".to_string(), e.to_string()))?;
            serde_json::to_value(&cfg).map_err(|e| ("config".to_string(), e.to_string()))?
        }
        (None, None) => {
            return Err((
                "config".to_string(),
                "either --config <file> or --preset <name> is required".to_string(),
            ))
        }
    };
    for spec in &common.set {
        apply_override(&mut doc, spec).map_err(|m| ("config".to_string(), m))?;
    }
    doc["mode"] = serde_json::to_value(mode).unwrap();
    if let Some(seed) = common.seed {
        apply_override(&mut doc, &format!("ensemble.master_seed={seed}"))
            .map_err(|m| ("config".to_string(), m))?;
    }
    if let Some(workers) = common.workers {
        apply_override(&mut doc, &format!("ensemble.workers={workers}"))
            .map_err(|m| ("config".to_string(), m))?;
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| ("config".to_string(), e.to_string()))?;
    cfg.validate().map_err(|e| ("config".to_string(), e.to_string()))?;
    Ok(cfg)
}

fn run(common: &Common, mode: RunMode) -> ExitCode {
    let cfg = match load_config(common, mode) {
        Ok(cfg) => cfg,
        Err((kind, message)) => return fail(&kind, message),
    };
    match run_experiment(&cfg, &common.out_dir) {
        Ok(manifest) => {
            println!("{}", serde_json::json!({
                "run_dir": manifest.run_dir,
                "config_hash": manifest.config_hash,
                "files": manifest.files.iter().map(|f| &f.path).collect::<Vec<_>>(),
            }));
            ExitCode::SUCCESS
        }
        Err(e) => fail("run", e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Groundstate(c) => run(c, RunMode::Groundstate),
        Command::Gpe(c) => run(c, RunMode::Gpe),
        Command::Tw(c) => run(c, RunMode::Tw),
        Command::Twomode(c) => run(c, RunMode::Twomode),
        Command::LambdaEst(c) => run(c, RunMode::LambdaEst),
        Command::Sweep(c) => run(c, RunMode::Sweep),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_sets_nested_keys() {
        let mut doc = serde_json::json!({"physics": {"n_atoms": 1.0}});
        apply_override(&mut doc, "physics.n_atoms=2e4").unwrap();
        assert_eq!(doc["physics"]["n_atoms"], serde_json::json!(2e4));
        apply_override(&mut doc, "ensemble.master_seed=7").unwrap();
        assert_eq!(doc["ensemble"]["master_seed"], serde_json::json!(7));
        assert!(apply_override(&mut doc, "nonsense").is_err());
    }
}
