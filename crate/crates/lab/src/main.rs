use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shockstab::bundle::write_bundle;
use shockstab::experiment::{check, run_all, LabError, PointOutcome};
use shockstab::presets::{self, PRESETS};
use shockstab::{ConfigError, ExperimentConfig, Mode};

/// Linear stability lab for captured normal shocks.
#[derive(Parser, Debug)]
#[command(name = "shockstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Named preset applied on top of the defaults.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Config file applied after the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `key=value` override applied after the config file; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Perturbation seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the output bundle.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectrum of the stability matrix.
    Analyze,
    /// Nonlinear march of a perturbed base flow.
    March,
    /// Spectral growth rate against the marched one.
    Validate,
    /// Every point of the configured sweep axes, in the configured mode.
    Sweep,
    /// List the presets.
    Presets,
    /// Print the resolved configuration.
    Config,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &cli.preset {
        Some(name) => presets::load(name)?,
        None => ExperimentConfig::default(),
    };
    if let Some(path) = &cli.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: kv.clone(),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    match cli.command {
        Command::Analyze => cfg.run.mode = Mode::Analyze,
        Command::March => cfg.run.mode = Mode::March,
        Command::Validate => cfg.run.mode = Mode::Validate,
        Command::Sweep if cfg.run.mode == Mode::Sweep => cfg.run.mode = Mode::Analyze,
        _ => {}
    }
    Ok(cfg)
}

fn report(o: &PointOutcome) -> String {
    let s = &o.summary;
    let mut line: Vec<String> = s
        .axes
        .iter()
        .map(|a| format!("{}={}", a.key, a.value))
        .collect();
    if line.is_empty() {
        line.push(format!("{} M0={} eps={}", s.scheme, s.mach, s.epsilon));
    }
    if let Some(a) = &s.analysis {
        line.push(format!(
            "max_re={:.6e} im={:.4} norm={:.5} {:?} sinc={:.5} argmax={}",
            a.max_real,
            a.leading_im,
            a.normalized_max_real,
            a.verdict,
            a.entropy_increase,
            a.argmax_column
        ));
    }
    if let Some(m) = &s.march {
        match m.lambda_num {
            Some(l) => line.push(format!("lambda_num={l:.6e}")),
            None => line.push("lambda_num=none".to_string()),
        }
        if let Some(t) = m.collapse {
            line.push(format!("collapse={t:.3}"));
        }
    }
    if let Some(v) = &s.validation {
        line.push(format!(
            "gap={} {:?}",
            v.gap.map(|g| format!("{g:.4}")).unwrap_or("-".into()),
            v.agreement
        ));
    }
    if let Some(e) = &s.error {
        line.push(format!("error: {e}"));
    }
    line.join("  ")
}

fn run(cli: &Cli) -> Result<(), LabError> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::Presets => {
            for p in PRESETS {
                println!("{:<18} {}", p.name, p.about);
            }
            return Ok(());
        }
        Command::Config => {
            print!("{}", cfg.to_text());
            return Ok(());
        }
        _ => {}
    }
    check(&cfg)?;
    let outcomes = run_all(&cfg);
    for o in &outcomes {
        println!("{}", report(o));
    }
    if let Some(dir) = &cli.out {
        write_bundle(dir, &cfg, &outcomes)?;
    }
    if cfg.sweep.is_empty() {
        if let Some(e) = outcomes.first().and_then(|o| o.summary.error.clone()) {
            return Err(LabError::Point(e));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shockstab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
