use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use corrupt_bandits::bounds::{finite_time_ub_klucb, identifiability_check, lower_bound, randomized_response_ub};
use corrupt_bandits::harness::{
    emit_csv, emit_metadata, metadata_path, preset, run_epsilon_sweep, run_experiment, sweep_csv_path, ConfigFile,
    RunOptions, DEFAULT_EPSILONS, PRESET_NAMES,
};
use corrupt_bandits::Result;

/// Regret experiments for bandits with corrupted feedback.
#[derive(Debug, Parser)]
#[command(name = "corrupt-bandits", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every policy on a scenario and write the regret CSV.
    Run(ExperimentArgs),
    /// Run the scenario under a range of LDP privacy levels, one CSV per level.
    SweepEpsilon(ExperimentArgs),
    /// Print the lower and upper regret bounds of a scenario.
    Bounds(ExperimentArgs),
    /// List the built-in scenarios.
    Presets,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Reward means, comma separated.
    #[arg(long, value_delimiter = ',')]
    means: Option<Vec<f64>>,
    /// Per-arm `p00:p11` pairs, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    schemes: Option<Vec<[f64; 2]>>,
    /// Policy tags, comma separated (e.g. klucb-cf,ts-cf,wrapper:klucb).
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// Privacy levels for `sweep-epsilon`, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> std::result::Result<[f64; 2], String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected p00:p11, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok([p(a)?, p(b)?])
}

impl ExperimentArgs {
    fn resolve(self) -> Result<ConfigFile> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(file.overridden_by(ConfigFile {
            preset: self.preset,
            means: self.means,
            schemes: self.schemes,
            policies: self.policies,
            horizon: self.horizon,
            reps: self.reps,
            seed: self.seed,
            checkpoints: self.checkpoints,
            eps: self.eps,
            out: self.out,
        }))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let file = args.resolve()?;
            let config = file.experiment()?;
            let out = file.out.clone().unwrap_or_else(|| PathBuf::from("results.csv"));
            let result = run_experiment(&config, &RunOptions::from_env()?)?;
            emit_csv(&result.traces, &out)?;
            emit_metadata(&metadata_path(&out), &config, None, &result.notes)?;
            println!("wrote {}", out.display());
        }
        Command::SweepEpsilon(args) => {
            let file = args.resolve()?;
            let config = file.experiment()?;
            let base = file.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
            let epsilons = config
                .epsilon_sweep
                .clone()
                .unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
            for (eps, result) in run_epsilon_sweep(&config, &epsilons, &RunOptions::from_env()?)? {
                let out = sweep_csv_path(&base, eps);
                emit_csv(&result.traces, &out)?;
                emit_metadata(&metadata_path(&out), &config, Some(eps), &result.notes)?;
                println!("wrote {}", out.display());
            }
        }
        Command::Bounds(args) => {
            let file = args.resolve()?;
            let scenario = file.scenario()?;
            let model = scenario.model()?;
            let report = lower_bound(&model);
            println!("scenario: {}", scenario.name);
            for (arm, term) in report.per_arm_terms.iter().enumerate() {
                println!("  arm {arm}: lower-bound coefficient {term:.6}");
            }
            for (arm, d) in identifiability_check(&model) {
                println!("  arm {arm}: not identifiable (divergence {d:.3e})");
            }
            println!("lower bound coefficient: {:.6}", report.total_coefficient);
            let horizon = file
                .horizon
                .or_else(|| file.preset.as_deref().and_then(|p| preset(p).ok()).map(|p| p.horizon));
            if let Some(t) = horizon {
                println!("T = {t}");
                println!("  lower bound:                {:.6}", report.value_at(t));
                println!("  randomized-response bound:  {:.6}", randomized_response_ub(&model, t));
                match finite_time_ub_klucb(&model, t) {
                    Ok(ub) => println!("  kl-UCB-CF finite-time bound: {ub:.6}"),
                    Err(e) => println!("  kl-UCB-CF finite-time bound: unavailable ({e})"),
                }
            }
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                let p = preset(name)?;
                let schemes: Vec<String> = p
                    .scenario
                    .schemes
                    .iter()
                    .map(|s| format!("{}:{}", s.p00(), s.p11()))
                    .collect();
                println!(
                    "{name}: means {:?} schemes [{}]",
                    p.scenario.reward_means,
                    schemes.join(", ")
                );
            }
        }
    }
    Ok(())
}
