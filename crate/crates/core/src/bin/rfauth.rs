use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rfauth::harness::{
    export_csv, link_for, population_for, render_report, run_experiment, train_target, ExperimentConfig,
    ExperimentKind,
};
use rfauth::signal::{write_rfsg, CaptureSet};
use rfauth::{Error, Result, Rng};

/// RF-fingerprint authentication testbench and feedback-only impersonation attack.
#[derive(Parser, Debug)]
#[command(name = "rfauth", version)]
struct Cli {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; replaces the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample authorized, outlier and adversary fingerprints.
    GenProfiles,
    /// Train the configured discriminator and save it with a capture of adversary packets.
    TrainAuth,
    /// Run one attack against a freshly trained disc discriminator.
    Attack,
    /// Run snr-sweep, epsilon-sweep, transferability or single.
    Experiment { name: String },
    /// Print the tables for the CSV files in --out.
    Report,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source: e }
}

fn progress(line: &str) {
    eprintln!("{line}");
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Report = cli.command {
        print!("{}", render_report(&cli.out)?);
        return Ok(());
    }
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::ShowConfig => print!("{}", cfg.to_toml_string()?),
        Command::GenProfiles => {
            ensure_dir(&cli.out)?;
            for &seed in &cfg.seeds {
                let pop = population_for(&cfg, seed)?;
                let path = cli.out.join(format!("profiles_seed{seed}.toml"));
                let text = toml::to_string(&pop).map_err(|e| Error::Format(e.to_string()))?;
                std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
                println!("{}", path.display());
            }
        }
        Command::TrainAuth => {
            ensure_dir(&cli.out)?;
            let link = link_for(&cfg, cfg.link.channel.kind, cfg.link.channel.snr_db);
            for &seed in &cfg.seeds {
                let pop = population_for(&cfg, seed)?;
                let variant = cfg.discriminator.variant;
                let (auth, acc) = train_target(&cfg, &pop, &link, variant, 1, seed)?;
                let stem = cli.out.join(format!("auth_{}_seed{seed}", variant.name()));
                auth.save(&stem)?;
                let mut rng = Rng::new(seed);
                let captures = (0..cfg.attack.eval_packets)
                    .map(|_| link.transmit(&link.random_packet(&mut rng)?, &pop.adversary, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let initial = rfauth::authenticator::fooling_rate(&auth, &captures)?;
                let cap = cli.out.join(format!("adversary_seed{seed}.rfsg"));
                write_rfsg(&cap, &CaptureSet::from_signals(&captures)?)?;
                println!(
                    "{}: held-out accuracy {acc:.4}, undistorted adversary fooling rate {initial:.4}",
                    stem.display()
                );
            }
        }
        Command::Attack => {
            cfg.experiment = ExperimentKind::Single;
            let results = run_experiment(&cfg, &mut progress)?;
            for p in export_csv(&results, &cli.out)? {
                println!("{}", p.display());
            }
        }
        Command::Experiment { name } => {
            cfg.experiment = ExperimentKind::parse(name)?;
            let results = run_experiment(&cfg, &mut progress)?;
            for p in export_csv(&results, &cli.out)? {
                println!("{}", p.display());
            }
        }
        Command::Report => unreachable!(),
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("error kind=usage: {}", one_line(&first));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={}: {}", e.kind(), one_line(&e.to_string()));
            match e {
                Error::Config { .. } | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
