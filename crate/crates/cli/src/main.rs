use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flocklab::config::{parse_config, with_override, ExperimentConfig};
use flocklab::error::FlockError;
use flocklab::run::{check_preset, classify, constants_report, run, RunOutput};
use flocklab::{presets, sweep};

#[derive(Parser)]
#[command(name = "flocklab", version, about = "Euler-alignment flocking and threshold experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a config and write frames and a summary.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Directory for frames.csv and summary.json; the summary goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the threshold report of a hydrodynamic config.
    Classify {
        #[command(flatten)]
        source: Source,
    },
    /// Print every derived constant for the initial data.
    Constants {
        #[command(flatten)]
        source: Source,
    },
    /// Classify (and optionally simulate) a grid over one or two keys.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// `section.key=lo:hi:n` or `section.key=v1,v2,...`; give one or two.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(long)]
        simulate: bool,
        /// Worker threads; defaults to FLOCKLAB_THREADS or 1.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run presets and report every bound check; exits nonzero on any failure.
    Check {
        /// Preset names; all presets when omitted.
        names: Vec<String>,
    },
    /// List preset names.
    Presets,
}

#[derive(Args)]
struct Source {
    /// TOML config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Override `section.key=value` after loading; the value is TOML.
    #[arg(long = "set")]
    overrides: Vec<String>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(p), _) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_config(&text)?
            }
            (None, Some(name)) => presets::preset(name).ok_or_else(|| FlockError::Config {
                path: "run.scenario".into(),
                reason: format!("unknown preset '{name}'"),
            })?,
            (None, None) => bail!("give --config FILE or --preset NAME"),
        };
        for o in &self.overrides {
            let (key, raw) = o.split_once('=').with_context(|| format!("override '{o}' is not key=value"))?;
            let doc: toml::Table = format!("v = {raw}")
                .parse()
                .with_context(|| format!("override value '{raw}' is not TOML"))?;
            cfg = with_override(&cfg, key.trim(), doc["v"].clone())?;
        }
        Ok(cfg)
    }
}

fn write_run(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    out.write_csv(fs::File::create(dir.join("frames.csv"))?)?;
    fs::write(dir.join("summary.json"), out.summary.to_json())?;
    Ok(())
}

fn print_checks(name: &str, out: &RunOutput) {
    for c in &out.summary.bound_checks {
        println!(
            "{} {name}/{}: max violation {:e} (tol {:e}) {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.max_violation,
            c.tolerance,
            c.bound
        );
    }
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Simulate { source, out } => {
            let cfg = source.load()?;
            let result = run(&cfg)?;
            match out {
                Some(dir) => {
                    write_run(&result, &dir)?;
                    print_checks(&cfg.scenario, &result);
                }
                None => println!("{}", result.summary.to_json()),
            }
            if let Some((lo, hi)) = result.summary.blowup {
                log::info!("blow-up bracketed in [{lo}, {hi}]");
            }
            Ok(true)
        }
        Command::Classify { source } => {
            println!("{}", serde_json::to_string_pretty(&classify(&source.load()?)?)?);
            Ok(true)
        }
        Command::Constants { source } => {
            println!("{}", constants_report(&source.load()?)?.to_json());
            Ok(true)
        }
        Command::Sweep {
            source,
            axes,
            simulate,
            threads,
            out,
        } => {
            let cfg = source.load()?;
            let axes = axes
                .iter()
                .map(|a| sweep::parse_axis(a))
                .collect::<flocklab::error::Result<Vec<_>>>()?;
            let threads = match threads {
                Some(t) => t,
                None => std::env::var("FLOCKLAB_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(1),
            };
            let rows = sweep::sweep(&cfg, &axes, simulate, threads)?;
            match out {
                Some(p) => sweep::write_csv(&axes, &rows, fs::File::create(p)?)?,
                None => sweep::write_csv(&axes, &rows, std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Check { names } => {
            let names: Vec<String> = if names.is_empty() {
                presets::NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                names
            };
            let mut ok = true;
            for n in &names {
                let out = check_preset(n)?;
                print_checks(n, &out);
                ok &= out.summary.all_pass();
            }
            Ok(ok)
        }
        Command::Presets => {
            for n in presets::NAMES {
                println!("{n}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
