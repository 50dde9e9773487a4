use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use orbitcache::constellation::Metric;
use orbitcache::par;
use orbitcache::placement::Algorithm;
use orbitcache::scenario::{self, Overrides, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "orbitcache", version, about = "Content replica placement for satellite networks")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm and write the result bundle.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset, e.g. `mtls,mtols,pch`.
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        #[arg(long)]
        metric: Option<Metric>,
    },
    /// Write the demand of a config as users.csv, catalog.csv and trace.csv.
    GenDemand {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print shell periods and per-slot link and visibility counts.
    InspectConstellation {
        #[command(flatten)]
        common: Common,
        /// Write shells.csv and coverage.csv here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Join the summaries of several result bundles into one table.
    Compare {
        #[arg(required = true)]
        bundles: Vec<PathBuf>,
        /// CSV file to write; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self, overrides: Overrides) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::load(&self.config).with_context(|| format!("loading {}", self.config.display()))?;
        cfg.apply(&Overrides {
            seed: self.seed,
            threads: self.threads,
            ..overrides
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Run {
            common,
            out,
            algorithms,
            metric,
        } => {
            let cfg = common.load(Overrides {
                algorithms,
                metric,
                ..Overrides::default()
            })?;
            let summary = par::with_threads(cfg.threads, || -> Result<_> {
                let scenario = Scenario::build(cfg)?;
                Ok(scenario.run(&out)?)
            })?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{:<14} {:>8} {:>14} {:>14} {:>14} {:>14}", "algorithm", "status", "query", "replication", "storage", "total")?;
            for r in &summary.rows {
                writeln!(
                    stdout,
                    "{:<14} {:>8} {:>14.2} {:>14.2} {:>14.2} {:>14.2}",
                    r.algorithm, r.status, r.query, r.replication, r.storage, r.total
                )?;
            }
            writeln!(stdout, "results written to {}", out.display())?;
            if summary.rows.iter().any(|r| r.status != "ok") {
                bail!("some algorithms failed; see {}", out.join("metadata.json").display());
            }
        }
        Command::GenDemand { common, out } => {
            let cfg = common.load(Overrides::default())?;
            for p in scenario::generate_demand(&cfg, &out)? {
                println!("{}", p.display());
            }
        }
        Command::InspectConstellation { common, out } => {
            let cfg = common.load(Overrides::default())?;
            let report = par::with_threads(cfg.threads, || scenario::inspect(&cfg))?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                    let shells = std::fs::File::create(dir.join("shells.csv"))?;
                    let coverage = std::fs::File::create(dir.join("coverage.csv"))?;
                    scenario::write_inspection(&report, shells, coverage)?;
                }
                None => {
                    let (mut shells, mut coverage) = (Vec::new(), Vec::new());
                    scenario::write_inspection(&report, &mut shells, &mut coverage)?;
                    let mut stdout = std::io::stdout().lock();
                    stdout.write_all(&shells)?;
                    writeln!(stdout)?;
                    stdout.write_all(&coverage)?;
                }
            }
        }
        Command::Compare { bundles, out } => {
            let rows = scenario::compare(&bundles)?;
            match out {
                Some(path) => scenario::write_compare(&rows, std::fs::File::create(&path)?)?,
                None => scenario::write_compare(&rows, std::io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
