use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hapsnet::channel::ChannelScenario;
use hapsnet::config::{load_config, RunConfig, TimelineKind, CONFIG_ENV_VAR, DEFAULT_CONFIG_JSON};
use hapsnet::coverage::run_coverage;
use hapsnet::disaster::{resilience_metrics, run_timeline, Methodology};
use hapsnet::output::{emit_coverage, emit_timeline, CoverageSummary, TimelineSummary};
use hapsnet::{Band, Result};

#[derive(Parser)]
#[command(
    name = "hapsnet",
    version,
    about = "HAPS-assisted disaster network co-simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Received-power CDF of HAPS-RAN coverage over the region
    Coverage(RunArgs),
    /// Pre-disaster timeline (sleep/offload methodology)
    Predisaster(RunArgs),
    /// Disaster timeline (default: the turkiye-2023 reference scenario)
    Disaster(RunArgs),
    /// Check a configuration file and exit
    Validate(ConfigArgs),
    /// Print the shipped default configuration
    Defaults,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration overrides (JSON); defaults to $HAPSNET_CONFIG
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of users (coverage)
    #[arg(long)]
    users: Option<usize>,
    /// Number of HAPS
    #[arg(long)]
    haps: Option<usize>,
    #[arg(long, value_parser = parse_band)]
    band: Option<Band>,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<ChannelScenario>,
    /// Site policy for timeline runs
    #[arg(long, value_parser = parse_methodology)]
    methodology: Option<Methodology>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_band(s: &str) -> std::result::Result<Band, String> {
    s.parse()
}

fn parse_scenario(s: &str) -> std::result::Result<ChannelScenario, String> {
    s.parse()
}

fn parse_methodology(s: &str) -> std::result::Result<Methodology, String> {
    s.parse()
}

fn load(args: &ConfigArgs) -> Result<RunConfig> {
    let path = args
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from));
    match path {
        Some(p) => load_config(p),
        None => Ok(RunConfig::defaults()),
    }
}

fn apply_overrides(
    config: &mut RunConfig,
    args: &RunArgs,
    timeline: Option<TimelineKind>,
) -> Result<()> {
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    match timeline {
        None => {
            if let Some(n) = args.users {
                config.coverage.n_users = n;
            }
            if let Some(k) = args.haps {
                config.coverage.haps_count = k;
            }
            if let Some(b) = args.band {
                config.coverage.band = b;
            }
            if let Some(s) = args.scenario {
                config.coverage.scenario = s;
            }
        }
        Some(kind) => {
            if let Some(n) = args.users {
                config.network.total_users = n as u64;
            }
            let section = config.section_mut(kind);
            if let Some(k) = args.haps {
                section.haps_count = k;
            }
            if let Some(m) = args.methodology {
                section.methodology = m;
            }
        }
    }
    config.validate()
}

fn run_coverage_cmd(args: &RunArgs) -> Result<()> {
    let mut config = load(&args.config)?;
    apply_overrides(&mut config, args, None)?;
    let cov = config.coverage_config()?;
    let result = run_coverage(&cov)?;
    emit_coverage(&cov, &result, &args.out)?;
    println!("{}", CoverageSummary::new(&cov, &result).line());
    Ok(())
}

fn run_timeline_cmd(args: &RunArgs, kind: TimelineKind) -> Result<()> {
    let mut config = load(&args.config)?;
    apply_overrides(&mut config, args, Some(kind))?;
    let setup = config.timeline_setup(kind)?;
    let result = run_timeline(setup.sites, setup.haps, &setup.events, &setup.config)?;
    let summary = TimelineSummary {
        scenario: setup.name,
        methodology: setup.config.methodology.to_string(),
        n_sites: result.n_sites,
        metrics: resilience_metrics(&result)?,
    };
    emit_timeline(&result, &summary, &args.out)?;
    println!("{}", summary.line());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coverage(args) => run_coverage_cmd(&args),
        Command::Predisaster(args) => run_timeline_cmd(&args, TimelineKind::PreDisaster),
        Command::Disaster(args) => run_timeline_cmd(&args, TimelineKind::Disaster),
        Command::Validate(args) => {
            load(&args)?;
            println!("configuration ok");
            Ok(())
        }
        Command::Defaults => {
            print!("{DEFAULT_CONFIG_JSON}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
