mod config;
mod report;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use config::{preset, ExperimentConfig, MetricChoice, PRESET_NAMES};
use report::write_report;
use runner::Scope;

#[derive(Parser)]
#[command(name = "graphwave", version, about = "Growth checks, cutoff bounds, and wave runs on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graph, write its description, and report a summary.
    Build(CommonArgs),
    /// Run the growth and pointwise checks selected in the config.
    Check(CommonArgs),
    /// Run the wave simulation block only.
    Simulate(CommonArgs),
    /// Verify the cutoff-family bounds selected in the config.
    VerifyBounds(CommonArgs),
    /// Run every selected check plus the simulation block.
    Run(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Build(a)
            | Command::Check(a)
            | Command::Simulate(a)
            | Command::VerifyBounds(a)
            | Command::Run(a) => a,
        }
    }

    fn scope(&self) -> Scope {
        match self {
            Command::Build(_) => Scope::BuildOnly,
            Command::Check(_) => Scope::HypothesisChecks,
            Command::Simulate(_) => Scope::SimulationOnly,
            Command::VerifyBounds(_) => Scope::CutoffChecks,
            Command::Run(_) => Scope::Everything,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Path to a JSON experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset name: example-6.1, example-6.2, example-6.3, finite-7.1.
    #[arg(long)]
    preset: Option<String>,
    /// Directory for report.json, report_meta.json, and series CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's metric: combinatorial, euclidean, or product.
    #[arg(long)]
    metric: Option<String>,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(args: &CommonArgs) -> anyhow::Result<ExperimentConfig> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let parsed: ExperimentConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            parsed
        }
        (None, Some(name)) => preset(name)
            .with_context(|| format!("unknown preset `{name}`; available: {}", PRESET_NAMES.join(", ")))?,
        (None, None) => bail!("pass --config <path> or --preset <name>"),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(metric) = &args.metric {
        config.metric = Some(match metric.as_str() {
            "combinatorial" => MetricChoice::Combinatorial,
            "euclidean" => MetricChoice::Euclidean,
            "product" => MetricChoice::Product,
            other => bail!("flag `--metric`: unknown metric `{other}`"),
        });
    }
    config.validate()?;
    Ok(config)
}

// Argument errors exit 1, not clap's default 2: exit 2 is reserved for a
// failed check verdict.
fn parse_cli() -> Result<Cli, ExitCode> {
    use clap::error::ErrorKind;
    Cli::try_parse().map_err(|err| {
        let code = match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 1,
        };
        let _ = err.print();
        ExitCode::from(code)
    })
}

fn real_main(cli: Cli) -> anyhow::Result<ExitCode> {
    let args = cli.command.args();
    let config = load_config(args)?;
    let seed = args.seed.or(config.seed).unwrap_or(0);

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }

    let scope = cli.command.scope();
    let report = runner::run_experiment(&config, seed, args.out.as_deref(), scope)?;

    if matches!(cli.command, Command::Build(_)) {
        if let Some(dir) = &args.out {
            let ws = runner::build_workspace(&config, seed)?;
            ws.graph.write_description_file(&dir.join("graph.txt"))?;
        }
    }

    if let Some(dir) = &args.out {
        write_report(dir, &report, seed)?;
    }

    let g = &report.graph_summary;
    println!(
        "graph: {} vertices, {} edges, {} clipped, metric {} (max distance {:.6})",
        g.vertices, g.edges, g.clipped, g.metric, g.max_distance
    );
    for check in &report.checks {
        match check.fitted_slope {
            Some(slope) => println!("check {}: {} (fitted slope {:.4})", check.id, check.verdict, slope),
            None => println!("check {}: {}", check.id, check.verdict),
        }
    }
    for sim in &report.simulations {
        let status = serde_json::to_value(&sim.status)?;
        let kind = status["kind"].as_str().unwrap_or("unknown").to_string();
        let clean = if sim.boundary_clean_steps > sim.steps {
            "boundary clean"
        } else {
            "support reached the boundary"
        };
        match sim.blowup_time {
            Some(t) => println!(
                "simulation: {kind} at t = {t:.6} (dt {:.6}, {} steps, {clean})",
                sim.dt, sim.steps
            ),
            None => println!(
                "simulation: {kind} (dt {:.6}, {} steps, final sup {:.6e}, {clean})",
                sim.dt, sim.steps, sim.final_sup_norm
            ),
        }
    }

    if report.all_passed() {
        println!("result: pass");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("result: fail");
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    let cli = match parse_cli() {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match real_main(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
