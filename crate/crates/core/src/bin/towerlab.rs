use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use towerlab::harness::{self, ExperimentKind, Filter, Registry, RunConfig, VerdictFilter};

/// Bubble-tower experiments for the sinh-Poisson equation.
///
/// Every run subcommand reads an optional JSON config, applies flag and
/// `--override key=value` edits, runs, and appends a record to the registry
/// (`$TOWERLAB_REGISTRY`, default `./towerlab-registry`).
///
/// Exit status: 0 when all checks pass, 2 when a scientific check fails,
/// 1 on any execution or configuration error.
#[derive(Parser)]
#[command(name = "towerlab", version)]
struct Cli {
    /// Registry directory; overrides TOWERLAB_REGISTRY.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tower parameters alpha_i, delta_i, d_i and the balance equations.
    #[command(after_help = "CSV columns: lambda,i,alpha,log_delta,d,balance")]
    Params(RunArgs),
    /// Assemble W_lambda and bound the interaction Theta_j on each annulus.
    #[command(after_help = "CSV columns: lambda,j,theta_sup,theta_ratio,boundary_defect")]
    Ansatz(RunArgs),
    /// L^p norms of the residual R and linear error S with slope fits.
    #[command(after_help = "CSV columns: series,p,ln_lambda,ln_norm,ln_reference\n\
        series is R or S; ln_reference is the predicted-slope line through the first point.\n\
        Footer lines `# slope ...` give fitted and predicted exponents.")]
    ResidualScan(RunArgs),
    /// Smallest singular value of the linearized operator per sector.
    #[command(
        after_help = "CSV columns: sector,ln_lambda,sigma_min,scaled,argmin_mode\n\
        scaled = sigma_min * |ln lambda|"
    )]
    LinearSpectrum(RunArgs),
    /// Newton continuation of the tower solution; masses and far field.
    #[command(
        after_help = "CSV columns: lambda,phi_norm,phi_scaled,m_plus,m_minus,ohtsuka_suzuki,farfield_gap,newton_iterations"
    )]
    Solve(RunArgs),
    /// Limit-profile masses, kernel integrals and the stereographic isometry.
    #[command(after_help = "CSV columns: check,alpha,value,expected")]
    LimitChecks(RunArgs),
    /// Collate registry records into CSV tables and a JSON summary.
    #[command(
        after_help = "Writes <kind>.csv per experiment kind (first column: record id) and summary.json."
    )]
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edit a config field, e.g. `k=2` or `domain.radius=2`. Repeatable.
    #[arg(long = "override", short = 'o', value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Sweep start (largest lambda); needs --to and --points.
    #[arg(long, requires_all = ["to", "points"], conflicts_with = "lambda")]
    from: Option<f64>,
    #[arg(long, requires = "from")]
    to: Option<f64>,
    #[arg(long, requires = "from")]
    points: Option<usize>,
    #[arg(long)]
    nodes_per_unit: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the CSV export of this run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full record as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    kind: Option<ExperimentKind>,
    #[arg(long)]
    k: Option<usize>,
    /// `pass` or `fail`.
    #[arg(long)]
    verdict: Option<VerdictFilter>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as a failed check
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let registry = || -> Result<Registry> {
        Ok(match &cli.registry {
            Some(root) => Registry::open(root)?,
            None => Registry::from_env()?,
        })
    };
    let (kind, args) = match &cli.command {
        Command::Params(a) => (ExperimentKind::Params, a),
        Command::Ansatz(a) => (ExperimentKind::Ansatz, a),
        Command::ResidualScan(a) => (ExperimentKind::ResidualScan, a),
        Command::LinearSpectrum(a) => (ExperimentKind::LinearSpectrum, a),
        Command::Solve(a) => (ExperimentKind::Solve, a),
        Command::LimitChecks(a) => (ExperimentKind::LimitChecks, a),
        Command::Report(r) => return report(&registry()?, r),
    };
    let config = load_config(kind, args)?;
    let (record, path) = harness::run(&config, &registry()?)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&record)?);
    } else {
        println!(
            "{} {} -> {}",
            record.kind(),
            record.short_id(),
            path.display()
        );
        for v in &record.verdicts {
            println!("  {}", v.describe());
        }
        println!("{}", if record.passed { "PASS" } else { "FAIL" });
    }
    Ok(record.exit_code() as u8)
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<RunConfig> {
    let (text, origin) = match &args.config {
        Some(path) => (
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
            path.display().to_string(),
        ),
        None => (
            json!({ "kind": kind }).to_string(),
            "<defaults>".to_string(),
        ),
    };
    let mut edits = Vec::new();
    if let Some(k) = args.k {
        edits.push(format!("k={k}"));
    }
    if let Some(l) = args.lambda {
        edits.push(format!("lambda={l:e}"));
    }
    if let (Some(from), Some(to), Some(points)) = (args.from, args.to, args.points) {
        edits.push(format!(
            "sweep={}",
            json!({ "from": from, "to": to, "points": points })
        ));
    }
    if let Some(n) = args.nodes_per_unit {
        edits.push(format!("nodes_per_unit={n}"));
    }
    if let Some(s) = args.seed {
        edits.push(format!("seed={s}"));
    }
    if let Some(dir) = &args.out {
        edits.push(format!("output_dir={}", json!(dir)));
    }
    edits.extend(args.overrides.iter().cloned());
    let config = RunConfig::from_json_with(&text, &edits)
        .with_context(|| format!("invalid config {origin}"))?;
    if config.kind != kind {
        bail!("config {origin} is for `{}`, not `{kind}`", config.kind);
    }
    Ok(config)
}

fn report(registry: &Registry, args: &ReportArgs) -> Result<u8> {
    let filter = Filter {
        kind: args.kind,
        k: args.k,
        verdict: args.verdict,
    };
    let bundle = harness::report(registry, &filter)?;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    let summary = serde_json::to_string_pretty(&bundle.summary)?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for (kind, csv) in &bundle.tables {
                fs::write(dir.join(format!("{kind}.csv")), csv)?;
            }
            fs::write(dir.join("summary.json"), summary)?;
            println!("{} records -> {}", bundle.records.len(), dir.display());
        }
        None => {
            for (kind, csv) in &bundle.tables {
                println!("## {kind}\n{csv}");
            }
            println!("{summary}");
        }
    }
    Ok(0)
}
