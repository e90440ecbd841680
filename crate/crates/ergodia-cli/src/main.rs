use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ergodia::CrossDist;
use ergodia_cli::runner::{execute, Artifact, RunError};
use ergodia_cli::spec::{
    validate, AlignmentParams, BoundsParams, ClassifyParams, CommandSpec, CountParams,
    ExperimentSpec, InseparabilityParams, OutputFormat, OutputSpec, ScalingParams,
    SeparabilityParams,
};

const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Reproducible experiments on K-user ergodic fading interference
/// networks: alignment simulation, bottleneck-state classification,
/// capacity bounds and dense-network scaling sweeps.
#[derive(Parser)]
#[command(name = "ergodia", version, about)]
struct Cli {
    /// Run an experiment described by a JSON ExperimentSpec file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,

    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Write the artifact here instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<String>,

    /// Artifact format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(clap::ValueEnum, Clone, Copy, PartialEq, Eq)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo of ergodic interference alignment.
    SimulateAlignment {
        /// Number of users.
        #[arg(long = "K")]
        k: usize,
        /// Direct-link SNR (linear power ratio).
        #[arg(long)]
        snr: f64,
        /// Phase quantization bins (even).
        #[arg(long)]
        bins: u32,
        /// Channel uses per trial.
        #[arg(long)]
        uses: u64,
        /// Independent trials.
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Pair each state with its exact complement instead of quantized
        /// matching.
        #[arg(long)]
        exact: bool,
        /// Cross-strength distribution: constant:X | uniform:A,B |
        /// pointmass:V1@W1,V2@W2,... Defaults to constant:SNR.
        #[arg(long, value_parser = parse_cross)]
        cross: Option<CrossDist>,
        /// RNG seed (falls back to ERGODIA_SEED).
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classify a set of directed bottleneck links.
    ClassifyBottleneck {
        #[arg(long = "K")]
        k: usize,
        /// Directed links r:t, comma separated (e.g. 1:2,2:3).
        #[arg(long, value_parser = parse_links)]
        links: Links,
        #[arg(long, value_name = "PATH")]
        output: Option<String>,
    },
    /// Number of distinct minimal bottleneck states (even K).
    CountMinimal {
        #[arg(long = "K")]
        k: usize,
        #[arg(long, value_name = "PATH")]
        output: Option<String>,
    },
    /// Closed-form capacity bounds plus the LP outer bound.
    Bounds {
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        snr: f64,
        /// Pair-bound relaxation.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Bottleneck links r:t, comma separated.
        #[arg(long, value_parser = parse_links)]
        links: Option<Links>,
        #[arg(long, value_name = "PATH")]
        output: Option<String>,
    },
    /// Dense-network sweep of the per-user capacity gap.
    Scaling {
        /// Network sizes, comma separated (e.g. 10,20,40,80).
        #[arg(long = "Ks", value_parser = parse_ks)]
        ks: Ks,
        #[arg(long)]
        snr: f64,
        #[arg(long)]
        eps: f64,
        /// Cross-strength distribution (see simulate-alignment).
        #[arg(long, value_parser = parse_cross)]
        cross: CrossDist,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write one row per (K, trial) here.
        #[arg(long, value_name = "PATH")]
        trial_output: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parallel minimal-bottleneck states: separate vs joint coding rates.
    SeparabilityDemo {
        #[arg(long)]
        snr: f64,
        /// Strength of the strong cross link in the first state.
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_name = "PATH")]
        output: Option<String>,
    },
    /// Two complementary parallel states: separate vs joint coding rates.
    InseparabilityDemo {
        #[arg(long)]
        snr: f64,
        #[arg(long, value_name = "PATH")]
        output: Option<String>,
    },
}

#[derive(Clone)]
struct Links(Vec<(usize, usize)>);

#[derive(Clone)]
struct Ks(Vec<usize>);

fn parse_links(raw: &str) -> Result<Links, String> {
    let mut links = Vec::new();
    for part in raw.split(',').filter(|p| !p.is_empty()) {
        let (r, t) = part
            .split_once(':')
            .ok_or_else(|| format!("link '{part}' must look like r:t"))?;
        let r = r.trim().parse::<usize>().map_err(|e| format!("link '{part}': {e}"))?;
        let t = t.trim().parse::<usize>().map_err(|e| format!("link '{part}': {e}"))?;
        links.push((r, t));
    }
    Ok(Links(links))
}

fn parse_ks(raw: &str) -> Result<Ks, String> {
    raw.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("K '{p}': {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(Ks)
}

fn parse_cross(raw: &str) -> Result<CrossDist, String> {
    let (kind, params) = raw
        .split_once(':')
        .ok_or_else(|| "cross distribution must look like kind:params".to_string())?;
    let dist = match kind {
        "constant" => CrossDist::constant(
            params.parse::<f64>().map_err(|e| format!("constant value: {e}"))?,
        ),
        "uniform" => {
            let (a, b) = params
                .split_once(',')
                .ok_or_else(|| "uniform needs low,high".to_string())?;
            CrossDist::uniform(
                a.trim().parse().map_err(|e| format!("uniform low: {e}"))?,
                b.trim().parse().map_err(|e| format!("uniform high: {e}"))?,
            )
        }
        "pointmass" => {
            let mut values = Vec::new();
            let mut weights = Vec::new();
            for entry in params.split(',').filter(|p| !p.is_empty()) {
                let (v, w) = entry
                    .split_once('@')
                    .ok_or_else(|| format!("point mass '{entry}' must look like value@weight"))?;
                values.push(v.trim().parse().map_err(|e| format!("value '{v}': {e}"))?);
                weights.push(w.trim().parse().map_err(|e| format!("weight '{w}': {e}"))?);
            }
            CrossDist::point_mass(values, weights)
        }
        other => return Err(format!("unknown cross distribution kind '{other}'")),
    };
    dist.validate().map_err(|e| e.to_string())?;
    Ok(dist)
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var("ERGODIA_SEED") {
        Ok(raw) => raw
            .parse::<u64>()
            .map(Some)
            .map_err(|e| format!("ERGODIA_SEED must be a 64-bit unsigned integer: {e}")),
        Err(_) => Ok(None),
    }
}

/// Builds the spec plus whether the command prints only its short stdout
/// line by default (classification and counting).
fn build_spec(command: Command) -> (ExperimentSpec, bool) {
    match command {
        Command::SimulateAlignment { k, snr, bins, uses, trials, exact, cross, seed, output } => (
            ExperimentSpec {
                command: CommandSpec::SimulateAlignment(AlignmentParams {
                    k,
                    snr,
                    phase_bins: bins,
                    uses,
                    trials,
                    exact,
                    cross_dist: cross,
                }),
                output: OutputSpec { path: output.output, format: output.format.into() },
                seed,
            },
            false,
        ),
        Command::ClassifyBottleneck { k, links, output } => (
            ExperimentSpec {
                command: CommandSpec::ClassifyBottleneck(ClassifyParams { k, links: links.0 }),
                output: OutputSpec { path: output, format: OutputFormat::Json },
                seed: None,
            },
            true,
        ),
        Command::CountMinimal { k, output } => (
            ExperimentSpec {
                command: CommandSpec::CountMinimal(CountParams { k }),
                output: OutputSpec { path: output, format: OutputFormat::Json },
                seed: None,
            },
            true,
        ),
        Command::Bounds { k, snr, eps, links, output } => (
            ExperimentSpec {
                command: CommandSpec::Bounds(BoundsParams {
                    k,
                    snr,
                    eps,
                    links: links.map(|l| l.0).unwrap_or_default(),
                }),
                output: OutputSpec { path: output, format: OutputFormat::Json },
                seed: None,
            },
            false,
        ),
        Command::Scaling { ks, snr, eps, cross, trials, seed, trial_output, output } => (
            ExperimentSpec {
                command: CommandSpec::Scaling(ScalingParams {
                    ks: ks.0,
                    snr,
                    eps,
                    cross_dist: cross,
                    trials,
                    trial_output: trial_output.map(|path| OutputSpec {
                        path: Some(path),
                        format: OutputFormat::Csv,
                    }),
                }),
                output: OutputSpec { path: output.output, format: output.format.into() },
                seed,
            },
            false,
        ),
        Command::SeparabilityDemo { snr, alpha, output } => (
            ExperimentSpec {
                command: CommandSpec::SeparabilityDemo(SeparabilityParams { snr, alpha }),
                output: OutputSpec { path: output, format: OutputFormat::Json },
                seed: None,
            },
            false,
        ),
        Command::InseparabilityDemo { snr, output } => (
            ExperimentSpec {
                command: CommandSpec::InseparabilityDemo(InseparabilityParams { snr }),
                output: OutputSpec { path: output, format: OutputFormat::Json },
                seed: None,
            },
            false,
        ),
    }
}

/// Full-payload write with no partial files: write a sibling temp file,
/// then rename over the target.
fn write_artifact(artifact: &Artifact) -> Result<(), String> {
    match &artifact.output.path {
        Some(path) => {
            let target = Path::new(path);
            let mut tmp = target.as_os_str().to_owned();
            tmp.push(".tmp");
            let tmp = Path::new(&tmp);
            fs::write(tmp, &artifact.payload).map_err(|e| format!("writing {path}: {e}"))?;
            fs::rename(tmp, target).map_err(|e| {
                let _ = fs::remove_file(tmp);
                format!("writing {path}: {e}")
            })
        }
        None => {
            print!("{}", artifact.payload);
            Ok(())
        }
    }
}

fn run() -> Result<(), (u8, Vec<String>)> {
    let cli = Cli::parse();

    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| (EXIT_RUNTIME, vec![format!("worker pool: {e}")]))?;
    }

    let (mut spec, short_line_only) = match (cli.config, cli.command) {
        (Some(path), None) => {
            let raw = fs::read_to_string(&path)
                .map_err(|e| (EXIT_INVALID, vec![format!("reading {path}: {e}")]))?;
            let spec: ExperimentSpec = serde_json::from_str(&raw)
                .map_err(|e| (EXIT_INVALID, vec![format!("parsing {path}: {e}")]))?;
            let short = matches!(
                spec.command,
                CommandSpec::ClassifyBottleneck(_) | CommandSpec::CountMinimal(_)
            );
            (spec, short)
        }
        (None, Some(command)) => build_spec(command),
        (Some(_), Some(_)) => {
            return Err((
                EXIT_INVALID,
                vec!["pass either --config or a subcommand, not both".into()],
            ));
        }
        (None, None) => {
            return Err((EXIT_INVALID, vec!["missing subcommand (try --help)".into()]));
        }
    };

    if spec.seed.is_none() {
        spec.seed = env_seed().map_err(|e| (EXIT_INVALID, vec![e]))?;
    }

    let diagnostics = validate(&spec);
    if !diagnostics.is_empty() {
        return Err((EXIT_INVALID, diagnostics));
    }

    let outcome = execute(&spec).map_err(|e| match e {
        RunError::Invalid(diags) => (EXIT_INVALID, diags),
        RunError::Runtime(message) => (EXIT_RUNTIME, vec![message]),
    })?;

    for artifact in &outcome.artifacts {
        if short_line_only && artifact.output.path.is_none() {
            continue; // these commands print only their class/count line
        }
        write_artifact(artifact).map_err(|message| (EXIT_RUNTIME, vec![message]))?;
    }
    if let Some(line) = &outcome.stdout_line {
        if short_line_only || outcome.artifacts.iter().all(|a| a.output.path.is_some()) {
            println!("{line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, diagnostics)) => {
            for diagnostic in diagnostics {
                eprintln!("error: {diagnostic}");
            }
            ExitCode::from(code)
        }
    }
}
