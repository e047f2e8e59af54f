use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use ndarray::Array1;

use tokensieve::bench::synth::SynthConfig;
use tokensieve::bench::{run_bench, DEFAULT_RATIOS, DEFAULT_TRIALS};
use tokensieve::config::*;
use tokensieve::flops::{reduction_report, transformer_flops, ModelDims, SequenceBudget};
use tokensieve::frequency::{patch_grid, prior_variant};
use tokensieve::scoring::retained_count;
use tokensieve::tensor_io::{load_matrix, load_vector, to_canonical_json};
use tokensieve::transport::{oracle_check, OracleCheckConfig};
use tokensieve::{
    compress, load_frame, load_token_tensor, score, Error, ImageFrame, Projector, Result, RunConfig,
};

#[derive(Parser)]
#[command(name = "tokensieve", version, about = "Score and prune visual tokens")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every token and keep the Top-K per frame
    Compress(PipelineArgs),
    /// Score every token without selecting
    Score(PipelineArgs),
    /// Per-patch frequency prior of one frame
    Prior(PriorArgs),
    /// Analytical prefill FLOPs
    Flops(FlopsArgs),
    /// Synthetic forged/pristine benchmark
    Bench(BenchArgs),
    /// Compare Sinkhorn with the exact solver on small random problems
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_EPSILON_OT)]
    epsilon_ot: f64,
    #[arg(long, default_value_t = DEFAULT_C_BIRTH)]
    c_birth: f64,
    #[arg(long, default_value_t = DEFAULT_C_DEATH)]
    c_death: f64,
    #[arg(long, default_value_t = DEFAULT_SINKHORN_ITERS)]
    sinkhorn_iters: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA_BIRTH)]
    lambda_birth: f64,
    #[arg(long, default_value_t = DEFAULT_ETA_FORENSIC)]
    eta_forensic: f64,
    /// Fraction of patch tokens kept per frame, in (0, 1]
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    ratio: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON_NORM)]
    epsilon_norm: f64,
    /// hard_assignment | balanced_ot | only_birth | birth_death
    #[arg(long, default_value_t = TransportMode::default(), value_parser = TransportMode::from_str)]
    transport_mode: TransportMode,
    /// none | patch_variance | sobel | laplacian
    #[arg(long, default_value_t = SpatialOperator::default(), value_parser = SpatialOperator::from_str)]
    spatial_operator: SpatialOperator,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report or config JSON whose `config` (or top-level) object seeds every
    /// flag not given on the command line
    #[arg(long, value_name = "JSON")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Token tensor, NPY of shape (T, N, D)
    #[arg(long)]
    tokens: PathBuf,
    /// Source frames: one directory (sorted .pgm/.npy files) or a comma-separated list
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    frames: Vec<PathBuf>,
    /// Projector weight, NPY of shape (D_p, D)
    #[arg(long)]
    projector_weight: Option<PathBuf>,
    /// Projector bias, NPY of shape (D_p)
    #[arg(long, requires = "projector_weight")]
    projector_bias: Option<PathBuf>,
    /// Output JSON; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct PriorArgs {
    /// Frame image, binary PGM or 2-D NPY
    #[arg(long)]
    frame: PathBuf,
    /// Patch tokens per frame; sets the pooling grid
    #[arg(long, default_value_t = 576)]
    tokens_per_frame: usize,
    /// none | patch_variance | sobel | laplacian
    #[arg(long, default_value_t = SpatialOperator::default(), value_parser = SpatialOperator::from_str)]
    spatial_operator: SpatialOperator,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlopsArgs {
    #[arg(long, default_value_t = ModelDims::SEVEN_B.layers)]
    layers: u64,
    #[arg(long, default_value_t = ModelDims::SEVEN_B.hidden)]
    hidden: u64,
    #[arg(long, default_value_t = ModelDims::SEVEN_B.ffn)]
    ffn: u64,
    /// Print the FLOPs of one sequence of this length and exit
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 32)]
    n_sys: u64,
    #[arg(long, default_value_t = 32)]
    n_txt: u64,
    #[arg(long, default_value_t = 8)]
    num_frames: u64,
    #[arg(long, default_value_t = 576)]
    tokens_per_frame: u64,
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    ratio: f64,
    #[arg(long, default_value_t = DEFAULT_SINKHORN_ITERS as u64)]
    sinkhorn_iters: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = SynthConfig::default().frames)]
    num_frames: usize,
    #[arg(long, default_value_t = SynthConfig::default().tokens)]
    tokens_per_frame: usize,
    #[arg(long, default_value_t = SynthConfig::default().dim)]
    dim: usize,
    #[arg(long, default_value_t = SynthConfig::default().drift_sigma)]
    drift_sigma: f64,
    #[arg(long, default_value_t = SynthConfig::default().artifact_count)]
    artifact_count: usize,
    /// Retention ratios of the recall sweep
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RATIOS)]
    ratios: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = OracleCheckConfig::default().instances)]
    instances: usize,
    #[arg(long, value_delimiter = ',', default_values_t = OracleCheckConfig::default().sizes)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = OracleCheckConfig::default().epsilon_ot)]
    epsilon_ot: f64,
    #[arg(long, default_value_t = OracleCheckConfig::default().iters)]
    sinkhorn_iters: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Full per-instance report
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    /// Flags given explicitly win over `--config`, which wins over defaults.
    fn resolve(&self, matches: &ArgMatches) -> Result<RunConfig> {
        let Some(path) = &self.config else {
            return Ok(self.flag_values());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let inner = value.get("config").or_else(|| value.get("run")).unwrap_or(&value);
        let mut cfg: RunConfig = serde_json::from_value(inner.clone())
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let given = |id: &str| matches.value_source(id) == Some(ValueSource::CommandLine);
        macro_rules! overlay {
            ($($field:ident),*) => {$(
                if given(stringify!($field)) {
                    cfg.$field = self.$field.clone();
                }
            )*};
        }
        overlay!(
            epsilon_ot, c_birth, c_death, sinkhorn_iters, lambda_birth, eta_forensic, ratio,
            epsilon_norm, transport_mode, spatial_operator, seed
        );
        Ok(cfg)
    }

    fn flag_values(&self) -> RunConfig {
        RunConfig {
            epsilon_ot: self.epsilon_ot,
            c_birth: self.c_birth,
            c_death: self.c_death,
            sinkhorn_iters: self.sinkhorn_iters,
            lambda_birth: self.lambda_birth,
            eta_forensic: self.eta_forensic,
            ratio: self.ratio,
            epsilon_norm: self.epsilon_norm,
            transport_mode: self.transport_mode,
            spatial_operator: self.spatial_operator,
            seed: self.seed,
        }
    }
}

fn frame_paths(args: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if let [dir] = args {
        if dir.is_dir() {
            let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
            let mut paths = Vec::new();
            for entry in entries {
                let path = entry.map_err(|e| Error::io(dir, e))?.path();
                let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
                if matches!(ext, "pgm" | "npy") {
                    paths.push(path);
                }
            }
            paths.sort();
            return Ok(paths);
        }
    }
    Ok(args.to_vec())
}

fn load_frames(args: &[PathBuf]) -> Result<Option<Vec<ImageFrame>>> {
    if args.is_empty() {
        return Ok(None);
    }
    let frames = frame_paths(args)?
        .iter()
        .map(|p| load_frame(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(frames))
}

fn load_projector(args: &PipelineArgs) -> Result<Projector> {
    let Some(weight) = &args.projector_weight else {
        return Ok(Projector::Identity);
    };
    let bias = args
        .projector_bias
        .as_deref()
        .map(load_vector)
        .transpose()?
        .map(Array1::from);
    Projector::affine(load_matrix(weight)?, bias)
}

fn emit<T: serde::Serialize>(out: Option<&Path>, report: &T) -> Result<()> {
    let text = to_canonical_json(report)?;
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli, matches: &ArgMatches) -> Result<()> {
    let sub = |name: &str| matches.subcommand_matches(name).expect("subcommand matched");
    match cli.command {
        Command::Compress(args) => {
            let cfg = args.run.resolve(sub("compress"))?;
            cfg.validate()?;
            let tokens = load_token_tensor(&args.tokens)?;
            let frames = load_frames(&args.frames)?;
            let projector = load_projector(&args)?;
            let (selection, _) = compress(&tokens, frames.as_deref(), &cfg, &projector)?;
            emit(args.out.as_deref(), &selection)
        }
        Command::Score(args) => {
            let cfg = args.run.resolve(sub("score"))?;
            cfg.validate()?;
            let tokens = load_token_tensor(&args.tokens)?;
            let frames = load_frames(&args.frames)?;
            let projector = load_projector(&args)?;
            let bundle = score(&tokens, frames.as_deref(), &cfg, &projector)?;
            emit(args.out.as_deref(), &bundle)
        }
        Command::Prior(args) => {
            if args.tokens_per_frame == 0 {
                return Err(Error::Validation("tokens-per-frame must be at least 1".into()));
            }
            let frame = load_frame(&args.frame)?;
            let (rows, cols) = patch_grid(args.tokens_per_frame);
            let prior = prior_variant(args.spatial_operator, &frame, rows, cols)?;
            emit(args.out.as_deref(), &prior)
        }
        Command::Flops(args) => {
            let dims = ModelDims {
                layers: args.layers,
                hidden: args.hidden,
                ffn: args.ffn,
            };
            if let Some(n) = args.n {
                println!("{}", transformer_flops(&dims, n)?);
                return Ok(());
            }
            let kept = retained_count(args.tokens_per_frame as usize, args.ratio)? as u64;
            let budget = SequenceBudget {
                n_sys: args.n_sys,
                n_txt: args.n_txt,
                frames: args.num_frames,
                tokens_per_frame: args.tokens_per_frame,
                kept: Some(kept),
            };
            emit(args.out.as_deref(), &reduction_report(&dims, &budget, args.sinkhorn_iters)?)
        }
        Command::Bench(args) => {
            let run = args.run.resolve(sub("bench"))?;
            let synth = SynthConfig {
                frames: args.num_frames,
                tokens: args.tokens_per_frame,
                dim: args.dim,
                drift_sigma: args.drift_sigma,
                artifact_count: args.artifact_count,
                seed: run.seed,
                ..SynthConfig::default()
            };
            let report = run_bench(&synth, &run, args.trials, &args.ratios)?;
            emit(args.out.as_deref(), &report)
        }
        Command::OracleCheck(args) => {
            let cfg = OracleCheckConfig {
                instances: args.instances,
                sizes: args.sizes,
                epsilon_ot: args.epsilon_ot,
                iters: args.sinkhorn_iters,
                seed: args.seed,
            };
            let report = oracle_check(&cfg)?;
            if let Some(path) = &args.out {
                tokensieve::save_report(path, &report)?;
            }
            println!("max relative objective gap: {}", report.max_relative_gap);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run(cli, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
