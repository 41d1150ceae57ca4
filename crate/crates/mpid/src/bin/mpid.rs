//! Benchmark CLI: rank sweeps, column-dimension sweeps, the column-skeleton
//! prediction experiment, and synthetic matrix generation.
//!
//! Exit codes: 0 on success, 1 for configuration problems, 2 for I/O
//! problems, 3 when the run finished but every cell failed.

use clap::{Args, Parser, Subcommand};
use mpid::harness::{
    emit_csv, emit_svg, finalize_config, parse_config_file, run_experiment, save_matrix, write_csv,
    Baseline, CellStatus, ConfigOverlay, Dataset, ExperimentKind, HarnessVariant, MatrixFormat,
    DEFAULT_SEED,
};
use mpid::id::PinvPrecision;
use mpid::synth::{gen_decay_matrix, DecayName, DecayProfile};
use mpid::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mpid",
    version,
    about = "Rank-k column interpolative decomposition under emulated low-precision arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the target rank at full column dimension.
    SweepRank(RunArgs),
    /// Sweep the column dimension at one fixed rank.
    SweepCols(RunArgs),
    /// Score per-column predictions from a k-column skeleton.
    Rom(RunArgs),
    /// Write a synthetic decay matrix to a file.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// slow | medium | fast | file:PATH
    #[arg(long)]
    dataset: Option<String>,
    /// Comma-separated subset of double,single,half,mixed_single,mixed_half.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<String>>,
    /// Target ranks (sweep-rank, rom) or the single rank (sweep-cols).
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Column widths: the sweep grid for sweep-cols, a single synthetic
    /// width otherwise.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// double | truth: what reconstruction error is measured against.
    #[arg(long)]
    baseline: Option<String>,
    /// First seed; MPID_SEED is the fallback when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds; each gets its own instance and rows.
    #[arg(long)]
    seeds: Option<u32>,
    /// double | ctx: precision of the coefficient solve.
    #[arg(long = "pinv-precision")]
    pinv_precision: Option<String>,
    /// Rows of synthetic instances.
    #[arg(long)]
    m: Option<usize>,
    /// rom only: columns reported individually.
    #[arg(long, value_delimiter = ',')]
    holdout: Option<Vec<usize>>,
    /// Skip line 1 of a CSV matrix file.
    #[arg(long)]
    header: bool,
    /// Result CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a line chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// key = value config file; explicit flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// slow | medium | fast
    #[arg(long)]
    dataset: String,
    /// Rows.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Columns.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Generation seed; MPID_SEED is the fallback when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// csv | raw; inferred from the extension when absent.
    #[arg(long)]
    format: Option<String>,
}

type Failure = (u8, String);

fn config_failure(e: Error) -> Failure {
    match e {
        Error::Io(_) => (2, e.to_string()),
        _ => (1, e.to_string()),
    }
}

fn run_failure(e: Error) -> Failure {
    match e {
        Error::Io(_) | Error::Parse { .. } => (2, e.to_string()),
        _ => (1, e.to_string()),
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("MPID_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| (1, format!("MPID_SEED must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

impl RunArgs {
    fn to_overlay(&self) -> Result<ConfigOverlay, Failure> {
        let bad = |e: Error| (1, e.to_string());
        let mut o = ConfigOverlay {
            k_list: self.k.clone(),
            n_list: self.n.clone(),
            seed: self.seed,
            seeds: self.seeds,
            m: self.m,
            holdout: self.holdout.clone(),
            csv_header: if self.header { Some(true) } else { None },
            out_csv: self.out.clone(),
            out_svg: self.svg.clone(),
            ..Default::default()
        };
        if let Some(d) = &self.dataset {
            o.dataset = Some(Dataset::parse(d).map_err(bad)?);
        }
        if let Some(vs) = &self.variants {
            let mut parsed = Vec::with_capacity(vs.len());
            for v in vs {
                parsed.push(HarnessVariant::parse(v.trim()).map_err(bad)?);
            }
            o.variants = Some(parsed);
        }
        if let Some(b) = &self.baseline {
            o.baseline = Some(Baseline::parse(b).map_err(bad)?);
        }
        if let Some(p) = &self.pinv_precision {
            o.pinv = Some(match p.as_str() {
                "double" => PinvPrecision::Double,
                "ctx" => PinvPrecision::Ctx,
                other => return Err((1, format!("unknown pinv precision {other:?}"))),
            });
        }
        Ok(o)
    }
}

fn run_sweep(kind: ExperimentKind, args: &RunArgs) -> Result<ExitCode, Failure> {
    let file_overlay = match &args.config {
        Some(path) => parse_config_file(path).map_err(config_failure)?,
        None => ConfigOverlay::default(),
    };
    let mut overlay = args.to_overlay()?.over(file_overlay);
    if overlay.seed.is_none() {
        overlay.seed = env_seed()?;
    }
    let cfg = finalize_config(kind, overlay).map_err(|e| (1, e.to_string()))?;
    let rows = run_experiment(&cfg).map_err(run_failure)?;

    match &cfg.out_csv {
        Some(path) => emit_csv(&rows, path).map_err(run_failure)?,
        None => {
            let stdout = std::io::stdout();
            write_csv(&rows, &mut stdout.lock()).map_err(|e| (2, e.to_string()))?;
        }
    }
    if let Some(path) = &cfg.out_svg {
        emit_svg(&rows, path).map_err(run_failure)?;
    }

    if !rows.is_empty() && rows.iter().all(|r| r.status != CellStatus::Ok) {
        eprintln!("all {} cells failed", rows.len());
        return Ok(ExitCode::from(3));
    }
    if let Some(path) = &cfg.out_csv {
        let failed = rows.iter().filter(|r| r.status != CellStatus::Ok).count();
        println!(
            "wrote {} rows to {} ({failed} failed cells)",
            rows.len(),
            path.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_gen(args: &GenArgs) -> Result<ExitCode, Failure> {
    let name = DecayName::parse(&args.dataset).map_err(|e| (1, e.to_string()))?;
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(DEFAULT_SEED),
    };
    let profile = DecayProfile {
        name,
        m: args.m,
        n: args.n,
        seed,
    };
    let (a, _) = gen_decay_matrix(profile).map_err(|e| (1, e.to_string()))?;
    let format = match &args.format {
        Some(f) => MatrixFormat::parse(f).map_err(|e| (1, e.to_string()))?,
        None => MatrixFormat::infer(&args.out),
    };
    save_matrix(&a, &args.out, format).map_err(run_failure)?;
    println!(
        "wrote {}x{} {} matrix to {}",
        args.m,
        args.n,
        name.as_str(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::SweepRank(a) => run_sweep(ExperimentKind::RankSweep, a),
        Cmd::SweepCols(a) => run_sweep(ExperimentKind::ColdimSweep, a),
        Cmd::Rom(a) => run_sweep(ExperimentKind::Rom, a),
        Cmd::Gen(a) => run_gen(a),
    };
    match outcome {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
