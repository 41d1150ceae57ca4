//! Experiment runner: sweeps over rank and column dimension, the
//! column-skeleton reduced-order workflow, and CSV/SVG emission.
//!
//! Each experiment cell (variant, rank, width, seed) produces exactly one
//! result row, whether it succeeded or died in a recorded way (storage
//! overflow while rounding the input, or a pivot norm underflowing to zero
//! mid-factorization). Runs are deterministic: the same config and seed
//! produce byte-identical CSV output.

mod config;
mod io;
mod rom;
mod svg;
mod sweeps;

pub use config::{finalize_config, parse_config_file, ConfigOverlay, ExperimentConfig};
pub use io::{emit_csv, load_matrix, save_matrix, write_csv, MatrixFormat};
pub use rom::run_rom;
pub use svg::{emit_svg, write_svg};
pub use sweeps::{run_coldim_sweep, run_rank_sweep};

use crate::error::{Error, Result};
use crate::id;
use crate::precision::PrecisionContext;
use crate::synth::DecayName;
use std::path::PathBuf;

/// Fallback seed when neither flag, config, nor `MPID_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 7;

/// Which experiment a config drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExperimentKind {
    RankSweep,
    ColdimSweep,
    Rom,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::RankSweep => "rank_sweep",
            ExperimentKind::ColdimSweep => "coldim_sweep",
            ExperimentKind::Rom => "rom",
        }
    }

    pub fn parse(s: &str) -> Result<ExperimentKind> {
        match s {
            "rank_sweep" => Ok(ExperimentKind::RankSweep),
            "coldim_sweep" => Ok(ExperimentKind::ColdimSweep),
            "rom" => Ok(ExperimentKind::Rom),
            other => Err(Error::config(format!("unknown experiment {other:?}"))),
        }
    }
}

/// Data source: a synthetic decay family or a matrix file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dataset {
    Synthetic(DecayName),
    File(PathBuf),
}

impl Dataset {
    pub fn parse(s: &str) -> Result<Dataset> {
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::config("empty path in file: dataset".to_string()));
            }
            return Ok(Dataset::File(PathBuf::from(path)));
        }
        Ok(Dataset::Synthetic(DecayName::parse(s)?))
    }

    /// Label recorded in the CSV `dataset` column.
    pub fn label(&self) -> String {
        match self {
            Dataset::Synthetic(name) => name.as_str().to_string(),
            Dataset::File(path) => format!("file:{}", path.display()),
        }
    }
}

/// Precision scheme of one experiment cell. `Single` and `Half` read the
/// skeleton from the storage-rounded matrix; the `Mixed*` schemes factor in
/// low precision but keep the f64 skeleton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HarnessVariant {
    Double,
    Single,
    Half,
    MixedSingle,
    MixedHalf,
}

impl HarnessVariant {
    pub const ALL: [HarnessVariant; 5] = [
        HarnessVariant::Double,
        HarnessVariant::Single,
        HarnessVariant::Half,
        HarnessVariant::MixedSingle,
        HarnessVariant::MixedHalf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HarnessVariant::Double => "double",
            HarnessVariant::Single => "single",
            HarnessVariant::Half => "half",
            HarnessVariant::MixedSingle => "mixed_single",
            HarnessVariant::MixedHalf => "mixed_half",
        }
    }

    pub fn parse(s: &str) -> Result<HarnessVariant> {
        match s {
            "double" => Ok(HarnessVariant::Double),
            "single" => Ok(HarnessVariant::Single),
            "half" => Ok(HarnessVariant::Half),
            "mixed_single" => Ok(HarnessVariant::MixedSingle),
            "mixed_half" => Ok(HarnessVariant::MixedHalf),
            other => Err(Error::config(format!("unknown variant {other:?}"))),
        }
    }

    pub fn ctx(self) -> PrecisionContext {
        match self {
            HarnessVariant::Double => PrecisionContext::DOUBLE,
            HarnessVariant::Single | HarnessVariant::MixedSingle => PrecisionContext::SINGLE,
            HarnessVariant::Half | HarnessVariant::MixedHalf => PrecisionContext::SIMULATED_HALF,
        }
    }

    pub fn id_variant(self) -> id::Variant {
        match self {
            HarnessVariant::Double => id::Variant::Double,
            HarnessVariant::Single | HarnessVariant::Half => id::Variant::Low,
            HarnessVariant::MixedSingle | HarnessVariant::MixedHalf => id::Variant::MixedLow,
        }
    }
}

/// What reconstruction errors are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Baseline {
    /// The double-precision decomposition's reconstruction at the same rank.
    #[default]
    DoubleId,
    /// The original f64 matrix.
    GroundTruth,
}

impl Baseline {
    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::DoubleId => "double_id",
            Baseline::GroundTruth => "ground_truth",
        }
    }

    pub fn parse(s: &str) -> Result<Baseline> {
        match s {
            "double_id" | "double" => Ok(Baseline::DoubleId),
            "ground_truth" | "truth" => Ok(Baseline::GroundTruth),
            other => Err(Error::config(format!("unknown baseline {other:?}"))),
        }
    }
}

/// Measurement recorded in a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    RelSpectralVsDouble,
    RelSpectralVsTruth,
    MseColumn,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::RelSpectralVsDouble => "rel_spectral_vs_double",
            ErrorKind::RelSpectralVsTruth => "rel_spectral_vs_truth",
            ErrorKind::MseColumn => "mse_column",
        }
    }
}

/// Outcome of one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// A trailing pivot norm rounded to zero before reaching this rank.
    Underflow,
    /// The input could not be stored in the context's format.
    Overflow,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Underflow => "underflow",
            CellStatus::Overflow => "overflow",
        }
    }
}

/// One output record. `error_value` is NaN whenever `status` is not `Ok`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub dataset: String,
    pub variant: HarnessVariant,
    pub k: usize,
    pub n: usize,
    pub seed: u64,
    pub error_kind: ErrorKind,
    pub error_value: f64,
    pub status: CellStatus,
    /// Held-out column behind an `mse_column` row; `None` for sweep rows and
    /// for the per-variant mean row. Used for output ordering.
    pub holdout_col: Option<usize>,
}

/// Runs the experiment named by `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.experiment {
        ExperimentKind::RankSweep => run_rank_sweep(cfg),
        ExperimentKind::ColdimSweep => run_coldim_sweep(cfg),
        ExperimentKind::Rom => run_rom(cfg),
    }
}
