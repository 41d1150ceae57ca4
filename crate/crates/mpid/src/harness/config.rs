//! Experiment configuration: a partial overlay (from a config file or CLI
//! flags), merge rules where flags win, and finalization into a validated
//! [`ExperimentConfig`] with per-experiment defaults.

use super::{Baseline, Dataset, ExperimentKind, HarnessVariant, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::id::PinvPrecision;
use std::path::{Path, PathBuf};

/// A fully resolved, validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dataset: Dataset,
    /// Deduplicated, in canonical order.
    pub variants: Vec<HarnessVariant>,
    /// Ranks to run, sorted ascending. A single entry for the column sweep.
    pub k_list: Vec<usize>,
    /// Column widths. The grid for the column sweep; a single entry (the
    /// synthetic width) for the other experiments.
    pub n_list: Vec<usize>,
    pub baseline: Baseline,
    /// First seed; seeds `seed..seed+seeds` each get their own instance.
    pub seed: u64,
    pub seeds: u32,
    pub pinv: PinvPrecision,
    /// Row count for synthetic datasets.
    pub m: usize,
    /// Held-out columns reported individually by the rom experiment.
    pub holdout: Vec<usize>,
    /// Whether a CSV matrix file starts with a header line to skip.
    pub csv_header: bool,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

/// Partial configuration; `None` means "not given here".
#[derive(Clone, Debug, Default)]
pub struct ConfigOverlay {
    pub dataset: Option<Dataset>,
    pub variants: Option<Vec<HarnessVariant>>,
    pub k_list: Option<Vec<usize>>,
    pub n_list: Option<Vec<usize>>,
    pub baseline: Option<Baseline>,
    pub seed: Option<u64>,
    pub seeds: Option<u32>,
    pub pinv: Option<PinvPrecision>,
    pub m: Option<usize>,
    pub holdout: Option<Vec<usize>>,
    pub csv_header: Option<bool>,
    pub out_csv: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

impl ConfigOverlay {
    /// Field-wise merge in which `self` wins over `base`.
    pub fn over(self, base: ConfigOverlay) -> ConfigOverlay {
        ConfigOverlay {
            dataset: self.dataset.or(base.dataset),
            variants: self.variants.or(base.variants),
            k_list: self.k_list.or(base.k_list),
            n_list: self.n_list.or(base.n_list),
            baseline: self.baseline.or(base.baseline),
            seed: self.seed.or(base.seed),
            seeds: self.seeds.or(base.seeds),
            pinv: self.pinv.or(base.pinv),
            m: self.m.or(base.m),
            holdout: self.holdout.or(base.holdout),
            csv_header: self.csv_header.or(base.csv_header),
            out_csv: self.out_csv.or(base.out_csv),
            out_svg: self.out_svg.or(base.out_svg),
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| Error::config(format!("bad entry {t:?} in key {key}")))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::config(format!("bad value {value:?} for key {key}")))
}

/// Parses a flat `key = value` config file. `#` starts a comment, blank
/// lines are skipped, unknown keys are rejected. The `experiment` key is
/// accepted for self-documentation but ignored: the subcommand decides.
pub fn parse_config_file(path: &Path) -> Result<ConfigOverlay> {
    let text = std::fs::read_to_string(path)?;
    let mut overlay = ConfigOverlay::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let located = |e: Error| match e {
            Error::Config(msg) => Error::Parse {
                line: idx + 1,
                msg,
            },
            other => other,
        };
        match key {
            "experiment" => {
                ExperimentKind::parse(value).map_err(located)?;
            }
            "dataset" => overlay.dataset = Some(Dataset::parse(value).map_err(located)?),
            "variants" => {
                let names: Vec<&str> = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .collect();
                let mut vs = Vec::new();
                for name in names {
                    vs.push(HarnessVariant::parse(name).map_err(located)?);
                }
                overlay.variants = Some(vs);
            }
            "k" => overlay.k_list = Some(parse_list(value, key).map_err(located)?),
            "n" => overlay.n_list = Some(parse_list(value, key).map_err(located)?),
            "baseline" => overlay.baseline = Some(Baseline::parse(value).map_err(located)?),
            "seed" => overlay.seed = Some(parse_scalar(value, key).map_err(located)?),
            "seeds" => overlay.seeds = Some(parse_scalar(value, key).map_err(located)?),
            "pinv_precision" => {
                overlay.pinv = Some(match value {
                    "double" => PinvPrecision::Double,
                    "ctx" => PinvPrecision::Ctx,
                    other => {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: format!("unknown pinv_precision {other:?}"),
                        })
                    }
                })
            }
            "m" => overlay.m = Some(parse_scalar(value, key).map_err(located)?),
            "holdout" => overlay.holdout = Some(parse_list(value, key).map_err(located)?),
            "header" => {
                overlay.csv_header = Some(match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: format!("header must be true or false, got {other:?}"),
                        })
                    }
                })
            }
            "out" => overlay.out_csv = Some(PathBuf::from(value)),
            "svg" => overlay.out_svg = Some(PathBuf::from(value)),
            other => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("unknown key {other:?}"),
                })
            }
        }
    }
    Ok(overlay)
}

fn default_k_list(kind: ExperimentKind) -> Vec<usize> {
    match kind {
        ExperimentKind::RankSweep => (5..=51).step_by(2).collect(),
        ExperimentKind::ColdimSweep => vec![20],
        ExperimentKind::Rom => vec![10, 20, 40],
    }
}

fn default_n_list(kind: ExperimentKind) -> Vec<usize> {
    match kind {
        ExperimentKind::ColdimSweep => (1..=10).map(|i| i * 100).collect(),
        _ => vec![1000],
    }
}

/// Applies defaults and validates cross-field rules.
pub fn finalize_config(kind: ExperimentKind, overlay: ConfigOverlay) -> Result<ExperimentConfig> {
    let dataset = overlay
        .dataset
        .unwrap_or(Dataset::Synthetic(crate::synth::DecayName::Fast));
    let mut variants = overlay
        .variants
        .unwrap_or_else(|| HarnessVariant::ALL.to_vec());
    variants.sort();
    variants.dedup();
    if variants.is_empty() {
        return Err(Error::config("no variants selected".to_string()));
    }

    let mut k_list = overlay.k_list.unwrap_or_else(|| default_k_list(kind));
    k_list.sort_unstable();
    k_list.dedup();
    if k_list.is_empty() || k_list[0] == 0 {
        return Err(Error::config("ranks must be positive".to_string()));
    }
    if kind == ExperimentKind::ColdimSweep && k_list.len() != 1 {
        return Err(Error::config(
            "the column sweep takes exactly one rank".to_string(),
        ));
    }

    let mut n_list = overlay.n_list.unwrap_or_else(|| default_n_list(kind));
    n_list.sort_unstable();
    n_list.dedup();
    if n_list.is_empty() || n_list[0] == 0 {
        return Err(Error::config("column widths must be positive".to_string()));
    }
    if kind != ExperimentKind::ColdimSweep && n_list.len() != 1 {
        return Err(Error::config(format!(
            "{} takes a single column width, got {} values",
            kind.as_str(),
            n_list.len()
        )));
    }

    let seeds = overlay.seeds.unwrap_or(1);
    if seeds == 0 {
        return Err(Error::config("seeds must be at least 1".to_string()));
    }
    if matches!(dataset, Dataset::File(_)) && seeds != 1 {
        return Err(Error::config(
            "file datasets are fixed instances; use seeds = 1".to_string(),
        ));
    }

    let m = overlay.m.unwrap_or(1000);
    if m == 0 {
        return Err(Error::config("m must be positive".to_string()));
    }

    let mut holdout = overlay.holdout.unwrap_or_default();
    holdout.sort_unstable();
    holdout.dedup();
    if !holdout.is_empty() && kind != ExperimentKind::Rom {
        return Err(Error::config(
            "holdout columns only apply to the rom experiment".to_string(),
        ));
    }

    Ok(ExperimentConfig {
        experiment: kind,
        dataset,
        variants,
        k_list,
        n_list,
        baseline: overlay.baseline.unwrap_or_default(),
        seed: overlay.seed.unwrap_or(DEFAULT_SEED),
        seeds,
        pinv: overlay.pinv.unwrap_or_default(),
        m,
        holdout,
        csv_header: overlay.csv_header.unwrap_or(false),
        out_csv: overlay.out_csv,
        out_svg: overlay.out_svg,
    })
}
