//! Column-skeleton reduced-order workflow: select k skeleton columns, then
//! predict every other column through the interpolation coefficients and
//! score the predictions per column by mean squared error against the f64
//! data.
//!
//! Each (variant, k) cell emits one mean row over all non-skeleton columns
//! plus one row per explicitly requested held-out column. Requested columns
//! that land in the skeleton are still reported; variants reading the f64
//! skeleton reproduce them exactly, so their MSE is zero by construction.

use super::sweeps::{dataset_instance, CellOutcome, PreparedContexts};
use super::{CellStatus, ErrorKind, ExperimentConfig, ResultRow};
use crate::error::{Error, Result};
use std::collections::HashSet;

fn col_mse(truth: &[f64], pred: &[f64]) -> f64 {
    let sum: f64 = truth
        .iter()
        .zip(pred)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    sum / truth.len() as f64
}

pub fn run_rom(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let width = cfg.n_list[0];
    let mut rows = Vec::new();
    for s in 0..cfg.seeds {
        let seed = cfg.seed + u64::from(s);
        let a = dataset_instance(cfg, width, seed)?;
        if let Some(&bad) = cfg.holdout.iter().find(|&&j| j >= a.cols()) {
            return Err(Error::config(format!(
                "held-out column {bad} is out of bounds for {} columns",
                a.cols()
            )));
        }
        let k_max = *cfg.k_list.last().expect("validated nonempty");
        if k_max > a.rows().min(a.cols()) {
            return Err(Error::config(format!(
                "rank {k_max} exceeds the {}x{} input",
                a.rows(),
                a.cols()
            )));
        }
        let prepared = PreparedContexts::prepare(&a, &cfg.variants, k_max, cfg.pinv, false)?;
        let label = cfg.dataset.label();

        for &variant in &cfg.variants {
            for &k in &cfg.k_list {
                let row = |value: f64, status: CellStatus, holdout: Option<usize>| ResultRow {
                    experiment: cfg.experiment,
                    dataset: match holdout {
                        Some(j) => format!("{label}:col{j}"),
                        None => label.clone(),
                    },
                    variant,
                    k,
                    n: a.cols(),
                    seed,
                    error_kind: ErrorKind::MseColumn,
                    error_value: value,
                    status,
                    holdout_col: holdout,
                };
                let emit_failed = |status: CellStatus, rows: &mut Vec<ResultRow>| {
                    rows.push(row(f64::NAN, status, None));
                    for &j in &cfg.holdout {
                        rows.push(row(f64::NAN, status, Some(j)));
                    }
                };
                match prepared.cell(variant, k)? {
                    CellOutcome::Overflow => emit_failed(CellStatus::Overflow, &mut rows),
                    CellOutcome::Underflow => emit_failed(CellStatus::Underflow, &mut rows),
                    CellOutcome::Ok { approx, recon } => {
                        let skeleton: HashSet<usize> = approx.indices.iter().copied().collect();
                        let mut sum = 0.0;
                        let mut count = 0usize;
                        for j in 0..a.cols() {
                            if !skeleton.contains(&j) {
                                sum += col_mse(a.col(j), recon.col(j));
                                count += 1;
                            }
                        }
                        let mean = if count > 0 { sum / count as f64 } else { 0.0 };
                        rows.push(row(mean, CellStatus::Ok, None));
                        for &j in &cfg.holdout {
                            let v = col_mse(a.col(j), recon.col(j));
                            rows.push(row(v, CellStatus::Ok, Some(j)));
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}
