//! Rank and column-dimension sweeps.
//!
//! All variants sharing a precision context reuse one pivoted QR per
//! (matrix, seed): the factorization is run once at the largest requested
//! rank and sliced down, which is exact because each step of the pivoted
//! QR never revisits earlier columns. A factorization that underflows at
//! step `b` is rerun at rank `b` (an identical prefix) so ranks up to `b`
//! are still served, and larger ranks become `underflow` rows.

use super::io::MatrixFormat;
use super::{
    Baseline, CellStatus, Dataset, ErrorKind, ExperimentConfig, HarnessVariant, ResultRow,
};
use crate::error::{Error, Result};
use crate::id::{
    build_id, coefficient_matrix_with, default_pinv_tol, rel_spectral_error, IdApprox,
    PinvPrecision, SkeletonSource,
};
use crate::matrix::DenseMatrix;
use crate::mgsqr::{mgsqr, PivotedQr};
use crate::precision::{round_matrix, PrecisionContext};
use crate::synth::{column_prefix, gen_decay_matrix, DecayProfile};
use std::collections::BTreeMap;

/// One materialized input instance: synthetic at the given width and seed,
/// or the file as stored.
pub(super) fn dataset_instance(
    cfg: &ExperimentConfig,
    width: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    match &cfg.dataset {
        Dataset::Synthetic(name) => {
            let profile = DecayProfile {
                name: *name,
                m: cfg.m,
                n: width,
                seed,
            };
            Ok(gen_decay_matrix(profile)?.0)
        }
        Dataset::File(path) => {
            super::io::load_matrix(path, MatrixFormat::infer(path), cfg.csv_header)
        }
    }
}

enum CtxServe {
    /// Storage rounding overflowed; every cell of this context fails.
    Overflowed,
    Ready {
        /// Storage-rounded input; `None` for the native double context.
        work: Option<DenseMatrix>,
        /// `None` when the factorization broke at step 0.
        qr: Option<PivotedQr>,
        /// Largest rank this context can serve.
        served_max: usize,
    },
}

pub(super) enum CellOutcome {
    Ok {
        approx: IdApprox,
        recon: DenseMatrix,
    },
    Underflow,
    Overflow,
}

/// Per-context factorizations for one input matrix.
pub(super) struct PreparedContexts<'a> {
    a: &'a DenseMatrix,
    entries: Vec<(PrecisionContext, CtxServe)>,
    pinv: PinvPrecision,
}

impl<'a> PreparedContexts<'a> {
    pub fn prepare(
        a: &'a DenseMatrix,
        variants: &[HarnessVariant],
        k_max: usize,
        pinv: PinvPrecision,
        include_double: bool,
    ) -> Result<PreparedContexts<'a>> {
        let mut ctxs: Vec<PrecisionContext> = Vec::new();
        let add = |ctxs: &mut Vec<PrecisionContext>, ctx: PrecisionContext| {
            if !ctxs.iter().any(|c| c.name() == ctx.name()) {
                ctxs.push(ctx);
            }
        };
        if include_double {
            add(&mut ctxs, PrecisionContext::DOUBLE);
        }
        for v in HarnessVariant::ALL {
            if variants.contains(&v) {
                add(&mut ctxs, v.ctx());
            }
        }
        let mut entries: Vec<(PrecisionContext, CtxServe)> = Vec::new();
        for ctx in ctxs {
            let serve = prepare_context(a, ctx, k_max)?;
            entries.push((ctx, serve));
        }
        Ok(PreparedContexts { a, entries, pinv })
    }

    pub fn cell(&self, variant: HarnessVariant, k: usize) -> Result<CellOutcome> {
        let ctx = variant.ctx();
        let (_, serve) = self
            .entries
            .iter()
            .find(|(c, _)| c.name() == ctx.name())
            .ok_or_else(|| Error::config(format!("context for {} not prepared", variant.as_str())))?;
        let (work, qr, served_max) = match serve {
            CtxServe::Overflowed => return Ok(CellOutcome::Overflow),
            CtxServe::Ready {
                work,
                qr,
                served_max,
            } => (work, qr, *served_max),
        };
        if k > served_max {
            return Ok(CellOutcome::Underflow);
        }
        let qr = qr.as_ref().expect("served_max > 0 implies a factorization");
        let qr_k = qr.truncate(k)?;
        let p = coefficient_matrix_with(&qr_k, default_pinv_tol(k, self.a.cols(), ctx), self.pinv)?;
        let indices = qr_k.piv.as_slice()[..k].to_vec();
        let id_variant = variant.id_variant();
        let skeleton_source = match id_variant {
            crate::id::Variant::Low => SkeletonSource::LowMatrix,
            _ => SkeletonSource::DoubleMatrix,
        };
        let approx = IdApprox {
            indices,
            p,
            variant: id_variant,
            ctx,
            skeleton_source,
        };
        let source = match approx.skeleton_source {
            SkeletonSource::DoubleMatrix => self.a,
            SkeletonSource::LowMatrix => work.as_ref().unwrap_or(self.a),
        };
        let recon = build_id(source, &approx)?;
        Ok(CellOutcome::Ok { approx, recon })
    }
}

fn prepare_context(a: &DenseMatrix, ctx: PrecisionContext, k_max: usize) -> Result<CtxServe> {
    let work = if ctx.is_native_double() {
        None
    } else {
        match round_matrix(a, ctx.storage()) {
            Ok(w) => Some(w),
            Err(Error::Overflow { .. }) => return Ok(CtxServe::Overflowed),
            Err(e) => return Err(e),
        }
    };
    let mat = work.as_ref().unwrap_or(a);
    match mgsqr(mat, k_max, ctx) {
        Ok(qr) => Ok(CtxServe::Ready {
            work,
            qr: Some(qr),
            served_max: k_max,
        }),
        Err(Error::Underflow(state)) => {
            let b = state.step;
            let qr = if b > 0 { Some(mgsqr(mat, b, ctx)?) } else { None };
            Ok(CtxServe::Ready {
                work,
                qr,
                served_max: b,
            })
        }
        Err(e) => Err(e),
    }
}

/// Runs every (variant, k) cell for one input matrix and returns its rows.
pub(super) fn sweep_cells(
    cfg: &ExperimentConfig,
    a: &DenseMatrix,
    k_list: &[usize],
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let k_max = *k_list.last().expect("validated nonempty");
    if k_max > a.rows().min(a.cols()) {
        return Err(Error::config(format!(
            "rank {k_max} exceeds the {}x{} input",
            a.rows(),
            a.cols()
        )));
    }
    let need_double_baseline = cfg.baseline == Baseline::DoubleId;
    let prepared = PreparedContexts::prepare(a, &cfg.variants, k_max, cfg.pinv, need_double_baseline)?;

    let mut double_recons: BTreeMap<usize, DenseMatrix> = BTreeMap::new();
    if need_double_baseline {
        for &k in k_list {
            match prepared.cell(HarnessVariant::Double, k)? {
                CellOutcome::Ok { recon, .. } => {
                    double_recons.insert(k, recon);
                }
                _ => {
                    return Err(Error::degenerate(format!(
                        "double baseline unavailable at rank {k}"
                    )))
                }
            }
        }
    }
    let error_kind = match cfg.baseline {
        Baseline::DoubleId => ErrorKind::RelSpectralVsDouble,
        Baseline::GroundTruth => ErrorKind::RelSpectralVsTruth,
    };

    let label = cfg.dataset.label();
    let mut rows = Vec::with_capacity(cfg.variants.len() * k_list.len());
    for &variant in &cfg.variants {
        for &k in k_list {
            let row = |value: f64, status: CellStatus| ResultRow {
                experiment: cfg.experiment,
                dataset: label.clone(),
                variant,
                k,
                n: a.cols(),
                seed,
                error_kind,
                error_value: value,
                status,
                holdout_col: None,
            };
            let outcome = if variant == HarnessVariant::Double && double_recons.contains_key(&k) {
                None
            } else {
                Some(prepared.cell(variant, k)?)
            };
            match outcome {
                // The double variant against its own reconstruction.
                None => rows.push(row(0.0, CellStatus::Ok)),
                Some(CellOutcome::Overflow) => rows.push(row(f64::NAN, CellStatus::Overflow)),
                Some(CellOutcome::Underflow) => rows.push(row(f64::NAN, CellStatus::Underflow)),
                Some(CellOutcome::Ok { recon, .. }) => {
                    let reference = match cfg.baseline {
                        Baseline::DoubleId => &double_recons[&k],
                        Baseline::GroundTruth => a,
                    };
                    let value = rel_spectral_error(reference, &recon)?;
                    rows.push(row(value, CellStatus::Ok));
                }
            }
        }
    }
    Ok(rows)
}

/// Error against the baseline for every variant and every rank in
/// `cfg.k_list`, on the full-width dataset, one pass per seed.
pub fn run_rank_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let width = cfg.n_list[0];
    let mut rows = Vec::new();
    for s in 0..cfg.seeds {
        let seed = cfg.seed + u64::from(s);
        let a = dataset_instance(cfg, width, seed)?;
        rows.extend(sweep_cells(cfg, &a, &cfg.k_list, seed)?);
    }
    Ok(rows)
}

/// Error at one fixed rank while the column dimension grows: each width is
/// a prefix of the widest instance, so widths nest rather than resample.
pub fn run_coldim_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let width_full = *cfg.n_list.last().expect("validated nonempty");
    let mut rows = Vec::new();
    for s in 0..cfg.seeds {
        let seed = cfg.seed + u64::from(s);
        let full = dataset_instance(cfg, width_full, seed)?;
        if *cfg.n_list.last().unwrap() > full.cols() {
            return Err(Error::config(format!(
                "width {} exceeds the {}-column input",
                cfg.n_list.last().unwrap(),
                full.cols()
            )));
        }
        for &n in &cfg.n_list {
            let a = column_prefix(&full, n)?;
            rows.extend(sweep_cells(cfg, &a, &cfg.k_list, seed)?);
        }
    }
    Ok(rows)
}
