//! Single-panel SVG line chart of sweep results.
//!
//! X is the rank (or the column dimension for the column sweep), y is the
//! error on a log scale, one polyline per variant series. A cell that did
//! not finish (underflow or overflow) truncates its curve: segments stop at
//! the last successful cell, mirroring how a factorization that breaks at
//! some rank simply has no data beyond it.

use super::{CellStatus, ExperimentKind, HarnessVariant, ResultRow};
use crate::error::Result;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 44.0;
const MARGIN_B: f64 = 56.0;

/// Values at or below this plot on the bottom gridline; exact zeros (a
/// variant compared against itself) stay visible instead of escaping a log
/// axis.
const Y_FLOOR: f64 = 1e-18;

fn color(v: HarnessVariant) -> &'static str {
    match v {
        HarnessVariant::Double => "#1f77b4",
        HarnessVariant::Single => "#ff7f0e",
        HarnessVariant::Half => "#2ca02c",
        HarnessVariant::MixedSingle => "#d62728",
        HarnessVariant::MixedHalf => "#9467bd",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Point {
    x: f64,
    y: f64,
    ok: bool,
}

/// Writes the chart for `rows`; per-column rom rows are excluded, only each
/// variant's curve over the sweep axis is drawn.
pub fn write_svg<W: Write>(rows: &[ResultRow], w: &mut W) -> std::io::Result<()> {
    let plot_rows: Vec<&ResultRow> = rows.iter().filter(|r| r.holdout_col.is_none()).collect();
    let experiment = plot_rows.first().map(|r| r.experiment);
    let x_of = |r: &ResultRow| -> f64 {
        match experiment {
            Some(ExperimentKind::ColdimSweep) => r.n as f64,
            _ => r.k as f64,
        }
    };

    let mut series: BTreeMap<(HarnessVariant, u64), Vec<Point>> = BTreeMap::new();
    for r in &plot_rows {
        series.entry((r.variant, r.seed)).or_default().push(Point {
            x: x_of(r),
            y: if r.error_value.is_finite() {
                r.error_value.max(Y_FLOOR)
            } else {
                f64::NAN
            },
            ok: r.status == CellStatus::Ok && r.error_value.is_finite(),
        });
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    }
    let multi_seed = {
        let mut seeds: Vec<u64> = series.keys().map(|&(_, s)| s).collect();
        seeds.sort_unstable();
        seeds.dedup();
        seeds.len() > 1
    };

    let mut xs: Vec<f64> = Vec::new();
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for pts in series.values() {
        for p in pts {
            xs.push(p.x);
            if p.ok {
                ymin = ymin.min(p.y);
                ymax = ymax.max(p.y);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    let title = match plot_rows.first() {
        Some(r) => format!(
            "{} on {}",
            r.experiment.as_str(),
            r.dataset.split(':').next().unwrap_or(&r.dataset)
        ),
        None => "no data".to_string(),
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="26" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        escape(&title)
    );

    if ymin.is_finite() && !xs.is_empty() {
        let (xmin, xmax) = {
            let lo = xs[0];
            let hi = xs[xs.len() - 1];
            if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let dec_lo = ymin.log10().floor() as i32;
        let dec_hi = {
            let h = ymax.log10().ceil() as i32;
            if h == dec_lo {
                dec_lo + 1
            } else {
                h
            }
        };
        let plot_w = WIDTH - MARGIN_L - MARGIN_R;
        let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
        let px = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
        let py = |v: f64| {
            MARGIN_T + (dec_hi as f64 - v.log10()) / (dec_hi - dec_lo) as f64 * plot_h
        };

        // Gridlines and y tick labels, one per decade (thinned when tall).
        let step = (((dec_hi - dec_lo) as usize).div_ceil(8)).max(1) as i32;
        let mut d = dec_lo;
        while d <= dec_hi {
            let y = py(10f64.powi(d));
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_L:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
                MARGIN_L + plot_w
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{d}</text>"#,
                MARGIN_L - 8.0,
                y + 4.0
            );
            d += step;
        }
        // X ticks over the distinct sweep values, thinned to at most 12.
        let xstep = (xs.len().div_ceil(12)).max(1);
        for x in xs.iter().step_by(xstep) {
            let xp = px(*x);
            let _ = writeln!(
                svg,
                r##"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="#bbbbbb" stroke-width="1"/>"##,
                MARGIN_T + plot_h,
                MARGIN_T + plot_h + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{xp:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{x}</text>"#,
                MARGIN_T + plot_h + 18.0
            );
        }
        // Axis frame.
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN_L:.2}" y1="{MARGIN_T:.2}" x2="{MARGIN_L:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            MARGIN_T + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{MARGIN_L:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            MARGIN_T + plot_h,
            MARGIN_L + plot_w,
            MARGIN_T + plot_h
        );
        let x_label = match experiment {
            Some(ExperimentKind::ColdimSweep) => "columns n",
            _ => "rank k",
        };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>"#,
            MARGIN_L + plot_w / 2.0,
            HEIGHT - 14.0
        );
        let y_label = plot_rows
            .first()
            .map(|r| r.error_kind.as_str())
            .unwrap_or("error");
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
            MARGIN_T + plot_h / 2.0,
            MARGIN_T + plot_h / 2.0
        );

        // Curves: a run of consecutive ok cells becomes one polyline, so a
        // failed cell truncates the curve.
        let mut legend_y = MARGIN_T + 10.0;
        for ((variant, seed), pts) in &series {
            let stroke = color(*variant);
            let mut run: Vec<(f64, f64)> = Vec::new();
            let flush = |run: &mut Vec<(f64, f64)>, svg: &mut String| {
                if run.len() >= 2 {
                    let points: Vec<String> = run
                        .iter()
                        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
                        .collect();
                    let _ = writeln!(
                        svg,
                        r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.8" points="{}"/>"#,
                        points.join(" ")
                    );
                }
                run.clear();
            };
            for p in pts {
                if p.ok {
                    run.push((p.x, p.y));
                } else {
                    flush(&mut run, &mut svg);
                }
            }
            flush(&mut run, &mut svg);
            for p in pts.iter().filter(|p| p.ok) {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{stroke}"/>"#,
                    px(p.x),
                    py(p.y)
                );
            }
            let name = if multi_seed {
                format!("{} s{seed}", variant.as_str())
            } else {
                variant.as_str().to_string()
            };
            let lx = WIDTH - MARGIN_R + 14.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-width="1.8"/>"#,
                legend_y - 4.0,
                lx + 22.0,
                legend_y - 4.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{legend_y:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 28.0,
                escape(&name)
            );
            legend_y += 18.0;
        }
    } else {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">no successful cells</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
    }

    let _ = writeln!(svg, "</svg>");
    w.write_all(svg.as_bytes())
}

pub fn emit_svg(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_svg(rows, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}
