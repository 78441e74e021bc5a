//! Deterministic SVG phase-diagram heatmap.
//!
//! One panel per `(family, kappa)` group: `n` on a log10 x-axis, `k`
//! ascending up the y-axis, each cell colored by success rate. Cells with
//! `n <= k` (no instance exists) render gray. Every panel carries the
//! `n = k^2` reference curve along which the phase boundary is expected.
//! Output bytes are a pure function of the summaries: fixed float
//! formatting, no timestamps, no randomness.

use crate::error::{Error, Result};
use crate::harness::CellSummary;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Color at success rate 0 (dark violet) and 1 (yellow); linear
/// interpolation per channel in between.
pub const RAMP_LOW: (u8, u8, u8) = (0x44, 0x01, 0x54);
pub const RAMP_HIGH: (u8, u8, u8) = (0xfd, 0xe7, 0x25);
/// Fill for skipped (n <= k) cells.
pub const SKIPPED_FILL: &str = "#cccccc";

/// Success-rate color: linear ramp from [`RAMP_LOW`] to [`RAMP_HIGH`].
pub fn ramp_color(rate: f64) -> String {
    let t = rate.clamp(0.0, 1.0);
    let ch = |lo: u8, hi: u8| -> u8 { (f64::from(lo) + (f64::from(hi) - f64::from(lo)) * t).round() as u8 };
    format!(
        "#{:02x}{:02x}{:02x}",
        ch(RAMP_LOW.0, RAMP_HIGH.0),
        ch(RAMP_LOW.1, RAMP_HIGH.1),
        ch(RAMP_LOW.2, RAMP_HIGH.2)
    )
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 96.0;
const PANEL_TITLE_H: f64 = 36.0;
const AXIS_H: f64 = 30.0;
const PANEL_GAP: f64 = 14.0;
const PLOT_W: f64 = 560.0;
const ROW_H: f64 = 30.0;

/// Render the phase heatmap for a set of cell summaries.
///
/// The summaries must tile a rectangular grid: for each `(family, kappa)`
/// present, exactly one cell per `(n, k)` in the cross product of all n and
/// k values with `n > k`.
pub fn render_heatmap(cells: &[CellSummary]) -> Result<String> {
    if cells.is_empty() {
        return Err(Error::Parameter("no cells to render".into()));
    }
    let mut n_set: Vec<usize> = cells.iter().map(|c| c.n).collect();
    n_set.sort_unstable();
    n_set.dedup();
    let mut k_set: Vec<usize> = cells.iter().map(|c| c.k).collect();
    k_set.sort_unstable();
    k_set.dedup();

    // Group panels and check rectangularity.
    let mut panels: BTreeMap<(String, u64), BTreeMap<(usize, usize), &CellSummary>> =
        BTreeMap::new();
    for c in cells {
        let prev = panels
            .entry((c.family.clone(), c.kappa.to_bits()))
            .or_default()
            .insert((c.n, c.k), c);
        if prev.is_some() {
            return Err(Error::Parameter(format!(
                "duplicate cell (n={}, k={}) for {} kappa={}",
                c.n, c.k, c.family, c.kappa
            )));
        }
    }
    for ((family, kappa_bits), grid) in &panels {
        let kappa = f64::from_bits(*kappa_bits);
        for &n in &n_set {
            for &k in &k_set {
                let expected = n > k;
                let present = grid.contains_key(&(n, k));
                if expected && !present {
                    return Err(Error::Parameter(format!(
                        "sweep grid is not rectangular: {family} kappa={kappa} is missing cell (n={n}, k={k})"
                    )));
                }
                if !expected && present {
                    return Err(Error::Parameter(format!(
                        "cell (n={n}, k={k}) with n <= k present for {family} kappa={kappa}"
                    )));
                }
            }
        }
    }

    // Log-scaled column geometry shared by all panels.
    let logs: Vec<f64> = n_set.iter().map(|&n| (n as f64).log10()).collect();
    let mut bounds = Vec::with_capacity(logs.len() + 1);
    let first_gap = if logs.len() > 1 { logs[1] - logs[0] } else { 1.0 };
    let last_gap = if logs.len() > 1 { logs[logs.len() - 1] - logs[logs.len() - 2] } else { 1.0 };
    bounds.push(logs[0] - first_gap / 2.0);
    for w in logs.windows(2) {
        bounds.push((w[0] + w[1]) / 2.0);
    }
    bounds.push(logs[logs.len() - 1] + last_gap / 2.0);
    let (lo, hi) = (bounds[0], bounds[bounds.len() - 1]);
    let x_of = |logn: f64| -> f64 { MARGIN_LEFT + (logn - lo) / (hi - lo) * PLOT_W };

    let plot_h = ROW_H * k_set.len() as f64;
    let panel_h = PANEL_TITLE_H + plot_h + AXIS_H;
    let total_w = MARGIN_LEFT + PLOT_W + MARGIN_RIGHT;
    let total_h = PANEL_GAP + panels.len() as f64 * (panel_h + PANEL_GAP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w:.2}\" height=\"{total_h:.2}\" viewBox=\"0 0 {total_w:.2} {total_h:.2}\" font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{total_w:.2}\" height=\"{total_h:.2}\" fill=\"#ffffff\"/>");

    for (panel_idx, ((family, kappa_bits), grid)) in panels.iter().enumerate() {
        let kappa = f64::from_bits(*kappa_bits);
        let top = PANEL_GAP + panel_idx as f64 * (panel_h + PANEL_GAP);
        let plot_top = top + PANEL_TITLE_H;
        let plot_bottom = plot_top + plot_h;

        let _ = writeln!(
            svg,
            "<text x=\"{MARGIN_LEFT:.2}\" y=\"{:.2}\" font-weight=\"bold\">{} kappa={} (success rate, delta-threshold recovery)</text>",
            top + 22.0,
            esc(family),
            kappa
        );

        // Row centers, k ascending upward.
        let row_top =
            |ki: usize| -> f64 { plot_bottom - (ki as f64 + 1.0) * ROW_H };

        for (ki, &k) in k_set.iter().enumerate() {
            let y = row_top(ki);
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">k={k}</text>",
                MARGIN_LEFT - 8.0,
                y + ROW_H / 2.0 + 4.0
            );
            for (ni, &n) in n_set.iter().enumerate() {
                let x0 = x_of(bounds[ni]);
                let x1 = x_of(bounds[ni + 1]);
                let w = x1 - x0;
                if n > k {
                    let c = grid[&(n, k)];
                    let fill = ramp_color(c.success_rate);
                    let _ = write!(
                        svg,
                        "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{ROW_H:.2}\" fill=\"{fill}\" stroke=\"#ffffff\" stroke-width=\"1\">"
                    );
                    let median = if c.median_dist.is_nan() {
                        "NaN".to_string()
                    } else {
                        format!("{:.4}", c.median_dist)
                    };
                    let witness = match c.witness_beat_rate {
                        Some(w) => format!(" witness_beat_rate={w:.4}"),
                        None => String::new(),
                    };
                    let _ = writeln!(
                        svg,
                        "<title>n={n} k={k} success_rate={:.4} median_dist={median}{witness}</title></rect>",
                        c.success_rate
                    );
                } else {
                    let _ = writeln!(
                        svg,
                        "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{ROW_H:.2}\" fill=\"{SKIPPED_FILL}\" stroke=\"#ffffff\" stroke-width=\"1\"><title>n={n} k={k} skipped (n &lt;= k)</title></rect>"
                    );
                }
            }
        }

        // n tick labels.
        for (ni, &n) in n_set.iter().enumerate() {
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{n}</text>",
                x_of(logs[ni]),
                plot_bottom + 18.0
            );
        }

        // Reference curve n = k^2, piecewise-linear through row centers.
        let k_min = k_set[0] as f64;
        let k_max = k_set[k_set.len() - 1] as f64;
        let y_of_k = |kv: f64| -> Option<f64> {
            if kv < k_min || kv > k_max {
                return None;
            }
            // Find the bracketing k rows.
            let centers: Vec<f64> = (0..k_set.len())
                .map(|ki| plot_bottom - (ki as f64 + 0.5) * ROW_H)
                .collect();
            for ki in 0..k_set.len() - 1 {
                let (ka, kb) = (k_set[ki] as f64, k_set[ki + 1] as f64);
                if kv >= ka && kv <= kb {
                    let t = (kv - ka) / (kb - ka);
                    return Some(centers[ki] + t * (centers[ki + 1] - centers[ki]));
                }
            }
            None
        };
        let mut points = String::new();
        if k_set.len() == 1 {
            // One row: the curve degenerates to the single n = k^2
            // crossing; mark it as a vertical segment across the row.
            let log_cross = 2.0 * (k_set[0] as f64).log10();
            if log_cross >= lo && log_cross <= hi {
                let x = x_of(log_cross);
                let _ = write!(
                    points,
                    "{x:.2},{:.2} {x:.2},{:.2}",
                    plot_bottom,
                    plot_bottom - ROW_H
                );
            }
        } else {
            let steps = 120;
            for s in 0..=steps {
                let logn = lo + (hi - lo) * s as f64 / steps as f64;
                let kv = 10f64.powf(logn / 2.0); // k = sqrt(n)
                if let Some(y) = y_of_k(kv) {
                    let _ = write!(points, "{:.2},{y:.2} ", x_of(logn));
                }
            }
        }
        if !points.is_empty() {
            let _ = writeln!(
                svg,
                "<polyline id=\"ref-curve-{panel_idx}\" points=\"{}\" fill=\"none\" stroke=\"#e4572e\" stroke-width=\"2\" stroke-dasharray=\"5 3\"><title>n = k^2</title></polyline>",
                points.trim_end()
            );
        }

        // Legend: vertical ramp bar, rate 1 at the top.
        let legend_x = MARGIN_LEFT + PLOT_W + 24.0;
        let segs = 24;
        let seg_h = plot_h / segs as f64;
        for s in 0..segs {
            let rate = 1.0 - (s as f64 + 0.5) / segs as f64;
            let y = plot_top + s as f64 * seg_h;
            let _ = writeln!(
                svg,
                "<rect x=\"{legend_x:.2}\" y=\"{y:.2}\" width=\"14\" height=\"{:.2}\" fill=\"{}\"/>",
                seg_h + 0.5,
                ramp_color(rate)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">1</text>",
            legend_x + 20.0,
            plot_top + 10.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">0</text>",
            legend_x + 20.0,
            plot_bottom
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
