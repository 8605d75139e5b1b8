//! Self-contained SVG figures: RMSE against cumulative cost (mean line with
//! a shaded one-standard-deviation band, log RMSE axis) and the histogram of
//! selected fidelities.

use mfcv::harness::{FidelityHistRow, Strategy, SummaryRow};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

fn color(strategy: Strategy) -> &'static str {
    match strategy {
        Strategy::Mfcv => "#1f77b4",
        Strategy::Hf => "#d62728",
        Strategy::Sobol => "#2ca02c",
    }
}

fn strategies_in(rows: &[Strategy]) -> Vec<Strategy> {
    let mut seen = Vec::new();
    for s in rows {
        if !seen.contains(s) {
            seen.push(*s);
        }
    }
    seen
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min_log: f64,
    y_max_log: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-12);
        MARGIN_L + (v - self.x_min) / span * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        let lv = v.max(1e-300).log10().clamp(self.y_min_log, self.y_max_log);
        let span = (self.y_max_log - self.y_min_log).max(1e-12);
        HEIGHT - MARGIN_B - (lv - self.y_min_log) / span * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    )
}

fn axis_text(x: f64, y: f64, anchor: &str, text: &str) -> String {
    format!(
        "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"{anchor}\">{text}</text>\n"
    )
}

/// RMSE versus cumulative cost, one series per strategy.
pub fn rmse_vs_cost_svg(summary: &[SummaryRow]) -> String {
    let mut svg = svg_header();
    if summary.is_empty() {
        svg.push_str(&axis_text(
            WIDTH / 2.0,
            HEIGHT / 2.0,
            "middle",
            "no data",
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let x_min = 0.0;
    let x_max = summary.iter().map(|r| r.cost).fold(1.0, f64::max);
    let positive = |v: f64| if v > 0.0 { v } else { f64::NAN };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in summary {
        let low_band = positive((r.mean_rmse - r.std_rmse).max(r.mean_rmse * 1e-3));
        let high_band = positive(r.mean_rmse + r.std_rmse);
        for v in [positive(r.mean_rmse), low_band, high_band] {
            if v.is_finite() {
                lo = lo.min(v.log10());
                hi = hi.max(v.log10());
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo < 0.5 {
        let c = 0.5 * (hi + lo);
        lo = c - 0.25;
        hi = c + 0.25;
    }
    let frame = Frame {
        x_min,
        x_max,
        y_min_log: lo - 0.05 * (hi - lo),
        y_max_log: hi + 0.05 * (hi - lo),
    };

    // Axes and ticks.
    svg.push_str(&format!(
        "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{2:.1}\" y2=\"{1:.1}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R
    ));
    svg.push_str(&format!(
        "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        MARGIN_T
    ));
    for i in 0..=5 {
        let c = x_min + (x_max - x_min) * i as f64 / 5.0;
        let px = frame.x(c);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{0:.1}\" x2=\"{px:.1}\" y2=\"{1:.1}\" stroke=\"#cccccc\"/>\n",
            HEIGHT - MARGIN_B,
            MARGIN_T
        ));
        svg.push_str(&axis_text(px, HEIGHT - MARGIN_B + 18.0, "middle", &format!("{c:.0}")));
    }
    let dec_lo = frame.y_min_log.floor() as i64;
    let dec_hi = frame.y_max_log.ceil() as i64;
    for dec in dec_lo..=dec_hi {
        let v = 10f64.powi(dec as i32);
        let py = frame.y(v);
        if py < MARGIN_T || py > HEIGHT - MARGIN_B {
            continue;
        }
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{py:.1}\" x2=\"{1:.1}\" y2=\"{py:.1}\" stroke=\"#cccccc\"/>\n",
            MARGIN_L,
            WIDTH - MARGIN_R
        ));
        svg.push_str(&axis_text(MARGIN_L - 8.0, py + 4.0, "end", &format!("1e{dec}")));
    }
    svg.push_str(&axis_text(
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        "middle",
        "cumulative cost",
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">RMSE</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    ));

    let strategies = strategies_in(&summary.iter().map(|r| r.strategy).collect::<Vec<_>>());
    for (si, strategy) in strategies.iter().enumerate() {
        let rows: Vec<&SummaryRow> = summary.iter().filter(|r| r.strategy == *strategy).collect();
        let col = color(*strategy);
        if rows.len() == 1 {
            let r = rows[0];
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{col}\"/>\n",
                frame.x(r.cost),
                frame.y(r.mean_rmse)
            ));
        } else {
            // Shaded +-1 std band (clipped to stay on the log axis).
            let mut band = String::from("<path d=\"M");
            for r in &rows {
                band.push_str(&format!(
                    " {:.2} {:.2}",
                    frame.x(r.cost),
                    frame.y(r.mean_rmse + r.std_rmse)
                ));
            }
            for r in rows.iter().rev() {
                let low = (r.mean_rmse - r.std_rmse).max(r.mean_rmse * 1e-3);
                band.push_str(&format!(" L {:.2} {:.2}", frame.x(r.cost), frame.y(low)));
            }
            band.push_str(&format!(" Z\" fill=\"{col}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n"));
            svg.push_str(&band);

            let mut line = String::from("<polyline fill=\"none\" points=\"");
            for r in &rows {
                line.push_str(&format!("{:.2},{:.2} ", frame.x(r.cost), frame.y(r.mean_rmse)));
            }
            line.push_str(&format!("\" stroke=\"{col}\" stroke-width=\"1.8\"/>\n"));
            svg.push_str(&line);
        }
        // Legend.
        let ly = MARGIN_T + 18.0 * si as f64 + 10.0;
        svg.push_str(&format!(
            "<rect x=\"{0:.1}\" y=\"{1:.1}\" width=\"14\" height=\"4\" fill=\"{col}\"/>\n",
            WIDTH - MARGIN_R + 12.0,
            ly - 4.0
        ));
        svg.push_str(&axis_text(
            WIDTH - MARGIN_R + 32.0,
            ly + 2.0,
            "start",
            strategy.name(),
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Histogram of selected fidelities, grouped per strategy.
pub fn fidelity_hist_svg(hist: &[FidelityHistRow]) -> String {
    let mut svg = svg_header();
    if hist.is_empty() {
        svg.push_str(&axis_text(WIDTH / 2.0, HEIGHT / 2.0, "middle", "no data"));
        svg.push_str("</svg>\n");
        return svg;
    }
    let strategies = strategies_in(&hist.iter().map(|r| r.strategy).collect::<Vec<_>>());
    let max_fraction = hist.iter().map(|r| r.fraction).fold(0.0, f64::max).max(1e-9);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;

    svg.push_str(&format!(
        "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{2:.1}\" y2=\"{1:.1}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R
    ));
    svg.push_str(&format!(
        "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"black\"/>\n",
        MARGIN_L,
        HEIGHT - MARGIN_B,
        MARGIN_T
    ));
    svg.push_str(&axis_text(
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        "middle",
        "selected fidelity",
    ));

    for (si, strategy) in strategies.iter().enumerate() {
        let rows: Vec<&FidelityHistRow> =
            hist.iter().filter(|r| r.strategy == *strategy).collect();
        let col = color(*strategy);
        let nbins = rows.len().max(1);
        let group_w = plot_w / nbins as f64;
        let bar_w = group_w / (strategies.len() as f64 + 0.6);
        for (bi, row) in rows.iter().enumerate() {
            let h = row.fraction / max_fraction * plot_h;
            let x = MARGIN_L + bi as f64 * group_w + bar_w * (si as f64 + 0.3);
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{bar_w:.2}\" height=\"{h:.2}\" fill=\"{col}\" fill-opacity=\"0.8\"/>\n",
                HEIGHT - MARGIN_B - h
            ));
            if si == 0 {
                let label = if row.lo == row.hi {
                    format!("{:.2}", row.lo)
                } else {
                    format!("{:.1}-{:.1}", row.lo, row.hi)
                };
                svg.push_str(&axis_text(
                    MARGIN_L + (bi as f64 + 0.5) * group_w,
                    HEIGHT - MARGIN_B + 18.0,
                    "middle",
                    &label,
                ));
            }
        }
        let ly = MARGIN_T + 18.0 * si as f64 + 10.0;
        svg.push_str(&format!(
            "<rect x=\"{0:.1}\" y=\"{1:.1}\" width=\"14\" height=\"8\" fill=\"{col}\"/>\n",
            WIDTH - MARGIN_R + 12.0,
            ly - 6.0
        ));
        svg.push_str(&axis_text(
            WIDTH - MARGIN_R + 32.0,
            ly + 2.0,
            "start",
            strategy.name(),
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_curve_renders_marker() {
        let rows = vec![SummaryRow {
            strategy: Strategy::Mfcv,
            cost: 0.0,
            mean_rmse: 1.5,
            std_rmse: 0.0,
        }];
        let svg = rmse_vs_cost_svg(&rows);
        assert!(svg.contains("<circle"));
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn two_strategies_render_two_series_with_legend() {
        let mk = |st: Strategy, c: f64, m: f64| SummaryRow {
            strategy: st,
            cost: c,
            mean_rmse: m,
            std_rmse: 0.1 * m,
        };
        let rows = vec![
            mk(Strategy::Mfcv, 0.0, 2.0),
            mk(Strategy::Mfcv, 100.0, 1.0),
            mk(Strategy::Hf, 0.0, 2.0),
            mk(Strategy::Hf, 550.0, 0.5),
        ];
        let svg = rmse_vs_cost_svg(&rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">mfcv<") && svg.contains(">hf<"));
        // Zero-width band still renders (collapsed onto the line).
        let rows0: Vec<SummaryRow> = rows
            .iter()
            .map(|r| SummaryRow {
                std_rmse: 0.0,
                ..r.clone()
            })
            .collect();
        assert!(rmse_vs_cost_svg(&rows0).contains("<path"));
    }

    #[test]
    fn histogram_renders_bars() {
        let rows = vec![
            FidelityHistRow {
                strategy: Strategy::Mfcv,
                lo: 0.0,
                hi: 0.0,
                count: 3,
                fraction: 0.3,
            },
            FidelityHistRow {
                strategy: Strategy::Mfcv,
                lo: 1.0,
                hi: 1.0,
                count: 7,
                fraction: 0.7,
            },
        ];
        let svg = fidelity_hist_svg(&rows);
        assert!(svg.matches("<rect").count() >= 3);
    }
}
