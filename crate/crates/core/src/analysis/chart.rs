//! Static SVG: per substation, grouped bars (bay × method) on a 0–10 axis and
//! a donut of the asset HI band distribution.

use std::fmt::Write;

use super::emit::format_fixed4;
use super::{ComparisonReport, SubstationComparison};
use crate::model::{ColorBand, Method};

/// Pixels per HI unit on the bar axis.
pub const BAR_SCALE: f64 = 24.0;
pub const CHART_Y_MAX: f64 = 10.0;

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;
const BAR_WIDTH: f64 = 14.0;
const GROUP_GAP: f64 = 18.0;
const DONUT_BOX: f64 = 200.0;
const DONUT_RADIUS: f64 = 60.0;
const DONUT_STROKE: f64 = 22.0;
const MIN_PLOT_WIDTH: f64 = 200.0;
const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\"";

fn method_color(m: Method) -> &'static str {
    match m {
        Method::WeightedAverage => "#1f77b4",
        Method::Fmeca => "#ff7f0e",
        Method::ReplacementCost => "#2ca02c",
        Method::FailureInterpretation => "#9467bd",
    }
}

fn band_color(b: ColorBand) -> &'static str {
    match b {
        ColorBand::Green => "#2e7d32",
        ColorBand::Orange => "#ef6c00",
        ColorBand::Red => "#c62828",
        ColorBand::Violet => "#6a1b9a",
        ColorBand::White => "#d0d0d0",
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn px(x: f64) -> String {
    format!("{x:.2}")
}

fn plot_height() -> f64 {
    CHART_Y_MAX * BAR_SCALE
}

fn panel_size(sub: &SubstationComparison, n_methods: usize) -> (f64, f64) {
    let group = n_methods as f64 * BAR_WIDTH + GROUP_GAP;
    let plot_w = (sub.bays.len() as f64 * group).max(MIN_PLOT_WIDTH);
    (
        MARGIN_LEFT + plot_w + GROUP_GAP + DONUT_BOX,
        MARGIN_TOP + plot_height() + MARGIN_BOTTOM,
    )
}

/// Render the report as one SVG document, one panel per substation.
pub fn emit_chart(report: &ComparisonReport) -> String {
    let n_methods = report.methods.len();
    let sizes: Vec<(f64, f64)> = report
        .substations
        .iter()
        .map(|s| panel_size(s, n_methods))
        .collect();
    let legend_h = 28.0;
    let width = sizes.iter().map(|s| s.0).fold(MARGIN_LEFT + MIN_PLOT_WIDTH + DONUT_BOX, f64::max);
    let height = legend_h + sizes.iter().map(|s| s.1).sum::<f64>();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = px(width),
        h = px(height)
    );
    svg.push_str(
        "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" patternTransform=\"rotate(45)\">\
<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#888888\" stroke-width=\"2\"/></pattern></defs>\n",
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        px(width),
        px(height)
    );

    for (i, &m) in report.methods.iter().enumerate() {
        let x = MARGIN_LEFT + i as f64 * 150.0;
        let _ = writeln!(
            svg,
            "<rect class=\"legend\" x=\"{}\" y=\"8\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{}\" y=\"18\" {FONT} font-size=\"12\">{}</text>",
            px(x),
            method_color(m),
            px(x + 16.0),
            m.as_str()
        );
    }

    let mut y0 = legend_h;
    for (sub, &(_, h)) in report.substations.iter().zip(&sizes) {
        render_panel(&mut svg, sub, &report.methods, y0);
        y0 += h;
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(svg: &mut String, sub: &SubstationComparison, methods: &[Method], y0: f64) {
    let sid = esc(&sub.substation_id);
    let top = y0 + MARGIN_TOP;
    let base = top + plot_height();
    let group = methods.len() as f64 * BAR_WIDTH + GROUP_GAP;
    let plot_w = (sub.bays.len() as f64 * group).max(MIN_PLOT_WIDTH);

    let _ = writeln!(svg, "<g class=\"panel\" data-substation=\"{sid}\">");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"15\" font-weight=\"bold\">Substation {sid}: bay HI by method</text>",
        px(MARGIN_LEFT),
        px(y0 + 28.0)
    );

    for tick in (0..=10).step_by(2) {
        let y = base - tick as f64 * BAR_SCALE;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#e6e6e6\"/><text x=\"{}\" y=\"{}\" {FONT} font-size=\"11\" text-anchor=\"end\">{tick}</text>",
            px(MARGIN_LEFT),
            px(MARGIN_LEFT + plot_w),
            px(MARGIN_LEFT - 6.0),
            px(y + 4.0),
            y = px(y),
        );
    }
    let _ = writeln!(
        svg,
        "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#333333\"/><line x1=\"{x}\" y1=\"{b}\" x2=\"{}\" y2=\"{b}\" stroke=\"#333333\"/>",
        px(top),
        px(base),
        px(MARGIN_LEFT + plot_w),
        x = px(MARGIN_LEFT),
        b = px(base),
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{y}\" {FONT} font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {y})\">HI score</text>",
        y = px(top + plot_height() / 2.0)
    );

    for (bi, bay) in sub.bays.iter().enumerate() {
        let gx = MARGIN_LEFT + GROUP_GAP / 2.0 + bi as f64 * group;
        let bid = esc(&bay.bay_id);
        for (mi, r) in bay.results.iter().enumerate() {
            let x = gx + mi as f64 * BAR_WIDTH;
            match r.score {
                Some(score) => {
                    // draw the reported 4-decimal value so a chart rebuilt from
                    // a saved report is byte-identical
                    let score: f64 = format_fixed4(score).parse().expect("decimal");
                    let shown = score.clamp(0.0, CHART_Y_MAX);
                    let h = shown * BAR_SCALE;
                    let class = if score > CHART_Y_MAX { "bar clipped" } else { "bar" };
                    let _ = writeln!(
                        svg,
                        "<rect class=\"{class}\" data-bay=\"{bid}\" data-method=\"{}\" data-score=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                        r.method.as_str(),
                        format_fixed4(score),
                        px(x),
                        format_fixed4(base - h),
                        px(BAR_WIDTH - 2.0),
                        format_fixed4(h),
                        method_color(r.method),
                    );
                    if score > CHART_Y_MAX {
                        let _ = writeln!(
                            svg,
                            "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"9\" text-anchor=\"middle\">{}</text>",
                            px(x + BAR_WIDTH / 2.0 - 1.0),
                            px(top - 4.0),
                            format_fixed4(score)
                        );
                    }
                }
                None => {
                    let _ = writeln!(
                        svg,
                        "<rect class=\"bar indeterminate\" data-bay=\"{bid}\" data-method=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"url(#hatch)\" stroke=\"{}\"/><text x=\"{}\" y=\"{}\" {FONT} font-size=\"9\" text-anchor=\"middle\">n/a</text>",
                        r.method.as_str(),
                        px(x),
                        px(top),
                        px(BAR_WIDTH - 2.0),
                        px(plot_height()),
                        method_color(r.method),
                        px(x + BAR_WIDTH / 2.0 - 1.0),
                        px(top - 4.0),
                    );
                }
            }
        }
        let lx = gx + methods.len() as f64 * BAR_WIDTH / 2.0;
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{y}\" {FONT} font-size=\"10\" text-anchor=\"end\" transform=\"rotate(-45 {x} {y})\">{bid}</text>",
            x = px(lx),
            y = px(base + 14.0),
        );
    }

    render_donut(svg, sub, MARGIN_LEFT + plot_w + GROUP_GAP, top);
    svg.push_str("</g>\n");
}

fn render_donut(svg: &mut String, sub: &SubstationComparison, x0: f64, top: f64) {
    let cx = x0 + DONUT_BOX / 2.0;
    let cy = top + DONUT_RADIUS + DONUT_STROKE;
    let circ = 2.0 * std::f64::consts::PI * DONUT_RADIUS;
    let _ = writeln!(
        svg,
        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#f2f2f2\" stroke-width=\"{}\"/>",
        px(cx),
        px(cy),
        px(DONUT_RADIUS),
        px(DONUT_STROKE)
    );
    let mut offset = 0.0;
    for (band, &frac) in &sub.band_distribution {
        if frac <= 0.0 {
            continue;
        }
        let len = frac * circ;
        let _ = writeln!(
            svg,
            "<circle class=\"donut-slice\" data-band=\"{}\" data-fraction=\"{}\" cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\" stroke-dashoffset=\"{}\" transform=\"rotate(-90 {cx} {cy})\"/>",
            band.as_str(),
            format_fixed4(frac),
            px(DONUT_RADIUS),
            band_color(*band),
            px(DONUT_STROKE),
            format_fixed4(len),
            format_fixed4(circ),
            format_fixed4(-offset),
            cx = px(cx),
            cy = px(cy),
        );
        offset += len;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"12\" text-anchor=\"middle\">{} assets</text>",
        px(cx),
        px(cy + 4.0),
        sub.n_assets
    );
    let mut ly = cy + DONUT_RADIUS + DONUT_STROKE + 8.0;
    for (band, &frac) in &sub.band_distribution {
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/><text x=\"{}\" y=\"{}\" {FONT} font-size=\"10\">{} {:.1}%</text>",
            px(x0 + 30.0),
            px(ly),
            band_color(*band),
            px(x0 + 44.0),
            px(ly + 9.0),
            band.as_str(),
            frac * 100.0
        );
        ly += 13.0;
    }
}
