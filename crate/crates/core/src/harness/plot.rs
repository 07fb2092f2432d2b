//! Two-panel SVG line chart of training curves.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::metrics::MetricsLog;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 180.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 70.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One labeled run to draw.
#[derive(Debug, Clone, Copy)]
pub struct PlotRun<'a> {
    pub label: &'a str,
    pub log: &'a MetricsLog,
}

struct Panel<'a> {
    title: &'a str,
    y_label: &'a str,
    series: Vec<Vec<(f64, f64)>>,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&c| c >= v)
        .unwrap_or(10.0 * mag)
}

fn draw_panel(svg: &mut String, panel: &Panel, top: f64, x_max: f64, labels: &[&str]) {
    let left = MARGIN_LEFT;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let h = PANEL_HEIGHT;
    let y_max = nice_max(
        panel
            .series
            .iter()
            .flatten()
            .map(|&(_, y)| y)
            .fold(0.0, f64::max),
    );
    let sx = |x: f64| left + x / x_max * plot_w;
    let sy = |y: f64| top + h - y / y_max * h;

    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="15" font-weight="bold">{}</text>"##,
        left,
        top - 12.0,
        escape(panel.title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{left:.1}" y="{top:.1}" width="{plot_w:.1}" height="{h:.1}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=4 {
        let yv = y_max * i as f64 / 4.0;
        let y = sy(yv);
        let _ = writeln!(
            svg,
            r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"##,
            left + plot_w,
            left - 6.0,
            y + 4.0,
            trim_number(yv)
        );
        let xv = x_max * i as f64 / 4.0;
        let x = sx(xv);
        let _ = writeln!(
            svg,
            r##"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"##,
            top + h + 16.0,
            trim_number(xv)
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">step</text>"##,
        left + plot_w / 2.0,
        top + h + 34.0
    );
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"##,
        left - 48.0,
        top + h / 2.0,
        left - 48.0,
        top + h / 2.0,
        escape(panel.y_label)
    );

    for (i, points) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r##"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"##,
            escape(labels[i]),
            path.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + plot_w + 16.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="3"/><text class="legend" x="{:.1}" y="{:.1}" font-size="12">{}</text>"##,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(labels[i])
        );
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Renders zero-reward groups and pass@1 against step, one series per run.
pub fn render_plot(runs: &[PlotRun]) -> Result<String> {
    if runs.is_empty() {
        return Err(Error::Plot("no runs given".into()));
    }
    if let Some(run) = runs.iter().find(|r| r.log.is_empty()) {
        return Err(Error::Plot(format!(
            "metrics log for '{}' has no rows",
            run.label
        )));
    }
    let x_max = nice_max(
        runs.iter()
            .filter_map(|r| r.log.last())
            .map(|row| row.step as f64)
            .fold(0.0, f64::max),
    );
    let labels: Vec<&str> = runs.iter().map(|r| r.label).collect();
    let zero = Panel {
        title: "Zero-reward groups per batch",
        y_label: "zero_reward_groups",
        series: runs
            .iter()
            .map(|r| {
                r.log
                    .rows
                    .iter()
                    .map(|row| (row.step as f64, row.zero_reward_groups as f64))
                    .collect()
            })
            .collect(),
    };
    let pass = Panel {
        title: "Greedy pass@1",
        y_label: "val_pass1",
        series: runs
            .iter()
            .map(|r| r.log.evaluations().map(|(s, v)| (s as f64, v)).collect())
            .collect(),
    };
    let height = MARGIN_TOP + 2.0 * PANEL_HEIGHT + PANEL_GAP + 50.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"##
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="white"/>"##);
    draw_panel(&mut svg, &zero, MARGIN_TOP, x_max, &labels);
    draw_panel(
        &mut svg,
        &pass,
        MARGIN_TOP + PANEL_HEIGHT + PANEL_GAP,
        x_max,
        &labels,
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(runs: &[PlotRun], path: impl AsRef<Path>) -> Result<()> {
    let svg = render_plot(runs)?;
    std::fs::write(path, svg)?;
    Ok(())
}
