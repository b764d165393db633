//! Timeline CSV and SVG chart output.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compare::ComparisonReport;
use crate::error::{Error, Result};
use crate::trace::{TimelineRecord, TracePolicy};

pub const TIMELINE_COLUMNS: [&str; 11] = [
    "t",
    "theta_cur_gbps",
    "policy",
    "smartnic_util",
    "cpu_util",
    "crossings",
    "latency_us",
    "max_throughput_gbps",
    "migrations_this_step",
    "cumulative_migrations",
    "outcome",
];

/// Separator inside the `migrations_this_step` cell.
const ID_SEPARATOR: char = ';';

#[derive(Serialize, Deserialize)]
struct Row {
    t: f64,
    theta_cur_gbps: f64,
    policy: String,
    smartnic_util: f64,
    cpu_util: f64,
    crossings: usize,
    latency_us: f64,
    max_throughput_gbps: f64,
    migrations_this_step: String,
    cumulative_migrations: usize,
    outcome: String,
}

pub fn write_timeline_csv(records: &[TimelineRecord], out: impl Write) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(TIMELINE_COLUMNS)?;
    for r in records {
        w.serialize(Row {
            t: r.t,
            theta_cur_gbps: r.theta_cur,
            policy: r.policy.as_str().to_string(),
            smartnic_util: r.smartnic_util,
            cpu_util: r.cpu_util,
            crossings: r.crossings,
            latency_us: r.latency_us,
            max_throughput_gbps: r.max_throughput_gbps,
            migrations_this_step: r.migrations_this_step.join(&ID_SEPARATOR.to_string()),
            cumulative_migrations: r.cumulative_migrations,
            outcome: r.outcome.as_str().to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn timeline_csv_string(records: &[TimelineRecord]) -> String {
    let mut buf = Vec::new();
    write_timeline_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// Parses a timeline written by [`write_timeline_csv`].
pub fn read_timeline_csv(input: impl Read) -> std::result::Result<Vec<TimelineRecord>, String> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| e.to_string())?;
    if headers.iter().collect::<Vec<_>>() != TIMELINE_COLUMNS {
        return Err("unexpected timeline header".into());
    }
    rdr.deserialize::<Row>()
        .map(|row| {
            let row = row.map_err(|e| e.to_string())?;
            Ok(TimelineRecord {
                t: row.t,
                theta_cur: row.theta_cur_gbps,
                policy: row.policy.parse::<TracePolicy>()?,
                smartnic_util: row.smartnic_util,
                cpu_util: row.cpu_util,
                crossings: row.crossings,
                latency_us: row.latency_us,
                max_throughput_gbps: row.max_throughput_gbps,
                migrations_this_step: if row.migrations_this_step.is_empty() {
                    Vec::new()
                } else {
                    row.migrations_this_step
                        .split(ID_SEPARATOR)
                        .map(str::to_string)
                        .collect()
                },
                cumulative_migrations: row.cumulative_migrations,
                outcome: row.outcome.parse()?,
            })
        })
        .collect()
}

pub fn emit_timeline_csv(records: &[TimelineRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, timeline_csv_string(records)).map_err(|e| Error::io(path, e))
}

pub fn emit_svg(svg: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 260.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_B: f64 = 48.0;
const MARGIN_T: f64 = 36.0;
const COLORS: [&str; 3] = ["#9e9e9e", "#d95f02", "#1b9e77"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Upper axis bound: the maximum rounded up to a "nice" step.
fn axis_max(values: impl Iterator<Item = f64>) -> f64 {
    let max = values.filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    if max <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(max.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&v| v >= max)
        .unwrap_or(10.0 * mag)
}

fn panel_frame(svg: &mut String, x0: f64, title: &str, unit: &str, ymax: f64) {
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
        x0 + PANEL_W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{x:.1}" y1="{t:.1}" x2="{x:.1}" y2="{b:.1}" stroke="#000"/><line x1="{x:.1}" y1="{b:.1}" x2="{r:.1}" y2="{b:.1}" stroke="#000"/>"##,
        x = x0 + MARGIN_L,
        t = MARGIN_T,
        b = MARGIN_T + plot_h,
        r = x0 + PANEL_W - 10.0
    );
    for k in 0..=4 {
        let v = ymax * k as f64 / 4.0;
        let y = MARGIN_T + plot_h * (1.0 - k as f64 / 4.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
            x0 + MARGIN_L - 4.0,
            y + 3.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" transform="rotate(-90 {:.1} {:.1})" text-anchor="middle">{}</text>"#,
        x0 + 14.0,
        MARGIN_T + plot_h / 2.0,
        x0 + 14.0,
        MARGIN_T + plot_h / 2.0,
        escape(unit)
    );
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn bar_panel(svg: &mut String, x0: f64, title: &str, unit: &str, bars: &[(&str, f64)]) {
    let ymax = axis_max(bars.iter().map(|b| b.1));
    panel_frame(svg, x0, title, unit, ymax);
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let plot_w = PANEL_W - MARGIN_L - 10.0;
    let slot = plot_w / bars.len() as f64;
    for (i, (label, value)) in bars.iter().enumerate() {
        let v = if value.is_finite() { *value } else { 0.0 };
        let h = plot_h * v / ymax;
        let x = x0 + MARGIN_L + slot * i as f64 + slot * 0.2;
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{}"/>"#,
            MARGIN_T + plot_h - h,
            slot * 0.6,
            COLORS[i % COLORS.len()]
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            x + slot * 0.3,
            MARGIN_T + plot_h - h - 4.0,
            fmt_tick(v)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            x + slot * 0.3,
            MARGIN_T + plot_h + 16.0,
            escape(label)
        );
    }
}

fn line_panel(
    svg: &mut String,
    x0: f64,
    title: &str,
    unit: &str,
    points: &[(f64, f64)],
    color: &str,
) {
    let ymax = axis_max(points.iter().map(|p| p.1));
    panel_frame(svg, x0, title, unit, ymax);
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let plot_w = PANEL_W - MARGIN_L - 10.0;
    let (tmin, tmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    let span = if tmax > tmin { tmax - tmin } else { 1.0 };
    let coords: Vec<String> = points
        .iter()
        .filter(|p| p.1.is_finite())
        .map(|&(t, v)| {
            format!(
                "{:.1},{:.1}",
                x0 + MARGIN_L + plot_w * (t - tmin) / span,
                MARGIN_T + plot_h * (1.0 - v / ymax)
            )
        })
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
        coords.join(" ")
    );
    for c in &coords {
        let (x, y) = c.split_once(',').expect("coordinate pair");
        let _ = writeln!(svg, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
    }
    if !points.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">t (s): {} .. {}</text>"#,
            x0 + MARGIN_L + plot_w / 2.0,
            MARGIN_T + plot_h + 16.0,
            fmt_tick(tmin),
            fmt_tick(tmax)
        );
    }
}

fn document(body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{body}</svg>\n",
        w = PANEL_W * 2.0,
        h = PANEL_H
    )
}

/// Latency and throughput bar charts: before migration, naive, PAM.
pub fn comparison_svg(report: &ComparisonReport) -> String {
    let mut body = String::new();
    bar_panel(
        &mut body,
        0.0,
        "(a) Latency",
        "latency (us)",
        &[
            ("before", report.before.latency_us),
            ("naive", report.naive.after.latency_us),
            ("PAM", report.pam.after.latency_us),
        ],
    );
    bar_panel(
        &mut body,
        PANEL_W,
        "(b) Throughput",
        "max throughput (Gbps)",
        &[
            ("before", report.before.max_throughput_gbps),
            ("naive", report.naive.after.max_throughput_gbps),
            ("PAM", report.pam.after.max_throughput_gbps),
        ],
    );
    document(&body)
}

/// Latency and maximum throughput over trace time for one policy run.
pub fn timeline_svg(records: &[TimelineRecord]) -> String {
    let policy = records.first().map(|r| r.policy.as_str()).unwrap_or("none");
    let color = match policy {
        "pam" => COLORS[2],
        "naive" => COLORS[1],
        _ => COLORS[0],
    };
    let lat: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.latency_us)).collect();
    let tput: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.t, r.max_throughput_gbps))
        .collect();
    let mut body = String::new();
    line_panel(
        &mut body,
        0.0,
        &format!("(a) Latency [{policy}]"),
        "latency (us)",
        &lat,
        color,
    );
    line_panel(
        &mut body,
        PANEL_W,
        &format!("(b) Throughput [{policy}]"),
        "max throughput (Gbps)",
        &tput,
        color,
    );
    document(&body)
}
