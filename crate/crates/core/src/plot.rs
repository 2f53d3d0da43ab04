//! SVG line charts for experiment CSV files.
//!
//! A per-trial performance CSV yields `ratios.svg` (mean approximation ratio
//! per noise level) and `guarantees.svg` (mean guarantees). A runtime CSV
//! yields `runtime.svg`. The kind is detected from the header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// One tick per entry.
    pub x_ticks: Vec<f64>,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn short(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let finite = |v: f64| v.is_finite();
        let xs: Vec<f64> = self
            .x_ticks
            .iter()
            .copied()
            .filter(|x| finite(*x))
            .collect();
        let ys: Vec<f64> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .filter(|y| finite(*y))
            .collect();
        let (x0, x1) = bounds(&xs);
        let (mut y0, mut y1) = bounds(&ys);
        y0 = y0.min(0.0);
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s,
            r#"<path class="axes" d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
        );
        for &x in &xs {
            let _ = writeln!(
                s,
                r#"<g class="xtick"><line x1="{0:.2}" y1="{bottom}" x2="{0:.2}" y2="{1}" stroke="black"/><text x="{0:.2}" y="{2}" text-anchor="middle">{3}</text></g>"#,
                px(x),
                bottom + 4.0,
                bottom + 16.0,
                short(x)
            );
        }
        for i in 0..=5 {
            let y = y0 + (y1 - y0) * i as f64 / 5.0;
            let _ = writeln!(
                s,
                r#"<g class="ytick"><line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="black"/><text x="{3}" y="{1:.2}" text-anchor="end" dominant-baseline="middle">{4}</text></g>"#,
                left - 4.0,
                py(y),
                left,
                left - 6.0,
                short(y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|p| finite(p.0) && finite(p.1))
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="series" data-label="{}" points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
                escape(&series.label),
                pts.join(" ")
            );
            let ly = top + 14.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<g class="legend"><line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="2"/><text x="{3}" y="{1}" dominant-baseline="middle">{4}</text></g>"#,
                right - 150.0,
                ly,
                right - 130.0,
                right - 125.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<(usize, csv::StringRecord)>,
}

impl Table {
    fn read(path: &Path) -> Result<Table> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r
            .headers()
            .map_err(|e| parse_err(&e, 1))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| parse_err(&e, 0))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec));
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 2,
                message: "no data rows".into(),
            });
        }
        Ok(Table { header, rows })
    }

    fn has(&self, cols: &[&str]) -> bool {
        cols.iter().all(|c| self.header.iter().any(|h| h == c))
    }

    fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column {name}"),
            })?;
        self.rows
            .iter()
            .map(|(line, rec)| {
                let cell = rec.get(idx).unwrap_or("");
                match cell {
                    "inf" => Ok(f64::INFINITY),
                    _ => cell.parse::<f64>().map_err(|_| Error::Parse {
                        line: *line,
                        message: format!("column {name}: not a number: {cell:?}"),
                    }),
                }
            })
            .collect()
    }
}

fn parse_err(e: &csv::Error, fallback: usize) -> Error {
    let line = e.position().map_or(fallback, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Mean of each series per distinct `x`, keyed in ascending `x` order.
fn grouped_means(x: &[f64], ys: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut groups: BTreeMap<u64, (f64, Vec<f64>, usize)> = BTreeMap::new();
    for (i, &xi) in x.iter().enumerate() {
        // Order-preserving key for nonnegative and negative floats alike.
        let bits = xi.to_bits();
        let key = if xi.is_sign_negative() {
            !bits
        } else {
            bits | (1 << 63)
        };
        let e = groups
            .entry(key)
            .or_insert_with(|| (xi, vec![0.0; ys.len()], 0));
        for (acc, y) in e.1.iter_mut().zip(ys) {
            *acc += y[i];
        }
        e.2 += 1;
    }
    let xs = groups.values().map(|g| g.0).collect();
    let means = (0..ys.len())
        .map(|k| groups.values().map(|g| g.1[k] / g.2 as f64).collect())
        .collect();
    (xs, means)
}

fn chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: Vec<f64>,
    named: Vec<(&str, Vec<f64>)>,
) -> Chart {
    Chart {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        series: named
            .into_iter()
            .map(|(label, ys)| Series {
                label: label.into(),
                points: xs.iter().copied().zip(ys).collect(),
            })
            .collect(),
        x_ticks: xs,
    }
}

/// Charts for an experiment CSV, in output order with their file names.
pub fn charts_for(csv_path: &Path) -> Result<Vec<(&'static str, Chart)>> {
    let t = Table::read(csv_path)?;
    if t.has(&[
        "sigma_v",
        "ratio_alg1",
        "ratio_alg2",
        "guarantee_thm1",
        "guarantee_thm2",
    ]) {
        let sigma = t.column("sigma_v")?;
        let cols = [
            "ratio_alg1",
            "ratio_alg2",
            "guarantee_thm1",
            "guarantee_thm2",
        ]
        .iter()
        .map(|c| t.column(c))
        .collect::<Result<Vec<_>>>()?;
        let (xs, mut m) = grouped_means(&sigma, &cols);
        let g2 = m.pop().unwrap();
        let g1 = m.pop().unwrap();
        let r2 = m.pop().unwrap();
        let r1 = m.pop().unwrap();
        Ok(vec![
            (
                "ratios.svg",
                chart(
                    "Approximation ratio",
                    "noise level sigma_v",
                    "mean f(A) / f(OPT)",
                    xs.clone(),
                    vec![("parallel greedy", r1), ("general greedy", r2)],
                ),
            ),
            (
                "guarantees.svg",
                chart(
                    "Theoretical guarantees",
                    "noise level sigma_v",
                    "mean guarantee",
                    xs,
                    vec![("parallel greedy", g1), ("general greedy", g2)],
                ),
            ),
        ])
    } else if t.has(&["m", "mean_time_alg1", "mean_time_alg2"]) {
        let m = t.column("m")?;
        let cols = [t.column("mean_time_alg1")?, t.column("mean_time_alg2")?];
        let (xs, mut means) = grouped_means(&m, &cols);
        let t2 = means.pop().unwrap();
        let t1 = means.pop().unwrap();
        Ok(vec![(
            "runtime.svg",
            chart(
                "Running time",
                "sensors per step",
                "mean wall time (s)",
                xs,
                vec![("parallel greedy", t1), ("general greedy", t2)],
            ),
        )])
    } else {
        Err(Error::Parse {
            line: 1,
            message: "header matches neither a performance nor a runtime CSV".into(),
        })
    }
}

/// Render every chart for `csv_path` into `out_dir`. Nothing is written
/// unless the whole CSV parses.
pub fn plot_csv(csv_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let charts = charts_for(csv_path)?;
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, c) in charts {
        let p = out_dir.join(name);
        std::fs::write(&p, c.to_svg())?;
        written.push(p);
    }
    Ok(written)
}
