//! Plot and table emission: sweep CSVs and self-contained SVG line plots.
//!
//! Points carry `Option<f64>` values so undefined regions (an infinite
//! temporal value) appear as gaps in the polyline; isolated points are drawn
//! as circles so single-row tables still render.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::temporal::SweepRow;

/// One labelled curve; `None` values are gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, Option<f64>)>,
}

/// A figure to render: axis labels plus one or more series.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

fn data_range(figure: &Figure) -> Result<((f64, f64), (f64, f64))> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for series in &figure.series {
        for &(x, y) in &series.points {
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    index: xs.len(),
                    value: x,
                });
            }
            xs.push(x);
            if let Some(y) = y {
                if !y.is_finite() {
                    return Err(Error::NonFinite {
                        index: ys.len(),
                        value: y,
                    });
                }
                ys.push(y);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::InvalidParam {
            name: "figure",
            reason: "figure has no points".into(),
        });
    }
    if ys.is_empty() {
        // All values undefined: render an empty value range around zero.
        ys.push(0.0);
    }
    let pad = |lo: f64, hi: f64| {
        if lo == hi {
            let margin = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            (lo - margin, hi + margin)
        } else {
            let margin = (hi - lo) * 0.05;
            (lo - margin, hi + margin)
        }
    };
    let (x_lo, x_hi) = pad(
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = pad(
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok(((x_lo, x_hi), (y_lo, y_hi)))
}

/// Tick positions with a 1/2/5 step covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(mag * 10.0);
    let first = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = first;
    while t <= hi + step * 1e-9 {
        // Snap near-zero ticks produced by rounding.
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (0.01..10_000.0).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{v:e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the figure to an SVG string. Gaps split polylines; isolated points
/// become circles; a legend is drawn when there is more than one series.
pub fn render_svg(figure: &Figure) -> Result<String> {
    let ((x_lo, x_hi), (y_lo, y_hi)) = data_range(figure)?;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"14\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // Axes.
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>",
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{x0:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>",
        MARGIN_TOP
    );
    for t in ticks(x_lo, x_hi) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y0 + 6.0
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{y0:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_TOP
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y0 + 24.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y_lo, y_hi) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            x0 - 6.0
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 10.0,
            y + 5.0,
            fmt_tick(t)
        );
    }
    // Labels and title.
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        xml_escape(&figure.x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"22\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"16\" \
         transform=\"rotate(-90 22 {:.2})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        xml_escape(&figure.y_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        xml_escape(&figure.title)
    );
    // Series: split runs of defined values; singleton runs become circles.
    for (k, series) in figure.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut run: Vec<(f64, f64)> = Vec::new();
        let flush = |run: &mut Vec<(f64, f64)>, svg: &mut String| {
            match run.len() {
                0 => {}
                1 => {
                    let (x, y) = run[0];
                    let _ = writeln!(
                        svg,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>",
                        sx(x),
                        sy(y)
                    );
                }
                _ => {
                    let pts: Vec<String> = run
                        .iter()
                        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                        .collect();
                    let _ = writeln!(
                        svg,
                        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                         stroke-width=\"2\"/>",
                        pts.join(" ")
                    );
                }
            }
            run.clear();
        };
        for &(x, y) in &series.points {
            match y {
                Some(y) => run.push((x, y)),
                None => flush(&mut run, &mut svg),
            }
        }
        flush(&mut run, &mut svg);
    }
    if figure.series.len() > 1 {
        let legend_x = MARGIN_LEFT + plot_w - 180.0;
        for (k, series) in figure.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let y = MARGIN_TOP + 16.0 + 22.0 * k as f64;
            let _ = writeln!(
                svg,
                "<line x1=\"{legend_x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>",
                legend_x + 28.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
                legend_x + 36.0,
                y + 5.0,
                xml_escape(&series.label)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the rendered figure to `path`.
pub fn write_svg(figure: &Figure, path: &Path) -> Result<()> {
    let svg = render_svg(figure)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// CSV lines for a sweep table: header plus one row per entry. Infinite
/// results carry `inf` in the root column and `nan` residual.
pub fn sweep_csv_lines(rows: &[SweepRow]) -> Vec<String> {
    let mut lines = Vec::with_capacity(rows.len() + 1);
    lines.push("param_name,param_value,d_star_or_inf,residual".to_string());
    for row in rows {
        let (d_star, residual) = match (row.result.d_star(), row.result.residual()) {
            (Some(d), Some(r)) => (format!("{d}"), format!("{r}")),
            _ => ("inf".to_string(), "nan".to_string()),
        };
        lines.push(format!(
            "{},{},{},{}",
            row.param_name, row.param_value, d_star, residual
        ));
    }
    lines
}

/// Writes the sweep CSV to `path`.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParam {
            name: "rows",
            reason: "sweep table is empty".into(),
        });
    }
    let mut out = sweep_csv_lines(rows).join("\n");
    out.push('\n');
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Converts a sweep table to a plot series; infinite results become gaps.
pub fn sweep_series(label: &str, rows: &[SweepRow]) -> Series {
    Series {
        label: label.to_string(),
        points: rows
            .iter()
            .map(|r| (r.param_value, r.result.d_star()))
            .collect(),
    }
}

/// Writes the CSV and SVG for one sweep.
pub fn emit_figure(rows: &[SweepRow], csv_path: &Path, svg_path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidParam {
            name: "rows",
            reason: "sweep table is empty".into(),
        });
    }
    write_sweep_csv(rows, csv_path)?;
    let name = rows[0].param_name;
    let figure = Figure {
        title: format!("temporal value of information vs {name}"),
        x_label: name.to_string(),
        y_label: "d*".to_string(),
        series: vec![sweep_series("d*", rows)],
    };
    write_svg(&figure, svg_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::{TemporalValueKind, TemporalValueResult};

    fn finite_row(value: f64, d_star: f64) -> SweepRow {
        SweepRow {
            param_name: "xi",
            param_value: value,
            result: TemporalValueResult {
                kind: TemporalValueKind::Finite {
                    d_star,
                    residual: 1e-12,
                },
                bracket: (1e-12, 1.0),
            },
        }
    }

    fn infinite_row(value: f64) -> SweepRow {
        SweepRow {
            param_name: "xi",
            param_value: value,
            result: TemporalValueResult {
                kind: TemporalValueKind::Infinite,
                bracket: (1e-12, 1.0),
            },
        }
    }

    #[test]
    fn svg_single_point_renders_circle() {
        let figure = Figure {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![(1.0, Some(2.0))],
            }],
        };
        let svg = render_svg(&figure).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("<polyline"));
    }

    #[test]
    fn svg_gap_splits_polyline() {
        let figure = Figure {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![
                    (0.0, Some(1.0)),
                    (1.0, Some(2.0)),
                    (2.0, None),
                    (3.0, Some(1.5)),
                    (4.0, Some(1.0)),
                ],
            }],
        };
        let svg = render_svg(&figure).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn legend_only_with_multiple_series() {
        let one = Figure {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "only".into(),
                points: vec![(0.0, Some(1.0)), (1.0, Some(2.0))],
            }],
        };
        assert!(!render_svg(&one).unwrap().contains(">only<"));
        let mut two = one.clone();
        two.series.push(Series {
            label: "second".into(),
            points: vec![(0.0, Some(2.0)), (1.0, Some(1.0))],
        });
        let svg = render_svg(&two).unwrap();
        assert!(svg.contains(">only<") && svg.contains(">second<"));
    }

    #[test]
    fn empty_figure_rejected() {
        let figure = Figure {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![],
            }],
        };
        assert!(render_svg(&figure).is_err());
    }

    #[test]
    fn all_gaps_still_renders() {
        let figure = Figure {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![(0.0, None), (1.0, None)],
            }],
        };
        let svg = render_svg(&figure).unwrap();
        assert!(!svg.contains("<polyline") && !svg.contains("<circle"));
    }

    #[test]
    fn sweep_csv_golden() {
        let rows = vec![infinite_row(0.1), finite_row(1.0, 0.25)];
        let lines = sweep_csv_lines(&rows);
        assert_eq!(lines[0], "param_name,param_value,d_star_or_inf,residual");
        assert_eq!(lines[1], "xi,0.1,inf,nan");
        assert_eq!(lines[2], "xi,1,0.25,0.000000000001");
    }

    #[test]
    fn emit_files_roundtrip() {
        let dir = std::env::temp_dir().join("aitlab_plot_test");
        std::fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("sweep.csv");
        let svg = dir.join("sweep.svg");
        let rows = vec![
            infinite_row(0.1),
            finite_row(0.5, 0.8),
            finite_row(1.0, 0.3),
        ];
        emit_figure(&rows, &csv, &svg).unwrap();
        let csv_content = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(csv_content.lines().count(), 4);
        let svg_content = std::fs::read_to_string(&svg).unwrap();
        assert!(svg_content.contains("</svg>"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let rows = vec![finite_row(1.0, 0.5)];
        let bad = Path::new("/nonexistent_dir_for_aitlab/sweep.csv");
        let err = write_sweep_csv(&rows, bad).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(emit_figure(&[], Path::new("a.csv"), Path::new("a.svg")).is_err());
    }

    #[test]
    fn tick_helper_spans_range() {
        let ts = ticks(0.0, 1.0);
        assert!(ts.len() >= 4 && ts.len() <= 7);
        assert!(ts.iter().all(|t| (0.0..=1.0 + 1e-12).contains(t)));
        let ts = ticks(-3.0, 17.0);
        assert!(ts.contains(&0.0));
    }
}
