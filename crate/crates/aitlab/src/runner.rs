//! Experiment runners behind the CLI subcommands.
//!
//! Each runner returns the exact lines it wants on the console; the CSV files
//! are written from the same strings, so console output mirrors CSV content
//! byte for byte. Every row carries (seed, n_paths, n_steps).

use std::fs;
use std::path::{Path, PathBuf};

use crate::closed_form::closed_form_report;
use crate::config::{ExperimentConfig, StrategyChoice};
use crate::engine::{mc_delta_v, mc_expected_log_wealth};
use crate::error::{Error, Result};
use crate::numeric::McEstimate;
use crate::plot::{self, sweep_csv_lines};
use crate::strategy::Strategy;
use crate::temporal::{self, SweepRow, TemporalValueResult};

pub const COMPARE_HEADER: &str = "model,strategy,d_stock,d_rate,n_paths,n_steps,seed,\
mean,std_error,closed_form,abs_diff,diff_in_se";

/// One comparison line: an MC estimate next to its closed form, if any.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub model: &'static str,
    pub strategy: &'static str,
    pub d_stock: f64,
    pub d_rate: f64,
    pub estimate: McEstimate,
    pub closed_form: Option<f64>,
    /// Sampling uncertainty of the closed form itself (Heston's embedded MC).
    pub closed_form_se: f64,
    /// Discretization allowance added to the 3 SE gate: the forward-integral
    /// left sum carries an O(dt) bias when the stock delay is short.
    pub allowance: f64,
}

impl CompareRow {
    pub fn abs_diff(&self) -> Option<f64> {
        self.closed_form.map(|cf| (self.estimate.mean - cf).abs())
    }

    /// Difference over the combined standard error of both estimates.
    pub fn diff_in_se(&self) -> Option<f64> {
        let combined = self.combined_se();
        self.abs_diff().map(|d| d / combined)
    }

    pub fn combined_se(&self) -> f64 {
        (self.estimate.std_error.powi(2) + self.closed_form_se.powi(2)).sqrt()
    }

    /// `|diff| <= 3 SE + allowance`; rows without a closed form always pass.
    pub fn within_tolerance(&self) -> bool {
        match self.abs_diff() {
            None => true,
            Some(diff) => diff <= 3.0 * self.combined_se() + self.allowance,
        }
    }

    pub fn csv_line(&self) -> String {
        let (cf, diff, in_se) = match (self.closed_form, self.abs_diff(), self.diff_in_se()) {
            (Some(cf), Some(diff), Some(in_se)) => {
                (format!("{cf}"), format!("{diff}"), format!("{in_se}"))
            }
            _ => ("nan".into(), "nan".into(), "nan".into()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.strategy,
            self.d_stock,
            self.d_rate,
            self.estimate.n_paths,
            self.estimate.n_steps,
            self.estimate.seed,
            self.estimate.mean,
            self.estimate.std_error,
            cf,
            diff,
            in_se
        )
    }
}

/// Result of `compare` or `simulate`.
#[derive(Debug)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Header plus one line per row; console and CSV both use these.
    pub lines: Vec<String>,
    pub all_within_tolerance: bool,
    pub csv_path: Option<PathBuf>,
}

fn discretization_allowance(d_stock: f64, horizon: f64, dt: f64) -> f64 {
    dt * (1.0 / d_stock - 1.0 / horizon).max(0.0)
}

fn resolve_output(
    explicit: Option<&PathBuf>,
    out_dir: Option<&Path>,
    default_name: &str,
) -> Option<PathBuf> {
    match (explicit, out_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(default_name)),
        (None, None) => None,
    }
}

fn write_lines(lines: &[String], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn finish_compare(
    rows: Vec<CompareRow>,
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    default_name: &str,
) -> Result<CompareReport> {
    let mut lines = vec![COMPARE_HEADER.to_string()];
    lines.extend(rows.iter().map(CompareRow::csv_line));
    let all_within_tolerance = rows.iter().all(CompareRow::within_tolerance);
    let csv_path = resolve_output(config.outputs.csv.as_ref(), out_dir, default_name);
    if let Some(path) = &csv_path {
        write_lines(&lines, path)?;
    }
    Ok(CompareReport {
        rows,
        lines,
        all_within_tolerance,
        csv_path,
    })
}

/// Runs both strategies and their difference against the closed forms.
pub fn run_compare(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<CompareReport> {
    let experiment = config.build()?;
    let model = &experiment.model;
    let grid = &experiment.grid;
    let delays = experiment.delays;
    let run = &experiment.run;
    let report = closed_form_report(
        model,
        Some(&delays),
        grid,
        experiment.sigma_floor,
        run.n_paths,
        run.seed,
    )?;

    let merton = mc_expected_log_wealth(&Strategy::merton(model), grid, run)?;
    let ait = mc_expected_log_wealth(&Strategy::ait(model, delays), grid, run)?;
    let delta = mc_delta_v(model, delays, grid, run)?;

    let allowance = discretization_allowance(delays.d_stock, grid.horizon(), grid.dt());
    let rows = vec![
        CompareRow {
            model: model.name(),
            strategy: "merton",
            d_stock: delays.d_stock,
            d_rate: delays.d_rate,
            estimate: merton,
            closed_form: Some(report.v_merton),
            closed_form_se: report.v_merton_se,
            allowance: 0.0,
        },
        CompareRow {
            model: model.name(),
            strategy: "ait",
            d_stock: delays.d_stock,
            d_rate: delays.d_rate,
            estimate: ait,
            closed_form: report.v_ait,
            closed_form_se: report.v_merton_se,
            allowance,
        },
        CompareRow {
            model: model.name(),
            strategy: "ait-merton",
            d_stock: delays.d_stock,
            d_rate: delays.d_rate,
            estimate: delta,
            closed_form: report.delta_v,
            closed_form_se: 0.0,
            allowance,
        },
    ];
    finish_compare(rows, config, out_dir, "compare.csv")
}

/// Runs the single configured strategy; informational, no tolerance gate.
pub fn run_simulate(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<CompareReport> {
    let experiment = config.build()?;
    let model = &experiment.model;
    let grid = &experiment.grid;
    let delays = experiment.delays;
    let run = &experiment.run;
    let report = closed_form_report(
        model,
        Some(&delays),
        grid,
        experiment.sigma_floor,
        run.n_paths,
        run.seed,
    )?;
    let (name, estimate, closed_form, allowance) = match experiment.strategy {
        StrategyChoice::Merton => (
            "merton",
            mc_expected_log_wealth(&Strategy::merton(model), grid, run)?,
            Some(report.v_merton),
            0.0,
        ),
        StrategyChoice::Ait => (
            "ait",
            mc_expected_log_wealth(&Strategy::ait(model, delays), grid, run)?,
            report.v_ait,
            discretization_allowance(delays.d_stock, grid.horizon(), grid.dt()),
        ),
    };
    let mut rows = vec![CompareRow {
        model: model.name(),
        strategy: name,
        d_stock: delays.d_stock,
        d_rate: delays.d_rate,
        estimate,
        closed_form,
        closed_form_se: report.v_merton_se,
        allowance,
    }];
    // Simulate reports; it does not gate.
    rows.iter_mut().for_each(|r| r.allowance = f64::INFINITY);
    finish_compare(rows, config, out_dir, "simulate.csv")
}

/// Result of `temporal-value` or `sweep`.
#[derive(Debug)]
pub struct TemporalReport {
    pub rows: Vec<SweepRow>,
    /// CSV lines (header plus rows); console and CSV both use these.
    pub lines: Vec<String>,
    /// Human summary appended to console output, formatted with the same
    /// `Display` as the CSV numbers.
    pub summary: Vec<String>,
    pub csv_path: Option<PathBuf>,
    pub svg_path: Option<PathBuf>,
}

struct TemporalSetup {
    horizon: f64,
    a: f64,
    diffusion: f64,
    diffusion_name: &'static str,
    sigma: crate::grid::Curve,
    tol: f64,
}

fn temporal_setup(config: &ExperimentConfig) -> Result<TemporalSetup> {
    let experiment = config.build()?;
    let tol = config
        .temporal
        .as_ref()
        .map(|t| t.tolerance())
        .unwrap_or(temporal::DEFAULT_TEMPORAL_TOL);
    let (a, diffusion, diffusion_name) = match &experiment.model {
        crate::model::MarketModel::Vasicek { rate, .. } => (rate.a, rate.xi, "xi"),
        crate::model::MarketModel::HullWhite { rate, .. } => (rate.a, rate.theta, "theta"),
        other => {
            return Err(Error::Config(format!(
                "temporal value requires a rate model with state-independent conditional \
                 variance (vasicek or hull_white), got `{}`",
                other.name()
            )))
        }
    };
    let sigma = experiment
        .model
        .sigma()
        .expect("rate models carry a sigma curve")
        .clone();
    Ok(TemporalSetup {
        horizon: experiment.grid.horizon(),
        a,
        diffusion,
        diffusion_name,
        sigma,
        tol,
    })
}

fn summarize_result(result: &TemporalValueResult) -> String {
    match (result.d_star(), result.residual()) {
        (Some(d), Some(r)) => format!("temporal value: d* = {d} (residual {r})"),
        _ => "temporal value: infinite".to_string(),
    }
}

fn finish_temporal(
    rows: Vec<SweepRow>,
    summary: Vec<String>,
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    stem: &str,
) -> Result<TemporalReport> {
    let lines = sweep_csv_lines(&rows);
    let csv_path = resolve_output(config.outputs.csv.as_ref(), out_dir, &format!("{stem}.csv"));
    let svg_path = resolve_output(config.outputs.svg.as_ref(), out_dir, &format!("{stem}.svg"));
    if let Some(path) = &csv_path {
        write_lines(&lines, path)?;
    }
    if let Some(path) = &svg_path {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let name = rows[0].param_name;
        let figure = plot::Figure {
            title: format!("temporal value of information vs {name}"),
            x_label: name.to_string(),
            y_label: "d*".to_string(),
            series: vec![plot::sweep_series("d*", &rows)],
        };
        plot::write_svg(&figure, path)?;
    }
    Ok(TemporalReport {
        rows,
        lines,
        summary,
        csv_path,
        svg_path,
    })
}

/// Finds the temporal value for the configured rate model.
pub fn run_temporal_value(
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
) -> Result<TemporalReport> {
    let setup = temporal_setup(config)?;
    let experiment = config.build()?;
    let result = temporal::temporal_value(
        setup.horizon,
        setup.a,
        setup.diffusion,
        &setup.sigma,
        &experiment.grid,
        experiment.sigma_floor,
        setup.tol,
    )?;
    let rows = vec![SweepRow {
        param_name: setup.diffusion_name,
        param_value: setup.diffusion,
        result,
    }];
    let summary = vec![summarize_result(&result)];
    finish_temporal(rows, summary, config, out_dir, "temporal_value")
}

/// Sweeps `a` or `xi` per the `[temporal]` section and emits CSV + SVG.
pub fn run_sweep(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<TemporalReport> {
    let setup = temporal_setup(config)?;
    let experiment = config.build()?;
    let temporal_section = config.temporal.as_ref().ok_or_else(|| {
        Error::Config("[temporal] section with sweep_param and sweep_values is required".into())
    })?;
    let axis = temporal_section.sweep_axis()?;
    let values = temporal_section
        .sweep_values
        .as_deref()
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Error::Config("[temporal] sweep_values must be non-empty".into()))?;
    let other = match axis {
        temporal::SweepAxis::MeanReversion => setup.diffusion,
        temporal::SweepAxis::Diffusion => setup.a,
    };
    let rows = temporal::sweep(
        axis,
        values,
        other,
        setup.horizon,
        &setup.sigma,
        &experiment.grid,
        experiment.sigma_floor,
        setup.tol,
    )?;
    let summary = rows
        .iter()
        .map(|row| {
            format!(
                "{} = {}: {}",
                row.param_name,
                row.param_value,
                summarize_result(&row.result)
            )
        })
        .collect();
    finish_temporal(rows, summary, config, out_dir, "sweep")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn bsm_config(n_paths: u64, n_steps: usize) -> ExperimentConfig {
        let doc = format!(
            r#"
strategy = "ait"

[model]
kind = "bsm"

[curves]
mu = {{ constant = 0.08 }}
rho = {{ constant = 0.02 }}
sigma = {{ constant = 0.2 }}

[grid]
horizon = 1.0
n_steps = {n_steps}

[mc]
n_paths = {n_paths}
seed = 42

[delays]
d_stock = 0.25
"#
        );
        ExperimentConfig::from_toml_str(&doc, "test").unwrap()
    }

    fn vasicek_toml(xi: f64) -> String {
        format!(
            r#"
strategy = "ait"

[model]
kind = "vasicek"
a = 1.0
b = 0.05
xi = {xi}
r0 = 0.03

[curves]
mu = {{ constant = 0.08 }}
sigma = {{ constant = 0.2 }}

[grid]
horizon = 1.0
n_steps = 400

[mc]
n_paths = 2000
seed = 9

[delays]
d_stock = 0.3
d_rate = 0.3

[temporal]
tol = 1e-10
sweep_param = "xi"
sweep_values = [0.05, 0.2, 0.8]
"#
        )
    }

    #[test]
    fn compare_bsm_three_rows_within_tolerance() {
        let config = bsm_config(4000, 200);
        let report = run_compare(&config, None).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.lines.len(), 4);
        assert_eq!(report.lines[0], COMPARE_HEADER);
        assert!(report.all_within_tolerance, "rows: {:#?}", report.lines);
        assert!(report.csv_path.is_none());
        let strategies: Vec<_> = report.rows.iter().map(|r| r.strategy).collect();
        assert_eq!(strategies, ["merton", "ait", "ait-merton"]);
        for row in &report.rows {
            assert!(row.closed_form.is_some());
            assert!(row.diff_in_se().unwrap().is_finite());
            assert_eq!(row.estimate.seed, 42);
        }
        // The merton closed form at this fixture.
        assert!((report.rows[0].closed_form.unwrap() - 0.065).abs() < 1e-12);
    }

    #[test]
    fn compare_csv_written_and_mirrors_lines() {
        let dir = std::env::temp_dir().join("aitlab_runner_compare");
        let _ = std::fs::remove_dir_all(&dir);
        let config = bsm_config(500, 100);
        let report = run_compare(&config, Some(dir.as_path())).unwrap();
        let path = report.csv_path.clone().unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let expect: String = report.lines.join("\n") + "\n";
        assert_eq!(content, expect);
        // Byte-identical on rerun.
        let again = run_compare(&config, Some(dir.as_path())).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), expect);
        assert_eq!(again.lines, report.lines);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn compare_refuses_divergent_heston_inverse_moment() {
        let doc = r#"
strategy = "merton"

[model]
kind = "heston"
kappa = 1.0
theta = 0.03
eta = 0.2
v0 = 0.04

[curves]
mu = { constant = 0.08 }
rho = { constant = 0.02 }

[grid]
horizon = 1.0
n_steps = 100

[mc]
n_paths = 100
seed = 1

[delays]
d_stock = 0.25
"#;
        // kappa*theta = 0.03 >= eta^2/2 = 0.02 (valid CIR) but < eta^2 = 0.04.
        let config = ExperimentConfig::from_toml_str(doc, "test").unwrap();
        let err = run_compare(&config, None).unwrap_err();
        assert!(
            matches!(err, Error::InverseMomentDiverges { .. }),
            "unexpected: {err}"
        );
        assert!(err.to_string().contains("finite only when"));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn simulate_single_row_never_gates() {
        let config = bsm_config(500, 100);
        let report = run_simulate(&config, None).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].strategy, "ait");
        assert!(report.all_within_tolerance);
    }

    #[test]
    fn temporal_value_finite_and_infinite() {
        // At a = 1, sigma = 0.2 the root exists only once xi exceeds ~0.375.
        let config = ExperimentConfig::from_toml_str(&vasicek_toml(0.5), "test").unwrap();
        let report = run_temporal_value(&config, None).unwrap();
        assert_eq!(report.rows.len(), 1);
        let result = report.rows[0].result;
        assert!(result.is_finite());
        assert!(result.residual().unwrap().abs() <= 1e-10);
        assert!(report.summary[0].starts_with("temporal value: d* = "));

        let config = ExperimentConfig::from_toml_str(&vasicek_toml(0.0), "test").unwrap();
        let report = run_temporal_value(&config, None).unwrap();
        assert!(!report.rows[0].result.is_finite());
        assert_eq!(report.summary[0], "temporal value: infinite");
        assert!(report.lines[1].contains("inf"));
    }

    #[test]
    fn temporal_rejects_models_without_closed_conditional_variance() {
        let doc = r#"
strategy = "ait"

[model]
kind = "cir_rate"
kappa = 2.0
theta = 0.04
eta = 0.2
r0 = 0.03

[curves]
mu = { constant = 0.08 }
sigma = { constant = 0.2 }

[grid]
horizon = 1.0
n_steps = 100

[mc]
n_paths = 100
seed = 1

[delays]
d_stock = 0.3
d_rate = 0.3
"#;
        let config = ExperimentConfig::from_toml_str(doc, "test").unwrap();
        let err = run_temporal_value(&config, None).unwrap_err();
        assert!(err.to_string().contains("vasicek or hull_white"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn sweep_emits_rows_and_files() {
        let dir = std::env::temp_dir().join("aitlab_runner_sweep");
        let _ = std::fs::remove_dir_all(&dir);
        let config = ExperimentConfig::from_toml_str(&vasicek_toml(0.1), "test").unwrap();
        let report = run_sweep(&config, Some(dir.as_path())).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.lines.len(), 4);
        assert_eq!(report.summary.len(), 3);
        let csv = std::fs::read_to_string(report.csv_path.as_ref().unwrap()).unwrap();
        assert_eq!(csv, report.lines.join("\n") + "\n");
        let svg = std::fs::read_to_string(report.svg_path.as_ref().unwrap()).unwrap();
        assert!(svg.contains("</svg>"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sweep_requires_temporal_section() {
        let doc = vasicek_toml(0.1).replace("sweep_values = [0.05, 0.2, 0.8]", "");
        let config = ExperimentConfig::from_toml_str(&doc, "test").unwrap();
        let err = run_sweep(&config, None).unwrap_err();
        assert!(err.to_string().contains("sweep_values"));
    }

    #[test]
    fn explicit_output_paths_respected() {
        let dir = std::env::temp_dir().join("aitlab_runner_outputs");
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        let mut config = bsm_config(200, 50);
        config.outputs.csv = Some(dir.join("custom.csv"));
        let report = run_compare(&config, None).unwrap();
        assert_eq!(
            report.csv_path.as_deref(),
            Some(dir.join("custom.csv").as_path())
        );
        assert!(dir.join("custom.csv").exists());
        // Relative explicit path lands under out_dir.
        config.outputs.csv = Some(PathBuf::from("rel.csv"));
        let report = run_compare(&config, Some(dir.as_path())).unwrap();
        assert_eq!(
            report.csv_path.as_deref(),
            Some(dir.join("rel.csv").as_path())
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
