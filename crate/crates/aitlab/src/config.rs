//! Experiment configuration: a sectioned `key = value` document (TOML) mapped
//! onto the domain types.
//!
//! Parsing applies every upstream validation rule immediately, so a config
//! that survives [`ExperimentConfig::build`] is runnable as-is. Errors carry
//! the source location reported by the TOML parser plus the file name.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::McRun;
use crate::error::{Error, Result};
use crate::grid::{Curve, TimeGrid};
use crate::model::MarketModel;
use crate::stochastic::{CirParams, HwParams, OuParams};
use crate::strategy::DelaySpec;
use crate::temporal::{SweepAxis, DEFAULT_TEMPORAL_TOL};

/// Which portfolio to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyChoice {
    Merton,
    Ait,
}

/// A curve is either a constant or a piecewise-linear knot list over `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Constant { constant: f64 },
    Knots { knots: Vec<(f64, f64)> },
}

impl CurveSpec {
    pub fn build(&self) -> Result<Curve> {
        match self {
            CurveSpec::Constant { constant } => Curve::constant(*constant),
            CurveSpec::Knots { knots } => Curve::piecewise_linear(knots.clone()),
        }
    }
}

/// Model kind plus its parameters; the `kind` key selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSection {
    Bsm,
    Heston {
        kappa: f64,
        theta: f64,
        eta: f64,
        v0: f64,
    },
    Vasicek {
        a: f64,
        b: f64,
        xi: f64,
        r0: f64,
    },
    HullWhite {
        kappa: CurveSpec,
        a: f64,
        theta: f64,
        r0: f64,
    },
    CirRate {
        kappa: f64,
        theta: f64,
        eta: f64,
        r0: f64,
    },
}

impl ModelSection {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSection::Bsm => "bsm",
            ModelSection::Heston { .. } => "heston",
            ModelSection::Vasicek { .. } => "vasicek",
            ModelSection::HullWhite { .. } => "hull_white",
            ModelSection::CirRate { .. } => "cir_rate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<CurveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<CurveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<CurveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub horizon: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_paths: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaysSection {
    pub d_stock: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsiderKind {
    TerminalBrownian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsiderSection {
    pub kind: InsiderKind,
}

impl Default for InsiderSection {
    fn default() -> Self {
        InsiderSection {
            kind: InsiderKind::TerminalBrownian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
}

/// Parameters for `temporal-value` and `sweep` runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<f64>>,
}

impl TemporalSection {
    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TEMPORAL_TOL)
    }

    pub fn sweep_axis(&self) -> Result<SweepAxis> {
        match self.sweep_param.as_deref() {
            Some("a") => Ok(SweepAxis::MeanReversion),
            Some("xi") => Ok(SweepAxis::Diffusion),
            Some(other) => Err(Error::Config(format!(
                "[temporal] sweep_param must be `a` or `xi`, got `{other}`"
            ))),
            None => Err(Error::Config(
                "[temporal] sweep_param is required for sweep runs".into(),
            )),
        }
    }
}

/// The whole experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub strategy: StrategyChoice,
    pub model: ModelSection,
    #[serde(default)]
    pub curves: CurvesSection,
    pub grid: GridSection,
    pub mc: McSection,
    pub delays: DelaysSection,
    #[serde(default)]
    pub insider: InsiderSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temporal: Option<TemporalSection>,
}

/// Fully validated runnable bundle extracted from a config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: MarketModel,
    pub grid: TimeGrid,
    pub delays: DelaySpec,
    pub run: McRun,
    pub strategy: StrategyChoice,
    pub sigma_floor: f64,
}

fn require_curve(spec: &Option<CurveSpec>, name: &str, kind: &str) -> Result<Curve> {
    spec.as_ref()
        .ok_or_else(|| {
            Error::Config(format!(
                "[curves] {name} is required for model kind `{kind}`"
            ))
        })?
        .build()
}

fn forbid_curve(spec: &Option<CurveSpec>, name: &str, kind: &str) -> Result<()> {
    if spec.is_some() {
        return Err(Error::Config(format!(
            "[curves] {name} is not a parameter of model kind `{kind}`; remove it"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and fully validates a config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Parses and fully validates config text; `origin` labels diagnostics.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))?;
        config.build()?;
        Ok(config)
    }

    /// Canonical serialized form; `parse(serialize(c)) == c`.
    pub fn canonical_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize: {e}")))
    }

    pub fn sigma_floor(&self) -> f64 {
        self.curves
            .sigma_floor
            .unwrap_or(crate::engine::DEFAULT_SIGMA_FLOOR)
    }

    /// Constructs the market model, applying per-kind curve completeness.
    pub fn market_model(&self) -> Result<MarketModel> {
        let kind = self.model.kind_name();
        let mu = require_curve(&self.curves.mu, "mu", kind)?;
        match &self.model {
            ModelSection::Bsm => Ok(MarketModel::BlackScholes {
                mu,
                rho: require_curve(&self.curves.rho, "rho", kind)?,
                sigma: require_curve(&self.curves.sigma, "sigma", kind)?,
            }),
            ModelSection::Heston {
                kappa,
                theta,
                eta,
                v0,
            } => {
                // Stock volatility is sqrt(V); a sigma curve would be ignored.
                forbid_curve(&self.curves.sigma, "sigma", kind)?;
                Ok(MarketModel::Heston {
                    mu,
                    rho: require_curve(&self.curves.rho, "rho", kind)?,
                    variance: CirParams::new(*kappa, *theta, *eta, *v0)?,
                })
            }
            ModelSection::Vasicek { a, b, xi, r0 } => {
                forbid_curve(&self.curves.rho, "rho", kind)?;
                Ok(MarketModel::Vasicek {
                    mu,
                    sigma: require_curve(&self.curves.sigma, "sigma", kind)?,
                    rate: OuParams::new(*a, *b, *xi, *r0)?,
                })
            }
            ModelSection::HullWhite {
                kappa,
                a,
                theta,
                r0,
            } => {
                forbid_curve(&self.curves.rho, "rho", kind)?;
                Ok(MarketModel::HullWhite {
                    mu,
                    sigma: require_curve(&self.curves.sigma, "sigma", kind)?,
                    rate: HwParams::new(kappa.build()?, *a, *theta, *r0)?,
                })
            }
            ModelSection::CirRate {
                kappa,
                theta,
                eta,
                r0,
            } => {
                forbid_curve(&self.curves.rho, "rho", kind)?;
                Ok(MarketModel::CirRate {
                    mu,
                    sigma: require_curve(&self.curves.sigma, "sigma", kind)?,
                    rate: CirParams::new(*kappa, *theta, *eta, *r0)?,
                })
            }
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.horizon, self.grid.n_steps)
    }

    pub fn delay_spec(&self) -> Result<DelaySpec> {
        DelaySpec::new(
            self.delays.d_stock,
            self.delays.d_rate.unwrap_or(0.0),
            self.grid.horizon,
        )
    }

    pub fn mc_run(&self) -> McRun {
        let mut run =
            McRun::new(self.mc.n_paths, self.mc.seed).with_sigma_floor(self.sigma_floor());
        if let Some(pi_max) = self.mc.pi_max {
            run = run.with_pi_max(pi_max);
        }
        run
    }

    /// Validates every section together and returns the runnable bundle.
    pub fn build(&self) -> Result<Experiment> {
        if self.mc.n_paths == 0 {
            return Err(Error::Config("[mc] n_paths must be positive".into()));
        }
        if let Some(pi_max) = self.mc.pi_max {
            if !(pi_max > 0.0) || !pi_max.is_finite() {
                return Err(Error::Config(format!(
                    "[mc] pi_max must be finite and positive, got {pi_max}"
                )));
            }
        }
        if let Some(floor) = self.curves.sigma_floor {
            if !(floor > 0.0) || !floor.is_finite() {
                return Err(Error::Config(format!(
                    "[curves] sigma_floor must be finite and positive, got {floor}"
                )));
            }
        }
        if let Some(temporal) = &self.temporal {
            if let Some(tol) = temporal.tol {
                if !(tol > 0.0) || !tol.is_finite() {
                    return Err(Error::Config(format!(
                        "[temporal] tol must be finite and positive, got {tol}"
                    )));
                }
            }
            if temporal.sweep_param.is_some() {
                temporal.sweep_axis()?;
            }
        }
        let model = self.market_model()?;
        let grid = self.time_grid()?;
        let delays = self.delay_spec()?;
        model.validate(&grid, self.sigma_floor())?;
        Ok(Experiment {
            model,
            grid,
            delays,
            run: self.mc_run(),
            strategy: self.strategy,
            sigma_floor: self.sigma_floor(),
        })
    }
}
