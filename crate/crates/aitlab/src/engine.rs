//! Anticipating Monte Carlo engine.
//!
//! Forward integrals are discretized as left-point Riemann sums
//! sum_i phi(t_i) (B(t_{i+1}) - B(t_i)), which anticipating integrands enter
//! through their left-evaluated values. Log-wealth is accumulated in the
//! exponent
//!   log X(T) = int (rho_hat + (mu - rho_hat) pi - 1/2 Sigma^2 pi^2) dt
//!            + int Sigma pi d^-B
//! (trapezoid for dt at left-held pi, left sum for d^-B) and is never
//! exponentiated. Paths derive their streams from (seed, path_index), the
//! per-path results are reduced by a deterministic pairwise tree, so
//! estimates are bit-identical for any worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::MarketModel;
use crate::numeric::{mean_and_std_error, McEstimate};
use crate::stochastic::{sample_brownian_pair, PathBundle};
use crate::strategy::{DelaySpec, PathView, PreparedStrategy, Strategy};

/// Default clamp on |pi|; generous enough that clamping never fires for sane
/// configurations (a clamp count > 0 is a red flag, reported, never silent).
pub const DEFAULT_PI_MAX: f64 = 1e6;
/// Default inclusive lower bound enforced on volatility curves.
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-6;

/// Run parameters shared by the Monte Carlo entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRun {
    pub n_paths: u64,
    pub seed: u64,
    pub pi_max: f64,
    pub sigma_floor: f64,
}

impl McRun {
    pub fn new(n_paths: u64, seed: u64) -> Self {
        McRun {
            n_paths,
            seed,
            pi_max: DEFAULT_PI_MAX,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
        }
    }

    pub fn with_pi_max(mut self, pi_max: f64) -> Self {
        self.pi_max = pi_max;
        self
    }

    pub fn with_sigma_floor(mut self, sigma_floor: f64) -> Self {
        self.sigma_floor = sigma_floor;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidParam {
                name: "n_paths",
                reason: format!(
                    "need at least 2 paths for a standard error, got {}",
                    self.n_paths
                ),
            });
        }
        if !(self.pi_max > 0.0) || !self.pi_max.is_finite() {
            return Err(Error::InvalidParam {
                name: "pi_max",
                reason: format!("clamp bound must be finite and > 0, got {}", self.pi_max),
            });
        }
        Ok(())
    }
}

/// Log-wealth exponent of one path, drift and stochastic parts kept separate
/// for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WealthExponent {
    pub drift_integral: f64,
    pub stochastic_integral: f64,
}

impl WealthExponent {
    pub fn log_wealth(&self) -> f64 {
        self.drift_integral + self.stochastic_integral
    }
}

/// Left-point Riemann sum `sum_i phi(t_i) (B(t_{i+1}) - B(t_i))`.
/// `phi` holds per-grid-point values (one more entry than `b_incr`); the
/// terminal value does not enter the sum.
pub fn forward_integral_left(phi: &[f64], b_incr: &[f64]) -> Result<f64> {
    if phi.len() != b_incr.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: b_incr.len() + 1,
            got: phi.len(),
        });
    }
    let mut sum = 0.0;
    for (i, (&p, &db)) in phi.iter().zip(b_incr.iter()).enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFinite { index: i, value: p });
        }
        sum += p * db;
    }
    Ok(sum)
}

/// Market coefficients per grid point: bond rate rho_hat, drift mu, and
/// volatility Sigma, with the deterministic parts precomputed.
#[derive(Debug, Clone)]
enum CoefficientPlan {
    /// Black-Scholes: everything deterministic.
    Deterministic {
        mu: Vec<f64>,
        rho: Vec<f64>,
        sigma: Vec<f64>,
        sigma_sq: Vec<f64>,
    },
    /// Heston: Sigma^2 = V_i from the state path.
    StochasticVol { mu: Vec<f64>, rho: Vec<f64> },
    /// Short-rate models: rho_hat = R_i from the state path.
    StochasticRate {
        mu: Vec<f64>,
        sigma: Vec<f64>,
        sigma_sq: Vec<f64>,
    },
}

impl CoefficientPlan {
    fn new(model: &MarketModel, grid: &TimeGrid) -> Self {
        let n = grid.n_points();
        let mu: Vec<f64> = (0..n).map(|i| model.mu().value(grid.t(i))).collect();
        match model {
            MarketModel::BlackScholes { rho, sigma, .. } => {
                let rho = (0..n).map(|i| rho.value(grid.t(i))).collect();
                let sigma: Vec<f64> = (0..n).map(|i| sigma.value(grid.t(i))).collect();
                let sigma_sq = sigma.iter().map(|s| s * s).collect();
                CoefficientPlan::Deterministic {
                    mu,
                    rho,
                    sigma,
                    sigma_sq,
                }
            }
            MarketModel::Heston { rho, .. } => {
                let rho = (0..n).map(|i| rho.value(grid.t(i))).collect();
                CoefficientPlan::StochasticVol { mu, rho }
            }
            _ => {
                let sigma_curve = model
                    .sigma()
                    .expect("short-rate models carry a sigma curve");
                let sigma: Vec<f64> = (0..n).map(|i| sigma_curve.value(grid.t(i))).collect();
                let sigma_sq = sigma.iter().map(|s| s * s).collect();
                CoefficientPlan::StochasticRate {
                    mu,
                    sigma,
                    sigma_sq,
                }
            }
        }
    }

    /// `(mu, rho_hat, sigma, sigma_sq)` at grid point `i`.
    #[inline]
    fn at(&self, i: usize, state: Option<&[f64]>) -> (f64, f64, f64, f64) {
        match self {
            CoefficientPlan::Deterministic {
                mu,
                rho,
                sigma,
                sigma_sq,
            } => (mu[i], rho[i], sigma[i], sigma_sq[i]),
            CoefficientPlan::StochasticVol { mu, rho } => {
                let v = state.expect("Heston requires a variance path")[i];
                (mu[i], rho[i], v.sqrt(), v)
            }
            CoefficientPlan::StochasticRate {
                mu,
                sigma,
                sigma_sq,
            } => {
                let r = state.expect("short-rate models require a rate path")[i];
                (mu[i], r, sigma[i], sigma_sq[i])
            }
        }
    }
}

/// One path's exponent plus the number of clamped strategy evaluations.
#[allow(clippy::too_many_arguments)]
fn path_exponent(
    prepared: &PreparedStrategy,
    plan: &CoefficientPlan,
    grid: &TimeGrid,
    bundle: &PathBundle,
    state: Option<&[f64]>,
    g: f64,
    pi_max: f64,
    path_index: u64,
) -> Result<(WealthExponent, u64)> {
    let n = grid.n_steps();
    let dt = grid.dt();
    let mut view = PathView::new(bundle, state, g);
    let mut drift = 0.0;
    let mut stoch = 0.0;
    let mut clamps = 0u64;
    for i in 0..=n {
        let (stock_limit, state_limit) = prepared.limits(i);
        view.set_limits(stock_limit, state_limit);
        let mut pi = prepared.fraction(i, &view)?;
        if !pi.is_finite() {
            return Err(Error::NonFinitePortfolio {
                path: path_index,
                step: i,
            });
        }
        if pi.abs() > pi_max {
            pi = pi.clamp(-pi_max, pi_max);
            clamps += 1;
        }
        let (mu, rho_hat, sigma, sigma_sq) = plan.at(i, state);
        let f = rho_hat + (mu - rho_hat) * pi - 0.5 * sigma_sq * pi * pi;
        let weight = if i == 0 || i == n { 0.5 } else { 1.0 };
        drift += weight * f;
        if i < n {
            stoch += sigma * pi * bundle.b_incr[i];
        }
    }
    Ok((
        WealthExponent {
            drift_integral: drift * dt,
            stochastic_integral: stoch,
        },
        clamps,
    ))
}

/// Exponent of one supplied path under a strategy; the insider value is bound
/// to the path's terminal Brownian value. Convenience wrapper that prepares
/// tables per call; the `mc_*` entry points prepare once.
pub fn log_wealth(
    strategy: &Strategy<'_>,
    grid: &TimeGrid,
    bundle: &PathBundle,
    state: Option<&[f64]>,
    run: &McRun,
) -> Result<WealthExponent> {
    let prepared = strategy.prepare(grid, run.sigma_floor)?;
    let plan = CoefficientPlan::new(strategy.model(), grid);
    let g = bundle.b_terminal();
    path_exponent(&prepared, &plan, grid, bundle, state, g, run.pi_max, 0)
        .map(|(exponent, _)| exponent)
}

fn summarize(values: &[f64], grid: &TimeGrid, run: &McRun, clamp_count: u64) -> Result<McEstimate> {
    let (mean, std_error) = mean_and_std_error(values)?;
    Ok(McEstimate {
        mean,
        std_error,
        n_paths: run.n_paths,
        n_steps: grid.n_steps() as u64,
        seed: run.seed,
        clamp_count,
    })
}

/// `E[log X^pi(T)]` over independent paths.
pub fn mc_expected_log_wealth(
    strategy: &Strategy<'_>,
    grid: &TimeGrid,
    run: &McRun,
) -> Result<McEstimate> {
    run.check()?;
    let prepared = strategy.prepare(grid, run.sigma_floor)?;
    let plan = CoefficientPlan::new(strategy.model(), grid);
    let dynamics = strategy.model().state_dynamics(grid)?;
    let per_path: Vec<(f64, u64)> = (0..run.n_paths)
        .into_par_iter()
        .map(|path_index| -> Result<(f64, u64)> {
            let bundle = sample_brownian_pair(grid, run.seed, path_index);
            let state = dynamics.sample(grid, run.seed, path_index, &bundle)?;
            let g = bundle.b_terminal();
            let (exponent, clamps) = path_exponent(
                &prepared,
                &plan,
                grid,
                &bundle,
                state.as_deref(),
                g,
                run.pi_max,
                path_index,
            )?;
            Ok((exponent.log_wealth(), clamps))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = per_path.iter().map(|(v, _)| *v).collect();
    let clamp_count = per_path.iter().map(|(_, c)| *c).sum();
    summarize(&values, grid, run, clamp_count)
}

/// `E[log X^pi_hat(T) - log X^pi_bar(T)]` with common random numbers: the same
/// Brownian bundle and state path drive both strategies on every path, so the
/// market noise cancels pathwise and only the divergence is estimated.
pub fn mc_delta_v(
    model: &MarketModel,
    delays: DelaySpec,
    grid: &TimeGrid,
    run: &McRun,
) -> Result<McEstimate> {
    run.check()?;
    let ait = Strategy::ait(model, delays).prepare(grid, run.sigma_floor)?;
    let merton = Strategy::merton(model).prepare(grid, run.sigma_floor)?;
    let plan = CoefficientPlan::new(model, grid);
    let dynamics = model.state_dynamics(grid)?;
    let per_path: Vec<(f64, u64)> = (0..run.n_paths)
        .into_par_iter()
        .map(|path_index| -> Result<(f64, u64)> {
            let bundle = sample_brownian_pair(grid, run.seed, path_index);
            let state = dynamics.sample(grid, run.seed, path_index, &bundle)?;
            let g = bundle.b_terminal();
            let (rich, clamps_a) = path_exponent(
                &ait,
                &plan,
                grid,
                &bundle,
                state.as_deref(),
                g,
                run.pi_max,
                path_index,
            )?;
            let (base, clamps_m) = path_exponent(
                &merton,
                &plan,
                grid,
                &bundle,
                state.as_deref(),
                g,
                run.pi_max,
                path_index,
            )?;
            Ok((rich.log_wealth() - base.log_wealth(), clamps_a + clamps_m))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = per_path.iter().map(|(v, _)| *v).collect();
    let clamp_count = per_path.iter().map(|(_, c)| *c).sum();
    summarize(&values, grid, run, clamp_count)
}

/// Sample mean of the forward integral `int phi d^-B` where `phi` is produced
/// per path by `make_phi(bundle) -> per-grid values`. Diagnostic entry point
/// for integrand-level checks.
pub fn mc_forward_integral<F>(grid: &TimeGrid, run: &McRun, make_phi: F) -> Result<McEstimate>
where
    F: Fn(&PathBundle) -> Result<Vec<f64>> + Sync,
{
    run.check()?;
    let values: Vec<f64> = (0..run.n_paths)
        .into_par_iter()
        .map(|path_index| -> Result<f64> {
            let bundle = sample_brownian_pair(grid, run.seed, path_index);
            let phi = make_phi(&bundle)?;
            forward_integral_left(&phi, &bundle.b_incr)
        })
        .collect::<Result<_>>()?;
    summarize(&values, grid, run, 0)
}
