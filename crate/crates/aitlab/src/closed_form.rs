//! Closed-form utility values the Monte Carlo engine is checked against.
//!
//! V^pi_bar is the expected log-wealth of the benchmark trader; Delta V is
//! the additional value earned by the delayed-information strategy. With a
//! single delay d on the stock flow the difference is model-independent:
//!   Delta V = d/(2T) + ln(T/d)/2.
//! With an additional delay d_rate on an additive short-rate flow a penalty
//! appears:
//!   Delta V = d/(2T) + ln(T/d)/2
//!           - (xi^2/(4a)) int_0^T (1 - e^{-2a (t ^ d_rate)}) / sigma^2(t) dt,
//! which can turn negative. A square-root (CIR) short rate admits no such
//! closed form (its conditional variance is state-dependent); that case is
//! served by Monte Carlo only.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{integrate_fn, integrate_samples, Curve, TimeGrid};
use crate::model::MarketModel;
use crate::numeric::mean_and_std_error;
use crate::stochastic::{
    cir_moments, hw_moments, ou_moments, path_rng, CirParams, CirTransition, HwParams, OuParams,
    TAG_CLOSED_FORM,
};
use crate::strategy::DelaySpec;

/// `d/(2T) + ln(T/d)/2`: the single-delay divergence value, identical under
/// Black-Scholes, Heston, and an undelayed short-rate flow.
pub fn delta_v_single_delay(horizon: f64, d: f64) -> Result<f64> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParam {
            name: "horizon",
            reason: format!("horizon must be finite and > 0, got {horizon}"),
        });
    }
    if !(d > 0.0) || d > horizon {
        return Err(Error::InvalidDelay(format!(
            "single-delay formula needs d in (0, {horizon}], got {d}"
        )));
    }
    Ok(d / (2.0 * horizon) + 0.5 * (horizon / d).ln())
}

fn check_floor(sigma: &Curve, grid: &TimeGrid, floor: f64) -> Result<()> {
    crate::grid::volatility_floor_check(sigma, grid, floor)
}

/// `int_0^T (sigma^2 pi_bar^2 / 2 + rho) dt` with
/// `pi_bar = (mu - rho)/sigma^2`.
pub fn v_merton_bsm(
    mu: &Curve,
    rho: &Curve,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    check_floor(sigma, grid, floor)?;
    integrate_fn(
        |t| {
            let excess = mu.value(t) - rho.value(t);
            let s = sigma.value(t);
            0.5 * excess * excess / (s * s) + rho.value(t)
        },
        grid,
    )
}

/// `int_0^T ((mu - rho)^2 E[1/V]/2 + rho) dt` with `E[1/V(t)]` estimated by
/// Monte Carlo over exact variance paths shared across all grid times.
/// Returns `(value, std_error)`; the SE is the sampling uncertainty of the
/// embedded estimate. Requires the strict moment condition
/// `kappa theta >= eta^2`, without which the integrand diverges.
pub fn v_merton_heston(
    mu: &Curve,
    rho: &Curve,
    variance: &CirParams,
    grid: &TimeGrid,
    n_paths: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    variance.require_inverse_moment()?;
    if n_paths < 2 {
        return Err(Error::InvalidParam {
            name: "n_paths",
            reason: format!("need at least 2 paths for a standard error, got {n_paths}"),
        });
    }
    let transition = CirTransition::new(variance, grid.dt())?;
    let n_points = grid.n_points();
    let weights: Vec<f64> = (0..n_points)
        .map(|i| {
            let t = grid.t(i);
            let excess = mu.value(t) - rho.value(t);
            0.5 * excess * excess
        })
        .collect();
    let rho_integral = integrate_fn(|t| rho.value(t), grid)?;
    // Per-path quadrature of the 1/V part; the mean over paths is then the
    // quadrature of E[1/V], with an honest SE because paths are shared
    // across grid times.
    let per_path: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|path_index| -> Result<f64> {
            let mut rng = path_rng(seed, path_index, TAG_CLOSED_FORM);
            let path = transition.sample_path(grid.n_steps(), &mut rng);
            let samples: Vec<f64> = (0..n_points).map(|i| weights[i] / path[i]).collect();
            integrate_samples(&samples, grid)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_and_std_error(&per_path)?;
    Ok((mean + rho_integral, se))
}

fn v_merton_rate_moments<M>(
    mu: &Curve,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
    moments: M,
) -> Result<f64>
where
    M: Fn(f64) -> Result<crate::stochastic::Moments>,
{
    check_floor(sigma, grid, floor)?;
    let n_points = grid.n_points();
    let mut samples = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let t = grid.t(i);
        let m = moments(t)?;
        let mu_t = mu.value(t);
        let s = sigma.value(t);
        // E[(mu - R)^2] = (mu - E[R])^2 + Var[R].
        let spread = (mu_t - m.mean) * (mu_t - m.mean) + m.variance;
        samples.push(spread / (2.0 * s * s) + m.mean);
    }
    integrate_samples(&samples, grid)
}

/// `int_0^T (E[(mu - R)^2]/(2 sigma^2) + E[R]) dt` from exact OU moments.
pub fn v_merton_vasicek(
    mu: &Curve,
    sigma: &Curve,
    rate: &OuParams,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    v_merton_rate_moments(mu, sigma, grid, floor, |t| ou_moments(rate, t))
}

/// Same moment quadrature with the Hull-White rate.
pub fn v_merton_hull_white(
    mu: &Curve,
    sigma: &Curve,
    rate: &HwParams,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    v_merton_rate_moments(mu, sigma, grid, floor, |t| hw_moments(rate, t))
}

/// Same moment quadrature with the CIR rate.
pub fn v_merton_cir_rate(
    mu: &Curve,
    sigma: &Curve,
    rate: &CirParams,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    v_merton_rate_moments(mu, sigma, grid, floor, |t| cir_moments(rate, t))
}

/// Plain trapezoid on `[a, b]` with at least one panel.
fn integrate_segment<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..n {
        sum += f(a + h * i as f64);
    }
    sum * h
}

pub(crate) fn two_delay_difference_additive(
    horizon: f64,
    delays: &DelaySpec,
    a: f64,
    diffusion: f64,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    check_floor(sigma, grid, floor)?;
    let d = DelaySpec::new(delays.d_stock, delays.d_rate, horizon)?;
    let single = delta_v_single_delay(horizon, d.d_stock)?;
    if diffusion == 0.0 || d.d_rate == 0.0 {
        return Ok(single);
    }
    // Split at t = d_rate where the integrand's time dependence kinks.
    let integrand = |t: f64| {
        let lag = t.min(d.d_rate);
        let s = sigma.value(t);
        (1.0 - (-2.0 * a * lag).exp()) / (s * s)
    };
    let panels_per_unit = (grid.n_steps() as f64 / horizon).max(1.0);
    let left_panels = (panels_per_unit * d.d_rate).ceil() as usize;
    let right_panels = (panels_per_unit * (horizon - d.d_rate)).ceil() as usize;
    let integral = integrate_segment(integrand, 0.0, d.d_rate, left_panels)
        + integrate_segment(integrand, d.d_rate, horizon, right_panels);
    Ok(single - diffusion * diffusion / (4.0 * a) * integral)
}

/// Two-delay divergence value under a Vasicek rate:
/// `d_stock/(2T) + ln(T/d_stock)/2 - (xi^2/4a) int (1-e^{-2a (t^d_rate)})/sigma^2 dt`.
/// May be negative: the rate-information penalty can outweigh the stock gain.
pub fn two_delay_difference(
    horizon: f64,
    delays: &DelaySpec,
    rate: &OuParams,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    two_delay_difference_additive(horizon, delays, rate.a, rate.xi, sigma, grid, floor)
}

/// Two-delay divergence under a Hull-White rate: identical in form, with the
/// diffusion coefficient theta in place of xi (the kappa(t) drift does not
/// enter the conditional variance).
pub fn two_delay_difference_hw(
    horizon: f64,
    delays: &DelaySpec,
    rate: &HwParams,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    two_delay_difference_additive(horizon, delays, rate.a, rate.theta, sigma, grid, floor)
}

/// Closed-form values for a model/delay configuration, with a note recording
/// which expression produced each number. `delta_v` is `None` exactly when no
/// closed form exists (delayed square-root rate).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub v_merton: f64,
    /// Sampling uncertainty of `v_merton`; nonzero only for Heston, whose
    /// `E[1/V]` is estimated by an embedded Monte Carlo.
    pub v_merton_se: f64,
    pub delta_v: Option<f64>,
    pub v_ait: Option<f64>,
    pub v_merton_note: &'static str,
    pub delta_v_note: &'static str,
}

/// Assembles the closed-form report. `mc_paths`/`mc_seed` feed the embedded
/// estimate of `E[1/V]` when the model is Heston and are ignored otherwise.
pub fn closed_form_report(
    model: &MarketModel,
    delays: Option<&DelaySpec>,
    grid: &TimeGrid,
    floor: f64,
    mc_paths: u64,
    mc_seed: u64,
) -> Result<ClosedFormReport> {
    let horizon = grid.horizon();
    let (v_merton, v_merton_se, v_merton_note) = match model {
        MarketModel::BlackScholes { mu, rho, sigma } => (
            v_merton_bsm(mu, rho, sigma, grid, floor)?,
            0.0,
            "integral of sigma^2 pi_bar^2 / 2 + rho",
        ),
        MarketModel::Heston { mu, rho, variance } => {
            let (v, se) = v_merton_heston(mu, rho, variance, grid, mc_paths, mc_seed)?;
            (
                v,
                se,
                "integral of (mu-rho)^2 E[1/V]/2 + rho, E[1/V] by embedded Monte Carlo",
            )
        }
        MarketModel::Vasicek { mu, sigma, rate } => (
            v_merton_vasicek(mu, sigma, rate, grid, floor)?,
            0.0,
            "integral of E[(mu-R)^2]/(2 sigma^2) + E[R] from exact moments",
        ),
        MarketModel::HullWhite { mu, sigma, rate } => (
            v_merton_hull_white(mu, sigma, rate, grid, floor)?,
            0.0,
            "integral of E[(mu-R)^2]/(2 sigma^2) + E[R] from exact moments",
        ),
        MarketModel::CirRate { mu, sigma, rate } => (
            v_merton_cir_rate(mu, sigma, rate, grid, floor)?,
            0.0,
            "integral of E[(mu-R)^2]/(2 sigma^2) + E[R] from exact moments",
        ),
    };
    let (delta_v, delta_v_note) = match delays {
        None => (None, "no delayed strategy requested"),
        Some(d) => {
            let d = DelaySpec::new(d.d_stock, d.d_rate, horizon)?;
            if d.d_rate == 0.0 {
                (
                    Some(delta_v_single_delay(horizon, d.d_stock)?),
                    "d/(2T) + ln(T/d)/2, model-independent for an undelayed rate flow",
                )
            } else {
                match model {
                    MarketModel::Vasicek { sigma, rate, .. } => (
                        Some(two_delay_difference(horizon, &d, rate, sigma, grid, floor)?),
                        "single-delay value minus the rate-information penalty (xi^2/4a) integral",
                    ),
                    MarketModel::HullWhite { sigma, rate, .. } => (
                        Some(two_delay_difference_hw(horizon, &d, rate, sigma, grid, floor)?),
                        "single-delay value minus the rate-information penalty (theta^2/4a) integral",
                    ),
                    MarketModel::CirRate { .. } => (
                        None,
                        "no closed form: square-root rate has state-dependent conditional \
                         variance; Monte Carlo only",
                    ),
                    _ => {
                        return Err(Error::InvalidDelay(format!(
                            "d_rate > 0 requires a short-rate model, got {}",
                            model.name()
                        )))
                    }
                }
            }
        }
    };
    Ok(ClosedFormReport {
        v_merton,
        v_merton_se,
        delta_v,
        v_ait: delta_v.map(|d| v_merton + d),
        v_merton_note,
        delta_v_note,
    })
}
