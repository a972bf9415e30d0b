//! Temporal value of information.
//!
//! With equal delays d on both flows the divergence value is
//!   f(d) = d/(2T) + ln(T/d)/2
//!        - (xi^2/(4a)) int_0^T (1 - e^{-2a (t ^ d)}) / sigma^2(t) dt.
//! f is continuous and strictly decreasing on (0, T] with f(0+) = +infinity,
//! so it has at most one root d*: the delay at which the insider's stock-flow
//! advantage is exactly cancelled by the delayed rate information. When
//! f(T) > 0 no such delay exists and the temporal value is infinite; xi != 0
//! is necessary for a finite value.

use rayon::prelude::*;

use crate::closed_form::two_delay_difference_additive;
use crate::error::{Error, Result};
use crate::grid::{Curve, TimeGrid};
use crate::numeric::bisect;
use crate::stochastic::{HwParams, OuParams};
use crate::strategy::DelaySpec;

/// Default |f(d*)| tolerance for the root.
pub const DEFAULT_TEMPORAL_TOL: f64 = 1e-10;
/// Lower bracket endpoint as a fraction of the horizon. f is monotone but its
/// derivative is unbounded near 0; a bracketed search from here is
/// unconditionally safe.
pub const BRACKET_EPS: f64 = 1e-12;
const MAX_BISECT_ITER: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemporalValueKind {
    Finite { d_star: f64, residual: f64 },
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalValueResult {
    pub kind: TemporalValueKind,
    /// The bracket the search ran on (recorded also for the infinite case).
    pub bracket: (f64, f64),
}

impl TemporalValueResult {
    pub fn d_star(&self) -> Option<f64> {
        match self.kind {
            TemporalValueKind::Finite { d_star, .. } => Some(d_star),
            TemporalValueKind::Infinite => None,
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self.kind {
            TemporalValueKind::Finite { residual, .. } => Some(residual),
            TemporalValueKind::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, TemporalValueKind::Finite { .. })
    }
}

/// The function whose root is the temporal value: the equal-delay divergence
/// evaluated at `d`.
pub fn equal_delay_difference(
    horizon: f64,
    d: f64,
    a: f64,
    diffusion: f64,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
) -> Result<f64> {
    let delays = DelaySpec::new(d, d, horizon)?;
    two_delay_difference_additive(horizon, &delays, a, diffusion, sigma, grid, floor)
}

fn check_rate_params(a: f64, diffusion: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParam {
            name: "a",
            reason: format!("mean reversion must be finite and > 0, got {a}"),
        });
    }
    if !(diffusion >= 0.0) || !diffusion.is_finite() {
        return Err(Error::InvalidParam {
            name: "diffusion",
            reason: format!("rate diffusion must be finite and >= 0, got {diffusion}"),
        });
    }
    Ok(())
}

/// Finds the temporal value for an additive short rate with mean reversion
/// `a` and diffusion coefficient `diffusion` (xi for Vasicek, theta for
/// Hull-White; the drift level never enters). Returns `Infinite` when
/// `f(T) > 0`, otherwise the unique root by bracketed bisection on
/// `(BRACKET_EPS * T, T]`.
pub fn temporal_value(
    horizon: f64,
    a: f64,
    diffusion: f64,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
    tol: f64,
) -> Result<TemporalValueResult> {
    check_rate_params(a, diffusion)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParam {
            name: "tol",
            reason: format!("tolerance must be > 0, got {tol}"),
        });
    }
    let lo = BRACKET_EPS * horizon;
    let bracket = (lo, horizon);
    let f = |d: f64| equal_delay_difference(horizon, d, a, diffusion, sigma, grid, floor);
    if f(horizon)? > 0.0 {
        return Ok(TemporalValueResult {
            kind: TemporalValueKind::Infinite,
            bracket,
        });
    }
    // Quadrature failures inside the root search surface after the fact; the
    // NaN makes bisect bail out immediately.
    let failure = std::cell::Cell::new(None);
    let result = bisect(
        |d| match f(d) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        },
        lo,
        horizon,
        tol,
        MAX_BISECT_ITER,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let result = result?;
    if result.residual.abs() > tol {
        return Err(Error::Bracket(format!(
            "bisection stalled at residual {} above tolerance {tol}",
            result.residual
        )));
    }
    Ok(TemporalValueResult {
        kind: TemporalValueKind::Finite {
            d_star: result.root,
            residual: result.residual.abs(),
        },
        bracket,
    })
}

/// Temporal value under a Vasicek rate.
pub fn temporal_value_ou(
    horizon: f64,
    rate: &OuParams,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
    tol: f64,
) -> Result<TemporalValueResult> {
    temporal_value(horizon, rate.a, rate.xi, sigma, grid, floor, tol)
}

/// Temporal value under a Hull-White rate; kappa(t) does not enter.
pub fn temporal_value_hw(
    horizon: f64,
    rate: &HwParams,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
    tol: f64,
) -> Result<TemporalValueResult> {
    temporal_value(horizon, rate.a, rate.theta, sigma, grid, floor, tol)
}

/// Which parameter a sweep varies; the other one is held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Vary the mean reversion `a` at fixed diffusion.
    MeanReversion,
    /// Vary the diffusion coefficient at fixed `a`.
    Diffusion,
}

impl SweepAxis {
    pub fn param_name(&self) -> &'static str {
        match self {
            SweepAxis::MeanReversion => "a",
            SweepAxis::Diffusion => "xi",
        }
    }
}

/// One sweep row: the swept parameter value and the temporal value found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub param_name: &'static str,
    pub param_value: f64,
    pub result: TemporalValueResult,
}

/// Runs `temporal_value` across `values` of the swept parameter, the other
/// rate parameter fixed at `other`. Values must be strictly increasing and
/// admissible for the axis.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    other: f64,
    horizon: f64,
    sigma: &Curve,
    grid: &TimeGrid,
    floor: f64,
    tol: f64,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidParam {
            name: "values",
            reason: "sweep needs at least one parameter value".into(),
        });
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParam {
            name: "values",
            reason: "sweep values must be strictly increasing".into(),
        });
    }
    for &v in values {
        match axis {
            SweepAxis::MeanReversion => check_rate_params(v, other)?,
            SweepAxis::Diffusion => check_rate_params(other, v)?,
        }
    }
    values
        .par_iter()
        .map(|&v| {
            let (a, diffusion) = match axis {
                SweepAxis::MeanReversion => (v, other),
                SweepAxis::Diffusion => (other, v),
            };
            let result = temporal_value(horizon, a, diffusion, sigma, grid, floor, tol)?;
            Ok(SweepRow {
                param_name: axis.param_name(),
                param_value: v,
                result,
            })
        })
        .collect()
}
