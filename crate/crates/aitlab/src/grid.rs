//! Uniform time grids and deterministic coefficient curves on `[0, T]`.
//!
//! Every simulation, quadrature, and closed-form evaluation in this crate
//! shares one uniform partition 0 = t_0 < t_1 < ... < t_n = T. Coefficient
//! curves (drift mu, bond rate rho, volatility sigma, Hull-White level kappa)
//! are either constant or piecewise linear with knots spanning the horizon.

use crate::error::{Error, Result};

/// Uniform partition of `[0, horizon]` into `n_steps` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "horizon must be finite and > 0, got {horizon}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be >= 1".into()));
        }
        Ok(TimeGrid {
            horizon,
            n_steps,
            dt: horizon / n_steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `t_i`, computed as `horizon * i / n` so that `t(n_steps) == horizon`
    /// exactly.
    pub fn t(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_steps);
        self.horizon * (i as f64 / self.n_steps as f64)
    }

    /// Index of the greatest grid point at or below `time` (clamped to the
    /// grid), with a relative slack of 1e-9 steps absorbing float noise in
    /// expressions like `t - d`.
    pub fn floor_index(&self, time: f64) -> usize {
        if time <= 0.0 {
            return 0;
        }
        let idx = (time / self.dt + 1e-9).floor() as usize;
        idx.min(self.n_steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points()).map(move |i| self.t(i))
    }
}

/// Deterministic coefficient curve on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Constant(f64),
    /// Piecewise-linear interpolation through strictly increasing knots.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl Curve {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "constant value must be finite, got {value}"
            )));
        }
        Ok(Curve::Constant(value))
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "piecewise-linear curve needs at least 2 knots, got {}",
                knots.len()
            )));
        }
        for (i, &(t, v)) in knots.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "knot {i} is not finite: ({t}, {v})"
                )));
            }
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidCurve(format!(
                    "knot abscissae must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Curve::PiecewiseLinear(knots))
    }

    /// Checks that the knots span `[0, horizon]` (within 1e-9 relative slack).
    pub fn check_span(&self, horizon: f64) -> Result<()> {
        if let Curve::PiecewiseLinear(knots) = self {
            let tol = 1e-9 * horizon.max(1.0);
            let first = knots.first().expect("validated nonempty").0;
            let last = knots.last().expect("validated nonempty").0;
            if first.abs() > tol {
                return Err(Error::InvalidCurve(format!(
                    "first knot must sit at t = 0, got {first}"
                )));
            }
            if (last - horizon).abs() > tol {
                return Err(Error::InvalidCurve(format!(
                    "last knot must sit at the horizon {horizon}, got {last}"
                )));
            }
        }
        Ok(())
    }

    /// Value at `t`; clamped to the end values outside the knot range.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Curve::Constant(v) => *v,
            Curve::PiecewiseLinear(knots) => {
                if t <= knots[0].0 {
                    return knots[0].1;
                }
                let last = knots[knots.len() - 1];
                if t >= last.0 {
                    return last.1;
                }
                // partition_point returns the first knot strictly beyond t.
                let hi = knots.partition_point(|&(kt, _)| kt <= t);
                let (t0, v0) = knots[hi - 1];
                let (t1, v1) = knots[hi];
                let w = (t - t0) / (t1 - t0);
                v0 + w * (v1 - v0)
            }
        }
    }

    /// Samples the curve at every grid point.
    pub fn sample(&self, grid: &TimeGrid) -> Vec<f64> {
        grid.times().map(|t| self.value(t)).collect()
    }

    /// Minimum over the grid points.
    pub fn min_on_grid(&self, grid: &TimeGrid) -> f64 {
        match self {
            Curve::Constant(v) => *v,
            Curve::PiecewiseLinear(_) => grid
                .times()
                .map(|t| self.value(t))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Exact `int_s^t value(u) * exp(-a (t - u)) du` for `a > 0`, evaluated
    /// piece by piece. Used for Hull-White conditional means, where quadrature
    /// error would otherwise leak into every transition.
    pub fn integral_exp_weighted(&self, a: f64, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::TimeOrder { s, t });
        }
        if !(a > 0.0) {
            return Err(Error::InvalidParam {
                name: "a",
                reason: format!("mean reversion must be > 0, got {a}"),
            });
        }
        match self {
            Curve::Constant(v) => Ok(v / a * (1.0 - (-a * (t - s)).exp())),
            Curve::PiecewiseLinear(knots) => {
                let mut total = 0.0;
                let mut segments: Vec<(f64, f64)> = Vec::new();
                // Clamped extension outside the knot range is handled by
                // synthesizing flat end segments.
                let (k0, kn) = (knots[0], knots[knots.len() - 1]);
                if s < k0.0 {
                    segments.push((s.min(k0.0), k0.0));
                }
                for w in knots.windows(2) {
                    segments.push((w[0].0, w[1].0));
                }
                if t > kn.0 {
                    segments.push((kn.0, t));
                }
                for (lo, hi) in segments {
                    let (lo, hi) = (lo.max(s), hi.min(t));
                    if hi <= lo {
                        continue;
                    }
                    let v_lo = self.value(lo);
                    let v_hi = self.value(hi);
                    let slope = if hi > lo {
                        (v_hi - v_lo) / (hi - lo)
                    } else {
                        0.0
                    };
                    // int_lo^hi (v_lo + slope (u - lo)) e^{-a (t - u)} du with
                    // antiderivative e^{-a(t-u)} (v(u)/a - slope/a^2).
                    let at_hi = (-a * (t - hi)).exp() * (v_hi / a - slope / (a * a));
                    let at_lo = (-a * (t - lo)).exp() * (v_lo / a - slope / (a * a));
                    total += at_hi - at_lo;
                }
                Ok(total)
            }
        }
    }
}

/// Trapezoid rule over per-grid-point samples. Rejects length mismatches and
/// non-finite samples, naming the offending index.
pub fn integrate_samples(values: &[f64], grid: &TimeGrid) -> Result<f64> {
    if values.len() != grid.n_points() {
        return Err(Error::LengthMismatch {
            expected: grid.n_points(),
            got: values.len(),
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let n = grid.n_steps();
    let mut interior = 0.0;
    for &v in &values[1..n] {
        interior += v;
    }
    Ok(grid.dt() * (0.5 * (values[0] + values[n]) + interior))
}

/// Trapezoid rule for a function sampled on the grid.
pub fn integrate_fn<F: Fn(f64) -> f64>(f: F, grid: &TimeGrid) -> Result<f64> {
    let values: Vec<f64> = grid.times().map(f).collect();
    integrate_samples(&values, grid)
}

/// Trapezoid rule for a curve sampled on the grid.
pub fn integrate_curve(curve: &Curve, grid: &TimeGrid) -> Result<f64> {
    integrate_fn(|t| curve.value(t), grid)
}

/// Inclusive floor check: every grid sample of `sigma` must satisfy
/// `sigma(t) >= floor`. Returns the first violation.
pub fn volatility_floor_check(sigma: &Curve, grid: &TimeGrid, floor: f64) -> Result<()> {
    if !(floor > 0.0) {
        return Err(Error::InvalidParam {
            name: "sigma_floor",
            reason: format!("floor must be > 0, got {floor}"),
        });
    }
    for t in grid.times() {
        let value = sigma.value(t);
        if !(value >= floor) {
            return Err(Error::VolatilityFloor {
                at: t,
                value,
                floor,
            });
        }
    }
    Ok(())
}
