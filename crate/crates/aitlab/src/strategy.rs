//! Portfolio rules.
//!
//! The Merton benchmark pi_bar per model, the insider correction
//! alpha_d(t,g) = (g - B((t-d)+)) / (T - (t-d)+) for G = B(T), and the
//! delayed-information strategies built from them, including the variant with
//! distinct delays on the stock and rate flows. Strategies are evaluated at
//! left grid points and held over [t_i, t_{i+1}); delayed times snap down to
//! the grid so delayed reads stay exact on the stored path.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Curve, TimeGrid};
use crate::model::{MarketModel, RateDynamics};
use crate::stochastic::PathBundle;

/// Delays on the stock flow and on the rate/volatility flow.
/// `d_rate = 0` means the rate flow is observed without delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySpec {
    pub d_stock: f64,
    pub d_rate: f64,
}

impl DelaySpec {
    /// Requires `0 < d_stock <= horizon` and `0 <= d_rate <= horizon`.
    pub fn new(d_stock: f64, d_rate: f64, horizon: f64) -> Result<Self> {
        if !d_stock.is_finite() || !(d_stock > 0.0) || d_stock > horizon {
            return Err(Error::InvalidDelay(format!(
                "d_stock must lie in (0, {horizon}], got {d_stock}"
            )));
        }
        if !d_rate.is_finite() || !(d_rate >= 0.0) || d_rate > horizon {
            return Err(Error::InvalidDelay(format!(
                "d_rate must lie in [0, {horizon}], got {d_rate}"
            )));
        }
        Ok(DelaySpec { d_stock, d_rate })
    }

    /// Stock delay only; the rate flow is undelayed.
    pub fn one_delay(d_stock: f64, horizon: f64) -> Result<Self> {
        DelaySpec::new(d_stock, 0.0, horizon)
    }
}

/// The insider's extra information. Only the terminal Brownian value is
/// implemented; per path the realized value is bound to `b_terminal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsiderInfo {
    TerminalBrownian,
}

/// Signature of a pluggable correction term `(t, g) -> alpha(t, g)`.
pub type AlphaHook = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// How the correction alpha is computed. `TerminalBrownian` is the closed form
/// for G = B(T); `Custom` admits other information functionals, whose
/// admissibility is the caller's responsibility.
#[derive(Clone)]
pub enum AlphaRule {
    TerminalBrownian,
    Custom(AlphaHook),
}

impl std::fmt::Debug for AlphaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaRule::TerminalBrownian => f.write_str("TerminalBrownian"),
            AlphaRule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Merton,
    Ait,
}

impl StrategyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Merton => "merton",
            StrategyKind::Ait => "ait",
        }
    }
}

// ---------------------------------------------------------------------------
// Measurability-guarded path access
// ---------------------------------------------------------------------------

/// Read access to one path, bounded by per-step index limits. Strategy code
/// receives `&PathView` and can only read `b_values` up to the stock limit and
/// the state path up to the state limit; violations are programming errors
/// caught by debug assertions in test builds.
#[derive(Debug)]
pub struct PathView<'a> {
    bundle: &'a PathBundle,
    state: Option<&'a [f64]>,
    g: f64,
    stock_limit: usize,
    state_limit: usize,
}

impl<'a> PathView<'a> {
    pub fn new(bundle: &'a PathBundle, state: Option<&'a [f64]>, g: f64) -> Self {
        PathView {
            bundle,
            state,
            g,
            stock_limit: 0,
            state_limit: 0,
        }
    }

    /// Raises the visible prefix for the current evaluation step.
    pub fn set_limits(&mut self, stock_limit: usize, state_limit: usize) {
        self.stock_limit = stock_limit;
        self.state_limit = state_limit;
    }

    /// Brownian value at grid index `idx`, restricted to the delayed prefix.
    pub fn brownian(&self, idx: usize) -> f64 {
        debug_assert!(
            idx <= self.stock_limit,
            "measurability violation: B read at index {idx}, limit {}",
            self.stock_limit
        );
        self.bundle.b_values[idx]
    }

    /// State (rate or variance) value at grid index `idx`.
    pub fn state(&self, idx: usize) -> f64 {
        debug_assert!(
            idx <= self.state_limit,
            "measurability violation: state read at index {idx}, limit {}",
            self.state_limit
        );
        self.state.expect("model has no auxiliary state path")[idx]
    }

    /// The insider's realized information value.
    pub fn insider_g(&self) -> f64 {
        self.g
    }
}

// ---------------------------------------------------------------------------
// Pointwise portfolio formulas
// ---------------------------------------------------------------------------

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 || t > horizon {
        return Err(Error::InvalidParam {
            name: "t",
            reason: format!("time must lie in [0, {horizon}], got {t}"),
        });
    }
    Ok(())
}

fn sigma_at(sigma: &Curve, t: f64, floor: f64) -> Result<f64> {
    let value = sigma.value(t);
    if value < floor {
        return Err(Error::VolatilityFloor {
            at: t,
            value,
            floor,
        });
    }
    Ok(value)
}

/// The correction `alpha_d(t, g) = (g - b_delayed) / (T - (t-d)+)` where
/// `b_delayed` is the path's Brownian value at `(t-d)+`. Finite on all of
/// `[0, T]` because the denominator is at least `d`.
pub fn alpha_d(t: f64, g: f64, b_delayed: f64, horizon: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidDelay(format!(
            "alpha_d requires d > 0, got {d}"
        )));
    }
    check_time(t, horizon)?;
    let delayed_time = (t - d).max(0.0);
    Ok((g - b_delayed) / (horizon - delayed_time))
}

/// Merton fraction under Black-Scholes: `(mu(t) - rho(t)) / sigma(t)^2`.
pub fn merton_bsm(mu: &Curve, rho: &Curve, sigma: &Curve, t: f64, floor: f64) -> Result<f64> {
    let s = sigma_at(sigma, t, floor)?;
    Ok((mu.value(t) - rho.value(t)) / (s * s))
}

/// Delayed-information fraction under Black-Scholes:
/// `merton_bsm + alpha_d / sigma(t)`.
#[allow(clippy::too_many_arguments)]
pub fn ait_bsm(
    t: f64,
    g: f64,
    b_delayed: f64,
    mu: &Curve,
    rho: &Curve,
    sigma: &Curve,
    horizon: f64,
    d: f64,
    floor: f64,
) -> Result<f64> {
    let base = merton_bsm(mu, rho, sigma, t, floor)?;
    let alpha = alpha_d(t, g, b_delayed, horizon, d)?;
    Ok(base + alpha / sigma_at(sigma, t, floor)?)
}

fn check_variance(v_t: f64) -> Result<f64> {
    if !(v_t > 0.0) || !v_t.is_finite() {
        return Err(Error::InvalidParam {
            name: "v_t",
            reason: format!("realized variance must be > 0 (broken sampler?), got {v_t}"),
        });
    }
    Ok(v_t)
}

/// Merton fraction under Heston: `(mu(t) - rho(t)) / V(t)`.
pub fn merton_heston(mu: &Curve, rho: &Curve, v_t: f64, t: f64) -> Result<f64> {
    Ok((mu.value(t) - rho.value(t)) / check_variance(v_t)?)
}

/// Delayed-information fraction under Heston:
/// `merton_heston + alpha_d / sqrt(V(t))`.
#[allow(clippy::too_many_arguments)]
pub fn ait_heston(
    t: f64,
    g: f64,
    b_delayed: f64,
    mu: &Curve,
    rho: &Curve,
    v_t: f64,
    horizon: f64,
    d: f64,
) -> Result<f64> {
    let base = merton_heston(mu, rho, v_t, t)?;
    let alpha = alpha_d(t, g, b_delayed, horizon, d)?;
    Ok(base + alpha / v_t.sqrt())
}

/// Merton fraction under a short-rate model: `(mu(t) - R(t)) / sigma(t)^2`.
pub fn merton_vasicek(mu: &Curve, sigma: &Curve, r_t: f64, t: f64, floor: f64) -> Result<f64> {
    let s = sigma_at(sigma, t, floor)?;
    Ok((mu.value(t) - r_t) / (s * s))
}

/// Delayed-information fraction under a short-rate model with distinct delays:
/// the realized rate is replaced by `E[R(t) | R((t - d_rate)+) = r_delayed]`
/// and the stock correction uses `d_stock`. `d_rate = 0` recovers the
/// one-delay rule with the realized rate.
#[allow(clippy::too_many_arguments)]
pub fn ait_two_delay(
    t: f64,
    g: f64,
    b_delayed: f64,
    r_delayed: f64,
    rate: &RateDynamics<'_>,
    mu: &Curve,
    sigma: &Curve,
    horizon: f64,
    delays: &DelaySpec,
    floor: f64,
) -> Result<f64> {
    check_time(t, horizon)?;
    let s_rate = (t - delays.d_rate).max(0.0);
    let cond_mean = rate.conditional_mean(s_rate, t, r_delayed)?;
    let base = merton_vasicek(mu, sigma, cond_mean, t, floor)?;
    let alpha = alpha_d(t, g, b_delayed, horizon, delays.d_stock)?;
    Ok(base + alpha / sigma_at(sigma, t, floor)?)
}

// ---------------------------------------------------------------------------
// Strategy descriptor and per-grid preparation
// ---------------------------------------------------------------------------

/// A portfolio rule bound to a model: the Merton benchmark or the
/// delayed-information strategy with its delays and alpha rule.
#[derive(Debug, Clone)]
pub struct Strategy<'m> {
    model: &'m MarketModel,
    kind: StrategyKind,
    delays: Option<DelaySpec>,
    alpha: AlphaRule,
}

impl<'m> Strategy<'m> {
    pub fn merton(model: &'m MarketModel) -> Self {
        Strategy {
            model,
            kind: StrategyKind::Merton,
            delays: None,
            alpha: AlphaRule::TerminalBrownian,
        }
    }

    pub fn ait(model: &'m MarketModel, delays: DelaySpec) -> Self {
        Strategy {
            model,
            kind: StrategyKind::Ait,
            delays: Some(delays),
            alpha: AlphaRule::TerminalBrownian,
        }
    }

    /// Replaces the alpha computation; only meaningful for the Ait kind.
    pub fn with_alpha_rule(mut self, rule: AlphaRule) -> Self {
        self.alpha = rule;
        self
    }

    pub fn model(&self) -> &'m MarketModel {
        self.model
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    pub fn delays(&self) -> Option<DelaySpec> {
        self.delays
    }

    /// Validates the model on the grid and precomputes per-grid-point tables
    /// so per-path evaluation is table lookups only.
    pub fn prepare(&self, grid: &TimeGrid, sigma_floor: f64) -> Result<PreparedStrategy> {
        self.model.validate(grid, sigma_floor)?;
        let horizon = grid.horizon();
        let n_points = grid.n_points();
        let mu_curve = self.model.mu();

        let delays = match self.kind {
            StrategyKind::Merton => None,
            StrategyKind::Ait => {
                let d = self.delays.ok_or_else(|| {
                    Error::InvalidDelay("delayed strategy needs a DelaySpec".into())
                })?;
                // Re-validate against this grid's horizon.
                let d = DelaySpec::new(d.d_stock, d.d_rate, horizon)?;
                if d.d_rate > 0.0 && !self.model.rate_is_state() {
                    return Err(Error::InvalidDelay(format!(
                        "d_rate > 0 requires a short-rate model, got {}",
                        self.model.name()
                    )));
                }
                Some(d)
            }
        };

        // Stock-delay tables (Ait only).
        let alpha = match delays {
            None => None,
            Some(d) => {
                let mut s_idx = Vec::with_capacity(n_points);
                let mut denom = Vec::with_capacity(n_points);
                let mut times = Vec::with_capacity(n_points);
                let mut inv_sigma = Vec::with_capacity(n_points);
                for i in 0..n_points {
                    let t = grid.t(i);
                    let si = grid.floor_index((t - d.d_stock).max(0.0));
                    s_idx.push(si);
                    denom.push(horizon - grid.t(si));
                    times.push(t);
                    if let Some(sigma) = self.model.sigma() {
                        inv_sigma.push(1.0 / sigma.value(t));
                    }
                }
                let scale = if self.model.sigma().is_some() {
                    AlphaScale::Deterministic(inv_sigma)
                } else {
                    AlphaScale::InverseSqrtVariance
                };
                Some(AlphaTables {
                    rule: self.alpha.clone(),
                    s_idx,
                    denom,
                    times,
                    scale,
                })
            }
        };

        let rate_delayed = delays.map(|d| d.d_rate > 0.0).unwrap_or(false);
        let core = match self.model {
            MarketModel::BlackScholes { mu, rho, sigma } => {
                let mut det = Vec::with_capacity(n_points);
                for i in 0..n_points {
                    let t = grid.t(i);
                    let s = sigma.value(t);
                    det.push((mu.value(t) - rho.value(t)) / (s * s));
                }
                MertonCore::Deterministic(det)
            }
            MarketModel::Heston { mu, rho, .. } => {
                let excess = (0..n_points)
                    .map(|i| mu.value(grid.t(i)) - rho.value(grid.t(i)))
                    .collect();
                MertonCore::HestonVariance { excess }
            }
            _ => {
                let sigma = self.model.sigma().expect("rate models carry a sigma curve");
                let mu: Vec<f64> = (0..n_points).map(|i| mu_curve.value(grid.t(i))).collect();
                let inv_sigma_sq: Vec<f64> = (0..n_points)
                    .map(|i| {
                        let s = sigma.value(grid.t(i));
                        1.0 / (s * s)
                    })
                    .collect();
                if rate_delayed {
                    let d_rate = delays.expect("rate_delayed implies delays").d_rate;
                    let dynamics = self
                        .model
                        .rate_dynamics()
                        .expect("short-rate model has dynamics");
                    let mut r_idx = Vec::with_capacity(n_points);
                    let mut decay = Vec::with_capacity(n_points);
                    let mut shift = Vec::with_capacity(n_points);
                    for i in 0..n_points {
                        let t = grid.t(i);
                        let ri = grid.floor_index((t - d_rate).max(0.0));
                        let (dc, sh) = dynamics.conditional_mean_coefficients(grid.t(ri), t)?;
                        r_idx.push(ri);
                        decay.push(dc);
                        shift.push(sh);
                    }
                    MertonCore::RateDelayed {
                        mu,
                        inv_sigma_sq,
                        r_idx,
                        decay,
                        shift,
                    }
                } else {
                    MertonCore::RateSpot { mu, inv_sigma_sq }
                }
            }
        };

        // Visibility limits per grid point. The benchmark is adapted (reads up
        // to t); the delayed strategy reads B only up to (t - d_stock)+ and,
        // under a delayed rate flow, the state only up to (t - d_rate)+.
        let mut stock_limits = Vec::with_capacity(n_points);
        let mut state_limits = Vec::with_capacity(n_points);
        for i in 0..n_points {
            match (&alpha, &core) {
                (None, _) => {
                    stock_limits.push(i);
                    state_limits.push(i);
                }
                (Some(a), MertonCore::RateDelayed { r_idx, .. }) => {
                    stock_limits.push(a.s_idx[i]);
                    state_limits.push(r_idx[i]);
                }
                (Some(a), _) => {
                    stock_limits.push(a.s_idx[i]);
                    state_limits.push(i);
                }
            }
        }

        Ok(PreparedStrategy {
            label: self.label(),
            core,
            alpha,
            stock_limits,
            state_limits,
            n_points,
        })
    }
}

/// Benchmark part of the fraction, precomputed where deterministic.
#[derive(Debug, Clone)]
enum MertonCore {
    /// BSM: the whole fraction is deterministic.
    Deterministic(Vec<f64>),
    /// Heston: `excess[i] / V_i`.
    HestonVariance { excess: Vec<f64> },
    /// Short rate observed at t: `(mu[i] - R_i) * inv_sigma_sq[i]`.
    RateSpot {
        mu: Vec<f64>,
        inv_sigma_sq: Vec<f64>,
    },
    /// Short rate observed with delay: the realized rate is replaced by
    /// `R_{r_idx[i]} * decay[i] + shift[i]`, its conditional mean.
    RateDelayed {
        mu: Vec<f64>,
        inv_sigma_sq: Vec<f64>,
        r_idx: Vec<usize>,
        decay: Vec<f64>,
        shift: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
enum AlphaScale {
    /// `alpha / sigma(t)` precomputed as a multiplication.
    Deterministic(Vec<f64>),
    /// Heston: `alpha / sqrt(V_i)` at runtime.
    InverseSqrtVariance,
}

#[derive(Debug, Clone)]
struct AlphaTables {
    rule: AlphaRule,
    s_idx: Vec<usize>,
    denom: Vec<f64>,
    times: Vec<f64>,
    scale: AlphaScale,
}

impl AlphaTables {
    fn value(&self, i: usize, view: &PathView<'_>) -> f64 {
        match &self.rule {
            AlphaRule::TerminalBrownian => {
                (view.insider_g() - view.brownian(self.s_idx[i])) / self.denom[i]
            }
            AlphaRule::Custom(hook) => hook(self.times[i], view.insider_g()),
        }
    }
}

/// A strategy compiled onto a grid: evaluation is table lookups plus at most
/// one state read and one Brownian read per step.
#[derive(Debug, Clone)]
pub struct PreparedStrategy {
    label: &'static str,
    core: MertonCore,
    alpha: Option<AlphaTables>,
    stock_limits: Vec<usize>,
    state_limits: Vec<usize>,
    n_points: usize,
}

impl PreparedStrategy {
    pub fn label(&self) -> &'static str {
        self.label
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Index limits `(stock, state)` the engine must set on the view before
    /// evaluating step `i`.
    pub fn limits(&self, i: usize) -> (usize, usize) {
        (self.stock_limits[i], self.state_limits[i])
    }

    /// The portfolio fraction pi(t_i) on the given path.
    pub fn fraction(&self, i: usize, view: &PathView<'_>) -> Result<f64> {
        let base = match &self.core {
            MertonCore::Deterministic(det) => det[i],
            MertonCore::HestonVariance { excess } => excess[i] / check_variance(view.state(i))?,
            MertonCore::RateSpot { mu, inv_sigma_sq } => (mu[i] - view.state(i)) * inv_sigma_sq[i],
            MertonCore::RateDelayed {
                mu,
                inv_sigma_sq,
                r_idx,
                decay,
                shift,
            } => {
                let cond = view.state(r_idx[i]) * decay[i] + shift[i];
                (mu[i] - cond) * inv_sigma_sq[i]
            }
        };
        let addon = match &self.alpha {
            None => 0.0,
            Some(tables) => {
                let a = tables.value(i, view);
                match &tables.scale {
                    AlphaScale::Deterministic(inv_sigma) => a * inv_sigma[i],
                    AlphaScale::InverseSqrtVariance => a / view.state(i).sqrt(),
                }
            }
        };
        Ok(base + addon)
    }
}
