//! Driving noise and short-rate / variance processes with exact transitions.
//!
//! Two independent standard Brownian motions B (stock) and W (rate or
//! variance) are sampled on the shared grid. State processes are advanced by
//! their exact conditional laws, never by Euler steps:
//!
//! * Ornstein-Uhlenbeck (Vasicek)  dR = a (b - R) dt + xi dW
//! * Hull-White                    dR = (kappa(t) - a R) dt + theta dW
//! * Cox-Ingersoll-Ross            dZ = kappa (theta - Z) dt + eta sqrt(Z) dW
//!
//! CIR transitions use the noncentral chi-square representation and are only
//! offered when the Feller condition `kappa theta >= eta^2/2` holds, so paths
//! stay strictly positive.
//!
//! Randomness: one ChaCha8 stream per (seed, path_index, tag), so any path is
//! reproducible in isolation and path sampling parallelizes without
//! coordination.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{Curve, TimeGrid};
use crate::numeric::{mean_and_std_error, McEstimate};

/// Stream tag for the stock-driving motion B.
pub const TAG_STOCK: u64 = 0;
/// Stream tag for the rate/variance-driving motion W.
pub const TAG_RATE: u64 = 1;
/// Stream tag for auxiliary state draws (noncentral chi-square transitions).
pub const TAG_STATE: u64 = 2;
/// Stream tag reserved for closed-form embedded Monte Carlo, kept disjoint
/// from the simulation streams so the two estimates have independent noise.
pub const TAG_CLOSED_FORM: u64 = 3;

const N_TAGS: u64 = 4;

/// Dedicated ChaCha8 stream for one (seed, path, tag) triple.
pub fn path_rng(seed: u64, path_index: u64, tag: u64) -> ChaCha8Rng {
    debug_assert!(tag < N_TAGS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index * N_TAGS + tag);
    rng
}

/// One path of the Brownian pair (B, W) on a grid: increments and running
/// values, with `values[i + 1] - values[i] == incr[i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: TimeGrid,
    pub b_incr: Vec<f64>,
    pub w_incr: Vec<f64>,
    pub b_values: Vec<f64>,
    pub w_values: Vec<f64>,
}

impl PathBundle {
    pub fn b_terminal(&self) -> f64 {
        *self.b_values.last().expect("grid has at least two points")
    }
}

fn brownian_path(grid: &TimeGrid, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let sqrt_dt = grid.dt().sqrt();
    let mut incr = Vec::with_capacity(grid.n_steps());
    let mut values = Vec::with_capacity(grid.n_points());
    values.push(0.0);
    let mut acc = 0.0;
    for _ in 0..grid.n_steps() {
        let z: f64 = rng.sample(StandardNormal);
        let prev = acc;
        acc += sqrt_dt * z;
        // Store the realized difference so values[i+1] - values[i] == incr[i]
        // holds exactly, not merely to rounding.
        incr.push(acc - prev);
        values.push(acc);
    }
    (incr, values)
}

/// Samples the independent pair (B, W) for one path index.
pub fn sample_brownian_pair(grid: &TimeGrid, seed: u64, path_index: u64) -> PathBundle {
    let (b_incr, b_values) = brownian_path(grid, &mut path_rng(seed, path_index, TAG_STOCK));
    let (w_incr, w_values) = brownian_path(grid, &mut path_rng(seed, path_index, TAG_RATE));
    PathBundle {
        grid: *grid,
        b_incr,
        w_incr,
        b_values,
        w_values,
    }
}

/// First two moments of a scalar law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn second_moment(&self) -> f64 {
        self.mean * self.mean + self.variance
    }
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck (Vasicek short rate)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    pub a: f64,
    pub b: f64,
    pub xi: f64,
    pub r0: f64,
}

impl OuParams {
    /// `a > 0` (moment formulas divide by it), `xi >= 0`.
    pub fn new(a: f64, b: f64, xi: f64, r0: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParam {
                name: "a",
                reason: format!("mean reversion must be finite and > 0, got {a}"),
            });
        }
        if !(xi >= 0.0) || !xi.is_finite() {
            return Err(Error::InvalidParam {
                name: "xi",
                reason: format!("diffusion must be finite and >= 0, got {xi}"),
            });
        }
        if !b.is_finite() || !r0.is_finite() {
            return Err(Error::InvalidParam {
                name: "b",
                reason: format!("level and start must be finite, got b = {b}, r0 = {r0}"),
            });
        }
        Ok(OuParams { a, b, xi, r0 })
    }
}

/// Exact OU path on the grid driven by the given Brownian increments:
/// `R_{i+1} = b + (R_i - b) e^{-a dt} + xi sqrt((1 - e^{-2 a dt}) / 2a) Z_i`
/// with `Z_i = dW_i / sqrt(dt)`.
pub fn ou_exact_path(p: &OuParams, grid: &TimeGrid, w_incr: &[f64]) -> Result<Vec<f64>> {
    if w_incr.len() != grid.n_steps() {
        return Err(Error::LengthMismatch {
            expected: grid.n_steps(),
            got: w_incr.len(),
        });
    }
    let dt = grid.dt();
    let decay = (-p.a * dt).exp();
    let scale = p.xi * ((1.0 - decay * decay) / (2.0 * p.a)).sqrt();
    let inv_sqrt_dt = 1.0 / dt.sqrt();
    let mut path = Vec::with_capacity(grid.n_points());
    let mut r = p.r0;
    path.push(r);
    for &dw in w_incr {
        r = p.b + (r - p.b) * decay + scale * (dw * inv_sqrt_dt);
        path.push(r);
    }
    Ok(path)
}

/// Marginal law of `R(t)` started from `r0`:
/// mean `r0 e^{-at} + b (1 - e^{-at})`, variance `xi^2 (1 - e^{-2at}) / 2a`.
pub fn ou_moments(p: &OuParams, t: f64) -> Result<Moments> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam {
            name: "t",
            reason: format!("time must be >= 0, got {t}"),
        });
    }
    let decay = (-p.a * t).exp();
    Ok(Moments {
        mean: p.r0 * decay + p.b * (1.0 - decay),
        variance: p.xi * p.xi * (1.0 - decay * decay) / (2.0 * p.a),
    })
}

/// Law of `R(t)` given `R(s) = r_s` for `s <= t`.
pub fn ou_conditional_law(p: &OuParams, s: f64, t: f64, r_s: f64) -> Result<Moments> {
    if s > t {
        return Err(Error::TimeOrder { s, t });
    }
    let decay = (-p.a * (t - s)).exp();
    Ok(Moments {
        mean: p.b - (p.b - r_s) * decay,
        variance: p.xi * p.xi * (1.0 - decay * decay) / (2.0 * p.a),
    })
}

// ---------------------------------------------------------------------------
// Hull-White short rate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct HwParams {
    /// Time-dependent reversion level contribution kappa(t).
    pub kappa: Curve,
    pub a: f64,
    pub theta: f64,
    pub r0: f64,
}

impl HwParams {
    pub fn new(kappa: Curve, a: f64, theta: f64, r0: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParam {
                name: "a",
                reason: format!("mean reversion must be finite and > 0, got {a}"),
            });
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParam {
                name: "theta",
                reason: format!("diffusion must be finite and >= 0, got {theta}"),
            });
        }
        if !r0.is_finite() {
            return Err(Error::InvalidParam {
                name: "r0",
                reason: format!("start must be finite, got {r0}"),
            });
        }
        Ok(HwParams {
            kappa,
            a,
            theta,
            r0,
        })
    }
}

/// `E[R(t) | R(s) = r_s] = r_s e^{-a(t-s)} + int_s^t kappa(u) e^{-a(t-u)} du`,
/// with the kappa integral evaluated exactly piece by piece.
pub fn hw_conditional_mean(p: &HwParams, s: f64, t: f64, r_s: f64) -> Result<f64> {
    if s > t {
        return Err(Error::TimeOrder { s, t });
    }
    let drift = p.kappa.integral_exp_weighted(p.a, s, t)?;
    Ok(r_s * (-p.a * (t - s)).exp() + drift)
}

/// Marginal law of the Hull-White rate started from `r0`.
pub fn hw_moments(p: &HwParams, t: f64) -> Result<Moments> {
    let mean = hw_conditional_mean(p, 0.0, t, p.r0)?;
    let decay = (-p.a * t).exp();
    Ok(Moments {
        mean,
        variance: p.theta * p.theta * (1.0 - decay * decay) / (2.0 * p.a),
    })
}

/// Precomputed exact Hull-White transition over one grid step. The per-step
/// drift integrals are grid data, so they are computed once and shared by all
/// paths.
#[derive(Debug, Clone)]
pub struct HwTransition {
    decay: f64,
    noise_scale: f64,
    inv_sqrt_dt: f64,
    step_drift: Vec<f64>,
    r0: f64,
    n_points: usize,
}

impl HwTransition {
    pub fn new(p: &HwParams, grid: &TimeGrid) -> Result<Self> {
        let dt = grid.dt();
        let decay = (-p.a * dt).exp();
        let mut step_drift = Vec::with_capacity(grid.n_steps());
        for i in 0..grid.n_steps() {
            step_drift.push(
                p.kappa
                    .integral_exp_weighted(p.a, grid.t(i), grid.t(i + 1))?,
            );
        }
        Ok(HwTransition {
            decay,
            noise_scale: p.theta * ((1.0 - decay * decay) / (2.0 * p.a)).sqrt(),
            inv_sqrt_dt: 1.0 / dt.sqrt(),
            step_drift,
            r0: p.r0,
            n_points: grid.n_points(),
        })
    }

    pub fn sample_path(&self, w_incr: &[f64]) -> Result<Vec<f64>> {
        if w_incr.len() != self.step_drift.len() {
            return Err(Error::LengthMismatch {
                expected: self.step_drift.len(),
                got: w_incr.len(),
            });
        }
        let mut path = Vec::with_capacity(self.n_points);
        let mut r = self.r0;
        path.push(r);
        for (i, &dw) in w_incr.iter().enumerate() {
            r = r * self.decay + self.step_drift[i] + self.noise_scale * (dw * self.inv_sqrt_dt);
            path.push(r);
        }
        Ok(path)
    }
}

/// Exact Hull-White path; convenience wrapper over [`HwTransition`].
pub fn hw_exact_path(p: &HwParams, grid: &TimeGrid, w_incr: &[f64]) -> Result<Vec<f64>> {
    HwTransition::new(p, grid)?.sample_path(w_incr)
}

// ---------------------------------------------------------------------------
// Cox-Ingersoll-Ross process
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirParams {
    pub kappa: f64,
    pub theta: f64,
    pub eta: f64,
    pub z0: f64,
}

/// Positivity and inverse-moment admissibility of a CIR parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FellerReport {
    /// `kappa theta >= eta^2 / 2`: paths stay strictly positive.
    pub positive: bool,
    /// `kappa theta >= eta^2`: `E[1/Z(t)]` is finite.
    pub inverse_moment_finite: bool,
}

impl CirParams {
    /// All parameters strictly positive; the Feller condition is *not*
    /// required here so that inadmissible sets can still be reported on.
    pub fn new(kappa: f64, theta: f64, eta: f64, z0: f64) -> Result<Self> {
        for (name, v) in [("kappa", kappa), ("theta", theta), ("eta", eta), ("z0", z0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(CirParams {
            kappa,
            theta,
            eta,
            z0,
        })
    }

    /// Both thresholds are inclusive; a 1e-12 relative slack keeps parameter
    /// sets written to sit exactly on a boundary (say kappa theta = 0.02,
    /// eta = 0.2) on the admissible side despite rounding of eta^2.
    pub fn feller(&self) -> FellerReport {
        let kt = self.kappa * self.theta;
        let eta_sq = self.eta * self.eta;
        let slack = 1e-12 * (kt.abs() + eta_sq);
        FellerReport {
            positive: kt >= 0.5 * eta_sq - slack,
            inverse_moment_finite: kt >= eta_sq - slack,
        }
    }

    pub fn require_positive(&self) -> Result<()> {
        if !self.feller().positive {
            return Err(Error::FellerViolated {
                kappa_theta: self.kappa * self.theta,
                half_eta_sq: 0.5 * self.eta * self.eta,
            });
        }
        Ok(())
    }

    pub fn require_inverse_moment(&self) -> Result<()> {
        if !self.feller().inverse_moment_finite {
            return Err(Error::InverseMomentDiverges {
                kappa_theta: self.kappa * self.theta,
                eta_sq: self.eta * self.eta,
            });
        }
        Ok(())
    }
}

/// Positivity and inverse-moment admissibility checks for a CIR set.
pub fn feller_report(p: &CirParams) -> FellerReport {
    p.feller()
}

/// Marginal law of `Z(t)`:
/// mean `theta + (z0 - theta) e^{-kt}`, variance
/// `z0 eta^2/k (e^{-kt} - e^{-2kt}) + theta eta^2/(2k) (1 - e^{-kt})^2`.
pub fn cir_moments(p: &CirParams, t: f64) -> Result<Moments> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam {
            name: "t",
            reason: format!("time must be >= 0, got {t}"),
        });
    }
    let e1 = (-p.kappa * t).exp();
    let e2 = e1 * e1;
    let eta_sq = p.eta * p.eta;
    let variance = p.z0 * eta_sq / p.kappa * (e1 - e2)
        + p.theta * eta_sq / (2.0 * p.kappa) * (1.0 - e1) * (1.0 - e1);
    Ok(Moments {
        mean: p.theta + (p.z0 - p.theta) * e1,
        variance,
    })
}

/// `E[Z(t) | Z(s) = z_s]`, same exponential pull as the OU mean.
pub fn cir_conditional_mean(p: &CirParams, s: f64, t: f64, z_s: f64) -> Result<f64> {
    if s > t {
        return Err(Error::TimeOrder { s, t });
    }
    Ok(p.theta + (z_s - p.theta) * (-p.kappa * (t - s)).exp())
}

/// Noncentral chi-square sample with `df >= 1`, decomposed as
/// `(Z + sqrt(lambda))^2 + chi^2_{df - 1}`; the tail is `None` when `df = 1`.
fn sample_ncx2(lambda: f64, chi_tail: Option<&Gamma<f64>>, rng: &mut ChaCha8Rng) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let head = z + lambda.sqrt();
    let mut out = head * head;
    if let Some(gamma) = chi_tail {
        out += gamma.sample(rng);
    }
    out
}

/// Precomputed exact CIR transition over one grid step via the noncentral
/// chi-square law: `Z_{i+1} = c X`, `X ~ chi'^2(df, Z_i e^{-k dt} / c)` with
/// `c = eta^2 (1 - e^{-k dt}) / 4k` and `df = 4 k theta / eta^2`.
#[derive(Debug, Clone)]
pub struct CirTransition {
    c: f64,
    decay: f64,
    chi_tail: Option<Gamma<f64>>,
    z0: f64,
}

impl CirTransition {
    /// Requires the Feller condition, which also guarantees `df >= 2`.
    pub fn new(p: &CirParams, dt: f64) -> Result<Self> {
        p.require_positive()?;
        let decay = (-p.kappa * dt).exp();
        let c = p.eta * p.eta * (1.0 - decay) / (4.0 * p.kappa);
        let df = 4.0 * p.kappa * p.theta / (p.eta * p.eta);
        let chi_tail = if df > 1.0 {
            Some(
                Gamma::new(0.5 * (df - 1.0), 2.0).map_err(|e| Error::InvalidParam {
                    name: "eta",
                    reason: format!("chi-square tail construction failed: {e}"),
                })?,
            )
        } else {
            None
        };
        Ok(CirTransition {
            c,
            decay,
            chi_tail,
            z0: p.z0,
        })
    }

    pub fn step(&self, z: f64, rng: &mut ChaCha8Rng) -> f64 {
        let lambda = z * self.decay / self.c;
        self.c * sample_ncx2(lambda, self.chi_tail.as_ref(), rng)
    }

    pub fn sample_path(&self, n_steps: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut path = Vec::with_capacity(n_steps + 1);
        let mut z = self.z0;
        path.push(z);
        for _ in 0..n_steps {
            z = self.step(z, rng);
            path.push(z);
        }
        path
    }
}

/// Exact CIR path on the grid. Refuses parameter sets violating the Feller
/// condition.
pub fn cir_exact_path(p: &CirParams, grid: &TimeGrid, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    Ok(CirTransition::new(p, grid.dt())?.sample_path(grid.n_steps(), rng))
}

/// Monte Carlo estimate of `E[1/Z(t)]` from exact single-jump transitions
/// 0 -> t. Refuses parameter sets with a divergent inverse moment.
pub fn cir_inverse_moment(p: &CirParams, t: f64, n_paths: u64, seed: u64) -> Result<McEstimate> {
    p.require_inverse_moment()?;
    if !(t > 0.0) {
        return Err(Error::InvalidParam {
            name: "t",
            reason: format!("time must be > 0, got {t}"),
        });
    }
    let transition = CirTransition::new(p, t)?;
    let values: Vec<f64> = (0..n_paths)
        .map(|i| {
            let mut rng = path_rng(seed, i, TAG_STATE);
            1.0 / transition.step(p.z0, &mut rng)
        })
        .collect();
    let (mean, std_error) = mean_and_std_error(&values)?;
    Ok(McEstimate {
        mean,
        std_error,
        n_paths,
        n_steps: 1,
        seed,
        clamp_count: 0,
    })
}
