//! Hermite polynomials, Wick powers of smoothed white noise, and the
//! conditional Donsker density.
//!
//! Wick-space objects are realized pathwise through the Hermite
//! representation: the n-th Wick power of a smoothed white noise with window
//! norm `‖φ‖` and realized value `ω` is `‖φ‖^n h_n(ω / ‖φ‖)` where `h_n` is
//! the probabilists' Hermite polynomial. The conditional expectation of the
//! Donsker delta of `B(T)` given the information at time `s` collapses to the
//! ordinary Gaussian density with mean `B(s)` and variance `T - s`; the
//! Wick-exponential route survives here only as the identity check
//! [`wick_vs_ordinary_exp_check`], whose left side is evaluated by
//! Gauss-Hermite quadrature over a complex-shifted Gaussian.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Hard cap on the Hermite order; nothing downstream needs more, and the
/// upward recurrence is comfortably stable this far.
pub const HERMITE_CAP: u32 = 64;

/// Probabilists' Hermite polynomial `h_n(x)` via the three-term recurrence
/// `h_{n+1} = x h_n - n h_{n-1}`. Orders above [`HERMITE_CAP`] and overflowing
/// evaluations are rejected.
pub fn hermite(n: u32, x: f64) -> Result<f64> {
    if n > HERMITE_CAP {
        return Err(Error::HermiteOrder {
            n,
            cap: HERMITE_CAP,
        });
    }
    if !x.is_finite() {
        return Err(Error::InvalidParam {
            name: "x",
            reason: format!("must be finite, got {x}"),
        });
    }
    let mut h_prev = 1.0;
    if n == 0 {
        return Ok(h_prev);
    }
    let mut h = x;
    for k in 1..n {
        let next = x * h - k as f64 * h_prev;
        if !next.is_finite() {
            return Err(Error::HermiteOverflow { at_order: k + 1 });
        }
        h_prev = h;
        h = next;
    }
    Ok(h)
}

/// A realized smoothed white noise: window norm `‖φ‖`, deterministic shift
/// `Ψ`, and the sampled value `ω_{φ,ψ}` (already including the shift).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedWhiteNoise {
    pub norm: f64,
    pub shift: f64,
    pub realized_value: f64,
}

impl SmoothedWhiteNoise {
    pub fn new(norm: f64, shift: f64, realized_value: f64) -> Result<Self> {
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParam {
                name: "norm",
                reason: format!("window norm must be finite and > 0, got {norm}"),
            });
        }
        if !shift.is_finite() || !realized_value.is_finite() {
            return Err(Error::InvalidParam {
                name: "realized_value",
                reason: format!("shift and value must be finite, got ({shift}, {realized_value})"),
            });
        }
        Ok(SmoothedWhiteNoise {
            norm,
            shift,
            realized_value,
        })
    }

    /// Centered variant, shift = 0.
    pub fn centered(norm: f64, realized_value: f64) -> Result<Self> {
        SmoothedWhiteNoise::new(norm, 0.0, realized_value)
    }
}

/// n-th Wick power, realized pathwise: `‖φ‖^n h_n(value / ‖φ‖)`.
pub fn wick_power(w: &SmoothedWhiteNoise, n: u32) -> Result<f64> {
    let h = hermite(n, w.realized_value / w.norm)?;
    let out = w.norm.powi(n as i32) * h;
    if !out.is_finite() {
        return Err(Error::HermiteOverflow { at_order: n });
    }
    Ok(out)
}

/// Residual of the Wick-to-ordinary product rule
/// `ω^{⋄(n+1)} = ω ω^{⋄n} - n ‖φ‖^2 ω^{⋄(n-1)}`, relative to
/// `max(1, |lhs|, |rhs|)`.
pub fn wick_power_recurrence_check(w: &SmoothedWhiteNoise, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParam {
            name: "n",
            reason: "recurrence needs n >= 1".into(),
        });
    }
    let lhs = wick_power(w, n + 1)?;
    let rhs =
        w.realized_value * wick_power(w, n)? - n as f64 * w.norm * w.norm * wick_power(w, n - 1)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
}

/// Conditional density of `B(T)` at `g` given `B(s) = b_delayed`:
/// the Gaussian density with mean `b_delayed` and variance `T - s`.
pub fn donsker_conditional_density(g: f64, b_delayed: f64, s: f64, t_horizon: f64) -> Result<f64> {
    if !(t_horizon > 0.0) || !t_horizon.is_finite() {
        return Err(Error::InvalidParam {
            name: "t_horizon",
            reason: format!("horizon must be finite and > 0, got {t_horizon}"),
        });
    }
    if !(s >= 0.0) {
        return Err(Error::InvalidParam {
            name: "s",
            reason: format!("conditioning time must be >= 0, got {s}"),
        });
    }
    if s >= t_horizon {
        return Err(Error::Degenerate(format!(
            "conditioning time s = {s} at or beyond the horizon T = {t_horizon} collapses the density"
        )));
    }
    if !g.is_finite() || !b_delayed.is_finite() {
        return Err(Error::InvalidParam {
            name: "g",
            reason: format!("arguments must be finite, got g = {g}, b = {b_delayed}"),
        });
    }
    let var = t_horizon - s;
    let z = g - b_delayed;
    Ok((-z * z / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
}

/// Gauss-Hermite rule for the physicists' weight `e^{-x^2}`; nodes found by
/// Newton iteration on the orthonormal recurrence, so no factorial overflow.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=256).contains(&n) {
            return Err(Error::InvalidParam {
                name: "n",
                reason: format!("node count must lie in [2, 256], got {n}"),
            });
        }
        const PIM4: f64 = 0.751_125_544_464_942_5; // pi^{-1/4}
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            let mut converged = false;
            for _ in 0..100 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z_prev = z;
                z -= p1 / pp;
                if (z - z_prev).abs() <= 1e-14 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::InvalidParam {
                    name: "n",
                    reason: format!("Newton iteration for node {i} of {n} did not converge"),
                });
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Ok(GaussHermite { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(Z)]` for standard normal `Z`, via `x -> sqrt(2) x` substitution.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(std::f64::consts::SQRT_2 * x))
            .collect();
        pairwise_sum(&terms) / std::f64::consts::PI.sqrt()
    }

    /// Complex-valued counterpart of [`GaussHermite::expect`].
    pub fn expect_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(std::f64::consts::SQRT_2 * x);
        }
        acc / std::f64::consts::PI.sqrt()
    }
}

/// Shared 64-point rule; every identity check in this crate uses it.
pub fn gauss_hermite_64() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(64).expect("64-point rule is constructible"))
}

/// Residual of the Wick-vs-ordinary product identity for
/// `ω ⋄ exp⋄(-½ ω^{⋄2})` with window norm `‖φ‖^2 = c2`, realized at `ω = y`.
///
/// Left side: Gauss-Hermite quadrature of `E[(y + icZ) exp(-(y + icZ)^2/2)]`.
/// Right side: the closed Gaussian form
/// `y (1 - c^2)^{-3/2} exp(-y^2 / (2 (1 - c^2)))`. Residual is relative to
/// `max(1, |lhs|, |rhs|)`.
pub fn wick_vs_ordinary_exp_check(y: f64, c2: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::InvalidParam {
            name: "y",
            reason: format!("must be finite, got {y}"),
        });
    }
    if !(0.0..1.0).contains(&c2) {
        if c2 == 1.0 {
            return Err(Error::Degenerate(
                "window norm c2 = 1 is the excluded case: the (1 - c2) factor vanishes".into(),
            ));
        }
        return Err(Error::InvalidParam {
            name: "c2",
            reason: format!("variance ratio must lie in [0, 1), got {c2}"),
        });
    }
    let c = c2.sqrt();
    let lhs = gauss_hermite_64()
        .expect_complex(|z| {
            let u = Complex64::new(y, c * z);
            u * (-0.5 * u * u).exp()
        })
        .re;
    let one_minus = 1.0 - c2;
    let rhs = y * one_minus.powf(-1.5) * (-y * y / (2.0 * one_minus)).exp();
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
}
