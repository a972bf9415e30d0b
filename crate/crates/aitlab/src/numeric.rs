//! Deterministic numerical kernels: pairwise reduction, sample statistics,
//! bracketed bisection.
//!
//! Monte Carlo means are reduced with a fixed pairwise tree over an indexed
//! buffer, so the result is bit-identical for a given seed regardless of how
//! many worker threads produced the per-path values.

use crate::error::{Error, Result};

/// Summary of a Monte Carlo run. `std_error` is the standard error of `mean`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub n_steps: u64,
    pub seed: u64,
    /// Number of portfolio evaluations clipped at the configured bound.
    pub clamp_count: u64,
}

/// Pairwise (cascade) summation. Error grows like O(log n) rather than O(n),
/// and the reduction order is a function of the slice length alone.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Two-pass mean and standard error of the mean. Requires at least two values.
pub fn mean_and_std_error(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::InvalidParam {
            name: "samples",
            reason: format!(
                "need at least 2 values for a standard error, got {}",
                xs.len()
            ),
        });
    }
    if let Some((index, &value)) = xs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let centered: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&centered) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Output of [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

/// Bisection on `[lo, hi]` for a continuous `f` with `f(lo)` and `f(hi)` of
/// opposite (or zero) sign. Stops when `|f| <= f_tol` or after `max_iter`
/// halvings, whichever comes first.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    f_tol: f64,
    max_iter: u32,
) -> Result<BisectResult> {
    if !(lo < hi) {
        return Err(Error::Bracket(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    if !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::Bracket(format!(
            "non-finite endpoint values f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    if f_lo == 0.0 {
        return Ok(BisectResult {
            root: lo,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, hi),
        });
    }
    if f_hi == 0.0 {
        return Ok(BisectResult {
            root: hi,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, hi),
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut sign_a = f_lo.signum();
    let mut mid = 0.5 * (a + b);
    let mut f_mid = f(mid);
    let mut iterations = 0;
    while f_mid.abs() > f_tol && iterations < max_iter {
        if f_mid.signum() == sign_a {
            a = mid;
            sign_a = f_mid.signum();
        } else {
            b = mid;
        }
        let next = 0.5 * (a + b);
        if next == a || next == b {
            break; // interval collapsed to adjacent floats
        }
        mid = next;
        f_mid = f(mid);
        iterations += 1;
    }
    Ok(BisectResult {
        root: mid,
        residual: f_mid.abs(),
        iterations,
        bracket: (lo, hi),
    })
}
