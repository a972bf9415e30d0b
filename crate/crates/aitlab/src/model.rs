//! The five market models.
//!
//! Stock: dS/S = mu(t) dt + Sigma(t) dB with Sigma = sigma(t) except under
//! Heston, where Sigma = sqrt(V(t)). Bond: rate rho(t) under Black-Scholes
//! and Heston, the realized short rate R(t) otherwise. The auxiliary state
//! (variance V or rate R) is driven independently of B.

use crate::error::{Error, Result};
use crate::grid::{volatility_floor_check, Curve, TimeGrid};
use crate::stochastic::{
    cir_conditional_mean, hw_conditional_mean, ou_conditional_law, ou_exact_path, path_rng,
    CirParams, CirTransition, HwParams, HwTransition, OuParams, PathBundle, TAG_STATE,
};

#[derive(Debug, Clone, PartialEq)]
pub enum MarketModel {
    BlackScholes {
        mu: Curve,
        rho: Curve,
        sigma: Curve,
    },
    Heston {
        mu: Curve,
        rho: Curve,
        variance: CirParams,
    },
    Vasicek {
        mu: Curve,
        sigma: Curve,
        rate: OuParams,
    },
    HullWhite {
        mu: Curve,
        sigma: Curve,
        rate: HwParams,
    },
    CirRate {
        mu: Curve,
        sigma: Curve,
        rate: CirParams,
    },
}

impl MarketModel {
    pub fn name(&self) -> &'static str {
        match self {
            MarketModel::BlackScholes { .. } => "black_scholes",
            MarketModel::Heston { .. } => "heston",
            MarketModel::Vasicek { .. } => "vasicek",
            MarketModel::HullWhite { .. } => "hull_white",
            MarketModel::CirRate { .. } => "cir_rate",
        }
    }

    pub fn mu(&self) -> &Curve {
        match self {
            MarketModel::BlackScholes { mu, .. }
            | MarketModel::Heston { mu, .. }
            | MarketModel::Vasicek { mu, .. }
            | MarketModel::HullWhite { mu, .. }
            | MarketModel::CirRate { mu, .. } => mu,
        }
    }

    /// Deterministic volatility curve; absent under Heston.
    pub fn sigma(&self) -> Option<&Curve> {
        match self {
            MarketModel::BlackScholes { sigma, .. }
            | MarketModel::Vasicek { sigma, .. }
            | MarketModel::HullWhite { sigma, .. }
            | MarketModel::CirRate { sigma, .. } => Some(sigma),
            MarketModel::Heston { .. } => None,
        }
    }

    /// Deterministic bond-rate curve; absent when the short rate is the state.
    pub fn rho(&self) -> Option<&Curve> {
        match self {
            MarketModel::BlackScholes { rho, .. } | MarketModel::Heston { rho, .. } => Some(rho),
            _ => None,
        }
    }

    /// True when the bond accrues at the realized state R(t).
    pub fn rate_is_state(&self) -> bool {
        matches!(
            self,
            MarketModel::Vasicek { .. }
                | MarketModel::HullWhite { .. }
                | MarketModel::CirRate { .. }
        )
    }

    pub fn has_state(&self) -> bool {
        !matches!(self, MarketModel::BlackScholes { .. })
    }

    /// Rate dynamics for conditional-mean evaluation; absent for BSM/Heston.
    pub fn rate_dynamics(&self) -> Option<RateDynamics<'_>> {
        match self {
            MarketModel::Vasicek { rate, .. } => Some(RateDynamics::Ou(rate)),
            MarketModel::HullWhite { rate, .. } => Some(RateDynamics::Hw(rate)),
            MarketModel::CirRate { rate, .. } => Some(RateDynamics::Cir(rate)),
            _ => None,
        }
    }

    /// Full admissibility check: curve spans, the inclusive volatility floor,
    /// and positivity (Feller) for square-root states.
    pub fn validate(&self, grid: &TimeGrid, sigma_floor: f64) -> Result<()> {
        let horizon = grid.horizon();
        self.mu().check_span(horizon)?;
        if let Some(rho) = self.rho() {
            rho.check_span(horizon)?;
        }
        if let Some(sigma) = self.sigma() {
            sigma.check_span(horizon)?;
            volatility_floor_check(sigma, grid, sigma_floor)?;
        }
        match self {
            MarketModel::Heston { variance, .. } => variance.require_positive()?,
            MarketModel::CirRate { rate, .. } => rate.require_positive()?,
            MarketModel::HullWhite { rate, .. } => rate.kappa.check_span(horizon)?,
            _ => {}
        }
        Ok(())
    }

    /// Prepares the per-run state sampler.
    pub fn state_dynamics(&self, grid: &TimeGrid) -> Result<StateDynamics> {
        Ok(match self {
            MarketModel::BlackScholes { .. } => StateDynamics::None,
            MarketModel::Heston { variance, .. } => {
                StateDynamics::Cir(CirTransition::new(variance, grid.dt())?)
            }
            MarketModel::Vasicek { rate, .. } => StateDynamics::Ou(*rate),
            MarketModel::HullWhite { rate, .. } => {
                StateDynamics::Hw(HwTransition::new(rate, grid)?)
            }
            MarketModel::CirRate { rate, .. } => {
                StateDynamics::Cir(CirTransition::new(rate, grid.dt())?)
            }
        })
    }
}

/// Short-rate (or variance) dynamics used for delayed conditional means.
#[derive(Debug, Clone, Copy)]
pub enum RateDynamics<'a> {
    Ou(&'a OuParams),
    Hw(&'a HwParams),
    Cir(&'a CirParams),
}

impl RateDynamics<'_> {
    /// `E[R(t) | R(s) = r_s]` for `s <= t`.
    pub fn conditional_mean(&self, s: f64, t: f64, r_s: f64) -> Result<f64> {
        match self {
            RateDynamics::Ou(p) => Ok(ou_conditional_law(p, s, t, r_s)?.mean),
            RateDynamics::Hw(p) => hw_conditional_mean(p, s, t, r_s),
            RateDynamics::Cir(p) => cir_conditional_mean(p, s, t, r_s),
        }
    }

    /// Decomposition `E[R(t)|R(s)=r] = r * decay + shift` over a fixed lag,
    /// used to precompute per-step tables.
    pub fn conditional_mean_coefficients(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        if s > t {
            return Err(Error::TimeOrder { s, t });
        }
        match self {
            RateDynamics::Ou(p) => {
                let decay = (-p.a * (t - s)).exp();
                Ok((decay, p.b * (1.0 - decay)))
            }
            RateDynamics::Hw(p) => {
                let decay = (-p.a * (t - s)).exp();
                Ok((decay, p.kappa.integral_exp_weighted(p.a, s, t)?))
            }
            RateDynamics::Cir(p) => {
                let decay = (-p.kappa * (t - s)).exp();
                Ok((decay, p.theta * (1.0 - decay)))
            }
        }
    }
}

/// Per-run state sampler with transition constants precomputed.
#[derive(Debug, Clone)]
pub enum StateDynamics {
    None,
    Ou(OuParams),
    Hw(HwTransition),
    Cir(CirTransition),
}

impl StateDynamics {
    /// Samples the state path for one path index. OU and Hull-White reuse the
    /// bundle's W increments; square-root states draw their noncentral
    /// chi-square transitions from the dedicated state stream.
    pub fn sample(
        &self,
        grid: &TimeGrid,
        seed: u64,
        path_index: u64,
        bundle: &PathBundle,
    ) -> Result<Option<Vec<f64>>> {
        match self {
            StateDynamics::None => Ok(None),
            StateDynamics::Ou(p) => Ok(Some(ou_exact_path(p, grid, &bundle.w_incr)?)),
            StateDynamics::Hw(t) => Ok(Some(t.sample_path(&bundle.w_incr)?)),
            StateDynamics::Cir(t) => {
                let mut rng = path_rng(seed, path_index, TAG_STATE);
                Ok(Some(t.sample_path(grid.n_steps(), &mut rng)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::sample_brownian_pair;
    use approx::assert_relative_eq;

    fn bsm() -> MarketModel {
        MarketModel::BlackScholes {
            mu: Curve::constant(0.08).unwrap(),
            rho: Curve::constant(0.02).unwrap(),
            sigma: Curve::constant(0.2).unwrap(),
        }
    }

    #[test]
    fn validate_passes_for_standard_fixtures() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        assert!(bsm().validate(&grid, 1e-6).is_ok());
        let heston = MarketModel::Heston {
            mu: Curve::constant(0.08).unwrap(),
            rho: Curve::constant(0.02).unwrap(),
            variance: CirParams::new(2.0, 0.04, 0.2, 0.04).unwrap(),
        };
        assert!(heston.validate(&grid, 1e-6).is_ok());
    }

    #[test]
    fn validate_rejects_floor_violation_and_bad_feller() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let thin = MarketModel::BlackScholes {
            mu: Curve::constant(0.08).unwrap(),
            rho: Curve::constant(0.02).unwrap(),
            sigma: Curve::constant(1e-9).unwrap(),
        };
        assert_eq!(thin.validate(&grid, 1e-6).unwrap_err().exit_code(), 3);
        let heston = MarketModel::Heston {
            mu: Curve::constant(0.08).unwrap(),
            rho: Curve::constant(0.02).unwrap(),
            variance: CirParams::new(1.0, 0.01, 0.2, 0.04).unwrap(),
        };
        let err = heston.validate(&grid, 1e-6).unwrap_err();
        assert!(err.to_string().contains("Feller"));
    }

    #[test]
    fn validate_rejects_partial_curve_span() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let short_mu = MarketModel::BlackScholes {
            mu: Curve::piecewise_linear(vec![(0.0, 0.08), (0.5, 0.09)]).unwrap(),
            rho: Curve::constant(0.02).unwrap(),
            sigma: Curve::constant(0.2).unwrap(),
        };
        assert!(short_mu.validate(&grid, 1e-6).is_err());
    }

    #[test]
    fn conditional_mean_coefficients_match_direct_evaluation() {
        let ou = OuParams::new(1.0, 0.05, 0.1, 0.03).unwrap();
        let dyn_ou = RateDynamics::Ou(&ou);
        let (s, t, r) = (0.2, 0.5, 0.041);
        let (decay, shift) = dyn_ou.conditional_mean_coefficients(s, t).unwrap();
        assert_relative_eq!(
            r * decay + shift,
            dyn_ou.conditional_mean(s, t, r).unwrap(),
            epsilon = 1e-14
        );
        let cir = CirParams::new(2.0, 0.04, 0.2, 0.04).unwrap();
        let dyn_cir = RateDynamics::Cir(&cir);
        let (decay, shift) = dyn_cir.conditional_mean_coefficients(s, t).unwrap();
        assert_relative_eq!(
            r * decay + shift,
            dyn_cir.conditional_mean(s, t, r).unwrap(),
            epsilon = 1e-14
        );
        assert!(dyn_ou.conditional_mean_coefficients(0.5, 0.2).is_err());
    }

    #[test]
    fn state_dynamics_dispatch() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let bundle = sample_brownian_pair(&grid, 1, 0);
        assert!(bsm()
            .state_dynamics(&grid)
            .unwrap()
            .sample(&grid, 1, 0, &bundle)
            .unwrap()
            .is_none());
        let vasicek = MarketModel::Vasicek {
            mu: Curve::constant(0.08).unwrap(),
            sigma: Curve::constant(0.2).unwrap(),
            rate: OuParams::new(1.0, 0.05, 0.1, 0.03).unwrap(),
        };
        let path = vasicek
            .state_dynamics(&grid)
            .unwrap()
            .sample(&grid, 1, 0, &bundle)
            .unwrap()
            .unwrap();
        assert_eq!(path.len(), grid.n_points());
        assert_eq!(path[0], 0.03);
    }
}
