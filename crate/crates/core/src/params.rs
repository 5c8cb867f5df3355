//! Admissibility conditions and contraction constants.
//!
//! For `A` μ-strongly monotone and L-Lipschitz and a feasible map whose
//! projections move at most λ‖x−y‖, the QVI has a unique solution when
//! `λ + √(1 − μ²/L²) < 1`, and the projected step `x ↦ P_{K(x)}(x − γA(x))`
//! contracts with factor `β = √(1 − 2μγ + γ²L²) + λ` for γ in an open
//! interval around `μ/L²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_constants(mu: f64, lip: f64, lambda: f64) -> Result<()> {
    if !(mu.is_finite() && lip.is_finite() && lambda.is_finite()) {
        return Err(Error::InvalidParameter("constants must be finite".into()));
    }
    if mu <= 0.0 {
        return Err(Error::NotStronglyMonotone { mu });
    }
    if mu > lip {
        return Err(Error::InvalidParameter(format!(
            "mu = {mu} exceeds lip = {lip}"
        )));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} is negative"
        )));
    }
    Ok(())
}

/// `λ + √(1 − μ²/L²)`, the quantity that must stay below 1.
fn lambda_condition_value(mu: f64, lip: f64, lambda: f64) -> f64 {
    let ratio = mu / lip;
    lambda + (1.0 - ratio * ratio).max(0.0).sqrt()
}

/// True iff `λ + √(1 − μ²/L²) < 1` (strict).
pub fn check_lambda_condition(mu: f64, lip: f64, lambda: f64) -> Result<bool> {
    check_constants(mu, lip, lambda)?;
    Ok(lambda_condition_value(mu, lip, lambda) < 1.0)
}

/// Open interval `(μ/L² − r, μ/L² + r)` with `r = √(μ² − L²λ(2−λ))/L²`.
///
/// The lower endpoint may be ≤ 0; callers additionally require γ > 0.
pub fn gamma_interval(mu: f64, lip: f64, lambda: f64) -> Result<(f64, f64)> {
    if !check_lambda_condition(mu, lip, lambda)? {
        return Err(Error::LambdaCondition {
            value: lambda_condition_value(mu, lip, lambda),
        });
    }
    let l2 = lip * lip;
    let radicand = mu * mu - l2 * lambda * (2.0 - lambda);
    // Positive under the λ-condition, up to rounding at the boundary.
    let r = radicand.max(0.0).sqrt() / l2;
    let center = mu / l2;
    Ok((center - r, center + r))
}

/// `β = √(1 − 2μγ + γ²L²) + λ`.
///
/// The radicand is evaluated as `(1 − γL)² + 2γ(L − μ)`, which is a sum of
/// nonnegative terms and avoids cancellation near `γ = μ/L²`. Does not check
/// that γ is admissible; see [`ContractionParams`] for the checked bundle.
pub fn contraction_beta(mu: f64, lip: f64, lambda: f64, gamma: f64) -> Result<f64> {
    check_constants(mu, lip, lambda)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must be finite and nonnegative"
        )));
    }
    let radicand = (1.0 - gamma * lip).powi(2) + 2.0 * gamma * (lip - mu);
    if radicand < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative radicand {radicand} in beta"
        )));
    }
    Ok(radicand.sqrt() + lambda)
}

/// `ϱ = max{β², b(1−β²), (1−β²)(1−a)}`.
///
/// Accepts β = 0 (attained at `γ = μ/L²` when `μ = L` and `λ = 0`).
pub fn contraction_rho(beta: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} must lie in [0, 1)"
        )));
    }
    check_theta_bounds(a, b)?;
    let b2 = beta * beta;
    Ok(b2.max(b * (1.0 - b2)).max((1.0 - b2) * (1.0 - a)))
}

fn check_theta_bounds(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a <= b && b < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta bounds must satisfy 0 < a <= b < 1, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// Largest possible one-step ratio `V_{k+1}/V_k` of the combined error
/// `V = ‖x−x*‖² + ‖z−x*‖²` for a constant inertial factor θ, when the
/// projected step contracts by exactly β.
///
/// This is `λ_max` of the 2×2 form
/// `[[β²(1−θ)²+θ², θ(1−θ)(1+β²)], [·, β²θ²+(1−θ)²]]`. When it exceeds
/// [`contraction_rho`] the per-step bound `V_{k+1} ≤ ϱV_k` can fail.
pub fn worst_case_energy_factor(beta: f64, theta: f64) -> f64 {
    let b2 = beta * beta;
    let t = theta;
    let s = 1.0 - theta;
    let p = b2 * s * s + t * t;
    let r = b2 * t * t + s * s;
    let q = t * s * (1.0 + b2);
    let mean = 0.5 * (p + r);
    let half_diff = 0.5 * (p - r);
    mean + (half_diff * half_diff + q * q).sqrt()
}

/// Validated constants for the linear-rate theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionParams {
    pub mu: f64,
    pub lip: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// Lower bound on the inertial parameters θ_k.
    pub a: f64,
    /// Upper bound on the inertial parameters θ_k.
    pub b: f64,
}

impl ContractionParams {
    /// Checks the λ-condition, `γ ∈ interval ∩ (0, ∞)` (strict) and
    /// `0 < a ≤ b < 1`.
    pub fn new(mu: f64, lip: f64, lambda: f64, gamma: f64, a: f64, b: f64) -> Result<Self> {
        let (lo, hi) = gamma_interval(mu, lip, lambda)?;
        if !(gamma > lo && gamma < hi && gamma > 0.0) {
            return Err(Error::GammaOutsideInterval {
                gamma,
                lo: lo.max(0.0),
                hi,
            });
        }
        check_theta_bounds(a, b)?;
        Ok(ContractionParams {
            mu,
            lip,
            lambda,
            gamma,
            a,
            b,
        })
    }

    pub fn gamma_interval(&self) -> (f64, f64) {
        gamma_interval(self.mu, self.lip, self.lambda).expect("validated at construction")
    }

    pub fn beta(&self) -> f64 {
        contraction_beta(self.mu, self.lip, self.lambda, self.gamma)
            .expect("validated at construction")
    }

    pub fn rho(&self) -> f64 {
        contraction_rho(self.beta(), self.a, self.b).expect("beta < 1 for admissible gamma")
    }

    /// True when the stated ϱ dominates the worst-case energy ratio for
    /// every constant θ in `[a, b]` (checked at the endpoints and on a grid).
    pub fn rate_bound_provable(&self) -> bool {
        let beta = self.beta();
        let rho = self.rho();
        (0..=64).all(|i| {
            let theta = self.a + (self.b - self.a) * i as f64 / 64.0;
            worst_case_energy_factor(beta, theta) <= rho
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 30-digit reference values.
    const SQRT_075: f64 = 0.866_025_403_784_438_646_763_723_170_753;
    const SQRT_006: f64 = 0.244_948_974_278_317_809_819_728_407_471;

    #[test]
    fn lambda_condition_examples() {
        assert!(check_lambda_condition(1.0, 1.0, 0.0).unwrap());
        assert!(check_lambda_condition(0.5, 1.0, 0.1).unwrap());
        assert!(!check_lambda_condition(0.5, 1.0, 0.2).unwrap());
        assert!(check_lambda_condition(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gamma_interval_examples() {
        let (lo, hi) = gamma_interval(1.0, 1.0, 0.0).unwrap();
        assert!((lo - 0.0).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);

        let (lo, hi) = gamma_interval(1.0, 1.0, 0.2).unwrap();
        assert!((lo - 0.2).abs() < 1e-12 && (hi - 1.8).abs() < 1e-12);

        let (lo, hi) = gamma_interval(0.5, 1.0, 0.1).unwrap();
        assert!((lo - (0.5 - SQRT_006)).abs() < 1e-12);
        assert!((hi - (0.5 + SQRT_006)).abs() < 1e-12);

        assert!(matches!(
            gamma_interval(0.5, 1.0, 0.2),
            Err(Error::LambdaCondition { .. })
        ));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(contraction_beta(1.0, 1.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((contraction_beta(1.0, 1.0, 0.2, 1.0).unwrap() - 0.2).abs() < 1e-15);
        let b = contraction_beta(0.5, 1.0, 0.1, 0.5).unwrap();
        assert!((b - (SQRT_075 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn rho_examples() {
        let r = contraction_rho(0.2, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!((r - 0.64).abs() < 1e-12);
        assert!((contraction_rho(0.5, 0.5, 0.5).unwrap() - 0.375).abs() < 1e-15);
        let r = contraction_rho(0.966_025_403_784_438_6, 0.2, 0.2).unwrap();
        assert!((r - 0.933_205_080_756_887_7).abs() < 1e-12);
        assert!(contraction_rho(1.0, 0.2, 0.2).is_err());
        assert!(contraction_rho(0.5, 0.3, 0.2).is_err());
        assert!(contraction_rho(0.5, 0.0, 0.2).is_err());
    }

    #[test]
    fn params_require_positive_gamma_inside_interval() {
        assert!(ContractionParams::new(1.0, 1.0, 0.2, 1.0, 0.3, 0.4).is_ok());
        assert!(matches!(
            ContractionParams::new(1.0, 1.0, 0.2, 1.8, 0.3, 0.4),
            Err(Error::GammaOutsideInterval { .. })
        ));
        // interval (0, 2) excludes 0 itself
        assert!(ContractionParams::new(1.0, 1.0, 0.0, 0.0, 0.3, 0.4).is_err());
    }

    #[test]
    fn worst_case_factor_matches_brute_force() {
        for &(beta, theta) in &[(0.2, 1.0 / 3.0), (0.7, 0.25), (0.0, 0.5), (0.9, 0.1)] {
            let mut best: f64 = 0.0;
            for i in 0..20_000 {
                let phi = std::f64::consts::PI * i as f64 / 20_000.0;
                let (u, w) = (phi.cos(), phi.sin());
                let x = beta * ((1.0 - theta) * u + theta * w);
                let z = (1.0 - theta) * w + theta * u;
                best = best.max(x * x + z * z);
            }
            let f = worst_case_energy_factor(beta, theta);
            assert!((f - best).abs() < 1e-7, "beta={beta} theta={theta}: {f} vs {best}");
        }
    }

    #[test]
    fn stated_rho_is_not_universal() {
        // β = 0.7, θ = 1/4: ϱ = 0.49 but the energy ratio can reach ≈ 0.77.
        let rho = contraction_rho(0.7, 0.25, 0.25).unwrap();
        assert!((rho - 0.49).abs() < 1e-12);
        assert!(worst_case_energy_factor(0.7, 0.25) > 0.76);
        // small β with θ = 1/3 is safe
        let rho = contraction_rho(0.2, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(worst_case_energy_factor(0.2, 1.0 / 3.0) <= rho);
    }
}
