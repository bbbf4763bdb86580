//! Bath-induced potential and force between the two oscillators.
//!
//! `V(u₁₂) = -∫ dν (g_ν²/ω_ν²) cos[ν(u₁₂ - d)]`, and the matching
//! drift term `∫ dν (ν g_ν²/ω_ν²) sin(ν y)` that appears in the noise forces
//! of the full equations of motion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Coupling, CouplingModel};
use crate::quadrature::{self, Tolerance};

/// Two identical oscillators: mass `M`, bare frequency `ω₀`, oscillator 2
/// localized a distance `d` from oscillator 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorPair {
    pub mass: f64,
    pub omega0: f64,
    pub d: f64,
}

impl OscillatorPair {
    pub fn new(mass: f64, omega0: f64, d: f64) -> Result<Self> {
        let pair = Self { mass, omega0, d };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::domain(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::domain(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(Error::domain(format!("separation must be non-negative, got {}", self.d)));
        }
        Ok(())
    }

    /// Retardation time `τ₀ = d / u₀`.
    pub fn delay(&self, u0: f64) -> f64 {
        self.d / u0
    }
}

fn divergent(model: &CouplingModel) -> Error {
    Error::DivergentSpectrum(format!("{}: g^2/omega^2 is not integrable at nu -> 0, so the induced potential is undefined", model.tag()))
}

/// Induced potential at relative displacement `u₁₂ = x₁ - x₂`.
///
/// Exponential cutoff: `-(Aν₀/u₀²) / (1 + ν₀²(u₁₂-d)²)`, vanishing at infinity.
/// Drude: the defining integral diverges at small ν; subtracting its value at
/// `u₁₂ = d` leaves `γu₀(|x| - λ + λe^{-|x|/λ})`, `x = u₁₂ - d`, which is zero
/// at the minimum and grows linearly. Ohmic diverges.
pub fn induced_potential(model: &CouplingModel, u12: f64, d: f64) -> Result<f64> {
    let x = u12 - d;
    match model.coupling {
        Coupling::ExponentialCutoff { amplitude, cutoff } => {
            Ok(-amplitude * cutoff / (model.u0 * model.u0) / (1.0 + cutoff * cutoff * x * x))
        }
        Coupling::Drude { gamma, .. } => {
            let lambda = model.drude_length().expect("drude");
            let a = x.abs();
            // λ(e^{-a/λ} - 1 + a/λ) loses digits for a ≪ λ; use the series there.
            let r = a / lambda;
            let core = if r < 1e-3 { lambda * r * r * (0.5 - r / 6.0 + r * r / 24.0) } else { a - lambda + lambda * (-r).exp() };
            Ok(gamma * model.u0 * core)
        }
        Coupling::Ohmic { .. } => Err(divergent(model)),
    }
}

/// Force on oscillator 1, `F₁₂ = -dV/du₁₂`; oscillator 2 receives `-F₁₂`.
pub fn induced_force(model: &CouplingModel, u12: f64, d: f64) -> Result<f64> {
    let x = u12 - d;
    match model.coupling {
        Coupling::ExponentialCutoff { .. } | Coupling::Drude { .. } => Ok(-drift_integral(model, x)?),
        Coupling::Ohmic { .. } => Err(divergent(model)),
    }
}

/// `S(y) = ∫₀^∞ dν (ν g_ν²/ω_ν²) sin(νy)`, equal to `dV/du` at `u - d = y`.
pub fn drift_integral(model: &CouplingModel, y: f64) -> Result<f64> {
    let u0sq = model.u0 * model.u0;
    match model.coupling {
        Coupling::ExponentialCutoff { amplitude, cutoff } => {
            let s = 1.0 + cutoff * cutoff * y * y;
            Ok(2.0 * amplitude * cutoff.powi(3) / u0sq * y / (s * s))
        }
        Coupling::Drude { gamma, .. } => {
            let lambda = model.drude_length().expect("drude");
            Ok(gamma * model.u0 * y.signum() * -(-y.abs() / lambda).exp_m1())
        }
        Coupling::Ohmic { .. } => Err(divergent(model)),
    }
}

/// Position-dependent drift of the noise forces `(F₁ - f₁, F₂ - f₂)`.
pub fn drift_terms(model: &CouplingModel, x1: f64, x2: f64, x1_0: f64, x2_0: f64, d: f64) -> Result<[f64; 2]> {
    let a = drift_integral(model, x1 - x1_0)? + drift_integral(model, x1 - x2_0 - d)?;
    let b = drift_integral(model, x2 - x2_0)? + drift_integral(model, x2 - x1_0 + d)?;
    Ok([a, b])
}

/// Gradients `(∂V/∂x₁, ∂V/∂x₂)` at the given positions.
pub fn potential_gradient(model: &CouplingModel, x1: f64, x2: f64, d: f64) -> Result<[f64; 2]> {
    let s = drift_integral(model, x1 - x2 - d)?;
    Ok([s, -s])
}

/// `V` from its defining ν-integral, evaluated by quadrature.
///
/// For Drude the integrand is regularized as `(cos(νx) - 1)`, which fixes the
/// same additive constant as [`induced_potential`].
pub fn induced_potential_quadrature(model: &CouplingModel, u12: f64, d: f64, tol: Tolerance) -> Result<f64> {
    let x = u12 - d;
    let u0sq = model.u0 * model.u0;
    match model.coupling {
        Coupling::ExponentialCutoff { amplitude, cutoff } => {
            let b = x * cutoff;
            let r = quadrature::exp_weighted(|s| (b * s).cos(), tol)?;
            Ok(-amplitude * cutoff / u0sq * r.value)
        }
        Coupling::Drude { .. } => {
            // g²/ω² = C / (ν²(1 + λ²ν²)); split at ν = 1/λ, finite part plus tail.
            let lambda = model.drude_length().expect("drude");
            let c = model.coupling_sq_unchecked(0.0) / u0sq;
            let f = |nu: f64| {
                let s = (nu * x * 0.5).sin();
                // 1 - cos(νx) = 2 sin²(νx/2), stable as ν → 0.
                2.0 * s * s / (nu * nu * (1.0 + lambda * lambda * nu * nu))
            };
            let split = 1.0 / lambda;
            let head = quadrature::integrate(f, 0.0, split, tol)?.value;
            let tail = quadrature::integrate_semi_infinite(f, split, tol)?.value;
            Ok(c * (head + tail))
        }
        Coupling::Ohmic { .. } => Err(divergent(model)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ORACLE_TOL;

    fn cut() -> CouplingModel {
        CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn potential_examples() {
        let m = cut();
        assert_eq!(induced_potential(&m, 2.0, 2.0).unwrap(), -1.0);
        assert_eq!(induced_potential(&m, 3.0, 2.0).unwrap(), -0.5);
        assert!(induced_potential(&m, 1e9, 2.0).unwrap().abs() < 1e-17);
        assert!(induced_potential(&m, -1e9, 2.0).unwrap().abs() < 1e-17);
    }

    #[test]
    fn force_examples() {
        let m = cut();
        assert_eq!(induced_force(&m, 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(induced_force(&m, 3.0, 2.0).unwrap(), -0.5);
        for delta in [0.1, 0.7, 3.0] {
            assert_eq!(induced_force(&m, 2.0 + delta, 2.0).unwrap(), -induced_force(&m, 2.0 - delta, 2.0).unwrap());
        }
    }

    #[test]
    fn ohmic_potential_diverges() {
        let m = CouplingModel::ohmic(0.1, 1.0).unwrap();
        assert!(matches!(induced_potential(&m, 0.0, 1.0), Err(Error::DivergentSpectrum(_))));
        assert!(matches!(induced_force(&m, 0.0, 1.0), Err(Error::DivergentSpectrum(_))));
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let m = cut();
        for k in 0..=40 {
            let u = 2.0 - 10.0 + 0.5 * k as f64;
            let q = induced_potential_quadrature(&m, u, 2.0, ORACLE_TOL).unwrap();
            let c = induced_potential(&m, u, 2.0).unwrap();
            assert!((q - c).abs() < 1e-6, "u={u}: {q} vs {c}");
        }
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        for &u in &[2.0, 2.01, 2.3, 1.0, 5.0, -3.0] {
            let q = induced_potential_quadrature(&drude, u, 2.0, Tolerance::new(1e-11, 1e-9)).unwrap();
            let c = induced_potential(&drude, u, 2.0).unwrap();
            assert!((q - c).abs() < 1e-8, "u={u}: {q} vs {c}");
        }
    }

    #[test]
    fn drude_potential_is_confining() {
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        assert_eq!(induced_potential(&drude, 2.0, 2.0).unwrap(), 0.0);
        for &u in &[-5.0, 0.0, 1.99, 2.01, 8.0] {
            assert!(induced_potential(&drude, u, 2.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn drift_cancels_induced_force_at_rest() {
        for m in [cut(), CouplingModel::drude(0.2, 5.0, 1.3).unwrap()] {
            for d in [0.0, 0.4, 2.0, 7.5] {
                let drift = drift_terms(&m, 0.0, 0.0, 0.0, 0.0, d).unwrap();
                let grad = potential_gradient(&m, 0.0, 0.0, d).unwrap();
                assert!((drift[0] - grad[0]).abs() < 1e-15);
                assert!((drift[1] - grad[1]).abs() < 1e-15);
            }
        }
    }
}
