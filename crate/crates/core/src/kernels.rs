//! Coupling spectra `g_ν²` and the memory kernels they generate.
//!
//! With linear dispersion `ω_ν = u₀ ν` every kernel is a cosine transform of
//! the spectral weight `ν² g_ν² / ω_ν² = g_ν² / u₀²`:
//!
//! ```text
//! χ(Δt; Δx) = ∫₀^∞ dν (g_ν²/u₀²) cos(u₀ ν Δt) cos(ν Δx)
//! ```
//!
//! The self kernel uses `Δx = x_i(t) - x_i(t')`, the cross kernel
//! `Δx = x₁(t) - x₂(t') - d`. Closed forms exist for all three coupling
//! families; the defining integrals are also evaluated by quadrature in
//! [`quadrature_route`] so the two can be checked against each other.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quadrature::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coupling {
    /// `g_ν² = A ν² e^{-ν/ν₀}`.
    ExponentialCutoff { amplitude: f64, cutoff: f64 },
    /// `g_ν² = u₀³ γ / π`.
    Ohmic { gamma: f64 },
    /// `g_ν² = (2 γ u₀³ / π) / (1 + λ_D² ν²)`, `λ_D = u₀ / ω_D`.
    Drude { gamma: f64, omega_d: f64 },
}

/// A coupling family together with the bath propagation speed `u₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub coupling: Coupling,
    pub u0: f64,
}

/// A weighted, possibly delayed Dirac delta `weight · δ(t - delay)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiracDelta {
    pub weight: f64,
    pub delay: f64,
}

impl DiracDelta {
    /// Weight picked up by `∫₀^t δ(t - t' - delay) v(t') dt'`: a delta sitting on
    /// the border of the integration range counts one half.
    pub fn border_weight(&self) -> f64 {
        if self.delay == 0.0 {
            0.5 * self.weight
        } else {
            self.weight
        }
    }
}

/// Value of a memory kernel: an ordinary number, or a sum of delta markers
/// for the Ohmic family (never sampled onto a float grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelValue {
    Smooth(f64),
    Deltas(Vec<DiracDelta>),
}

impl KernelValue {
    pub fn smooth(&self) -> Option<f64> {
        match self {
            KernelValue::Smooth(v) => Some(*v),
            KernelValue::Deltas(_) => None,
        }
    }

    pub fn deltas(&self) -> &[DiracDelta] {
        match self {
            KernelValue::Smooth(_) => &[],
            KernelValue::Deltas(d) => d,
        }
    }

    fn combine(&self, other: &KernelValue, sign: f64) -> KernelValue {
        match (self, other) {
            (KernelValue::Smooth(a), KernelValue::Smooth(b)) => KernelValue::Smooth(a + sign * b),
            (KernelValue::Deltas(a), KernelValue::Deltas(b)) => {
                let mut out: Vec<DiracDelta> = a.clone();
                for delta in b {
                    let w = sign * delta.weight;
                    match out.iter_mut().find(|x| x.delay == delta.delay) {
                        Some(x) => x.weight += w,
                        None => out.push(DiracDelta { weight: w, delay: delta.delay }),
                    }
                }
                out.retain(|x| x.weight != 0.0);
                KernelValue::Deltas(out)
            }
            // A family never mixes the two kinds.
            _ => unreachable!("smooth and delta kernels do not mix"),
        }
    }

    pub fn plus(&self, other: &KernelValue) -> KernelValue {
        self.combine(other, 1.0)
    }

    pub fn minus(&self, other: &KernelValue) -> KernelValue {
        self.combine(other, -1.0)
    }
}

impl fmt::Display for KernelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelValue::Smooth(v) => write!(f, "{v}"),
            KernelValue::Deltas(d) if d.is_empty() => write!(f, "0"),
            KernelValue::Deltas(d) => {
                let parts: Vec<String> = d
                    .iter()
                    .map(|x| if x.delay == 0.0 { format!("{}*delta(t)", x.weight) } else { format!("{}*delta(t-{})", x.weight, x.delay) })
                    .collect();
                write!(f, "{}", parts.join(" + "))
            }
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be non-negative, got {v}")))
    }
}

/// `(1 - 3 ν₀² u²) / (1 + ν₀² u²)³`, one lobe of the exponential-cutoff kernel.
#[inline]
fn cutoff_lobe(cutoff: f64, u: f64) -> f64 {
    let s = cutoff * cutoff * u * u;
    (1.0 - 3.0 * s) / (1.0 + s).powi(3)
}

impl CouplingModel {
    pub fn new(coupling: Coupling, u0: f64) -> Result<Self> {
        let model = Self { coupling, u0 };
        model.validate()?;
        Ok(model)
    }

    pub fn exponential_cutoff(amplitude: f64, cutoff: f64, u0: f64) -> Result<Self> {
        Self::new(Coupling::ExponentialCutoff { amplitude, cutoff }, u0)
    }

    pub fn ohmic(gamma: f64, u0: f64) -> Result<Self> {
        Self::new(Coupling::Ohmic { gamma }, u0)
    }

    pub fn drude(gamma: f64, omega_d: f64, u0: f64) -> Result<Self> {
        Self::new(Coupling::Drude { gamma, omega_d }, u0)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("u0", self.u0)?;
        match self.coupling {
            Coupling::ExponentialCutoff { amplitude, cutoff } => {
                check_nonnegative("A", amplitude)?;
                check_positive("nu0", cutoff)
            }
            Coupling::Ohmic { gamma } => check_nonnegative("gamma", gamma),
            Coupling::Drude { gamma, omega_d } => {
                check_nonnegative("gamma", gamma)?;
                check_positive("omega_D", omega_d)
            }
        }
    }

    /// Provenance string identifying the model exactly.
    pub fn tag(&self) -> String {
        match self.coupling {
            Coupling::ExponentialCutoff { amplitude, cutoff } => {
                format!("exponential_cutoff(A={amplitude},nu0={cutoff},u0={})", self.u0)
            }
            Coupling::Ohmic { gamma } => format!("ohmic(gamma={gamma},u0={})", self.u0),
            Coupling::Drude { gamma, omega_d } => {
                format!("drude(gamma={gamma},omega_d={omega_d},u0={})", self.u0)
            }
        }
    }

    pub fn is_ohmic(&self) -> bool {
        matches!(self.coupling, Coupling::Ohmic { .. })
    }

    /// `λ_D = u₀ / ω_D` for the Drude family.
    pub fn drude_length(&self) -> Option<f64> {
        match self.coupling {
            Coupling::Drude { omega_d, .. } => Some(self.u0 / omega_d),
            _ => None,
        }
    }

    /// Wavenumber scale of the spectrum: `ν₀` or `ω_D / u₀`; none for Ohmic.
    pub fn characteristic_wavenumber(&self) -> Option<f64> {
        match self.coupling {
            Coupling::ExponentialCutoff { cutoff, .. } => Some(cutoff),
            Coupling::Drude { omega_d, .. } => Some(omega_d / self.u0),
            Coupling::Ohmic { .. } => None,
        }
    }

    #[inline]
    pub fn omega(&self, nu: f64) -> f64 {
        self.u0 * nu
    }

    /// `g_ν²` for `ν ≥ 0`.
    pub fn coupling_strength_sq(&self, nu: f64) -> Result<f64> {
        if !(nu >= 0.0) {
            return Err(Error::domain(format!("wavenumber must be non-negative, got {nu}")));
        }
        Ok(self.coupling_sq_unchecked(nu))
    }

    #[inline]
    pub(crate) fn coupling_sq_unchecked(&self, nu: f64) -> f64 {
        let u0 = self.u0;
        match self.coupling {
            Coupling::ExponentialCutoff { amplitude, cutoff } => amplitude * nu * nu * (-nu / cutoff).exp(),
            Coupling::Ohmic { gamma } => u0.powi(3) * gamma / PI,
            Coupling::Drude { gamma, omega_d } => {
                let lambda = u0 / omega_d;
                2.0 * gamma * u0.powi(3) / PI / (1.0 + lambda * lambda * nu * nu)
            }
        }
    }

    /// Spectral weight `ν² g_ν² / ω_ν²` entering every kernel.
    #[inline]
    pub fn spectral_weight(&self, nu: f64) -> f64 {
        self.coupling_sq_unchecked(nu) / (self.u0 * self.u0)
    }

    /// Fraction of `∫ ν² g²/ω² dν` lying above `nu_max`; `None` for the flat
    /// Ohmic spectrum, whose total weight is infinite.
    pub fn spectral_tail_fraction(&self, nu_max: f64) -> Option<f64> {
        match self.coupling {
            Coupling::ExponentialCutoff { cutoff, .. } => {
                let x = nu_max / cutoff;
                Some((-x).exp() * (1.0 + x + 0.5 * x * x))
            }
            Coupling::Drude { omega_d, .. } => {
                let lambda = self.u0 / omega_d;
                Some(1.0 - 2.0 / PI * (lambda * nu_max).atan())
            }
            Coupling::Ohmic { .. } => None,
        }
    }

    /// Self memory kernel `χ(Δt)` at zero displacement.
    pub fn kernel_chi(&self, dt: f64) -> Result<KernelValue> {
        check_nonnegative("time lag", dt)?;
        Ok(self.position_kernel(dt, 0.0))
    }

    /// Cross memory kernel `χ(Δt; d)` with the oscillators frozen at their equilibria.
    pub fn kernel_chi_d(&self, dt: f64, d: f64) -> Result<KernelValue> {
        check_nonnegative("time lag", dt)?;
        check_nonnegative("separation", d)?;
        Ok(self.position_kernel(dt, -d))
    }

    /// Memory kernel at an arbitrary spatial displacement.
    ///
    /// `cross = false`: `u± = Δx ± u₀Δt`; `cross = true`: `u± = Δx - d ± u₀Δt`.
    pub fn kernel_chi_position(&self, dt: f64, dx: f64, cross: bool, d: f64) -> Result<KernelValue> {
        check_nonnegative("time lag", dt)?;
        if !dx.is_finite() {
            return Err(Error::domain("displacement must be finite"));
        }
        let arg = if cross {
            check_nonnegative("separation", d)?;
            dx - d
        } else {
            dx
        };
        Ok(self.position_kernel(dt, arg))
    }

    /// `∫ dν (g²/u₀²) cos(u₀νΔt) cos(ν·arg)` in closed form.
    fn position_kernel(&self, dt: f64, arg: f64) -> KernelValue {
        let u0 = self.u0;
        let up = arg + u0 * dt;
        let um = arg - u0 * dt;
        match self.coupling {
            Coupling::ExponentialCutoff { amplitude, cutoff } => {
                let pref = amplitude * cutoff.powi(3) / (u0 * u0);
                KernelValue::Smooth(pref * (cutoff_lobe(cutoff, up) + cutoff_lobe(cutoff, um)))
            }
            Coupling::Drude { gamma, omega_d } => {
                let rate = omega_d / u0;
                KernelValue::Smooth(0.5 * gamma * omega_d * ((-rate * up.abs()).exp() + (-rate * um.abs()).exp()))
            }
            Coupling::Ohmic { gamma } => {
                // (γ/2)[δ(Δt + arg/u₀) + δ(Δt - arg/u₀)]; only the causal root survives.
                let delay = arg.abs() / u0;
                let weight = if delay == 0.0 { gamma } else { 0.5 * gamma };
                KernelValue::Deltas(vec![DiracDelta { weight, delay }])
            }
        }
    }

    /// `(χ_R, χ_Z) = (χ + χ(·;d), χ - χ(·;d))`.
    pub fn mode_kernels(&self, dt: f64, d: f64) -> Result<(KernelValue, KernelValue)> {
        let chi = self.kernel_chi(dt)?;
        let chi_d = self.kernel_chi_d(dt, d)?;
        Ok((chi.plus(&chi_d), chi.minus(&chi_d)))
    }

    /// Tabulate the self (`d = None`) or cross kernel on a grid.
    pub fn tabulate(&self, grid: TimeGrid, d: Option<f64>) -> Result<KernelTable> {
        if self.is_ohmic() {
            return Err(Error::Unsupported("Ohmic kernels are delta distributions and are never sampled onto a grid".into()));
        }
        let mut values = Vec::with_capacity(grid.n);
        for t in grid.times() {
            let v = match d {
                None => self.kernel_chi(t)?,
                Some(d) => self.kernel_chi_d(t, d)?,
            };
            values.push(v.smooth().expect("smooth family"));
        }
        Ok(KernelTable { grid, values, d: d.unwrap_or(0.0), model_tag: self.tag(), u0: self.u0 })
    }
}

/// Tabulated kernel `χ(t_i)` on a uniform grid starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub d: f64,
    pub model_tag: String,
    pub u0: f64,
}

impl KernelTable {
    pub fn from_values(h: f64, values: Vec<f64>, u0: f64, model_tag: impl Into<String>) -> Result<Self> {
        let grid = TimeGrid::new(h, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("kernel table contains non-finite values"));
        }
        check_positive("u0", u0)?;
        Ok(Self { grid, values, d: 0.0, model_tag: model_tag.into(), u0 })
    }
}

/// Normalization of the cosine-transform inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InversionPrefactor {
    /// `2u₀³/π`, which maps the Ohmic and Drude kernels back onto their couplings.
    #[default]
    Consistent,
    /// `2ω_ν²/(πν²) = 2u₀²/π`, the prefactor as printed in the original derivation.
    AsPrinted,
}

impl InversionPrefactor {
    fn value(self, u0: f64) -> f64 {
        match self {
            InversionPrefactor::Consistent => 2.0 * u0.powi(3) / PI,
            InversionPrefactor::AsPrinted => 2.0 * u0 * u0 / PI,
        }
    }
}

/// Exponential tail beyond the last table entry, fitted on the final `window` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub amplitude: f64,
    pub rate: f64,
    pub window: usize,
}

impl KernelTable {
    /// Default fit window: the last 10% of the table, at least 5 points.
    pub fn default_fit_window(&self) -> usize {
        (self.values.len() / 10).max(5).min(self.values.len())
    }

    /// Fit `χ(t) ≈ a e^{-κ t}` on the trailing `window` points (log-linear least squares).
    pub fn fit_tail(&self, window: usize) -> Result<Option<TailFit>> {
        let n = self.values.len();
        let window = window.clamp(2, n.max(2));
        if n < 2 {
            return Ok(None);
        }
        let start = n - window.min(n);
        let tail = &self.values[start..];
        let peak = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if tail.iter().all(|&v| v.abs() <= 1e-14 * peak.max(f64::MIN_POSITIVE)) {
            return Ok(None);
        }
        let sign = tail[tail.len() - 1].signum();
        if tail.iter().any(|&v| v == 0.0 || v.signum() != sign) {
            return Err(Error::Inversion("kernel tail changes sign inside the fit window".into()));
        }
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        let m = tail.len() as f64;
        for (k, v) in tail.iter().enumerate() {
            let t = self.grid.t(start + k);
            let y = v.abs().ln();
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
        }
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let intercept = (sy - slope * sx) / m;
        let rate = -slope;
        if !(rate > 0.0) {
            return Err(Error::Inversion(format!("kernel table does not decay (fitted tail rate {rate:.3e})")));
        }
        Ok(Some(TailFit { amplitude: sign * intercept.exp(), rate, window }))
    }
}

/// Kernel input to [`invert_kernel_to_coupling`].
#[derive(Debug, Clone, Copy)]
pub enum KernelSource<'a> {
    /// The closed-form self kernel of a model (delta markers included).
    Model(&'a CouplingModel),
    Table(&'a KernelTable),
}

/// Recover `g_ν²` from the self kernel: `g_ν² = P ∫₀^∞ χ(t) cos(ω_ν t) dt`.
pub fn invert_kernel_to_coupling(source: KernelSource<'_>, nu: f64, prefactor: InversionPrefactor) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::domain(format!("wavenumber must be non-negative, got {nu}")));
    }
    match source {
        KernelSource::Model(model) => {
            let omega = model.omega(nu);
            let integral = match model.coupling {
                Coupling::Ohmic { .. } => model.kernel_chi(0.0)?.deltas().iter().map(|x| x.border_weight() * (omega * x.delay).cos()).sum(),
                _ => {
                    let tol = Tolerance::new(1e-13, 1e-10);
                    quadrature::fourier_cos(|t| model.kernel_chi(t).ok().and_then(|k| k.smooth()).unwrap_or(0.0), omega, tol)?.value
                }
            };
            Ok(prefactor.value(model.u0) * integral)
        }
        KernelSource::Table(table) => {
            let omega = table.u0 * nu;
            let integral = filon_cos_table(table, omega)?;
            Ok(prefactor.value(table.u0) * integral)
        }
    }
}

/// `∫₀^∞ χ(t) cos(ωt) dt` for a tabulated kernel: exact integration of the
/// piecewise-linear interpolant times the cosine, plus the fitted exponential tail.
fn filon_cos_table(table: &KernelTable, omega: f64) -> Result<f64> {
    let v = &table.values;
    if v.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let h = table.grid.h;
    let mut sum = 0.0;
    for j in 0..v.len().saturating_sub(1) {
        let t0 = table.grid.t(j);
        let (a, b) = (v[j], v[j + 1]);
        sum += linear_times_cos(a, b, t0, h, omega);
    }
    if let Some(fit) = table.fit_tail(table.default_fit_window())? {
        let t_end = table.grid.t_end();
        let (k, w) = (fit.rate, omega);
        sum += fit.amplitude * (-k * t_end).exp() * (k * (w * t_end).cos() - w * (w * t_end).sin()) / (k * k + w * w);
    }
    Ok(sum)
}

/// `∫_{t0}^{t0+h} [a + (b-a)(t-t0)/h] cos(ωt) dt`.
fn linear_times_cos(a: f64, b: f64, t0: f64, h: f64, omega: f64) -> f64 {
    let theta = omega * h;
    if theta.abs() < 1e-3 {
        // Series to avoid cancellation at small ωh.
        let c0 = (omega * t0).cos();
        let s0 = (omega * t0).sin();
        let m0 = 0.5 * (a + b);
        let m1 = (a + 2.0 * b) / 6.0;
        let m2 = (a + 3.0 * b) / 12.0;
        // ∫ ℓ(s) cos(ω(t0 + s h)) h ds with cos expanded to second order in θ s.
        return h * (c0 * (m0 - 0.5 * theta * theta * m2) - s0 * theta * m1);
    }
    let t1 = t0 + h;
    let slope = (b - a) / h;
    let (s0, s1) = ((omega * t0).sin(), (omega * t1).sin());
    let (c0, c1) = ((omega * t0).cos(), (omega * t1).cos());
    (b * s1 - a * s0) / omega + slope * (c1 - c0) / (omega * omega)
}

/// The defining ν-integrals evaluated by quadrature instead of closed forms.
pub mod quadrature_route {
    use super::*;
    use crate::quadrature::{exp_weighted, fourier_cos};

    /// `χ(Δt; arg) = ∫ dν (g²/u₀²) cos(u₀νΔt) cos(ν·arg)` by quadrature:
    /// Gauss–Laguerre for the exponential cutoff, period-wise Fourier
    /// integration for the Lorentzian Drude spectrum.
    pub fn chi(model: &CouplingModel, dt: f64, arg: f64, tol: Tolerance) -> Result<f64> {
        let u0 = model.u0;
        match model.coupling {
            Coupling::ExponentialCutoff { amplitude, cutoff } => {
                let a = u0 * dt * cutoff;
                let b = arg * cutoff;
                let r = exp_weighted(|s| s * s * (a * s).cos() * (b * s).cos(), tol)?;
                Ok(amplitude * cutoff.powi(3) / (u0 * u0) * r.value)
            }
            Coupling::Drude { gamma, .. } => {
                let lambda = model.drude_length().expect("drude");
                let lorentz = |nu: f64| 1.0 / (1.0 + lambda * lambda * nu * nu);
                let plus = fourier_cos(lorentz, arg + u0 * dt, tol)?.value;
                let minus = fourier_cos(lorentz, arg - u0 * dt, tol)?.value;
                Ok(gamma * u0 / PI * (plus + minus))
            }
            Coupling::Ohmic { .. } => Err(Error::Unsupported("the Ohmic kernel is a distribution; it has no pointwise quadrature".into())),
        }
    }

    pub fn chi_self(model: &CouplingModel, dt: f64, tol: Tolerance) -> Result<f64> {
        chi(model, dt, 0.0, tol)
    }

    /// Cross kernel by quadrature; accepts either sign of `d`.
    pub fn chi_d(model: &CouplingModel, dt: f64, d: f64, tol: Tolerance) -> Result<f64> {
        chi(model, dt, -d, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::ORACLE_TOL;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coupling_strength_examples() {
        let ohmic = CouplingModel::ohmic(0.1, 1.0).unwrap();
        assert!(close(ohmic.coupling_strength_sq(3.7).unwrap(), 0.1 / PI, 1e-15));
        let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap();
        assert_eq!(cut.coupling_strength_sq(0.0).unwrap(), 0.0);
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        assert!(close(drude.coupling_strength_sq(10.0).unwrap(), 0.1 / PI, 1e-15));
        assert!(matches!(drude.coupling_strength_sq(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(CouplingModel::drude(0.1, 0.0, 1.0).is_err());
        assert!(CouplingModel::ohmic(-0.1, 1.0).is_err());
        assert!(CouplingModel::exponential_cutoff(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn drude_length_consistent() {
        let m = CouplingModel::drude(0.3, 7.0, 2.5).unwrap();
        let lambda = m.drude_length().unwrap();
        assert_eq!(lambda * 7.0, 2.5);
    }

    #[test]
    fn kernel_chi_examples() {
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        assert!(close(drude.kernel_chi(0.0).unwrap().smooth().unwrap(), 1.0, 1e-15));
        let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap();
        assert!(close(cut.kernel_chi(0.0).unwrap().smooth().unwrap(), 2.0, 1e-15));
        let ohmic = CouplingModel::ohmic(0.1, 1.0).unwrap();
        assert_eq!(ohmic.kernel_chi(0.5).unwrap(), KernelValue::Deltas(vec![DiracDelta { weight: 0.1, delay: 0.0 }]));
        assert!(drude.kernel_chi(-0.1).is_err());
    }

    #[test]
    fn kernel_chi_d_examples() {
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let v = drude.kernel_chi_d(0.2, 0.0).unwrap().smooth().unwrap();
        assert!(close(v, (-2.0f64).exp(), 1e-15));
        let far = drude.kernel_chi_d(1.0, 1e6).unwrap().smooth().unwrap();
        assert!(far < 1e-30);
        let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap();
        let v = cut.kernel_chi_d(2.0, 2.0).unwrap().smooth().unwrap();
        assert!(close(v, 1.0 - 47.0 / 4913.0, 1e-14));
        let ohmic = CouplingModel::ohmic(0.1, 2.0).unwrap();
        assert_eq!(ohmic.kernel_chi_d(0.0, 3.0).unwrap(), KernelValue::Deltas(vec![DiracDelta { weight: 0.05, delay: 1.5 }]));
        assert!(cut.kernel_chi_d(1.0, -1.0).is_err());
    }

    #[test]
    fn exponential_cutoff_quadrature_examples() {
        let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap();
        let q0 = quadrature_route::chi_self(&cut, 0.0, ORACLE_TOL).unwrap();
        assert!(close(q0, 2.0, 1e-10));
        let q = quadrature_route::chi_d(&cut, 2.0, 2.0, ORACLE_TOL).unwrap();
        assert!(close(q, 1.0 - 47.0 / 4913.0, 1e-8), "{q}");
        let q1 = quadrature_route::chi_self(&cut, 1.0, ORACLE_TOL).unwrap();
        assert!(close(q1, -0.5, 1e-6));
    }

    #[test]
    fn position_kernel_examples_and_reductions() {
        let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap();
        let v = cut.kernel_chi_position(0.0, 0.0, false, 0.0).unwrap().smooth().unwrap();
        assert_eq!(v, 2.0);
        let v = cut.kernel_chi_position(0.0, 2.0, true, 2.0).unwrap().smooth().unwrap();
        assert_eq!(v, 2.0);
        let v = cut.kernel_chi_position(1.0, 0.0, false, 0.0).unwrap().smooth().unwrap();
        assert!(close(v, -0.5, 1e-15));
        for model in [cut, CouplingModel::drude(0.1, 10.0, 1.0).unwrap(), CouplingModel::ohmic(0.2, 1.5).unwrap()] {
            for &(dt, d) in &[(0.0, 0.0), (0.3, 1.0), (2.0, 2.0), (1.7, 0.4)] {
                assert_eq!(model.kernel_chi_position(dt, 0.0, false, d).unwrap(), model.kernel_chi(dt).unwrap());
                assert_eq!(model.kernel_chi_position(dt, 0.0, true, d).unwrap(), model.kernel_chi_d(dt, d).unwrap());
            }
        }
    }

    #[test]
    fn mode_kernel_examples() {
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let (r, z) = drude.mode_kernels(0.0, 2.0).unwrap();
        let e20 = (-20.0f64).exp();
        assert!(close(r.smooth().unwrap(), 1.0 + 0.5 * 2.0 * e20, 1e-15));
        assert!(close(z.smooth().unwrap(), 1.0 - 0.5 * 2.0 * e20, 1e-15));
        let (r, z) = drude.mode_kernels(0.37, 0.0).unwrap();
        assert!(close(z.smooth().unwrap(), 0.0, 1e-16));
        assert!(close(r.smooth().unwrap(), 2.0 * drude.kernel_chi(0.37).unwrap().smooth().unwrap(), 1e-15));
        let ohmic = CouplingModel::ohmic(0.1, 1.0).unwrap();
        let (r, z) = ohmic.mode_kernels(0.0, 0.0).unwrap();
        assert_eq!(z, KernelValue::Deltas(vec![]));
        assert_eq!(r, KernelValue::Deltas(vec![DiracDelta { weight: 0.2, delay: 0.0 }]));
    }

    #[test]
    fn inversion_examples() {
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let g2 = invert_kernel_to_coupling(KernelSource::Model(&drude), 10.0, InversionPrefactor::Consistent).unwrap();
        assert!(close(g2, 0.1 / PI, 1e-9), "{g2}");
        let ohmic = CouplingModel::ohmic(0.1, 1.0).unwrap();
        for nu in [0.0, 0.5, 40.0] {
            let g2 = invert_kernel_to_coupling(KernelSource::Model(&ohmic), nu, InversionPrefactor::Consistent).unwrap();
            assert!(close(g2, 0.1 / PI, 1e-15));
        }
        let zero = KernelTable::from_values(0.01, vec![0.0; 100], 1.0, "zero").unwrap();
        for nu in [0.0, 1.0, 7.0] {
            assert_eq!(invert_kernel_to_coupling(KernelSource::Table(&zero), nu, InversionPrefactor::Consistent).unwrap(), 0.0);
        }
    }

    #[test]
    fn table_inversion_matches_drude_coupling() {
        let drude = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let table = drude.tabulate(TimeGrid::new(1e-3, 3001).unwrap(), None).unwrap();
        for nu in [0.1, 1.0, 10.0, 100.0] {
            let g2 = invert_kernel_to_coupling(KernelSource::Table(&table), nu, InversionPrefactor::Consistent).unwrap();
            let exact = drude.coupling_strength_sq(nu).unwrap();
            assert!(((g2 - exact) / exact).abs() < 1e-4, "nu={nu}: {g2} vs {exact}");
        }
    }

    #[test]
    fn non_decaying_table_rejected() {
        let grow: Vec<f64> = (0..200).map(|i| (0.01 * i as f64).exp()).collect();
        let table = KernelTable::from_values(0.01, grow, 1.0, "growing").unwrap();
        let err = invert_kernel_to_coupling(KernelSource::Table(&table), 1.0, InversionPrefactor::Consistent);
        assert!(matches!(err, Err(Error::Inversion(_))));
    }

    #[test]
    fn printed_prefactor_differs_by_u0() {
        let drude = CouplingModel::drude(0.1, 10.0, 2.0).unwrap();
        let a = invert_kernel_to_coupling(KernelSource::Model(&drude), 3.0, InversionPrefactor::Consistent).unwrap();
        let b = invert_kernel_to_coupling(KernelSource::Model(&drude), 3.0, InversionPrefactor::AsPrinted).unwrap();
        assert!(close(a / b, 2.0, 1e-12));
    }

    #[test]
    fn ohmic_cannot_be_tabulated() {
        let ohmic = CouplingModel::ohmic(0.1, 1.0).unwrap();
        assert!(matches!(ohmic.tabulate(TimeGrid::new(0.1, 10).unwrap(), None), Err(Error::Unsupported(_))));
    }
}
