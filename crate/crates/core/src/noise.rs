//! Thermal bath sampling and colored noise synthesis.
//!
//! The bath is discretized on a midpoint wavenumber grid. Each mode carries
//! Gaussian initial data `(y₀, p₀, z₀, q₀)` whose variances reproduce the
//! symmetrized thermal correlations, and evolves freely. The noise forces at
//! frozen positions are
//!
//! ```text
//! f₁(t) = -Σ Δν ν g_ν z_ν(t)
//! f₂(t) = -Σ Δν ν g_ν [y_ν(t) sin(νd) + z_ν(t) cos(νd)]
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate_cubic, TimeGrid};
use crate::kernels::CouplingModel;
use crate::quadrature::{self, Tolerance};

/// Spectral content of the initial bath state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Symmetrized quantum spectrum, `(ħω/2) coth(ħω / 2k_BT)`.
    Quantum,
    /// High-temperature limit, `k_BT` per mode.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalState {
    pub kt: f64,
    pub hbar: f64,
    pub mode: NoiseMode,
}

impl ThermalState {
    pub fn new(kt: f64, hbar: f64, mode: NoiseMode) -> Result<Self> {
        let s = Self { kt, hbar, mode };
        s.validate()?;
        Ok(s)
    }

    pub fn classical(kt: f64) -> Result<Self> {
        Self::new(kt, 0.0, NoiseMode::Classical)
    }

    pub fn quantum(kt: f64, hbar: f64) -> Result<Self> {
        Self::new(kt, hbar, NoiseMode::Quantum)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kt >= 0.0 && self.kt.is_finite()) {
            return Err(Error::domain(format!("k_B T must be non-negative, got {}", self.kt)));
        }
        if !(self.hbar >= 0.0 && self.hbar.is_finite()) {
            return Err(Error::domain(format!("hbar must be non-negative, got {}", self.hbar)));
        }
        if self.hbar == 0.0 && self.mode == NoiseMode::Quantum {
            return Err(Error::domain("hbar = 0 requires classical mode"));
        }
        Ok(())
    }

    pub fn tag(&self) -> String {
        match self.mode {
            NoiseMode::Classical => format!("classical(kT={})", self.kt),
            NoiseMode::Quantum => format!("quantum(kT={},hbar={})", self.kt, self.hbar),
        }
    }

    /// Spectral amplitude variance: `(ħ/2ω) coth(ħω/2k_BT)` or `k_BT/ω²`.
    pub fn amplitude_variance(&self, omega: f64) -> f64 {
        match self.mode {
            NoiseMode::Classical => self.kt / (omega * omega),
            NoiseMode::Quantum => {
                let zero_point = self.hbar / (2.0 * omega);
                if self.kt == 0.0 {
                    zero_point
                } else {
                    zero_point / (self.hbar * omega / (2.0 * self.kt)).tanh()
                }
            }
        }
    }

    /// `ν² a(u₀ν)`, finite at `ν = 0`.
    pub fn weighted_variance(&self, nu: f64, u0: f64) -> f64 {
        let classical = self.kt / (u0 * u0);
        match self.mode {
            NoiseMode::Classical => classical,
            NoiseMode::Quantum => {
                let x = self.hbar * u0 * nu / (2.0 * self.kt);
                if self.kt == 0.0 {
                    nu * self.hbar / (2.0 * u0)
                } else if x < 1e-8 {
                    classical
                } else {
                    nu * self.hbar / (2.0 * u0) / x.tanh()
                }
            }
        }
    }

    /// Spectral momentum variance, `ω²` times the amplitude variance.
    pub fn momentum_variance(&self, omega: f64) -> f64 {
        omega * omega * self.amplitude_variance(omega)
    }
}

/// Midpoint wavenumber grid `ν_k = (k + 1/2) Δν`, `Δν = ν_max / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    pub nu_max: f64,
    pub n_modes: usize,
}

impl ModeGrid {
    pub fn new(nu_max: f64, n_modes: usize) -> Result<Self> {
        if !(nu_max > 0.0 && nu_max.is_finite()) {
            return Err(Error::domain(format!("nu_max must be positive, got {nu_max}")));
        }
        if n_modes < 2 {
            return Err(Error::domain(format!("need at least 2 bath modes, got {n_modes}")));
        }
        Ok(Self { nu_max, n_modes })
    }

    /// Grid whose frequency spacing makes noise on the time step `h` an FFT:
    /// `u₀ Δν h = 2π / L` with `L` a power of two, `L h ≥ min_period` and
    /// `N ≤ L`. The returned grid reaches at least `nu_max`.
    pub fn fft_compatible(nu_max: f64, h: f64, u0: f64, min_period: f64) -> Result<(Self, usize)> {
        if !(h > 0.0 && u0 > 0.0) {
            return Err(Error::domain("time step and u0 must be positive"));
        }
        let mut len = 16usize;
        while (len as f64) * h < min_period {
            len *= 2;
        }
        loop {
            let dnu = 2.0 * PI / (len as f64 * h * u0);
            let n = (nu_max / dnu).ceil() as usize;
            if n <= len {
                return Ok((Self::new(n.max(2) as f64 * dnu, n.max(2))?, len));
            }
            len *= 2;
        }
    }

    #[inline]
    pub fn dnu(&self) -> f64 {
        self.nu_max / self.n_modes as f64
    }

    #[inline]
    pub fn nu(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dnu()
    }
}

/// One sampled set of bath initial conditions.
#[derive(Debug, Clone)]
pub struct BathRealization {
    pub grid: ModeGrid,
    pub y0: Vec<f64>,
    pub p0: Vec<f64>,
    pub z0: Vec<f64>,
    pub q0: Vec<f64>,
    pub seed: u64,
    pub index: u64,
    pub model_tag: String,
    pub thermal_tag: String,
    /// Fraction of the spectral weight beyond `nu_max` (`None` for a flat spectrum).
    pub truncated_fraction: Option<f64>,
    omega: Arc<[f64]>,
    amp: Arc<[f64]>,
}

/// Noise amplitude `Δν ν g_ν` and frequency `ω_ν` of every mode.
fn mode_table(model: &CouplingModel, grid: &ModeGrid) -> (Vec<f64>, Vec<f64>) {
    let dnu = grid.dnu();
    (0..grid.n_modes)
        .map(|k| {
            let nu = grid.nu(k);
            (model.omega(nu), dnu * nu * model.coupling_sq_unchecked(nu).sqrt())
        })
        .unzip()
}

/// Draw one bath realization. Realization `index` uses stream `index` of the
/// generator seeded by `seed`, so ensembles are reproducible member by member.
///
/// With `strict`, more than 1% of the spectral weight above `nu_max` is an error.
pub fn sample_bath(
    model: &CouplingModel,
    thermal: &ThermalState,
    grid: ModeGrid,
    seed: u64,
    index: u64,
    strict: bool,
) -> Result<BathRealization> {
    model.validate()?;
    thermal.validate()?;
    let truncated_fraction = model.spectral_tail_fraction(grid.nu_max);
    if strict {
        let fraction = truncated_fraction.unwrap_or(1.0);
        if fraction > 0.01 {
            return Err(Error::SpectralTruncation { fraction, nu_max: grid.nu_max });
        }
    }
    let (omega, amp) = mode_table(model, &grid);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = grid.n_modes;
    let dnu = grid.dnu();
    let (mut y0, mut p0, mut z0, mut q0) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &w in &omega {
        let sa = (thermal.amplitude_variance(w) / dnu).sqrt();
        let sp = (thermal.momentum_variance(w) / dnu).sqrt();
        let draw = |rng: &mut ChaCha20Rng| -> f64 { rng.sample(StandardNormal) };
        y0.push(sa * draw(&mut rng));
        p0.push(sp * draw(&mut rng));
        z0.push(sa * draw(&mut rng));
        q0.push(sp * draw(&mut rng));
    }
    Ok(BathRealization {
        grid,
        y0,
        p0,
        z0,
        q0,
        seed,
        index,
        model_tag: model.tag(),
        thermal_tag: thermal.tag(),
        truncated_fraction,
        omega: omega.into(),
        amp: amp.into(),
    })
}

/// A driving force pair `(f₁(t), f₂(t))` for the integrators.
pub trait NoiseSource {
    fn forces(&self, t: f64) -> [f64; 2];
}

/// No driving.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroNoise;

impl NoiseSource for ZeroNoise {
    fn forces(&self, _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

/// Which oscillator a force acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    One,
    Two,
}

impl BathRealization {
    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }

    /// `Δν ν g_ν` per mode.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amp
    }

    /// Free evolution of mode `k`: `(y(t), z(t))`.
    pub fn mode_at(&self, k: usize, t: f64) -> (f64, f64) {
        let w = self.omega[k];
        let (s, c) = (w * t).sin_cos();
        (self.y0[k] * c + self.p0[k] * s / w, self.z0[k] * c + self.q0[k] * s / w)
    }

    pub fn noise_force(&self, which: Which, t: f64, d: f64) -> f64 {
        let f = self.forces_at(t, d);
        match which {
            Which::One => f[0],
            Which::Two => f[1],
        }
    }

    /// `(f₁(t), f₂(t))` by direct summation over modes.
    pub fn forces_at(&self, t: f64, d: f64) -> [f64; 2] {
        let mut f1 = 0.0;
        let mut f2 = 0.0;
        for k in 0..self.grid.n_modes {
            let (y, z) = self.mode_at(k, t);
            let (sd, cd) = (self.grid.nu(k) * d).sin_cos();
            f1 -= self.amp[k] * z;
            f2 -= self.amp[k] * (y * sd + z * cd);
        }
        [f1, f2]
    }

    /// Forces with the phases taken at the instantaneous positions:
    /// `f₁ = -Σ A[y sin(νx₁) + z cos(νx₁)]`, `f₂` the same at `x₂ + d`.
    pub fn forces_at_positions(&self, t: f64, x1: f64, x2: f64, d: f64) -> [f64; 2] {
        let mut f1 = 0.0;
        let mut f2 = 0.0;
        for k in 0..self.grid.n_modes {
            let (y, z) = self.mode_at(k, t);
            let nu = self.grid.nu(k);
            let (s1, c1) = (nu * x1).sin_cos();
            let (s2, c2) = (nu * (x2 + d)).sin_cos();
            f1 -= self.amp[k] * (y * s1 + z * c1);
            f2 -= self.amp[k] * (y * s2 + z * c2);
        }
        [f1, f2]
    }

    /// Complex mode coefficients `c_k` with `f(t) = Re Σ c_k e^{iω_k t}`.
    fn coefficients(&self, d: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        (0..self.grid.n_modes)
            .map(|k| {
                let w = self.omega[k];
                let y = Complex64::new(self.y0[k], -self.p0[k] / w);
                let z = Complex64::new(self.z0[k], -self.q0[k] / w);
                let (sd, cd) = (self.grid.nu(k) * d).sin_cos();
                (-self.amp[k] * z, -self.amp[k] * (y * sd + z * cd))
            })
            .unzip()
    }

    /// `Some(L)` when `u₀ Δν h = 2π / L` for an integer `L ≥ N`.
    pub fn fft_length(&self, h: f64) -> Option<usize> {
        // ω₀ = u₀Δν/2 on the midpoint grid.
        let u0dnu = 2.0 * self.omega.first()?;
        let len = 2.0 * PI / (u0dnu * h);
        let rounded = len.round();
        if rounded >= self.grid.n_modes as f64 && (len - rounded).abs() <= 1e-9 * rounded && rounded < 1e9 {
            Some(rounded as usize)
        } else {
            None
        }
    }

    /// Noise forces on a time grid: an FFT when the grid permits
    /// (see [`ModeGrid::fft_compatible`]), a phase-rotation sum otherwise.
    pub fn noise_series(&self, d: f64, grid: TimeGrid) -> NoiseSeries {
        match self.fft_length(grid.h) {
            Some(len) => self.series_fft(d, grid, len),
            None => self.series_direct(d, grid),
        }
    }

    fn series_fft(&self, d: f64, grid: TimeGrid, len: usize) -> NoiseSeries {
        let (c1, c2) = self.coefficients(d);
        let fft = FftPlanner::new().plan_fft_inverse(len);
        // The midpoint grid puts every frequency half a bin up: e^{iπn/L}.
        let phases: Vec<Complex64> = (0..grid.n).map(|n| Complex64::from_polar(1.0, PI * (n % (2 * len)) as f64 / len as f64)).collect();
        let transform = |c: Vec<Complex64>| {
            let mut buf = c;
            buf.resize(len, Complex64::new(0.0, 0.0));
            fft.process(&mut buf);
            phases.iter().enumerate().map(|(n, p)| (p * buf[n % len]).re).collect::<Vec<f64>>()
        };
        NoiseSeries { grid, f1: transform(c1), f2: transform(c2) }
    }

    fn series_direct(&self, d: f64, grid: TimeGrid) -> NoiseSeries {
        let (c1, c2) = self.coefficients(d);
        let mut f1 = vec![0.0; grid.n];
        let mut f2 = vec![0.0; grid.n];
        for k in 0..self.grid.n_modes {
            let w = self.omega[k];
            let step = Complex64::from_polar(1.0, w * grid.h);
            let mut rot = Complex64::new(1.0, 0.0);
            for n in 0..grid.n {
                // Re-anchor periodically so rounding in the recurrence stays bounded.
                if n % 256 == 0 {
                    rot = Complex64::from_polar(1.0, w * grid.t(n));
                }
                f1[n] += (c1[k] * rot).re;
                f2[n] += (c2[k] * rot).re;
                rot *= step;
            }
        }
        NoiseSeries { grid, f1, f2 }
    }
}

/// Realization evaluated on demand at arbitrary times.
#[derive(Debug, Clone)]
pub struct RealizationNoise<'a> {
    pub realization: &'a BathRealization,
    pub d: f64,
}

impl NoiseSource for RealizationNoise<'_> {
    fn forces(&self, t: f64) -> [f64; 2] {
        self.realization.forces_at(t, self.d)
    }
}

/// Sampled noise forces on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSeries {
    pub grid: TimeGrid,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl NoiseSeries {
    pub fn new(grid: TimeGrid, f1: Vec<f64>, f2: Vec<f64>) -> Result<Self> {
        if f1.len() != grid.n || f2.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "noise series lengths {} and {} do not match grid of {} points",
                f1.len(),
                f2.len(),
                grid.n
            )));
        }
        Ok(Self { grid, f1, f2 })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, f1: vec![0.0; grid.n], f2: vec![0.0; grid.n] }
    }

    /// Same series on a grid that must coincide with `grid`, or an error.
    pub fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.grid.h != grid.h || self.grid.n < grid.n {
            return Err(Error::GridMismatch(format!(
                "noise grid (h={}, n={}) does not cover solver grid (h={}, n={})",
                self.grid.h, self.grid.n, grid.h, grid.n
            )));
        }
        Ok(())
    }
}

impl NoiseSource for NoiseSeries {
    fn forces(&self, t: f64) -> [f64; 2] {
        let h = self.grid.h;
        let x = t / h;
        let i = x.round();
        if (x - i).abs() < 1e-9 && (i as usize) < self.grid.n {
            let i = i as usize;
            return [self.f1[i], self.f2[i]];
        }
        [interpolate_cubic(&self.f1, h, t), interpolate_cubic(&self.f2, h, t)]
    }
}

/// Normal-mode noises `F_R = (f₁ + f₂)/2`, `F_Z = f₂ - f₁`.
pub fn mode_noises(f1: &[f64], f2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if f1.len() != f2.len() {
        return Err(Error::GridMismatch(format!("f1 has {} samples, f2 has {}", f1.len(), f2.len())));
    }
    Ok(f1.iter().zip(f2).map(|(a, b)| (0.5 * (a + b), b - a)).unzip())
}

/// Which covariance `⟨f_i(t) f_j(t')⟩_S` a target refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash, PartialOrd, Ord)]
pub enum Pair {
    #[serde(rename = "11")]
    P11,
    #[serde(rename = "22")]
    P22,
    #[serde(rename = "12")]
    P12,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P11, Pair::P22, Pair::P12];

    pub fn label(&self) -> &'static str {
        match self {
            Pair::P11 => "11",
            Pair::P22 => "22",
            Pair::P12 => "12",
        }
    }
}

/// Expected symmetrized covariance `⟨f_i(t+Δt) f_j(t)⟩_S` at frozen positions:
///
/// `∫₀^Λ dν ν² g_ν² a(ω_ν) cos(ω_ν Δt) · {1, cos(νd)}`
///
/// where `a` is the amplitude variance of [`ThermalState`]. Classical and
/// untruncated (`nu_cut = None`) this is `k_BT χ` in closed form.
pub fn fdr_target(model: &CouplingModel, thermal: &ThermalState, dt: f64, pair: Pair, d: f64, nu_cut: Option<f64>) -> Result<f64> {
    if !(dt >= 0.0) {
        return Err(Error::domain(format!("time lag must be non-negative, got {dt}")));
    }
    let arg = match pair {
        Pair::P11 | Pair::P22 => 0.0,
        Pair::P12 => d,
    };
    if thermal.mode == NoiseMode::Classical && nu_cut.is_none() {
        let chi = match pair {
            Pair::P12 => model.kernel_chi_d(dt, d)?,
            _ => model.kernel_chi(dt)?,
        };
        return match chi.smooth() {
            Some(v) => Ok(thermal.kt * v),
            None => Err(Error::Unsupported("the Ohmic noise covariance is a delta distribution; give a wavenumber cutoff".into())),
        };
    }
    if thermal.kt == 0.0 && thermal.mode == NoiseMode::Classical {
        return Ok(0.0);
    }
    let density = |nu: f64| model.coupling_sq_unchecked(nu) * thermal.weighted_variance(nu, model.u0);
    let tol = Tolerance::new(1e-11, 1e-9);
    let (w_plus, w_minus) = (model.u0 * dt + arg, model.u0 * dt - arg);
    match nu_cut {
        Some(cut) => {
            // Integrate period by period so the adaptive rule never straddles many oscillations.
            let freq = w_plus.abs().max(w_minus.abs());
            let pieces = ((cut * freq / PI).ceil() as usize).clamp(1, 100_000);
            let width = cut / pieces as f64;
            let mut total = 0.0;
            for p in 0..pieces {
                let lo = p as f64 * width;
                let r = quadrature::integrate(|nu| density(nu) * 0.5 * ((w_plus * nu).cos() + (w_minus * nu).cos()), lo, lo + width, tol)?;
                total += r.value;
            }
            Ok(total)
        }
        None => {
            let a = quadrature::fourier_cos(density, w_plus, tol).map_err(divergence_note)?;
            let b = quadrature::fourier_cos(density, w_minus, tol).map_err(divergence_note)?;
            Ok(0.5 * (a.value + b.value))
        }
    }
}

fn divergence_note(e: Error) -> Error {
    match e {
        Error::Quadrature { what, estimate } => {
            Error::Quadrature { what: format!("{what}; the zero-point spectrum may need a wavenumber cutoff"), estimate }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drude() -> CouplingModel {
        CouplingModel::drude(0.1, 10.0, 1.0).unwrap()
    }

    #[test]
    fn variance_examples() {
        let c = ThermalState::classical(1.0).unwrap();
        assert!((c.amplitude_variance(2.0) / 0.1 - 2.5).abs() < 1e-15);
        let q = ThermalState::quantum(0.0, 1.0).unwrap();
        assert_eq!(q.amplitude_variance(4.0), 1.0 / 8.0);
        assert!(ThermalState::new(1.0, 0.0, NoiseMode::Quantum).is_err());
    }

    #[test]
    fn zero_temperature_classical_is_silent() {
        let r = sample_bath(&drude(), &ThermalState::classical(0.0).unwrap(), ModeGrid::new(50.0, 64).unwrap(), 7, 0, false).unwrap();
        assert!(r.y0.iter().chain(&r.p0).chain(&r.z0).chain(&r.q0).all(|&v| v == 0.0));
        assert_eq!(r.forces_at(1.3, 2.0), [0.0, 0.0]);
    }

    #[test]
    fn realizations_are_reproducible_and_distinct() {
        let th = ThermalState::classical(1.0).unwrap();
        let g = ModeGrid::new(50.0, 64).unwrap();
        let a = sample_bath(&drude(), &th, g, 11, 3, false).unwrap();
        let b = sample_bath(&drude(), &th, g, 11, 3, false).unwrap();
        let c = sample_bath(&drude(), &th, g, 11, 4, false).unwrap();
        assert_eq!(a.z0, b.z0);
        assert_ne!(a.z0, c.z0);
    }

    #[test]
    fn equal_phases_at_zero_separation() {
        let th = ThermalState::classical(1.0).unwrap();
        let r = sample_bath(&drude(), &th, ModeGrid::new(50.0, 64).unwrap(), 1, 0, false).unwrap();
        for &t in &[0.0, 0.37, 5.0] {
            let f = r.forces_at(t, 0.0);
            assert_eq!(f[0], f[1]);
        }
        let s = r.noise_series(0.0, TimeGrid::new(0.05, 50).unwrap());
        let (_, fz) = mode_noises(&s.f1, &s.f2).unwrap();
        assert!(fz.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn strict_truncation_rejected() {
        let th = ThermalState::classical(1.0).unwrap();
        let err = sample_bath(&drude(), &th, ModeGrid::new(200.0, 256).unwrap(), 1, 0, true);
        assert!(matches!(err, Err(Error::SpectralTruncation { .. })));
        assert!(sample_bath(&drude(), &th, ModeGrid::new(20_000.0, 256).unwrap(), 1, 0, true).is_ok());
    }

    #[test]
    fn fft_and_direct_series_agree() {
        let th = ThermalState::classical(1.0).unwrap();
        let model = drude();
        let h = 0.01;
        let (grid, len) = ModeGrid::fft_compatible(60.0, h, model.u0, 20.0).unwrap();
        let r = sample_bath(&model, &th, grid, 5, 0, false).unwrap();
        assert_eq!(r.fft_length(h), Some(len));
        let tg = TimeGrid::new(h, 3 * len + 7).unwrap();
        let fast = r.noise_series(2.0, tg);
        for &n in &[0usize, 1, 17, len - 1, len, len + 3, 2 * len + 5, 3 * len + 6] {
            let f = r.forces_at(tg.t(n), 2.0);
            assert!((fast.f1[n] - f[0]).abs() < 1e-9, "n={n}");
            assert!((fast.f2[n] - f[1]).abs() < 1e-9, "n={n}");
        }
        let slow = r.series_direct(2.0, TimeGrid::new(h, 600).unwrap());
        for n in 0..600 {
            assert!((slow.f1[n] - fast.f1[n]).abs() < 1e-9);
        }
    }

    #[test]
    fn fdr_target_classical_and_cross() {
        let th = ThermalState::classical(2.0).unwrap();
        let m = drude();
        let t11 = fdr_target(&m, &th, 0.1, Pair::P11, 2.0, None).unwrap();
        assert_eq!(t11, 2.0 * m.kernel_chi(0.1).unwrap().smooth().unwrap());
        let t12 = fdr_target(&m, &th, 0.1, Pair::P12, 0.0, None).unwrap();
        assert!((t12 - t11).abs() < 1e-15);
    }

    #[test]
    fn quantum_high_temperature_matches_classical() {
        let m = drude();
        let kt = 1.0;
        let hbar = kt / (1e3 * m.u0 * 10.0);
        let q = ThermalState::quantum(kt, hbar).unwrap();
        let c = ThermalState::classical(kt).unwrap();
        for &dt in &[0.05, 0.2, 0.5] {
            let a = fdr_target(&m, &q, dt, Pair::P11, 2.0, None).unwrap();
            let b = fdr_target(&m, &c, dt, Pair::P11, 2.0, None).unwrap();
            assert!(((a - b) / b).abs() < 1e-2, "dt={dt}: {a} vs {b}");
        }
    }

    #[test]
    fn truncated_classical_target_converges() {
        let m = drude();
        let c = ThermalState::classical(1.0).unwrap();
        let full = fdr_target(&m, &c, 0.3, Pair::P12, 1.0, None).unwrap();
        let cut = fdr_target(&m, &c, 0.3, Pair::P12, 1.0, Some(1e4)).unwrap();
        assert!((full - cut).abs() < 1e-4, "{full} vs {cut}");
    }
}
