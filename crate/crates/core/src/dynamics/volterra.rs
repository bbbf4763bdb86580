//! Volterra integro-differential solvers.
//!
//! All three solvers use the same time discretization: the trapezoidal rule
//! for `ẋ = v`, `v̇ = a`, and the trapezoidal rule for the memory integral
//! `∫₀^t K(t-t') v(t') dt'`. The newest memory sample is implicit, so each
//! step solves a 2×2 linear system. Delta kernels enter as impulses:
//! a delta at zero delay contributes `w/2 · v(t)` (border convention), a
//! delayed one `w · v(t - δ)` read by cubic interpolation.

use nalgebra::{Matrix2, Vector2};

use super::{check_series_len, MassConvention, Method, Provenance, SolverConfig, Trajectory, FULL_HISTORY_STEPS};
use crate::error::{Error, Result};
use crate::grid::{interpolate_cubic, TimeGrid};
use crate::interaction::{drift_terms, potential_gradient, OscillatorPair};
use crate::kernels::{Coupling, CouplingModel, DiracDelta, KernelValue};
use crate::noise::{mode_noises, BathRealization, NoiseSeries};

/// One entry of the memory matrix: kernel samples on the solver grid and/or deltas.
#[derive(Debug, Clone, Default)]
struct Channel {
    samples: Option<Vec<f64>>,
    deltas: Vec<DiracDelta>,
}

impl Channel {
    fn smooth0(&self) -> f64 {
        self.samples.as_ref().map_or(0.0, |s| s[0])
    }

    /// Weight multiplying `v(t)` itself: zero-delay deltas at half weight.
    fn border(&self) -> f64 {
        self.deltas.iter().filter(|d| d.delay == 0.0).map(|d| 0.5 * d.weight).sum()
    }
}

/// Sample a kernel family on `len` grid points; deltas are kept symbolic.
fn tabulate(grid: &TimeGrid, len: usize, eval: impl Fn(f64) -> Result<KernelValue>) -> Result<Channel> {
    match eval(0.0)? {
        KernelValue::Deltas(deltas) => Ok(Channel { samples: None, deltas }),
        KernelValue::Smooth(_) => {
            let mut samples = Vec::with_capacity(len);
            for k in 0..len {
                samples.push(eval(grid.t(k))?.smooth().expect("smooth family"));
            }
            Ok(Channel { samples: Some(samples), deltas: Vec::new() })
        }
    }
}

fn combine(a: &Channel, b: &Channel, sign: f64) -> Channel {
    let samples = match (&a.samples, &b.samples) {
        (Some(x), Some(y)) => Some(x.iter().zip(y).map(|(p, q)| p + sign * q).collect()),
        (Some(x), None) => Some(x.clone()),
        (None, Some(y)) => Some(y.iter().map(|q| sign * q).collect()),
        (None, None) => None,
    };
    let (da, db) = (KernelValue::Deltas(a.deltas.clone()), KernelValue::Deltas(b.deltas.clone()));
    let combined = if sign > 0.0 { da.plus(&db) } else { da.minus(&db) };
    let samples = samples.filter(|s: &Vec<f64>| s.iter().any(|&v| v != 0.0));
    Channel { samples, deltas: combined.deltas().to_vec() }
}

/// Plain dot product with four independent accumulators.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for j in 0..4 {
            acc[j] += x[j] * y[j];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// `Σ_{p=1}^{count} k[p] v[n1-p]` with the oldest sample at half weight.
/// `rev` holds `k[window], ..., k[1]`.
#[inline]
fn history_dot(rev: &[f64], v: &[f64], n1: usize, count: usize) -> f64 {
    let ks = &rev[rev.len() - count..];
    let vs = &v[n1 - count..n1];
    dot(ks, vs) - 0.5 * ks[0] * vs[0]
}

struct LinearSystem {
    omega0: f64,
    h: f64,
    /// `channels[i][j]`: kernel acting on `v_j` in equation `i`.
    channels: [[Channel; 2]; 2],
    /// Number of past samples the memory sum reaches back.
    window: usize,
}

impl LinearSystem {
    fn implicit_matrix(&self) -> Matrix2<f64> {
        let mut c = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let ch = &self.channels[i][j];
                c[(i, j)] = 0.5 * self.h * ch.smooth0() + ch.border();
            }
        }
        c
    }

    /// Kernel samples `k[window], ..., k[1]` of every channel.
    fn reversed(&self) -> [[Option<Vec<f64>>; 2]; 2] {
        let w = self.window;
        let rev = |ch: &Channel| ch.samples.as_ref().map(|k| k[1..=w].iter().rev().copied().collect());
        let [[a, b], [c, d]] = &self.channels;
        [[rev(a), rev(b)], [rev(c), rev(d)]]
    }

    /// Memory at step `n1` from samples `0..n1` (excluding the implicit `v[n1]`).
    fn known_memory(&self, rev: &[[Option<Vec<f64>>; 2]; 2], v: &[Vec<f64>; 2], n1: usize) -> Vector2<f64> {
        let h = self.h;
        let t = n1 as f64 * h;
        let mut mem = Vector2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let ch = &self.channels[i][j];
                if let Some(k) = &rev[i][j] {
                    let count = n1.min(self.window);
                    if count > 0 {
                        mem[i] += h * history_dot(k, &v[j], n1, count);
                    }
                }
                for d in ch.deltas.iter().filter(|d| d.delay > 0.0) {
                    mem[i] += d.weight * delayed(&v[j][..n1], h, t - d.delay);
                }
            }
        }
        mem
    }

    fn run(&self, forcing: [&[f64]; 2], x0: [f64; 2], v0: [f64; 2], n: usize) -> Result<[[Vec<f64>; 2]; 2]> {
        for ch in self.channels.iter().flatten() {
            if ch.deltas.iter().any(|d| d.delay > 0.0 && d.delay < self.h) {
                return Err(Error::SolverConfig(format!("delta delay shorter than the time step h = {}; refine h", self.h)));
            }
        }
        let h = self.h;
        let w2 = self.omega0 * self.omega0;
        let c = self.implicit_matrix();
        let rev = self.reversed();
        let lhs = Matrix2::identity() * (1.0 + 0.25 * h * h * w2) + 0.5 * h * c;
        let lhs_inv = lhs.try_inverse().ok_or_else(|| Error::Instability("singular implicit step matrix".into()))?;
        let mut x = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut v = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for i in 0..2 {
            x[i].push(x0[i]);
            v[i].push(v0[i]);
        }
        let v0v = Vector2::new(v0[0], v0[1]);
        let mut a = Vector2::new(forcing[0][0], forcing[1][0]) - Vector2::new(x0[0], x0[1]) * w2 - c_border(&self.channels) * v0v;
        for n1 in 1..n {
            let xn = Vector2::new(x[0][n1 - 1], x[1][n1 - 1]);
            let vn = Vector2::new(v[0][n1 - 1], v[1][n1 - 1]);
            let mem = self.known_memory(&rev, &v, n1);
            let f = Vector2::new(forcing[0][n1], forcing[1][n1]);
            let rhs = vn + 0.5 * h * (a + f - (xn + 0.5 * h * vn) * w2 - mem);
            let vnew = lhs_inv * rhs;
            let xnew = xn + 0.5 * h * (vn + vnew);
            a = f - xnew * w2 - mem - c * vnew;
            for i in 0..2 {
                x[i].push(xnew[i]);
                v[i].push(vnew[i]);
            }
            if !(xnew[0].is_finite() && xnew[1].is_finite()) {
                return Err(Error::Instability(format!("non-finite state at t = {}", n1 as f64 * h)));
            }
        }
        Ok([x, v])
    }
}

/// Zero-delay delta weights at `t = 0`, where the border convention still applies.
fn c_border(channels: &[[Channel; 2]; 2]) -> Matrix2<f64> {
    let mut c = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            c[(i, j)] = channels[i][j].border();
        }
    }
    c
}

/// `v(s)` from samples on `[0, t_n]`: zero before the start, half at exactly
/// the start (a delta on the lower border), cubic interpolation inside.
fn delayed(v: &[f64], h: f64, s: f64) -> f64 {
    let tol = 1e-9 * h;
    if s < -tol || v.is_empty() {
        0.0
    } else if s.abs() <= tol {
        0.5 * v[0]
    } else {
        let x = s / h;
        let k = x.round();
        if (x - k).abs() < 1e-9 && (k as usize) < v.len() {
            v[k as usize]
        } else {
            interpolate_cubic(v, h, s)
        }
    }
}

fn window_steps(cfg: &SolverConfig, n: usize) -> Result<usize> {
    match cfg.memory_window {
        Some(w) => Ok(((w / cfg.h).ceil() as usize).clamp(1, n)),
        None => Ok(n),
    }
}

fn noise_slices<'a>(noise: &'a NoiseSeries, grid: &TimeGrid) -> Result<[&'a [f64]; 2]> {
    noise.check_grid(grid)?;
    check_series_len(grid, "noise f1", noise.f1.len())?;
    Ok([&noise.f1[..grid.n], &noise.f2[..grid.n]])
}

fn model_channels(model: &CouplingModel, grid: &TimeGrid, len: usize, d: f64) -> Result<(Channel, Channel)> {
    let self_ch = tabulate(grid, len, |t| model.kernel_chi(t))?;
    let cross_ch = tabulate(grid, len, |t| model.kernel_chi_d(t, d))?;
    Ok((self_ch, cross_ch))
}

/// Localized linear equations
/// `ẍ_i + ω₀²x_i + ∫₀^t [χ(t-t') ẋ_i + χ(t-t';d) ẋ_j] dt' = f_i`.
pub fn integrate_localized(model: &CouplingModel, pair: &OscillatorPair, noise: &NoiseSeries, cfg: &SolverConfig) -> Result<Trajectory> {
    pair.validate()?;
    let grid = cfg.grid()?;
    let forcing = noise_slices(noise, &grid)?;
    let window = window_steps(cfg, grid.n)?;
    let (chi, chi_d) = model_channels(model, &grid, window + 1, pair.d)?;
    let sys = LinearSystem { omega0: pair.omega0, h: grid.h, channels: [[chi.clone(), chi_d.clone()], [chi_d, chi]], window };
    let ic = cfg.initial;
    let [x, v] = sys.run(forcing, [ic.x1, ic.x2], [ic.v1, ic.v2], grid.n)?;
    let [x1, x2] = x;
    let [v1, v2] = v;
    Ok(Trajectory {
        grid,
        x1,
        x2,
        v1,
        v2,
        r: None,
        z: None,
        f1: forcing[0].to_vec(),
        f2: forcing[1].to_vec(),
        provenance: Provenance { solver: Method::Localized.tag().into(), ..Default::default() },
    })
}

/// Normal modes `R = (x₁+x₂)/2`, `Z = x₂ - x₁` with kernels `χ ± χ(·;d)`
/// and noises `F_R = (f₁+f₂)/2`, `F_Z = f₂ - f₁`.
pub fn integrate_modes(model: &CouplingModel, pair: &OscillatorPair, noise: &NoiseSeries, cfg: &SolverConfig) -> Result<Trajectory> {
    pair.validate()?;
    let grid = cfg.grid()?;
    let forcing = noise_slices(noise, &grid)?;
    let (fr, fz) = mode_noises(forcing[0], forcing[1])?;
    let window = window_steps(cfg, grid.n)?;
    let (chi, chi_d) = model_channels(model, &grid, window + 1, pair.d)?;
    let sys = LinearSystem {
        omega0: pair.omega0,
        h: grid.h,
        channels: [[combine(&chi, &chi_d, 1.0), Channel::default()], [Channel::default(), combine(&chi, &chi_d, -1.0)]],
        window,
    };
    let ic = cfg.initial;
    let [x, v] = sys.run([&fr, &fz], [0.5 * (ic.x1 + ic.x2), ic.x2 - ic.x1], [0.5 * (ic.v1 + ic.v2), ic.v2 - ic.v1], grid.n)?;
    let [r, z] = x;
    let [vr, vz] = v;
    let x1 = r.iter().zip(&z).map(|(r, z)| r - 0.5 * z).collect();
    let x2 = r.iter().zip(&z).map(|(r, z)| r + 0.5 * z).collect();
    let v1 = vr.iter().zip(&vz).map(|(r, z)| r - 0.5 * z).collect();
    let v2 = vr.iter().zip(&vz).map(|(r, z)| r + 0.5 * z).collect();
    Ok(Trajectory {
        grid,
        x1,
        x2,
        v1,
        v2,
        r: Some(r),
        z: Some(z),
        f1: forcing[0].to_vec(),
        f2: forcing[1].to_vec(),
        provenance: Provenance { solver: "modes".into(), ..Default::default() },
    })
}

/// Reference integrator for one oscillator,
/// `ẍ + ω₀²x + ∫₀^t K(t-t') ẋ(t') dt' = f`, with `K` sampled on the grid.
pub fn single_gle(kernel: &[f64], omega0: f64, forcing: &[f64], x0: f64, v0: f64, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = forcing.len();
    if kernel.len() < n {
        return Err(Error::GridMismatch(format!("kernel has {} samples, need {n}", kernel.len())));
    }
    let w2 = omega0 * omega0;
    let mut x = vec![x0; 1];
    let mut v = vec![v0; 1];
    let mut a = forcing[0] - w2 * x0;
    let denom = 1.0 + 0.25 * h * h * w2 + 0.25 * h * h * kernel[0];
    for n1 in 1..n {
        let mut mem = 0.0;
        for m in 0..n1 {
            let w = if m == 0 { 0.5 } else { 1.0 };
            mem += w * kernel[n1 - m] * v[m];
        }
        mem *= h;
        let (xn, vn) = (x[n1 - 1], v[n1 - 1]);
        let vnew = (vn + 0.5 * h * (a + forcing[n1] - w2 * (xn + 0.5 * h * vn) - mem)) / denom;
        let xnew = xn + 0.5 * h * (vn + vnew);
        a = forcing[n1] - w2 * xnew - mem - 0.5 * h * kernel[0] * vnew;
        x.push(xnew);
        v.push(vnew);
    }
    Ok((x, v))
}

/// Full equations with position-dependent kernels, the induced force and the
/// drift part of the noise forces:
///
/// ```text
/// ẍ₁ + ω₀²x₁ + ∫₀^t [χ(t-t'; x₁(t)-x₁(t')) ẋ₁ + χ_c(t-t'; x₁(t)-x₂(t')) ẋ₂] dt' + μ ∂V/∂x₁ = μ F₁
/// ẍ₂ + ω₀²x₂ + ∫₀^t [χ(t-t'; x₂(t)-x₂(t')) ẋ₂ + χ_c(t-t'; x₁(t')-x₂(t)) ẋ₁] dt' + μ ∂V/∂x₂ = μ F₂
/// ```
///
/// `χ_c` is the cross kernel (spatial argument shifted by `-d`), `μ = 1` or
/// `1/M`. Each step predicts the new positions, then runs `corrector_sweeps`
/// implicit trapezoidal sweeps with the kernels re-evaluated at the latest iterate.
pub fn integrate_full(
    model: &CouplingModel,
    pair: &OscillatorPair,
    realization: Option<&BathRealization>,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    pair.validate()?;
    if matches!(model.coupling, Coupling::Ohmic { .. }) {
        return Err(Error::Unsupported(
            "the full equations need smooth position-dependent kernels; Ohmic kernels are distributions".into(),
        ));
    }
    let silent = match model.coupling {
        Coupling::ExponentialCutoff { amplitude, .. } => amplitude == 0.0,
        _ => false,
    };
    let grid = cfg.grid()?;
    if !silent && grid.n > FULL_HISTORY_STEPS && cfg.memory_window.is_none() {
        return Err(Error::SolverConfig(format!("{} steps with the full position-dependent history; set a memory window", grid.n)));
    }
    let h = grid.h;
    let d = pair.d;
    let w2 = pair.omega0 * pair.omega0;
    let mu = match cfg.mass_convention {
        MassConvention::UnitMass => 1.0,
        MassConvention::ExplicitM => 1.0 / pair.mass,
    };
    let window = window_steps(cfg, grid.n)?;

    let frozen = match (realization, cfg.dynamic_noise_phase) {
        (Some(r), false) => Some(r.noise_series(d, grid)),
        _ => None,
    };
    let noise_at = |n: usize, x1: f64, x2: f64| -> [f64; 2] {
        match (&frozen, realization) {
            (Some(s), _) => [s.f1[n], s.f2[n]],
            (None, Some(r)) => r.forces_at_positions(grid.t(n), x1, x2, d),
            (None, None) => [0.0, 0.0],
        }
    };

    let ic = cfg.initial;
    let (x10, x20) = (ic.x1, ic.x2);
    let kernel =
        |dt: f64, dx: f64, cross: bool| -> f64 { model.kernel_chi_position(dt, dx, cross, d).ok().and_then(|k| k.smooth()).unwrap_or(0.0) };
    // Memory from samples 0..n1 (trapezoid, oldest at half weight) at positions `xa`.
    let memory = |x1: &[f64], x2: &[f64], v1: &[f64], v2: &[f64], n1: usize, xa: [f64; 2]| -> [f64; 2] {
        if silent {
            return [0.0, 0.0];
        }
        let count = n1.min(window);
        let start = n1 - count;
        let mut m = [0.0, 0.0];
        for j in start..n1 {
            let w = if j == start { 0.5 } else { 1.0 };
            let dt = (n1 - j) as f64 * h;
            m[0] += w * (kernel(dt, xa[0] - x1[j], false) * v1[j] + kernel(dt, xa[0] - x2[j], true) * v2[j]);
            m[1] += w * (kernel(dt, xa[1] - x2[j], false) * v2[j] + kernel(dt, x1[j] - xa[1], true) * v1[j]);
        }
        [h * m[0], h * m[1]]
    };
    // Implicit coefficient matrix of v(t) at positions `xa`.
    let implicit = |xa: [f64; 2]| -> Matrix2<f64> {
        if silent {
            return Matrix2::zeros();
        }
        let s = kernel(0.0, 0.0, false);
        Matrix2::new(s, kernel(0.0, xa[0] - xa[1], true), kernel(0.0, xa[0] - xa[1], true), s) * (0.5 * h)
    };
    let extra = |xa: [f64; 2]| -> Result<Vector2<f64>> {
        let drift = drift_terms(model, xa[0], xa[1], x10, x20, d)?;
        let grad = potential_gradient(model, xa[0], xa[1], d)?;
        Ok(Vector2::new(drift[0] - grad[0], drift[1] - grad[1]) * mu)
    };

    let n = grid.n;
    let (mut x1, mut x2, mut v1, mut v2) = (vec![x10], vec![x20], vec![ic.v1], vec![ic.v2]);
    let (mut f1s, mut f2s) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let f0 = noise_at(0, x10, x20);
    f1s.push(f0[0]);
    f2s.push(f0[1]);
    let mut a = Vector2::new(f0[0], f0[1]) * mu + extra([x10, x20])? - Vector2::new(x10, x20) * w2;
    let scale = 1.0 + x10.abs().max(x20.abs()).max(ic.v1.abs()).max(ic.v2.abs());
    let bound = 1e8 * scale;
    for n1 in 1..n {
        let xn = Vector2::new(x1[n1 - 1], x2[n1 - 1]);
        let vn = Vector2::new(v1[n1 - 1], v2[n1 - 1]);
        let mut xa = xn + vn * h + a * (0.5 * h * h);
        let mut vnew = vn;
        let mut fnow = [0.0, 0.0];
        let mut mem = [0.0, 0.0];
        let mut c = Matrix2::zeros();
        let mut ext = Vector2::zeros();
        for _ in 0..cfg.corrector_sweeps.max(1) {
            let xs = [xa[0], xa[1]];
            mem = memory(&x1, &x2, &v1, &v2, n1, xs);
            c = implicit(xs);
            ext = extra(xs)?;
            fnow = noise_at(n1, xs[0], xs[1]);
            let f = Vector2::new(fnow[0], fnow[1]) * mu + ext;
            let lhs = Matrix2::identity() * (1.0 + 0.25 * h * h * w2) + 0.5 * h * c;
            let rhs = vn + 0.5 * h * (a + f - (xn + 0.5 * h * vn) * w2 - Vector2::new(mem[0], mem[1]));
            vnew = lhs.try_inverse().ok_or_else(|| Error::Instability("singular implicit step matrix".into()))? * rhs;
            xa = xn + 0.5 * h * (vn + vnew);
        }
        let f = Vector2::new(fnow[0], fnow[1]) * mu + ext;
        a = f - xa * w2 - Vector2::new(mem[0], mem[1]) - c * vnew;
        if !(xa.iter().chain(vnew.iter()).all(|v| v.is_finite() && v.abs() < bound)) {
            return Err(Error::Instability(format!("state left the bound {bound:.1e} at t = {:.6}; reduce h", grid.t(n1))));
        }
        x1.push(xa[0]);
        x2.push(xa[1]);
        v1.push(vnew[0]);
        v2.push(vnew[1]);
        f1s.push(fnow[0]);
        f2s.push(fnow[1]);
    }
    Ok(Trajectory {
        grid,
        x1,
        x2,
        v1,
        v2,
        r: None,
        z: None,
        f1: f1s,
        f2: f2s,
        provenance: Provenance {
            solver: Method::VolterraFull.tag().into(),
            seed: realization.map(|r| r.seed),
            realization: realization.map(|r| r.index),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::InitialConditions;
    use crate::kernels::CouplingModel;

    fn smooth_noise(grid: TimeGrid, d: f64) -> NoiseSeries {
        let f1 = grid.times().map(|t| 0.3 * (0.7 * t).sin() + 0.1 * (1.9 * t + 0.4).cos()).collect();
        let f2 = grid.times().map(|t| 0.2 * (1.3 * t + d).cos() - 0.15 * (0.4 * t).sin()).collect();
        NoiseSeries::new(grid, f1, f2).unwrap()
    }

    #[test]
    fn localized_and_modes_agree() {
        let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
        let cfg = SolverConfig::new(0.01, 20.0, Method::Localized).with_initial(InitialConditions { x1: 0.3, v1: -0.1, x2: 0.0, v2: 0.2 });
        let noise = smooth_noise(cfg.grid().unwrap(), 2.0);
        let a = integrate_localized(&model, &pair, &noise, &cfg).unwrap();
        let b = integrate_modes(&model, &pair, &noise, &cfg).unwrap();
        assert!(a.sup_distance(&b) < 1e-12, "{}", a.sup_distance(&b));
    }

    #[test]
    fn symmetric_start_excites_only_r() {
        let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
        let cfg = SolverConfig::new(0.01, 20.0, Method::Localized).with_initial(InitialConditions { x1: 0.5, v1: 0.0, x2: 0.5, v2: 0.0 });
        let noise = NoiseSeries::zeros(cfg.grid().unwrap());
        let tr = integrate_localized(&model, &pair, &noise, &cfg).unwrap();
        assert!(tr.x1.iter().zip(&tr.x2).all(|(a, b)| a == b));
    }

    #[test]
    fn ohmic_delta_channels_run() {
        let model = CouplingModel::ohmic(0.1, 1.0).unwrap();
        let pair = OscillatorPair::new(1.0, 1.0, 1.0).unwrap();
        let cfg = SolverConfig::new(0.01, 5.0, Method::Localized).with_initial(InitialConditions { x1: 0.0, v1: 1.0, x2: 0.0, v2: 0.0 });
        let noise = NoiseSeries::zeros(cfg.grid().unwrap());
        let tr = integrate_localized(&model, &pair, &noise, &cfg).unwrap();
        // Nothing reaches oscillator 2 before τ₀ = 1.
        assert!(tr.x2[..100].iter().all(|&v| v == 0.0));
        assert!(tr.x2[150].abs() > 0.0);
    }
}
