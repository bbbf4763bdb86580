//! Laplace-domain kernels and the mode response functions
//! `η_± = L⁻¹[1/P_±]`, `ξ_± = L⁻¹[(s + K_±)/P_±]` with
//! `P_± = s² + s K_±(s) + ω₀²`, `K_± = χ̃ ± χ̃(·;d)`.

use std::cell::RefCell;
use std::collections::HashMap;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::volterra::single_gle;
use super::{check_series_len, Method, Provenance, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::interaction::OscillatorPair;
use crate::kernels::{Coupling, CouplingModel};
use crate::laplace::{invert_cascade, invert_line, Checked, Inverter};
use crate::noise::{mode_noises, NoiseSeries};
use crate::quadrature::{fourier_cos, fourier_sin, Tolerance};

/// Discrepancy above which an inverted value is flagged.
pub const FLAG_AT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSign {
    /// `R` mode, kernel `χ + χ(·;d)`.
    Plus,
    /// `Z` mode, kernel `χ - χ(·;d)`.
    Minus,
}

impl ModeSign {
    fn factor(self) -> f64 {
        match self {
            ModeSign::Plus => 1.0,
            ModeSign::Minus => -1.0,
        }
    }
}

/// `(χ̃(s), χ̃(s;d))` for `Re s > 0`.
///
/// Ohmic kernels follow the border convention: the self delta counts one half.
pub fn laplace_kernel(model: &CouplingModel, s: Complex64, d: f64) -> Result<(Complex64, Complex64)> {
    if !(s.re > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("Laplace variable needs Re s > 0, got {s}")));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("separation must be non-negative, got {d}")));
    }
    kernel_continued(model, s, d)
}

/// The closed forms continued into `Re s ≤ 0`, as the Talbot contour needs;
/// the quadrature family stays restricted to `Re s > 0`.
fn kernel_continued(model: &CouplingModel, s: Complex64, d: f64) -> Result<(Complex64, Complex64)> {
    let tau = d / model.u0;
    match model.coupling {
        Coupling::Ohmic { gamma } => {
            let g2 = Complex64::new(0.5 * gamma, 0.0);
            Ok((g2, g2 * (-s * tau).exp()))
        }
        Coupling::Drude { gamma, omega_d } => {
            let wd = Complex64::new(omega_d, 0.0);
            let pref = gamma * omega_d;
            let chi = pref / (s + wd);
            let ed = (-omega_d * tau).exp();
            let es = (-s * tau).exp();
            // (e^{-sτ} - e^{-ω_Dτ})/(ω_D - s) = τ e^{-ω_Dτ} (1 - e^{-z})/z, z = (s - ω_D)τ
            let z = (s - wd) * tau;
            let middle = if z.norm() < 1e-3 {
                tau * ed * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0)
            } else {
                tau * ed * (1.0 - (-z).exp()) / z
            };
            let chi_d = 0.5 * pref * (ed / (s + wd) + middle + es / (s + wd));
            Ok((chi, chi_d))
        }
        Coupling::ExponentialCutoff { .. } => {
            if !(s.re > 0.0) {
                return Err(Error::domain("the exponential-cutoff transform is only defined for Re s > 0"));
            }
            let tol = Tolerance::new(1e-13, 1e-10);
            let transform = |kernel: &dyn Fn(f64) -> f64| -> Result<Complex64> {
                let f = |t: f64| (-s.re * t).exp() * kernel(t);
                let re = fourier_cos(f, s.im, tol)?.value;
                let im = -fourier_sin(f, s.im, tol)?.value;
                Ok(Complex64::new(re, im))
            };
            let chi = transform(&|t| model.kernel_chi(t).ok().and_then(|k| k.smooth()).unwrap_or(0.0))?;
            let chi_d = transform(&|t| model.kernel_chi_d(t, d).ok().and_then(|k| k.smooth()).unwrap_or(0.0))?;
            Ok((chi, chi_d))
        }
    }
}

/// `η`, `ξ` and `η̇` at one time, with the largest refinement discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponsePoint {
    pub t: f64,
    pub eta: f64,
    pub xi: f64,
    pub eta_dot: f64,
    pub discrepancy: f64,
}

impl ResponsePoint {
    /// `ξ̇ = -ω₀² η`.
    pub fn xi_dot(&self, omega0: f64) -> f64 {
        -omega0 * omega0 * self.eta
    }

    pub fn flagged(&self) -> bool {
        self.discrepancy > FLAG_AT
    }
}

/// Which inversion an image calls for.
enum Route {
    /// `K(s) = k0 + c/(s + a)`: a finite linear system, solved exactly.
    Rational { k0: f64, c: f64, a: f64 },
    /// Delays or images known only for `Re s > 0`: de Hoog on the Bromwich line.
    Line,
    /// Ohmic with a delay: expansion in powers of `e^{-sτ}`.
    OhmicDelay { gamma: f64, tau: f64 },
}

fn route(model: Option<&CouplingModel>, d: f64, sign: ModeSign) -> Route {
    let plus = sign == ModeSign::Plus;
    match model.map(|m| (m.coupling, m.u0)) {
        None
        | Some((Coupling::ExponentialCutoff { amplitude: 0.0, .. }, _))
        | Some((Coupling::Drude { gamma: 0.0, .. } | Coupling::Ohmic { gamma: 0.0 }, _)) => Route::Rational { k0: 0.0, c: 0.0, a: 0.0 },
        Some((Coupling::Ohmic { gamma }, u0)) if d > 0.0 => Route::OhmicDelay { gamma, tau: d / u0 },
        Some((Coupling::Ohmic { gamma }, _)) => Route::Rational { k0: if plus { gamma } else { 0.0 }, c: 0.0, a: 0.0 },
        Some((Coupling::Drude { gamma, omega_d }, _)) if d == 0.0 => {
            Route::Rational { k0: 0.0, c: if plus { 2.0 * gamma * omega_d } else { 0.0 }, a: omega_d }
        }
        Some(_) => Route::Line,
    }
}

fn checked_route(model: Option<&CouplingModel>, d: f64, sign: ModeSign, nodes: usize) -> Result<Route> {
    if nodes < 8 {
        return Err(Error::SolverConfig("at least 8 contour nodes are needed".into()));
    }
    if let Some(m) = model {
        m.validate()?;
    }
    Ok(route(model, d, sign))
}

/// Mode response functions at time `t ≥ 0`. `model = None` means no coupling.
pub fn response_eta_xi(
    model: Option<&CouplingModel>,
    pair: &OscillatorPair,
    sign: ModeSign,
    t: f64,
    nodes: usize,
) -> Result<ResponsePoint> {
    pair.validate()?;
    let route = checked_route(model, pair.d, sign, nodes)?;
    Responder::new(model, pair, sign, route).at(t)
}

struct Responder<'a> {
    model: Option<&'a CouplingModel>,
    omega0: f64,
    d: f64,
    sign: f64,
    route: Route,
    cache: RefCell<HashMap<(u64, u64), Complex64>>,
}

impl<'a> Responder<'a> {
    fn new(model: Option<&'a CouplingModel>, pair: &OscillatorPair, sign: ModeSign, route: Route) -> Self {
        Self { model, omega0: pair.omega0, d: pair.d, sign: sign.factor(), route, cache: RefCell::new(HashMap::new()) }
    }

    /// `K_±(s)`; memoized because η, ξ and η̇ share their image samples.
    fn kernel(&self, s: Complex64) -> Complex64 {
        let Some(model) = self.model else { return Complex64::new(0.0, 0.0) };
        let key = (s.re.to_bits(), s.im.to_bits());
        if let Some(k) = self.cache.borrow().get(&key) {
            return *k;
        }
        let k = match kernel_continued(model, s, self.d) {
            Ok((a, b)) => a + self.sign * b,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        };
        self.cache.borrow_mut().insert(key, k);
        k
    }

    fn poly(&self, s: Complex64) -> Complex64 {
        s * s + s * self.kernel(s) + self.omega0 * self.omega0
    }

    fn at(&self, t: f64) -> Result<ResponsePoint> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("response time must be non-negative, got {t}")));
        }
        if t == 0.0 {
            return Ok(ResponsePoint { t, eta: 0.0, xi: 1.0, eta_dot: 1.0, discrepancy: 0.0 });
        }
        let w2 = self.omega0 * self.omega0;
        let (eta, int_eta, eta_dot) = match self.route {
            Route::Rational { k0, c, a } => {
                // state (η, η̇, w, ∫η) with w the memory force, started from (0, 1, 0, 0)
                #[rustfmt::skip]
                let m = Matrix4::new(
                    0.0, 1.0, 0.0, 0.0,
                    -w2, -k0, -1.0, 0.0,
                    0.0, c, -a, 0.0,
                    1.0, 0.0, 0.0, 0.0,
                );
                let y = (m * t).exp().column(1).into_owned();
                let exact = |value| Checked { value, discrepancy: 0.0, method: Inverter::Talbot { nodes: 0 } };
                (exact(y[0]), exact(y[3]), exact(y[1]))
            }
            Route::Line => (
                invert_line(|s| 1.0 / self.poly(s), t)?,
                invert_line(|s| 1.0 / (s * self.poly(s)), t)?,
                invert_line(|s| s / self.poly(s), t)?,
            ),
            Route::OhmicDelay { gamma, tau } => {
                let p0 = move |s: Complex64| s * s + 0.5 * gamma * s + w2;
                // 1/P = Σ_k (-q s)^k e^{-ksτ} / P₀^{k+1}, q = ±γ/2
                let q = self.sign * 0.5 * gamma;
                let series = |power: i32| -> Result<Checked> {
                    let mut value = 0.0;
                    let mut discrepancy: f64 = 0.0;
                    let mut k = 0;
                    while t - k as f64 * tau > 1e-12 * t.max(1.0) {
                        let tk = t - k as f64 * tau;
                        let kk = k as i32;
                        if let Some(v) = delay_term(k, power, q, gamma, w2, tk) {
                            value += v;
                            k += 1;
                            continue;
                        }
                        // Near its front the term starts as (-q)^k tk^(k+1-power)/(k+1-power)!;
                        // when that is below rounding the inversion is skipped (it can break down there).
                        if tk * (self.omega0 + q.abs()) < 0.1 {
                            let order = (kk + 1 - power).max(0);
                            let lead = q.abs().powi(kk) * tk.powi(order) / (1..=order).map(f64::from).product::<f64>();
                            if lead < 1e-18 {
                                k += 1;
                                continue;
                            }
                        }
                        let image = |s: Complex64| (-q * s).powi(kk) * s.powi(power) / p0(s).powi(kk + 1);
                        let c = invert_cascade(image, tk, 32)?;
                        value += c.value;
                        discrepancy = discrepancy.max(c.discrepancy);
                        k += 1;
                    }
                    Ok(Checked { value, discrepancy, method: Inverter::Talbot { nodes: 32 } })
                };
                (series(0)?, series(-1)?, series(1)?)
            }
        };
        let discrepancy = eta.discrepancy.max(w2 * int_eta.discrepancy).max(eta_dot.discrepancy);
        Ok(ResponsePoint { t, eta: eta.value, xi: 1.0 - w2 * int_eta.value, eta_dot: eta_dot.value, discrepancy })
    }
}

/// Inverse of `(-q)^k s^(k+power) / P₀(s)^(k+1)` at `t > 0`, `P₀ = s² + (γ/2)s + ω₀²`,
/// as the sum of its pole residues. `None` when the residues cancel too far to
/// trust: near critical damping, or high orders at short times.
fn delay_term(k: usize, power: i32, q: f64, gamma: f64, w2: f64, t: f64) -> Option<f64> {
    let disc = Complex64::new(gamma * gamma / 16.0 - w2, 0.0).sqrt();
    let (r1, r2) = (-0.25 * gamma + disc, -0.25 * gamma - disc);
    if (r1 - r2).norm() < 1e-6 * r1.norm().max(1.0) {
        return None;
    }
    let m = k + 1;
    let e = k as i32 + power;
    let mut poles = vec![(r1, m), (r2, m)];
    if e < 0 {
        poles.push((Complex64::new(0.0, 0.0), 1));
    }
    let e = e.max(0) as usize;
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (i, &(a, order)) in poles.iter().enumerate() {
        // Taylor coefficients in u = s - a of s^e and of (s - b)^-m_b for the other poles
        let mut g = vec![Complex64::new(0.0, 0.0); order];
        let mut binom = 1.0;
        for (j, gj) in g.iter_mut().enumerate().take(e + 1) {
            *gj = binom * a.powi((e - j) as i32);
            binom *= (e - j) as f64 / (j + 1) as f64;
        }
        for (l, &(b, mb)) in poles.iter().enumerate() {
            if l == i {
                continue;
            }
            let c = a - b;
            let mut f = Vec::with_capacity(order);
            f.push(c.powi(-(mb as i32)));
            for j in 1..order {
                let prev = f[j - 1];
                f.push(prev * (-((mb + j - 1) as f64) / j as f64) / c);
            }
            g = (0..order).map(|n| (0..=n).map(|j| g[j] * f[n - j]).sum()).collect();
        }
        // coefficient of u^(order-1) in e^{(a+u)t} G(u)
        let mut sum = Complex64::new(0.0, 0.0);
        let mut tj = 1.0;
        let mut size = 0.0;
        for j in 0..order {
            sum += tj * g[order - 1 - j];
            size += tj * g[order - 1 - j].norm();
            tj *= t / (j + 1) as f64;
        }
        let e = (a * t).exp();
        total += e * sum;
        scale += e.norm() * size;
    }
    let lead = q.abs().powi(k as i32);
    (lead * scale * 1e-16 < 1e-13).then(|| (-q).powi(k as i32) * total.re)
}

/// Response functions on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTable {
    pub grid: TimeGrid,
    pub sign: ModeSign,
    pub omega0: f64,
    pub eta: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta_dot: Vec<f64>,
    pub max_discrepancy: f64,
    /// Grid indices whose discrepancy exceeded the flag threshold.
    pub flagged: Vec<usize>,
}

impl ResponseTable {
    pub fn xi_dot(&self) -> Vec<f64> {
        let w2 = self.omega0 * self.omega0;
        self.eta.iter().map(|e| -w2 * e).collect()
    }
}

pub fn response_table(
    model: Option<&CouplingModel>,
    pair: &OscillatorPair,
    sign: ModeSign,
    grid: TimeGrid,
    nodes: usize,
) -> Result<ResponseTable> {
    pair.validate()?;
    let route = checked_route(model, pair.d, sign, nodes)?;
    let responder = Responder::new(model, pair, sign, route);
    let mut table = ResponseTable {
        grid,
        sign,
        omega0: pair.omega0,
        eta: Vec::with_capacity(grid.n),
        xi: Vec::with_capacity(grid.n),
        eta_dot: Vec::with_capacity(grid.n),
        max_discrepancy: 0.0,
        flagged: Vec::new(),
    };
    let mut discrepancy = Vec::with_capacity(grid.n);
    for t in grid.times() {
        let p = responder.at(t)?;
        discrepancy.push(p.discrepancy);
        table.eta.push(p.eta);
        table.xi.push(p.xi);
        table.eta_dot.push(p.eta_dot);
        // The memo only helps within one time point (de Hoog nodes depend on t).
        responder.cache.borrow_mut().clear();
    }
    if let (Some(model), Route::Line) = (model, &responder.route) {
        if discrepancy.iter().any(|&d| d > FLAG_AT) {
            patch_flagged(model, pair, sign, &mut table, &mut discrepancy)?;
        }
    }
    table.flagged = (0..grid.n).filter(|&i| discrepancy[i] > FLAG_AT).collect();
    table.max_discrepancy = discrepancy.iter().fold(0.0, |a: f64, &b| a.max(b));
    Ok(table)
}

/// Replaces flagged inverted values by the time-domain solution where that is
/// better resolved. The equation is integrated at three step sizes and
/// Richardson extrapolated; the change between the two extrapolants is the
/// discrepancy. Kernels with delta parts are left alone.
fn patch_flagged(
    model: &CouplingModel,
    pair: &OscillatorPair,
    sign: ModeSign,
    table: &mut ResponseTable,
    discrepancy: &mut [f64],
) -> Result<()> {
    let grid = table.grid;
    let base = (grid.h / 0.01).ceil().max(1.0) as usize;
    let solve = |refine: usize| -> Result<Option<[Vec<f64>; 3]>> {
        let sub = base * refine;
        let h = grid.h / sub as f64;
        let n = (grid.n - 1) * sub + 1;
        let mut kernel = Vec::with_capacity(n);
        for j in 0..n {
            let t = j as f64 * h;
            match (model.kernel_chi(t)?.smooth(), model.kernel_chi_d(t, pair.d)?.smooth()) {
                (Some(a), Some(b)) => kernel.push(a + sign.factor() * b),
                _ => return Ok(None),
            }
        }
        let zero = vec![0.0; n];
        let (eta, eta_dot) = single_gle(&kernel, pair.omega0, &zero, 0.0, 1.0, h)?;
        let (xi, _) = single_gle(&kernel, pair.omega0, &zero, 1.0, 0.0, h)?;
        Ok(Some([eta, xi, eta_dot].map(|v| v.into_iter().step_by(sub).collect())))
    };
    let Some(coarse) = solve(1)? else { return Ok(()) };
    let Some(mid) = solve(2)? else { return Ok(()) };
    let Some(fine) = solve(4)? else { return Ok(()) };
    for i in 0..grid.n {
        if discrepancy[i] <= FLAG_AT {
            continue;
        }
        let mut value = [0.0; 3];
        let mut change: f64 = 0.0;
        for c in 0..3 {
            let first = (4.0 * mid[c][i] - coarse[c][i]) / 3.0;
            value[c] = (4.0 * fine[c][i] - mid[c][i]) / 3.0;
            change = change.max((value[c] - first).abs());
        }
        if change < discrepancy[i] {
            table.eta[i] = value[0];
            table.xi[i] = value[1];
            table.eta_dot[i] = value[2];
            discrepancy[i] = change;
        }
    }
    Ok(())
}

/// `y(t) = ξ(t)y₀ + η(t)ẏ₀ + ∫₀^t η(t')F(t-t')dt'` and its velocity, trapezoidal convolution.
fn mode_solution(table: &ResponseTable, y0: f64, v0: f64, force: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = table.grid.n;
    let h = table.grid.h;
    let xi_dot = table.xi_dot();
    let mut y = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        let (mut cy, mut cv) = (0.0, 0.0);
        if i > 0 {
            for j in 0..=i {
                let w = if j == 0 || j == i { 0.5 } else { 1.0 };
                cy += w * table.eta[j] * force[i - j];
                cv += w * table.eta_dot[j] * force[i - j];
            }
        }
        y.push(table.xi[i] * y0 + table.eta[i] * v0 + h * cy);
        v.push(xi_dot[i] * y0 + table.eta_dot[i] * v0 + h * cv);
    }
    (y, v)
}

/// Normal-mode trajectories from the Laplace-domain responses.
pub fn solve_modes_laplace(
    model: Option<&CouplingModel>,
    pair: &OscillatorPair,
    noise: &NoiseSeries,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let grid = cfg.grid()?;
    noise.check_grid(&grid)?;
    check_series_len(&grid, "noise f1", noise.f1.len())?;
    let (fr, fz) = mode_noises(&noise.f1[..grid.n], &noise.f2[..grid.n])?;
    let plus = response_table(model, pair, ModeSign::Plus, grid, cfg.laplace_nodes)?;
    let minus = response_table(model, pair, ModeSign::Minus, grid, cfg.laplace_nodes)?;
    let ic = cfg.initial;
    let (r, vr) = mode_solution(&plus, 0.5 * (ic.x1 + ic.x2), 0.5 * (ic.v1 + ic.v2), &fr);
    let (z, vz) = mode_solution(&minus, ic.x2 - ic.x1, ic.v2 - ic.v1, &fz);
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
        f1: noise.f1[..grid.n].to_vec(),
        f2: noise.f2[..grid.n].to_vec(),
        provenance: Provenance {
            solver: Method::ModesLaplace.tag().into(),
            inversion_discrepancy: Some(plus.max_discrepancy.max(minus.max_discrepancy)),
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delay_residues() {
        use crate::dynamics::weak::greens_derivatives;
        for (gamma, omega0) in [(0.3, 1.0), (5.0, 1.0)] {
            let w2 = omega0 * omega0;
            for t in [0.1, 1.0, 7.5] {
                let (g, gd, _) = greens_derivatives(gamma, omega0, t);
                assert!((delay_term(0, 0, 0.5 * gamma, gamma, w2, t).unwrap() - g).abs() < 1e-13);
                assert!((delay_term(0, 1, 0.5 * gamma, gamma, w2, t).unwrap() - gd).abs() < 1e-13);
                for (k, power) in [(1, 0), (3, -1), (4, 1), (8, 0)] {
                    let q = -0.5 * gamma;
                    let p0 = |s: Complex64| s * s + 0.5 * gamma * s + w2;
                    let image = |s: Complex64| (-q * s).powi(k as i32) * s.powi(power) / p0(s).powi(k as i32 + 1);
                    let want = invert_cascade(image, t, 32).unwrap().value;
                    let Some(got) = delay_term(k, power, q, gamma, w2, t) else {
                        assert!(t < 1.0 || k > 4, "gamma={gamma} k={k} t={t} not resolved");
                        continue;
                    };
                    assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "gamma={gamma} k={k} power={power} t={t}: {got} vs {want}");
                }
            }
        }
        assert!(delay_term(0, 0, 1.0, 4.0, 1.0, 1.0).is_none());
    }

    #[test]
    fn ohmic_images() {
        let m = CouplingModel::ohmic(0.3, 2.0).unwrap();
        let s = c(0.7, 1.3);
        let (a, b) = laplace_kernel(&m, s, 3.0).unwrap();
        assert_eq!(a, c(0.15, 0.0));
        assert!((b - 0.15 * (-s * 1.5).exp()).norm() < 1e-15);
        assert!(laplace_kernel(&m, c(0.0, 1.0), 1.0).is_err());
        assert!(laplace_kernel(&m, c(-1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn drude_images() {
        let m = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        for s in [c(0.5, 0.0), c(2.0, 7.0), c(10.0, 0.0), c(10.0 + 1e-9, 1e-9)] {
            let (a, b) = laplace_kernel(&m, s, 0.0).unwrap();
            assert!((a - 1.0 / (s + 10.0)).norm() < 1e-15);
            assert!((a - b).norm() < 1e-14);
        }
        // Trapezoidal Laplace transform of the closed-form cross kernel as the oracle.
        let d = 2.0;
        let s = c(1.5, 0.8);
        let (_, b) = laplace_kernel(&m, s, d).unwrap();
        let direct: Complex64 = {
            let n = 200_000;
            let t_max = 40.0;
            let h = t_max / n as f64;
            (0..=n)
                .map(|i| {
                    let t = i as f64 * h;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * h * (-s * t).exp() * m.kernel_chi_d(t, d).unwrap().smooth().unwrap()
                })
                .sum()
        };
        assert!((b - direct).norm() < 1e-6, "{b} vs {direct}");
        let (a, _) = laplace_kernel(&m, c(1e8, 0.0), d).unwrap();
        assert!(a.norm() < 1e-5);
    }

    #[test]
    fn free_oscillator_response() {
        let pair = OscillatorPair::new(1.0, 1.3, 2.0).unwrap();
        for &t in &[0.0, 0.4, 3.0, 17.0] {
            let p = response_eta_xi(None, &pair, ModeSign::Plus, t, 32).unwrap();
            assert!((p.eta - (1.3 * t).sin() / 1.3).abs() < 1e-8, "t={t}");
            assert!((p.xi - (1.3 * t).cos()).abs() < 1e-8);
            assert!((p.eta_dot - (1.3 * t).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn initial_values() {
        let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
        let m = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        for sign in [ModeSign::Plus, ModeSign::Minus] {
            let p = response_eta_xi(Some(&m), &pair, sign, 0.0, 32).unwrap();
            assert_eq!((p.eta, p.xi), (0.0, 1.0));
            let p = response_eta_xi(Some(&m), &pair, sign, 1e-4, 32).unwrap();
            assert!(p.eta.abs() < 2e-4 && (p.xi - 1.0).abs() < 1e-6);
        }
    }
}
