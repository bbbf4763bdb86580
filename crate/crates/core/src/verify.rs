//! The acceptance suite: ten numbered checks with fixed parameters and
//! tolerances, each reporting what it measured.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{equipartition_check, fdr_check, retardation_onset, EnsembleSummary, ModeMoments, NoiseEnsemble, OriginWindow};
use crate::dynamics::{
    greens_derivatives, integrate_localized, integrate_modes, integrate_ohmic_dde, solve_modes_laplace, weak_coupling_solution,
    InitialConditions, Method, SolverConfig,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::interaction::{induced_force, induced_potential, OscillatorPair};
use crate::kernels::{invert_kernel_to_coupling, quadrature_route, CouplingModel, InversionPrefactor, KernelSource};
use crate::noise::{fdr_target, sample_bath, ModeGrid, NoiseSeries, Pair, ThermalState};
use crate::quadrature::Tolerance;

/// How much Monte-Carlo work the ensemble checks do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effort {
    /// The realization counts the criteria are stated for.
    Full,
    /// A few hundred realizations; a smoke test, not a verdict.
    Quick,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub measured: String,
    pub requirement: String,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub summaries: Vec<EnsembleSummary>,
}

impl Outcome {
    fn new(id: u32, passed: bool, measured: String) -> Self {
        let (title, requirement, budget) = CRITERIA[(id - 1) as usize];
        Self {
            id,
            title: title.into(),
            passed,
            measured,
            requirement: requirement.into(),
            seconds: 0.0,
            budget_seconds: budget,
            notes: Vec::new(),
            summaries: Vec::new(),
        }
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    /// One line for a pass/fail table.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {} ({:.1}s of {:.0}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.measured,
            self.seconds,
            self.budget_seconds
        )
    }
}

/// Title, requirement and runtime budget of every criterion.
pub const CRITERIA: [(&str, &str, f64); 10] = [
    ("kernel oracle", "quadrature vs closed form within max(1e-8, 1e-6|chi|) on 100 (dt, d) pairs per family", 10.0),
    ("inversion round trip", "relative 1e-4 over nu in [0.01, 10] nu_char", 5.0),
    ("potential/force consistency", "F = -dV/du to 1e-6 at 50 points; V(d) = -A nu0/u0^2; F(d) = 0", 1.0),
    ("FDR Monte-Carlo", "<= 1% of 60 cells beyond |z| = 3; quantum high-T target within 1% of classical", 300.0),
    ("cross-solver agreement", "sup-norm distance <= 1e-4 on [0, 20]", 60.0),
    ("strict retardation", "|x2| < 1e-10 before tau - h, onset within one step of tau, 20 draws", 30.0),
    ("weak-coupling series", "fitted exponent >= 1.8 for gamma 0.02 -> 0.01", 60.0),
    ("Green's function residual", "residual < 1e-8 at 1000 points; G(0) = 0, G'(0+) = 1 exactly", 1.0),
    ("classical equilibrium", "<R^2>, <Z^2> (and velocities) within 3 standard errors", 600.0),
    ("negative controls", "each check fails on its corrupted input", 60.0),
];

/// Run criterion `id` (1 to 10). Numeric errors become failures carrying the message.
pub fn run(id: u32, effort: Effort) -> Outcome {
    let start = Instant::now();
    let result = match id {
        1 => kernel_oracle(),
        2 => inversion_round_trip(),
        3 => potential_force(),
        4 => fdr_monte_carlo(effort),
        5 => cross_solver(),
        6 => strict_retardation(),
        7 => weak_coupling(),
        8 => greens_residual(),
        9 => classical_equilibrium(effort),
        10 => negative_controls(effort),
        _ => Err(Error::domain(format!("no acceptance criterion {id}"))),
    };
    let mut out = match result {
        Ok(o) => o,
        Err(e) if (1..=10).contains(&id) => Outcome::new(id, false, format!("error: {e}")),
        Err(e) => Outcome {
            id,
            title: "unknown".into(),
            passed: false,
            measured: e.to_string(),
            requirement: String::new(),
            seconds: 0.0,
            budget_seconds: 0.0,
            notes: Vec::new(),
            summaries: Vec::new(),
        },
    };
    out.seconds = start.elapsed().as_secs_f64();
    if effort == Effort::Quick && matches!(id, 4 | 9 | 10) {
        out.notes.push("quick effort: reduced ensemble, not the stated criterion".into());
    }
    out
}

pub fn run_all(effort: Effort) -> Vec<Outcome> {
    (1..=10).map(|id| run(id, effort)).collect()
}

/// `|a - b|` in units of `max(abs, rel |b|)`.
fn scaled_error(a: f64, b: f64, abs: f64, rel: f64) -> f64 {
    (a - b).abs() / abs.max(rel * b.abs())
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

fn smooth(v: crate::kernels::KernelValue) -> Result<f64> {
    v.smooth().ok_or_else(|| Error::Unsupported("kernel has delta parts".into()))
}

/// Worst `|quadrature - closed form| / max(1e-8, 1e-6|closed|)` over a 10×10 grid.
pub fn kernel_oracle_error(model: &CouplingModel, dt_max: f64, d_max: f64) -> Result<f64> {
    let tol = Tolerance::new(1e-12, 1e-10);
    let mut worst = 0.0f64;
    for dt in linspace(0.0, dt_max, 10) {
        let c = smooth(model.kernel_chi(dt)?)?;
        worst = worst.max(scaled_error(quadrature_route::chi_self(model, dt, tol)?, c, 1e-8, 1e-6));
        for d in linspace(0.0, d_max, 10) {
            let c = smooth(model.kernel_chi_d(dt, d)?)?;
            let q = quadrature_route::chi_d(model, dt, d, tol)?;
            worst = worst.max(scaled_error(q, c, 1e-8, 1e-6));
        }
    }
    Ok(worst)
}

fn kernel_oracle() -> Result<Outcome> {
    let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0)?;
    let drude = CouplingModel::drude(0.1, 10.0, 1.0)?;
    let e1 = kernel_oracle_error(&cut, 3.0, 3.0)?;
    let e2 = kernel_oracle_error(&drude, 0.8, 0.8)?;
    let worst = e1.max(e2);
    Ok(Outcome::new(1, worst <= 1.0, format!("worst error {worst:.2e} of tolerance (cutoff {e1:.2e}, drude {e2:.2e})")))
}

/// Largest relative error of the inverted coupling over `points` log-spaced
/// wavenumbers in `[lo, hi]`.
pub fn inversion_error(model: &CouplingModel, prefactor: InversionPrefactor, lo: f64, hi: f64, points: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..points {
        let nu = lo * (hi / lo).powf(k as f64 / (points - 1) as f64);
        let got = invert_kernel_to_coupling(KernelSource::Model(model), nu, prefactor)?;
        let want = model.coupling_strength_sq(nu)?;
        worst = worst.max((got - want).abs() / want.abs());
    }
    Ok(worst)
}

fn inversion_round_trip() -> Result<Outcome> {
    let drude = CouplingModel::drude(0.1, 10.0, 1.0)?;
    let ohmic = CouplingModel::ohmic(0.1, 1.0)?;
    let nc = drude.characteristic_wavenumber().expect("drude");
    let e1 = inversion_error(&drude, InversionPrefactor::Consistent, 0.01 * nc, 10.0 * nc, 40)?;
    let e2 = inversion_error(&ohmic, InversionPrefactor::Consistent, 0.01 * nc, 10.0 * nc, 40)?;
    let worst = e1.max(e2);
    Ok(Outcome::new(2, worst <= 1e-4, format!("max relative error drude {e1:.2e}, ohmic {e2:.2e}")))
}

/// Worst `|F + dV/du|` by central differences at 50 points around `d`.
pub fn force_consistency_error(model: &CouplingModel, d: f64, half_width: f64) -> Result<f64> {
    let step = 1e-4;
    let mut worst = 0.0f64;
    for u in linspace(d - half_width, d + half_width, 50) {
        let fd = -(induced_potential(model, u + step, d)? - induced_potential(model, u - step, d)?) / (2.0 * step);
        worst = worst.max((induced_force(model, u, d)? - fd).abs());
    }
    Ok(worst)
}

fn potential_force() -> Result<Outcome> {
    let cut = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0)?;
    let drude = CouplingModel::drude(0.1, 10.0, 1.0)?;
    let e1 = force_consistency_error(&cut, 2.0, 5.0)?;
    let e2 = force_consistency_error(&drude, 2.0, 1.0)?;
    let mut exact = true;
    for &(a, nu0, u0, d) in &[(1.0, 1.0, 1.0, 2.0), (0.7, 1.3, 2.0, 0.5), (2.5, 0.4, 0.8, 3.0)] {
        let m = CouplingModel::exponential_cutoff(a, nu0, u0)?;
        exact &= induced_potential(&m, d, d)? == -a * nu0 / (u0 * u0);
        exact &= induced_force(&m, d, d)? == 0.0;
    }
    exact &= induced_force(&drude, 2.0, 2.0)? == 0.0;
    let worst = e1.max(e2);
    let passed = worst <= 1e-6 && exact;
    Ok(Outcome::new(3, passed, format!("max |F + dV/du| cutoff {e1:.2e}, drude {e2:.2e}; V(d) and F(d) exact: {exact}")))
}

/// Classical noise forces of `n` realizations on `tgrid`, sampled at separation `d`.
#[allow(clippy::too_many_arguments)]
pub fn noise_ensemble(
    model: &CouplingModel,
    thermal: &ThermalState,
    modes: ModeGrid,
    seed: u64,
    n: usize,
    d: f64,
    tgrid: TimeGrid,
    window: OriginWindow,
) -> Result<NoiseEnsemble> {
    let series: Vec<NoiseSeries> = (0..n as u64)
        .into_par_iter()
        .map(|i| Ok(sample_bath(model, thermal, modes, seed, i, false)?.noise_series(d, tgrid)))
        .collect::<Result<_>>()?;
    let (f1, f2) = series.into_iter().map(|s| (s.f1, s.f2)).unzip();
    Ok(NoiseEnsemble {
        model_tag: model.tag(),
        thermal_tag: thermal.tag(),
        d,
        h: tgrid.h,
        f1,
        f2,
        seeds: vec![seed],
        window,
        nu_max: modes.nu_max,
    })
}

/// Lags of the FDR check, all multiples of the sampling step 0.05.
pub const FDR_LAGS: [f64; 20] = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2, 1.6, 1.8, 1.9, 1.95, 2.0, 2.05, 2.1, 2.2, 2.4, 2.8, 3.5, 5.0];
const FDR_H: f64 = 0.05;
const FDR_SEED: u64 = 20_240_611;

struct FdrSetup {
    model: CouplingModel,
    modes: ModeGrid,
    tgrid: TimeGrid,
    d: f64,
}

fn fdr_setup() -> Result<FdrSetup> {
    let model = CouplingModel::drude(0.1, 10.0, 1.0)?;
    let nu_max = 20.0 * 10.0 / model.u0;
    Ok(FdrSetup { model, modes: ModeGrid::new(nu_max, 2048)?, tgrid: TimeGrid::new(FDR_H, 101)?, d: 2.0 })
}

fn fdr_monte_carlo(effort: Effort) -> Result<Outcome> {
    let s = fdr_setup()?;
    let n = match effort {
        Effort::Full => 10_000,
        Effort::Quick => 400,
    };
    let classical = ThermalState::classical(1.0)?;
    let ens = noise_ensemble(&s.model, &classical, s.modes, FDR_SEED, n, s.d, s.tgrid, OriginWindow::single(0))?;
    let mut summary = fdr_check(&s.model, &classical, &ens, &FDR_LAGS, s.d, None)?;
    summary.notes.push("single time origin per realization; target k_BT chi without band limit".into());
    let banded = fdr_check(&s.model, &classical, &ens, &FDR_LAGS, s.d, Some(s.modes.nu_max))?;
    drop(ens);

    // Quantum bath at k_BT = 1e3 hbar u0 nu_char; zero-point motion needs the band limit.
    let nu_char = s.model.characteristic_wavenumber().expect("drude");
    let quantum = ThermalState::quantum(1.0, 1.0 / (1e3 * s.model.u0 * nu_char))?;
    let cut = Some(s.modes.nu_max);
    let mut worst_rel = 0.0f64;
    for pair in Pair::ALL {
        let mut peak = 0.0f64;
        let mut diff = 0.0f64;
        for &lag in &FDR_LAGS {
            let c = fdr_target(&s.model, &classical, lag, pair, s.d, cut)?;
            let q = fdr_target(&s.model, &quantum, lag, pair, s.d, cut)?;
            peak = peak.max(c.abs());
            diff = diff.max((q - c).abs());
        }
        worst_rel = worst_rel.max(diff / peak);
    }
    let qens = noise_ensemble(&s.model, &quantum, s.modes, FDR_SEED + 1, n, s.d, s.tgrid, OriginWindow::single(0))?;
    // The quantum ensemble is judged against the classical band-limited target.
    let mut qsummary = fdr_check(&s.model, &quantum, &qens, &FDR_LAGS, s.d, cut)?;
    for cell in &mut qsummary.cells {
        let pair = match cell.pair.as_str() {
            "11" => Pair::P11,
            "22" => Pair::P22,
            _ => Pair::P12,
        };
        let target = fdr_target(&s.model, &classical, cell.lag, pair, s.d, cut)?;
        *cell = crate::analysis::Cell::new(cell.pair.clone(), cell.lag, cell.estimate, cell.stderr, target);
    }
    qsummary.check = "fdr-quantum-vs-classical".into();
    qsummary.decide();

    let passed = summary.passed() && worst_rel <= 0.01 && qsummary.passed();
    let measured = format!(
        "classical {}/{} cells beyond |z|=3 (max |z| {:.2}); quantum target off classical by {:.1e}; quantum ensemble {}/{} (max |z| {:.2})",
        summary.failed_cells(),
        summary.cells.len(),
        summary.max_abs_z(),
        worst_rel,
        qsummary.failed_cells(),
        qsummary.cells.len(),
        qsummary.max_abs_z()
    );
    let mut out = Outcome::new(4, passed, measured).note(format!(
        "band-limited target: {}/{} cells beyond |z|=3 (max |z| {:.2})",
        banded.failed_cells(),
        banded.cells.len(),
        banded.max_abs_z()
    ));
    if let Some(frac) = s.model.spectral_tail_fraction(s.modes.nu_max) {
        out = out.note(format!("spectral weight above nu_max: {frac:.3e}"));
    }
    out.summaries = vec![summary, qsummary];
    Ok(out)
}

fn bath_noise(model: &CouplingModel, d: f64, grid: TimeGrid, seed: u64) -> Result<NoiseSeries> {
    let thermal = ThermalState::classical(1.0)?;
    let r = sample_bath(model, &thermal, ModeGrid::new(20.0, 256)?, seed, 0, false)?;
    Ok(r.noise_series(d, grid))
}

/// Sup-norm distances between the solvers on shared noise:
/// `(drude localized-laplace, drude localized-modes, ohmic localized-laplace,
/// ohmic localized-dde, ohmic laplace-dde)`.
pub fn cross_solver_distances(h: f64, t_end: f64) -> Result<[f64; 5]> {
    let ic = InitialConditions { x1: 0.3, v1: 0.0, x2: -0.2, v2: 0.1 };
    let cfg = SolverConfig::new(h, t_end, Method::Localized).with_initial(ic);
    let grid = cfg.grid()?;

    let drude = CouplingModel::drude(0.1, 10.0, 1.0)?;
    let pair = OscillatorPair::new(1.0, 1.0, 2.0)?;
    let noise = bath_noise(&drude, pair.d, grid, 7)?;
    let a = integrate_localized(&drude, &pair, &noise, &cfg)?;
    let b = solve_modes_laplace(Some(&drude), &pair, &noise, &cfg)?;
    let c = integrate_modes(&drude, &pair, &noise, &cfg)?;

    let ohmic = CouplingModel::ohmic(0.1, 1.0)?;
    let pair = OscillatorPair::new(1.0, 1.0, 1.0)?;
    let noise = bath_noise(&ohmic, pair.d, grid, 7)?;
    let p = integrate_localized(&ohmic, &pair, &noise, &cfg)?;
    let q = solve_modes_laplace(Some(&ohmic), &pair, &noise, &cfg)?;
    let r = integrate_ohmic_dde(0.1, 1.0, &pair, &noise, &cfg)?;
    Ok([a.sup_distance(&b), a.sup_distance(&c), p.sup_distance(&q), p.sup_distance(&r), q.sup_distance(&r)])
}

fn cross_solver() -> Result<Outcome> {
    let d = cross_solver_distances(0.0025, 20.0)?;
    let worst = d.iter().fold(0.0f64, |m, &x| m.max(x));
    Ok(Outcome::new(
        5,
        worst <= 1e-4,
        format!(
            "drude loc-lap {:.1e}, loc-modes {:.1e}; ohmic loc-lap {:.1e}, loc-dde {:.1e}, lap-dde {:.1e}",
            d[0], d[1], d[2], d[3], d[4]
        ),
    )
    .note("h = 0.0025"))
}

/// Impulse on oscillator 1 at rest; returns `(max |x₂| before τ - h, onset - τ, h)`.
/// The step is `τ/⌈100τ⌉` so the front falls on the grid.
pub fn impulse_response(gamma: f64, d: f64, u0: f64) -> Result<(f64, f64, f64)> {
    let tau = d / u0;
    let h = tau / (100.0 * tau).ceil();
    let pair = OscillatorPair::new(1.0, 1.0, d)?;
    let cfg = SolverConfig::new(h, tau + 2.0, Method::OhmicDde).with_initial(InitialConditions { v1: 1.0, ..Default::default() });
    let grid = cfg.grid()?;
    let tr = integrate_ohmic_dde(gamma, u0, &pair, &NoiseSeries::zeros(grid), &cfg)?;
    let quiet = tr.grid.times().zip(&tr.x2).take_while(|(t, _)| *t < tau - h - 1e-9 * h).fold(0.0f64, |m, (_, x)| m.max(x.abs()));
    Ok((quiet, retardation_onset(&tr, 1e-10) - tau, h))
}

fn strict_retardation() -> Result<Outcome> {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut worst_quiet = 0.0f64;
    let mut worst_onset = 0.0f64;
    let mut passed = true;
    for _ in 0..20 {
        let gamma = rng.random_range(0.05..1.0);
        let d = rng.random_range(0.5..4.0);
        let (quiet, onset, h) = impulse_response(gamma, d, 1.0)?;
        worst_quiet = worst_quiet.max(quiet);
        worst_onset = worst_onset.max(onset.abs() / h);
        passed &= quiet < 1e-10 && onset.abs() <= h * (1.0 + 1e-9);
    }
    Ok(Outcome::new(6, passed, format!("max |x2| before front {worst_quiet:.1e}; max |onset - tau| = {worst_onset:.2} steps")))
}

/// Sup-norm deviation of the DDE from the first-order solution on `[0, 50]`
/// for each `gamma`, on one Ohmic noise realization.
pub fn weak_coupling_deviation(gammas: &[f64], seed: u64) -> Result<Vec<f64>> {
    let pair = OscillatorPair::new(1.0, 1.0, 1.0)?;
    let cfg = SolverConfig::new(0.01, 50.0, Method::OhmicDde);
    let grid = cfg.grid()?;
    let noise = bath_noise(&CouplingModel::ohmic(gammas[0], 1.0)?, pair.d, grid, seed)?;
    gammas
        .iter()
        .map(|&g| {
            let dde = integrate_ohmic_dde(g, 1.0, &pair, &noise, &cfg)?;
            let (x1, x2) = weak_coupling_solution(g, 1.0, &pair, &noise, grid)?;
            Ok((0..grid.n).map(|i| (x1[i] - dde.x1[i]).abs().max((x2[i] - dde.x2[i]).abs())).fold(0.0, f64::max))
        })
        .collect()
}

fn weak_coupling() -> Result<Outcome> {
    let dev = weak_coupling_deviation(&[0.02, 0.01], 1)?;
    let exponent = (dev[0] / dev[1]).log2();
    Ok(Outcome::new(
        7,
        exponent >= 1.8,
        format!("deviation {:.2e} -> {:.2e}, exponent {exponent:.3}, C = {:.2}", dev[0], dev[1], dev[0] / 0.02f64.powi(2)),
    ))
}

fn greens_residual() -> Result<Outcome> {
    let cases = [(0.1, 1.0), (8.0, 1.0), (4.0, 1.0), (0.5, 3.0)];
    let mut worst = 0.0f64;
    let mut jumps = true;
    for &(gamma, w0) in &cases {
        let (g0, gd0, _) = greens_derivatives(gamma, w0, 0.0);
        jumps &= g0 == 0.0 && gd0 == 1.0;
        for k in 1..=250 {
            let t = 0.08 * k as f64;
            let (g, gd, gdd) = greens_derivatives(gamma, w0, t);
            worst = worst.max((gdd + 0.5 * gamma * gd + w0 * w0 * g).abs());
        }
    }
    Ok(Outcome::new(8, worst < 1e-8 && jumps, format!("max residual {worst:.1e}; jump conditions exact: {jumps}")))
}

/// Long-run mode moments of the Drude pair, one per realization.
pub fn equilibrium_moments(n: usize, t_end: f64, seed: u64, thermal: &ThermalState) -> Result<Vec<ModeMoments>> {
    let model = CouplingModel::drude(0.2, 10.0, 1.0)?;
    let pair = OscillatorPair::new(1.0, 1.0, 2.0)?;
    let h = 0.01;
    let (modes, _) = ModeGrid::fft_compatible(200.0, h, model.u0, t_end)?;
    let mut cfg = SolverConfig::new(h, t_end, Method::Localized);
    // Both kernels are below 1e-6 of their peak beyond t = 3.4.
    cfg.memory_window = Some(3.4);
    let grid = cfg.grid()?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let bath = sample_bath(&model, thermal, modes, seed, i, false)?;
            let noise = bath.noise_series(pair.d, grid);
            let tr = integrate_modes(&model, &pair, &noise, &cfg)?;
            ModeMoments::from_trajectory(&tr, 50.0)
        })
        .collect()
}

fn classical_equilibrium(effort: Effort) -> Result<Outcome> {
    let (n, t_end) = match effort {
        Effort::Full => (10_000, 1000.0),
        Effort::Quick => (100, 300.0),
    };
    let thermal = ThermalState::classical(1.0)?;
    let pair = OscillatorPair::new(1.0, 1.0, 2.0)?;
    let moments = equilibrium_moments(n, t_end, 909, &thermal)?;
    let mut summary = equipartition_check(&moments, &thermal, &pair)?;
    summary.model = CouplingModel::drude(0.2, 10.0, 1.0)?.tag();
    let cells: Vec<String> = summary.cells.iter().map(|c| format!("{} {:.4}±{:.4} (z {:.2})", c.pair, c.estimate, c.stderr, c.z)).collect();
    let mut out = Outcome::new(9, summary.passed(), cells.join(", "))
        .note(format!("N = {n}, t_end = {t_end}, burn-in 50, h = 0.01, memory window 3.4"));
    out.summaries.push(summary);
    Ok(out)
}

fn negative_controls(effort: Effort) -> Result<Outcome> {
    let s = fdr_setup()?;
    let n = match effort {
        Effort::Full => 2000,
        Effort::Quick => 300,
    };
    let cut = Some(s.modes.nu_max);
    let kt1 = ThermalState::classical(1.0)?;
    let ens = noise_ensemble(&s.model, &kt1, s.modes, FDR_SEED + 7, n, s.d, s.tgrid, OriginWindow::single(0))?;
    let clean = fdr_check(&s.model, &kt1, &ens, &FDR_LAGS, s.d, cut)?;

    // Wrong separation: ensemble drawn at d = 2, judged against d = 1.
    let wrong_d = fdr_check(&s.model, &kt1, &ens, &FDR_LAGS, 1.0, cut)?;

    // Wrong temperature: honest provenance is refused, relabelled samples fail.
    let kt2 = ThermalState::classical(2.0)?;
    let refused = matches!(fdr_check(&s.model, &kt2, &ens, &FDR_LAGS, s.d, cut), Err(Error::ProvenanceMismatch(_)));
    let mut relabelled = ens;
    relabelled.thermal_tag = kt2.tag();
    let wrong_t = fdr_check(&s.model, &kt2, &relabelled, &FDR_LAGS, s.d, cut)?;

    // Broken prefactor: the printed normalization at u0 = 2.
    let drude2 = CouplingModel::drude(0.1, 10.0, 2.0)?;
    let nc = drude2.characteristic_wavenumber().expect("drude");
    let good = inversion_error(&drude2, InversionPrefactor::Consistent, 0.01 * nc, 10.0 * nc, 20)?;
    let broken = inversion_error(&drude2, InversionPrefactor::AsPrinted, 0.01 * nc, 10.0 * nc, 20)?;

    let caught = !wrong_d.passed() && refused && !wrong_t.passed() && broken > 1e-4;
    let measured = format!(
        "wrong d: {} cells fail (max |z| {:.0}); wrong T: refused {refused}, relabelled {} cells fail (max |z| {:.0}); printed prefactor error {broken:.2}",
        wrong_d.failed_cells(),
        wrong_d.max_abs_z(),
        wrong_t.failed_cells(),
        wrong_t.max_abs_z()
    );
    // The uncorrupted runs are reported for scale; they are gated by criteria 2 and 4.
    let mut out = Outcome::new(10, caught, measured)
        .note(format!(
            "uncorrupted ensemble (N = {n}): {} of {} cells beyond |z|=3, max |z| {:.2}",
            clean.failed_cells(),
            clean.cells.len(),
            clean.max_abs_z()
        ))
        .note(format!("consistent prefactor at u0 = 2: error {good:.1e}"));
    out.summaries = vec![clean, wrong_d, wrong_t];
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 2, 3, 6, 8] {
            let o = run(id, Effort::Quick);
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run(11, Effort::Quick).passed);
    }
}
