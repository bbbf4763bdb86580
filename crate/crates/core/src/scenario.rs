//! Scenario drivers: everything the command-line tool computes from a parsed
//! [`ScenarioConfig`], without touching the file system.

use crate::analysis::{fdr_check, EnsembleSummary, OriginWindow};
use crate::config::ScenarioConfig;
use crate::dynamics::{
    integrate_full, integrate_localized, integrate_ohmic_dde, response_table, solve_modes_laplace, weak_coupling_solution, Method,
    ModeSign, Provenance, ResponseTable, Trajectory,
};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::interaction::{induced_force, induced_potential};
use crate::kernels::{invert_kernel_to_coupling, Coupling, InversionPrefactor, KernelSource, KernelValue};
use crate::noise::{sample_bath, BathRealization, NoiseSeries};
use crate::verify::noise_ensemble;

/// Columns of a kernel table.
pub const KERNEL_COLUMNS: [&str; 5] = ["t", "chi", "chi_d", "chi_R", "chi_Z"];

/// Columns of a response table.
pub const RESPONSE_COLUMNS: [&str; 5] = ["t", "eta_plus", "xi_plus", "eta_minus", "xi_minus"];

fn smooth(v: KernelValue) -> Result<f64> {
    v.smooth().ok_or_else(|| Error::Unsupported("Ohmic kernels are delta distributions and cannot be tabulated".into()))
}

/// `χ`, `χ(·;d)`, `χ_R`, `χ_Z` on `grid` at the configured separation.
pub fn kernel_columns(cfg: &ScenarioConfig, grid: TimeGrid) -> Result<Vec<Vec<f64>>> {
    let model = cfg.model()?;
    let d = cfg.pair.d;
    let mut cols: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(grid.n)).collect();
    for t in grid.times() {
        let chi = smooth(model.kernel_chi(t)?)?;
        let chi_d = smooth(model.kernel_chi_d(t, d)?)?;
        let (r, z) = model.mode_kernels(t, d)?;
        for (col, v) in cols.iter_mut().zip([t, chi, chi_d, smooth(r)?, smooth(z)?]) {
            col.push(v);
        }
    }
    Ok(cols)
}

/// Columns of a coupling-inversion table.
pub const COUPLING_COLUMNS: [&str; 3] = ["nu", "g2", "g2_inverted"];

/// `g_ν²` next to the value recovered from the self kernel, at `n ≥ 2`
/// log-spaced wavenumbers over `[0.01, 10]` times the characteristic one.
pub fn coupling_columns(cfg: &ScenarioConfig, n: usize, prefactor: InversionPrefactor) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(Error::domain("at least 2 wavenumbers are needed"));
    }
    let model = cfg.model()?;
    let nu_char = model.characteristic_wavenumber().unwrap_or(1.0);
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for i in 0..n {
        let nu = nu_char * 10f64.powf(-2.0 + 3.0 * i as f64 / (n - 1) as f64);
        cols[0].push(nu);
        cols[1].push(model.coupling_strength_sq(nu)?);
        cols[2].push(invert_kernel_to_coupling(KernelSource::Model(&model), nu, prefactor)?);
    }
    Ok(cols)
}

/// `u₁₂`, `V`, `F` at `n ≥ 2` evenly spaced displacements in `[lo, hi]`.
pub fn potential_columns(cfg: &ScenarioConfig, lo: f64, hi: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    if !(lo < hi) || n < 2 {
        return Err(Error::domain(format!("need lo < hi and at least 2 points, got [{lo}, {hi}] with {n}")));
    }
    let model = cfg.model()?;
    let d = cfg.pair.d;
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
    for i in 0..n {
        let u = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        cols[0].push(u);
        cols[1].push(induced_potential(&model, u, d)?);
        cols[2].push(induced_force(&model, u, d)?);
    }
    Ok(cols)
}

/// FDR check of the configured bath against its targets.
pub fn noise_check(cfg: &ScenarioConfig) -> Result<EnsembleSummary> {
    let model = cfg.model()?;
    let thermal = cfg.thermal()?;
    let (modes, _) = cfg.mode_grid()?;
    let check = cfg.check.as_ref().ok_or_else(|| Error::Config(vec!["check: section required".into()]))?;
    let max_lag = check.lags.iter().cloned().fold(0.0, f64::max);
    let lag_steps = (max_lag / check.h).round() as usize;
    let grid = TimeGrid::new(check.h, lag_steps + check.origins)?;
    let window = OriginWindow { start: 0, end: check.origins };
    let d = cfg.pair.d;
    let ens = noise_ensemble(&model, &thermal, modes, check.seed, check.realizations, d, grid, window)?;
    let cut = check.band_limited_target.then_some(modes.nu_max);
    fdr_check(&model, &thermal, &ens, &check.lags, d, cut)
}

/// Realization `index` of the bath, if the scenario has one.
pub fn bath(cfg: &ScenarioConfig, index: u64) -> Result<Option<BathRealization>> {
    if cfg.thermal.is_none() {
        return Ok(None);
    }
    let (modes, strict) = cfg.mode_grid()?;
    let seed = cfg.solver_section()?.seed;
    Ok(Some(sample_bath(&cfg.model()?, &cfg.thermal()?, modes, seed, index, strict)?))
}

/// Trajectory of realization `index`. Without a thermal section the noise is zero.
pub fn simulate(cfg: &ScenarioConfig, index: u64) -> Result<Trajectory> {
    let model = cfg.model()?;
    let pair = cfg.pair()?;
    let solver = cfg.solver()?;
    let grid = solver.grid()?;
    let realization = bath(cfg, index)?;
    let noise = match &realization {
        Some(r) => r.noise_series(pair.d, grid),
        None => NoiseSeries::zeros(grid),
    };
    let mut tr = match solver.method {
        Method::VolterraFull => integrate_full(&model, &pair, realization.as_ref(), &solver)?,
        Method::Localized => integrate_localized(&model, &pair, &noise, &solver)?,
        Method::ModesLaplace => solve_modes_laplace(Some(&model), &pair, &noise, &solver)?,
        Method::OhmicDde => match model.coupling {
            Coupling::Ohmic { gamma } => integrate_ohmic_dde(gamma, model.u0, &pair, &noise, &solver)?,
            _ => return Err(Error::SolverConfig("ohmic_dde needs the ohmic family".into())),
        },
        Method::WeakCoupling => match model.coupling {
            Coupling::Ohmic { gamma } => {
                let (x1, x2) = weak_coupling_solution(gamma, model.u0, &pair, &noise, grid)?;
                // The series gives positions only; velocities are central differences.
                let (v1, v2) = (differentiate(&x1, grid.h), differentiate(&x2, grid.h));
                let provenance = Provenance { solver: Method::WeakCoupling.tag().into(), ..Default::default() };
                Trajectory { grid, x1, x2, v1, v2, r: None, z: None, f1: noise.f1, f2: noise.f2, provenance }
            }
            _ => return Err(Error::SolverConfig("weak_coupling needs the ohmic family".into())),
        },
    };
    tr.provenance.seed = realization.as_ref().map(|_| cfg.solver_section().map(|s| s.seed)).transpose()?;
    tr.provenance.realization = Some(index);
    tr.provenance.config_hash = Some(cfg.hash());
    tr.check_finite()?;
    Ok(tr)
}

fn differentiate(x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| match i {
            _ if n < 2 => 0.0,
            0 => (x[1] - x[0]) / h,
            _ if i == n - 1 => (x[i] - x[i - 1]) / h,
            _ => (x[i + 1] - x[i - 1]) / (2.0 * h),
        })
        .collect()
}

/// `(R, Z)` mode response tables on the solver grid.
pub fn responses(cfg: &ScenarioConfig) -> Result<(ResponseTable, ResponseTable)> {
    let model = cfg.model()?;
    let pair = cfg.pair()?;
    let solver = cfg.solver()?;
    let grid = solver.grid()?;
    let plus = response_table(Some(&model), &pair, ModeSign::Plus, grid, solver.laplace_nodes)?;
    let minus = response_table(Some(&model), &pair, ModeSign::Minus, grid, solver.laplace_nodes)?;
    Ok((plus, minus))
}

pub fn response_columns(plus: &ResponseTable, minus: &ResponseTable) -> Vec<Vec<f64>> {
    vec![plus.grid.times().collect(), plus.eta.clone(), plus.xi.clone(), minus.eta.clone(), minus.xi.clone()]
}
