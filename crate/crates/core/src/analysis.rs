//! Ensemble statistics: covariance estimates with jackknife errors, the FDR
//! check, equipartition and the retardation onset.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::interaction::OscillatorPair;
use crate::kernels::CouplingModel;
use crate::noise::{fdr_target, NoiseMode, Pair, ThermalState};

/// Default |z| beyond which a cell counts as failed.
pub const Z_THRESHOLD: f64 = 3.0;
/// Fraction of failed cells an ensemble check tolerates.
pub const MAX_FAIL_FRACTION: f64 = 0.01;

/// Mean and jackknife standard error of per-realization values.
pub fn jackknife(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientRealizations { needed: 2, got: n });
    }
    let total: f64 = values.iter().sum();
    let mean = total / n as f64;
    let nf = n as f64;
    let leave_out = values.iter().map(|v| (total - v) / (nf - 1.0));
    let var = leave_out.map(|m| (m - mean) * (m - mean)).sum::<f64>() * (nf - 1.0) / nf;
    Ok((mean, var.sqrt()))
}

/// Stationary window of time origins, as grid indices `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginWindow {
    pub start: usize,
    pub end: usize,
}

impl OriginWindow {
    /// A single origin: the pure ensemble estimator at one reference time.
    pub fn single(index: usize) -> Self {
        Self { start: index, end: index + 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub lag: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// Zero spread across realizations: no error bar can be formed.
    pub degenerate: bool,
}

fn lag_steps(lag: f64, h: f64) -> Result<usize> {
    if !(lag >= 0.0) {
        return Err(Error::domain(format!("lags must be non-negative, got {lag}")));
    }
    let k = (lag / h).round();
    if (lag / h - k).abs() > 1e-6 {
        return Err(Error::GridMismatch(format!("lag {lag} is not a multiple of the sampling step {h}")));
    }
    Ok(k as usize)
}

fn check_ensemble(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("ensembles of {} and {} realizations", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientRealizations { needed: 2, got: a.len() });
    }
    let len = a[0].len();
    if a.iter().chain(b).any(|s| s.len() != len) {
        return Err(Error::GridMismatch("series of unequal length in the ensemble".into()));
    }
    Ok(len)
}

fn covariance_with(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    h: f64,
    lags: &[f64],
    window: OriginWindow,
    product: impl Fn(f64, f64) -> f64,
) -> Result<Vec<CovarianceEstimate>> {
    let len = check_ensemble(a, b)?;
    lags.iter()
        .map(|&lag| {
            let k = lag_steps(lag, h)?;
            let end = window.end.min(len.saturating_sub(k));
            if end <= window.start {
                return Err(Error::GridMismatch(format!("lag {lag} leaves no time origin inside the series")));
            }
            let count = (end - window.start) as f64;
            let per: Vec<f64> =
                a.iter().zip(b).map(|(x, y)| (window.start..end).map(|o| product(x[o + k], y[o])).sum::<f64>() / count).collect();
            let (estimate, stderr) = jackknife(&per)?;
            Ok(CovarianceEstimate { lag, estimate, stderr, degenerate: stderr == 0.0 })
        })
        .collect()
}

/// `⟨[a(t+Δt) b(t) + b(t) a(t+Δt)]/2⟩`, averaged over realizations and over
/// the origins `t` in `window`, with jackknife errors over realizations.
/// No mean is subtracted: the moment is taken about zero.
pub fn symmetrized_covariance(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    h: f64,
    lags: &[f64],
    window: OriginWindow,
) -> Result<Vec<CovarianceEstimate>> {
    covariance_with(a, b, h, lags, window, |x, y| 0.5 * (x * y + y * x))
}

/// The plain product average `⟨a(t+Δt) b(t)⟩`; for commuting samples
/// identical to [`symmetrized_covariance`].
pub fn plain_covariance(a: &[Vec<f64>], b: &[Vec<f64>], h: f64, lags: &[f64], window: OriginWindow) -> Result<Vec<CovarianceEstimate>> {
    covariance_with(a, b, h, lags, window, |x, y| x * y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub pair: String,
    pub lag: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub z: f64,
}

impl Cell {
    pub fn new(pair: impl Into<String>, lag: f64, estimate: f64, stderr: f64, target: f64) -> Self {
        let diff = estimate - target;
        let z = if stderr > 0.0 {
            diff / stderr
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Self { pair: pair.into(), lag, estimate, stderr, target, z }
    }

    pub fn failed(&self, threshold: f64) -> bool {
        !(self.z.abs() <= threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub check: String,
    pub model: String,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub cells: Vec<Cell>,
    pub verdict: Verdict,
    pub n_realizations: usize,
    pub z_threshold: f64,
    pub max_fail_fraction: f64,
    pub seeds: Vec<u64>,
    pub config_hash: Option<String>,
    pub notes: Vec<String>,
}

impl EnsembleSummary {
    pub fn new(check: &str, model: String, n_realizations: usize, cells: Vec<Cell>) -> Self {
        let mut s = Self {
            check: check.into(),
            model,
            params: serde_json::Map::new(),
            cells,
            verdict: Verdict::Fail,
            n_realizations,
            z_threshold: Z_THRESHOLD,
            max_fail_fraction: MAX_FAIL_FRACTION,
            seeds: Vec::new(),
            config_hash: None,
            notes: Vec::new(),
        };
        s.decide();
        s
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.failed(self.z_threshold)).count()
    }

    /// Pass when the failed fraction is within `max_fail_fraction`.
    pub fn decide(&mut self) {
        let failed = self.failed_cells() as f64;
        let allowed = self.max_fail_fraction * self.cells.len() as f64;
        self.verdict = if failed <= allowed { Verdict::Pass } else { Verdict::Fail };
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn max_abs_z(&self) -> f64 {
        self.cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Noise samples from one ensemble, with the provenance that fixes its target.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEnsemble {
    pub model_tag: String,
    pub thermal_tag: String,
    /// Separation the `f₂` phases were evaluated at.
    pub d: f64,
    pub h: f64,
    pub f1: Vec<Vec<f64>>,
    pub f2: Vec<Vec<f64>>,
    pub seeds: Vec<u64>,
    pub window: OriginWindow,
    /// Wavenumber cutoff of the sampled spectrum.
    pub nu_max: f64,
}

/// Compare an ensemble with the FDR targets at every `(pair, lag)` cell.
///
/// `d` is the separation the targets are computed for; `nu_cut` optionally
/// restricts the target integral to the sampled band. Refuses ensembles
/// drawn from another model or thermal state.
pub fn fdr_check(
    model: &CouplingModel,
    thermal: &ThermalState,
    ensemble: &NoiseEnsemble,
    lags: &[f64],
    d: f64,
    nu_cut: Option<f64>,
) -> Result<EnsembleSummary> {
    if ensemble.model_tag != model.tag() {
        return Err(Error::ProvenanceMismatch(format!(
            "ensemble drawn from {} but the target model is {}",
            ensemble.model_tag,
            model.tag()
        )));
    }
    if ensemble.thermal_tag != thermal.tag() {
        return Err(Error::ProvenanceMismatch(format!(
            "ensemble drawn at {} but the target thermal state is {}",
            ensemble.thermal_tag,
            thermal.tag()
        )));
    }
    let mut cells = Vec::with_capacity(3 * lags.len());
    for pair in Pair::ALL {
        let (a, b) = match pair {
            Pair::P11 => (&ensemble.f1, &ensemble.f1),
            Pair::P22 => (&ensemble.f2, &ensemble.f2),
            Pair::P12 => (&ensemble.f1, &ensemble.f2),
        };
        let est = symmetrized_covariance(a, b, ensemble.h, lags, ensemble.window)?;
        for e in est {
            let target = fdr_target(model, thermal, e.lag, pair, d, nu_cut)?;
            cells.push(Cell::new(pair.label(), e.lag, e.estimate, e.stderr, target));
        }
    }
    let mut summary = EnsembleSummary::new("fdr", model.tag(), ensemble.f1.len(), cells)
        .param("kt", thermal.kt)
        .param("hbar", thermal.hbar)
        .param("thermal", thermal.tag())
        .param("d_target", d)
        .param("d_ensemble", ensemble.d)
        .param("nu_max", ensemble.nu_max)
        .param("nu_cut", nu_cut);
    summary.seeds = ensemble.seeds.clone();
    Ok(summary)
}

/// Time averages of `R², Z², Ṙ², Ż²` over one trajectory after burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMoments {
    pub r2: f64,
    pub z2: f64,
    pub rdot2: f64,
    pub zdot2: f64,
    pub samples: usize,
}

impl ModeMoments {
    pub fn from_trajectory(tr: &Trajectory, burn_in: f64) -> Result<Self> {
        let start = (burn_in / tr.grid.h).ceil() as usize;
        if start >= tr.grid.n {
            return Err(Error::GridMismatch(format!("burn-in {burn_in} covers the whole trajectory")));
        }
        let (r, z) = tr.modes();
        let (vr, vz) = tr.mode_velocities();
        let n = (tr.grid.n - start) as f64;
        let mean_sq = |s: &[f64]| s[start..].iter().map(|v| v * v).sum::<f64>() / n;
        Ok(Self { r2: mean_sq(&r), z2: mean_sq(&z), rdot2: mean_sq(&vr), zdot2: mean_sq(&vz), samples: tr.grid.n - start })
    }
}

/// Compare long-run mode moments with equipartition (unit mass):
/// `⟨R²⟩ = k_BT/(2ω₀²)`, `⟨Z²⟩ = 2k_BT/ω₀²`, `⟨Ṙ²⟩ = k_BT/2`, `⟨Ż²⟩ = 2k_BT`.
pub fn equipartition_check(moments: &[ModeMoments], thermal: &ThermalState, pair: &OscillatorPair) -> Result<EnsembleSummary> {
    if thermal.mode == NoiseMode::Quantum {
        return Err(Error::Unsupported("equipartition targets hold for the classical bath only".into()));
    }
    let kt = thermal.kt;
    let w2 = pair.omega0 * pair.omega0;
    type Moment = fn(&ModeMoments) -> f64;
    let rows: [(&str, f64, Moment); 4] = [
        ("RR", kt / (2.0 * w2), |m| m.r2),
        ("ZZ", 2.0 * kt / w2, |m| m.z2),
        ("RdotRdot", kt / 2.0, |m| m.rdot2),
        ("ZdotZdot", 2.0 * kt, |m| m.zdot2),
    ];
    let mut cells = Vec::new();
    for (label, target, get) in rows {
        let values: Vec<f64> = moments.iter().map(get).collect();
        let (mean, se) = jackknife(&values)?;
        cells.push(Cell::new(label, 0.0, mean, se, target));
    }
    // Four cells: any failure fails the check.
    let mut s = EnsembleSummary::new("equipartition", String::new(), moments.len(), cells)
        .param("kt", kt)
        .param("omega0", pair.omega0)
        .param("d", pair.d);
    s.max_fail_fraction = 0.0;
    s.decide();
    Ok(s)
}

/// First grid time with `|x₂| > eps`; `+∞` when the threshold is never crossed.
pub fn retardation_onset(tr: &Trajectory, eps: f64) -> f64 {
    tr.x2.iter().position(|x| x.abs() > eps).map_or(f64::INFINITY, |i| tr.grid.t(i))
}

/// `|x₂|` sampled on `[0, t_max]` every `stride` steps, for reports on smooth kernels.
pub fn amplitude_profile(tr: &Trajectory, t_max: f64, stride: usize) -> Vec<(f64, f64)> {
    let stride = stride.max(1);
    (0..tr.grid.n).step_by(stride).map(|i| (tr.grid.t(i), tr.x2[i].abs())).take_while(|(t, _)| *t <= t_max + 1e-12).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_degenerate() {
        let a = vec![vec![2.0; 10]; 5];
        let e = symmetrized_covariance(&a, &a, 0.1, &[0.0, 0.3], OriginWindow { start: 0, end: 5 }).unwrap();
        for c in e {
            assert_eq!(c.estimate, 4.0);
            assert_eq!(c.stderr, 0.0);
            assert!(c.degenerate);
        }
    }

    #[test]
    fn single_realization_rejected() {
        let a = vec![vec![1.0; 4]];
        assert!(matches!(
            symmetrized_covariance(&a, &a, 1.0, &[0.0], OriginWindow::single(0)),
            Err(Error::InsufficientRealizations { .. })
        ));
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let v = [1.0, 2.0, 4.0, 7.0];
        let (m, se) = jackknife(&v).unwrap();
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 3.0;
        assert!((se - (var / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn off_grid_lag_rejected() {
        let a = vec![vec![1.0; 10]; 3];
        assert!(symmetrized_covariance(&a, &a, 0.1, &[0.15], OriginWindow::single(0)).is_err());
    }
}
