//! Scenario files.
//!
//! A scenario is a TOML document with the sections `model`, `pair`,
//! `thermal`, `bath`, `solver`, `check` and `output`. Unknown keys are rejected. After
//! parsing, semantic validation reports every offending field at once.
//!
//! ```toml
//! [model]
//! family = "drude"      # exponential_cutoff | ohmic | drude
//! gamma = 0.1
//! omega_d = 10.0
//! u0 = 1.0
//!
//! [pair]
//! omega0 = 1.0
//! d = 2.0
//!
//! [solver]
//! method = "localized"
//! h = 0.01
//! t_end = 20.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{History, InitialConditions, MassConvention, Method, SolverConfig};
use crate::error::{Error, Result};
use crate::interaction::OscillatorPair;
use crate::kernels::{Coupling, CouplingModel};
use crate::noise::{ModeGrid, NoiseMode, ThermalState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ExponentialCutoff,
    Ohmic,
    Drude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_d: Option<f64>,
    #[serde(default = "one")]
    pub u0: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSection {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub omega0: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    pub kt: f64,
    #[serde(default)]
    pub hbar: f64,
    #[serde(default = "classical")]
    pub mode: NoiseMode,
}

fn classical() -> NoiseMode {
    NoiseMode::Classical
}

/// Discretization of the bath modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub nu_max: f64,
    pub n_modes: usize,
    /// Refuse grids that drop more than 1% of the spectral weight.
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub method: Method,
    pub h: f64,
    pub t_end: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub n_realizations: usize,
    #[serde(default)]
    pub history: History,
    #[serde(default)]
    pub mass_convention: MassConvention,
    #[serde(default)]
    pub dynamic_noise_phase: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_window: Option<f64>,
    #[serde(default = "nodes")]
    pub laplace_nodes: usize,
    #[serde(default = "sweeps")]
    pub corrector_sweeps: usize,
    #[serde(default)]
    pub initial: InitialConditions,
}

fn one_usize() -> usize {
    1
}

fn nodes() -> usize {
    32
}

fn sweeps() -> usize {
    2
}

/// Lags and thresholds for `noise-check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub lags: Vec<f64>,
    /// Sampling step of the noise series the lags are read from.
    pub h: f64,
    /// Number of time origins averaged per realization.
    #[serde(default = "one_usize")]
    pub origins: usize,
    /// Restrict the target integral to the sampled band.
    #[serde(default)]
    pub band_limited_target: bool,
    #[serde(default = "check_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
}

fn check_realizations() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_dir(), formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub pair: PairSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal: Option<ThermalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Parse a `section.key=value` override value as a TOML scalar or array,
/// falling back to a bare string.
fn override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> std::result::Result<(), String> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| format!("override `{spec}` is not of the form section.key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("override `{spec}` has an empty key"));
    }
    let mut cur = table;
    for k in &keys[..keys.len() - 1] {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| format!("override `{spec}`: `{k}` is not a section"))?;
    }
    cur.insert(keys[keys.len() - 1].to_string(), override_value(raw.trim()));
    Ok(())
}

fn positive(errors: &mut Vec<String>, field: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        errors.push(format!("{field}: must be positive and finite, got {v}"));
    }
}

fn nonnegative(errors: &mut Vec<String>, field: &str, v: f64) {
    if !(v >= 0.0 && v.is_finite()) {
        errors.push(format!("{field}: must be non-negative and finite, got {v}"));
    }
}

fn required(errors: &mut Vec<String>, field: &str, family: &str, v: Option<f64>) -> f64 {
    match v {
        Some(x) => x,
        None => {
            errors.push(format!("{field}: required for family {family}"));
            f64::NAN
        }
    }
}

fn forbidden(errors: &mut Vec<String>, field: &str, family: &str, v: Option<f64>) {
    if v.is_some() {
        errors.push(format!("{field}: not a parameter of family {family}"));
    }
}

impl ScenarioConfig {
    /// Parse TOML text, apply overrides, then validate every field.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let cfg: ScenarioConfig = if overrides.is_empty() {
            // Straight from the text so syntax and type errors keep their line anchors.
            toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?
        } else {
            let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
            let errs: Vec<String> = overrides.iter().filter_map(|o| apply_override(&mut table, o).err()).collect();
            if !errs.is_empty() {
                return Err(Error::Config(errs));
            }
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, overrides).map_err(|e| match e {
            Error::Config(msgs) => Error::Config(msgs.into_iter().map(|m| format!("{}: {m}", path.display())).collect()),
            other => other,
        })
    }

    /// All field-level problems, or `Ok`.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        self.model_checked(&mut errors);
        let p = &self.pair;
        positive(&mut errors, "pair.mass", p.mass);
        positive(&mut errors, "pair.omega0", p.omega0);
        nonnegative(&mut errors, "pair.d", p.d);
        if let Some(t) = &self.thermal {
            nonnegative(&mut errors, "thermal.kt", t.kt);
            nonnegative(&mut errors, "thermal.hbar", t.hbar);
            if t.mode == NoiseMode::Quantum && t.hbar == 0.0 {
                errors.push("thermal.hbar: quantum mode needs hbar > 0".into());
            }
        }
        if let Some(b) = &self.bath {
            positive(&mut errors, "bath.nu_max", b.nu_max);
            if b.n_modes < 2 {
                errors.push(format!("bath.n_modes: need at least 2, got {}", b.n_modes));
            }
        }
        if let Some(s) = &self.solver {
            positive(&mut errors, "solver.h", s.h);
            positive(&mut errors, "solver.t_end", s.t_end);
            if s.h > 0.0 && s.t_end < s.h {
                errors.push(format!("solver.t_end: must be at least h = {}", s.h));
            }
            if s.n_realizations == 0 {
                errors.push("solver.n_realizations: must be at least 1".into());
            }
            if let Some(w) = s.memory_window {
                positive(&mut errors, "solver.memory_window", w);
            }
            if s.laplace_nodes < 8 {
                errors.push(format!("solver.laplace_nodes: need at least 8, got {}", s.laplace_nodes));
            }
            if s.mass_convention == MassConvention::ExplicitM && s.method != Method::VolterraFull {
                errors.push("solver.mass_convention: explicit_m applies to the volterra_full method only".into());
            }
            let ohmic = self.model.family == Family::Ohmic;
            if s.method == Method::OhmicDde && !ohmic {
                errors.push("solver.method: ohmic_dde needs model.family = \"ohmic\"".into());
            }
            if s.method == Method::WeakCoupling && !ohmic {
                errors.push("solver.method: weak_coupling needs model.family = \"ohmic\"".into());
            }
            if s.method == Method::VolterraFull && ohmic {
                errors.push("solver.method: volterra_full needs smooth kernels (not ohmic)".into());
            }
            if s.method == Method::OhmicDde && p.d > 0.0 && s.h > 0.0 && s.h > p.d / self.model.u0 / 10.0 {
                errors.push(format!("solver.h: must resolve the delay, h <= tau/10 = {}", p.d / self.model.u0 / 10.0));
            }
        }
        if let Some(c) = &self.check {
            positive(&mut errors, "check.h", c.h);
            if c.lags.is_empty() {
                errors.push("check.lags: at least one lag is needed".into());
            }
            for (i, &l) in c.lags.iter().enumerate() {
                nonnegative(&mut errors, &format!("check.lags[{i}]"), l);
                if c.h > 0.0 && ((l / c.h) - (l / c.h).round()).abs() > 1e-6 {
                    errors.push(format!("check.lags[{i}]: {l} is not a multiple of check.h = {}", c.h));
                }
            }
            if c.origins == 0 {
                errors.push("check.origins: must be at least 1".into());
            }
            if c.realizations < 2 {
                errors.push("check.realizations: at least 2 are needed for error bars".into());
            }
        }
        if self.output.directory.is_empty() {
            errors.push("output.directory: must not be empty".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    fn model_checked(&self, errors: &mut Vec<String>) -> Option<CouplingModel> {
        let m = &self.model;
        positive(errors, "model.u0", m.u0);
        let before = errors.len();
        let coupling = match m.family {
            Family::ExponentialCutoff => {
                let name = "exponential_cutoff";
                let a = required(errors, "model.amplitude", name, m.amplitude);
                let c = required(errors, "model.cutoff", name, m.cutoff);
                forbidden(errors, "model.gamma", name, m.gamma);
                forbidden(errors, "model.omega_d", name, m.omega_d);
                if a.is_finite() {
                    nonnegative(errors, "model.amplitude", a);
                }
                if c.is_finite() {
                    positive(errors, "model.cutoff", c);
                }
                Coupling::ExponentialCutoff { amplitude: a, cutoff: c }
            }
            Family::Ohmic => {
                let g = required(errors, "model.gamma", "ohmic", m.gamma);
                forbidden(errors, "model.amplitude", "ohmic", m.amplitude);
                forbidden(errors, "model.cutoff", "ohmic", m.cutoff);
                forbidden(errors, "model.omega_d", "ohmic", m.omega_d);
                if g.is_finite() {
                    nonnegative(errors, "model.gamma", g);
                }
                Coupling::Ohmic { gamma: g }
            }
            Family::Drude => {
                let g = required(errors, "model.gamma", "drude", m.gamma);
                let w = required(errors, "model.omega_d", "drude", m.omega_d);
                forbidden(errors, "model.amplitude", "drude", m.amplitude);
                forbidden(errors, "model.cutoff", "drude", m.cutoff);
                if g.is_finite() {
                    nonnegative(errors, "model.gamma", g);
                }
                if w.is_finite() {
                    positive(errors, "model.omega_d", w);
                }
                Coupling::Drude { gamma: g, omega_d: w }
            }
        };
        (errors.len() == before).then_some(CouplingModel { coupling, u0: m.u0 })
    }

    pub fn model(&self) -> Result<CouplingModel> {
        let mut errors = Vec::new();
        self.model_checked(&mut errors).ok_or(Error::Config(errors))
    }

    pub fn pair(&self) -> Result<OscillatorPair> {
        OscillatorPair::new(self.pair.mass, self.pair.omega0, self.pair.d)
    }

    pub fn thermal(&self) -> Result<ThermalState> {
        let t = self.thermal.as_ref().ok_or_else(|| Error::Config(vec!["thermal: section required".into()]))?;
        ThermalState::new(t.kt, t.hbar, t.mode)
    }

    pub fn mode_grid(&self) -> Result<(ModeGrid, bool)> {
        let b = self.bath.as_ref().ok_or_else(|| Error::Config(vec!["bath: section required".into()]))?;
        Ok((ModeGrid::new(b.nu_max, b.n_modes)?, b.strict))
    }

    pub fn solver_section(&self) -> Result<&SolverSection> {
        self.solver.as_ref().ok_or_else(|| Error::Config(vec!["solver: section required".into()]))
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        let s = self.solver_section()?;
        let mut cfg = SolverConfig::new(s.h, s.t_end, s.method).with_initial(s.initial);
        cfg.history = s.history;
        cfg.mass_convention = s.mass_convention;
        cfg.dynamic_noise_phase = s.dynamic_noise_phase;
        cfg.memory_window = s.memory_window;
        cfg.laplace_nodes = s.laplace_nodes;
        cfg.corrector_sweeps = s.corrector_sweeps;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical form: JSON with sorted keys and defaults filled in.
    pub fn canonical(&self) -> String {
        serde_json::to_string(&serde_json::to_value(self).expect("config serializes")).expect("json")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DRUDE: &str = r#"
[model]
family = "drude"
gamma = 0.1
omega_d = 10.0

[pair]
d = 2.0

[solver]
method = "localized"
h = 0.01
t_end = 20.0
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ScenarioConfig::parse(DRUDE, &[]).unwrap();
        assert_eq!(c.model.u0, 1.0);
        assert_eq!(c.solver().unwrap().laplace_nodes, 32);
        assert_eq!(c.model().unwrap(), CouplingModel::drude(0.1, 10.0, 1.0).unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = DRUDE.replace("d = 2.0", "d = 2.0\nspeed = 3");
        let err = ScenarioConfig::parse(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("speed"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn field_errors_are_collected() {
        let text = DRUDE.replace("gamma = 0.1", "gamma = -1.0\ncutoff = 2.0").replace("h = 0.01", "h = 0.0");
        match ScenarioConfig::parse(&text, &[]) {
            Err(Error::Config(errs)) => {
                assert!(errs.iter().any(|e| e.starts_with("model.gamma")));
                assert!(errs.iter().any(|e| e.starts_with("model.cutoff")));
                assert!(errs.iter().any(|e| e.starts_with("solver.h")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_key_order_and_round_trips() {
        let a = ScenarioConfig::parse(DRUDE, &[]).unwrap();
        let reordered = "[pair]\nd = 2.0\n[solver]\nt_end = 20.0\nh = 0.01\nmethod = \"localized\"\n[model]\nomega_d = 10.0\ngamma = 0.1\nfamily = \"drude\"\n";
        let b = ScenarioConfig::parse(reordered, &[]).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ScenarioConfig::parse(&a.to_toml(), &[]).unwrap();
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn overrides_apply_before_validation() {
        let c = ScenarioConfig::parse(DRUDE, &["pair.d=0.5".into(), "solver.method=modes_laplace".into()]).unwrap();
        assert_eq!(c.pair.d, 0.5);
        assert_eq!(c.solver().unwrap().method, Method::ModesLaplace);
        assert!(ScenarioConfig::parse(DRUDE, &["pair.d=-1".into()]).is_err());
        assert!(ScenarioConfig::parse(DRUDE, &["nonsense".into()]).is_err());
    }
}
