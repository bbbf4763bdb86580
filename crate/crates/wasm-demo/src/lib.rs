//! Browser bindings: kernel tables, the induced potential and the mode
//! response functions, each returned as a JSON object of named columns.

use bathpair::config::ScenarioConfig;
use bathpair::grid::TimeGrid;
use bathpair::scenario::{self, KERNEL_COLUMNS, RESPONSE_COLUMNS};
use serde_json::{Map, Value};
use wasm_bindgen::prelude::*;

/// Scenario text for a family with two parameters `(p, q)`:
/// `exponential_cutoff` takes `(amplitude, cutoff)`, `drude` takes
/// `(gamma, omega_d)` and `ohmic` takes `(gamma, _)`.
fn scenario(family: &str, p: f64, q: f64, u0: f64, omega0: f64, d: f64) -> Result<ScenarioConfig, String> {
    let params = match family {
        "exponential_cutoff" => format!("amplitude = {p:?}\ncutoff = {q:?}"),
        "drude" => format!("gamma = {p:?}\nomega_d = {q:?}"),
        "ohmic" => format!("gamma = {p:?}"),
        other => return Err(format!("unknown family `{other}`")),
    };
    let text = format!("[model]\nfamily = \"{family}\"\n{params}\nu0 = {u0:?}\n\n[pair]\nomega0 = {omega0:?}\nd = {d:?}\n");
    ScenarioConfig::parse(&text, &[]).map_err(|e| e.to_string())
}

fn columns(names: &[&str], cols: Vec<Vec<f64>>) -> String {
    let map: Map<String, Value> = names.iter().zip(cols).map(|(n, c)| (n.to_string(), Value::from(c))).collect();
    Value::Object(map).to_string()
}

fn js<T>(r: Result<T, impl ToString>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// `t, chi, chi_d, chi_R, chi_Z` at `n` points on `[0, t_end]`.
#[wasm_bindgen]
pub fn kernel_table(family: &str, p: f64, q: f64, u0: f64, d: f64, t_end: f64, n: usize) -> Result<String, JsError> {
    let cfg = js(scenario(family, p, q, u0, 1.0, d))?;
    let grid = js(TimeGrid::new(t_end / (n.max(2) - 1) as f64, n.max(2)))?;
    Ok(columns(&KERNEL_COLUMNS, js(scenario::kernel_columns(&cfg, grid))?))
}

/// `u12, V, F` at `n` points on `[lo, hi]`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn potential(family: &str, p: f64, q: f64, u0: f64, d: f64, lo: f64, hi: f64, n: usize) -> Result<String, JsError> {
    let cfg = js(scenario(family, p, q, u0, 1.0, d))?;
    Ok(columns(&["u12", "V", "F"], js(scenario::potential_columns(&cfg, lo, hi, n))?))
}

/// `t, eta_plus, xi_plus, eta_minus, xi_minus` with step `h` up to `t_end`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn responses(family: &str, p: f64, q: f64, u0: f64, omega0: f64, d: f64, h: f64, t_end: f64) -> Result<String, JsError> {
    let mut cfg = js(scenario(family, p, q, u0, omega0, d))?;
    let method = if family == "ohmic" { "ohmic_dde" } else { "modes_laplace" };
    let solver = format!("[solver]\nmethod = \"{method}\"\nh = {h:?}\nt_end = {t_end:?}\n");
    cfg = js(ScenarioConfig::parse(&format!("{}\n{solver}", cfg.to_toml()), &[]))?;
    let (plus, minus) = js(scenario::responses(&cfg))?;
    Ok(columns(&RESPONSE_COLUMNS, scenario::response_columns(&plus, &minus)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_json_columns() {
        let v: Value = serde_json::from_str(&kernel_table("drude", 0.1, 10.0, 1.0, 2.0, 4.0, 5).unwrap()).unwrap();
        assert_eq!(v["t"].as_array().unwrap().len(), 5);
        let v: Value = serde_json::from_str(&potential("exponential_cutoff", 1.0, 1.0, 1.0, 2.0, 0.0, 4.0, 9).unwrap()).unwrap();
        assert_eq!(v["F"][4].as_f64().unwrap(), 0.0);
        let v: Value = serde_json::from_str(&responses("drude", 0.0, 10.0, 1.0, 2.0, 1.0, 0.1, 3.0).unwrap()).unwrap();
        let t = v["t"][30].as_f64().unwrap();
        assert!((v["eta_plus"][30].as_f64().unwrap() - (2.0 * t).sin() / 2.0).abs() < 1e-8);
    }
}
