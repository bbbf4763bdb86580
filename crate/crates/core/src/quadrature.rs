//! Numerical integration on finite, semi-infinite and oscillatory ranges.
//!
//! Three tools cover every integral the bath needs:
//! adaptive Gauss–Kronrod (7/15) on finite intervals, Gauss–Laguerre with a
//! node-doubling convergence test for exponentially weighted integrands, and
//! a period-by-period Fourier cosine integrator accelerated by Wynn's epsilon
//! algorithm for slowly decaying oscillatory tails.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn accepts(&self, err: f64, value: f64) -> bool {
        err <= self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-8, 1e-6)
    }
}

/// Tolerance used by the oracles: two orders tighter than anything they check.
pub const ORACLE_TOL: Tolerance = Tolerance::new(1e-13, 1e-11);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abserr: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, abserr: 0.0 });
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = kronrod15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while !tol.accepts(err, total) {
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { what: format!("adaptive Gauss-Kronrod on [{a}, {b}]"), estimate: err });
        }
        let (worst, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, v0, e0) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature { what: format!("interval [{lo}, {hi}] cannot be bisected further"), estimate: err });
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // Re-sum to shed the drift of the running updates.
    let value = intervals.iter().map(|iv| iv.2).sum();
    let abserr = intervals.iter().map(|iv| iv.3).sum();
    Ok(QuadResult { value, abserr })
}

/// Integral of `f` over `[a, inf)` through the map `x = a + (1 - u) / u`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    let g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = a + (1.0 - u) / u;
        let v = f(x) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// `∫_0^∞ f(x) cos(omega x) dx` for a decaying, non-oscillatory `f`.
///
/// Integrates half-periods `[kπ/ω, (k+1)π/ω]` one at a time and extrapolates
/// the alternating partial sums with Wynn's epsilon algorithm.
pub fn fourier_cos<F: Fn(f64) -> f64>(f: F, omega: f64, tol: Tolerance) -> Result<QuadResult> {
    let omega = omega.abs();
    if omega == 0.0 {
        return integrate_semi_infinite(f, 0.0, tol);
    }
    fourier_periods(|x| f(x) * (omega * x).cos(), omega, tol)
}

/// `∫_0^∞ f(x) sin(omega x) dx`, same method as [`fourier_cos`].
pub fn fourier_sin<F: Fn(f64) -> f64>(f: F, omega: f64, tol: Tolerance) -> Result<QuadResult> {
    if omega == 0.0 {
        return Ok(QuadResult { value: 0.0, abserr: 0.0 });
    }
    let sign = omega.signum();
    let omega = omega.abs();
    let r = fourier_periods(|x| f(x) * (omega * x).sin(), omega, tol)?;
    Ok(QuadResult { value: sign * r.value, abserr: r.abserr })
}

fn fourier_periods<F: Fn(f64) -> f64>(integrand: F, omega: f64, tol: Tolerance) -> Result<QuadResult> {
    const MAX_TERMS: usize = 400;
    const WINDOW: usize = 40;
    let period = std::f64::consts::PI / omega;
    let piece_tol = Tolerance::new(tol.abs * 1e-2, tol.rel * 1e-2);
    let mut sums: Vec<f64> = Vec::new();
    let mut running = 0.0;
    let mut last_estimate = f64::NAN;
    let mut scale = 0.0_f64;
    for k in 0..MAX_TERMS {
        let lo = k as f64 * period;
        let piece = integrate(&integrand, lo, lo + period, piece_tol)?;
        running += piece.value;
        scale = scale.max(piece.value.abs());
        sums.push(running);
        if sums.len() < 4 {
            continue;
        }
        let start = sums.len().saturating_sub(WINDOW);
        let estimate = wynn_epsilon(&sums[start..]);
        let tail_small = piece.value.abs() <= tol.abs * 1e-3 && k > 8;
        if tail_small {
            return Ok(QuadResult { value: running, abserr: piece.value.abs() });
        }
        let change = (estimate - last_estimate).abs();
        if change.is_finite() && change <= 0.1 * tol.abs.max(tol.rel * estimate.abs()) && k > 6 {
            return Ok(QuadResult { value: estimate, abserr: change });
        }
        last_estimate = estimate;
    }
    Err(Error::Quadrature { what: format!("Fourier cosine integral at omega = {omega}"), estimate: scale })
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n == 0 {
        return f64::NAN;
    }
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = seq.to_vec();
    let mut best = seq[n - 1];
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            if diff == 0.0 || !diff.is_finite() {
                // Converged (or broken) column: its last entry is the limit.
                return if column % 2 == 0 { cur[j + 1] } else { best };
            }
            next.push(prev[j + 1] + 1.0 / diff);
        }
        column += 1;
        if column % 2 == 0 {
            if let Some(&v) = next.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
        prev = cur;
        cur = next;
    }
    best
}

#[derive(Debug)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Laguerre rule (weight `e^{-x}` on `[0, ∞)`) by the Golub–Welsch method.
pub fn gauss_laguerre(n: usize) -> Arc<LaguerreRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LaguerreRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("laguerre cache").get(&n) {
        return rule.clone();
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jacobi[(i, i)] = (2 * i + 1) as f64;
        if i + 1 < n {
            let b = (i + 1) as f64;
            jacobi[(i, i + 1)] = b;
            jacobi[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rule = Arc::new(LaguerreRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() });
    cache.lock().expect("laguerre cache").insert(n, rule.clone());
    rule
}

/// `∫_0^∞ e^{-x} g(x) dx` by Gauss–Laguerre, doubling the node count from 16
/// until two successive rules agree.
pub fn laguerre_doubling<F: Fn(f64) -> f64>(g: F, tol: Tolerance) -> Result<QuadResult> {
    let apply = |n: usize| {
        let rule = gauss_laguerre(n);
        rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| w * g(x)).sum::<f64>()
    };
    let mut n = 16;
    let mut prev = apply(n);
    while n < 512 {
        n *= 2;
        let cur = apply(n);
        let diff = (cur - prev).abs();
        if tol.accepts(diff, cur) {
            return Ok(QuadResult { value: cur, abserr: diff });
        }
        prev = cur;
    }
    Err(Error::Quadrature { what: "Gauss-Laguerre node doubling reached 512 nodes".into(), estimate: f64::NAN })
}

/// `∫_0^∞ e^{-x} g(x) dx`: Gauss–Laguerre first, adaptive Gauss–Kronrod on
/// `[0, 60]` plus a mapped tail when `g` oscillates too fast for the rule.
pub fn exp_weighted<F: Fn(f64) -> f64>(g: F, tol: Tolerance) -> Result<QuadResult> {
    if let Ok(r) = laguerre_doubling(&g, tol) {
        return Ok(r);
    }
    let f = |x: f64| (-x).exp() * g(x);
    let head = integrate(f, 0.0, 60.0, tol)?;
    let tail = integrate_semi_infinite(f, 60.0, tol)?;
    Ok(QuadResult { value: head.value + tail.value, abserr: head.abserr + tail.abserr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let r = integrate_semi_infinite(|x| (-x * x).exp(), 0.0, ORACLE_TOL).unwrap();
        assert!((r.value - PI.sqrt() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn laguerre_rule_moments() {
        let rule = gauss_laguerre(32);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 1.0).abs() < 1e-13);
        // ∫ x^3 e^{-x} = 6
        let m3: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(3)).sum();
        assert!((m3 - 6.0).abs() < 1e-11);
    }

    #[test]
    fn laguerre_with_oscillation() {
        // ∫ s^2 e^{-s} cos(2 s) ds = Re 2/(1-2i)^3
        let exact = (num_complex::Complex64::new(2.0, 0.0) / num_complex::Complex64::new(1.0, -2.0).powi(3)).re;
        let r = laguerre_doubling(|s| s * s * (2.0 * s).cos(), ORACLE_TOL).unwrap();
        assert!((r.value - exact).abs() < 1e-12, "{} vs {exact}", r.value);
    }

    #[test]
    fn fourier_lorentzian() {
        // ∫ cos(bx)/(1+x^2) dx = (π/2) e^{-b}
        for &b in &[0.0, 0.3, 1.0, 4.0, 9.0] {
            let r = fourier_cos(|x| 1.0 / (1.0 + x * x), b, ORACLE_TOL).unwrap();
            let exact = PI / 2.0 * (-b).exp();
            assert!((r.value - exact).abs() < 1e-10, "b={b}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut s = 0.0;
        let sums: Vec<f64> = (1..=15)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-10);
    }
}
