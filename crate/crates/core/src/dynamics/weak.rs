//! Green's function of the oscillator with friction `γ/2` and the
//! first-order weak-coupling solution of the Ohmic delay equations.

use crate::error::{Error, Result};
use crate::grid::{interpolate_cubic, TimeGrid};
use crate::interaction::OscillatorPair;
use crate::noise::NoiseSeries;

/// `(G, Ġ, G̈)` for `G̈ + (γ/2)Ġ + ω₀²G = δ(t)`, causal.
///
/// Underdamped: `G = e^{-γt/4} sin(Ωt/4)/(Ω/4)` with `Ω/4 = √(ω₀² - γ²/16)`;
/// the overdamped branch uses `sinh`, the critical one `t e^{-γt/4}`.
pub fn greens_derivatives(gamma: f64, omega0: f64, t: f64) -> (f64, f64, f64) {
    if t < 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let a = 0.25 * gamma;
    let disc = omega0 * omega0 - a * a;
    let e = (-a * t).exp();
    if disc > 0.0 {
        let w = disc.sqrt();
        let (s, c) = (w * t).sin_cos();
        (e * s / w, e * (c - a * s / w), e * ((a * a - w * w) * s / w - 2.0 * a * c))
    } else if disc < 0.0 {
        let w = (-disc).sqrt();
        let (s, c) = ((w * t).sinh(), (w * t).cosh());
        (e * s / w, e * (c - a * s / w), e * ((a * a + w * w) * s / w - 2.0 * a * c))
    } else {
        (t * e, e * (1.0 - a * t), e * (a * a * t - 2.0 * a))
    }
}

pub fn greens_function(gamma: f64, omega0: f64, t: f64) -> f64 {
    greens_derivatives(gamma, omega0, t).0
}

/// Quadrature weights on `[0, t_i]` (`i` intervals): third-order Gregory
/// end corrections when at least six intervals exist, Simpson or trapezoid below.
fn weights(i: usize) -> Vec<f64> {
    let mut w = vec![1.0; i + 1];
    match i {
        0 => w[0] = 0.0,
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        2 => {
            w = vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        }
        3..=5 => {
            // Trapezoid with the O(h²) end correction from one-sided differences.
            w[0] = 0.5;
            w[i] = 0.5;
            let c = 1.0 / 12.0;
            // -h²/12 (g'(b) - g'(a)) with second-order one-sided differences
            w[i] -= c * 1.5;
            w[i - 1] += c * 2.0;
            w[i - 2] -= c * 0.5;
            w[0] -= c * 1.5;
            w[1] += c * 2.0;
            w[2] -= c * 0.5;
        }
        _ => {
            let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
            for (k, &e) in ends.iter().enumerate() {
                w[k] = e;
                w[i - k] = e;
            }
        }
    }
    w
}

/// `(k * f)(t_i) = ∫₀^{t_i} k(t_i - t') f(t') dt'` on the grid.
fn convolve(kernel: &[f64], f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let w = weights(i);
            h * (0..=i).map(|j| w[j] * kernel[i - j] * f[j]).sum::<f64>()
        })
        .collect()
}

/// Solution of the Ohmic delay equations to first order in `γ`, zero initial data:
///
/// ```text
/// x₁(t) = ∫₀^t G(t-t') f₁(t') dt' - (γ/2) ∫₀^t G(t-t') ẋ₂⁽⁰⁾(t'-τ₀) dt',
/// ẋ₂⁽⁰⁾(t) = ∫₀^t Ġ(t-t'') f₂(t'') dt''
/// ```
///
/// and `1 ↔ 2`. `ẋ⁽⁰⁾` vanishes at negative arguments.
pub fn weak_coupling_solution(
    gamma: f64,
    u0: f64,
    pair: &OscillatorPair,
    noise: &NoiseSeries,
    grid: TimeGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    pair.validate()?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be non-negative, got {gamma}")));
    }
    if !(u0 > 0.0) {
        return Err(Error::domain(format!("u0 must be positive, got {u0}")));
    }
    noise.check_grid(&grid)?;
    let h = grid.h;
    let tau = pair.delay(u0);
    let (g, gd): (Vec<f64>, Vec<f64>) = grid
        .times()
        .map(|t| {
            let (g, gd, _) = greens_derivatives(gamma, pair.omega0, t);
            (g, gd)
        })
        .unzip();
    let f1 = &noise.f1[..grid.n];
    let f2 = &noise.f2[..grid.n];
    let y1 = convolve(&g, f1, h);
    let y2 = convolve(&g, f2, h);
    let w1 = convolve(&gd, f1, h);
    let w2 = convolve(&gd, f2, h);
    let shift = |w: &[f64]| -> Vec<f64> {
        grid.times()
            .map(|t| {
                let s = t - tau;
                if s < -1e-9 * h {
                    0.0
                } else {
                    let k = (s / h).round();
                    if (s / h - k).abs() < 1e-9 {
                        w[k as usize]
                    } else {
                        interpolate_cubic(w, h, s)
                    }
                }
            })
            .collect()
    };
    let c1 = convolve(&g, &shift(&w2), h);
    let c2 = convolve(&g, &shift(&w1), h);
    let x1 = y1.iter().zip(&c1).map(|(y, c)| y - 0.5 * gamma * c).collect();
    let x2 = y2.iter().zip(&c2).map(|(y, c)| y - 0.5 * gamma * c).collect();
    Ok((x1, x2))
}
