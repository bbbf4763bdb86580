//! Ohmic delay equations
//! `ẍ_i + ω₀²x_i + (γ/2)ẋ_i = f_i - (γ/2)ẋ_j(t - τ₀)`,
//! integrated by the method of steps with a classical RK4 step.

use super::{History, Method, Provenance, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::grid::interpolate_cubic;
use crate::interaction::OscillatorPair;
use crate::noise::{NoiseSeries, NoiseSource};

type State = [f64; 4];

fn axpy(a: &State, k: &State, s: f64) -> State {
    [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2], a[3] + s * k[3]]
}

/// Integrate the Ohmic pair. At `d = 0` the delayed cross friction becomes
/// instantaneous and the system is an ordinary ODE with friction `γ/2` on
/// each velocity.
pub fn integrate_ohmic_dde(gamma: f64, u0: f64, pair: &OscillatorPair, noise: &NoiseSeries, cfg: &SolverConfig) -> Result<Trajectory> {
    pair.validate()?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be non-negative, got {gamma}")));
    }
    if !(u0 > 0.0 && u0.is_finite()) {
        return Err(Error::domain(format!("u0 must be positive, got {u0}")));
    }
    let grid = cfg.grid()?;
    noise.check_grid(&grid)?;
    let h = grid.h;
    let tau = pair.delay(u0);
    if tau > 0.0 && h > tau / 10.0 {
        return Err(Error::SolverConfig(format!("time step h = {h} does not resolve the delay tau = {tau}; need h <= tau/10")));
    }
    let w2 = pair.omega0 * pair.omega0;
    let g2 = 0.5 * gamma;
    let ic = cfg.initial;
    let history = cfg.history;
    let tol = 1e-9 * h;

    let n = grid.n;
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut v1 = Vec::with_capacity(n);
    let mut v2 = Vec::with_capacity(n);
    let mut y: State = [ic.x1, ic.v1, ic.x2, ic.v2];
    x1.push(y[0]);
    v1.push(y[1]);
    x2.push(y[2]);
    v2.push(y[3]);

    for step in 0..n - 1 {
        let t0 = grid.t(step);
        let before_front = t0 < tau - tol;
        // Delayed velocities (v₁, v₂) at time t - τ.
        let delayed = |v1: &[f64], v2: &[f64], t: f64| -> [f64; 2] {
            let s = t - tau;
            let past = s < -tol || (s.abs() <= tol && before_front);
            if past {
                match history {
                    History::AtRest => [0.0, 0.0],
                    History::Uniform => [ic.v1, ic.v2],
                }
            } else {
                [interpolate_cubic(v1, h, s.max(0.0)), interpolate_cubic(v2, h, s.max(0.0))]
            }
        };
        let rhs = |t: f64, y: &State, v1h: &[f64], v2h: &[f64]| -> State {
            let f = noise.forces(t);
            let (c1, c2) = if tau == 0.0 {
                (g2 * y[3], g2 * y[1])
            } else {
                let dv = delayed(v1h, v2h, t);
                (g2 * dv[1], g2 * dv[0])
            };
            [y[1], f[0] - w2 * y[0] - g2 * y[1] - c1, y[3], f[1] - w2 * y[2] - g2 * y[3] - c2]
        };
        let k1 = rhs(t0, &y, &v1, &v2);
        let k2 = rhs(t0 + 0.5 * h, &axpy(&y, &k1, 0.5 * h), &v1, &v2);
        let k3 = rhs(t0 + 0.5 * h, &axpy(&y, &k2, 0.5 * h), &v1, &v2);
        let k4 = rhs(t0 + h, &axpy(&y, &k3, h), &v1, &v2);
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Instability(format!("non-finite state at t = {}", grid.t(step + 1))));
        }
        x1.push(y[0]);
        v1.push(y[1]);
        x2.push(y[2]);
        v2.push(y[3]);
    }
    Ok(Trajectory {
        grid,
        x1,
        x2,
        v1,
        v2,
        r: None,
        z: None,
        f1: noise.f1[..grid.n].to_vec(),
        f2: noise.f2[..grid.n].to_vec(),
        provenance: Provenance { solver: Method::OhmicDde.tag().into(), history: Some(history.tag().into()), ..Default::default() },
    })
}
