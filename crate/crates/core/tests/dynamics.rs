use bathpair::dynamics::*;
use bathpair::interaction::OscillatorPair;
use bathpair::kernels::CouplingModel;
use bathpair::noise::{sample_bath, ModeGrid, NoiseSeries, ThermalState};

fn bath_noise(model: &CouplingModel, d: f64, grid: bathpair::grid::TimeGrid, nu_max: f64, seed: u64) -> NoiseSeries {
    let thermal = ThermalState::classical(1.0).unwrap();
    let r = sample_bath(model, &thermal, ModeGrid::new(nu_max, 256).unwrap(), seed, 0, false).unwrap();
    r.noise_series(d, grid)
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn free_oscillator_when_coupling_vanishes() {
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let free = CouplingModel::exponential_cutoff(0.0, 1.0, 1.0).unwrap();
    let cfg = SolverConfig::new(2.5e-4, 20.0 * std::f64::consts::PI, Method::VolterraFull)
        .with_initial(InitialConditions { x1: 0.5, ..Default::default() });
    let tr = integrate_full(&free, &pair, None, &cfg).unwrap();
    let err = tr.grid.times().zip(&tr.x1).map(|(t, x)| (x - 0.5 * t.cos()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn frozen_pair_stays_at_rest() {
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let m = CouplingModel::exponential_cutoff(1.0, 1.0, 1.0).unwrap();
    let cfg = SolverConfig::new(0.01, 20.0, Method::VolterraFull);
    let tr = integrate_full(&m, &pair, None, &cfg).unwrap();
    let max = tr.x1.iter().chain(&tr.x2).fold(0.0f64, |a, b| a.max(b.abs()));
    assert!(max < 1e-14, "{max}");
}

#[test]
fn small_amplitude_full_matches_localized() {
    // nu0 a = 1e-3. The localized equations drop the linearized drift 2A nu0^3 x / u0^2,
    // so the coupling must also be weak for the limit to apply.
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let m = CouplingModel::exponential_cutoff(1e-5, 1.0, 1.0).unwrap();
    let thermal = ThermalState::classical(0.05).unwrap();
    let r = sample_bath(&m, &thermal, ModeGrid::new(20.0, 256).unwrap(), 3, 0, false).unwrap();
    let cfg = SolverConfig::new(0.01, 20.0, Method::VolterraFull).with_initial(InitialConditions { x1: 1e-3, ..Default::default() });
    let full = integrate_full(&m, &pair, Some(&r), &cfg).unwrap();
    let loc = integrate_localized(&m, &pair, &r.noise_series(2.0, cfg.grid().unwrap()), &cfg).unwrap();
    let scale = loc.x1.iter().chain(&loc.x2).fold(0.0f64, |a, b| a.max(b.abs()));
    let rel = full.sup_distance(&loc) / scale;
    assert!(rel < 1e-3, "{rel}");
}

#[test]
fn distant_pair_decouples_into_single_gles() {
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 60.0).unwrap();
    let cfg = SolverConfig::new(0.01, 20.0, Method::Localized).with_initial(InitialConditions { x1: 0.4, v1: 0.1, x2: -0.3, v2: 0.0 });
    let grid = cfg.grid().unwrap();
    let noise = bath_noise(&model, pair.d, grid, 20.0, 5);
    let tr = integrate_localized(&model, &pair, &noise, &cfg).unwrap();
    let kernel: Vec<f64> = grid.times().map(|t| model.kernel_chi(t).unwrap().smooth().unwrap()).collect();
    let (x1, _) = single_gle(&kernel, 1.0, &noise.f1, 0.4, 0.1, grid.h).unwrap();
    let (x2, _) = single_gle(&kernel, 1.0, &noise.f2, -0.3, 0.0, grid.h).unwrap();
    assert!(sup(&tr.x1, &x1) < 1e-8);
    assert!(sup(&tr.x2, &x2) < 1e-8);
}

#[test]
fn localized_matches_modes_and_mode_identities_hold() {
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let cfg = SolverConfig::new(0.01, 20.0, Method::Localized).with_initial(InitialConditions { x1: 0.2, v1: -0.1, x2: 0.5, v2: 0.3 });
    let noise = bath_noise(&model, pair.d, cfg.grid().unwrap(), 20.0, 9);
    let a = integrate_localized(&model, &pair, &noise, &cfg).unwrap();
    let b = integrate_modes(&model, &pair, &noise, &cfg).unwrap();
    assert!(a.sup_distance(&b) < 1e-8);
    let (r, z) = (b.r.as_ref().unwrap(), b.z.as_ref().unwrap());
    for i in 0..b.grid.n {
        assert!((r[i] - 0.5 * (b.x1[i] + b.x2[i])).abs() < 1e-12);
        assert!((z[i] - (b.x2[i] - b.x1[i])).abs() < 1e-12);
    }
}

#[test]
fn z_mode_is_undamped_at_zero_separation() {
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.5, 0.0).unwrap();
    let cfg = SolverConfig::new(0.01, 20.0, Method::ModesLaplace).with_initial(InitialConditions { x1: 0.1, v1: -0.2, x2: 0.4, v2: 0.3 });
    let grid = cfg.grid().unwrap();
    let tr = solve_modes_laplace(Some(&model), &pair, &NoiseSeries::zeros(grid), &cfg).unwrap();
    let (_, z) = tr.modes();
    let (z0, zd0) = (0.3, 0.5);
    for (i, t) in grid.times().enumerate() {
        let exact = z0 * (1.5 * t).cos() + zd0 * (1.5 * t).sin() / 1.5;
        assert!((z[i] - exact).abs() < 1e-8, "t={t}");
    }
}

#[test]
fn r_mode_energy_envelope_decays() {
    let model = CouplingModel::drude(0.2, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let cfg = SolverConfig::new(0.01, 100.0, Method::Localized).with_initial(InitialConditions { x1: 1.0, x2: 1.0, ..Default::default() });
    let tr = integrate_modes(&model, &pair, &NoiseSeries::zeros(cfg.grid().unwrap()), &cfg).unwrap();
    let (r, _) = tr.modes();
    let (vr, _) = tr.mode_velocities();
    let energy: Vec<f64> = r.iter().zip(&vr).map(|(x, v)| 0.5 * (v * v + x * x)).collect();
    let period = (2.0 * std::f64::consts::PI / cfg.h).round() as usize;
    let envelope: Vec<f64> = energy.chunks(period).map(|c| c.iter().cloned().fold(0.0, f64::max)).collect();
    for w in envelope.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} > {}", w[1], w[0]);
    }
    assert!(envelope.last().unwrap() < &(0.5 * envelope[0]));
}

#[test]
fn localized_solver_is_linear_in_the_noise() {
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let cfg = SolverConfig::new(0.01, 20.0, Method::Localized);
    let grid = cfg.grid().unwrap();
    let f = bath_noise(&model, pair.d, grid, 20.0, 1);
    let g = bath_noise(&model, pair.d, grid, 20.0, 2);
    let (alpha, beta) = (0.7, -1.3);
    let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect::<Vec<f64>>();
    let fg = NoiseSeries::new(grid, mix(&f.f1, &g.f1), mix(&f.f2, &g.f2)).unwrap();
    let xf = integrate_localized(&model, &pair, &f, &cfg).unwrap();
    let xg = integrate_localized(&model, &pair, &g, &cfg).unwrap();
    let xfg = integrate_localized(&model, &pair, &fg, &cfg).unwrap();
    assert!(sup(&xfg.x1, &mix(&xf.x1, &xg.x1)) < 1e-10);
    assert!(sup(&xfg.x2, &mix(&xf.x2, &xg.x2)) < 1e-10);
}

/// Error ratio of steps `h` and `h/2` against a reference at `h/8`,
/// compared on the coarse grid (optionally away from multiples of `tau`).
fn error_ratio(h: f64, t_end: f64, skip_near: Option<f64>, solve: impl Fn(f64) -> Trajectory) -> f64 {
    let coarse = solve(h);
    let half = solve(h / 2.0);
    let reference = solve(h / 8.0);
    let keep = |t: f64| match skip_near {
        Some(tau) => {
            let r = t / tau - (t / tau).round();
            (r * tau).abs() > 2.0 * h
        }
        None => true,
    };
    let err = |tr: &Trajectory, stride: usize| {
        (0..coarse.grid.n)
            .filter(|&i| keep(coarse.grid.t(i)) && coarse.grid.t(i) <= t_end)
            .map(|i| (tr.x1[i * stride] - reference.x1[i * 8]).abs().max((tr.x2[i * stride] - reference.x2[i * 8]).abs()))
            .fold(0.0, f64::max)
    };
    err(&coarse, 1) / err(&half, 2)
}

#[test]
fn localized_solver_is_second_order() {
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let thermal = ThermalState::classical(1.0).unwrap();
    let bath = sample_bath(&model, &thermal, ModeGrid::new(5.0, 128).unwrap(), 4, 0, false).unwrap();
    let ratio = error_ratio(0.02, 10.0, None, |h| {
        let cfg = SolverConfig::new(h, 10.0, Method::Localized).with_initial(InitialConditions { x1: 0.3, ..Default::default() });
        let noise = bath.noise_series(pair.d, cfg.grid().unwrap());
        integrate_localized(&model, &pair, &noise, &cfg).unwrap()
    });
    assert!((ratio - 4.0).abs() <= 0.8, "{ratio}");
}

#[test]
fn dde_solver_is_fourth_order() {
    let model = CouplingModel::ohmic(0.1, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 1.0).unwrap();
    let thermal = ThermalState::classical(1.0).unwrap();
    let bath = sample_bath(&model, &thermal, ModeGrid::new(5.0, 128).unwrap(), 4, 0, false).unwrap();
    let ratio = error_ratio(0.04, 10.0, Some(1.0), |h| {
        let cfg = SolverConfig::new(h, 10.0, Method::OhmicDde).with_initial(InitialConditions { x1: 0.3, ..Default::default() });
        let noise = bath.noise_series(pair.d, cfg.grid().unwrap());
        integrate_ohmic_dde(0.1, 1.0, &pair, &noise, &cfg).unwrap()
    });
    assert!((ratio - 16.0).abs() <= 0.3 * 16.0, "{ratio}");
}

#[test]
fn same_seed_gives_bit_identical_trajectories() {
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let cfg = SolverConfig::new(0.01, 10.0, Method::Localized);
    let run = || integrate_localized(&model, &pair, &bath_noise(&model, 2.0, cfg.grid().unwrap(), 20.0, 42), &cfg).unwrap();
    let (a, b) = (run(), run());
    assert!(a.x1.iter().zip(&b.x1).all(|(p, q)| p.to_bits() == q.to_bits()));
    assert!(a.v2.iter().zip(&b.v2).all(|(p, q)| p.to_bits() == q.to_bits()));
}

#[test]
fn zero_coupling_response_is_the_free_oscillator() {
    let pair = OscillatorPair::new(1.0, 2.0, 1.0).unwrap();
    let grid = bathpair::grid::TimeGrid::covering(0.05, 20.0).unwrap();
    let table = response_table(None, &pair, ModeSign::Plus, grid, 32).unwrap();
    for (i, t) in grid.times().enumerate() {
        assert!((table.eta[i] - (2.0 * t).sin() / 2.0).abs() < 1e-8);
        assert!((table.xi[i] - (2.0 * t).cos()).abs() < 1e-8, "t={t} {} {}", table.xi[i], (2.0 * t).cos());
    }
}

#[test]
fn weak_coupling_series_structure() {
    let pair = OscillatorPair::new(1.0, 1.0, 1.0).unwrap();
    let grid = bathpair::grid::TimeGrid::covering(0.01, 10.0).unwrap();
    let model = CouplingModel::ohmic(0.02, 1.0).unwrap();
    let noise = bath_noise(&model, 1.0, grid, 20.0, 3);
    let one_sided = NoiseSeries::new(grid, noise.f1.clone(), vec![0.0; grid.n]).unwrap();
    let (_, x2) = weak_coupling_solution(0.0, 1.0, &pair, &one_sided, grid).unwrap();
    assert!(x2.iter().all(|&x| x == 0.0));
    let (_, x2) = weak_coupling_solution(0.02, 1.0, &pair, &one_sided, grid).unwrap();
    for (i, t) in grid.times().enumerate() {
        if t < 1.0 - 1e-9 {
            assert_eq!(x2[i], 0.0);
        }
    }
    assert!(x2.iter().any(|&x| x != 0.0));
}

#[test]
fn ohmic_cross_friction_collapses_at_zero_separation() {
    // At d = 0 the delayed term is instantaneous: the R mode sees friction gamma,
    // the Z mode none.
    let pair = OscillatorPair::new(1.0, 1.0, 0.0).unwrap();
    let cfg = SolverConfig::new(0.001, 10.0, Method::OhmicDde).with_initial(InitialConditions { x1: -0.2, x2: 0.3, ..Default::default() });
    let tr = integrate_ohmic_dde(0.4, 1.0, &pair, &NoiseSeries::zeros(cfg.grid().unwrap()), &cfg).unwrap();
    let (r, z) = tr.modes();
    for (i, t) in tr.grid.times().enumerate() {
        assert!((z[i] - 0.5 * t.cos()).abs() < 1e-9);
        let (g, gd, _) = greens_derivatives(0.8, 1.0, t);
        // R solves R'' + 0.4 R' + R = 0 with R(0) = 0.05, R'(0) = 0.
        let exact = 0.05 * (gd + 0.4 * g);
        assert!((r[i] - exact).abs() < 1e-9, "t={t}");
    }
}

#[test]
fn drude_responses_stay_resolved_at_late_times() {
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
    let grid = bathpair::grid::TimeGrid::covering(0.01, 50.0).unwrap();
    let fine = bathpair::grid::TimeGrid::covering(0.001, 50.0).unwrap();
    for (sign, s) in [(ModeSign::Plus, 1.0), (ModeSign::Minus, -1.0)] {
        let table = response_table(Some(&model), &pair, sign, grid, 32).unwrap();
        assert!(table.flagged.is_empty(), "{sign:?}: {} flagged", table.flagged.len());
        let kernel: Vec<f64> = fine
            .times()
            .map(|t| model.kernel_chi(t).unwrap().smooth().unwrap() + s * model.kernel_chi_d(t, 2.0).unwrap().smooth().unwrap())
            .collect();
        let zero = vec![0.0; fine.n];
        let (eta, _) = single_gle(&kernel, 1.0, &zero, 0.0, 1.0, fine.h).unwrap();
        let (xi, _) = single_gle(&kernel, 1.0, &zero, 1.0, 0.0, fine.h).unwrap();
        let every: Vec<usize> = (0..grid.n).map(|i| 10 * i).collect();
        let eta: Vec<f64> = every.iter().map(|&j| eta[j]).collect();
        let xi: Vec<f64> = every.iter().map(|&j| xi[j]).collect();
        assert!(sup(&eta, &table.eta) < 1e-5, "{sign:?} eta {}", sup(&eta, &table.eta));
        assert!(sup(&xi, &table.xi) < 1e-5, "{sign:?} xi {}", sup(&xi, &table.xi));
    }
}

#[test]
fn ohmic_delay_responses_match_the_delay_solver() {
    let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
    let model = CouplingModel::ohmic(0.2, 1.0).unwrap();
    let cfg = SolverConfig::new(0.01, 40.0, Method::OhmicDde).with_initial(InitialConditions { x1: 0.4, x2: 0.1, ..Default::default() });
    let grid = cfg.grid().unwrap();
    let tr = integrate_ohmic_dde(0.2, 1.0, &pair, &NoiseSeries::zeros(grid), &cfg).unwrap();
    let (r, z) = tr.modes();
    let plus = response_table(Some(&model), &pair, ModeSign::Plus, grid, 32).unwrap();
    let minus = response_table(Some(&model), &pair, ModeSign::Minus, grid, 32).unwrap();
    assert!(plus.flagged.is_empty() && minus.flagged.is_empty());
    let r_lap: Vec<f64> = plus.xi.iter().map(|x| r[0] * x).collect();
    let z_lap: Vec<f64> = minus.xi.iter().map(|x| z[0] * x).collect();
    assert!(sup(&r, &r_lap) < 1e-7, "R {}", sup(&r, &r_lap));
    assert!(sup(&z, &z_lap) < 1e-7, "Z {}", sup(&z, &z_lap));
}
