use bathpair::analysis::{jackknife, plain_covariance, symmetrized_covariance, OriginWindow};
use bathpair::config::ScenarioConfig;
use bathpair::dynamics::{greens_derivatives, integrate_localized, Method, SolverConfig};
use bathpair::grid::TimeGrid;
use bathpair::interaction::{induced_force, induced_potential, OscillatorPair};
use bathpair::kernels::{quadrature_route, CouplingModel};
use bathpair::noise::NoiseSeries;
use bathpair::output::{read_csv, write_csv, Stamp};
use bathpair::quadrature::Tolerance;
use proptest::prelude::*;

fn smooth_model() -> impl Strategy<Value = CouplingModel> {
    prop_oneof![
        (0.01..2.0f64, 0.2..5.0f64, 0.5..2.0f64).prop_map(|(a, c, u)| CouplingModel::exponential_cutoff(a, c, u).unwrap()),
        (0.01..1.0f64, 0.5..20.0f64, 0.5..2.0f64).prop_map(|(g, w, u)| CouplingModel::drude(g, w, u).unwrap()),
    ]
}

fn scenario(gamma: f64, omega_d: f64, d: f64, h: f64, order: &[usize]) -> String {
    let model = [format!("gamma = {gamma:?}"), format!("omega_d = {omega_d:?}"), "family = \"drude\"".to_string()];
    let solver = [format!("h = {h:?}"), "t_end = 20.0".to_string(), "method = \"localized\"".to_string()];
    let pick = |lines: &[String; 3]| order.iter().map(|&i| lines[i].clone()).collect::<Vec<_>>().join("\n");
    format!("[solver]\n{}\n\n[pair]\nd = {d:?}\n\n[model]\n{}\n", pick(&solver), pick(&model))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_hash_ignores_key_order_and_survives_round_trip(
        gamma in 0.01..1.0f64,
        omega_d in 1.0..20.0f64,
        d in 0.0..5.0f64,
        h in 0.001..0.1f64,
        order in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        let a = ScenarioConfig::parse(&scenario(gamma, omega_d, d, h, &[0, 1, 2]), &[]).unwrap();
        let b = ScenarioConfig::parse(&scenario(gamma, omega_d, d, h, &order), &[]).unwrap();
        prop_assert_eq!(a.hash(), b.hash());
        let again = ScenarioConfig::parse(&a.to_toml(), &[]).unwrap();
        prop_assert_eq!(again.hash(), a.hash());
    }

    #[test]
    fn mode_kernels_recombine(model in smooth_model(), dt in 0.0..10.0f64, d in 0.0..10.0f64) {
        let (r, z) = model.mode_kernels(dt, d).unwrap();
        let (r, z) = (r.smooth().unwrap(), z.smooth().unwrap());
        let chi = model.kernel_chi(dt).unwrap().smooth().unwrap();
        let chi_d = model.kernel_chi_d(dt, d).unwrap().smooth().unwrap();
        let scale = chi.abs() + chi_d.abs();
        prop_assert!(((r + z) / 2.0 - chi).abs() <= 4.0 * f64::EPSILON * scale);
        prop_assert!(((r - z) / 2.0 - chi_d).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn position_kernel_reduces_to_self_and_cross(model in smooth_model(), dt in 0.0..10.0f64, d in 0.0..10.0f64) {
        prop_assert_eq!(model.kernel_chi_position(dt, 0.0, false, d).unwrap(), model.kernel_chi(dt).unwrap());
        prop_assert_eq!(model.kernel_chi_position(dt, 0.0, true, d).unwrap(), model.kernel_chi_d(dt, d).unwrap());
    }

    #[test]
    fn ohmic_kernels_recombine(gamma in 0.01..2.0f64, dt in 0.0..5.0f64, d in 0.0..5.0f64) {
        let model = CouplingModel::ohmic(gamma, 1.0).unwrap();
        let (r, z) = model.mode_kernels(dt, d).unwrap();
        let chi = model.kernel_chi(dt).unwrap();
        let chi_d = model.kernel_chi_d(dt, d).unwrap();
        prop_assert_eq!(r, chi.plus(&chi_d));
        prop_assert_eq!(z, chi.minus(&chi_d));
    }

    #[test]
    fn green_function_solves_its_equation(gamma in 0.0..3.0f64, omega0 in 0.3..3.0f64, t in 0.0..50.0f64) {
        let (g, gd, gdd) = greens_derivatives(gamma, omega0, t);
        let scale = 1.0 + gdd.abs() + gamma * gd.abs() + omega0 * omega0 * g.abs();
        prop_assert!((gdd + 0.5 * gamma * gd + omega0 * omega0 * g).abs() < 1e-12 * scale);
    }

    #[test]
    fn force_is_minus_potential_gradient(amp in 0.1..2.0f64, cutoff in 0.2..3.0f64, d in 0.0..5.0f64, x in -5.0..5.0f64) {
        let model = CouplingModel::exponential_cutoff(amp, cutoff, 1.0).unwrap();
        let u = d + x / cutoff;
        let eps = 1e-5;
        let fd = -(induced_potential(&model, u + eps, d).unwrap() - induced_potential(&model, u - eps, d).unwrap()) / (2.0 * eps);
        prop_assert!((induced_force(&model, u, d).unwrap() - fd).abs() < 1e-6 * (1.0 + fd.abs()));
        // u - d and d - mirror can differ by rounding in u itself
        let mirror = d - x / cutoff;
        let even = induced_potential(&model, mirror, d).unwrap();
        let slack = ((u - d) + (mirror - d)).abs() + 4.0 * f64::EPSILON * d;
        let bound = 4.0 * f64::EPSILON * even.abs() + slack * induced_force(&model, u, d).unwrap().abs();
        prop_assert!((induced_potential(&model, u, d).unwrap() - even).abs() <= bound);
    }

    #[test]
    fn jackknife_of_the_mean_is_the_standard_error(values in prop::collection::vec(-100.0..100.0f64, 2..50), shift in -1e3..1e3f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let (m, se) = jackknife(&values).unwrap();
        prop_assert!((m - mean).abs() < 1e-12 * (1.0 + mean.abs()));
        prop_assert!((se - (var / n).sqrt()).abs() < 1e-9 * (1.0 + se));
        let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let (_, se2) = jackknife(&shifted).unwrap();
        prop_assert!((se2 - se).abs() < 1e-7 * (1.0 + se));
    }

    #[test]
    fn csv_preserves_bits(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        write_csv(&path, &Stamp::new("h"), &["v"], &[&values], false).unwrap();
        let back = read_csv(&path).unwrap();
        let col = back.column("v").unwrap();
        prop_assert!(col.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quadrature_cross_kernel_is_even_in_separation(model in smooth_model(), dt in 0.0..3.0f64, d in 0.0..4.0f64) {
        let tol = Tolerance::new(1e-12, 1e-10);
        let a = quadrature_route::chi_d(&model, dt, d, tol).unwrap();
        let b = quadrature_route::chi_d(&model, dt, -d, tol).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn localized_solver_is_linear_in_the_noise(
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
        seed_f in prop::collection::vec(-1.0..1.0f64, 8),
        seed_g in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let model = CouplingModel::drude(0.1, 10.0, 1.0).unwrap();
        let pair = OscillatorPair::new(1.0, 1.0, 2.0).unwrap();
        let cfg = SolverConfig::new(0.02, 5.0, Method::Localized);
        let grid: TimeGrid = cfg.grid().unwrap();
        let wave = |c: &[f64], phase: f64| -> Vec<f64> {
            grid.times().map(|t| c.iter().enumerate().map(|(k, a)| a * ((k as f64 + 1.0) * t + phase).sin()).sum()).collect()
        };
        let f = NoiseSeries::new(grid, wave(&seed_f, 0.0), wave(&seed_f, 1.0)).unwrap();
        let g = NoiseSeries::new(grid, wave(&seed_g, 0.3), wave(&seed_g, 2.0)).unwrap();
        let mix = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect::<Vec<f64>>();
        let fg = NoiseSeries::new(grid, mix(&f.f1, &g.f1), mix(&f.f2, &g.f2)).unwrap();
        let xf = integrate_localized(&model, &pair, &f, &cfg).unwrap();
        let xg = integrate_localized(&model, &pair, &g, &cfg).unwrap();
        let xfg = integrate_localized(&model, &pair, &fg, &cfg).unwrap();
        let expect = mix(&xf.x1, &xg.x1);
        let scale = 1.0 + expect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = xfg.x1.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10 * scale, "{}", err);
    }

    #[test]
    fn symmetrized_and_plain_estimators_agree(
        a in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 12), 3..8),
        b_shift in -1.0..1.0f64,
    ) {
        let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().rev().map(|v| v + b_shift).collect()).collect();
        let lags = [0.0, 0.1, 0.3];
        let w = OriginWindow { start: 0, end: 6 };
        let s = symmetrized_covariance(&a, &b, 0.1, &lags, w).unwrap();
        let p = plain_covariance(&a, &b, 0.1, &lags, w).unwrap();
        prop_assert_eq!(s, p);
    }
}
