mod common;

use std::f64::consts::PI;

use nalgebra::{DVector, Matrix2};
use rand::Rng;
use slosh_core::control::{
    default_injection_points, hum_control, hum_functional, injection_matrix, injection_to_h, kernel_g,
    observation_gramian, solve_injection, wall_weights_for,
};
use slosh_core::dynamics::{default_horizon, observability_threshold, ModalData};
use slosh_core::{ModeSet, SloshError};

/// Terminal energy of every mode under the control, integrated by the ODE oracle.
fn ode_terminal_energy(target: &ModalData, adjoint: &ModalData, modes: &ModeSet, horizon: f64) -> (f64, f64) {
    let mut e0 = 0.0;
    let mut e_t = 0.0;
    for n in 0..modes.len() {
        let th = modes.thetas[n];
        let (c0, v0) = (target.cos_amp[n], th * target.sin_amp[n]);
        let (a, b) = (adjoint.cos_amp[n], adjoint.sin_amp[n]);
        let (c, v) = common::ode_mode(th, c0, v0, |t| a * (th * t).cos() + b * (th * t).sin(), horizon);
        e0 += 0.5 * (v0 * v0 + th * th * c0 * c0);
        e_t += 0.5 * (v * v + th * th * c * c);
    }
    (e0, e_t)
}

#[test]
fn single_mode_control_against_shooting_oracle() {
    let modes = common::fixture_modes(1);
    let th = modes.thetas[0];
    let horizon = 2.0 * PI;
    let sol = hum_control(&ModalData::new(vec![1.0], vec![0.0]).unwrap(), &modes, horizon).unwrap();
    let (a, b) = (sol.adjoint_data.cos_amp[0], sol.adjoint_data.sin_amp[0]);
    assert!(a.abs() < 1e-12 && (b - 1.0 / PI).abs() < 1e-12);

    // Shoot: terminal state is affine in (A, B); read off the map by three ODE solves.
    let free = common::ode_mode(th, 1.0, 0.0, |_| 0.0, horizon);
    let by_cos = common::ode_mode(th, 0.0, 0.0, |t| (th * t).cos(), horizon);
    let by_sin = common::ode_mode(th, 0.0, 0.0, |t| (th * t).sin(), horizon);
    let g = Matrix2::new(by_cos.0, by_sin.0, by_cos.1, by_sin.1);
    let amp = g.lu().solve(&nalgebra::Vector2::new(-free.0, -free.1)).unwrap();
    assert!((amp[0] - a).abs() < 1e-9 && (amp[1] - b).abs() < 1e-9);
}

#[test]
fn random_targets_are_driven_to_rest() {
    let mut r = common::rng(41);
    for modes in [common::fixture_modes(8), common::half_disk_modes(8), common::half_disk_modes(16)] {
        let horizon = default_horizon(&modes);
        for _ in 0..3 {
            let target = common::random_modal(&mut r, modes.len());
            let sol = hum_control(&target, &modes, horizon).unwrap();
            assert!(sol.terminal_energy <= 1e-9 * sol.initial_energy);
            let (e0, e_t) = ode_terminal_energy(&target, &sol.adjoint_data, &modes, horizon);
            assert!((e0 - sol.initial_energy).abs() < 1e-12 * e0);
            assert!(e_t <= 1e-9 * e0, "ODE terminal energy {e_t} vs {e0}");
        }
    }
}

#[test]
fn zero_target_and_threshold() {
    let modes = common::half_disk_modes(4);
    let sol = hum_control(&ModalData::zero(4), &modes, default_horizon(&modes)).unwrap();
    assert_eq!(sol.terminal_energy, 0.0);
    assert_eq!(sol.functional, 0.0);
    let err = hum_control(&ModalData::zero(4), &modes, 0.9 * observability_threshold(&modes)).unwrap_err();
    assert!(matches!(err, SloshError::BelowThreshold { .. }));
}

#[test]
fn duality_identity_on_random_instances() {
    let mut r = common::rng(42);
    let modes = common::half_disk_modes(6);
    let horizon = default_horizon(&modes) * r.gen_range(1.0..2.0);
    for _ in 0..5 {
        let target = common::random_modal(&mut r, 6);
        let control = hum_control(&target, &modes, horizon).unwrap();
        let adjoint = common::random_modal(&mut r, 6);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for n in 0..6 {
            let th = modes.thetas[n];
            let (a, b) = (control.adjoint_data.cos_amp[n], control.adjoint_data.sin_amp[n]);
            let (p, q) = (adjoint.cos_amp[n], adjoint.sin_amp[n]);
            lhs += slosh_oracle::integrate(
                |t| (a * (th * t).cos() + b * (th * t).sin()) * (p * (th * t).cos() + q * (th * t).sin()),
                0.0,
                horizon,
                1e-14,
            );
            let (psi0, psi1) = (target.cos_amp[n], th * target.sin_amp[n]);
            let (phi0, phi1) = (p, th * q);
            rhs += -psi1 * phi0 + psi0 * phi1;
        }
        assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
    }
}

#[test]
fn control_minimizes_the_functional() {
    let mut r = common::rng(43);
    let modes = common::half_disk_modes(5);
    let horizon = default_horizon(&modes);
    let target = common::random_modal(&mut r, 5);
    let sol = hum_control(&target, &modes, horizon).unwrap();
    let j0 = hum_functional(&sol.adjoint_data, &target, &modes, horizon);
    assert!((j0 - sol.functional).abs() < 1e-14 * j0.abs().max(1.0));
    for _ in 0..50 {
        let d = common::random_modal(&mut r, 5);
        let eps = r.gen_range(1e-4..1e-1);
        let moved = ModalData::new(
            sol.adjoint_data.cos_amp.iter().zip(&d.cos_amp).map(|(a, b)| a + eps * b).collect(),
            sol.adjoint_data.sin_amp.iter().zip(&d.sin_amp).map(|(a, b)| a + eps * b).collect(),
        )
        .unwrap();
        assert!(hum_functional(&moved, &target, &modes, horizon) >= j0 - 1e-12);
    }
}

#[test]
fn gramian_is_positive_and_grows_linearly() {
    let modes = common::half_disk_modes(8);
    for &th in &modes.thetas {
        let mut prev = None;
        for horizon in [0.3, 1.0, 10.0, 40.0, 160.0] {
            let w = observation_gramian(th, horizon);
            let lo = w.symmetric_eigenvalues().min();
            assert!(lo > 0.0);
            if horizon >= 40.0 {
                // λ_min(T) = T/2 - O(1/θ).
                assert!((lo / horizon - 0.5).abs() < 1.0 / (th * horizon));
                if let Some(p) = prev {
                    let ratio: f64 = lo / p;
                    assert!((ratio - 4.0).abs() < 0.2);
                }
            }
            prev = Some(lo);
        }
    }
}

#[test]
fn kernel_closed_forms_against_quadrature() {
    for i in 0..100 {
        let x = -0.99 + 1.98 * i as f64 / 99.0;
        assert!((kernel_g(x).unwrap() - slosh_oracle::pv::g_kernel(x)).abs() < 1e-10, "x={x}");
    }
    for i in 0..100 {
        let mag = 1.001 + 9.0 * i as f64 / 99.0;
        let x = if i % 2 == 0 { mag } else { -mag };
        assert!((kernel_g(x).unwrap() - slosh_oracle::pv::g_kernel(x)).abs() < 1e-10, "x={x}");
    }
    assert!(matches!(kernel_g(1.0 - 1e-10), Err(SloshError::NearSingular { .. })));
}

#[test]
fn injection_matrix_against_trapezoid_oracle() {
    let modes = common::half_disk_modes(8);
    let points = default_injection_points(5);
    let ww = wall_weights_for(&points, &modes.weight, None).unwrap();
    let m = injection_matrix(&points, &ww, &modes).unwrap();
    for j in 0..5 {
        let xj = points[j];
        let gj = slosh_oracle::pv::g_kernel(xj);
        for i in 0..4 {
            let e = &modes.modes[i];
            let oracle = common::trapezoid_first_kind(
                |x| {
                    let gx = -PI * x;
                    (gj - gx) / (PI * PI * ww[j] * (x - xj)) * e.eval(x)
                },
                4000,
            );
            assert!((m[(i, j)] - oracle).abs() < 1e-8, "m[{i},{j}]");
        }
    }
}

#[test]
fn two_point_solve_matches_hand_elimination() {
    let modes = common::half_disk_modes(3);
    let points = [1.6, -2.1];
    let ww = wall_weights_for(&points, &modes.weight, None).unwrap();
    let m = injection_matrix(&points, &ww, &modes).unwrap();
    let targets = vec![vec![0.7], vec![-1.3]];
    let plan = solve_injection(&targets, &[0.0, 1.0], &points, &ww, &modes).unwrap();
    for (k, h) in targets.iter().enumerate() {
        let j1 = h[0] / (m[(0, 0)] - m[(0, 1)]);
        assert!((plan.rates[k][0] - j1).abs() < 1e-12 * j1.abs().max(1.0));
        assert!((plan.rates[k][1] + j1).abs() < 1e-12 * j1.abs().max(1.0));
    }
}

#[test]
fn injection_round_trip() {
    let mut r = common::rng(44);
    for n_points in [3usize, 5, 9] {
        for modes in [common::fixture_modes(n_points + 2), common::half_disk_modes(n_points + 2)] {
            let points = default_injection_points(n_points);
            let ww = match modes.weight.wall_weight(points[0]) {
                Some(_) => wall_weights_for(&points, &modes.weight, None).unwrap(),
                None => points.iter().map(|x: &f64| x.abs()).collect(),
            };
            let target = common::random_modal(&mut r, modes.len());
            let sol = hum_control(&target, &modes, default_horizon(&modes)).unwrap();
            let (times, values) = sol.sample(&modes);
            let targets: Vec<Vec<f64>> = values.iter().map(|v| v[..n_points - 1].to_vec()).collect();
            let plan = solve_injection(&targets, &times, &points, &ww, &modes).unwrap();
            let m = injection_matrix(&points, &ww, &modes).unwrap();
            for k in (0..times.len()).step_by(7) {
                let back = plan.modal_forcing(k, &modes).unwrap();
                let mj = &m * DVector::from_column_slice(&plan.rates[k]);
                let scale = targets[k].iter().fold(1.0f64, |a, v| a.max(v.abs()));
                for i in 0..n_points - 1 {
                    assert!((back[i] - targets[k][i]).abs() < 1e-8 * scale, "N={n_points} k={k} i={i}");
                    // Both sides sum large rates with cancellation; compare at that scale.
                    let magnitude: f64 = (0..n_points).map(|j| (m[(i, j)] * plan.rates[k][j]).abs()).sum();
                    assert!((back[i] - mj[i]).abs() < 1e-10 * magnitude.max(scale));
                }
            }
            for row in &plan.rates {
                let sum: f64 = row.iter().sum();
                let big = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(sum.abs() <= 1e-12 * big.max(f64::MIN_POSITIVE));
            }
        }
    }
}

#[test]
fn custom_containers_require_wall_weights() {
    let modes = common::fixture_modes(4);
    let points = default_injection_points(3);
    assert!(matches!(wall_weights_for(&points, &modes.weight, None), Err(SloshError::Input(_))));
    let h = injection_to_h(&points, &[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0], &modes.weight, 0.2).unwrap();
    assert_eq!(h, 0.0);
}
