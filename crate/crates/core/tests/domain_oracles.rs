mod common;

use std::f64::consts::PI;
use std::io::Write;

use proptest::prelude::*;
use rand::Rng;
use slosh_core::domain::{
    admissibility_constant, chebyshev_weight, custom_weight, flat_weight, half_disk_weight, load_custom_weight,
    mass_functional,
};
use slosh_core::{ChebSeries, SloshError};

/// `|f'(z)|` for `f(z) = 2z/(z²+1)`, with the preimage of `x` found by Newton
/// iteration on `f(z) = x` from inside the unit disk.
fn map_derivative_at_preimage(x: f64) -> f64 {
    let f = |z: f64| 2.0 * z / (z * z + 1.0);
    let df = |z: f64| 2.0 * (1.0 - z * z) / (1.0 + z * z).powi(2);
    let mut z = 0.5 * x;
    for _ in 0..200 {
        let step = (f(z) - x) / df(z);
        z -= step;
        z = z.clamp(-1.0 + 1e-300, 1.0 - 1e-300);
        if step.abs() < 1e-16 {
            break;
        }
    }
    df(z).abs()
}

#[test]
fn half_disk_weight_matches_map_derivative() {
    let w = half_disk_weight();
    assert_eq!(w.weight(0.0).unwrap(), 2.0);
    assert!((w.weight(0.6).unwrap() - 1.44).abs() < 1e-14);
    for i in 1..40 {
        let x = -0.95 + 1.9 * i as f64 / 40.0;
        let oracle = map_derivative_at_preimage(x);
        assert!((w.weight(x).unwrap() - oracle).abs() < 1e-10 * oracle, "x={x}");
    }
}

#[test]
fn half_disk_weight_endpoint_limit() {
    // Near z = 1, x = f(z) gives 1 - x ~ δ²/2 and |f'| ~ δ with δ = 1 - z,
    // so weight/√(1-x²) tends to 1.
    let w = half_disk_weight();
    assert_eq!(w.weight(1.0).unwrap(), 0.0);
    assert_eq!(w.weight(-1.0).unwrap(), 0.0);
    for k in 2..8 {
        let delta = 10f64.powi(-k);
        let z = 1.0 - delta;
        let x = 2.0 * z / (z * z + 1.0);
        let ratio = w.weight(x).unwrap() / (1.0 - x * x).sqrt();
        assert!((ratio - 1.0).abs() < 2.0 * delta, "δ={delta} ratio={ratio}");
    }
}

#[test]
fn half_disk_weight_is_even() {
    let w = half_disk_weight();
    for i in 0..=200 {
        let x = i as f64 / 200.0;
        assert!((w.weight(x).unwrap() - w.weight(-x).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn builtin_weights_are_admissible() {
    let grid = common::interior_grid(201, 1e-3);
    let cheb = admissibility_constant(&chebyshev_weight(), &grid).unwrap();
    assert!((cheb - 1.0).abs() < 1e-14);
    let flat = admissibility_constant(&flat_weight(), &grid).unwrap();
    assert!((flat - 1.0).abs() < 1e-14);
    let half = admissibility_constant(&half_disk_weight(), &grid).unwrap();
    assert!(half > 0.0);
}

#[test]
fn half_disk_admissibility_stable_under_refinement() {
    let w = half_disk_weight();
    let coarse = admissibility_constant(&w, &common::interior_grid(101, 1e-7)).unwrap();
    let fine = admissibility_constant(&w, &common::interior_grid(1601, 1e-9)).unwrap();
    assert!((coarse - fine).abs() < 1e-3, "{coarse} vs {fine}");
    // The ratio 1 + √(1-x²) tends to 1 at the contact points.
    assert!((fine - 1.0).abs() < 1e-3);
}

#[test]
fn mass_functional_trivial_cases() {
    let half = half_disk_weight();
    assert!(mass_functional(&ChebSeries::basis(1), &half, 128).unwrap().abs() < 1e-14);
    let t0 = mass_functional(&ChebSeries::basis(0), &chebyshev_weight(), 64).unwrap();
    assert!((t0 - PI).abs() < 1e-13);
}

#[test]
fn mass_functional_t2_half_disk_against_adaptive_quadrature() {
    let w = half_disk_weight();
    let m128 = mass_functional(&ChebSeries::basis(2), &w, 128).unwrap();
    let m256 = mass_functional(&ChebSeries::basis(2), &w, 256).unwrap();
    assert!((m128 - m256).abs() < 1e-10);
    // x = cos θ turns ∫ T₂/|f'| dx into ∫₀^π cos 2θ/(1 + sin θ) dθ.
    let oracle = slosh_oracle::integrate(|t: f64| (2.0 * t).cos() / (1.0 + t.sin()), 0.0, PI, 1e-14);
    assert!((m256 - oracle).abs() < 1e-10, "{m256} vs {oracle}");
}

#[test]
fn mass_functional_is_linear() {
    let mut r = common::rng(11);
    let w = half_disk_weight();
    for _ in 0..20 {
        let p = common::random_series(&mut r, 12);
        let q = common::random_series(&mut r, 15);
        let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let combo = p.scaled(a).add_scaled(&q, b);
        let lhs = mass_functional(&combo, &w, 128).unwrap();
        let rhs = a * mass_functional(&p, &w, 128).unwrap() + b * mass_functional(&q, &w, 128).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn weighted_norms_respect_admissibility_constant() {
    let w = half_disk_weight();
    let c = admissibility_constant(&w, &common::interior_grid(2001, 1e-6)).unwrap();
    let mut r = common::rng(12);
    for _ in 0..100 {
        let deg = r.gen_range(0..=20);
        let phi = common::random_series(&mut r, deg);
        let interface = slosh_oracle::integrate(
            |t: f64| {
                let v = phi.eval(t.cos());
                v * v * w.sqrt_over_weight(t.cos())
            },
            0.0,
            PI,
            1e-13,
        );
        let cheb = slosh_oracle::integrate(
            |t: f64| {
                let v = phi.eval(t.cos());
                v * v
            },
            0.0,
            PI,
            1e-13,
        );
        assert!(interface <= cheb / c * (1.0 + 1e-10) + 1e-14);
    }
}

#[test]
fn custom_weight_reproduces_half_disk() {
    let half = half_disk_weight();
    let samples: Vec<(f64, f64)> = (0..50)
        .map(|i| {
            let x = (PI * (i as f64 + 0.5) / 50.0).cos();
            (x, half.weight(x).unwrap())
        })
        .collect();
    let custom = custom_weight(&samples, 0.5, "sampled", true).unwrap();
    for i in 0..=1000 {
        let x = -0.999 + 1.998 * i as f64 / 1000.0;
        let want = half.weight(x).unwrap();
        assert!((custom.weight(x).unwrap() - want).abs() < 1e-6, "x={x}");
    }
}

#[test]
fn custom_weight_validation() {
    let flat: Vec<(f64, f64)> = (0..9).map(|i| (-1.0 + 0.25 * i as f64, 1.0)).collect();
    let w = custom_weight(&flat, 0.0, "lid", true).unwrap();
    for x in [-1.0, -0.3, 0.0, 0.77, 1.0] {
        assert!((w.weight(x).unwrap() - 1.0).abs() < 1e-14);
    }
    assert!(matches!(custom_weight(&flat, 0.7, "steep", true), Err(SloshError::Admissibility(_))));
    let mut bad = flat.clone();
    bad[3].1 = -0.5;
    assert!(matches!(custom_weight(&bad, 0.0, "neg", false), Err(SloshError::Input(_))));
    let lopsided: Vec<(f64, f64)> = flat.iter().map(|&(x, _)| (x, 2.0 + x)).collect();
    assert!(matches!(custom_weight(&lopsided, 0.0, "tilt", true), Err(SloshError::Input(_))));
    assert!(custom_weight(&lopsided, 0.0, "tilt", false).is_ok());
}

#[test]
fn custom_weight_loads_from_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("tank.csv");
    let mut f = std::fs::File::create(&csv_path).unwrap();
    writeln!(f, "# sampled rigid lid").unwrap();
    writeln!(f, "x,weight").unwrap();
    for i in 0..9 {
        writeln!(f, "{},{}", -1.0 + 0.25 * i as f64, 1.5).unwrap();
    }
    std::fs::write(dir.path().join("tank.json"), r#"{"beta": 0.0, "label": "tank", "symmetric": true}"#).unwrap();
    let w = load_custom_weight(&csv_path).unwrap();
    assert_eq!(w.label(), "tank");
    assert_eq!(w.endpoint_exponent(), 0.0);
    assert!(w.is_symmetric());
    assert!((w.weight(0.4).unwrap() - 1.5).abs() < 1e-14);

    std::fs::write(dir.path().join("tank.json"), r#"{"beta": 0.9}"#).unwrap();
    assert!(matches!(load_custom_weight(&csv_path), Err(SloshError::Admissibility(_))));
}

proptest! {
    #[test]
    fn weights_are_positive_inside(x in -0.999999f64..0.999999) {
        for w in [half_disk_weight(), chebyshev_weight(), flat_weight()] {
            prop_assert!(w.weight(x).unwrap() > 0.0);
        }
    }

    #[test]
    fn weights_reject_points_outside(x in 1.0000001f64..10.0) {
        prop_assert!(half_disk_weight().weight(x).is_err());
        prop_assert!(chebyshev_weight().weight(-x).is_err());
    }
}
