#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slosh_core::domain::{chebyshev_weight, half_disk_weight};
use slosh_core::dynamics::ModalData;
use slosh_core::spectrum::{solve_modes, BasisFamily, BasisSpec};
use slosh_core::{ChebSeries, ModeSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cheb-fixture modes, `λ_n = n`.
pub fn fixture_modes(n: usize) -> ModeSet {
    solve_modes(&BasisSpec::new(BasisFamily::Chebyshev, n + 4), &chebyshev_weight(), n).unwrap()
}

/// Half-disk modes of both parities with the mass constraint.
pub fn half_disk_modes(n: usize) -> ModeSet {
    solve_modes(&BasisSpec::for_modes(BasisFamily::PinnedFull, n), &half_disk_weight(), n).unwrap()
}

pub fn random_series(r: &mut ChaCha8Rng, degree: usize) -> ChebSeries {
    ChebSeries::new((0..=degree).map(|_| r.gen_range(-1.0..1.0)).collect())
}

pub fn random_modal(r: &mut ChaCha8Rng, n: usize) -> ModalData {
    ModalData::new((0..n).map(|_| r.gen_range(-1.0..1.0)).collect(), (0..n).map(|_| r.gen_range(-1.0..1.0)).collect())
        .unwrap()
}

/// `T_n(x)` through the angle, independent of the recurrence.
pub fn t_trig(n: usize, x: f64) -> f64 {
    (n as f64 * x.clamp(-1.0, 1.0).acos()).cos()
}

/// `U_n(x)` through the angle.
pub fn u_trig(n: usize, x: f64) -> f64 {
    let t = x.clamp(-1.0, 1.0).acos();
    if t.sin().abs() < 1e-12 {
        return (n + 1) as f64 * if t < 1.0 { 1.0 } else { (-1f64).powi(n as i32) };
    }
    ((n + 1) as f64 * t).sin() / t.sin()
}

/// `∫₋₁¹ F(x)/√(1-x²) dx` by the trapezoid rule in the angle with `m` panels.
pub fn trapezoid_first_kind<F: Fn(f64) -> f64>(f: F, m: usize) -> f64 {
    let h = PI / m as f64;
    let mut s = 0.5 * (f(1.0) + f(-1.0));
    for k in 1..m {
        s += f((k as f64 * h).cos());
    }
    s * h
}

/// Interior grid staying `margin` away from `±1`.
pub fn interior_grid(points: usize, margin: f64) -> Vec<f64> {
    let r = 1.0 - margin;
    (0..points).map(|i| r * (2.0 * i as f64 / (points - 1) as f64 - 1.0)).collect()
}

/// Time integral of `c_n'' + θ² c_n = h(t)` by the Dormand–Prince oracle.
pub fn ode_mode<H: Fn(f64) -> f64>(theta: f64, c0: f64, v0: f64, h: H, t1: f64) -> (f64, f64) {
    let y = slosh_oracle::integrate_ode(
        |t, y: &[f64]| vec![y[1], h(t) - theta * theta * y[0]],
        0.0,
        &[c0, v0],
        t1,
        1e-13,
        1e-15,
    );
    (y[0], y[1])
}
