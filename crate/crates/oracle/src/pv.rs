//! Principal-value integrals on `[-1, 1]` by singularity subtraction.
//!
//! For a density `F` the principal value splits as
//! `PV∫ F(ξ)/(x-ξ) dξ = ∫ (F(ξ)-F(x))/(x-ξ) dξ + F(x)·ln((1+x)/(1-x))`.
//! The regular part is integrated after the substitution `ξ = cos t`, which
//! also removes the square-root endpoint behaviour of the weighted densities.

use std::f64::consts::PI;

use crate::quad::integrate_with_breaks;

const TOL: f64 = 1e-14;

fn log_term(x: f64) -> f64 {
    ((1.0 + x) / (1.0 - x)).ln()
}

/// `(1/π) PV∫ g(ξ) / (√(1-ξ²) (x-ξ)) dξ` for `|x| < 1`.
pub fn hilbert_first_kind<G: Fn(f64) -> f64>(g: G, x: f64) -> f64 {
    assert!(x.abs() < 1.0);
    let s = (1.0 - x * x).sqrt();
    let fx = g(x) / s;
    let t0 = x.acos();
    let regular = integrate_with_breaks(
        |t: f64| {
            let c = t.cos();
            let den = x - c;
            if den == 0.0 {
                return 0.0;
            }
            (g(c) - fx * t.sin()) / den
        },
        0.0,
        PI,
        &[t0],
        TOL,
    );
    (regular + fx * log_term(x)) / PI
}

/// `(1/π) PV∫ √(1-ξ²) g(ξ) / (x-ξ) dξ` for `|x| < 1`.
pub fn hilbert_second_kind<G: Fn(f64) -> f64>(g: G, x: f64) -> f64 {
    assert!(x.abs() < 1.0);
    let fx = (1.0 - x * x).sqrt() * g(x);
    let t0 = x.acos();
    let regular = integrate_with_breaks(
        |t: f64| {
            let (sn, c) = t.sin_cos();
            let den = x - c;
            if den == 0.0 {
                return 0.0;
            }
            (sn * g(c) - fx) * sn / den
        },
        0.0,
        PI,
        &[t0],
        TOL,
    );
    (regular + fx * log_term(x)) / PI
}

/// `PV∫ √(1-ξ²) / (ξ - x) dξ`, for any `|x| ≠ 1`.
pub fn g_kernel(x: f64) -> f64 {
    if x.abs() < 1.0 {
        -PI * hilbert_second_kind(|_| 1.0, x)
    } else {
        crate::quad::integrate(
            |t: f64| {
                let (sn, c) = t.sin_cos();
                sn * sn / (c - x)
            },
            0.0,
            PI,
            TOL,
        )
    }
}

/// `∫ g(ξ)/√(1-ξ²) dξ` over `[-1, 1]`.
pub fn first_kind_integral<G: Fn(f64) -> f64>(g: G) -> f64 {
    crate::quad::integrate(|t: f64| g(t.cos()), 0.0, PI, TOL)
}
