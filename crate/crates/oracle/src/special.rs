//! Special functions by direct series summation.

/// Bessel function `J_n(z)` from its power series. Accurate for moderate `z`.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = half.powi(n as i32);
    for k in 1..=n {
        term /= k as f64;
    }
    let mut sum = term;
    for m in 1..200u32 {
        term *= -half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}
