//! Dense least-squares Chebyshev fits.

use nalgebra::{DMatrix, DVector};

/// Fits `Σ a_n T_n` of the given degree to `(x, y)` samples.
///
/// `T_n` is evaluated through `cos(n·acos x)` so the oracle does not share
/// the recurrence used by the library.
pub fn chebyshev_least_squares(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len();
    let v = DMatrix::from_fn(m, degree + 1, |i, j| (j as f64 * xs[i].acos()).cos());
    let rhs = DVector::from_column_slice(ys);
    let svd = v.svd(true, true);
    svd.solve(&rhs, 1e-15).expect("svd solve").iter().copied().collect()
}
