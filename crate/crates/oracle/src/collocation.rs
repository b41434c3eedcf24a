//! Collocation eigenvalues of the interface operator in its tangential form.
//!
//! For a trial function `φ = Σ c_j ψ_j` the normal derivative is taken as
//! `√(1-x²)·(1/π) PV∫ φ'(ξ)/(√(1-ξ²)(x-ξ)) dξ`, evaluated by principal-value
//! quadrature, and the strong equation `N[φ](x_i) = λ φ(x_i)/|f'(x_i)|` is
//! imposed at interior Chebyshev points. The resulting nonsymmetric pencil
//! is solved densely.

use nalgebra::DMatrix;

use crate::pv::hilbert_first_kind;

/// One trial function and its derivative.
pub struct Trial {
    pub value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub derivative: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// Interior first-kind Chebyshev points `cos((2i+1)π/(2m))`.
pub fn chebyshev_points(m: usize) -> Vec<f64> {
    (0..m).map(|i| (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * m) as f64).cos()).collect()
}

/// `√(1-x²)·(1/π) PV∫ φ'(ξ)/(√(1-ξ²)(x-ξ)) dξ` from the derivative `φ'`.
pub fn tangential_form<D: Fn(f64) -> f64>(derivative: D, x: f64) -> f64 {
    (1.0 - x * x).sqrt() * hilbert_first_kind(derivative, x)
}

/// Real eigenvalues of the collocation pencil, ascending.
///
/// Complex pairs (with imaginary part above `1e-8` relative) are dropped.
pub fn collocation_eigenvalues<W: Fn(f64) -> f64>(trials: &[Trial], weight: W, points: &[f64]) -> Vec<f64> {
    let (m, n) = (points.len(), trials.len());
    assert_eq!(m, n, "collocation needs as many points as trial functions");
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut b = DMatrix::<f64>::zeros(m, n);
    for (i, &x) in points.iter().enumerate() {
        let fw = weight(x);
        for (j, t) in trials.iter().enumerate() {
            a[(i, j)] = tangential_form(|xi| (t.derivative)(xi), x);
            b[(i, j)] = (t.value)(x) / fw;
        }
    }
    let b_inv = b.try_inverse().expect("collocation mass matrix is singular");
    let op = b_inv * a;
    let eig = op.complex_eigenvalues();
    let mut out: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .collect();
    out.sort_by(|p, q| p.total_cmp(q));
    out
}
