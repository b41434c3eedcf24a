//! Finite Hilbert transform on `[-1, 1]` in Chebyshev coefficient space.
//!
//! Every principal-value integral of polynomial data is evaluated through
//! the exact identities
//!
//! ```text
//! (1/π) PV ∫ T_r(ξ) / (√(1-ξ²)(x-ξ)) dξ = -U_{r-1}(x)
//! (1/π) PV ∫ √(1-ξ²) U_k(ξ) / (x-ξ) dξ  =  T_{k+1}(x)
//! ```
//!
//! so no singular quadrature appears outside the test oracles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chebyshev::{first_kind_rule, ChebSeries, QuadratureRule, SecondKindSeries};
use crate::error::{Result, SloshError};

/// Absolute tolerance for zero-mean and zero-moment preconditions.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

/// Minimum distance of pointwise evaluation grids from `±1`.
pub const ENDPOINT_MARGIN: f64 = 1e-3;

/// `Σ u_n T_n(x) / √(1-x²)`, an element of `L²` with weight `√(1-x²)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightedSeries {
    coeffs: Vec<f64>,
}

impl WeightedSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Pointwise value, defined for `|x| < 1`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x.abs() >= 1.0 {
            return Err(SloshError::Domain { value: x });
        }
        let numerator = ChebSeries::new(self.coeffs.clone()).eval(x);
        Ok(numerator / (1.0 - x * x).sqrt())
    }

    /// `∫ √(1-x²) |u|² dx = π u₀² + (π/2) Σ_{n≥1} u_n²`.
    pub fn norm_squared(&self) -> f64 {
        let mut it = self.coeffs.iter();
        let head = it.next().map_or(0.0, |u0| PI * u0 * u0);
        head + 0.5 * PI * it.map(|u| u * u).sum::<f64>()
    }
}

/// The two weighted moments of a tangential derivative `φ'`:
/// `m0 = ∫ φ'/√(1-x²)` and `m1 = ∫ x φ'/√(1-x²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub m0: f64,
    pub m1: f64,
}

impl MomentPair {
    pub fn max_abs(&self) -> f64 {
        self.m0.abs().max(self.m1.abs())
    }
}

/// Second-kind coefficients of `(1/π) PV ∫ φ(ξ)/(√(1-ξ²)(x-ξ)) dξ`, namely `{-a_{k+1}}`.
pub fn airfoil_transform(phi: &ChebSeries) -> SecondKindSeries {
    let a = phi.coeffs();
    if a.len() <= 1 {
        return SecondKindSeries::new(vec![0.0]);
    }
    SecondKindSeries::new(a[1..].iter().map(|c| -c).collect())
}

/// First-kind coefficients of `(1/π) PV ∫ √(1-ξ²) s(ξ)/(x-ξ) dξ` for a
/// second-kind series `s`, namely `U_k ↦ T_{k+1}`.
pub fn second_kind_transform(s: &SecondKindSeries) -> ChebSeries {
    let mut out = Vec::with_capacity(s.coeffs().len() + 1);
    out.push(0.0);
    out.extend_from_slice(s.coeffs());
    ChebSeries::new(out)
}

/// The operator `𝒜φ = Σ_{n≥1} n a_n T_n / √(1-x²)`.
pub fn apply_a(phi: &ChebSeries) -> WeightedSeries {
    WeightedSeries::new(phi.coeffs().iter().enumerate().map(|(n, a)| n as f64 * a).collect())
}

/// `(π/2) Σ_{n≥1} n a_n b_n`.
pub fn bilinear_a(phi: &ChebSeries, psi: &ChebSeries) -> f64 {
    let n = phi.coeffs().len().min(psi.coeffs().len());
    let s = (1..n).fold(0.0, |acc, k| acc + k as f64 * (phi.coeff(k) * psi.coeff(k)));
    0.5 * PI * s
}

/// Weighted moments of a tangential derivative sampled on `rule`.
pub fn moments(phi_x: &ChebSeries, rule: &QuadratureRule) -> MomentPair {
    MomentPair { m0: rule.integrate(|x| phi_x.eval(x)), m1: rule.integrate(|x| x * phi_x.eval(x)) }
}

/// Moments of `φ'` computed from the coefficients of `φ` with no quadrature:
/// `m0 = π Σ_{n odd} n a_n`, `m1 = π Σ_{n even} n a_n`.
pub fn derivative_moments(phi: &ChebSeries) -> MomentPair {
    let (mut odd, mut even) = (0.0, 0.0);
    for (n, a) in phi.coeffs().iter().enumerate().skip(1) {
        if n % 2 == 1 {
            odd += n as f64 * a;
        } else {
            even += n as f64 * a;
        }
    }
    MomentPair { m0: PI * odd, m1: PI * even }
}

/// Adjusts `a_1` and `a_2` so that both derivative moments vanish.
pub fn enforce_moment_conditions(phi: &ChebSeries) -> ChebSeries {
    let mut a = phi.coeffs().to_vec();
    if a.len() < 3 {
        a.resize(3, 0.0);
    }
    let odd: f64 = (3..a.len()).step_by(2).map(|n| n as f64 * a[n]).sum();
    let even: f64 = (4..a.len()).step_by(2).map(|n| n as f64 * a[n]).sum();
    a[1] = -odd;
    a[2] = -0.5 * even;
    ChebSeries::new(a)
}

/// The normal derivative at `x` written three ways: the weighted transform of
/// `φ'`, the second-kind transform of `φ'`, and `𝒜φ`.
pub fn normal_derivative_forms(phi: &ChebSeries, x: f64) -> Result<[f64; 3]> {
    if x.is_nan() || x.abs() >= 1.0 {
        return Err(SloshError::Domain { value: x });
    }
    let w = (1.0 - x * x).sqrt();
    let tangential = airfoil_transform(&phi.derivative()).eval(x) * w;
    let second = second_kind_transform(&phi.derivative_second_kind()).eval(x) / w;
    let direct = apply_a(phi).eval(x)?;
    Ok([tangential, second, direct])
}

/// Largest pairwise discrepancy between the three normal-derivative forms on `grid`.
pub fn equivalent_forms_gap(phi: &ChebSeries, grid: &[f64]) -> Result<f64> {
    if !phi.is_finite() {
        return Err(SloshError::Input("series has non-finite coefficients".into()));
    }
    let m = derivative_moments(phi);
    if m.m0.abs() > MOMENT_TOLERANCE {
        return Err(SloshError::Input(format!(
            "zeroth moment of the derivative is {:.3e}, must vanish",
            m.m0
        )));
    }
    if m.m1.abs() > MOMENT_TOLERANCE {
        return Err(SloshError::Input(format!(
            "first moment of the derivative is {:.3e}, must vanish",
            m.m1
        )));
    }
    let mut gap: f64 = 0.0;
    for &x in grid {
        if !(1.0 - x.abs() >= ENDPOINT_MARGIN * (1.0 - 1e-9)) {
            return Err(SloshError::Input(format!("grid point {x} is within {ENDPOINT_MARGIN} of ±1")));
        }
        let [a, b, c] = normal_derivative_forms(phi, x)?;
        gap = gap.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
    }
    Ok(gap)
}

/// Recovers the tangential derivative `φ'` from zero-mean normal data `g`.
///
/// `g` is expanded as `√(1-x²) Σ_{k≤order} b_k U_k`, whence `φ' = -Σ b_k T_{k+1}`.
/// The midpoint rule in the angle variable is exact for this projection when `g`
/// is `√(1-x²)` times a polynomial of degree at most `order`.
pub fn invert_on_interval<F: Fn(f64) -> f64>(g: F, order: usize) -> Result<ChebSeries> {
    let rule = first_kind_rule(2 * (order + 2))?;
    let samples = rule
        .nodes
        .iter()
        .map(|&x| {
            let v = g(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(SloshError::Input(format!("non-finite normal data {v} at x = {x}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut b = vec![0.0; order + 1];
    for ((&x, &wt), &gx) in rule.nodes.iter().zip(&rule.weights).zip(&samples) {
        let s = (1.0 - x * x).sqrt();
        let (mut prev, mut cur) = (0.0, 1.0);
        for bk in b.iter_mut() {
            *bk += wt * gx * s * cur;
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    for bk in b.iter_mut() {
        *bk *= 2.0 / PI;
    }
    let mean = 0.5 * PI * b[0];
    if mean.abs() > MOMENT_TOLERANCE {
        return Err(SloshError::Input(format!(
            "normal data has integral {mean:.3e}; mass conservation requires zero"
        )));
    }
    let mut out = vec![0.0; order + 2];
    for (k, bk) in b.iter().enumerate() {
        out[k + 1] = -bk;
    }
    Ok(ChebSeries::new(out))
}

/// Normal derivative `√(1-x²)·(1/π) PV ∫ φ'(ξ)/(√(1-ξ²)(x-ξ)) dξ` produced by
/// a tangential derivative, with the free constant set to zero.
pub fn normal_from_tangential(phi_x: &ChebSeries, x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 {
        return Err(SloshError::Domain { value: x });
    }
    Ok((1.0 - x * x).sqrt() * airfoil_transform(phi_x).eval(x))
}
