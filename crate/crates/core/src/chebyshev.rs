//! Chebyshev polynomial kernels, Gauss quadrature and coefficient-space
//! projection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SloshError};

/// A truncated first-kind Chebyshev series `Σ a_n T_n(x)`.
///
/// Serializes as a bare JSON array indexed by degree. Equality ignores
/// trailing zeros.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChebSeries {
    coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    /// The single polynomial `T_n`.
    pub fn basis(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `T_n`, zero beyond the stored order.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    /// Truncation order `N` (number of stored coefficients minus one).
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Evaluates the series by Clenshaw's recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let c = &self.coeffs;
        match c.len() {
            0 => 0.0,
            1 => c[0],
            _ => {
                let (mut b1, mut b2) = (0.0, 0.0);
                for &ck in c[1..].iter().rev() {
                    let b0 = ck + 2.0 * x * b1 - b2;
                    b2 = b1;
                    b1 = b0;
                }
                c[0] + x * b1 - b2
            }
        }
    }

    /// Derivative as a first-kind series.
    pub fn derivative(&self) -> ChebSeries {
        let n = self.order();
        if n == 0 {
            return ChebSeries::zero();
        }
        let c = &self.coeffs;
        let mut d = vec![0.0; n + 1];
        for k in (1..=n).rev() {
            d[k - 1] = d.get(k + 1).copied().unwrap_or(0.0) + 2.0 * k as f64 * c[k];
        }
        d[0] *= 0.5;
        d.truncate(n);
        ChebSeries::new(d)
    }

    /// Derivative expressed on the second-kind basis, using `T_n' = n U_{n-1}`.
    pub fn derivative_second_kind(&self) -> SecondKindSeries {
        let d = (1..self.coeffs.len()).map(|n| n as f64 * self.coeffs[n]).collect::<Vec<_>>();
        SecondKindSeries::new(if d.is_empty() { vec![0.0] } else { d })
    }

    pub fn scaled(&self, factor: f64) -> ChebSeries {
        ChebSeries::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// `self + factor·other`, padding to the longer order.
    pub fn add_scaled(&self, other: &ChebSeries, factor: f64) -> ChebSeries {
        let n = self.coeffs.len().max(other.coeffs.len());
        ChebSeries::new((0..n).map(|k| self.coeff(k) + factor * other.coeff(k)).collect())
    }

    /// Linear combination `Σ w_i s_i` accumulated in index order.
    pub fn combine(weights: &[f64], series: &[ChebSeries]) -> ChebSeries {
        assert_eq!(weights.len(), series.len());
        let n = series.iter().map(|s| s.coeffs.len()).max().unwrap_or(1);
        let mut out = vec![0.0; n];
        for (w, s) in weights.iter().zip(series) {
            for (o, c) in out.iter_mut().zip(&s.coeffs) {
                *o += w * c;
            }
        }
        ChebSeries::new(out)
    }

    /// Largest magnitude among the last `count` coefficients.
    pub fn tail_magnitude(&self, count: usize) -> f64 {
        let start = self.coeffs.len().saturating_sub(count);
        self.coeffs[start..].iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl PartialEq for ChebSeries {
    fn eq(&self, other: &Self) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| self.coeff(k) == other.coeff(k))
    }
}

/// A truncated second-kind Chebyshev series `Σ b_k U_k(x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SecondKindSeries {
    coeffs: Vec<f64>,
}

impl SecondKindSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &ck in self.coeffs.iter().rev() {
            let b0 = ck + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        b1
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 {
        Err(SloshError::Domain { value: x })
    } else {
        Ok(())
    }
}

/// `T_n(x)` by the three-term recurrence.
pub fn eval_t(n: usize, x: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(t_recurrence(n, x))
}

/// `U_n(x)` by the three-term recurrence.
pub fn eval_u(n: usize, x: f64) -> Result<f64> {
    check_domain(x)?;
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return Ok(1.0);
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

pub(crate) fn t_recurrence(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return 1.0;
    }
    for _ in 1..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Which construction produced a [`QuadratureRule`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// Gauss–Chebyshev of the first kind: exact for `p(x)/√(1-x²)`, `deg p ≤ 2n-1`.
    FirstKind,
    /// Gauss–Legendre in the angle `θ = acos x`. Integrates the same weight
    /// and converges spectrally for integrands smooth in `θ`.
    AngularLegendre,
}

/// Nodes and weights for `∫₋₁¹ g(x)/√(1-x²) dx ≈ Σ w_k g(x_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k g(x_k)`, summed in node order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// Gauss–Chebyshev rule of the first kind with `node_count` nodes.
pub fn first_kind_rule(node_count: usize) -> Result<QuadratureRule> {
    if node_count == 0 {
        return Err(SloshError::Input("quadrature needs at least one node".into()));
    }
    let m = node_count as f64;
    let nodes = (0..node_count).map(|k| ((2 * k + 1) as f64 * PI / (2.0 * m)).cos()).collect();
    Ok(QuadratureRule { nodes, weights: vec![PI / m; node_count], kind: RuleKind::FirstKind })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = x;
        xs[n - 1 - i] = -x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

/// Gauss–Legendre in `θ ∈ [0, π]`, returned as nodes `x = cos θ`.
pub fn angular_legendre_rule(node_count: usize) -> Result<QuadratureRule> {
    if node_count == 0 {
        return Err(SloshError::Input("quadrature needs at least one node".into()));
    }
    let (xi, wi) = gauss_legendre(node_count);
    let nodes = xi.iter().map(|&s| (0.5 * PI * (1.0 + s)).cos()).collect();
    let weights = wi.iter().map(|&w| 0.5 * PI * w).collect();
    Ok(QuadratureRule { nodes, weights, kind: RuleKind::AngularLegendre })
}

/// Chebyshev coefficients of `g` up to order `order`, from `2(order+1)`
/// first-kind nodes.
pub fn project<F: Fn(f64) -> f64>(g: F, order: usize) -> Result<ChebSeries> {
    let m = 2 * (order + 1);
    let rule = first_kind_rule(m)?;
    let mut coeffs = vec![0.0; order + 1];
    for &x in &rule.nodes {
        let gx = g(x);
        if !gx.is_finite() {
            return Err(SloshError::Input(format!("non-finite sample {gx} at x = {x}")));
        }
        let (mut prev, mut cur) = (1.0, x);
        coeffs[0] += gx;
        if order >= 1 {
            coeffs[1] += gx * x;
        }
        for c in coeffs.iter_mut().skip(2) {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
            *c += gx * cur;
        }
    }
    let scale = 2.0 / m as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    coeffs[0] *= 0.5;
    Ok(ChebSeries::new(coeffs))
}
