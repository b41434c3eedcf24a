//! Interface weights `|f'(x)|` induced by the container's conformal map.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::chebyshev::{angular_legendre_rule, ChebSeries};
use crate::error::{Result, SloshError};

/// Interface weight `x ↦ |f'(f⁻¹(x))|` on `[-1, 1]`, with `weight ~ c (1-x²)^β`
/// near the contact points.
#[derive(Clone)]
pub struct DomainWeight {
    kind: Kind,
    beta: f64,
    label: String,
    symmetric: bool,
}

#[derive(Clone)]
enum Kind {
    HalfDisk,
    Chebyshev,
    Flat,
    Custom(Arc<AngularSpline>),
}

impl fmt::Debug for DomainWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DomainWeight")
            .field("label", &self.label)
            .field("beta", &self.beta)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

/// Lower half-disk container, mapped by `f(z) = 2z/(z²+1)`.
///
/// With `s = √(1-x²)` the preimage is `z = (1-s)/x` and `|f'(z)|` reduces to `s(1+s)`.
pub fn half_disk_weight() -> DomainWeight {
    DomainWeight { kind: Kind::HalfDisk, beta: 0.5, label: "half-disk".into(), symmetric: true }
}

/// Synthetic weight `√(1-x²)`, for which `𝒜` is diagonal in `T_n`.
pub fn chebyshev_weight() -> DomainWeight {
    DomainWeight { kind: Kind::Chebyshev, beta: 0.5, label: "cheb-fixture".into(), symmetric: true }
}

/// Rigid-lid fixture `|f'| ≡ 1`.
pub fn flat_weight() -> DomainWeight {
    DomainWeight { kind: Kind::Flat, beta: 0.0, label: "flat".into(), symmetric: true }
}

/// Interpolating weight through `(x, value)` samples.
///
/// The endpoint factor `(1-x²)^β` is divided out and the remaining ratio is
/// interpolated by a clamped cubic spline in `θ = acos x`; outside the sampled
/// range the end cubic is extended.
pub fn custom_weight(samples: &[(f64, f64)], beta: f64, label: &str, symmetric: bool) -> Result<DomainWeight> {
    if !beta.is_finite() || beta > 0.5 {
        return Err(SloshError::Admissibility(format!(
            "endpoint exponent {beta} exceeds 1/2; contact angles below a right angle are not supported"
        )));
    }
    if beta < 0.0 {
        return Err(SloshError::Input(format!("endpoint exponent {beta} is negative")));
    }
    if samples.len() < 4 {
        return Err(SloshError::Input("a custom weight needs at least 4 samples".into()));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for &(x, v) in samples {
        if !x.is_finite() || x.abs() > 1.0 {
            return Err(SloshError::Input(format!("sample abscissa {x} lies outside [-1, 1]")));
        }
        if !v.is_finite() || v <= 0.0 {
            return Err(SloshError::Input(format!("weight sample {v} at x = {x} is not positive")));
        }
        if beta > 0.0 && x.abs() == 1.0 {
            return Err(SloshError::Input("samples at ±1 are not allowed when the weight vanishes there".into()));
        }
        pts.push((x.acos(), v / (1.0 - x * x).powf(beta)));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.windows(2).any(|p| p[1].0 - p[0].0 <= 0.0) {
        return Err(SloshError::Input("sample abscissae must be distinct".into()));
    }
    let spline = AngularSpline::new(pts)?;
    let weight = DomainWeight { kind: Kind::Custom(Arc::new(spline)), beta, label: label.to_string(), symmetric };
    if symmetric {
        for &(x, v) in samples {
            let mirrored = weight.weight(-x)?;
            if (mirrored - v).abs() > 1e-6 * v.max(1.0) {
                return Err(SloshError::Input(format!(
                    "weight flagged symmetric but weight({}) = {mirrored} differs from weight({x}) = {v}",
                    -x
                )));
            }
        }
    }
    Ok(weight)
}

#[derive(Deserialize)]
struct SampleRow {
    x: f64,
    weight: f64,
}

#[derive(Deserialize)]
struct Sidecar {
    beta: f64,
    label: Option<String>,
    #[serde(default)]
    symmetric: bool,
}

/// Loads a custom weight from a CSV file with header `x,weight` and a JSON
/// sidecar of the same stem holding `beta`, `label` and optionally `symmetric`.
pub fn load_custom_weight(csv_path: &Path) -> Result<DomainWeight> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(csv_path)?;
    let mut samples = Vec::new();
    for row in reader.deserialize() {
        let row: SampleRow = row?;
        samples.push((row.x, row.weight));
    }
    let sidecar_path = csv_path.with_extension("json");
    let sidecar: Sidecar = serde_json::from_reader(std::fs::File::open(&sidecar_path).map_err(|e| {
        SloshError::Input(format!("cannot open weight sidecar {}: {e}", sidecar_path.display()))
    })?)?;
    let label = sidecar.label.unwrap_or_else(|| {
        csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "custom".into())
    });
    custom_weight(&samples, sidecar.beta, &label, sidecar.symmetric)
}

impl DomainWeight {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn endpoint_exponent(&self) -> f64 {
        self.beta
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `|f'|` at interface point `x`.
    pub fn weight(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x.abs() > 1.0 {
            return Err(SloshError::Domain { value: x });
        }
        let s2 = 1.0 - x * x;
        let s = s2.sqrt();
        Ok(match &self.kind {
            Kind::HalfDisk => s * (1.0 + s),
            Kind::Chebyshev => s,
            Kind::Flat => 1.0,
            Kind::Custom(sp) => sp.eval(x.acos()) * s2.powf(self.beta),
        })
    }

    /// `√(1-x²)/|f'(x)|`, bounded on `[-1, 1]` whenever `β ≤ 1/2`.
    pub fn sqrt_over_weight(&self, x: f64) -> f64 {
        let s2 = (1.0 - x * x).max(0.0);
        let s = s2.sqrt();
        match &self.kind {
            Kind::HalfDisk => 1.0 / (1.0 + s),
            Kind::Chebyshev => 1.0,
            Kind::Flat => s,
            Kind::Custom(sp) => s2.powf(0.5 - self.beta) / sp.eval(x.clamp(-1.0, 1.0).acos()),
        }
    }

    /// `|f'|` at a mapped wall point `|x| > 1`. Only the half-disk provides a
    /// closed form; other containers need user-supplied wall weights.
    pub fn wall_weight(&self, x: f64) -> Option<f64> {
        match self.kind {
            Kind::HalfDisk if x.abs() > 1.0 => Some(x.abs() * (x * x - 1.0).sqrt()),
            _ => None,
        }
    }
}

/// `min weight(x)/√(1-x²)` over `grid`.
pub fn admissibility_constant(w: &DomainWeight, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(SloshError::Input("admissibility grid is empty".into()));
    }
    let mut c = f64::INFINITY;
    for &x in grid {
        if !(x.abs() < 1.0) {
            return Err(SloshError::Input(format!("grid point {x} is not interior")));
        }
        c = c.min(1.0 / w.sqrt_over_weight(x));
    }
    Ok(c)
}

/// `∫ φ/|f'| dx`, by Gauss–Legendre in the angle on `φ·√(1-x²)/|f'|`.
pub fn mass_functional(phi: &ChebSeries, w: &DomainWeight, node_count: usize) -> Result<f64> {
    let rule = angular_legendre_rule(node_count)?;
    Ok(rule.integrate(|x| phi.eval(x) * w.sqrt_over_weight(x)))
}

/// Clamped cubic spline in the angle variable.
struct AngularSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl AngularSpline {
    fn new(pts: Vec<(f64, f64)>) -> Result<Self> {
        let n = pts.len();
        let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let d0 = lagrange_slope(&t[..4], &y[..4], t[0]);
        let dn = lagrange_slope(&t[n - 4..], &y[n - 4..], t[n - 1]);
        let h: Vec<f64> = t.windows(2).map(|p| p[1] - p[0]).collect();
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        a[(0, 0)] = 2.0 * h[0];
        a[(0, 1)] = h[0];
        rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - d0);
        for i in 1..n - 1 {
            a[(i, i - 1)] = h[i - 1];
            a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
            a[(i, i + 1)] = h[i];
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        a[(n - 1, n - 2)] = h[n - 2];
        a[(n - 1, n - 1)] = 2.0 * h[n - 2];
        rhs[n - 1] = 6.0 * (dn - (y[n - 1] - y[n - 2]) / h[n - 2]);
        let m = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| SloshError::Input("spline system for the custom weight is singular".into()))?;
        Ok(Self { t, y, m: m.iter().copied().collect() })
    }

    fn eval(&self, theta: f64) -> f64 {
        let n = self.t.len();
        let i = match self.t.partition_point(|&ti| ti <= theta) {
            0 => 0,
            k => (k - 1).min(n - 2),
        };
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let h = t1 - t0;
        let (a, b) = (t1 - theta, theta - t0);
        self.m[i] * a * a * a / (6.0 * h)
            + self.m[i + 1] * b * b * b / (6.0 * h)
            + (self.y[i] / h - self.m[i] * h / 6.0) * a
            + (self.y[i + 1] / h - self.m[i + 1] * h / 6.0) * b
    }
}

/// Derivative at `at` of the cubic through four points.
fn lagrange_slope(t: &[f64], y: &[f64], at: f64) -> f64 {
    let mut slope = 0.0;
    for j in 0..4 {
        let mut denom = 1.0;
        for k in 0..4 {
            if k != j {
                denom *= t[j] - t[k];
            }
        }
        let mut num = 0.0;
        for skip in 0..4 {
            if skip == j {
                continue;
            }
            let mut prod = 1.0;
            for k in 0..4 {
                if k != j && k != skip {
                    prod *= at - t[k];
                }
            }
            num += prod;
        }
        slope += y[j] * num / denom;
    }
    slope
}
