//! Galerkin eigenmodes of `𝒜e = λ e/|f'|` in trigonometric bases.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize, Serializer};

use crate::chebyshev::{angular_legendre_rule, project, ChebSeries};
use crate::domain::DomainWeight;
use crate::error::{Result, SloshError};
use crate::hilbert::bilinear_a;
use crate::par;

/// Trailing Chebyshev coefficients of a projected basis function must fall below this.
pub const RESOLUTION_TOLERANCE: f64 = 1e-12;

/// Relative residual accepted for a generalized eigenpair.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisFamily {
    /// `sin(nπx)`, `n = 1..count`.
    PinnedAntisymmetric,
    /// `cos((n+½)πx)`, `n = 0..count-1`.
    PinnedSymmetric,
    /// `sin((n+½)πx)`, `n = 0..count-1`.
    FreeAntisymmetric,
    /// `cos(nπx)`, `n = 0..count-1`; the constant is included.
    FreeSymmetric,
    /// Union of the pinned families, ordered by frequency.
    PinnedFull,
    /// Union of the free families, ordered by frequency.
    FreeFull,
    /// `T_1..T_count`.
    Chebyshev,
}

impl BasisFamily {
    /// Whether the family contains functions with nonzero mass, so that the
    /// mass constraint must be imposed.
    pub fn requires_mass_constraint(self) -> bool {
        matches!(
            self,
            BasisFamily::PinnedSymmetric | BasisFamily::FreeSymmetric | BasisFamily::PinnedFull | BasisFamily::FreeFull
        )
    }

    pub fn is_pinned(self) -> bool {
        matches!(self, BasisFamily::PinnedAntisymmetric | BasisFamily::PinnedSymmetric | BasisFamily::PinnedFull)
    }

    pub fn is_free(self) -> bool {
        matches!(self, BasisFamily::FreeAntisymmetric | BasisFamily::FreeSymmetric | BasisFamily::FreeFull)
    }

    /// Value of the `i`-th (zero-based) trigonometric member at `x`.
    fn trig_value(self, i: usize, x: f64) -> f64 {
        let k = i as f64;
        match self {
            BasisFamily::PinnedAntisymmetric => ((k + 1.0) * PI * x).sin(),
            BasisFamily::PinnedSymmetric => ((k + 0.5) * PI * x).cos(),
            BasisFamily::FreeAntisymmetric => ((k + 0.5) * PI * x).sin(),
            BasisFamily::FreeSymmetric => (k * PI * x).cos(),
            BasisFamily::PinnedFull => {
                let f = 0.5 * (k + 1.0) * PI * x;
                if i % 2 == 0 {
                    f.cos()
                } else {
                    f.sin()
                }
            }
            BasisFamily::FreeFull => {
                let f = 0.5 * k * PI * x;
                if i % 2 == 0 {
                    f.cos()
                } else {
                    f.sin()
                }
            }
            BasisFamily::Chebyshev => crate::chebyshev::t_recurrence(i + 1, x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub count: usize,
    pub mass_constraint: bool,
}

impl BasisSpec {
    /// Basis with the mass constraint switched on exactly when the family needs it.
    pub fn new(family: BasisFamily, count: usize) -> Self {
        Self { family, count, mass_constraint: family.requires_mass_constraint() }
    }

    /// Default size for resolving `n_modes` modes.
    pub fn for_modes(family: BasisFamily, n_modes: usize) -> Self {
        Self::new(family, 2 * n_modes + 8)
    }

    pub fn with_mass_constraint(mut self, on: bool) -> Self {
        self.mass_constraint = on;
        self
    }

    pub fn default_cheb_order(&self) -> usize {
        4 * self.count + 32
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(SloshError::Input("basis count must be positive".into()));
        }
        if self.family.requires_mass_constraint() && !self.mass_constraint {
            return Err(SloshError::Input(format!(
                "basis family {:?} contains functions of nonzero mass and needs the mass constraint",
                self.family
            )));
        }
        Ok(())
    }
}

/// Chebyshev series of every basis member, checked for resolution.
pub fn basis_series(spec: &BasisSpec, n_cheb: usize) -> Result<Vec<ChebSeries>> {
    spec.validate()?;
    if spec.family == BasisFamily::Chebyshev {
        if n_cheb < spec.count {
            return Err(SloshError::Resolution(format!(
                "order {n_cheb} cannot hold T_{}",
                spec.count
            )));
        }
        return Ok((1..=spec.count).map(ChebSeries::basis).collect());
    }
    let family = spec.family;
    let series = par::try_map_indexed(spec.count, |i| project(|x| family.trig_value(i, x), n_cheb))?;
    let worst = series.iter().map(|s| s.tail_magnitude(3)).fold(0.0, f64::max);
    if worst >= RESOLUTION_TOLERANCE {
        return Err(SloshError::Resolution(format!(
            "trailing Chebyshev coefficient {worst:.3e} at order {n_cheb}; raise the order"
        )));
    }
    Ok(series)
}

/// `K_ij = (π/2) Σ n a_n^(i) a_n^(j)`.
pub fn assemble_stiffness(basis: &[ChebSeries]) -> DMatrix<f64> {
    let n = basis.len();
    let rows = par::map_indexed(n, |i| (i..n).map(|j| bilinear_a(&basis[i], &basis[j])).collect::<Vec<_>>());
    let mut k = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            k[(i, i + off)] = v;
            k[(i + off, i)] = v;
        }
    }
    k
}

/// Basis values at the nodes of the weighted rule, pre-multiplied by the
/// square roots of `w_k √(1-x²)/|f'|`.
fn weighted_samples(basis: &[ChebSeries], w: &DomainWeight, node_count: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let rule = angular_legendre_rule(node_count)?;
    let q: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&x, &wt)| wt * w.sqrt_over_weight(x)).collect();
    if q.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(SloshError::Admissibility(format!("weight '{}' gives an unbounded mass integrand", w.label())));
    }
    let cols = par::map_indexed(basis.len(), |i| {
        rule.nodes.iter().zip(&q).map(|(&x, &qk)| basis[i].eval(x) * qk.sqrt()).collect::<Vec<_>>()
    });
    let mut s = DMatrix::zeros(node_count, basis.len());
    for (j, col) in cols.into_iter().enumerate() {
        s.set_column(j, &DVector::from_vec(col));
    }
    Ok((s, q))
}

/// `M_ij = ∫ ψ_i ψ_j / |f'|`.
pub fn assemble_mass(basis: &[ChebSeries], w: &DomainWeight, node_count: usize) -> Result<DMatrix<f64>> {
    let (s, _) = weighted_samples(basis, w, node_count)?;
    let m = gram(&s);
    if m.clone().cholesky().is_none() {
        return Err(SloshError::Resolution("mass matrix is not positive definite; raise the node count".into()));
    }
    Ok(m)
}

fn gram(s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s.ncols();
    let rows = par::map_indexed(n, |i| (i..n).map(|j| s.column(i).dot(&s.column(j))).collect::<Vec<_>>());
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m[(i, i + off)] = v;
            m[(i + off, i)] = v;
        }
    }
    m
}

/// `g_i = ∫ ψ_i / |f'|`.
pub fn mass_constraint_vector(basis: &[ChebSeries], w: &DomainWeight, node_count: usize) -> Result<DVector<f64>> {
    let rule = angular_legendre_rule(node_count)?;
    let g = par::map_indexed(basis.len(), |i| rule.integrate(|x| basis[i].eval(x) * w.sqrt_over_weight(x)));
    Ok(DVector::from_vec(g))
}

/// Orthonormal basis (columns) of the complement of `g`, from a Householder reflection.
pub fn orthogonal_complement(g: &DVector<f64>) -> DMatrix<f64> {
    let n = g.len();
    let norm = g.norm();
    if norm == 0.0 {
        return DMatrix::identity(n, n);
    }
    let mut v = g.clone();
    v[0] += if g[0] >= 0.0 { norm } else { -norm };
    let vv = v.dot(&v);
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, n - 1).into_owned()
}

/// Eigenpairs of `K v = λ M v` for symmetric `K` and positive definite `M`,
/// ascending, with `vᵀ M v = 1`.
pub fn generalized_symmetric_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| SloshError::Resolution("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_k = l
        .solve_lower_triangular(k)
        .ok_or_else(|| SloshError::Resolution("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or_else(|| SloshError::Resolution("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt = l.transpose();
    let mut lambdas = Vec::with_capacity(order.len());
    let mut vecs = Vec::with_capacity(order.len());
    for i in order {
        let y = eig.eigenvectors.column(i).into_owned();
        let v = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| SloshError::Resolution("singular Cholesky factor".into()))?;
        lambdas.push(eig.eigenvalues[i]);
        vecs.push(v);
    }
    Ok((lambdas, vecs))
}

/// Numerical settings of a modal solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub cheb_order: usize,
    pub quadrature_nodes: usize,
}

impl SolveOptions {
    pub fn defaults_for(spec: &BasisSpec) -> Self {
        let cheb_order = spec.default_cheb_order();
        Self { cheb_order, quadrature_nodes: 2 * cheb_order + 64 }
    }
}

/// Resolved eigenpairs `(λ_n, e_n)`, orthonormal with respect to `1/|f'|`.
#[derive(Clone, Debug, Serialize)]
pub struct ModeSet {
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub basis: BasisSpec,
    #[serde(rename = "weight", serialize_with = "serialize_label")]
    pub weight: DomainWeight,
    pub options: SolveOptions,
    pub modes: Vec<ChebSeries>,
}

fn serialize_label<S: Serializer>(w: &DomainWeight, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(w.label())
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// The first `n` modes.
    pub fn truncated(&self, n: usize) -> ModeSet {
        let n = n.min(self.len());
        ModeSet {
            lambdas: self.lambdas[..n].to_vec(),
            thetas: self.thetas[..n].to_vec(),
            basis: self.basis,
            weight: self.weight.clone(),
            options: self.options,
            modes: self.modes[..n].to_vec(),
        }
    }

    /// `Σ c_n e_n`.
    pub fn reconstruct(&self, coeffs: &[f64]) -> ChebSeries {
        let n = coeffs.len().min(self.len());
        ChebSeries::combine(&coeffs[..n], &self.modes[..n])
    }

    /// `(φ, e_n)` with weight `1/|f'|` for every mode.
    pub fn project(&self, phi: &ChebSeries) -> Result<Vec<f64>> {
        let rule = angular_legendre_rule(self.options.quadrature_nodes)?;
        let w = &self.weight;
        let q: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(&x, &wt)| wt * phi.eval(x) * w.sqrt_over_weight(x)).collect();
        Ok(par::map_indexed(self.len(), |n| rule.nodes.iter().zip(&q).map(|(&x, &qk)| qk * self.modes[n].eval(x)).sum()))
    }

    /// `θ_1`, the slowest modal frequency.
    pub fn fundamental(&self) -> f64 {
        self.thetas.first().copied().unwrap_or(f64::NAN)
    }

    /// Rows `n,lambda,theta`.
    pub fn to_csv_rows(&self) -> Vec<(usize, f64, f64)> {
        (0..self.len()).map(|i| (i + 1, self.lambdas[i], self.thetas[i])).collect()
    }
}

/// Solves for the `n_modes` lowest modes with default numerical settings.
pub fn solve_modes(spec: &BasisSpec, w: &DomainWeight, n_modes: usize) -> Result<ModeSet> {
    solve_modes_with(spec, w, n_modes, SolveOptions::defaults_for(spec))
}

/// Discrete system of a modal solve: stiffness, mass and the coordinates of
/// the admissible subspace (columns of `subspace`).
pub struct GalerkinSystem {
    pub basis: Vec<ChebSeries>,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub subspace: DMatrix<f64>,
}

impl GalerkinSystem {
    pub fn assemble(spec: &BasisSpec, w: &DomainWeight, options: SolveOptions) -> Result<Self> {
        let basis = basis_series(spec, options.cheb_order)?;
        let stiffness = assemble_stiffness(&basis);
        let (samples, _) = weighted_samples(&basis, w, options.quadrature_nodes)?;
        let mass = gram(&samples);
        let n = basis.len();
        let subspace = if spec.mass_constraint {
            let g = mass_constraint_vector(&basis, w, options.quadrature_nodes)?;
            orthogonal_complement(&g)
        } else {
            DMatrix::identity(n, n)
        };
        Ok(Self { basis, stiffness, mass, subspace })
    }

    pub fn reduced(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let z = &self.subspace;
        let k = z.transpose() * &self.stiffness * z;
        let m = z.transpose() * &self.mass * z;
        ((&k + k.transpose()) * 0.5, (&m + m.transpose()) * 0.5)
    }
}

pub fn solve_modes_with(spec: &BasisSpec, w: &DomainWeight, n_modes: usize, options: SolveOptions) -> Result<ModeSet> {
    if n_modes == 0 {
        return Err(SloshError::Input("at least one mode must be requested".into()));
    }
    if spec.count < n_modes + 4 {
        return Err(SloshError::Input(format!(
            "basis count {} is below n_modes + 4 = {}",
            spec.count,
            n_modes + 4
        )));
    }
    let sys = GalerkinSystem::assemble(spec, w, options)?;
    let (kr, mr) = sys.reduced();
    if mr.clone().cholesky().is_none() {
        return Err(SloshError::Resolution("mass matrix is not positive definite; raise the node count".into()));
    }
    let (lambdas, vecs) = generalized_symmetric_eigen(&kr, &mr)?;
    let lambda_scale = lambdas.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let mut accepted = Vec::new();
    for (lambda, v) in lambdas.into_iter().zip(vecs) {
        if lambda <= 1e-12 * lambda_scale {
            continue;
        }
        let kv = &kr * &v;
        let mv = &mr * &v;
        let residual = (&kv - &mv * lambda).norm();
        if residual <= EIGEN_RESIDUAL_TOLERANCE * (kv.norm() + lambda * mv.norm()) {
            accepted.push((lambda, v));
        }
        if accepted.len() == n_modes {
            break;
        }
    }
    if accepted.len() < n_modes {
        return Err(SloshError::Resolution(format!(
            "only {} of {n_modes} positive eigenvalues resolved; enlarge the basis",
            accepted.len()
        )));
    }
    order_clusters(&mut accepted, &sys, &mr);
    let mut out_lambdas = Vec::with_capacity(n_modes);
    let mut modes = Vec::with_capacity(n_modes);
    for (lambda, v) in accepted {
        let coeffs = &sys.subspace * v;
        let mut e = ChebSeries::combine(coeffs.as_slice(), &sys.basis);
        if largest_coefficient(&e) < 0.0 {
            e = e.scaled(-1.0);
        }
        out_lambdas.push(lambda);
        modes.push(e);
    }
    let thetas = out_lambdas.iter().map(|l| l.sqrt()).collect();
    Ok(ModeSet { lambdas: out_lambdas, thetas, basis: *spec, weight: w.clone(), options, modes })
}

fn largest_coefficient(e: &ChebSeries) -> f64 {
    e.coeffs().iter().copied().fold(0.0, |best, c| if c.abs() > best.abs() { c } else { best })
}

fn first_significant_index(e: &ChebSeries) -> usize {
    let scale = e.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    e.coeffs().iter().position(|c| c.abs() > 1e-12 * scale).unwrap_or(usize::MAX)
}

/// Within runs of numerically equal eigenvalues, orders vectors by the index
/// of their first significant Chebyshev coefficient and re-orthonormalizes
/// them in the reduced mass inner product.
fn order_clusters(pairs: &mut [(f64, DVector<f64>)], sys: &GalerkinSystem, mr: &DMatrix<f64>) {
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end].0 - pairs[start].0).abs() <= 1e-9 * pairs[start].0 {
            end += 1;
        }
        if end - start > 1 {
            let cluster = &mut pairs[start..end];
            cluster.sort_by_key(|(_, v)| {
                let e = ChebSeries::combine((&sys.subspace * v).as_slice(), &sys.basis);
                first_significant_index(&e)
            });
            for i in 0..cluster.len() {
                let mut v = cluster[i].1.clone();
                for j in 0..i {
                    let u = &cluster[j].1;
                    let proj = u.dot(&(mr * &v));
                    v -= u * proj;
                }
                let norm = v.dot(&(mr * &v)).sqrt();
                cluster[i].1 = v / norm;
            }
        }
        start = end;
    }
}
