//! Exact control by per-mode Hilbert uniqueness synthesis, and its
//! realization by point injections on the container wall.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::chebyshev::{angular_legendre_rule, first_kind_rule};
use crate::domain::DomainWeight;
use crate::dynamics::{
    energy_with, evolve_forced, observability_threshold, observed_mode, step_count, Forcing, ModalData, ModalState,
};
use crate::error::{Result, SloshError};
use crate::par;
use crate::spectrum::{orthogonal_complement, ModeSet};

/// Largest accepted condition number of a per-mode terminal-state map.
pub const MAX_MODE_CONDITION: f64 = 1e12;

/// Largest accepted condition number of the injection system.
pub const MAX_INJECTION_CONDITION: f64 = 1e10;

/// Distance from `±1` inside which the kernel is refused.
pub const KERNEL_EXCLUSION: f64 = 1e-9;

/// Minimum distance of injection points from the contact points.
pub const MIN_WALL_OFFSET: f64 = 1e-6;

/// Per-mode diagnostics of a control solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeControl {
    pub theta: f64,
    pub cos_amp: f64,
    pub sin_amp: f64,
    /// Condition number of the map from forcing amplitudes to terminal state.
    pub condition: f64,
    /// Smallest eigenvalue of the observed-energy quadratic form.
    pub gramian_min_eigenvalue: f64,
    pub gramian_condition: f64,
}

/// Control driving the target data to rest at the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSolution {
    /// Minimizing adjoint data. The control is the adjoint trajectory itself,
    /// `h_n(t) = a_n cos θ_n t + b_n sin θ_n t`.
    pub adjoint_data: ModalData,
    pub horizon: f64,
    pub initial_energy: f64,
    pub terminal_energy: f64,
    /// Value of the quadratic functional at the minimizer.
    pub functional: f64,
    pub per_mode: Vec<ModeControl>,
}

impl ControlSolution {
    pub fn forcing(&self) -> Forcing {
        Forcing::Resonant { cos_amp: self.adjoint_data.cos_amp.clone(), sin_amp: self.adjoint_data.sin_amp.clone() }
    }

    /// Control samples on a uniform grid with 64 samples per shortest period.
    pub fn sample(&self, modes: &ModeSet) -> (Vec<f64>, Vec<Vec<f64>>) {
        let steps = step_count(modes, self.horizon);
        let times: Vec<f64> = (0..=steps).map(|k| self.horizon * k as f64 / steps as f64).collect();
        let f = self.forcing();
        let values = times.iter().map(|&t| f.eval(t, modes)).collect();
        (times, values)
    }
}

/// Terminal state `(c(T), ċ(T))` produced from rest by unit `cos θt` and `sin θt` forcing.
pub fn terminal_map(theta: f64, horizon: f64) -> Matrix2<f64> {
    let (s, c) = (theta * horizon).sin_cos();
    let t = horizon;
    Matrix2::new(
        t * s / (2.0 * theta),
        -t * c / (2.0 * theta) + s / (2.0 * theta * theta),
        s / (2.0 * theta) + 0.5 * t * c,
        0.5 * t * s,
    )
}

/// The observed-energy form `∫₀ᵀ (a cos θt + b sin θt)² dt` as a symmetric matrix.
pub fn observation_gramian(theta: f64, horizon: f64) -> Matrix2<f64> {
    let (s2, c2) = (2.0 * theta * horizon).sin_cos();
    let off = (1.0 - c2) / (4.0 * theta);
    Matrix2::new(0.5 * horizon + s2 / (4.0 * theta), off, off, 0.5 * horizon - s2 / (4.0 * theta))
}

fn condition2(m: &Matrix2<f64>) -> f64 {
    let sv = m.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Solves the per-mode control problems for target data `(ψ0, ψ1)` given in modal form.
pub fn hum_control(target: &ModalData, modes: &ModeSet, horizon: f64) -> Result<ControlSolution> {
    if target.len() != modes.len() {
        return Err(SloshError::Input(format!(
            "target has {} modes, the mode set {}",
            target.len(),
            modes.len()
        )));
    }
    if target.cos_amp.iter().chain(&target.sin_amp).any(|v| !v.is_finite()) {
        return Err(SloshError::Input("target amplitudes must be finite".into()));
    }
    let threshold = observability_threshold(modes);
    if !(horizon >= threshold) {
        return Err(SloshError::BelowThreshold { horizon, threshold });
    }
    let per_mode = par::try_map_indexed(modes.len(), |n| {
        let th = modes.thetas[n];
        let c0 = target.cos_amp[n];
        let v0 = th * target.sin_amp[n];
        let (s, c) = (th * horizon).sin_cos();
        let free = Vector2::new(c0 * c + v0 / th * s, -c0 * th * s + v0 * c);
        let g = terminal_map(th, horizon);
        let condition = condition2(&g);
        if !(condition <= MAX_MODE_CONDITION) {
            return Err(SloshError::IllConditionedHorizon { condition });
        }
        let amp = g.lu().solve(&(-free)).ok_or(SloshError::IllConditionedHorizon { condition })?;
        let w = observation_gramian(th, horizon);
        let eig = w.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        Ok(ModeControl {
            theta: th,
            cos_amp: amp[0],
            sin_amp: amp[1],
            condition,
            gramian_min_eigenvalue: lo,
            gramian_condition: hi / lo,
        })
    })?;
    let adjoint_data = ModalData {
        cos_amp: per_mode.iter().map(|m| m.cos_amp).collect(),
        sin_amp: per_mode.iter().map(|m| m.sin_amp).collect(),
    };
    let start = ModalState {
        c: target.cos_amp.clone(),
        c_dot: target.sin_amp.iter().zip(&modes.thetas).map(|(b, th)| b * th).collect(),
        t: 0.0,
    };
    let forcing = Forcing::Resonant { cos_amp: adjoint_data.cos_amp.clone(), sin_amp: adjoint_data.sin_amp.clone() };
    let end = evolve_forced(&start, modes, &forcing, horizon)?;
    let functional = hum_functional(&adjoint_data, target, modes, horizon);
    Ok(ControlSolution {
        initial_energy: energy_with(&start, &modes.lambdas),
        terminal_energy: energy_with(&end, &modes.lambdas),
        adjoint_data,
        horizon,
        functional,
        per_mode,
    })
}

/// `½ ∫₀ᵀ ‖φ‖² dt + (ψ1, φ0) - (ψ0, φ1)` for adjoint data `φ` and target `ψ`.
pub fn hum_functional(adjoint: &ModalData, target: &ModalData, modes: &ModeSet, horizon: f64) -> f64 {
    (0..modes.len())
        .map(|n| {
            let th = modes.thetas[n];
            let (a, b) = (adjoint.cos_amp[n], adjoint.sin_amp[n]);
            let psi0 = target.cos_amp[n];
            let psi1 = th * target.sin_amp[n];
            0.5 * observed_mode(th, a, b, horizon) + psi1 * a - psi0 * th * b
        })
        .sum()
}

/// `PV ∫₋₁¹ √(1-ξ²)/(ξ - x) dξ`.
pub fn kernel_g(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(SloshError::Input(format!("kernel argument {x} is not finite")));
    }
    let d = (x.abs() - 1.0).abs();
    if d < KERNEL_EXCLUSION {
        return Err(SloshError::NearSingular { x });
    }
    if x.abs() < 1.0 {
        Ok(-PI * x)
    } else {
        // π(sign(x)√(x²-1) - x), written without cancellation.
        Ok(-PI * x.signum() / ((x * x - 1.0).sqrt() + x.abs()))
    }
}

fn validate_points(points: &[f64], wall_weights: &[f64]) -> Result<()> {
    if points.len() < 2 {
        return Err(SloshError::Placement("at least two injection points are needed".into()));
    }
    if points.len() != wall_weights.len() {
        return Err(SloshError::Input(format!(
            "{} injection points but {} wall weights",
            points.len(),
            wall_weights.len()
        )));
    }
    for (&x, &w) in points.iter().zip(wall_weights) {
        if !x.is_finite() || x.abs() < 1.0 + MIN_WALL_OFFSET {
            return Err(SloshError::Placement(format!(
                "point {x} is not a wall location at least {MIN_WALL_OFFSET} beyond ±1"
            )));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(SloshError::Input(format!("wall weight {w} at x = {x} must be positive")));
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Err(SloshError::Placement(format!("point {} appears twice", points[i])));
            }
        }
    }
    Ok(())
}

/// `N` default wall points `+1.5, -1.5, +2.0, -2.0, ...`.
pub fn default_injection_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = 1.0 + 0.5 * (i / 2 + 1) as f64;
            if i % 2 == 0 {
                x
            } else {
                -x
            }
        })
        .collect()
}

/// Wall weights for `points`: the supplied list, or the container's closed form.
pub fn wall_weights_for(points: &[f64], weight: &DomainWeight, supplied: Option<&[f64]>) -> Result<Vec<f64>> {
    if let Some(w) = supplied {
        if w.len() != points.len() {
            return Err(SloshError::Input(format!("{} wall weights for {} points", w.len(), points.len())));
        }
        return Ok(w.to_vec());
    }
    points
        .iter()
        .map(|&x| {
            weight.wall_weight(x).ok_or_else(|| {
                SloshError::Input(format!(
                    "container '{}' has no closed-form wall weight at x = {x}; supply wall weights",
                    weight.label()
                ))
            })
        })
        .collect()
}

/// The smooth kernel `(G(x_j) - G(x)) / (π² |f'(x_j)| (x - x_j))`.
fn injection_kernel(xj: f64, gj: f64, wall_weight: f64, x: f64) -> f64 {
    (gj + PI * x) / (PI * PI * wall_weight * (x - xj))
}

/// `m_ij` for the first `N-1` modes and `N` points.
pub fn injection_matrix(points: &[f64], wall_weights: &[f64], modes: &ModeSet) -> Result<DMatrix<f64>> {
    validate_points(points, wall_weights)?;
    let n = points.len();
    if modes.len() < n - 1 {
        return Err(SloshError::Input(format!("{} points need {} modes, only {} resolved", n, n - 1, modes.len())));
    }
    let g: Vec<f64> = points.iter().map(|&x| kernel_g(x)).collect::<Result<_>>()?;
    let rule = first_kind_rule(modes.options.quadrature_nodes)?;
    let mode_vals: Vec<Vec<f64>> =
        par::map_indexed(n - 1, |i| rule.nodes.iter().map(|&x| modes.modes[i].eval(x)).collect());
    let cols = par::map_indexed(n, |j| {
        let k: Vec<f64> = rule.nodes.iter().map(|&x| injection_kernel(points[j], g[j], wall_weights[j], x)).collect();
        (0..n - 1)
            .map(|i| k.iter().zip(&mode_vals[i]).zip(&rule.weights).map(|((kx, ex), w)| w * kx * ex).sum::<f64>())
            .collect::<Vec<_>>()
    });
    let mut m = DMatrix::zeros(n - 1, n);
    for (j, col) in cols.into_iter().enumerate() {
        m.set_column(j, &DVector::from_vec(col));
    }
    Ok(m)
}

/// Injection rates `j_i(t)` on a time grid, with the wall geometry they refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectionPlan {
    pub points: Vec<f64>,
    pub wall_weights: Vec<f64>,
    pub times: Vec<f64>,
    /// `rates[k][i]` is `j_i(times[k])`.
    pub rates: Vec<Vec<f64>>,
    /// Condition number of the system with the zero-sum row.
    pub condition: f64,
}

impl InjectionPlan {
    /// Interface forcing induced at `|x| < 1` by the rates of time sample `k`.
    pub fn forcing_at(&self, k: usize, weight: &DomainWeight, x: f64) -> Result<f64> {
        injection_to_h(&self.points, &self.wall_weights, &self.rates[k], weight, x)
    }

    /// `(h, e_n)` with weight `1/|f'|` for every mode, at time sample `k`,
    /// from the pointwise forcing.
    pub fn modal_forcing(&self, k: usize, modes: &ModeSet) -> Result<Vec<f64>> {
        let rule = angular_legendre_rule(modes.options.quadrature_nodes)?;
        let w = &modes.weight;
        let q: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &wt)| Ok(wt * self.forcing_at(k, w, x)? * w.sqrt_over_weight(x)))
            .collect::<Result<_>>()?;
        Ok(par::map_indexed(modes.len(), |n| rule.nodes.iter().zip(&q).map(|(&x, qk)| qk * modes.modes[n].eval(x)).sum()))
    }
}

/// Solves `Σ_j m_ij j_j(t) = h_i(t)`, `Σ_j j_j(t) = 0` at every time sample.
///
/// `targets[k]` holds the `N-1` modal forcings at `times[k]`.
pub fn solve_injection(
    targets: &[Vec<f64>],
    times: &[f64],
    points: &[f64],
    wall_weights: &[f64],
    modes: &ModeSet,
) -> Result<InjectionPlan> {
    if targets.len() != times.len() {
        return Err(SloshError::Input(format!("{} target samples for {} times", targets.len(), times.len())));
    }
    let m = injection_matrix(points, wall_weights, modes)?;
    let n = points.len();
    if let Some(row) = targets.iter().find(|r| r.len() != n - 1) {
        return Err(SloshError::Input(format!(
            "{n} points control exactly {} modes; got {} modal targets",
            n - 1,
            row.len()
        )));
    }
    if targets.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SloshError::Input("modal targets must be finite".into()));
    }
    let mut full = DMatrix::zeros(n, n);
    full.rows_mut(0, n - 1).copy_from(&m);
    full.row_mut(n - 1).fill(1.0);
    let sv = full.singular_values();
    let condition = if sv.min() == 0.0 { f64::INFINITY } else { sv.max() / sv.min() };
    if !(condition <= MAX_INJECTION_CONDITION) {
        return Err(SloshError::Placement(format!(
            "injection system has condition number {condition:.3e}; choose different points"
        )));
    }
    let z = orthogonal_complement(&DVector::from_element(n, 1.0));
    let reduced = (&m * &z).lu();
    let rates = par::try_map_indexed(targets.len(), |k| {
        let y = reduced
            .solve(&DVector::from_column_slice(&targets[k]))
            .ok_or_else(|| SloshError::Placement("injection system is singular".into()))?;
        Ok::<_, SloshError>((&z * y).iter().copied().collect::<Vec<f64>>())
    })?;
    Ok(InjectionPlan { points: points.to_vec(), wall_weights: wall_weights.to_vec(), times: times.to_vec(), rates, condition })
}

/// Interface forcing `h(x) = (|f'(x)|/√(1-x²)) Σ_i j_i (G(x_i) - G(x)) / (π² |f'(x_i)| (x - x_i))`.
pub fn injection_to_h(points: &[f64], wall_weights: &[f64], rates: &[f64], weight: &DomainWeight, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(SloshError::Domain { value: x });
    }
    if rates.len() != points.len() {
        return Err(SloshError::Input(format!("{} rates for {} points", rates.len(), points.len())));
    }
    let mut sum = 0.0;
    for ((&xi, &wi), &ji) in points.iter().zip(wall_weights).zip(rates) {
        sum += ji * injection_kernel(xi, kernel_g(xi)?, wi, x);
    }
    Ok(sum / weight.sqrt_over_weight(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{chebyshev_weight, half_disk_weight};
    use crate::spectrum::{solve_modes, BasisFamily, BasisSpec};

    fn fixture(n: usize) -> ModeSet {
        solve_modes(&BasisSpec::new(BasisFamily::Chebyshev, n + 4), &chebyshev_weight(), n).unwrap()
    }

    #[test]
    fn single_mode_example() {
        let m = fixture(1);
        let target = ModalData::new(vec![1.0], vec![0.0]).unwrap();
        let sol = hum_control(&target, &m, 2.0 * PI).unwrap();
        assert!(sol.adjoint_data.cos_amp[0].abs() < 1e-12);
        assert!((sol.adjoint_data.sin_amp[0] - 1.0 / PI).abs() < 1e-12);
        assert!(sol.terminal_energy < 1e-20);
    }

    #[test]
    fn zero_target_needs_no_control() {
        let m = fixture(4);
        let sol = hum_control(&ModalData::zero(4), &m, 5.0).unwrap();
        assert!(sol.adjoint_data.cos_amp.iter().chain(&sol.adjoint_data.sin_amp).all(|&v| v == 0.0));
        assert_eq!(sol.terminal_energy, 0.0);
    }

    #[test]
    fn below_threshold_is_rejected() {
        let m = fixture(2);
        let err = hum_control(&ModalData::zero(2), &m, 0.5).unwrap_err();
        assert_eq!(err.code(), "observability_threshold");
        assert!(err.to_string().contains("observability threshold"));
    }

    #[test]
    fn terminal_map_determinant() {
        for &(th, t) in &[(1.0, 2.0), (3.0, 0.7), (0.4, 11.0)] {
            let g: Matrix2<f64> = terminal_map(th, t);
            let s = (th * t).sin();
            let want = (th * th * t * t - s * s) / (4.0 * th * th * th);
            assert!((g.determinant() - want).abs() < 1e-12 * want.abs().max(1.0));
            assert!(g.determinant() > 0.0);
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_g(0.0).unwrap(), 0.0);
        assert!((kernel_g(0.5).unwrap() + 0.5 * PI).abs() < 1e-15);
        assert!((kernel_g(2.0).unwrap() - PI * (3f64.sqrt() - 2.0)).abs() < 1e-14);
        assert!((kernel_g(-2.0).unwrap() + PI * (3f64.sqrt() - 2.0)).abs() < 1e-14);
        assert_eq!(kernel_g(1.0 + 1e-10).unwrap_err().code(), "near_singular");
        assert_eq!(kernel_g(-1.0).unwrap_err().code(), "near_singular");
    }

    #[test]
    fn default_points_alternate() {
        assert_eq!(default_injection_points(5), vec![1.5, -1.5, 2.0, -2.0, 2.5]);
    }

    #[test]
    fn column_scaling() {
        let m = fixture(4);
        let pts = [1.5, -1.5, 2.0];
        let a = injection_matrix(&pts, &[1.0, 1.0, 1.0], &m).unwrap();
        let b = injection_matrix(&pts, &[1.0, 2.0, 1.0], &m).unwrap();
        for i in 0..2 {
            assert_eq!(b[(i, 1)], a[(i, 1)] * 0.5);
            assert_eq!(b[(i, 0)], a[(i, 0)]);
        }
    }

    #[test]
    fn zero_targets_give_zero_rates() {
        let m = fixture(4);
        let pts = default_injection_points(3);
        let plan = solve_injection(&vec![vec![0.0, 0.0]; 3], &[0.0, 0.5, 1.0], &pts, &[1.0; 3], &m).unwrap();
        assert!(plan.rates.iter().flatten().all(|&j| j == 0.0));
    }

    #[test]
    fn placement_errors() {
        let m = fixture(4);
        assert_eq!(injection_matrix(&[1.5, 1.0000001], &[1.0, 1.0], &m).unwrap_err().code(), "placement");
        assert_eq!(injection_matrix(&[1.5, 1.5], &[1.0, 1.0], &m).unwrap_err().code(), "placement");
        assert_eq!(injection_matrix(&[1.5], &[1.0], &m).unwrap_err().code(), "placement");
        let pts = default_injection_points(3);
        let e = solve_injection(&[vec![0.0]], &[0.0], &pts, &[1.0; 3], &m).unwrap_err();
        assert_eq!(e.code(), "input");
    }

    #[test]
    fn missing_wall_weights_are_not_guessed() {
        let pts = [1.5, -1.5];
        assert!(wall_weights_for(&pts, &chebyshev_weight(), None).is_err());
        let w = wall_weights_for(&pts, &half_disk_weight(), None).unwrap();
        assert!((w[0] - 1.5 * 1.25f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn injection_forcing_is_odd_for_antisymmetric_pair() {
        let w = half_disk_weight();
        let pts = [1.7, -1.7];
        let ww = wall_weights_for(&pts, &w, None).unwrap();
        for x in [0.1, 0.45, 0.8] {
            let a = injection_to_h(&pts, &ww, &[1.0, -1.0], &w, x).unwrap();
            let b = injection_to_h(&pts, &ww, &[1.0, -1.0], &w, -x).unwrap();
            assert!((a + b).abs() < 1e-13 * a.abs().max(1.0));
        }
        assert_eq!(injection_to_h(&pts, &ww, &[0.0, 0.0], &w, 0.3).unwrap(), 0.0);
    }
}
