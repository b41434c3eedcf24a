//! Modal time evolution, energy, norms and the observability functional.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebSeries;
use crate::domain::mass_functional;
use crate::error::{Result, SloshError};
use crate::par;
use crate::spectrum::ModeSet;

/// Multiple of the observability threshold used when no horizon is given.
pub const HORIZON_SAFETY_FACTOR: f64 = 3.0;

/// Constant in the sufficient observability time `2.42 / (2 θ₁)`.
pub const OBSERVABILITY_CONSTANT: f64 = 2.42;

/// Forced-evolution steps per shortest modal period.
pub const STEPS_PER_PERIOD: usize = 64;

/// Tolerance on the mass of the initial velocity potential.
pub const INITIAL_MASS_TOLERANCE: f64 = 1e-8;

/// Modal coefficients of the surface potential and their time derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalState {
    pub c: Vec<f64>,
    pub c_dot: Vec<f64>,
    pub t: f64,
}

impl ModalState {
    pub fn zero(n: usize) -> Self {
        Self { c: vec![0.0; n], c_dot: vec![0.0; n], t: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

/// Amplitudes of `c_n(t) = a_n cos θ_n t + b_n sin θ_n t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalData {
    pub cos_amp: Vec<f64>,
    pub sin_amp: Vec<f64>,
}

impl ModalData {
    pub fn new(cos_amp: Vec<f64>, sin_amp: Vec<f64>) -> Result<Self> {
        if cos_amp.len() != sin_amp.len() {
            return Err(SloshError::Input(format!(
                "amplitude lists differ in length ({} vs {})",
                cos_amp.len(),
                sin_amp.len()
            )));
        }
        if cos_amp.iter().chain(&sin_amp).any(|v| !v.is_finite()) {
            return Err(SloshError::Input("modal amplitudes must be finite".into()));
        }
        Ok(Self { cos_amp, sin_amp })
    }

    pub fn zero(n: usize) -> Self {
        Self { cos_amp: vec![0.0; n], sin_amp: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.cos_amp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos_amp.is_empty()
    }

    /// Amplitudes reproducing a given state at `t = 0`.
    pub fn from_state(state: &ModalState, modes: &ModeSet) -> Result<Self> {
        check_len(state.len(), modes)?;
        let sin_amp = state.c_dot.iter().zip(&modes.thetas).map(|(v, th)| v / th).collect();
        Self::new(state.c.clone(), sin_amp)
    }
}

fn check_len(n: usize, modes: &ModeSet) -> Result<()> {
    if n != modes.len() {
        return Err(SloshError::Input(format!("state has {n} modes, the mode set {}", modes.len())));
    }
    Ok(())
}

/// Modal data of initial potential `phi0` and initial velocity `phi1`.
pub fn project_data(phi0: &ChebSeries, phi1: &ChebSeries, modes: &ModeSet) -> Result<ModalData> {
    let mass = mass_functional(phi1, &modes.weight, modes.options.quadrature_nodes)?;
    if mass.abs() > INITIAL_MASS_TOLERANCE {
        return Err(SloshError::Input(format!(
            "initial velocity potential carries mass {mass:.3e}; it must vanish"
        )));
    }
    let cos_amp = modes.project(phi0)?;
    let sin_amp = modes.project(phi1)?.into_iter().zip(&modes.thetas).map(|(p, th)| p / th).collect();
    ModalData::new(cos_amp, sin_amp)
}

pub fn evolve_homogeneous(data: &ModalData, modes: &ModeSet, t: f64) -> Result<ModalState> {
    check_len(data.len(), modes)?;
    if !(t >= 0.0) {
        return Err(SloshError::Input(format!("time {t} must be nonnegative")));
    }
    let mut c = Vec::with_capacity(data.len());
    let mut c_dot = Vec::with_capacity(data.len());
    for ((a, b), th) in data.cos_amp.iter().zip(&data.sin_amp).zip(&modes.thetas) {
        let (s, co) = (th * t).sin_cos();
        c.push(a * co + b * s);
        c_dot.push(th * (-a * s + b * co));
    }
    Ok(ModalState { c, c_dot, t })
}

/// `½ Σ ċ_n² + ½ Σ λ_n c_n²`.
pub fn energy(state: &ModalState, modes: &ModeSet) -> Result<f64> {
    check_len(state.len(), modes)?;
    Ok(energy_with(state, &modes.lambdas))
}

pub(crate) fn energy_with(state: &ModalState, lambdas: &[f64]) -> f64 {
    let kinetic: f64 = state.c_dot.iter().map(|v| v * v).sum();
    let potential: f64 = state.c.iter().zip(lambdas).map(|(c, l)| l * c * c).sum();
    0.5 * (kinetic + potential)
}

/// Surface elevation `-φ_t` reconstructed from a state.
pub fn elevation(state: &ModalState, modes: &ModeSet) -> ChebSeries {
    modes.reconstruct(&state.c_dot).scaled(-1.0)
}

/// Mass of the reconstructed surface potential, `∫ Σ c_n e_n / |f'|`.
pub fn potential_mass(state: &ModalState, modes: &ModeSet) -> Result<f64> {
    mass_functional(&modes.reconstruct(&state.c), &modes.weight, modes.options.quadrature_nodes)
}

/// Per-mode forcing `h_n(t)`.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// `h_n(t) = a_n cos θ_n t + b_n sin θ_n t`, integrated in closed form.
    Resonant { cos_amp: Vec<f64>, sin_amp: Vec<f64> },
    /// Arbitrary forcing, stepped with piecewise-linear interpolation.
    Function(Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>),
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Resonant { cos_amp, sin_amp } => {
                f.debug_struct("Resonant").field("cos_amp", cos_amp).field("sin_amp", sin_amp).finish()
            }
            Forcing::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl Forcing {
    pub fn function<F: Fn(f64) -> Vec<f64> + Send + Sync + 'static>(f: F) -> Self {
        Forcing::Function(Arc::new(f))
    }

    /// Forcing values of every mode at time `t`.
    pub fn eval(&self, t: f64, modes: &ModeSet) -> Vec<f64> {
        match self {
            Forcing::Zero => vec![0.0; modes.len()],
            Forcing::Resonant { cos_amp, sin_amp } => (0..modes.len())
                .map(|n| {
                    let (s, c) = (modes.thetas[n] * t).sin_cos();
                    cos_amp.get(n).copied().unwrap_or(0.0) * c + sin_amp.get(n).copied().unwrap_or(0.0) * s
                })
                .collect(),
            Forcing::Function(f) => f(t),
        }
    }
}

/// `t sin θt / (2θ)` and `-t cos θt / (2θ)` with their derivatives: the
/// particular solutions of `c'' + θ² c = cos θt` and `= sin θt`.
fn resonant_particular(theta: f64, t: f64) -> ((f64, f64), (f64, f64)) {
    let (s, c) = (theta * t).sin_cos();
    let p = t * s / (2.0 * theta);
    let dp = s / (2.0 * theta) + 0.5 * t * c;
    let q = -t * c / (2.0 * theta);
    let dq = -c / (2.0 * theta) + 0.5 * t * s;
    ((p, dp), (q, dq))
}

/// Homogeneous propagation of `(c, ċ)` over `tau`.
fn free_step(theta: f64, c: f64, v: f64, tau: f64) -> (f64, f64) {
    let (s, co) = (theta * tau).sin_cos();
    (c * co + v / theta * s, -c * theta * s + v * co)
}

/// State at `horizon` of `c_n'' + λ_n c_n = h_n(t)` started from `state0`.
pub fn evolve_forced(state0: &ModalState, modes: &ModeSet, forcing: &Forcing, horizon: f64) -> Result<ModalState> {
    match forcing {
        Forcing::Function(_) => {
            let traj = forced_trajectory(state0, modes, forcing, horizon)?;
            Ok(traj.states.last().cloned().expect("trajectory holds the initial state"))
        }
        _ => evolve_closed_form(state0, modes, forcing, horizon),
    }
}

fn evolve_closed_form(state0: &ModalState, modes: &ModeSet, forcing: &Forcing, horizon: f64) -> Result<ModalState> {
    check_len(state0.len(), modes)?;
    check_horizon(state0.t, horizon)?;
    let (cos_amp, sin_amp): (&[f64], &[f64]) = match forcing {
        Forcing::Resonant { cos_amp, sin_amp } => (cos_amp, sin_amp),
        _ => (&[], &[]),
    };
    if cos_amp.iter().chain(sin_amp).any(|v| !v.is_finite()) {
        return Err(SloshError::Input("forcing amplitudes must be finite".into()));
    }
    let t0 = state0.t;
    let pairs = par::map_indexed(modes.len(), |n| {
        let th = modes.thetas[n];
        let a = cos_amp.get(n).copied().unwrap_or(0.0);
        let b = sin_amp.get(n).copied().unwrap_or(0.0);
        let ((p0, dp0), (q0, dq0)) = resonant_particular(th, t0);
        let ((p1, dp1), (q1, dq1)) = resonant_particular(th, horizon);
        let c = state0.c[n] - a * p0 - b * q0;
        let v = state0.c_dot[n] - a * dp0 - b * dq0;
        let (ch, vh) = free_step(th, c, v, horizon - t0);
        (ch + a * p1 + b * q1, vh + a * dp1 + b * dq1)
    });
    let (c, c_dot) = pairs.into_iter().unzip();
    Ok(ModalState { c, c_dot, t: horizon })
}

fn check_horizon(t0: f64, horizon: f64) -> Result<()> {
    if !(horizon > t0) || !horizon.is_finite() {
        return Err(SloshError::Input(format!("horizon {horizon} must exceed the start time {t0}")));
    }
    Ok(())
}

/// States and modal forcing norms on the stepping grid.
#[derive(Clone, Debug)]
pub struct ForcedTrajectory {
    pub states: Vec<ModalState>,
    pub forcing_norms: Vec<f64>,
}

impl ForcedTrajectory {
    /// Largest excess of `√E_{k+1} - √E_k` over `(1/√2)·Δt·max(‖h_k‖, ‖h_{k+1}‖)`.
    /// Nonpositive when the energy estimate holds at every step.
    pub fn energy_bound_excess(&self, modes: &ModeSet) -> f64 {
        let root_e: Vec<f64> = self.states.iter().map(|s| energy_with(s, &modes.lambdas).sqrt()).collect();
        let mut excess = f64::NEG_INFINITY;
        for k in 0..self.states.len().saturating_sub(1) {
            let dt = self.states[k + 1].t - self.states[k].t;
            let bound = std::f64::consts::FRAC_1_SQRT_2 * dt * self.forcing_norms[k].max(self.forcing_norms[k + 1]);
            excess = excess.max(root_e[k + 1] - root_e[k] - bound);
        }
        excess
    }
}

/// Number of uniform steps covering `span` at the default resolution.
pub fn step_count(modes: &ModeSet, span: f64) -> usize {
    let theta_max = modes.thetas.iter().fold(0.0f64, |a, &b| a.max(b));
    let period = 2.0 * PI / theta_max;
    ((span / period) * STEPS_PER_PERIOD as f64).ceil().max(1.0) as usize
}

/// Piecewise-exact stepping with `h_n` linear between grid samples.
pub fn forced_trajectory(state0: &ModalState, modes: &ModeSet, forcing: &Forcing, horizon: f64) -> Result<ForcedTrajectory> {
    check_len(state0.len(), modes)?;
    check_horizon(state0.t, horizon)?;
    let steps = step_count(modes, horizon - state0.t);
    let dt = (horizon - state0.t) / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| if k == steps { horizon } else { state0.t + dt * k as f64 }).collect();
    let samples = par::map_indexed(times.len(), |k| forcing.eval(times[k], modes));
    for (k, h) in samples.iter().enumerate() {
        if h.len() != modes.len() {
            return Err(SloshError::Input(format!(
                "forcing returned {} values for {} modes",
                h.len(),
                modes.len()
            )));
        }
        if let Some(v) = h.iter().find(|v| !v.is_finite()) {
            return Err(SloshError::Input(format!("non-finite forcing sample {v} at t = {}", times[k])));
        }
    }
    let mut states = Vec::with_capacity(times.len());
    states.push(state0.clone());
    let mut cur = state0.clone();
    for k in 0..steps {
        let tau = times[k + 1] - times[k];
        let mut next = ModalState { c: Vec::with_capacity(cur.len()), c_dot: Vec::with_capacity(cur.len()), t: times[k + 1] };
        for n in 0..modes.len() {
            let th = modes.thetas[n];
            let lam = th * th;
            let h0 = samples[k][n];
            let slope = (samples[k + 1][n] - h0) / tau;
            // c = h(t)/λ + homogeneous part; h is linear so the particular part has no oscillation.
            let c0 = cur.c[n] - h0 / lam;
            let v0 = cur.c_dot[n] - slope / lam;
            let (ch, vh) = free_step(th, c0, v0, tau);
            next.c.push(ch + (h0 + slope * tau) / lam);
            next.c_dot.push(vh + slope / lam);
        }
        states.push(next.clone());
        cur = next;
    }
    let forcing_norms = samples.iter().map(|h| h.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    Ok(ForcedTrajectory { states, forcing_norms })
}

/// `√Σ c_n²`: the norm in `L²` with weight `1/|f'|`.
pub fn norm_l2_weighted(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `√Σ λ_n c_n²`.
pub fn norm_h_half(coeffs: &[f64], modes: &ModeSet) -> f64 {
    coeffs.iter().zip(&modes.lambdas).map(|(c, l)| l * c * c).sum::<f64>().sqrt()
}

/// `√Σ c_n²/λ_n`.
pub fn norm_h_minus_half(coeffs: &[f64], modes: &ModeSet) -> f64 {
    coeffs.iter().zip(&modes.lambdas).map(|(c, l)| c * c / l).sum::<f64>().sqrt()
}

/// Observed energy `lhs = ∫₀ᵀ ‖φ(t)‖² dt`, initial norm `rhs` and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observability {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `2.42 / (2 θ₁)`.
pub fn observability_threshold(modes: &ModeSet) -> f64 {
    OBSERVABILITY_CONSTANT / (2.0 * modes.fundamental())
}

/// Horizon used when none is given: three times the threshold.
pub fn default_horizon(modes: &ModeSet) -> f64 {
    HORIZON_SAFETY_FACTOR * observability_threshold(modes)
}

/// Per-mode contribution to `∫₀ᵀ (a cos θt + b sin θt)² dt`.
pub(crate) fn observed_mode(theta: f64, a: f64, b: f64, horizon: f64) -> f64 {
    let (s2, c2) = (2.0 * theta * horizon).sin_cos();
    a * a * (0.5 * horizon + s2 / (4.0 * theta))
        + b * b * (0.5 * horizon - s2 / (4.0 * theta))
        + a * b * (1.0 - c2) / (2.0 * theta)
}

pub fn observability_ratio(data: &ModalData, modes: &ModeSet, horizon: f64) -> Result<Observability> {
    check_len(data.len(), modes)?;
    if !(horizon > 0.0) {
        return Err(SloshError::Input(format!("horizon {horizon} must be positive")));
    }
    let lhs: f64 = (0..data.len())
        .map(|n| observed_mode(modes.thetas[n], data.cos_amp[n], data.sin_amp[n], horizon))
        .sum();
    let rhs: f64 = data.cos_amp.iter().chain(&data.sin_amp).map(|v| v * v).sum();
    if rhs == 0.0 {
        return Err(SloshError::UndefinedRatio);
    }
    Ok(Observability { lhs, rhs, ratio: lhs / rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::chebyshev_weight;
    use crate::spectrum::{solve_modes, BasisFamily, BasisSpec};

    fn fixture(n: usize) -> ModeSet {
        solve_modes(&BasisSpec::new(BasisFamily::Chebyshev, n + 4), &chebyshev_weight(), n).unwrap()
    }

    #[test]
    fn homogeneous_examples() {
        let m = fixture(2);
        let d = ModalData::new(vec![0.3, -0.2], vec![0.5, 0.1]).unwrap();
        let s = evolve_homogeneous(&d, &m, 0.0).unwrap();
        assert_eq!(s.c, d.cos_amp);
        assert!((s.c_dot[1] - m.thetas[1] * 0.1).abs() < 1e-15);
        let one = fixture(1);
        let d = ModalData::new(vec![0.7], vec![-0.4]).unwrap();
        let s = evolve_homogeneous(&d, &one, 2.0 * PI / one.thetas[0]).unwrap();
        assert!((s.c[0] - 0.7).abs() < 1e-12);
        assert!((s.c_dot[0] + 0.4 * one.thetas[0]).abs() < 1e-12);
        assert!(evolve_homogeneous(&d, &one, -1.0).is_err());
    }

    #[test]
    fn energy_examples() {
        let m = fixture(3);
        assert_eq!(energy(&ModalState::zero(3), &m).unwrap(), 0.0);
        let s = ModalState { c: vec![1.0, 0.0, 0.0], c_dot: vec![0.0; 3], t: 0.0 };
        assert!((energy(&s, &m).unwrap() - 0.5 * m.lambdas[0]).abs() < 1e-14);
        assert!(energy(&ModalState::zero(2), &m).is_err());
    }

    #[test]
    fn zero_forcing_matches_homogeneous() {
        let m = fixture(3);
        let d = ModalData::new(vec![0.3, -0.2, 0.1], vec![0.5, 0.1, -0.6]).unwrap();
        let s0 = evolve_homogeneous(&d, &m, 0.0).unwrap();
        let a = evolve_forced(&s0, &m, &Forcing::Zero, 2.5).unwrap();
        let b = evolve_homogeneous(&d, &m, 2.5).unwrap();
        assert_eq!(a.c, b.c);
        assert_eq!(a.c_dot, b.c_dot);
    }

    #[test]
    fn resonant_example_reaches_rest() {
        let m = fixture(1);
        let s0 = ModalState { c: vec![1.0], c_dot: vec![0.0], t: 0.0 };
        let f = Forcing::Resonant { cos_amp: vec![0.0], sin_amp: vec![1.0 / PI] };
        let s = evolve_forced(&s0, &m, &f, 2.0 * PI).unwrap();
        assert!(s.c[0].abs() < 1e-12 && s.c_dot[0].abs() < 1e-12);
    }

    #[test]
    fn stepping_matches_closed_form_for_resonant_forcing() {
        let m = fixture(3);
        let s0 = ModalState { c: vec![0.2, -0.1, 0.3], c_dot: vec![0.0, 0.4, 0.1], t: 0.0 };
        let f = Forcing::Resonant { cos_amp: vec![0.3, 0.0, -0.2], sin_amp: vec![0.1, 0.5, 0.0] };
        let exact = evolve_forced(&s0, &m, &f, 5.0).unwrap();
        let thetas = m.thetas.clone();
        let g = Forcing::function(move |t| {
            let ca = [0.3, 0.0, -0.2];
            let sa = [0.1, 0.5, 0.0];
            (0..3).map(|n| ca[n] * (thetas[n] * t).cos() + sa[n] * (thetas[n] * t).sin()).collect()
        });
        let stepped = evolve_forced(&s0, &m, &g, 5.0).unwrap();
        for n in 0..3 {
            assert!((exact.c[n] - stepped.c[n]).abs() < 2e-3);
        }
    }

    #[test]
    fn non_finite_forcing_is_rejected() {
        let m = fixture(1);
        let f = Forcing::function(|t| vec![if t > 0.5 { f64::NAN } else { 0.0 }]);
        assert_eq!(evolve_forced(&ModalState::zero(1), &m, &f, 1.0).unwrap_err().code(), "input");
    }

    #[test]
    fn norms_of_single_mode() {
        let m = fixture(3);
        let a = [1.0, 0.0, 0.0];
        assert_eq!(norm_l2_weighted(&a), 1.0);
        assert!((norm_h_half(&a, &m) - m.lambdas[0].sqrt()).abs() < 1e-14);
        assert!((norm_h_minus_half(&a, &m) - 1.0 / m.lambdas[0].sqrt()).abs() < 1e-14);
        assert_eq!(norm_h_half(&[0.0; 3], &m), 0.0);
    }

    #[test]
    fn observability_examples() {
        let m = fixture(1);
        let r = observability_ratio(&ModalData::new(vec![1.0], vec![0.0]).unwrap(), &m, 2.0 * PI).unwrap();
        assert!((r.lhs - PI).abs() < 1e-12 && r.rhs == 1.0 && (r.ratio - PI).abs() < 1e-12);
        let r = observability_ratio(&ModalData::new(vec![0.0], vec![1.0]).unwrap(), &m, 2.0 * PI).unwrap();
        assert!((r.ratio - PI).abs() < 1e-12);
        let e = observability_ratio(&ModalData::zero(1), &m, 1.0).unwrap_err();
        assert_eq!(e.code(), "undefined_ratio");
    }

    #[test]
    fn projection_recovers_modal_data() {
        let m = fixture(4);
        let d = project_data(&m.modes[0], &ChebSeries::zero(), &m).unwrap();
        assert!((d.cos_amp[0] - 1.0).abs() < 1e-12);
        assert!(d.cos_amp[1..].iter().chain(&d.sin_amp).all(|v| v.abs() < 1e-12));
        let d = project_data(&ChebSeries::zero(), &m.modes[1].scaled(m.thetas[1]), &m).unwrap();
        assert!((d.sin_amp[1] - 1.0).abs() < 1e-12);
        let e = project_data(&ChebSeries::zero(), &ChebSeries::basis(0), &m).unwrap_err();
        assert_eq!(e.code(), "input");
    }
}
