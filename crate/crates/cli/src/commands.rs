use std::path::Path;

use serde_json::{json, Value};
use slosh_core::control::{default_injection_points, hum_control, solve_injection, wall_weights_for};
use slosh_core::dynamics::{
    default_horizon, energy, evolve_forced, observability_ratio, observability_threshold, potential_mass,
};
use slosh_core::spectrum::{solve_modes, BasisSpec};
use slosh_core::{ControlSolution, Forcing, InjectionPlan, ModalData, ModalState, ModeSet, SloshError};

use crate::config::{Horizon, InjectionPoints, RunConfig};
use crate::data;
use crate::output::{indexed_header, Sink};

/// Relative eigenvalue change under basis doubling that counts as converged.
pub const DOUBLING_TOLERANCE: f64 = 1e-6;

pub struct Context {
    pub config: RunConfig,
    pub sink: Sink,
    pub check_oracle: bool,
}

impl Context {
    fn modes(&self) -> Result<ModeSet, SloshError> {
        solve_modes(&self.config.basis(), &self.config.weight()?, self.config.n_modes)
    }

    fn horizon(&self, modes: &ModeSet) -> f64 {
        match self.config.horizon {
            Horizon::Value(t) => t,
            Horizon::Auto(_) => default_horizon(modes),
        }
    }

    fn data(&self, path: Option<&Path>, modes: &ModeSet) -> Result<ModalData, SloshError> {
        match path {
            Some(p) => data::load(p, modes),
            None => Ok(data::random(self.config.seed, modes.len())),
        }
    }

    fn json(&self, name: &str, body: Value) -> Result<(), SloshError> {
        let mut out = self.sink.stamp();
        if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
            o.extend(b);
        }
        self.sink.json(name, &out)
    }
}

fn mode_rows(modes: &ModeSet) -> Vec<Vec<f64>> {
    modes.to_csv_rows().into_iter().map(|(n, l, t)| vec![n as f64, l, t]).collect()
}

fn mode_header() -> Vec<String> {
    ["n", "lambda", "theta"].map(String::from).to_vec()
}

pub fn modes(ctx: &Context, double: bool) -> Result<(), SloshError> {
    let modes = ctx.modes()?;
    ctx.sink.csv("modes.csv", &mode_header(), mode_rows(&modes))?;
    ctx.json("modes.json", serde_json::to_value(&modes)?)?;
    if double || ctx.check_oracle {
        let spec = modes.basis;
        let doubled_spec = BasisSpec { count: 2 * spec.count, ..spec };
        let doubled = solve_modes(&doubled_spec, &modes.weight, modes.len())?;
        ctx.sink.csv("modes_doubled.csv", &mode_header(), mode_rows(&doubled))?;
        let drift: Vec<f64> = modes.lambdas.iter().zip(&doubled.lambdas).map(|(a, b)| ((a - b) / b).abs()).collect();
        let worst = drift.iter().fold(0.0f64, |a, &b| a.max(b));
        ctx.json(
            "doubling.json",
            json!({
                "basis_count": spec.count,
                "doubled_count": doubled_spec.count,
                "relative_drift": drift,
                "max_relative_drift": worst,
                "tolerance": DOUBLING_TOLERANCE,
                "converged": worst < DOUBLING_TOLERANCE,
            }),
        )?;
    }
    Ok(())
}

/// Times `0, t_end/(samples-1), ..., t_end` unless explicit times are given.
pub struct Times {
    pub explicit: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub samples: usize,
}

pub fn evolve(ctx: &Context, data_path: Option<&Path>, times: &Times, forcing_path: Option<&Path>) -> Result<(), SloshError> {
    let modes = ctx.modes()?;
    let data = ctx.data(data_path, &modes)?;
    let forcing = match forcing_path {
        Some(p) => load_forcing(p, &modes)?,
        None => Forcing::Zero,
    };
    let grid = match &times.explicit {
        Some(t) => t.clone(),
        None => {
            if times.samples < 2 {
                return Err(SloshError::Input("samples must be at least 2".into()));
            }
            let t_end = times.t_end.unwrap_or_else(|| ctx.horizon(&modes));
            (0..times.samples).map(|k| t_end * k as f64 / (times.samples - 1) as f64).collect()
        }
    };
    if let Some(t) = grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(SloshError::Input(format!("time {t} must be finite and nonnegative")));
    }
    let start = data::initial_state(&data, &modes);
    let state_at = |t: f64| -> Result<ModalState, SloshError> {
        if t == 0.0 {
            Ok(start.clone())
        } else {
            evolve_forced(&start, &modes, &forcing, t)
        }
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        let s = state_at(t)?;
        let mut row = vec![t, energy(&s, &modes)?, potential_mass(&s, &modes)?];
        row.extend(&s.c);
        rows.push(row);
    }
    ctx.sink.csv("trajectory.csv", &indexed_header(&["t", "E", "mass"], "c", modes.len()), rows)?;
    if ctx.check_oracle {
        let t_end = grid.iter().fold(0.0f64, |a, &b| a.max(b));
        let end = state_at(t_end)?;
        let mut worst = 0.0f64;
        if t_end > 0.0 {
            for n in 0..modes.len() {
                let th = modes.thetas[n];
                let f = forcing.clone();
                let m = &modes;
                let y = slosh_oracle::integrate_ode(
                    |t, y| vec![y[1], f.eval(t, m)[n] - th * th * y[0]],
                    0.0,
                    &[start.c[n], start.c_dot[n]],
                    t_end,
                    1e-12,
                    1e-14,
                );
                worst = worst.max((y[0] - end.c[n]).abs()).max((y[1] - end.c_dot[n]).abs());
            }
        }
        ctx.json("evolve_check.json", json!({ "t_end": t_end, "max_state_residual_vs_ode": worst }))?;
    }
    Ok(())
}

fn load_forcing(path: &Path, modes: &ModeSet) -> Result<Forcing, SloshError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SloshError::Input(format!("cannot read forcing file {}: {e}", path.display())))?;
    let sol: ControlSolution = serde_json::from_str(&text)
        .map_err(|e| SloshError::Input(format!("forcing file {} is not a control solution: {e}", path.display())))?;
    if sol.adjoint_data.len() > modes.len() {
        return Err(SloshError::Input(format!(
            "forcing has {} modes, the mode set {}",
            sol.adjoint_data.len(),
            modes.len()
        )));
    }
    Ok(sol.forcing())
}

fn observed_by_quadrature(data: &ModalData, modes: &ModeSet, horizon: f64) -> f64 {
    (0..modes.len())
        .map(|n| {
            let (a, b, th) = (data.cos_amp[n], data.sin_amp[n], modes.thetas[n]);
            slosh_oracle::integrate(|t| (a * (th * t).cos() + b * (th * t).sin()).powi(2), 0.0, horizon, 1e-13)
        })
        .sum()
}

pub fn observe(ctx: &Context, data_path: Option<&Path>) -> Result<(), SloshError> {
    let modes = ctx.modes()?;
    let data = ctx.data(data_path, &modes)?;
    let horizon = ctx.horizon(&modes);
    let threshold = observability_threshold(&modes);
    let obs = observability_ratio(&data, &modes, horizon)?;
    let mut body = json!({
        "horizon": horizon,
        "threshold": threshold,
        "above_threshold": horizon >= threshold,
        "lhs": obs.lhs,
        "rhs": obs.rhs,
        "ratio": obs.ratio,
    });
    if ctx.check_oracle {
        let lhs = observed_by_quadrature(&data, &modes, horizon);
        body["oracle"] = json!({ "lhs_quadrature": lhs, "lhs_residual": (lhs - obs.lhs).abs() });
    }
    ctx.json("observability.json", body)
}

fn injection_points(config: &RunConfig) -> Vec<f64> {
    match &config.injection_points {
        Some(InjectionPoints::Points(p)) => p.clone(),
        Some(InjectionPoints::Count(n)) => default_injection_points(*n),
        None => default_injection_points((config.n_modes + 1).min(9)),
    }
}

/// Injection rates realizing the first `N-1` modal controls, with a summary
/// of how well the induced forcing matches every mode.
fn realize(ctx: &Context, sol: &ControlSolution, modes: &ModeSet) -> Result<(InjectionPlan, Value), SloshError> {
    let points = injection_points(&ctx.config);
    if points.len() < 2 {
        return Err(SloshError::Placement("at least two injection points are needed".into()));
    }
    let controlled = points.len() - 1;
    if controlled > modes.len() {
        return Err(SloshError::Input(format!(
            "{} injection points control {controlled} modes but only {} were computed",
            points.len(),
            modes.len()
        )));
    }
    let ww = wall_weights_for(&points, &modes.weight, ctx.config.wall_weights.as_deref())?;
    let (times, values) = sol.sample(modes);
    let targets: Vec<Vec<f64>> = values.iter().map(|v| v[..controlled].to_vec()).collect();
    let plan = solve_injection(&targets, &times, &points, &ww, modes)?;
    let (mut resolved, mut unresolved, mut zero_sum, mut max_rate) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..times.len() {
        let induced = plan.modal_forcing(k, modes)?;
        for n in 0..modes.len() {
            let gap = (induced[n] - values[k][n]).abs();
            if n < controlled {
                resolved = resolved.max(gap);
            } else {
                unresolved = unresolved.max(gap);
            }
        }
        let big = plan.rates[k].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        max_rate = max_rate.max(big);
        if big > 0.0 {
            zero_sum = zero_sum.max(plan.rates[k].iter().sum::<f64>().abs() / big);
        }
    }
    let summary = json!({
        "points": plan.points,
        "wall_weights": plan.wall_weights,
        "controlled_modes": controlled,
        "condition": plan.condition,
        "max_rate": max_rate,
        "max_resolved_residual": resolved,
        "max_unresolved_residual": unresolved,
        "max_relative_zero_sum": zero_sum,
    });
    Ok((plan, summary))
}

fn write_injection(ctx: &Context, plan: &InjectionPlan, summary: &Value) -> Result<(), SloshError> {
    let rows = plan.times.iter().zip(&plan.rates).map(|(t, r)| std::iter::once(*t).chain(r.iter().copied()).collect());
    ctx.sink.csv("injection.csv", &indexed_header(&["t"], "j", plan.points.len()), rows)?;
    ctx.json("injection.json", summary.clone())
}

fn ode_terminal_energy(target: &ModalData, sol: &ControlSolution, modes: &ModeSet) -> f64 {
    let horizon = sol.horizon;
    (0..modes.len())
        .map(|n| {
            let th = modes.thetas[n];
            let (a, b) = (sol.adjoint_data.cos_amp[n], sol.adjoint_data.sin_amp[n]);
            let y = slosh_oracle::integrate_ode(
                |t, y| vec![y[1], a * (th * t).cos() + b * (th * t).sin() - th * th * y[0]],
                0.0,
                &[target.cos_amp[n], th * target.sin_amp[n]],
                horizon,
                1e-13,
                1e-15,
            );
            0.5 * (y[1] * y[1] + th * th * y[0] * y[0])
        })
        .sum()
}

pub fn control(ctx: &Context, data_path: Option<&Path>, inject_only: bool) -> Result<(), SloshError> {
    let modes = ctx.modes()?;
    let target = ctx.data(data_path, &modes)?;
    let horizon = ctx.horizon(&modes);
    let sol = hum_control(&target, &modes, horizon)?;
    if inject_only {
        let (plan, summary) = realize(ctx, &sol, &modes)?;
        return write_injection(ctx, &plan, &summary);
    }
    let (times, values) = sol.sample(&modes);
    let rows = times.iter().zip(&values).map(|(t, v)| std::iter::once(*t).chain(v.iter().copied()).collect());
    ctx.sink.csv("control.csv", &indexed_header(&["t"], "h", modes.len()), rows)?;
    ctx.json("control.json", serde_json::to_value(&sol)?)?;
    let injection = match realize(ctx, &sol, &modes) {
        Ok((plan, summary)) => {
            write_injection(ctx, &plan, &summary)?;
            summary
        }
        Err(e) => json!({ "skipped": { "code": e.code(), "message": e.to_string() } }),
    };
    let observability = match observability_ratio(&target, &modes, horizon) {
        Ok(o) => serde_json::to_value(o)?,
        Err(SloshError::UndefinedRatio) => Value::Null,
        Err(e) => return Err(e),
    };
    let ratio = if sol.initial_energy > 0.0 { json!(sol.terminal_energy / sol.initial_energy) } else { Value::Null };
    let mut report = json!({
        "horizon": horizon,
        "threshold": observability_threshold(&modes),
        "initial_energy": sol.initial_energy,
        "terminal_energy": sol.terminal_energy,
        "terminal_energy_ratio": ratio,
        "observability": observability,
        "gramian_condition": sol.per_mode.iter().map(|m| m.gramian_condition).collect::<Vec<_>>(),
        "terminal_map_condition": sol.per_mode.iter().map(|m| m.condition).collect::<Vec<_>>(),
        "injection": injection,
    });
    if ctx.check_oracle {
        let e_t = ode_terminal_energy(&target, &sol, &modes);
        report["oracle"] = json!({
            "terminal_energy_ode": e_t,
            "terminal_energy_ratio_ode": if sol.initial_energy > 0.0 { json!(e_t / sol.initial_energy) } else { Value::Null },
        });
    }
    ctx.json("report.json", report)
}
