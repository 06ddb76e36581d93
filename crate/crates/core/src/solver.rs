//! Explicit monotone time integration of
//! `u_t + λu + H₀(t, x, ∇u) + ε(-Δ)^{s/2} u = 0`.
//!
//! One step is exponential Euler in the linear `λu` term:
//!
//! ```text
//! u⁺ = e^{-λ dt} u - φ(dt) [Ĥ₀(t, x, D⁻u, D⁺u) + ε A u],   φ(dt) = (1 - e^{-λ dt}) / λ,
//! ```
//!
//! with `Ĥ₀` the Lax–Friedrichs flux of `H(t, x, 0, p)` and `A` the chosen
//! fractional operator. With the quadrature backend the update is monotone
//! as long as `e^{-λ dt} ≥ φ(dt) (α·dim/h + ε A_ii)`; constants decay exactly
//! like `c e^{-λt}` when `H(t, x, 0, 0) = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{FractionalOperator, FractionalOrder, OperatorBackend};
use crate::grid::{discrete_gradient, lipschitz_constant, GridField, PeriodicGrid, Point, Trajectory};
use crate::hamiltonians::{lax_friedrichs, HamiltonianSpec, NumericalFlux};

/// Parameters of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub order: FractionalOrder,
    pub backend: OperatorBackend,
    pub cfl_safety: f64,
    pub final_time: f64,
    /// Extra output times in `[0, T]`; `0` and `T` are always recorded.
    pub snapshot_times: Vec<f64>,
    /// Dissipation of the flux; derived from the initial data when absent.
    pub flux: Option<NumericalFlux>,
    /// Upper bound on the time step, e.g. to give two runs the same step.
    pub max_dt: Option<f64>,
}

impl SolverConfig {
    pub const DEFAULT_CFL: f64 = 0.9;

    pub fn new(epsilon: f64, order: FractionalOrder, backend: OperatorBackend, final_time: f64) -> Self {
        Self {
            epsilon,
            order,
            backend,
            cfl_safety: Self::DEFAULT_CFL,
            final_time,
            snapshot_times: Vec::new(),
            flux: None,
            max_dt: None,
        }
    }

    /// Snapshots every `every` time units up to `T`.
    pub fn with_uniform_snapshots(mut self, every: f64) -> Self {
        let count = (self.final_time / every + 1e-9).floor() as usize;
        self.snapshot_times = (1..=count).map(|k| k as f64 * every).filter(|&t| t <= self.final_time).collect();
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_flux(mut self, flux: NumericalFlux) -> Self {
        self.flux = Some(flux);
        self
    }

    pub fn with_max_dt(mut self, dt: f64) -> Self {
        self.max_dt = Some(dt);
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl_safety = cfl;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::Config(format!("solver.epsilon must be finite and nonnegative, got {}", self.epsilon)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!("solver.cfl must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return Err(Error::Config(format!("solver.T must be positive, got {}", self.final_time)));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.final_time).contains(&t)) {
            return Err(Error::Config("solver.snapshots must lie in [0, T]".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("solver.snapshots must be sorted".into()));
        }
        if let Some(dt) = self.max_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Config(format!("solver.max_dt must be positive, got {dt}")));
            }
        }
        if let Some(flux) = self.flux {
            if !(flux.alpha.is_finite() && flux.alpha >= 0.0) {
                return Err(Error::Config(format!("flux alpha must be nonnegative, got {}", flux.alpha)));
            }
        }
        Ok(())
    }

    /// Output times: `0`, the requested snapshots and `T`, strictly increasing.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = vec![0.0];
        for &t in self.snapshot_times.iter().chain(std::iter::once(&self.final_time)) {
            if t > *times.last().expect("nonempty") {
                times.push(t);
            }
        }
        times
    }

    fn resolved_flux(&self, spec: &HamiltonianSpec, u0: &GridField) -> NumericalFlux {
        self.flux.unwrap_or_else(|| NumericalFlux::for_data(spec, u0))
    }
}

/// `cfl / (α·dim/h + ε (π/h)^s)` with `α = max(flux α, A_R)` at `R = current_lipschitz`.
pub fn stable_dt(config: &SolverConfig, grid: &PeriodicGrid, spec: &HamiltonianSpec, current_lipschitz: f64) -> f64 {
    let h = grid.spacing();
    let alpha = config.flux.map_or(0.0, |f| f.alpha).max(spec.lipschitz_p(current_lipschitz));
    let rate = alpha * grid.dim() as f64 / h + config.epsilon * (std::f64::consts::PI / h).powf(config.order.value());
    if rate == 0.0 {
        config.final_time
    } else {
        config.cfl_safety / rate
    }
}

/// `(e^{-λ dt}, (1 - e^{-λ dt}) / λ)`, the second entry being `dt` at `λ = 0`.
fn integrating_factors(lambda: f64, dt: f64) -> (f64, f64) {
    if lambda == 0.0 {
        (1.0, dt)
    } else {
        let decay = (-lambda * dt).exp();
        (decay, -(-lambda * dt).exp_m1() / lambda)
    }
}

/// Time stepper with the operator assembled once.
#[derive(Debug, Clone)]
pub struct Stepper {
    spec: HamiltonianSpec,
    epsilon: f64,
    flux: NumericalFlux,
    operator: FractionalOperator,
}

/// Result of one step: the new field and the largest one-sided slope seen.
struct StepOutput {
    field: GridField,
    max_slope: f64,
}

impl Stepper {
    pub fn new(grid: &PeriodicGrid, spec: &HamiltonianSpec, config: &SolverConfig, flux: NumericalFlux) -> Result<Self> {
        config.validate()?;
        let operator = FractionalOperator::new(grid, config.order, &config.backend)?;
        Ok(Self { spec: spec.clone(), epsilon: config.epsilon, flux, operator })
    }

    pub fn flux(&self) -> NumericalFlux {
        self.flux
    }

    pub fn operator(&self) -> &FractionalOperator {
        &self.operator
    }

    /// Whether one step of size `dt` is monotone (quadrature backend only).
    pub fn is_monotone_step(&self, dt: f64) -> bool {
        if !self.operator.is_monotone() {
            return false;
        }
        let grid = self.operator.grid();
        let (decay, phi) = integrating_factors(self.spec.lambda(), dt);
        let stencil_weight = self.flux.alpha * grid.dim() as f64 / grid.spacing() + self.epsilon * self.operator.diagonal();
        decay >= phi * stencil_weight
    }

    /// `λu₀ + Ĥ₀(t, x, D±u₀) + εAu₀` at every node.
    pub fn generator(&self, u: &GridField, t: f64) -> Result<GridField> {
        let out = self.rhs(u, t)?;
        Ok(GridField::from_parts(*u.grid(), out.0.iter().zip(u.values()).map(|(r, v)| r + self.spec.lambda() * v).collect()))
    }

    /// `Ĥ₀ + εAu` per node together with the largest one-sided slope.
    fn rhs(&self, u: &GridField, t: f64) -> Result<(Vec<f64>, f64)> {
        let grid = *u.grid();
        let diffusion = if self.epsilon > 0.0 { Some(self.operator.apply(u)?) } else { None };
        let h = grid.spacing();
        let values = u.values();
        let dim = grid.dim();
        let pairs: Vec<(f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mut pm: Point = [0.0; 2];
                let mut pp: Point = [0.0; 2];
                for axis in 0..dim {
                    let mut e = [0isize; 2];
                    e[axis] = 1;
                    pp[axis] = (values[grid.offset_index(i, e)] - values[i]) / h;
                    pm[axis] = (values[i] - values[grid.offset_index(i, [-e[0], -e[1]])]) / h;
                }
                let x = grid.point(i);
                let mut r = lax_friedrichs(&self.spec, &self.flux, t, &x, 0.0, &pm, &pp);
                if let Some(d) = &diffusion {
                    r += self.epsilon * d.values()[i];
                }
                (r, pm[0].hypot(pm[1]).max(pp[0].hypot(pp[1])))
            })
            .collect();
        let max_slope = pairs.iter().fold(0.0f64, |m, p| m.max(p.1));
        Ok((pairs.into_iter().map(|p| p.0).collect(), max_slope))
    }

    fn advance(&self, u: &GridField, t: f64, dt: f64) -> Result<StepOutput> {
        let (rhs, max_slope) = self.rhs(u, t)?;
        let (decay, phi) = integrating_factors(self.spec.lambda(), dt);
        let values: Vec<f64> = u.values().iter().zip(&rhs).map(|(v, r)| decay * v - phi * r).collect();
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: t + dt,
                reason: format!("non-finite value at node {:?}", u.grid().multi_index(node)),
            });
        }
        Ok(StepOutput { field: GridField::from_parts(*u.grid(), values), max_slope })
    }

    /// One step from time `t`.
    pub fn step(&self, u: &GridField, t: f64, dt: f64) -> Result<GridField> {
        Ok(self.advance(u, t, dt)?.field)
    }
}

/// One explicit step; rejects `dt` above [`stable_dt`] for the flux in use.
pub fn step(state: &GridField, t: f64, dt: f64, spec: &HamiltonianSpec, config: &SolverConfig) -> Result<GridField> {
    let flux = config.resolved_flux(spec, state);
    let limit = stable_dt(&config.clone().with_flux(flux), state.grid(), spec, 0.0);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::UnstableStep { dt, limit });
    }
    Stepper::new(state.grid(), spec, config, flux)?.step(state, t, dt)
}

/// Barrier constant `C` with `u₀ - Ct ≤ u(t) ≤ u₀ + Ct` for the monotone scheme:
/// `sup_x |λu₀ + Ĥ₀(0, x, D±u₀) + εAu₀|` plus the `(t, x)`-Lipschitz allowance
/// `C_H (1 + R) T` that covers later times, `R` the largest one-sided slope.
pub fn barrier_constant(u0: &GridField, spec: &HamiltonianSpec, config: &SolverConfig) -> Result<f64> {
    let flux = config.resolved_flux(spec, u0);
    let stepper = Stepper::new(u0.grid(), spec, config, flux)?;
    let (rhs, max_slope) = stepper.rhs(u0, 0.0)?;
    let lambda = spec.lambda();
    let sup = rhs.iter().zip(u0.values()).fold(0.0f64, |m, (r, v)| m.max((r + lambda * v).abs()));
    Ok(sup + spec.lipschitz_tx() * (1.0 + max_slope) * config.final_time)
}

/// Solves from `u0` to `T`, recording `0`, every snapshot time and `T` exactly.
pub fn solve(u0: &GridField, spec: &HamiltonianSpec, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    let grid = *u0.grid();
    let flux = config.resolved_flux(spec, u0);
    let resolved = config.clone().with_flux(flux);
    let stepper = Stepper::new(&grid, spec, &resolved, flux)?;

    let mut dt = stable_dt(&resolved, &grid, spec, lipschitz_constant(u0)).min(resolved.max_dt.unwrap_or(f64::INFINITY));
    let mut halvings = 0;
    if stepper.operator.is_monotone() {
        while !stepper.is_monotone_step(dt) && halvings < 60 {
            dt *= 0.5;
            halvings += 1;
        }
    }

    let guard_rate = 2.0 * barrier_constant(u0, spec, &resolved)?;
    let u0_norm = u0.sup_norm();
    let lambda = spec.lambda();

    let times = resolved.output_times();
    let mut fields = vec![u0.clone()];
    let mut warnings = Vec::new();
    if halvings > 0 {
        warnings.push(format!("time step halved {halvings} times to keep the update monotone (dt = {dt:e})"));
    }
    let mut alpha_warned = false;
    let mut u = u0.clone();
    let mut t = 0.0;
    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let (h, next) = if remaining <= dt * (1.0 + 1e-9) { (remaining, target) } else { (dt, t + dt) };
            let out = stepper.advance(&u, t, h)?;
            if !alpha_warned && !flux.covers(spec, out.max_slope) {
                alpha_warned = true;
                warnings.push(format!(
                    "flux alpha = {} is below A_R = {} for slopes {} at t = {t}; monotonicity may be lost",
                    flux.alpha,
                    spec.lipschitz_p(out.max_slope),
                    out.max_slope
                ));
            }
            u = out.field;
            t = next;
            let bound = (u0_norm + guard_rate * t) * (lambda * t).exp() + 1e-9 * (1.0 + u0_norm);
            if u.sup_norm() > bound {
                return Err(Error::BlowUp {
                    time: t,
                    reason: format!("sup norm {} exceeds the a priori bound {bound}", u.sup_norm()),
                });
            }
        }
        fields.push(u.clone());
    }
    let mut traj = Trajectory::new(times, fields)?;
    for w in warnings {
        traj.push_warning(w);
    }
    Ok(traj)
}

/// Signed residual `u_t + H(t, x, u, ∇u) + εAu` per interior snapshot, with
/// central differences in time and space; a two-snapshot trajectory yields
/// one field from the forward difference at its midpoint.
pub fn residual_fields(traj: &Trajectory, spec: &HamiltonianSpec, config: &SolverConfig) -> Result<Vec<(f64, GridField)>> {
    if traj.len() < 2 {
        return Err(Error::Insufficient("the residual needs at least two snapshots".into()));
    }
    let grid = *traj.grid();
    let operator = FractionalOperator::new(&grid, config.order, &config.backend)?;
    let times = traj.times();
    let fields = traj.fields();
    let eval = |t: f64, u: &GridField, dudt: Vec<f64>| -> Result<GridField> {
        let grad = discrete_gradient(u);
        let diffusion = if config.epsilon > 0.0 { Some(operator.apply(u)?) } else { None };
        let values = dudt
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let p = [grad[0].values()[i], grad.get(1).map_or(0.0, |g| g.values()[i])];
                let mut r = d + spec.eval(t, &grid.point(i), u.values()[i], &p);
                if let Some(a) = &diffusion {
                    r += config.epsilon * a.values()[i];
                }
                r
            })
            .collect();
        Ok(GridField::from_parts(grid, values))
    };
    if traj.len() == 2 {
        let dt = times[1] - times[0];
        let mid = fields[0].zip_map(&fields[1], |a, b| 0.5 * (a + b))?;
        let dudt = fields[1].values().iter().zip(fields[0].values()).map(|(b, a)| (b - a) / dt).collect();
        let t = 0.5 * (times[0] + times[1]);
        return Ok(vec![(t, eval(t, &mid, dudt)?)]);
    }
    (1..traj.len() - 1)
        .map(|k| {
            let dt = times[k + 1] - times[k - 1];
            let dudt = fields[k + 1].values().iter().zip(fields[k - 1].values()).map(|(b, a)| (b - a) / dt).collect();
            Ok((times[k], eval(times[k], &fields[k], dudt)?))
        })
        .collect()
}

/// `sup |u_t + H(t, x, u, ∇u) + εAu|` per interior snapshot (see [`residual_fields`]).
pub fn residual(traj: &Trajectory, spec: &HamiltonianSpec, config: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    Ok(residual_fields(traj, spec, config)?.into_iter().map(|(t, r)| (t, r.sup_norm())).collect())
}
