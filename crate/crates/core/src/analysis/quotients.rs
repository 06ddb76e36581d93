//! Difference quotients of solutions and the advection–diffusion inequalities
//! they satisfy:
//!
//! ```text
//! w_t - A|∇w| - B + λw + ε(-Δ)^{s/2} w ≤ 0,
//! w_t + A|∇w| + B + λw + ε(-Δ)^{s/2} w ≥ 0,
//! ```
//!
//! where `B` already carries the factor `|ℓ| / |h| = 1` of the normalized quotient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{FractionalOperator, FractionalOrder, OperatorBackend};
use crate::grid::{discrete_gradient, GridField, Point, Trajectory};
use crate::hamiltonians::HamiltonianSpec;
use crate::solver::{residual_fields, SolverConfig};

/// `(u(t, x + hℓ) - u(t, x)) / |h|` for a lattice displacement `hℓ`.
pub fn difference_quotient(traj: &Trajectory, h: f64, ell: Point) -> Result<Trajectory> {
    let grid = *traj.grid();
    let norm = ell[0].hypot(ell[1]);
    if !((norm - 1.0).abs() < 1e-12) {
        return Err(Error::Config(format!("direction must be a unit vector, got {ell:?}")));
    }
    if h == 0.0 || !h.is_finite() {
        return Err(Error::Config(format!("quotient step must be nonzero, got {h}")));
    }
    let nodes = [h * ell[0] / grid.spacing(), h * ell[1] / grid.spacing()];
    let rounded = [nodes[0].round(), nodes[1].round()];
    if (nodes[0] - rounded[0]).abs() > 1e-9 || (nodes[1] - rounded[1]).abs() > 1e-9 || (grid.dim() == 1 && rounded[1] != 0.0) {
        return Err(Error::Config(format!("displacement h·ℓ = {h}·{ell:?} is not a lattice vector")));
    }
    let offset = [rounded[0] as isize, rounded[1] as isize];
    let inv = 1.0 / h.abs();
    Ok(traj.map_fields(|f| {
        let shifted = f.shifted(offset);
        shifted.zip_map(f, |a, b| (a - b) * inv).expect("same grid")
    }))
}

/// Positive parts of the violations of the two inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityExcess {
    pub sub_excess: f64,
    pub super_deficit: f64,
}

/// Parameters of [`advection_inequality_residuals`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub eps: f64,
    pub order: FractionalOrder,
    pub backend: OperatorBackend,
    /// Only snapshots with `t_a < t ≤ t_b` enter the sup.
    pub time_window: Option<[f64; 2]>,
}

/// Sup over interior snapshots (central differences in time and space) of the
/// positive part of each inequality's violation.
pub fn advection_inequality_residuals(w: &Trajectory, params: &InequalityParams) -> Result<InequalityExcess> {
    let InequalityParams { a, b, lambda, eps, order, backend, time_window } = *params;
    if a < 0.0 || b < 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Config(format!("A and B must be finite and nonnegative, got A = {a}, B = {b}")));
    }
    if w.len() < 3 {
        return Err(Error::Insufficient("inequality residuals need at least three snapshots".into()));
    }
    let grid = *w.grid();
    let operator = FractionalOperator::new(&grid, order, &backend)?;
    let times = w.times();
    let fields = w.fields();
    let mut excess = InequalityExcess { sub_excess: 0.0, super_deficit: 0.0 };
    for k in 1..w.len() - 1 {
        if let Some([ta, tb]) = time_window {
            if !(times[k] > ta + 1e-12 && times[k] <= tb + 1e-12) {
                continue;
            }
        }
        let dt = times[k + 1] - times[k - 1];
        let wk = &fields[k];
        let grad = discrete_gradient(wk);
        let diffusion = if eps > 0.0 { Some(operator.apply(wk)?) } else { None };
        for i in 0..grid.len() {
            let wt = (fields[k + 1].values()[i] - fields[k - 1].values()[i]) / dt;
            let g = grad.iter().map(|c| c.values()[i].powi(2)).sum::<f64>().sqrt();
            let common = wt + lambda * wk.values()[i] + diffusion.as_ref().map_or(0.0, |d| eps * d.values()[i]);
            excess.sub_excess = excess.sub_excess.max(common - a * g - b);
            excess.super_deficit = excess.super_deficit.max(-(common + a * g + b));
        }
    }
    Ok(excess)
}

/// Largest positive part of `u_t + H(t, x, u, ∇u) + εAu` over interior
/// snapshots with `t_a < t ≤ t_b`: how far `u` is from being a subsolution.
pub fn subsolution_excess(traj: &Trajectory, spec: &HamiltonianSpec, config: &SolverConfig, window: [f64; 2]) -> Result<f64> {
    let residuals = residual_fields(traj, spec, config)?;
    let mut best = 0.0f64;
    let mut seen = false;
    for (t, r) in residuals {
        if t > window[0] + 1e-12 && t <= window[1] + 1e-12 {
            seen = true;
            best = best.max(r.max());
        }
    }
    if !seen {
        return Err(Error::Insufficient(format!("no interior snapshot in the window {window:?}")));
    }
    Ok(best)
}

/// Convenience: `B = C (1 + ‖u‖_∞)` with `C` the `(t, x)` constant of `H`.
pub fn default_source_bound(spec: &HamiltonianSpec, traj: &Trajectory) -> f64 {
    let sup = traj.fields().iter().map(GridField::sup_norm).fold(0.0, f64::max);
    spec.lipschitz_tx() * (1.0 + sup)
}
