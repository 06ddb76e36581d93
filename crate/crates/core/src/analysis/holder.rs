//! Parabolic Hölder seminorms and the `C^{1,α}` norm on a time window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{discrete_gradient, GridField, Trajectory};

/// Result of [`holder_seminorm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub seminorm: f64,
    /// Largest spatial separation `W` admitted in the pair sup.
    pub window: f64,
    pub time_window: [f64; 2],
}

/// Snapshot indices with `t_a ≤ t ≤ t_b` (rounding allowance `1e-12`).
pub(crate) fn snapshots_in(traj: &Trajectory, window: [f64; 2]) -> Vec<usize> {
    traj.times()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t >= window[0] - 1e-12 && t <= window[1] + 1e-12)
        .map(|(k, _)| k)
        .collect()
}

/// Default spatial pair window `L/4`.
pub fn default_pair_window(traj: &Trajectory) -> f64 {
    traj.grid().length() / 4.0
}

/// `sup |w(t,x) - w(s,y)| / (|t - s|^α + |x - y|^α)` over node/snapshot pairs
/// in `[t_a, t_b]` with periodic `|x - y| ≤ W` (default `L/4`).
pub fn holder_seminorm(traj: &Trajectory, alpha: f64, time_window: [f64; 2], pair_window: Option<f64>) -> Result<HolderReport> {
    let ks = snapshots_in(traj, time_window);
    if ks.is_empty() {
        return Err(Error::Insufficient(format!("no snapshots in the time window {time_window:?}")));
    }
    let fields: Vec<&GridField> = ks.iter().map(|&k| &traj.fields()[k]).collect();
    let times: Vec<f64> = ks.iter().map(|&k| traj.times()[k]).collect();
    let window = pair_window.unwrap_or_else(|| default_pair_window(traj));
    let seminorm = seminorm_of(&fields, &times, alpha, window)?;
    Ok(HolderReport { alpha, seminorm, window, time_window })
}

/// Pair sup over the given snapshots of one scalar quantity.
pub(crate) fn seminorm_of(fields: &[&GridField], times: &[f64], alpha: f64, window: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    if !(window >= 0.0) {
        return Err(Error::Config(format!("pair window must be nonnegative, got {window}")));
    }
    let grid = *fields[0].grid();
    let h = grid.spacing();
    let n = grid.points_per_axis() as isize;
    let reach = ((window / h + 1e-9).floor() as isize).min(n / 2);
    let mut offsets: Vec<([isize; 2], f64)> = Vec::new();
    let range_b = if grid.dim() == 2 { -reach..=reach } else { 0..=0 };
    for a in -reach..=reach {
        for b in range_b.clone() {
            let d = (a as f64).hypot(b as f64) * h;
            if d <= window + 1e-12 * h {
                offsets.push(([a, b], d.powf(alpha)));
            }
        }
    }
    let m = fields.len();
    let best = (0..m * grid.len())
        .into_par_iter()
        .map(|idx| {
            let (k, i) = (idx / grid.len(), idx % grid.len());
            let w = fields[k].values()[i];
            let mut best = 0.0f64;
            for l in k..m {
                let dt = (times[l] - times[k]).abs().powf(alpha);
                let other = fields[l].values();
                for (off, dx) in &offsets {
                    let denom = dt + dx;
                    if denom == 0.0 {
                        continue;
                    }
                    let j = grid.offset_index(i, *off);
                    best = best.max((w - other[j]).abs() / denom);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `sup|u| + sup|∇u| + sup|u_t| + [∇u]_α + [u_t]_α` over the snapshots in
/// `(t/2, t]`; derivatives are central differences (one-sided in time at the
/// ends of the trajectory).
pub fn c1alpha_norm(traj: &Trajectory, t: f64, alpha: f64) -> Result<f64> {
    let ks: Vec<usize> = traj
        .times()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0.5 * t + 1e-12 && s <= t + 1e-12)
        .map(|(k, _)| k)
        .collect();
    if ks.len() < 3 {
        return Err(Error::Insufficient(format!("c1alpha_norm needs at least 3 snapshots in (t/2, t], found {}", ks.len())));
    }
    let times = traj.times();
    let fields = traj.fields();
    let last = traj.len() - 1;
    let time_derivative = |k: usize| -> Result<GridField> {
        let (a, b) = (k.saturating_sub(1), (k + 1).min(last));
        let dt = times[b] - times[a];
        fields[b].zip_map(&fields[a], |x, y| (x - y) / dt)
    };
    let window_times: Vec<f64> = ks.iter().map(|&k| times[k]).collect();
    let u_sup = ks.iter().map(|&k| fields[k].sup_norm()).fold(0.0, f64::max);
    let dts: Vec<GridField> = ks.iter().map(|&k| time_derivative(k)).collect::<Result<_>>()?;
    let grads: Vec<Vec<GridField>> = ks.iter().map(|&k| discrete_gradient(&fields[k])).collect();
    let pair_window = default_pair_window(traj);

    let mut norm = u_sup;
    norm += dts.iter().map(GridField::sup_norm).fold(0.0, f64::max);
    norm += seminorm_of(&dts.iter().collect::<Vec<_>>(), &window_times, alpha, pair_window)?;
    for axis in 0..traj.grid().dim() {
        let comp: Vec<&GridField> = grads.iter().map(|g| &g[axis]).collect();
        norm += comp.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
        norm += seminorm_of(&comp, &window_times, alpha, pair_window)?;
    }
    Ok(norm)
}
