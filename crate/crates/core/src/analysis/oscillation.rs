//! Oscillation of a trajectory over nested parabolic cylinders
//! `Q_r(t₀, x₀) = [t₀ - r, t₀] × B_r(x₀)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Point, Trajectory};

/// Parabolic cylinder `[t₀ - r, t₀] × B_r(x₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub t0: f64,
    pub x0: Point,
    pub r: f64,
}

/// Oscillations on `Q_{r ρ^k}`, `k = 0..=kmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    /// `osc_{k+1} / osc_k`.
    pub decay_factors: Vec<f64>,
    /// Least-squares exponent from `k ≥ 1`; absent when some oscillation vanishes.
    pub fitted_alpha: Option<f64>,
    /// Root-mean-square residual of that fit.
    pub fit_residual: Option<f64>,
}

/// Periodic distance between a node position and `x0`.
fn distance(p: &Point, x0: &Point, length: f64, dim: usize) -> f64 {
    let mut d2 = 0.0;
    for axis in 0..dim {
        let mut d = (p[axis] - x0[axis]).rem_euclid(length);
        if d > length / 2.0 {
            d = length - d;
        }
        d2 += d * d;
    }
    d2.sqrt()
}

/// Measures `osc = max - min` over each cylinder and fits `osc_k ∝ ρ^{αk}`.
pub fn oscillation_sequence(traj: &Trajectory, cyl: &CylinderSpec, ratio: f64, kmax: usize) -> Result<OscillationReport> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("cylinder ratio must lie in (0, 1), got {ratio}")));
    }
    if !(cyl.r > 0.0) {
        return Err(Error::Config(format!("cylinder radius must be positive, got {}", cyl.r)));
    }
    let times = traj.times();
    if cyl.t0 - cyl.r < -1e-12 || cyl.t0 > times[times.len() - 1] + 1e-12 {
        return Err(Error::Config(format!("cylinder time span [{}, {}] leaves the trajectory", cyl.t0 - cyl.r, cyl.t0)));
    }
    let grid = *traj.grid();
    let (length, dim) = (grid.length(), grid.dim());
    let dist: Vec<f64> = (0..grid.len()).map(|i| distance(&grid.point(i), &cyl.x0, length, dim)).collect();
    let mut radii = Vec::with_capacity(kmax + 1);
    let mut oscillations = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let r = cyl.r * ratio.powi(k as i32);
        let snaps: Vec<usize> =
            (0..times.len()).filter(|&l| times[l] >= cyl.t0 - r - 1e-12 && times[l] <= cyl.t0 + 1e-12).collect();
        let nodes: Vec<usize> = (0..grid.len()).filter(|&i| dist[i] <= r + 1e-12).collect();
        if snaps.len() < 2 || nodes.len() < 2 {
            return Err(Error::Insufficient(format!(
                "cylinder of radius {r} holds {} snapshots and {} nodes (need 2 of each)",
                snaps.len(),
                nodes.len()
            )));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &l in &snaps {
            let vals = traj.fields()[l].values();
            for &i in &nodes {
                lo = lo.min(vals[i]);
                hi = hi.max(vals[i]);
            }
        }
        radii.push(r);
        oscillations.push(hi - lo);
    }
    let decay_factors = oscillations
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let fit_points: Vec<(f64, f64)> = (1..=kmax).map(|k| (k as f64, oscillations[k])).collect();
    let (fitted_alpha, fit_residual) = if fit_points.len() >= 2 && fit_points.iter().all(|p| p.1 > 0.0) {
        let logs: Vec<(f64, f64)> = fit_points.iter().map(|&(k, o)| (k, o.ln())).collect();
        let (slope, intercept) = least_squares(&logs);
        let rms = (logs.iter().map(|&(k, y)| (y - slope * k - intercept).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
        (Some(slope / ratio.ln()), Some(rms))
    } else {
        (None, None)
    };
    Ok(OscillationReport { radii, oscillations, decay_factors, fitted_alpha, fit_residual })
}

/// Ordinary least-squares `(slope, intercept)`.
pub(crate) fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, GridField, PeriodicGrid};
    use std::f64::consts::PI;

    fn times() -> Vec<f64> {
        (0..=40).map(|k| k as f64 * 0.01).collect()
    }

    #[test]
    fn constant_has_no_exponent() {
        let g = PeriodicGrid::line(1024, 2.0 * PI).unwrap();
        let traj = Trajectory::stationary(GridField::constant(g, 1.0), times()).unwrap();
        let cyl = CylinderSpec { t0: 0.4, x0: [PI, 0.0], r: 0.2 };
        let rep = oscillation_sequence(&traj, &cyl, 0.5, 4).unwrap();
        assert!(rep.oscillations.iter().all(|&o| o == 0.0));
        assert_eq!(rep.fitted_alpha, None);
    }

    #[test]
    fn half_power_cusp() {
        let g = PeriodicGrid::line(4096, 2.0 * PI).unwrap();
        let x0 = PI;
        let u = sample(&g, |x| (x[0] - x0).abs().sqrt()).unwrap();
        let traj = Trajectory::stationary(u, times()).unwrap();
        let cyl = CylinderSpec { t0: 0.4, x0: [x0, 0.0], r: 0.2 };
        let rep = oscillation_sequence(&traj, &cyl, 0.5, 4).unwrap();
        let alpha = rep.fitted_alpha.unwrap();
        assert!((alpha - 0.5).abs() <= 0.05, "{rep:?}");
        for f in &rep.decay_factors {
            assert!((f - 0.5f64.sqrt()).abs() < 0.05);
        }
    }

    #[test]
    fn nesting_and_resolution() {
        let g = PeriodicGrid::line(256, 2.0 * PI).unwrap();
        let u = sample(&g, |x| (5.0 * x[0]).sin() + x[0].cos()).unwrap();
        let fields: Vec<GridField> = times().iter().map(|t| u.map(|v| v * (1.0 - t))).collect();
        let traj = Trajectory::new(times(), fields).unwrap();
        let cyl = CylinderSpec { t0: 0.3, x0: [1.0, 0.0], r: 0.25 };
        let rep = oscillation_sequence(&traj, &cyl, 0.6, 3).unwrap();
        assert!(rep.oscillations.windows(2).all(|w| w[1] <= w[0]));
        let tiny = CylinderSpec { t0: 0.3, x0: [1.0, 0.0], r: 0.25 };
        assert!(matches!(oscillation_sequence(&traj, &tiny, 0.1, 4), Err(Error::Insufficient(_))));
    }
}
