//! Space-time sup/inf convolutions over the snapshots of a trajectory,
//!
//! ```text
//! u^δ(t, x) = sup_{s, y} [u(s, y) - (|x - y|² + (t - s)²) / δ],
//! ```
//!
//! searched within the radius `γ = (δ M)^{1/2}`, `M = 2 sup|u|`, outside of
//! which no candidate can beat `u(t, x)` itself.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridField, Trajectory};

/// Sup-convolution `u^δ` on the snapshot times and grid nodes.
pub fn sup_convolution(traj: &Trajectory, delta: f64) -> Result<Trajectory> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let grid = *traj.grid();
    let h = grid.spacing();
    let n = grid.points_per_axis() as isize;
    let sup = traj.fields().iter().map(GridField::sup_norm).fold(0.0, f64::max);
    let gamma = (delta * 2.0 * sup).sqrt();
    let reach = ((gamma / h).floor() as isize).min(n / 2);
    let mut offsets: Vec<([isize; 2], f64)> = Vec::new();
    let range_b = if grid.dim() == 2 { -reach..=reach } else { 0..=0 };
    for a in -reach..=reach {
        for b in range_b.clone() {
            let d2 = ((a * a + b * b) as f64) * h * h;
            if d2 <= gamma * gamma {
                offsets.push(([a, b], d2));
            }
        }
    }
    let times = traj.times();
    let fields = traj.fields();
    let out: Vec<GridField> = (0..traj.len())
        .map(|k| {
            let partners: Vec<(usize, f64)> = (0..traj.len())
                .filter_map(|l| {
                    let dt2 = (times[l] - times[k]).powi(2);
                    (dt2 <= gamma * gamma).then_some((l, dt2))
                })
                .collect();
            let values = (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let mut best = fields[k].values()[i];
                    for &(l, dt2) in &partners {
                        let vals = fields[l].values();
                        for (off, d2) in &offsets {
                            let cand = vals[grid.offset_index(i, *off)] - (d2 + dt2) / delta;
                            best = best.max(cand);
                        }
                    }
                    best
                })
                .collect();
            GridField::new(grid, values)
        })
        .collect::<Result<_>>()?;
    let mut result = Trajectory::new(times.to_vec(), out)?;
    for w in traj.warnings() {
        result.push_warning(w.clone());
    }
    Ok(result)
}

/// Inf-convolution `u_δ = -(-u)^δ`.
pub fn inf_convolution(traj: &Trajectory, delta: f64) -> Result<Trajectory> {
    let negated = traj.map_fields(|f| f.scale(-1.0));
    Ok(sup_convolution(&negated, delta)?.map_fields(|f| f.scale(-1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lipschitz_constant, sample, PeriodicGrid};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constants_are_fixed() {
        let g = PeriodicGrid::line(64, 2.0 * PI).unwrap();
        let c = Trajectory::stationary(GridField::constant(g, -1.5), vec![0.0, 0.1]).unwrap();
        assert_eq!(sup_convolution(&c, 0.1).unwrap(), c);
    }

    #[test]
    fn convex_kink_gain() {
        // u = |x| near 0: u^δ(0) = δ/4 at |y| = δ/2
        let g = PeriodicGrid::line(4096, 2.0).unwrap();
        let l = g.length();
        let u = sample(&g, |x| x[0].min(l - x[0])).unwrap();
        let traj = Trajectory::stationary(u, vec![0.0]).unwrap();
        let delta = 0.05;
        let conv = sup_convolution(&traj, delta).unwrap();
        let brute = (0..=20_000).map(|k| (k as f64 * 1e-5) - (k as f64 * 1e-5).powi(2) / delta).fold(f64::MIN, f64::max);
        assert!((brute - delta / 4.0).abs() < 1e-9);
        // node-restricted maximizer: within h²/δ of the continuum value
        let h = g.spacing();
        assert!((conv.fields()[0].get(0) - delta / 4.0).abs() <= h * h / delta);
    }

    #[test]
    fn duality_is_exact() {
        let g = PeriodicGrid::line(128, 2.0 * PI).unwrap();
        let u = sample(&g, |x| (3.0 * x[0]).sin().abs() - 0.2 * x[0].cos()).unwrap();
        let traj = Trajectory::new(vec![0.0, 0.05, 0.1], vec![u.clone(), u.scale(0.9), u.scale(0.8)]).unwrap();
        let neg = traj.map_fields(|f| f.scale(-1.0));
        let lhs = inf_convolution(&traj, 0.01).unwrap();
        let rhs = sup_convolution(&neg, 0.01).unwrap().map_fields(|f| f.scale(-1.0));
        assert_eq!(lhs, rhs);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sandwich_and_monotonicity(seed in 0u64..10_000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = PeriodicGrid::line(128, 2.0 * PI).unwrap();
            let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let u = sample(&g, |x| coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * x[0]).sin()).sum::<f64>()
                + 0.3 * (x[0] - PI).abs()).unwrap();
            let traj = Trajectory::stationary(u.clone(), vec![0.0]).unwrap();
            let lip = lipschitz_constant(&u);
            let mut prev: Option<GridField> = None;
            for delta in [0.1, 0.03, 0.01, 0.003] {
                let c = sup_convolution(&traj, delta).unwrap().fields()[0].clone();
                for (a, b) in c.values().iter().zip(u.values()) {
                    prop_assert!(a >= b);
                    prop_assert!(*a <= b + lip * lip * delta / 4.0 + 1e-12);
                }
                if let Some(p) = &prev {
                    prop_assert!(c.values().iter().zip(p.values()).all(|(a, b)| a <= b));
                }
                prev = Some(c);
            }
        }
    }
}
