//! Self-check of the fractional operators on `[0, 2π)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{StudyConfig, StudyKind};
use super::{Check, SuiteVerdict};
use crate::error::Result;
use crate::fracops::{apply_spectral, riesz_identity_residual, FractionalOperator, FractionalOrder, OperatorBackend};
use crate::grid::{sample, sup_dist, GridField, PeriodicGrid};

pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const BACKEND_TOLERANCE: f64 = 1e-2;
pub const BACKEND_MIN_ORDER: f64 = 1.0;
pub const RIESZ_TOLERANCE: f64 = 1e-10;
pub const RIESZ_FIELDS: usize = 20;
pub const CONSTANT_TOLERANCE: f64 = 1e-12;

fn orders() -> Result<Vec<FractionalOrder>> {
    [1.0, 1.5, 2.0].into_iter().map(FractionalOrder::new).collect()
}

/// `sin(kx)` at the nodes, with the phase reduced on the integer lattice first so
/// that the sample is exact to rounding for every `k`.
fn lattice_mode(grid: &PeriodicGrid, k: usize) -> Result<GridField> {
    let n = grid.points_per_axis();
    let values = (0..n).map(|i| (2.0 * PI * ((k * i) % n) as f64 / n as f64).sin()).collect();
    GridField::new(*grid, values)
}

/// Largest `sup |A sin(kx) - k^s sin(kx)|` over `k ≤ n/4`.
fn eigen_error(grid: &PeriodicGrid) -> Result<f64> {
    let n = grid.points_per_axis();
    let mut worst = 0.0f64;
    for s in orders()? {
        let e = (1..=n / 4)
            .into_par_iter()
            .map(|k| {
                let u = lattice_mode(grid, k)?;
                sup_dist(&apply_spectral(&u, s), &u.scale((k as f64).powf(s.value())))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        worst = worst.max(e);
    }
    Ok(worst)
}

/// Relative sup difference between the backends on `exp(sin x)`, `s = 1`.
fn backend_difference(n: usize) -> Result<f64> {
    let grid = PeriodicGrid::line(n, 2.0 * PI)?;
    let u = sample(&grid, |x| x[0].sin().exp())?;
    let spectral = apply_spectral(&u, FractionalOrder::CRITICAL);
    let quad = FractionalOperator::new(&grid, FractionalOrder::CRITICAL, &OperatorBackend::quadrature())?.apply(&u)?;
    Ok(sup_dist(&quad, &spectral)? / spectral.sup_norm())
}

/// A field with random coefficients on the modes `1 ≤ k ≤ n/4`.
fn band_limited(grid: &PeriodicGrid, rng: &mut ChaCha8Rng) -> Result<GridField> {
    let modes = (grid.points_per_axis() / 4).min(16);
    let coeffs: Vec<(usize, f64, f64)> =
        (1..=modes).map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    sample(grid, |x| coeffs.iter().map(|&(k, a, b)| a * (k as f64 * x[0]).cos() + b * (k as f64 * x[0]).sin()).sum())
}

/// Eigenfunction exactness, backend agreement and convergence, the Riesz
/// identity, monotonicity of the quadrature and annihilation of constants.
pub fn run_operator_check(cfg: &StudyConfig) -> Result<SuiteVerdict> {
    let mut cfg = cfg.clone();
    cfg.study.kind = StudyKind::OperatorCheck;
    let n = cfg.grid.n;
    let grid = PeriodicGrid::line(n, 2.0 * PI)?;
    let mut checks = vec![Check::at_most("eigenfunction_error", eigen_error(&grid)?, EIGEN_TOLERANCE)];

    let diffs: Vec<f64> = [n / 2, n, 2 * n].par_iter().map(|&m| backend_difference(m)).collect::<Result<_>>()?;
    checks.push(Check::at_most("backend_relative_difference", diffs[1], BACKEND_TOLERANCE));
    let order = (diffs[0] / diffs[1]).log2().min((diffs[1] / diffs[2]).log2());
    checks.push(Check::at_least("backend_convergence_order", order, BACKEND_MIN_ORDER));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.study.seed);
    let mut riesz = 0.0f64;
    for _ in 0..RIESZ_FIELDS {
        riesz = riesz.max(riesz_identity_residual(&band_limited(&grid, &mut rng)?)?);
    }
    checks.push(Check::at_most("riesz_residual", riesz, RIESZ_TOLERANCE));

    let mut monotone = 1.0;
    let mut constant = 0.0f64;
    let c = GridField::constant(grid, 3.7);
    for s in orders()? {
        let quad = FractionalOperator::new(&grid, s, &OperatorBackend::quadrature())?;
        if !quad.is_monotone() {
            monotone = 0.0;
        }
        let spec = FractionalOperator::new(&grid, s, &OperatorBackend::spectral())?;
        constant = constant.max(quad.apply(&c)?.sup_norm()).max(spec.apply(&c)?.sup_norm());
    }
    checks.push(Check::at_least("quadrature_monotone", monotone, 1.0));
    checks.push(Check::at_most("constants_annihilated", constant, CONSTANT_TOLERANCE));
    Ok(SuiteVerdict::new(cfg, checks))
}
