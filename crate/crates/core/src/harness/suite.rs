//! The property suite: comparison, continuous dependence under shifts,
//! Lipschitz uniformity, barriers, sup-convolutions, difference-quotient
//! inequalities and oscillation decay, each reduced to named checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{InitialData, StudyConfig, StudyKind};
use super::regularity::{oscillation_checks, oscillations};
use super::{Check, Relation, SuiteVerdict};
use crate::analysis::{
    advection_inequality_residuals, default_source_bound, difference_quotient, inf_convolution, least_squares,
    subsolution_excess, sup_convolution, InequalityParams,
};
use crate::error::Result;
use crate::grid::{lipschitz_constant, sample, GridField, PeriodicGrid, Trajectory};
use crate::hamiltonians::{shift, working_radius, Coefficient, HamiltonianSpec, NumericalFlux};
use crate::solver::{barrier_constant, solve, stable_dt, SolverConfig};

/// `λ = 1/2`, `b = sin(x + t)`, `f = cos x`: the x- and t-dependent test case.
fn affine_case() -> Result<HamiltonianSpec> {
    HamiltonianSpec::affine(0.5, Coefficient::SinXPlusT, Coefficient::CosX)
}

/// Largest value of `u - v` over all snapshots and nodes.
fn max_excess(u: &Trajectory, v: &Trajectory) -> f64 {
    u.fields()
        .iter()
        .zip(v.fields())
        .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| x - y))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max_lipschitz(traj: &Trajectory) -> f64 {
    traj.fields().iter().map(lipschitz_constant).fold(0.0, f64::max)
}

/// A random Lipschitz field and a pointwise larger one.
fn ordered_pair(grid: &PeriodicGrid, seed: u64) -> Result<(GridField, GridField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 2.0 * PI / grid.length();
    let l = grid.length();
    let lower: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-0.5..0.5), rng.gen_range(0.0..2.0 * PI))).collect();
    let kink = rng.gen_range(0.0..1.0);
    let base: f64 = rng.gen_range(0.0..0.5);
    let bumps: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(0.0..0.3), rng.gen_range(0.0..2.0 * PI))).collect();
    let u = sample(grid, |x| {
        lower.iter().enumerate().map(|(k, (c, p))| c * ((k + 1) as f64 * w * x[0] + p).sin()).sum::<f64>()
            + kink * x[0].min(l - x[0])
    })?;
    let gap = sample(grid, |x| {
        base + bumps.iter().enumerate().map(|(k, (d, p))| d * (1.0 + ((k + 1) as f64 * w * x[0] + p).sin())).sum::<f64>()
    })?;
    let v = u.zip_map(&gap, |a, b| a + b)?;
    Ok((u, v))
}

/// Solves both members with the same flux and time step.
fn solve_pair(u0: &GridField, v0: &GridField, spec: &HamiltonianSpec, cfg: &SolverConfig) -> Result<(Trajectory, Trajectory)> {
    let flux = NumericalFlux { alpha: NumericalFlux::for_data(spec, u0).alpha.max(NumericalFlux::for_data(spec, v0).alpha) };
    let base = cfg.clone().with_flux(flux);
    let grid = u0.grid();
    let dt = stable_dt(&base, grid, spec, lipschitz_constant(u0)).min(stable_dt(&base, grid, spec, lipschitz_constant(v0)));
    let common = base.with_max_dt(dt);
    Ok((solve(u0, spec, &common)?, solve(v0, spec, &common)?))
}

/// (a) Discrete comparison on random ordered pairs.
fn comparison(cfg: &StudyConfig) -> Result<Vec<Check>> {
    let grid = PeriodicGrid::line(cfg.study.pair_grid_n, cfg.grid.length)?;
    let solver = cfg.solver_config(cfg.solver.epsilon)?;
    let mut master = ChaCha8Rng::seed_from_u64(cfg.study.seed);
    let seeds: Vec<u64> = (0..cfg.study.pairs).map(|_| master.gen()).collect();
    let specs = [HamiltonianSpec::eikonal(), affine_case()?];
    let worst = specs
        .iter()
        .map(|spec| {
            seeds
                .par_iter()
                .map(|&seed| {
                    let (u0, v0) = ordered_pair(&grid, seed)?;
                    let (u, v) = solve_pair(&u0, &v0, spec, &solver)?;
                    Ok(max_excess(&u, &v).max(0.0))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    Ok(vec![Check::at_most("comparison_max_violation", worst, cfg.study.tolerances.comparison)])
}

/// (b) `sup(u_ℓ - u) ≤ (initial gap)⁺ + C|ℓ|` for the x-dependent case.
fn shift_study(cfg: &StudyConfig) -> Result<Vec<Check>> {
    let grid = PeriodicGrid::line(cfg.study.pair_grid_n, cfg.grid.length)?;
    let u0 = InitialData::Sine.sample(&grid)?;
    let spec = affine_case()?;
    let per_eps: Vec<(f64, f64)> = cfg
        .study
        .shift_epsilons
        .par_iter()
        .map(|&eps| {
            let mut solver = cfg.solver_config(eps)?;
            solver.final_time = cfg.study.shift_final_time;
            solver = solver.with_uniform_snapshots(cfg.solver.snapshot_every);
            let u = solve(&u0, &spec, &solver)?;
            let gaps: Vec<(f64, f64)> = cfg
                .study
                .shifts
                .iter()
                .map(|&ell| Ok((ell, max_excess(&solve(&u0, &shift(&spec, [ell, 0.0]), &solver)?, &u).max(0.0))))
                .collect::<Result<_>>()?;
            let c = gaps.iter().map(|&(ell, g)| g / ell).fold(0.0, f64::max);
            let logs: Vec<(f64, f64)> = gaps.iter().map(|&(ell, g)| (ell.ln(), g.ln())).collect();
            let slope = if gaps.iter().all(|&(_, g)| g > 0.0) { least_squares(&logs).0 } else { f64::INFINITY };
            Ok((c, slope))
        })
        .collect::<Result<_>>()?;
    let c_max = per_eps.iter().map(|p| p.0).fold(0.0, f64::max);
    let c_min = per_eps.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let slope = per_eps.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let tol = &cfg.study.tolerances;
    Ok(vec![
        Check::at_least("shift_min_slope", slope, tol.shift_min_slope),
        Check::at_most("shift_constant_spread", (c_max - c_min) / c_max, tol.shift_spread),
    ])
}

/// (c) Lipschitz constants uniform in `ε`.
fn lipschitz_uniformity(cfg: &StudyConfig) -> Result<Vec<Check>> {
    let grid = PeriodicGrid::line(cfg.study.pair_grid_n, cfg.grid.length)?;
    let u0 = InitialData::Triangle.sample(&grid)?;
    let lip0 = lipschitz_constant(&u0);
    let run = |spec: &HamiltonianSpec| -> Result<Vec<f64>> {
        cfg.study
            .epsilons
            .par_iter()
            .map(|&eps| Ok(max_lipschitz(&solve(&u0, spec, &cfg.solver_config(eps)?)?)))
            .collect()
    };
    let mut free = 0.0f64;
    for spec in [HamiltonianSpec::transport(1.0), HamiltonianSpec::eikonal()] {
        free = run(&spec)?.into_iter().fold(free, f64::max);
    }
    let affine = run(&affine_case()?)?;
    let hi = affine.iter().copied().fold(0.0, f64::max);
    let lo = affine.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = &cfg.study.tolerances;
    Ok(vec![
        Check::at_most("lipschitz_x_independent_ratio", free / lip0, tol.lipschitz_factor),
        Check::at_most("lipschitz_affine_spread", (hi - lo) / hi, tol.lipschitz_spread),
    ])
}

/// (d) `u₀ - Ct ≤ u(t) ≤ u₀ + Ct` for every catalog Hamiltonian.
fn barriers(cfg: &StudyConfig) -> Result<Vec<Check>> {
    let grid = PeriodicGrid::line(cfg.study.pair_grid_n, cfg.grid.length)?;
    let u0 = InitialData::Triangle.sample(&grid)?;
    let specs = [HamiltonianSpec::transport(1.0), HamiltonianSpec::eikonal(), HamiltonianSpec::quadratic(), affine_case()?];
    let cases: Vec<(usize, f64)> =
        (0..specs.len()).flat_map(|i| cfg.study.barrier_epsilons.iter().map(move |&e| (i, e))).collect();
    let slack = cases
        .par_iter()
        .map(|&(i, eps)| {
            let solver = cfg.solver_config(eps)?;
            let c = barrier_constant(&u0, &specs[i], &solver)?;
            let traj = solve(&u0, &specs[i], &solver)?;
            let mut worst = f64::INFINITY;
            for (t, field) in traj.times().iter().zip(traj.fields()) {
                for (u, v) in field.values().iter().zip(u0.values()) {
                    worst = worst.min((u - (v - c * t)).min((v + c * t) - u));
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(vec![Check::at_least("barrier_min_slack", slack, -cfg.study.tolerances.barrier_slack)])
}

/// (e) Sup-convolution: ordering, duality and the subsolution excess ladder.
fn sup_convolution_checks(cfg: &StudyConfig, spec: &HamiltonianSpec, traj: &Trajectory) -> Result<Vec<Check>> {
    let solver = cfg.solver_config(cfg.solver.epsilon)?;
    let window = [0.5 * cfg.solver.final_time, cfg.solver.final_time];
    let own = subsolution_excess(traj, spec, &solver, window)?;
    let per_delta: Vec<(f64, f64, f64)> = cfg
        .study
        .deltas
        .par_iter()
        .map(|&delta| {
            let up = sup_convolution(traj, delta)?;
            let below = max_excess(traj, &up);
            let negated = traj.map_fields(|f| f.scale(-1.0));
            let dual = inf_convolution(traj, delta)?.map_fields(|f| f.scale(-1.0));
            let duality = max_excess(&dual, &sup_convolution(&negated, delta)?)
                .max(max_excess(&sup_convolution(&negated, delta)?, &dual));
            Ok((below, duality, subsolution_excess(&up, spec, &solver, window)? - own))
        })
        .collect::<Result<_>>()?;
    let below = per_delta.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let duality = per_delta.iter().map(|p| p.1).fold(0.0, f64::max);
    let excess = per_delta.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::at_most("supconv_lower", below, 0.0),
        Check::at_most("supconv_duality", duality, 0.0),
        Check::at_most("supconv_excess", excess, cfg.study.tolerances.supconv_excess),
    ])
}

fn quotient_excess(cfg: &StudyConfig, spec: &HamiltonianSpec, traj: &Trajectory) -> Result<f64> {
    let grid = *traj.grid();
    let w = difference_quotient(traj, grid.spacing(), [1.0, 0.0])?;
    let params = InequalityParams {
        a: spec.lipschitz_p(working_radius(&traj.fields()[0])),
        b: default_source_bound(spec, traj),
        lambda: spec.lambda(),
        eps: cfg.solver.epsilon,
        order: cfg.order()?,
        backend: cfg.backend(),
        time_window: Some([0.5 * cfg.solver.final_time, cfg.solver.final_time]),
    };
    let e = advection_inequality_residuals(&w, &params)?;
    Ok(e.sub_excess.max(e.super_deficit))
}

/// Runs every check and gathers the verdict.
pub fn run_property_suite(cfg: &StudyConfig) -> Result<SuiteVerdict> {
    let mut cfg = cfg.clone();
    cfg.study.kind = StudyKind::PropertySuite;
    cfg.validate()?;
    let spec = cfg.hamiltonian()?;
    let solver = cfg.solver_config(cfg.solver.epsilon)?;
    let (coarse, fine) = rayon::join(
        || -> Result<Trajectory> {
            let grid = cfg.grid()?;
            solve(&cfg.initial(&grid)?, &spec, &solver)
        },
        || -> Result<Trajectory> {
            let grid = cfg.grid_with(2 * cfg.grid.n)?;
            solve(&cfg.initial(&grid)?, &spec, &solver)
        },
    );
    let (coarse, fine) = (coarse?, fine?);

    let mut checks = comparison(&cfg)?;
    checks.extend(shift_study(&cfg)?);
    checks.extend(lipschitz_uniformity(&cfg)?);
    checks.extend(barriers(&cfg)?);
    checks.extend(sup_convolution_checks(&cfg, &spec, &coarse)?);
    let (q_coarse, q_fine) = (quotient_excess(&cfg, &spec, &coarse)?, quotient_excess(&cfg, &spec, &fine)?);
    checks.push(Check::at_most("quotient_excess", q_coarse, cfg.study.tolerances.quotient_excess));
    checks.push(Check::new("quotient_refinement_change", q_fine - q_coarse, Relation::Below, 0.0));
    checks.extend(oscillation_checks(&cfg, &oscillations(&cfg, &coarse)?));
    Ok(SuiteVerdict::new(cfg, checks))
}
