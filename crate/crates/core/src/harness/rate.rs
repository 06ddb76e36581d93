//! Vanishing-viscosity rate study: `E(ε) = sup_x |u^ε(T) - u(T)|` over an
//! `ε` ladder, a one-refinement self-error estimate, and model fits.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{StudyConfig, StudyKind};
use super::{Check, Relation};
use crate::analysis::{fit_rate, RateFit, RateModel};
use crate::error::{Error, Result};
use crate::grid::sup_dist;
use crate::hamiltonians::HamiltonianSpec;
use crate::oracles::{fractional_heat_exact, hopf_lax, transport_exact};
use crate::solver::solve;

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub epsilon: f64,
    pub error: f64,
    /// `|E_n(ε) - E_{n/2}(ε)|`.
    pub self_error: f64,
    /// `ε |log ε|`.
    pub model_eps_log: f64,
    /// `error / model_eps_log`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub config: StudyConfig,
    /// How the viscous solution was obtained.
    pub method: String,
    pub rows: Vec<RateRow>,
    pub fit_eps_log: RateFit,
    /// `ε^{1/s}` fit.
    pub fit_power: RateFit,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Error at `T` on a grid of `n` points.
fn error_at(cfg: &StudyConfig, spec: &HamiltonianSpec, n: usize, eps: f64) -> Result<f64> {
    let grid = cfg.grid_with(n)?;
    let u0 = cfg.initial(&grid)?;
    let t = cfg.solver.final_time;
    if let Some(a) = spec.transport_velocity() {
        let inviscid = transport_exact(&u0, a, t).field;
        let viscous = fractional_heat_exact(&inviscid, cfg.order()?, eps, t)?.field;
        return sup_dist(&viscous, &inviscid);
    }
    let inviscid = hopf_lax(&u0, spec, t)?.field;
    let viscous = solve(&u0, spec, &cfg.solver_config(eps)?)?;
    sup_dist(viscous.final_field(), &inviscid)
}

/// Runs the study; fails with a configuration error when no oracle covers the
/// Hamiltonian and with `Insufficient` when the grid is too coarse.
pub fn run_rate_study(cfg: &StudyConfig) -> Result<RateReport> {
    let mut cfg = cfg.clone();
    cfg.study.kind = StudyKind::RateStudy;
    cfg.validate()?;
    let spec = cfg.hamiltonian()?;
    let method = if spec.transport_velocity().is_some() {
        "transport: exact translation composed with the fractional heat semigroup"
    } else if spec.is_p_only() && spec.convex_in_p() && spec.conjugate(&[0.0, 0.0]).is_some() {
        "convex H(p): monotone solver against the Hopf-Lax formula"
    } else {
        return Err(Error::Config(format!(
            "no exact oracle for the Hamiltonian {}; rate studies need transport or a convex H(p)",
            spec.name()
        )));
    };
    let n = cfg.grid.n;
    let measured: Vec<(f64, f64)> = cfg
        .study
        .epsilons
        .par_iter()
        .map(|&eps| Ok((error_at(&cfg, &spec, n, eps)?, error_at(&cfg, &spec, n / 2, eps)?)))
        .collect::<Result<_>>()?;
    let rows: Vec<RateRow> = cfg
        .study
        .epsilons
        .iter()
        .zip(&measured)
        .map(|(&epsilon, &(fine, coarse))| {
            let model_eps_log = RateModel::EpsLog.eval(epsilon);
            RateRow { epsilon, error: fine, self_error: (fine - coarse).abs(), model_eps_log, ratio: fine / model_eps_log }
        })
        .collect();

    let s = cfg.operator.s;
    let tol = &cfg.study.tolerances;
    let primary = if s == 1.0 { RateModel::EpsLog } else { RateModel::EpsPow(1.0 / s) };
    let smallest_model = rows.iter().map(|r| primary.eval(r.epsilon)).fold(f64::INFINITY, f64::min);
    let worst_self = rows.iter().map(|r| r.self_error).fold(0.0, f64::max);
    if worst_self > tol.self_error_fraction * smallest_model {
        return Err(Error::Insufficient(format!(
            "scheme self-error {worst_self:e} exceeds {} of the smallest model value {smallest_model:e}; refine the grid (raise grid.n)",
            tol.self_error_fraction
        )));
    }

    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon, r.error)).collect();
    let fit_eps_log = fit_rate(&points, RateModel::EpsLog)?;
    let fit_power = fit_rate(&points, RateModel::EpsPow(1.0 / s))?;
    let mut checks = vec![Check::at_most(
        "self_error_fraction",
        worst_self / smallest_model,
        tol.self_error_fraction,
    )];
    if s == 1.0 {
        checks.push(Check::at_most("upper_bound_max_ratio", fit_eps_log.max_ratio, tol.upper_bound_factor));
    } else {
        let slope = fit_power.slope.unwrap_or(f64::NAN);
        checks.push(Check::at_most("slope_deviation", (slope - 1.0 / s).abs(), tol.slope));
    }
    if s == 1.0 && spec.transport_velocity().is_some() && cfg.study.initial.is_kinked() {
        // only here does an exact mechanism license a lower-bound check
        let over_eps: Vec<f64> = rows.iter().map(|r| r.error / r.epsilon).collect();
        let min_step = over_eps.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::INFINITY, f64::min);
        checks.push(Check::new("nonlinearity_monotone", min_step, Relation::Above, 0.0));
        let gain = over_eps[over_eps.len() - 1] / over_eps[0] - 1.0;
        checks.push(Check::at_least("nonlinearity_gain", gain, tol.nonlinearity_gain));
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(RateReport { config: cfg, method: method.into(), rows, fit_eps_log, fit_power, checks, pass })
}

/// `epsilon,error,self_error,model_eps_log,ratio`.
pub fn write_rate_csv(report: &RateReport, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "epsilon,error,self_error,model_eps_log,ratio")?;
    for r in &report.rows {
        writeln!(out, "{:e},{:e},{:e},{:e},{:e}", r.epsilon, r.error, r.self_error, r.model_eps_log, r.ratio)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::CatalogKind;

    fn small() -> StudyConfig {
        let mut cfg = StudyConfig::default_for(StudyKind::RateStudy);
        cfg.grid.n = 1024;
        cfg.study.epsilons = vec![0.125, 0.0625, 0.03125];
        cfg
    }

    #[test]
    fn transport_errors_match_the_semigroup_gap() {
        let report = run_rate_study(&small()).unwrap();
        assert!(report.pass, "{:#?}", report.checks);
        assert!(report.rows.windows(2).all(|w| w[1].error < w[0].error));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        write_rate_csv(&report, &path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.starts_with("epsilon,error,self_error,model_eps_log,ratio\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn oracle_requirements() {
        let mut cfg = small();
        cfg.hamiltonian.kind = CatalogKind::Affine;
        assert!(matches!(run_rate_study(&cfg), Err(Error::Config(_))));
        let mut cfg = small();
        cfg.grid.n = 16;
        assert!(matches!(run_rate_study(&cfg), Err(Error::Insufficient(_))));
    }
}
