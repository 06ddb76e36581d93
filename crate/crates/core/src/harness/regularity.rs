//! Regularity study: `C^{1,α}` norms along time, gradient Hölder scans,
//! oscillation decay at interior cylinders, and refinement stability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{StudyConfig, StudyKind};
use super::{Check, Relation};
use crate::analysis::{c1alpha_norm, holder_seminorm, least_squares, oscillation_sequence, CylinderSpec, OscillationReport};
use crate::error::Result;
use crate::grid::{discrete_gradient, Trajectory};
use crate::solver::solve;

/// Exponents of the gradient Hölder scan.
pub const HOLDER_SCAN: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityRow {
    pub t: f64,
    pub c1alpha: f64,
    /// Same norm on the refined grid.
    pub c1alpha_refined: f64,
    /// `[∂₀u(t)]_β` for `β` in [`HOLDER_SCAN`].
    pub gradient_holder: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub config: StudyConfig,
    pub rows: Vec<RegularityRow>,
    /// Least-squares slope of `log c1alpha` against `log t`.
    pub norm_slope: f64,
    /// `[∂₀u₀]_α` on the grid and on the refined grid: grows with refinement for kinked data.
    pub initial_gradient_seminorm: [f64; 2],
    /// `[∂₀u(t_ref)]_α` on both grids.
    pub reference_gradient_seminorm: [f64; 2],
    pub oscillation: Vec<(CylinderSpec, OscillationReport)>,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl RegularityReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn gradient_seminorm(traj: &Trajectory, t: f64, alpha: f64) -> Result<f64> {
    let grad = traj.map_fields(|f| discrete_gradient(f).swap_remove(0));
    Ok(holder_seminorm(&grad, alpha, [t, t], None)?.seminorm)
}

/// Oscillation reports at the configured cylinders ending at `T`.
pub(crate) fn oscillations(cfg: &StudyConfig, traj: &Trajectory) -> Result<Vec<(CylinderSpec, OscillationReport)>> {
    cfg.cylinder_centers()
        .into_iter()
        .map(|x0| {
            let cyl = CylinderSpec { t0: cfg.solver.final_time, x0, r: cfg.study.cylinder_radius };
            Ok((cyl, oscillation_sequence(traj, &cyl, cfg.study.cylinder_ratio, cfg.study.cylinder_kmax)?))
        })
        .collect()
}

/// Decay and exponent checks over a set of oscillation reports.
pub(crate) fn oscillation_checks(cfg: &StudyConfig, osc: &[(CylinderSpec, OscillationReport)]) -> Vec<Check> {
    let worst = osc.iter().flat_map(|(_, r)| r.decay_factors.iter().copied()).fold(0.0, f64::max);
    let alphas: Vec<f64> = osc.iter().map(|(_, r)| r.fitted_alpha.unwrap_or(f64::NAN)).collect();
    let alpha = if alphas.iter().any(|a| a.is_nan()) { f64::NAN } else { alphas.iter().copied().fold(f64::INFINITY, f64::min) };
    vec![
        Check::at_most("oscillation_decay_factor", worst, cfg.study.tolerances.decay_factor),
        Check::new("oscillation_fitted_alpha", alpha, Relation::Above, 0.0),
    ]
}

pub fn run_regularity_study(cfg: &StudyConfig) -> Result<RegularityReport> {
    let mut cfg = cfg.clone();
    cfg.study.kind = StudyKind::RegularityStudy;
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
    let alpha = cfg.study.alpha;

    let rows: Vec<RegularityRow> = cfg
        .study
        .times
        .par_iter()
        .map(|&t| {
            let gradient_holder = HOLDER_SCAN.iter().map(|&b| gradient_seminorm(&coarse, t, b)).collect::<Result<_>>()?;
            Ok(RegularityRow {
                t,
                c1alpha: c1alpha_norm(&coarse, t, alpha)?,
                c1alpha_refined: c1alpha_norm(&fine, t, alpha)?,
                gradient_holder,
            })
        })
        .collect::<Result<_>>()?;
    let logs: Vec<(f64, f64)> = rows.iter().map(|r| (r.t.ln(), r.c1alpha.ln())).collect();
    let norm_slope = if logs.len() >= 2 { least_squares(&logs).0 } else { f64::NAN };
    let t_ref = cfg.study.reference_time;
    let initial_gradient_seminorm = [gradient_seminorm(&coarse, 0.0, alpha)?, gradient_seminorm(&fine, 0.0, alpha)?];
    let reference_gradient_seminorm = [gradient_seminorm(&coarse, t_ref, alpha)?, gradient_seminorm(&fine, t_ref, alpha)?];
    let osc = oscillations(&cfg, &coarse)?;

    let tol = &cfg.study.tolerances;
    let nonfinite = rows.iter().filter(|r| !r.c1alpha.is_finite()).count();
    let mut checks = vec![Check::at_most("c1alpha_nonfinite_count", nonfinite as f64, 0.0)];
    if cfg.study.initial.is_kinked() {
        let (first, last) = (&rows[0], &rows[rows.len() - 1]);
        checks.push(Check::new("c1alpha_blowup_direction", first.c1alpha - last.c1alpha, Relation::Above, 0.0));
    }
    let ref_coarse = c1alpha_norm(&coarse, t_ref, alpha)?;
    let ref_fine = c1alpha_norm(&fine, t_ref, alpha)?;
    checks.push(Check::at_most("c1alpha_refinement_change", (ref_fine - ref_coarse).abs() / ref_fine, tol.refinement));
    checks.extend(oscillation_checks(&cfg, &osc));
    let pass = checks.iter().all(|c| c.pass);
    let mut warnings = coarse.warnings().to_vec();
    warnings.extend(fine.warnings().iter().cloned());
    Ok(RegularityReport {
        config: cfg,
        rows,
        norm_slope,
        initial_gradient_seminorm,
        reference_gradient_seminorm,
        oscillation: osc,
        warnings,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::harness::InitialData;

    #[test]
    fn smooth_data_with_zero_hamiltonian() {
        let mut cfg = StudyConfig::default_for(StudyKind::RegularityStudy);
        cfg.grid.n = 256;
        cfg.hamiltonian.kind = crate::hamiltonians::CatalogKind::Transport;
        cfg.hamiltonian.a = [0.0, 0.0];
        cfg.study.initial = InitialData::Smooth;
        cfg.study.cylinder_kmax = 2;
        let report = run_regularity_study(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.c1alpha.is_finite()));
        assert!(report.check("c1alpha_blowup_direction").is_none());
        // smooth data: norms nearly flat in t
        let (a, b) = (report.rows[0].c1alpha, report.rows[2].c1alpha);
        assert!((a - b).abs() / a < 0.5, "{a} {b}");
        assert!(report.pass, "{:#?}", report.checks);
    }

    #[test]
    fn zero_viscosity_is_rejected() {
        let mut cfg = StudyConfig::default_for(StudyKind::RegularityStudy);
        cfg.solver.epsilon = 0.0;
        assert!(matches!(run_regularity_study(&cfg), Err(Error::Config(_))));
    }
}
