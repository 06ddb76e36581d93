//! Study configuration: one TOML file with the sections `grid`, `operator`,
//! `hamiltonian`, `solver` and `study`. Keys missing from the file take the
//! defaults of the selected study kind; unknown keys are rejected by name.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fracops::{BackendKind, FractionalOrder, OperatorBackend};
use crate::grid::{sample, GridField, PeriodicGrid, Point};
use crate::hamiltonians::{make_catalog_hamiltonian, CatalogKind, CatalogParams, Coefficient, HamiltonianSpec};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Solve,
    OperatorCheck,
    RateStudy,
    RegularityStudy,
    PropertySuite,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::OperatorCheck => "operator-check",
            Self::RateStudy => "rate-study",
            Self::RegularityStudy => "regularity-study",
            Self::PropertySuite => "property-suite",
        }
    }
}

/// Named initial data; every profile has period `L` along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    /// Periodic distance to the origin, summed over axes: slope 1, kinks at `0` and `L/2`.
    Triangle,
    /// `Σ sin(2π x_i / L)`.
    Sine,
    /// `exp(sin(2π x₀ / L))`.
    Smooth,
}

impl InitialData {
    pub fn sample(self, grid: &PeriodicGrid) -> Result<GridField> {
        let l = grid.length();
        let dim = grid.dim();
        let w = 2.0 * PI / l;
        match self {
            Self::Triangle => sample(grid, |x| (0..dim).map(|a| x[a].min(l - x[a])).sum()),
            Self::Sine => sample(grid, |x| (0..dim).map(|a| (w * x[a]).sin()).sum()),
            Self::Smooth => sample(grid, |x| (w * x[0]).sin().exp()),
        }
    }

    pub fn is_kinked(self) -> bool {
        self == Self::Triangle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub s: f64,
    pub backend: BackendKind,
    /// Near/far cut of the quadrature backend in length units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub kind: CatalogKind,
    pub a: Point,
    pub lambda: f64,
    pub b: Coefficient,
    pub f: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub epsilon: f64,
    pub final_time: f64,
    pub cfl: f64,
    pub snapshot_every: f64,
}

/// Pass/fail thresholds of the studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub comparison: f64,
    pub lipschitz_factor: f64,
    pub lipschitz_spread: f64,
    pub barrier_slack: f64,
    pub shift_min_slope: f64,
    pub shift_spread: f64,
    pub quotient_excess: f64,
    pub supconv_excess: f64,
    pub decay_factor: f64,
    pub refinement: f64,
    pub upper_bound_factor: f64,
    pub self_error_fraction: f64,
    pub nonlinearity_gain: f64,
    pub slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            comparison: 1e-12,
            lipschitz_factor: 1.05,
            lipschitz_spread: 0.10,
            barrier_slack: 1e-10,
            shift_min_slope: 0.9,
            shift_spread: 0.20,
            quotient_excess: 0.1,
            supconv_excess: 0.1,
            decay_factor: 0.97,
            refinement: 0.15,
            upper_bound_factor: 1.2,
            self_error_fraction: 0.1,
            nonlinearity_gain: 0.15,
            slope: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub kind: StudyKind,
    pub initial: InitialData,
    pub seed: u64,
    pub output_dir: String,
    /// Viscosity ladder, strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Regularity sample times.
    pub times: Vec<f64>,
    pub alpha: f64,
    /// Time at which refinement stability is checked.
    pub reference_time: f64,
    /// Cylinder centers along axis 0; empty means `L/4, L/2, 3L/4`.
    pub cylinder_centers: Vec<f64>,
    pub cylinder_radius: f64,
    pub cylinder_ratio: f64,
    pub cylinder_kmax: usize,
    /// Random ordered pairs per Hamiltonian in the comparison check.
    pub pairs: usize,
    /// Grid size of the comparison, Lipschitz, shift and barrier checks.
    pub pair_grid_n: usize,
    pub shifts: Vec<f64>,
    /// Horizon of the shift study.
    pub shift_final_time: f64,
    pub shift_epsilons: Vec<f64>,
    pub barrier_epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub grid: GridSection,
    pub operator: OperatorSection,
    pub hamiltonian: HamiltonianSection,
    pub solver: SolverSection,
    pub study: StudySection,
}

/// `{2^-3, …, 2^-10}`.
pub fn default_ladder() -> Vec<f64> {
    (3..=10).map(|k| 2f64.powi(-k)).collect()
}

impl StudyConfig {
    /// Defaults of each study kind.
    pub fn default_for(kind: StudyKind) -> Self {
        let mut cfg = Self {
            grid: GridSection { dim: 1, n: 1024, length: 2.0 * PI },
            operator: OperatorSection { s: 1.0, backend: BackendKind::Quadrature, kappa: None },
            hamiltonian: HamiltonianSection {
                kind: CatalogKind::Eikonal,
                a: [1.0, 0.0],
                lambda: 0.0,
                b: Coefficient::Zero,
                f: Coefficient::Zero,
            },
            solver: SolverSection { epsilon: 0.5, final_time: 0.4, cfl: SolverConfig::DEFAULT_CFL, snapshot_every: 0.01 },
            study: StudySection {
                kind,
                initial: InitialData::Triangle,
                seed: 0,
                output_dir: "frac-hjb-out".into(),
                epsilons: default_ladder(),
                times: vec![0.1, 0.2, 0.4],
                alpha: 0.5,
                reference_time: 0.2,
                cylinder_centers: Vec::new(),
                cylinder_radius: 0.2,
                cylinder_ratio: 0.5,
                cylinder_kmax: 4,
                pairs: 50,
                pair_grid_n: 256,
                shifts: vec![0.01, 0.02, 0.04, 0.08],
                shift_final_time: 0.25,
                shift_epsilons: vec![0.1, 0.5, 1.0],
                barrier_epsilons: vec![0.1, 1.0],
                deltas: vec![1e-2, 1e-3, 1e-4, 1e-5],
                tolerances: Tolerances::default(),
            },
        };
        match kind {
            StudyKind::RateStudy => {
                cfg.grid.n = 4096;
                cfg.grid.length = 8.0;
                cfg.hamiltonian.kind = CatalogKind::Transport;
                cfg.solver.final_time = 0.5;
                cfg.solver.snapshot_every = 0.5;
            }
            StudyKind::OperatorCheck => cfg.grid.n = 512,
            _ => {}
        }
        cfg
    }

    /// Parses TOML text over the defaults of `kind`.
    pub fn from_toml_str(text: &str, kind: StudyKind) -> Result<Self> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut merged = match toml::Value::try_from(Self::default_for(kind)).map_err(|e| Error::Config(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("a struct serializes to a table"),
        };
        merge(&mut merged, user);
        if let Some(toml::Value::Table(study)) = merged.get_mut("study") {
            let declared = study.get("kind").and_then(|v| v.as_str()).map(str::to_owned);
            if let Some(declared) = declared {
                if declared != kind.name() {
                    return Err(Error::Config(format!(
                        "study.kind = \"{declared}\" does not match the subcommand `{}`",
                        kind.name()
                    )));
                }
            }
        }
        let cfg: Self = toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, kind: StudyKind) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::from_toml_str(&text, kind)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let json = serde_json::to_vec(self)?;
        let digest = Sha256::digest(&json);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.order()?;
        self.hamiltonian()?;
        let study = &self.study;
        if study.epsilons.is_empty() {
            return Err(Error::Config("study.epsilons must not be empty".into()));
        }
        for &e in &study.epsilons {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("study.epsilons entries must be positive, got {e}")));
            }
        }
        if study.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("study.epsilons must be sorted in strictly decreasing order".into()));
        }
        match study.kind {
            StudyKind::RateStudy => {
                let bound = (-1.0f64).exp();
                if let Some(&bad) = study.epsilons.iter().find(|&&e| e >= bound) {
                    return Err(Error::Config(format!(
                        "rate studies require every epsilon in (0, 1/e), i.e. ε ∈ (0, e⁻¹); got {bad}"
                    )));
                }
                if self.grid.dim != 1 {
                    return Err(Error::Config("rate studies run in one dimension".into()));
                }
            }
            StudyKind::RegularityStudy => {
                if !(self.solver.epsilon > 0.0) {
                    return Err(Error::Config(format!(
                        "regularity studies need epsilon > 0, got {}",
                        self.solver.epsilon
                    )));
                }
                if study.times.iter().any(|&t| !(t > 0.0 && t <= self.solver.final_time)) {
                    return Err(Error::Config("study.times must lie in (0, final_time]".into()));
                }
            }
            _ => {}
        }
        self.solver_config(self.solver.epsilon)?.validate()
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.dim, self.grid.n, self.grid.length)
    }

    pub fn grid_with(&self, n: usize) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.dim, n, self.grid.length)
    }

    pub fn order(&self) -> Result<FractionalOrder> {
        FractionalOrder::new(self.operator.s)
    }

    pub fn backend(&self) -> OperatorBackend {
        OperatorBackend { kind: self.operator.backend, kappa: self.operator.kappa }
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec> {
        let h = &self.hamiltonian;
        make_catalog_hamiltonian(h.kind, &CatalogParams { a: h.a, lambda: h.lambda, b: h.b, f: h.f })
    }

    pub fn initial(&self, grid: &PeriodicGrid) -> Result<GridField> {
        self.study.initial.sample(grid)
    }

    pub fn solver_config(&self, epsilon: f64) -> Result<SolverConfig> {
        Ok(SolverConfig::new(epsilon, self.order()?, self.backend(), self.solver.final_time)
            .with_cfl(self.solver.cfl)
            .with_uniform_snapshots(self.solver.snapshot_every))
    }

    /// Cylinder centers along axis 0 (other coordinates at `L/2`).
    pub fn cylinder_centers(&self) -> Vec<Point> {
        let l = self.grid.length;
        let xs = if self.study.cylinder_centers.is_empty() {
            vec![0.25 * l, 0.5 * l, 0.75 * l]
        } else {
            self.study.cylinder_centers.clone()
        };
        let y = if self.grid.dim == 2 { 0.5 * l } else { 0.0 };
        xs.into_iter().map(|x| [x, y]).collect()
    }
}

fn merge(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for kind in [StudyKind::Solve, StudyKind::RateStudy, StudyKind::PropertySuite] {
            let cfg = StudyConfig::default_for(kind);
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(StudyConfig::from_toml_str(&text, kind).unwrap(), cfg);
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn partial_files_take_defaults() {
        let cfg = StudyConfig::from_toml_str("[grid]\nn = 256\n[study.tolerances]\nslope = 0.2\n", StudyKind::RateStudy).unwrap();
        assert_eq!(cfg.grid.n, 256);
        assert_eq!(cfg.grid.length, 8.0);
        assert_eq!(cfg.study.tolerances.slope, 0.2);
        assert_eq!(cfg.study.tolerances.refinement, 0.15);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = StudyConfig::from_toml_str("[solver]\nepsilom = 0.1\n", StudyKind::Solve).unwrap_err();
        assert!(err.to_string().contains("epsilom"), "{err}");
        let err = StudyConfig::from_toml_str("[mesh]\nn = 4\n", StudyKind::Solve).unwrap_err();
        assert!(err.to_string().contains("mesh"), "{err}");
    }

    #[test]
    fn ladder_rules() {
        let mut cfg = StudyConfig::default_for(StudyKind::RateStudy);
        cfg.study.epsilons = vec![0.5, 0.1];
        assert!(cfg.validate().unwrap_err().to_string().contains("(0, e⁻¹)"));
        cfg.study.epsilons = vec![0.1, 0.2];
        assert!(cfg.validate().is_err());
        let mut reg = StudyConfig::default_for(StudyKind::RegularityStudy);
        reg.solver.epsilon = 0.0;
        assert!(reg.validate().is_err());
    }

    #[test]
    fn kind_mismatch_and_hash() {
        assert!(StudyConfig::from_toml_str("[study]\nkind = \"solve\"\n", StudyKind::RateStudy).is_err());
        let a = StudyConfig::default_for(StudyKind::Solve);
        let mut b = a.clone();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.study.seed = 1;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }
}
