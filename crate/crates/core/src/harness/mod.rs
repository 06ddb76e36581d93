//! Experiment orchestration: rate studies, regularity studies, the property
//! suite and the operator self-check, with CSV/JSON reports.

mod config;
mod export;
mod operator_check;
mod rate;
mod regularity;
mod suite;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use config::{
    default_ladder, GridSection, HamiltonianSection, InitialData, OperatorSection, SolverSection, StudyConfig, StudyKind,
    StudySection, Tolerances,
};
pub use export::{export_trajectory, write_json, Manifest};
pub use operator_check::run_operator_check;
pub use rate::{run_rate_study, write_rate_csv, RateReport, RateRow};
pub use regularity::{run_regularity_study, RegularityReport, RegularityRow, HOLDER_SCAN};
pub use suite::run_property_suite;

/// How `measured` is compared with `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

/// One named assertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::Below => measured < threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Above => measured > threshold,
        };
        Self { name: name.into(), measured, relation, threshold, pass }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Relation::AtMost, threshold)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Relation::AtLeast, threshold)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::Below => "<",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        };
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {:e} {rel} {:e}", self.name, self.measured, self.threshold)
    }
}

/// Named checks with the resolved configuration; `pass` is their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub config: StudyConfig,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteVerdict {
    pub fn new(config: StudyConfig, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { config, checks, pass }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
