//! Fitting `(ε, error)` pairs against `ε|log ε|` or `ε^q`.

use serde::{Deserialize, Serialize};

use super::oscillation::least_squares;
use crate::error::{Error, Result};

/// Error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    EpsLog,
    EpsPow(f64),
}

impl RateModel {
    pub fn eval(self, eps: f64) -> f64 {
        match self {
            Self::EpsLog => eps * eps.ln().abs(),
            Self::EpsPow(q) => eps.powf(q),
        }
    }
}

/// How the model's shape compares with the data across the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// Ratios fall by more than half from the largest to the smallest `ε`.
    OverCovers,
    /// Ratios within a factor two across the ladder.
    Matches,
    /// Ratios grow by more than a factor two.
    UnderCovers,
}

/// Output of [`fit_rate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    /// `max error / model(ε)`.
    #[serde(rename = "C_fit")]
    pub c_fit: f64,
    /// `C_fit` divided by the ratio at the largest `ε`.
    pub max_ratio: f64,
    /// Least-squares slope of `log error` against `log ε`; absent if some error is zero.
    pub slope: Option<f64>,
    /// `error / model(ε)` in input order.
    pub ratios: Vec<f64>,
    pub coverage: Coverage,
}

/// Fits `points = [(ε, error)]`.
pub fn fit_rate(points: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if points.is_empty() {
        return Err(Error::Insufficient("fit_rate needs at least one (epsilon, error) pair".into()));
    }
    for &(eps, err) in points {
        if !(eps > 0.0) || !(err >= 0.0) || !err.is_finite() {
            return Err(Error::Config(format!("invalid rate point (epsilon = {eps}, error = {err})")));
        }
        if model == RateModel::EpsLog && eps >= (-1.0f64).exp() {
            return Err(Error::Config(format!(
                "the eps|log eps| model requires epsilon in (0, 1/e), got {eps}"
            )));
        }
    }
    let ratios: Vec<f64> = points.iter().map(|&(e, err)| err / model.eval(e)).collect();
    let c_fit = ratios.iter().cloned().fold(0.0, f64::max);
    let largest = (0..points.len()).max_by(|&a, &b| points[a].0.total_cmp(&points[b].0)).expect("nonempty");
    let smallest = (0..points.len()).min_by(|&a, &b| points[a].0.total_cmp(&points[b].0)).expect("nonempty");
    let max_ratio = if ratios[largest] > 0.0 { c_fit / ratios[largest] } else { f64::INFINITY };
    let slope = if points.len() >= 2 && points.iter().all(|p| p.1 > 0.0) {
        let logs: Vec<(f64, f64)> = points.iter().map(|&(e, err)| (e.ln(), err.ln())).collect();
        Some(least_squares(&logs).0)
    } else {
        None
    };
    let spread = if ratios[largest] > 0.0 { ratios[smallest] / ratios[largest] } else { 1.0 };
    let coverage = if spread < 0.5 {
        Coverage::OverCovers
    } else if spread > 2.0 {
        Coverage::UnderCovers
    } else {
        Coverage::Matches
    };
    Ok(RateFit { model, c_fit, max_ratio, slope, ratios, coverage })
}

/// The ladder `2^{-a}, …, 2^{-b}`.
pub fn dyadic_ladder(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}
