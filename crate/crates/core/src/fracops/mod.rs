//! Discretizations of the fractional Laplacian `(-Δ)^{s/2}`, `1 ≤ s ≤ 2`.
//!
//! Two interchangeable backends are provided: the exact Fourier multiplier
//! `|ξ|^s` on the periodic lattice, and a principal-value lattice quadrature
//! of the singular integral split into a near part (offsets within `κ`) and a
//! far part. The quadrature matrix is symmetric with nonpositive off-diagonal
//! entries and zero row sums, which makes explicit schemes built on it
//! monotone under a CFL condition.

mod quadrature;
mod spectral;
pub mod special;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use quadrature::QuadratureStencil;
pub use spectral::SpectralPlan;

use crate::error::{Error, Result};
use crate::grid::{ensure_same_grid, sup_dist, GridField, PeriodicGrid};

/// Exponent `s` of `(-Δ)^{s/2}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const CRITICAL: FractionalOrder = FractionalOrder(1.0);

    pub fn new(s: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&s) {
            return Err(Error::Config(format!("fractional order s must lie in [1, 2], got {s}")));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(s: FractionalOrder) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Spectral,
    Quadrature,
}

/// Backend selection; `kappa` is the near/far cut in length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorBackend {
    pub kind: BackendKind,
    pub kappa: Option<f64>,
}

impl OperatorBackend {
    pub const DEFAULT_KAPPA_SPACINGS: f64 = 8.0;

    pub fn spectral() -> Self {
        Self { kind: BackendKind::Spectral, kappa: None }
    }

    pub fn quadrature() -> Self {
        Self { kind: BackendKind::Quadrature, kappa: None }
    }

    pub fn quadrature_with_kappa(kappa: f64) -> Self {
        Self { kind: BackendKind::Quadrature, kappa: Some(kappa) }
    }

    /// Explicit `κ`, else eight spacings capped at 0.5 (never below two spacings).
    pub fn resolved_kappa(&self, grid: &PeriodicGrid) -> f64 {
        let h = grid.spacing();
        self.kappa.unwrap_or_else(|| (Self::DEFAULT_KAPPA_SPACINGS * h).min(0.5).max(2.0 * h))
    }

    /// Normalization `C(n, s)` of the singular integral.
    pub fn normalization(&self, dim: usize, s: FractionalOrder) -> f64 {
        special::normalization(dim, s.value())
    }

    /// Number of lattice offsets in the near region, validating `κ`.
    pub fn near_offsets(&self, grid: &PeriodicGrid) -> Result<usize> {
        let kappa = self.resolved_kappa(grid);
        let h = grid.spacing();
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Config(format!("operator.kappa must lie in (0, 1), got {kappa}")));
        }
        if kappa < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::Config(format!(
                "operator.kappa = {kappa} is below two grid spacings (2h = {})",
                2.0 * h
            )));
        }
        if kappa >= grid.length() / 2.0 {
            return Err(Error::Config(format!("operator.kappa = {kappa} exceeds half the period")));
        }
        Ok((kappa / h + 1e-9).floor() as usize)
    }
}

impl Default for OperatorBackend {
    fn default() -> Self {
        Self::quadrature()
    }
}

/// An assembled operator for one grid and order, reusable across applications.
#[derive(Debug, Clone)]
pub enum FractionalOperator {
    Spectral { plan: SpectralPlan, order: FractionalOrder },
    Quadrature { stencil: QuadratureStencil, order: FractionalOrder },
}

impl FractionalOperator {
    pub fn new(grid: &PeriodicGrid, order: FractionalOrder, backend: &OperatorBackend) -> Result<Self> {
        Ok(match backend.kind {
            BackendKind::Spectral => Self::Spectral { plan: SpectralPlan::new(grid), order },
            BackendKind::Quadrature => {
                let near = backend.near_offsets(grid)?;
                Self::Quadrature { stencil: QuadratureStencil::new(grid, order.value(), near), order }
            }
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        match self {
            Self::Spectral { plan, .. } => plan.grid(),
            Self::Quadrature { stencil, .. } => stencil.grid(),
        }
    }

    pub fn order(&self) -> FractionalOrder {
        match self {
            Self::Spectral { order, .. } | Self::Quadrature { order, .. } => *order,
        }
    }

    pub fn apply(&self, u: &GridField) -> Result<GridField> {
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch("operator assembled for a different grid".into()));
        }
        Ok(match self {
            Self::Spectral { plan, order } => {
                let s = order.value();
                plan.apply_radial(u, |k| k.powf(s))
            }
            Self::Quadrature { stencil, .. } => stencil.apply(u),
        })
    }

    /// Diagonal entry of the operator matrix (mean of the symbol for the spectral backend).
    pub fn diagonal(&self) -> f64 {
        match self {
            Self::Quadrature { stencil, .. } => stencil.diagonal(),
            Self::Spectral { plan, order } => {
                let g = plan.grid();
                let n = g.points_per_axis();
                let s = order.value();
                let total: f64 = match g.dim() {
                    1 => (0..n).map(|m| plan.wavenumber(m).abs().powf(s)).sum(),
                    _ => (0..n * n)
                        .map(|i| plan.wavenumber(i / n).hypot(plan.wavenumber(i % n)).powf(s))
                        .sum(),
                };
                total / g.len() as f64
            }
        }
    }

    pub fn is_monotone(&self) -> bool {
        matches!(self, Self::Quadrature { .. })
    }
}

/// `(-Δ)^{s/2} u` as the Fourier multiplier `|ξ|^s`.
pub fn apply_spectral(u: &GridField, s: FractionalOrder) -> GridField {
    SpectralPlan::new(u.grid()).apply_radial(u, |k| k.powf(s.value()))
}

/// `(-Δ)^{s/2} u` by principal-value lattice quadrature.
pub fn apply_quadrature(u: &GridField, s: FractionalOrder, backend: &OperatorBackend) -> Result<GridField> {
    let near = backend.near_offsets(u.grid())?;
    Ok(QuadratureStencil::new(u.grid(), s.value(), near).apply(u))
}

/// Mixed evaluation `ε I_κ(φ) + ε I^κ(u)`: the near part acts on the test
/// function, the far part on the (merely bounded) solution.
pub fn split_parts(
    test_fn: &GridField,
    u: &GridField,
    s: FractionalOrder,
    backend: &OperatorBackend,
    eps: f64,
) -> Result<(GridField, GridField)> {
    ensure_same_grid(test_fn, u)?;
    if u.grid().dim() != 1 {
        return Err(Error::Unsupported("near/far split is implemented on one-dimensional grids".into()));
    }
    let near_offsets = backend.near_offsets(u.grid())?;
    let stencil = QuadratureStencil::new(u.grid(), s.value(), near_offsets);
    let near = stencil.apply_near(test_fn).scale(eps);
    let far = stencil.apply_far(u).scale(eps);
    Ok((near, far))
}

/// Spectral derivative `∂_x u` (multiplier `i k`, Nyquist mode dropped).
pub fn spectral_derivative(u: &GridField) -> Result<GridField> {
    require_line(u)?;
    let plan = SpectralPlan::new(u.grid());
    Ok(plan.apply(u, |k, m| if plan.is_nyquist(m[0]) { Complex::new(0.0, 0.0) } else { Complex::new(0.0, k[0]) }))
}

/// Periodic Hilbert transform, the one-dimensional Riesz transform (multiplier `-i sgn k`).
pub fn hilbert_transform(u: &GridField) -> Result<GridField> {
    require_line(u)?;
    let plan = SpectralPlan::new(u.grid());
    Ok(plan.apply(u, |k, m| {
        if plan.is_nyquist(m[0]) || k[0] == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            Complex::new(0.0, -k[0].signum())
        }
    }))
}

/// `sup |(-Δ)^{1/2} u - H(∂_x u)|`, zero up to rounding for fields without a Nyquist component.
pub fn riesz_identity_residual(u: &GridField) -> Result<f64> {
    require_line(u)?;
    let lhs = apply_spectral(u, FractionalOrder::CRITICAL);
    let rhs = hilbert_transform(&spectral_derivative(u)?)?;
    sup_dist(&lhs, &rhs)
}

fn require_line(u: &GridField) -> Result<()> {
    if u.grid().dim() != 1 {
        return Err(Error::Unsupported(format!("requires a one-dimensional grid, got dim = {}", u.grid().dim())));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
