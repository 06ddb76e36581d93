//! Hamiltonians `H(t, x, u, p) = λu + H₀(t, x, p)` with their structural
//! constants, the spatial shift `H_ℓ(t, x, u, p) = H(t, x + ℓ, u, p)`, the
//! monotone Lax–Friedrichs flux, and a random sampler that checks the
//! linearity-in-`u`, `(t, x)`-Lipschitz and local `p`-Lipschitz assumptions.
//!
//! Affine drifts act along the first axis: `b(t, x)·p = b(t, x) p₀`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lipschitz_constant, GridField, Point};

/// Named scalar coefficients for affine Hamiltonians, functions of `(t, x₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    Zero,
    One,
    SinX,
    CosX,
    SinXPlusT,
    CosXPlusT,
}

impl Coefficient {
    pub fn eval(self, t: f64, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::One => 1.0,
            Self::SinX => x.sin(),
            Self::CosX => x.cos(),
            Self::SinXPlusT => (x + t).sin(),
            Self::CosXPlusT => (x + t).cos(),
        }
    }

    /// `sup |c|`.
    pub fn bound(self) -> f64 {
        match self {
            Self::Zero => 0.0,
            _ => 1.0,
        }
    }

    /// Smallest `L` with `|c(t,x) - c(s,y)| ≤ L (|x - y| + |t - s|)`.
    pub fn lipschitz(self) -> f64 {
        match self {
            Self::Zero | Self::One => 0.0,
            _ => 1.0,
        }
    }
}

/// Catalog selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogKind {
    Transport,
    Eikonal,
    Quadratic,
    Affine,
}

/// Parameters of [`make_catalog_hamiltonian`]; unused entries are ignored by the kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {
    /// Velocity of the transport Hamiltonian `a·p`.
    #[serde(default = "default_velocity")]
    pub a: Point,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_coefficient")]
    pub b: Coefficient,
    #[serde(default = "default_coefficient")]
    pub f: Coefficient,
}

fn default_velocity() -> Point {
    [1.0, 0.0]
}

fn default_coefficient() -> Coefficient {
    Coefficient::Zero
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self { a: default_velocity(), lambda: 0.0, b: Coefficient::Zero, f: Coefficient::Zero }
    }
}

type EvalFn = dyn Fn(f64, &Point, f64, &Point) -> f64 + Send + Sync;
type RadiusFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Transport { a: Point },
    Eikonal,
    Quadratic,
    Affine { b: Coefficient, f: Coefficient },
    Custom { name: String, eval: Arc<EvalFn>, lipschitz_tx: f64, lipschitz_p: Arc<RadiusFn>, convex: bool, p_only: bool },
}

/// A Hamiltonian together with its declared structural constants.
#[derive(Clone)]
pub struct HamiltonianSpec {
    kind: Kind,
    lambda: f64,
    offset: Point,
    data_bound: f64,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("name", &self.name())
            .field("lambda", &self.lambda)
            .field("offset", &self.offset)
            .field("data_bound", &self.data_bound)
            .finish()
    }
}

/// Declared constants of a user-supplied Hamiltonian.
#[derive(Clone)]
pub struct CustomConstants {
    pub lambda: f64,
    pub lipschitz_tx: f64,
    pub lipschitz_p: Arc<RadiusFn>,
    pub convex_in_p: bool,
    /// `H` depends on `p` only (no `t`, `x`, `u` dependence).
    pub p_only: bool,
}

/// Builds a catalog Hamiltonian.
pub fn make_catalog_hamiltonian(kind: CatalogKind, params: &CatalogParams) -> Result<HamiltonianSpec> {
    let CatalogParams { a, lambda, b, f } = *params;
    if !lambda.is_finite() || a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("hamiltonian parameters must be finite".into()));
    }
    if lambda < 0.0 {
        return Err(Error::Config(format!("hamiltonian.lambda must be nonnegative, got {lambda}")));
    }
    let kind = match kind {
        CatalogKind::Transport => Kind::Transport { a },
        CatalogKind::Eikonal => Kind::Eikonal,
        CatalogKind::Quadratic => Kind::Quadratic,
        CatalogKind::Affine => Kind::Affine { b, f },
    };
    Ok(HamiltonianSpec { kind, lambda, offset: [0.0; 2], data_bound: f64::INFINITY })
}

impl HamiltonianSpec {
    /// `H = a·p`.
    pub fn transport(a: f64) -> Self {
        Self::transport_vector([a, 0.0])
    }

    pub fn transport_vector(a: Point) -> Self {
        Self { kind: Kind::Transport { a }, lambda: 0.0, offset: [0.0; 2], data_bound: f64::INFINITY }
    }

    /// `H = |p|`.
    pub fn eikonal() -> Self {
        Self { kind: Kind::Eikonal, lambda: 0.0, offset: [0.0; 2], data_bound: f64::INFINITY }
    }

    /// `H = |p|²/2`.
    pub fn quadratic() -> Self {
        Self { kind: Kind::Quadratic, lambda: 0.0, offset: [0.0; 2], data_bound: f64::INFINITY }
    }

    /// `H = λu + b(t,x) p₀ + f(t,x)`.
    pub fn affine(lambda: f64, b: Coefficient, f: Coefficient) -> Result<Self> {
        make_catalog_hamiltonian(CatalogKind::Affine, &CatalogParams { lambda, b, f, ..Default::default() })
    }

    /// Wraps an arbitrary function with declared constants; nothing is checked
    /// until [`verify_assumptions`] runs.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64, &Point, f64, &Point) -> f64 + Send + Sync + 'static,
        constants: CustomConstants,
    ) -> Self {
        Self {
            kind: Kind::Custom {
                name: name.into(),
                eval: Arc::new(eval),
                lipschitz_tx: constants.lipschitz_tx,
                lipschitz_p: constants.lipschitz_p,
                convex: constants.convex_in_p,
                p_only: constants.p_only,
            },
            lambda: constants.lambda,
            offset: [0.0; 2],
            data_bound: f64::INFINITY,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Transport { .. } => "transport".into(),
            Kind::Eikonal => "eikonal".into(),
            Kind::Quadratic => "quadratic".into(),
            Kind::Affine { .. } => "affine".into(),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    /// `H(t, x, u, p)`.
    pub fn eval(&self, t: f64, x: &Point, u: f64, p: &Point) -> f64 {
        if let Kind::Custom { eval, .. } = &self.kind {
            let y = [x[0] + self.offset[0], x[1] + self.offset[1]];
            return eval(t, &y, u, p);
        }
        self.lambda * u + self.eval_free(t, x, p)
    }

    /// `H(t, x, 0, p)`.
    pub fn eval_free(&self, t: f64, x: &Point, p: &Point) -> f64 {
        let y = [x[0] + self.offset[0], x[1] + self.offset[1]];
        match &self.kind {
            Kind::Transport { a } => a[0] * p[0] + a[1] * p[1],
            Kind::Eikonal => p[0].hypot(p[1]),
            Kind::Quadratic => 0.5 * (p[0] * p[0] + p[1] * p[1]),
            Kind::Affine { b, f } => b.eval(t, y[0]) * p[0] + f.eval(t, y[0]),
            Kind::Custom { eval, .. } => eval(t, &y, 0.0, p),
        }
    }

    /// Coefficient `λ ≥ 0` of the linear `u` dependence.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Constant `C` with `|H(t,x,u,p) - H(s,y,u,p)| ≤ C (1 + |p|)(|x-y| + |t-s|)`.
    pub fn lipschitz_tx(&self) -> f64 {
        match &self.kind {
            Kind::Transport { .. } | Kind::Eikonal | Kind::Quadratic => 0.0,
            Kind::Affine { b, f } => b.lipschitz().max(f.lipschitz()),
            Kind::Custom { lipschitz_tx, .. } => *lipschitz_tx,
        }
    }

    /// `A_R`, the Lipschitz constant in `p` on the ball of radius `R`.
    pub fn lipschitz_p(&self, radius: f64) -> f64 {
        match &self.kind {
            Kind::Transport { a } => a[0].hypot(a[1]),
            Kind::Eikonal => 1.0,
            Kind::Quadratic => radius,
            Kind::Affine { b, .. } => b.bound(),
            Kind::Custom { lipschitz_p, .. } => lipschitz_p(radius),
        }
    }

    pub fn convex_in_p(&self) -> bool {
        match &self.kind {
            Kind::Custom { convex, .. } => *convex,
            _ => true,
        }
    }

    /// `H` depends on `p` alone (`λ = 0`, no `(t, x)` dependence).
    pub fn is_p_only(&self) -> bool {
        if self.lambda != 0.0 {
            return false;
        }
        match &self.kind {
            Kind::Transport { .. } | Kind::Eikonal | Kind::Quadratic => true,
            Kind::Affine { b, f } => {
                matches!(b, Coefficient::Zero | Coefficient::One) && matches!(f, Coefficient::Zero | Coefficient::One)
            }
            Kind::Custom { p_only, .. } => *p_only,
        }
    }

    /// Constant velocity when `H₀ = a·p` with `a` independent of `(t, x)`.
    pub fn transport_velocity(&self) -> Option<Point> {
        match &self.kind {
            Kind::Transport { a } if self.lambda == 0.0 => Some(*a),
            _ => None,
        }
    }

    /// Convex conjugate `L(q) = sup_p (p·q - H(p))` for the p-only convex
    /// catalog kinds with finite conjugate on a set of positive measure.
    pub fn conjugate(&self, q: &Point) -> Option<f64> {
        if !self.is_p_only() {
            return None;
        }
        match &self.kind {
            Kind::Eikonal => Some(if q[0].hypot(q[1]) <= 1.0 + 1e-12 { 0.0 } else { f64::INFINITY }),
            Kind::Quadratic => Some(0.5 * (q[0] * q[0] + q[1] * q[1])),
            _ => None,
        }
    }

    /// Bound `K` on `‖u₀‖_{W^{1,∞}}` carried with the Hamiltonian.
    pub fn data_bound(&self) -> f64 {
        self.data_bound
    }

    pub fn with_data_bound(mut self, k: f64) -> Self {
        self.data_bound = k;
        self
    }

    /// Whether `‖u₀‖_∞ + Lip(u₀) < K`.
    pub fn admits(&self, u0: &GridField) -> bool {
        u0.sup_norm() + lipschitz_constant(u0) < self.data_bound
    }

    /// Accumulated spatial shift `ℓ`.
    pub fn offset(&self) -> Point {
        self.offset
    }
}

/// `H_ℓ(t, x, u, p) = H(t, x + ℓ, u, p)`; constants are unchanged.
pub fn shift(spec: &HamiltonianSpec, ell: Point) -> HamiltonianSpec {
    let mut out = spec.clone();
    out.offset = [spec.offset[0] + ell[0], spec.offset[1] + ell[1]];
    out
}

/// Dissipation coefficient of the Lax–Friedrichs flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericalFlux {
    pub alpha: f64,
}

impl NumericalFlux {
    /// `α = A_R` at the working radius `R = Lip(u₀) + 1`.
    pub fn for_data(spec: &HamiltonianSpec, u0: &GridField) -> Self {
        Self { alpha: spec.lipschitz_p(working_radius(u0)) }
    }

    /// Whether `α ≥ A_R` for slopes up to `radius`.
    pub fn covers(&self, spec: &HamiltonianSpec, radius: f64) -> bool {
        self.alpha >= spec.lipschitz_p(radius)
    }
}

/// Gradient range `Lip(u₀) + 1` used for `A_R`.
pub fn working_radius(u0: &GridField) -> f64 {
    lipschitz_constant(u0) + 1.0
}

/// `Ĥ = H(t, x, u, (p⁻ + p⁺)/2) - (α/2) Σ (p⁺ - p⁻)`.
pub fn lax_friedrichs(
    spec: &HamiltonianSpec,
    flux: &NumericalFlux,
    t: f64,
    x: &Point,
    u: f64,
    p_minus: &Point,
    p_plus: &Point,
) -> f64 {
    let mid = [0.5 * (p_minus[0] + p_plus[0]), 0.5 * (p_minus[1] + p_plus[1])];
    let jump = (p_plus[0] - p_minus[0]) + (p_plus[1] - p_minus[1]);
    spec.eval(t, x, u, &mid) - 0.5 * flux.alpha * jump
}

/// Largest sampled violation of each structural assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub hamiltonian: String,
    pub samples: usize,
    pub seed: u64,
    /// `max |H(v) - H(u) - λ(v - u)|`.
    pub linearity_residual: f64,
    /// `max (|H(t,x,·) - H(s,y,·)| - C(1+|p|)(|x-y|+|t-s|))⁺`.
    pub tx_lipschitz_excess: f64,
    /// `max (|H(p) - H(q)| - A_R |p - q|)⁺` over `p, q ∈ B_R`.
    pub p_lipschitz_excess: f64,
    pub linearity_pass: bool,
    pub tx_lipschitz_pass: bool,
    pub p_lipschitz_pass: bool,
    pub pass: bool,
}

/// Absolute threshold on the linearity residual.
pub const LINEARITY_TOLERANCE: f64 = 1e-9;
/// Rounding allowance on the Lipschitz bounds.
const LIPSCHITZ_ROUNDING: f64 = 1e-12;

/// Samples `(t, x, u, p)` at random and records the worst violation of each assumption.
pub fn verify_assumptions(spec: &HamiltonianSpec, sample_budget: usize, rng_seed: u64) -> Result<AssumptionReport> {
    if sample_budget < 1000 {
        return Err(Error::Config(format!("sample budget must be at least 1000, got {sample_budget}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let point = |rng: &mut ChaCha8Rng, r: f64| -> Point { [rng.gen_range(-r..r), rng.gen_range(-r..r)] };
    let ball = |rng: &mut ChaCha8Rng, radius: f64| -> Point {
        loop {
            let p = [rng.gen_range(-radius..=radius), rng.gen_range(-radius..=radius)];
            if p[0].hypot(p[1]) <= radius {
                return p;
            }
        }
    };
    let (mut lin, mut tx, mut pp) = (0.0f64, 0.0f64, 0.0f64);
    let c = spec.lipschitz_tx();
    for _ in 0..sample_budget {
        let t = rng.gen_range(0.0..4.0);
        let x = point(&mut rng, 10.0);
        let u = rng.gen_range(-10.0..10.0);
        let v = rng.gen_range(-10.0..10.0);
        let p = point(&mut rng, 10.0);
        let h_u = spec.eval(t, &x, u, &p);
        let h_v = spec.eval(t, &x, v, &p);
        lin = lin.max((h_v - h_u - spec.lambda() * (v - u)).abs());

        let s = t + rng.gen_range(-1.0..1.0);
        let dx = point(&mut rng, 1.0);
        let y = [x[0] + dx[0], x[1] + dx[1]];
        let h_sy = spec.eval(s, &y, u, &p);
        let bound = c * (1.0 + p[0].hypot(p[1])) * (dx[0].hypot(dx[1]) + (t - s).abs());
        tx = tx.max((h_u - h_sy).abs() - bound - LIPSCHITZ_ROUNDING * h_u.abs().max(1.0));

        let radius = rng.gen_range(0.0..10.0);
        let (p1, p2) = (ball(&mut rng, radius), ball(&mut rng, radius));
        let diff = (spec.eval(t, &x, u, &p1) - spec.eval(t, &x, u, &p2)).abs();
        let dp = (p1[0] - p2[0]).hypot(p1[1] - p2[1]);
        pp = pp.max(diff - spec.lipschitz_p(radius) * dp - LIPSCHITZ_ROUNDING * diff.max(1.0));
    }
    let (tx, pp) = (tx.max(0.0), pp.max(0.0));
    let (linearity_pass, tx_lipschitz_pass, p_lipschitz_pass) = (lin <= LINEARITY_TOLERANCE, tx == 0.0, pp == 0.0);
    Ok(AssumptionReport {
        hamiltonian: spec.name(),
        samples: sample_budget,
        seed: rng_seed,
        linearity_residual: lin,
        tx_lipschitz_excess: tx,
        p_lipschitz_excess: pp,
        linearity_pass,
        tx_lipschitz_pass,
        p_lipschitz_pass,
        pass: linearity_pass && tx_lipschitz_pass && p_lipschitz_pass,
    })
}
