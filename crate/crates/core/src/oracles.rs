//! Reference solutions: the fractional heat semigroup, its `s = 1` Poisson
//! kernel, the Hopf–Lax formula for convex `H(p)`, and exact transport.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::fracops::{FractionalOrder, SpectralPlan};
use crate::grid::{lipschitz_constant, GridField, Point};
use crate::hamiltonians::{working_radius, HamiltonianSpec};

/// A reference field with a bound on its own error.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub field: GridField,
    pub guaranteed_accuracy: f64,
}

/// `u(t) = e^{-ε t |k|^s} u₀` mode by mode; exact up to rounding
/// (accuracy `1e-12 ‖u₀‖_∞`) for band-limited data.
pub fn fractional_heat_exact(u0: &GridField, s: FractionalOrder, eps: f64, t: f64) -> Result<OracleResult> {
    if !(t >= 0.0) {
        return Err(Error::Config(format!("heat semigroup needs t >= 0, got {t}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("heat semigroup needs eps >= 0, got {eps}")));
    }
    if t == 0.0 || eps == 0.0 {
        return Ok(OracleResult { field: u0.clone(), guaranteed_accuracy: 0.0 });
    }
    let rate = eps * t;
    let sv = s.value();
    let field = SpectralPlan::new(u0.grid()).apply_radial(u0, |k| (-rate * k.powf(sv)).exp());
    Ok(OracleResult { field, guaranteed_accuracy: 1e-12 * u0.sup_norm() })
}

/// Outcome of [`poisson_kernel_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonCheck {
    /// `max |kernel convolution - semigroup|` over the checked nodes.
    pub max_deviation: f64,
    /// Bound on the error of the kernel quadrature itself.
    pub truncation_bound: f64,
}

/// Number of periodic images summed on each side before the integral tail.
pub const POISSON_IMAGES: i64 = 20;

/// Periodized Poisson kernel `Σ_m (1/π) τ / (τ² + (x + mL)²)`, `|m| ≤ 20`,
/// plus the midpoint Euler–Maclaurin tail of the remaining images.
pub fn periodic_poisson_kernel(x: f64, tau: f64, length: f64) -> f64 {
    let mut sum = 0.0;
    for m in -POISSON_IMAGES..=POISSON_IMAGES {
        let y = x + m as f64 * length;
        sum += tau / (PI * (tau * tau + y * y));
    }
    let edge = (POISSON_IMAGES as f64 + 0.5) * length;
    // Σ_{m > M} f(m) ≈ ∫_{M+1/2}^∞ f + f'(M + 1/2)/24
    let tail = |y: f64| {
        let r = tau * tau + y * y;
        (0.5 * PI - (y / tau).atan()) / (PI * length) - tau * y * length / (12.0 * PI * r * r)
    };
    sum + tail(edge + x) + tail(edge - x)
}

/// Compares the direct convolution of `u₀` with the `s = 1` Poisson kernel
/// (`τ = εt`, trapezoidal rule over the nodes) against [`fractional_heat_exact`]
/// at the selected nodes.
pub fn poisson_kernel_check(u0: &GridField, eps: f64, t: f64, nodes: &[usize]) -> Result<PoissonCheck> {
    if u0.grid().dim() != 1 {
        return Err(Error::Unsupported("the Poisson kernel check is one-dimensional".into()));
    }
    if !(t > 0.0 && eps > 0.0) {
        return Err(Error::Config(format!("the Poisson kernel needs eps t > 0, got eps = {eps}, t = {t}")));
    }
    let grid = *u0.grid();
    let (n, h, length) = (grid.len(), grid.spacing(), grid.length());
    let tau = eps * t;
    let semigroup = fractional_heat_exact(u0, FractionalOrder::CRITICAL, eps, t)?.field;
    let mut max_deviation = 0.0f64;
    for &i in nodes {
        if i >= n {
            return Err(Error::Config(format!("node {i} outside a grid of {n} nodes")));
        }
        let direct: f64 = (0..n)
            .map(|j| {
                let sep = crate::grid::lattice_separation(i, j, n) as f64 * h;
                h * periodic_poisson_kernel(sep, tau, length) * u0.values()[j]
            })
            .sum();
        max_deviation = max_deviation.max((direct - semigroup.values()[i]).abs());
    }
    // aliasing of the sampled kernel (e^{-τ n' 2π/L} per replica) and the image tail
    let decay = (-tau * 2.0 * PI / length * n as f64).exp();
    let alias = 2.0 * decay / (1.0 - decay);
    let edge = (POISSON_IMAGES as f64 + 0.5) * length;
    // next Euler–Maclaurin term, 7 |f'''| / 5760 on each side
    let tail_error = 2.0 * 7.0 / 5760.0 * 24.0 * tau * length.powi(3) / (PI * (edge - length).powi(4));
    let l1: f64 = u0.values().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    Ok(PoissonCheck { max_deviation, truncation_bound: l1 * alias + u0.sup_norm() * tail_error + 1e-13 * u0.sup_norm() })
}

/// Hopf–Lax formula `u(t, x) = min_y [u₀(y) + t L((x - y)/t)]` over nodes `y`
/// in the cone `|x - y| ≤ t A_R + 2h` (with periodic wrap), for convex `H(p)`.
pub fn hopf_lax(u0: &GridField, spec: &HamiltonianSpec, t: f64) -> Result<OracleResult> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("Hopf-Lax needs t > 0, got {t}")));
    }
    if !spec.is_p_only() || !spec.convex_in_p() || spec.conjugate(&[0.0, 0.0]).is_none() {
        return Err(Error::Unsupported(format!(
            "Hopf-Lax needs a convex Hamiltonian of p alone with a finite conjugate, got {}",
            spec.name()
        )));
    }
    let grid = *u0.grid();
    let h = grid.spacing();
    let lip = lipschitz_constant(u0);
    let speed = spec.lipschitz_p(working_radius(u0));
    let reach = t * speed + 2.0 * h;
    let steps = ((reach / h).floor() as isize).min(grid.points_per_axis() as isize / 2);
    let dim = grid.dim();
    let mut offsets = Vec::new();
    for a in -steps..=steps {
        for b in if dim == 2 { -steps..=steps } else { 0..=0 } {
            let d = (a as f64).hypot(b as f64) * h;
            if d <= reach {
                offsets.push(([a, b], [a as f64 * h, b as f64 * h]));
            }
        }
    }
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for (off, d) in &offsets {
                // y = x - d, so (x - y)/t = d/t
                let q: Point = [d[0] / t, d[1] / t];
                let cost = spec.conjugate(&q).expect("checked above");
                if cost.is_finite() {
                    let y = grid.offset_index(i, [-off[0], -off[1]]);
                    best = best.min(u0.values()[y] + t * cost);
                }
            }
            best
        })
        .collect();
    let field = GridField::new(grid, values)?;
    Ok(OracleResult { field, guaranteed_accuracy: h * (1.0 + lip) })
}

/// `u(t, x) = u₀(x - a t)`: an index shift when `a t` is a lattice vector,
/// spectral interpolation otherwise.
pub fn transport_exact(u0: &GridField, a: Point, t: f64) -> OracleResult {
    let grid = *u0.grid();
    let h = grid.spacing();
    let disp = [a[0] * t, if grid.dim() == 2 { a[1] * t } else { 0.0 }];
    let nodes = [disp[0] / h, disp[1] / h];
    let rounded = [nodes[0].round(), nodes[1].round()];
    if (nodes[0] - rounded[0]).abs() < 1e-9 && (nodes[1] - rounded[1]).abs() < 1e-9 {
        let field = u0.shifted([-(rounded[0] as isize), -(rounded[1] as isize)]);
        return OracleResult { field, guaranteed_accuracy: 0.0 };
    }
    let plan = SpectralPlan::new(&grid);
    let field = plan.apply(u0, |k, _| {
        let phase = -(k[0] * disp[0] + k[1] * disp[1]);
        Complex::new(phase.cos(), phase.sin())
    });
    // content in the upper half of the resolved band bounds the interpolation error
    let spectrum = plan.forward(u0);
    let n = grid.points_per_axis();
    let high = |m: usize| {
        let w = if m <= n / 2 { m } else { n - m };
        w > n / 4
    };
    let tail: f64 = spectrum
        .iter()
        .enumerate()
        .filter(|(idx, _)| match grid.dim() {
            1 => high(*idx),
            _ => high(idx / n) || high(idx % n),
        })
        .map(|(_, c)| c.norm())
        .sum::<f64>()
        / grid.len() as f64;
    OracleResult { field, guaranteed_accuracy: 2.0 * tail + 1e-13 * u0.sup_norm() }
}
