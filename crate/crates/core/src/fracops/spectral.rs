//! Fourier multipliers on the periodic lattice.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::{GridField, PeriodicGrid};

/// Immutable FFT plans for one grid; shareable across threads.
#[derive(Clone)]
pub struct SpectralPlan {
    grid: PeriodicGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralPlan").field("grid", &self.grid).finish()
    }
}

impl SpectralPlan {
    pub fn new(grid: &PeriodicGrid) -> Self {
        let n = grid.points_per_axis();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = 2.0 * std::f64::consts::PI / grid.length();
        let wavenumbers = (0..n)
            .map(|m| if m <= n / 2 { m as f64 * base } else { (m as f64 - n as f64) * base })
            .collect();
        Self { grid: *grid, forward, inverse, wavenumbers }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Angular wavenumber of DFT index `m` on one axis; the Nyquist index maps to `+π/h`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        self.wavenumbers[m]
    }

    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.grid.points_per_axis() / 2
    }

    pub fn forward(&self, field: &GridField) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = field.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex<f64>>) -> GridField {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        GridField::from_parts(self.grid, spectrum.iter().map(|c| c.re * scale).collect())
    }

    fn transform(&self, buf: &mut [Complex<f64>], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis();
        match self.grid.dim() {
            1 => plan.process(buf),
            _ => {
                // rows (axis 1 contiguous), then columns through a transpose buffer
                plan.process(buf);
                let mut col = vec![Complex::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    plan.process(&mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
            }
        }
    }

    /// Applies the multiplier `symbol(k, m)`, where `k` holds the angular
    /// wavenumbers and `m` the DFT indices of each axis.
    pub fn apply(&self, field: &GridField, symbol: impl Fn(&[f64; 2], &[usize; 2]) -> Complex<f64>) -> GridField {
        let mut spec = self.forward(field);
        let n = self.grid.points_per_axis();
        for (idx, c) in spec.iter_mut().enumerate() {
            let m = match self.grid.dim() {
                1 => [idx, 0],
                _ => [idx / n, idx % n],
            };
            let k = [self.wavenumbers[m[0]], if self.grid.dim() == 2 { self.wavenumbers[m[1]] } else { 0.0 }];
            *c *= symbol(&k, &m);
        }
        self.inverse_real(spec)
    }

    /// Applies a real radial multiplier `g(|k|)`.
    pub fn apply_radial(&self, field: &GridField, g: impl Fn(f64) -> f64) -> GridField {
        self.apply(field, |k, _| Complex::new(g((k[0] * k[0] + k[1] * k[1]).sqrt()), 0.0))
    }
}
