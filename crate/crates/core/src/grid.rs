//! Periodic grids, grid functions and elementary discrete calculus.
//!
//! The computational domain is the torus `[0, L)^dim` sampled at
//! `points_per_axis` nodes per axis. Fields are stored row-major with axis 0
//! varying slowest. Every index operation wraps modulo `points_per_axis`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A node coordinate. Only the first `grid.dim()` entries are meaningful.
pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    dim: usize,
    points_per_axis: usize,
    length: f64,
}

impl PeriodicGrid {
    pub fn new(dim: usize, points_per_axis: usize, length: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis must be a power of two >= 8, got {points_per_axis}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self { dim, points_per_axis, length })
    }

    /// One-dimensional grid on `[0, length)`.
    pub fn line(points: usize, length: f64) -> Result<Self> {
        Self::new(1, points, length)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Power-of-two node counts make this division exact.
    pub fn spacing(&self) -> f64 {
        self.length / self.points_per_axis as f64
    }

    /// Total number of nodes, `points_per_axis^dim`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multi-index of a flat node index.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        let n = self.points_per_axis;
        match self.dim {
            1 => [flat, 0],
            _ => [flat / n, flat % n],
        }
    }

    pub fn flat_index(&self, multi: [usize; 2]) -> usize {
        match self.dim {
            1 => multi[0],
            _ => multi[0] * self.points_per_axis + multi[1],
        }
    }

    /// Flat index of the node displaced by `offset` lattice steps, wrapping.
    pub fn offset_index(&self, flat: usize, offset: [isize; 2]) -> usize {
        let n = self.points_per_axis as isize;
        let m = self.multi_index(flat);
        let mut out = [0usize; 2];
        for axis in 0..self.dim {
            out[axis] = (m[axis] as isize + offset[axis]).rem_euclid(n) as usize;
        }
        self.flat_index(out)
    }

    pub fn point(&self, flat: usize) -> Point {
        let h = self.spacing();
        let m = self.multi_index(flat);
        match self.dim {
            1 => [m[0] as f64 * h, 0.0],
            _ => [m[0] as f64 * h, m[1] as f64 * h],
        }
    }

    /// Shortest periodic distance between two nodes, in length units.
    pub fn periodic_distance(&self, a: usize, b: usize) -> f64 {
        let ma = self.multi_index(a);
        let mb = self.multi_index(b);
        let mut sq = 0.0;
        for axis in 0..self.dim {
            let d = lattice_separation(ma[axis], mb[axis], self.points_per_axis) as f64
                * self.spacing();
            sq += d * d;
        }
        sq.sqrt()
    }
}

/// Shortest signed-free lattice separation `min(|i-j|, n-|i-j|)`.
pub(crate) fn lattice_separation(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

/// A real-valued function on the nodes of a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some((idx, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { node: grid.multi_index(idx)[..grid.dim()].to_vec(), value: v });
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values already known to be finite and sized.
    pub(crate) fn from_parts(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Arithmetic mean, summed in node order.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        Self::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        ensure_same_grid(self, other)?;
        Ok(Self::from_parts(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn scale(&self, alpha: f64) -> GridField {
        self.map(|v| alpha * v)
    }

    /// Field whose value at node `i` is this field's value at `i + offset`.
    pub fn shifted(&self, offset: [isize; 2]) -> GridField {
        let values = (0..self.grid.len())
            .map(|i| self.values[self.grid.offset_index(i, offset)])
            .collect();
        Self::from_parts(self.grid, values)
    }

    /// Writes `x_0[,x_1],value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header = if self.grid.dim() == 1 { "x_0,value" } else { "x_0,x_1,value" };
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for (i, v) in self.values.iter().enumerate() {
            line.clear();
            let p = self.grid.point(i);
            for c in &p[..self.grid.dim()] {
                write!(line, "{c:.16e},").unwrap();
            }
            write!(line, "{v:.16e}").unwrap();
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a field written by [`GridField::write_csv`] onto `grid`.
    pub fn read_csv<R: BufRead>(grid: PeriodicGrid, input: R) -> Result<GridField> {
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            if lineno == 0 || line.trim().is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().unwrap_or("");
            let v: f64 = last
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("line {}: bad value {last:?}", lineno + 1)))?;
            values.push(v);
        }
        GridField::new(grid, values)
    }
}

pub(crate) fn ensure_same_grid(a: &GridField, b: &GridField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(())
}

/// Samples `f` at every node `x_i = i * spacing`.
pub fn sample(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> f64) -> Result<GridField> {
    let dim = grid.dim();
    let values: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i)[..dim])).collect();
    GridField::new(*grid, values)
}

/// Maximum absolute nodal difference.
pub fn sup_dist(a: &GridField, b: &GridField) -> Result<f64> {
    ensure_same_grid(a, b)?;
    Ok(a.values.iter().zip(&b.values).fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}

/// Periodic central differences, one component per axis.
pub fn discrete_gradient(field: &GridField) -> Vec<GridField> {
    let grid = *field.grid();
    let h = grid.spacing();
    (0..grid.dim())
        .map(|axis| {
            let mut fwd = [0isize; 2];
            fwd[axis] = 1;
            let bwd = [-fwd[0], -fwd[1]];
            let values = (0..grid.len())
                .map(|i| {
                    (field.values[grid.offset_index(i, fwd)] - field.values[grid.offset_index(i, bwd)])
                        / (2.0 * h)
                })
                .collect();
            GridField::from_parts(grid, values)
        })
        .collect()
}

/// Largest nearest-neighbour slope `|u(x + h e_k) - u(x)| / h` over nodes and axes.
pub fn lipschitz_constant(field: &GridField) -> f64 {
    let grid = *field.grid();
    let h = grid.spacing();
    let mut best = 0.0f64;
    for axis in 0..grid.dim() {
        let mut fwd = [0isize; 2];
        fwd[axis] = 1;
        for i in 0..grid.len() {
            let d = (field.values[grid.offset_index(i, fwd)] - field.values[i]).abs() / h;
            best = best.max(d);
        }
    }
    best
}

/// Time-indexed sequence of fields on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    fields: Vec<GridField>,
    warnings: Vec<String>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, fields: Vec<GridField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::Insufficient(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::Config(format!("trajectory must start at t = 0, got {}", times[0])));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("trajectory times must be strictly increasing".into()));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch("trajectory fields on different grids".into()));
        }
        Ok(Self { times, fields, warnings: Vec::new() })
    }

    /// A trajectory that is constant in time.
    pub fn stationary(field: GridField, times: Vec<f64>) -> Result<Self> {
        let fields = vec![field; times.len()];
        Self::new(times, fields)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[GridField] {
        &self.fields
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.fields[0].grid()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_field(&self) -> &GridField {
        self.fields.last().expect("trajectory is never empty")
    }

    /// Index of the snapshot whose time is within `tol` of `t`.
    pub fn snapshot_index(&self, t: f64, tol: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }

    /// Run metadata such as monotonicity warnings recorded by the solver.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub(crate) fn push_warning(&mut self, w: String) {
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    /// Applies `f` to every snapshot, keeping the times.
    pub fn map_fields(&self, f: impl Fn(&GridField) -> GridField) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            fields: self.fields.iter().map(f).collect(),
            warnings: self.warnings.clone(),
        }
    }

    /// Sup over snapshots of the nodal distance to another trajectory.
    pub fn sup_dist(&self, other: &Trajectory) -> Result<f64> {
        if self.times != other.times {
            return Err(Error::GridMismatch("trajectories have different snapshot times".into()));
        }
        let mut best = 0.0f64;
        for (a, b) in self.fields.iter().zip(&other.fields) {
            best = best.max(sup_dist(a, b)?);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize) -> PeriodicGrid {
        PeriodicGrid::line(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PeriodicGrid::new(3, 8, 1.0).is_err());
        assert!(PeriodicGrid::new(1, 12, 1.0).is_err());
        assert!(PeriodicGrid::new(1, 4, 1.0).is_err());
        assert!(PeriodicGrid::new(1, 8, -1.0).is_err());
        let g = PeriodicGrid::new(2, 16, 3.0).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.spacing() * 16.0, 3.0);
    }

    #[test]
    fn sample_examples() {
        let g = line(8);
        let z = sample(&g, |_| 0.0).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));

        let s = sample(&g, |x| x[0].sin()).unwrap();
        for (i, v) in s.values().iter().enumerate() {
            assert_eq!(*v, (i as f64 * PI / 4.0).sin());
        }

        let l = 2.0 * PI;
        let tri = sample(&PeriodicGrid { dim: 1, points_per_axis: 4, length: l }, |x| {
            x[0].min(l - x[0])
        })
        .unwrap();
        assert_eq!(tri.values(), &[0.0, PI / 2.0, PI, PI / 2.0]);
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = line(8);
        let err = sample(&g, |x| if x[0] > 3.0 { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert_eq!(node, vec![4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sup_dist_examples() {
        let g = line(8);
        let a = GridField::constant(g, 1.0);
        let b = GridField::constant(g, -2.0);
        assert_eq!(sup_dist(&a, &a).unwrap(), 0.0);
        assert_eq!(sup_dist(&a, &b).unwrap(), 3.0);

        // four nodes: sin vs sin shifted one node (= cos at these nodes)
        let g4 = PeriodicGrid { dim: 1, points_per_axis: 4, length: 2.0 * PI };
        let s = GridField::from_parts(g4, (0..4).map(|i| (i as f64 * PI / 2.0).sin()).collect());
        let shifted = s.shifted([1, 0]);
        let brute = (0..4)
            .map(|i| {
                let x = i as f64 * PI / 2.0;
                (x.sin() - (x + PI / 2.0).sin()).abs()
            })
            .fold(0.0, f64::max);
        let d = sup_dist(&s, &shifted).unwrap();
        assert!((d - brute).abs() < 1e-15);
        assert!((d - 1.0).abs() < 1e-15);

        let other = GridField::zeros(line(16));
        assert!(matches!(sup_dist(&a, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn gradient_examples() {
        let g = line(256);
        let c = GridField::constant(g, 3.7);
        assert!(discrete_gradient(&c)[0].values().iter().all(|&v| v == 0.0));

        let s = sample(&g, |x| x[0].sin()).unwrap();
        let cosine = sample(&g, |x| x[0].cos()).unwrap();
        // |cos x| (1 - sin h / h) ≤ h²/6
        let h = g.spacing();
        assert!(sup_dist(&discrete_gradient(&s)[0], &cosine).unwrap() <= h * h / 6.0 + 1e-12);

        let l = 2.0 * PI;
        let tri = sample(&line(64), |x| x[0].min(l - x[0])).unwrap();
        assert!(discrete_gradient(&tri)[0].get(0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_examples() {
        let g = line(256);
        assert_eq!(lipschitz_constant(&GridField::constant(g, 2.0)), 0.0);
        let l = 2.0 * PI;
        let tri = sample(&g, |x| x[0].min(l - x[0])).unwrap();
        assert!((lipschitz_constant(&tri) - 1.0).abs() < 1e-12);
        let s = sample(&g, |x| x[0].sin()).unwrap();
        assert!((lipschitz_constant(&s) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn two_dimensional_gradient() {
        let g = PeriodicGrid::new(2, 64, 2.0 * PI).unwrap();
        let f = sample(&g, |x| x[0].sin() + (2.0 * x[1]).cos()).unwrap();
        let grad = discrete_gradient(&f);
        let gx = sample(&g, |x| x[0].cos()).unwrap();
        let gy = sample(&g, |x| -2.0 * (2.0 * x[1]).sin()).unwrap();
        assert!(sup_dist(&grad[0], &gx).unwrap() < 1e-2);
        assert!(sup_dist(&grad[1], &gy).unwrap() < 2e-2);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = line(16);
        let f = sample(&g, |x| (x[0] * 1.3).exp().sin() / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_0,value\n"));
        let back = GridField::read_csv(g, std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn trajectory_invariants() {
        let g = line(8);
        let f = GridField::zeros(g);
        assert!(Trajectory::new(vec![0.0, 0.5], vec![f.clone(), f.clone()]).is_ok());
        assert!(Trajectory::new(vec![0.1, 0.5], vec![f.clone(), f.clone()]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![f.clone(), f.clone()]).is_err());
        let other = GridField::zeros(line(16));
        assert!(Trajectory::new(vec![0.0, 1.0], vec![f, other]).is_err());
    }
}
