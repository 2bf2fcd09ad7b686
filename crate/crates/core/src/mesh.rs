//! Uniform 1D grids, nodal fields on space and space-time meshes, and the
//! discrete norms and difference operators shared by the solvers.
//!
//! Every quadrature uses the composite trapezoid rule. Space-time fields are
//! stored time-major: level `k` occupies `values[k * n_nodes..(k + 1) * n_nodes]`.

use crate::error::{Error, Result};
use crate::window::ObservationWindow;

/// Node-centred uniform grid on `[x_min, x_max]` with `n_cells` equal intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::GridTooCoarse {
                n_cells,
                required: 2,
            });
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
        })
    }

    /// Grid on the unit interval.
    pub fn unit(n_cells: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n_cells)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn h(&self) -> f64 {
        self.length() / self.n_cells as f64
    }

    /// Coordinate of node `i`, from the affine formula so both ends are exact.
    pub fn node(&self, i: usize) -> f64 {
        let s = i as f64 / self.n_cells as f64;
        self.x_min * (1.0 - s) + self.x_max * s
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(|i| self.node(i))
    }

    /// Trapezoid weights: `h` at interior nodes, `h / 2` at the two ends.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n_nodes()];
        w[0] = 0.5 * h;
        w[self.n_cells] = 0.5 * h;
        w
    }
}

/// Uniform time levels `t_k = k * tau` on `[0, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::InvalidGrid(format!("need finite T > 0, got {t_max}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 time steps, got {n_steps}"
            )));
        }
        Ok(Self { t_max, n_steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_levels(&self) -> usize {
        self.n_steps + 1
    }

    pub fn tau(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn level(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_max
        } else {
            k as f64 * self.tau()
        }
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let tau = self.tau();
        let mut w = vec![tau; self.n_levels()];
        w[0] = 0.5 * tau;
        w[self.n_steps] = 0.5 * tau;
        w
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidField(format!(
            "non-finite value {} at index {i}",
            values[i]
        ))),
        None => Ok(()),
    }
}

/// Nodal samples of a function of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "spatial field has {} values for {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n_nodes()],
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::DimensionMismatch(
                "spatial fields live on different grids".into(),
            ));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Self::new(self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Trapezoid-rule `L²(Ω)` inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .grid
            .trapezoid_weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }
}

/// Nodal samples of a function of `(x, t)` on the space-time mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid1D,
    tgrid: TimeGrid,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid1D, tgrid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.n_nodes() * tgrid.n_levels();
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "space-time field has {} values, mesh has {expected}",
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            grid,
            tgrid,
            values,
        })
    }

    pub fn zeros(grid: Grid1D, tgrid: TimeGrid) -> Self {
        Self {
            grid,
            tgrid,
            values: vec![0.0; grid.n_nodes() * tgrid.n_levels()],
        }
    }

    pub fn from_fn(grid: Grid1D, tgrid: TimeGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_nodes() * tgrid.n_levels());
        for k in 0..tgrid.n_levels() {
            let t = tgrid.level(k);
            values.extend(grid.nodes().map(|x| f(x, t)));
        }
        Self::new(grid, tgrid, values)
    }

    /// Builds a field from per-level rows, used by the time-stepping solvers.
    pub(crate) fn from_levels(grid: Grid1D, tgrid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, tgrid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn tgrid(&self) -> &TimeGrid {
        &self.tgrid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let n = self.grid.n_nodes();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn get(&self, node: usize, level: usize) -> f64 {
        self.values[level * self.grid.n_nodes() + node]
    }

    /// Spatial snapshot at level `k`.
    pub fn snapshot(&self, k: usize) -> SpatialField {
        SpatialField {
            grid: self.grid,
            values: self.level(k).to_vec(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        self.grid == other.grid && self.tgrid == other.tgrid
    }

    pub(crate) fn check_same_mesh(&self, other: &Self) -> Result<()> {
        if !self.same_mesh(other) {
            return Err(Error::DimensionMismatch(
                "space-time fields live on different meshes".into(),
            ));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_mesh(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Self::new(self.grid, self.tgrid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.grid,
            self.tgrid,
            self.values.iter().map(|v| c * v).collect(),
        )
    }

    /// Multiplies every level by the nodal indicator of `window`.
    pub fn masked(&self, window: &ObservationWindow) -> Result<Self> {
        let chi = window.indicator(&self.grid)?;
        let n = self.grid.n_nodes();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| chi[idx % n] * v)
            .collect();
        Self::new(self.grid, self.tgrid, values)
    }

    /// Level order reversed: level `k` of the result is level `n_steps - k` of `self`.
    pub fn reversed_in_time(&self) -> Self {
        let n = self.grid.n_nodes();
        let values = self
            .values
            .chunks_exact(n)
            .rev()
            .flatten()
            .copied()
            .collect();
        Self {
            grid: self.grid,
            tgrid: self.tgrid,
            values,
        }
    }

    /// Trapezoid-rule `L²(Ω × (0, T))` inner product (no window).
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_mesh(other)?;
        let wx = self.grid.trapezoid_weights();
        let wt = self.tgrid.trapezoid_weights();
        let n = self.grid.n_nodes();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(idx, (a, b))| wt[idx / n] * wx[idx % n] * a * b)
            .sum())
    }
}

/// Discrete `L²(Ω)` norm by the trapezoid rule.
pub fn l2_norm_spatial(f: &SpatialField) -> Result<f64> {
    check_finite(&f.values)?;
    Ok(f.inner(f)?.max(0.0).sqrt())
}

/// Discrete `L²(ω × (0, T))` norm: trapezoid in space and time, weighted by the
/// nodal indicator of `window`.
pub fn l2_norm_spacetime(f: &SpaceTimeField, window: &ObservationWindow) -> Result<f64> {
    Ok(weighted_spacetime_inner(f, f, window)?.max(0.0).sqrt())
}

/// Trapezoid-rule inner product over `ω × (0, T)`.
pub fn weighted_spacetime_inner(
    a: &SpaceTimeField,
    b: &SpaceTimeField,
    window: &ObservationWindow,
) -> Result<f64> {
    a.check_same_mesh(b)?;
    let chi = window.indicator(&a.grid)?;
    let wx = a.grid.trapezoid_weights();
    let wt = a.tgrid.trapezoid_weights();
    let n = a.grid.n_nodes();
    let mut total = 0.0;
    for (k, (ra, rb)) in a.values.chunks_exact(n).zip(b.values.chunks_exact(n)).enumerate() {
        let level: f64 = (0..n).map(|i| chi[i] * wx[i] * ra[i] * rb[i]).sum();
        total += wt[k] * level;
    }
    Ok(total)
}

/// First derivative of nodal values: centred in the interior, second-order
/// one-sided at the two ends.
pub(crate) fn gradient_of(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    out
}

/// Discrete gradient of a spatial field.
pub fn grad_spatial(f: &SpatialField) -> Result<SpatialField> {
    if f.grid.n_cells < 2 {
        return Err(Error::GridTooCoarse {
            n_cells: f.grid.n_cells,
            required: 2,
        });
    }
    SpatialField::new(f.grid, gradient_of(&f.values, f.grid.h()))
}

/// Three-point second difference at interior nodes.
///
/// Only interior entries are meaningful; the two boundary entries are not
/// applicable and are set to zero.
pub fn laplacian_spatial(f: &SpatialField) -> Result<SpatialField> {
    if f.grid.n_cells < 2 {
        return Err(Error::GridTooCoarse {
            n_cells: f.grid.n_cells,
            required: 2,
        });
    }
    let h2 = f.grid.h() * f.grid.h();
    let v = &f.values;
    let mut out = vec![0.0; v.len()];
    for i in 1..v.len() - 1 {
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    SpatialField::new(f.grid, out)
}
