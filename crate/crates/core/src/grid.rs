//! Anisotropic box grids over a group and real-valued functions sampled on them.
//!
//! Grids are origin-centred boxes `Π [-L_i, L_i]` with an odd number of nodes
//! per axis, so the origin is always a node. Values are stored flat in C order
//! (last axis fastest). Everything outside the box is treated as zero
//! (Dirichlet extension).

use std::sync::Arc;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::group::GroupSpec;

pub const DEFAULT_DOF_CAP: usize = 2_000_000;

/// Number of outermost node layers per axis on which an "interior-supported"
/// function must vanish.
pub const SUPPORT_LAYERS: usize = 2;

#[derive(Debug)]
pub struct Grid {
    spec: Arc<GroupSpec>,
    half_widths: Vec<f64>,
    points: Vec<usize>,
    spacings: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(spec: Arc<GroupSpec>, half_widths: &[f64], points: &[usize]) -> Result<Arc<Grid>> {
        Grid::with_dof_cap(spec, half_widths, points, DEFAULT_DOF_CAP)
    }

    pub fn with_dof_cap(
        spec: Arc<GroupSpec>,
        half_widths: &[f64],
        points: &[usize],
        dof_cap: usize,
    ) -> Result<Arc<Grid>> {
        let n = spec.dim();
        if half_widths.len() != n || points.len() != n {
            return Err(Error::invalid(format!(
                "grid descriptors must match group dimension {n}"
            )));
        }
        if half_widths.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::invalid("half_widths must be positive"));
        }
        if points.iter().any(|&m| m < 5 || m % 2 == 0) {
            return Err(Error::invalid("points_per_axis must be odd and ≥ 5"));
        }
        let len: usize = points.iter().product();
        if len > dof_cap {
            return Err(Error::ResourceLimit(format!(
                "grid has {len} dof, cap is {dof_cap}"
            )));
        }
        let spacings: Vec<f64> = half_widths
            .iter()
            .zip(points)
            .map(|(&l, &m)| 2.0 * l / (m as f64 - 1.0))
            .collect();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * points[i + 1];
        }
        Ok(Arc::new(Grid { spec, half_widths: half_widths.to_vec(), points: points.to_vec(), spacings, strides, len }))
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Volume of one grid cell, `Π h_i`.
    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    pub fn axis_coord(&self, axis: usize, index: usize) -> f64 {
        -self.half_widths[axis] + index as f64 * self.spacings[axis]
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.multi_index_into(flat, &mut out);
        out
    }

    pub fn multi_index_into(&self, flat: usize, out: &mut [usize]) {
        let mut rem = flat;
        for i in 0..self.dim() {
            out[i] = rem / self.strides[i];
            rem %= self.strides[i];
        }
    }

    pub fn node_into(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for i in 0..self.dim() {
            let idx = rem / self.strides[i];
            rem %= self.strides[i];
            out[i] = self.axis_coord(i, idx);
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.node_into(flat, &mut out);
        out
    }

    pub fn origin_index(&self) -> usize {
        let multi: Vec<usize> = self.points.iter().map(|&m| (m - 1) / 2).collect();
        self.flat_index(&multi)
    }

    /// True when the node lies within `layers` of a box face on some axis.
    pub fn in_boundary_layer(&self, flat: usize, layers: usize) -> bool {
        let mut rem = flat;
        for i in 0..self.dim() {
            let idx = rem / self.strides[i];
            rem %= self.strides[i];
            if idx < layers || idx + layers >= self.points[i] {
                return true;
            }
        }
        false
    }

    /// Multilinear interpolation of flat `values` at an arbitrary point,
    /// zero outside the box.
    pub fn interpolate(&self, values: &[f64], point: &[f64]) -> f64 {
        let n = self.dim();
        debug_assert!(n <= 24, "bitmask corner walk assumes few axes");
        let mut base = [0usize; 24];
        let mut frac = [0.0f64; 24];
        for i in 0..n {
            let u = (point[i] + self.half_widths[i]) / self.spacings[i];
            if !(u >= 0.0) || u > (self.points[i] - 1) as f64 {
                return 0.0;
            }
            let mut i0 = u.floor() as usize;
            if i0 >= self.points[i] - 1 {
                i0 = self.points[i] - 2;
            }
            base[i] = i0;
            frac[i] = u - i0 as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0;
            for i in 0..n {
                let hi = (corner >> i) & 1 == 1;
                w *= if hi { frac[i] } else { 1.0 - frac[i] };
                flat += (base[i] + hi as usize) * self.strides[i];
            }
            if w != 0.0 {
                acc += w * values[flat];
            }
        }
        acc
    }

    /// Nodes of the grid as an iterator of flat indices.
    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len
    }
}

/// Real values sampled on a grid.
///
/// `boundary_warning` is set by operations whose result may be contaminated by
/// the Dirichlet truncation (e.g. differentiating a function that does not
/// vanish near the box faces); it propagates through later operations.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Array1<f64>,
    pub boundary_warning: bool,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Array1<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "value array has {} entries, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid function values must be finite"));
        }
        Ok(GridFunction { grid, values, boundary_warning: false })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridFunction { grid, values: Array1::zeros(n), boundary_warning: false }
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut values = Array1::zeros(grid.len());
        let mut x = vec![0.0; grid.dim()];
        for idx in grid.indices() {
            grid.node_into(idx, &mut x);
            values[idx] = f(&x);
        }
        GridFunction { grid, values, boundary_warning: false }
    }

    /// Discrete delta at the origin: mass one under `integrate`.
    pub fn delta(grid: Arc<Grid>) -> Self {
        let mut out = GridFunction::zeros(grid);
        let o = out.grid.origin_index();
        out.values[o] = 1.0 / out.grid.cell_volume();
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array1<f64> {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the function vanishes exactly on the outermost
    /// [`SUPPORT_LAYERS`] node layers of every axis.
    pub fn is_interior_supported(&self) -> bool {
        self.grid
            .indices()
            .all(|i| !self.grid.in_boundary_layer(i, SUPPORT_LAYERS) || self.values[i] == 0.0)
    }

    /// Forces exact zeros on the outermost `layers` node layers.
    pub fn zero_boundary_layers(&mut self, layers: usize) {
        for i in 0..self.values.len() {
            if self.grid.in_boundary_layer(i, layers) {
                self.values[i] = 0.0;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: &self.values * c,
            boundary_warning: self.boundary_warning,
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "grid mismatch");
        GridFunction {
            grid: self.grid.clone(),
            values: &self.values + &other.values,
            boundary_warning: self.boundary_warning || other.boundary_warning,
        }
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "grid mismatch");
        GridFunction {
            grid: self.grid.clone(),
            values: &self.values - &other.values,
            boundary_warning: self.boundary_warning || other.boundary_warning,
        }
    }

    pub fn mul_pointwise(&self, other: &GridFunction) -> GridFunction {
        assert!(Arc::ptr_eq(&self.grid, &other.grid), "grid mismatch");
        GridFunction {
            grid: self.grid.clone(),
            values: &self.values * &other.values,
            boundary_warning: self.boundary_warning || other.boundary_warning,
        }
    }

    /// Pullback under the dilation: `(f ∘ δ_α)(x) = f(δ_α x)` resampled on the
    /// same grid by multilinear interpolation (zero where `δ_α x` leaves the
    /// box). For integer `α` on grids whose half-width is an integer number of
    /// spacings this hits nodes exactly.
    pub fn resample_dilated(&self, alpha: f64) -> Result<GridFunction> {
        if !(alpha > 0.0) {
            return Err(Error::invalid("dilation requires α > 0"));
        }
        let grid = &self.grid;
        let mut out = Array1::zeros(grid.len());
        let mut x = vec![0.0; grid.dim()];
        let mut dx = vec![0.0; grid.dim()];
        let vals = self.values.as_slice().unwrap();
        for idx in grid.indices() {
            grid.node_into(idx, &mut x);
            grid.spec().dilate_into(alpha, &x, &mut dx);
            out[idx] = grid.interpolate(vals, &dx);
        }
        Ok(GridFunction { grid: grid.clone(), values: out, boundary_warning: self.boundary_warning })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_grid() -> Arc<Grid> {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        Grid::new(spec, &[1.0, 1.0, 1.0], &[5, 5, 5]).unwrap()
    }

    #[test]
    fn origin_is_a_node() {
        let g = small_grid();
        let o = g.origin_index();
        assert_eq!(g.node(o), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn flat_and_multi_roundtrip() {
        let g = small_grid();
        for idx in g.indices() {
            assert_eq!(g.flat_index(&g.multi_index(idx)), idx);
        }
    }

    #[test]
    fn grid_validation() {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        assert!(Grid::new(spec.clone(), &[1.0, 1.0], &[5, 5, 5]).is_err());
        assert!(Grid::new(spec.clone(), &[1.0, 1.0, 1.0], &[4, 5, 5]).is_err());
        assert!(Grid::new(spec.clone(), &[1.0, 1.0, 1.0], &[3, 5, 5]).is_err());
        assert!(Grid::with_dof_cap(spec, &[1.0, 1.0, 1.0], &[5, 5, 5], 100).is_err());
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let g = small_grid();
        let f = GridFunction::from_fn(g.clone(), |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]);
        let vals = f.values().as_slice().unwrap();
        assert_abs_diff_eq!(g.interpolate(vals, &[0.13, -0.4, 0.77]), 1.0 + 0.26 + 0.4 + 0.385, epsilon = 1e-13);
        // Outside the box: zero extension.
        assert_eq!(g.interpolate(vals, &[1.5, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn interior_support_flagging() {
        let g = small_grid();
        let mut f = GridFunction::from_fn(g.clone(), |_| 1.0);
        assert!(!f.is_interior_supported());
        f.zero_boundary_layers(SUPPORT_LAYERS);
        assert!(f.is_interior_supported());
        // On a 5-point axis only the centre survives two layers.
        let nonzero = f.values().iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn delta_has_unit_mass() {
        let g = small_grid();
        let d = GridFunction::delta(g.clone());
        let mass: f64 = d.values().sum() * g.cell_volume();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dilated_resampling_hits_nodes_exactly_for_alpha_two() {
        let spec = Arc::new(GroupSpec::heisenberg(16.0));
        let g = Grid::new(spec, &[2.0, 2.0, 2.0], &[9, 9, 9]).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| {
            (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
        });
        let fd = f.resample_dilated(2.0).unwrap();
        // At a node x with 2x, 4x_3 still inside: exact equality.
        let mut multi = vec![5, 4, 4];
        let idx = g.flat_index(&multi);
        let x = g.node(idx);
        let dx = [2.0 * x[0], 2.0 * x[1], 4.0 * x[2]];
        multi = vec![6, 4, 4]; // node at 2x
        let _ = multi;
        let expected = (-(dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2])).exp();
        assert_abs_diff_eq!(fd.values()[idx], expected, epsilon = 1e-15);
    }
}
