//! Uniform cell-centred grids in one or two dimensions and the discrete
//! operators used by the solvers.

use crate::error::{Error, Result};

/// Default support threshold (absolute, density units).
pub const DEFAULT_EPS_SUPP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 2],
    extent: [f64; 2],
    origin: [f64; 2],
    h: [f64; 2],
}

/// Side of a boundary face along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// A boundary face, identified by its axis, side and midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub axis: usize,
    pub side: Side,
    pub midpoint: [f64; 2],
}

impl Grid {
    pub fn new_1d(extent: f64, cells: usize, origin: f64) -> Result<Self> {
        Self::build(1, [cells, 1], [extent, 1.0], [origin, 0.0])
    }

    pub fn new_2d(extent: [f64; 2], cells: [usize; 2], origin: [f64; 2]) -> Result<Self> {
        Self::build(2, cells, extent, origin)
    }

    fn build(dim: usize, cells: [usize; 2], extent: [f64; 2], origin: [f64; 2]) -> Result<Self> {
        for axis in 0..dim {
            if cells[axis] < 3 {
                return Err(Error::Invalid(format!("grid needs at least 3 cells per axis, got {}", cells[axis])));
            }
            if !(extent[axis] > 0.0 && extent[axis].is_finite()) {
                return Err(Error::Invalid(format!("grid extent must be positive, got {}", extent[axis])));
            }
            if !origin[axis].is_finite() {
                return Err(Error::Invalid("grid origin must be finite".into()));
            }
        }
        let h = [extent[0] / cells[0] as f64, extent[1] / cells[1] as f64];
        Ok(Self { dim, cells, extent, origin, h })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis (only the first `dim` entries are meaningful).
    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn h(&self) -> &[f64] {
        &self.h[..self.dim]
    }

    pub fn len(&self) -> usize {
        self.cells[0] * if self.dim == 2 { self.cells[1] } else { 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().iter().product()
    }

    /// Geometric centre of the domain.
    pub fn midpoint(&self) -> [f64; 2] {
        let mut c = [0.0; 2];
        for axis in 0..self.dim {
            c[axis] = self.origin[axis] + 0.5 * self.extent[axis];
        }
        c
    }

    /// Row-major index: `i` runs along x.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.cells[0] + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.cells[0], idx / self.cells[0])
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.coords(idx);
        let mut x = [0.0; 2];
        x[0] = self.origin[0] + (i as f64 + 0.5) * self.h[0];
        if self.dim == 2 {
            x[1] = self.origin[1] + (j as f64 + 0.5) * self.h[1];
        }
        x
    }

    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut d2 = 0.0;
        for axis in 0..self.dim {
            let d = a[axis] - b[axis];
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// Number of cells between `idx` and the nearest boundary face
    /// (0 for cells adjacent to the boundary).
    pub fn cells_to_boundary(&self, idx: usize) -> usize {
        let (i, j) = self.coords(idx);
        let mut d = i.min(self.cells[0] - 1 - i);
        if self.dim == 2 {
            d = d.min(j.min(self.cells[1] - 1 - j));
        }
        d
    }

    /// Stencil weight `sum_axis c / h^2` of the diagonal entry, where `c` is 2
    /// for interior cells and 3 next to a Dirichlet face (ghost reflection).
    pub(crate) fn diagonal_weight(&self, boundary_cell: bool) -> f64 {
        let c = if boundary_cell { 3.0 } else { 2.0 };
        self.h().iter().map(|h| c / (h * h)).sum()
    }

    /// Applies the 3/5-point Laplacian to `values`, writing into `out`.
    /// Missing neighbours are replaced by the ghost value `2 bc - f_i`, which
    /// places the boundary value on the face midpoint.
    pub fn laplacian_into<B>(&self, values: &[f64], mut bc: B, out: &mut [f64])
    where
        B: FnMut(BoundaryFace) -> f64,
    {
        debug_assert_eq!(values.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        let nx = self.cells[0];
        let ny = if self.dim == 2 { self.cells[1] } else { 1 };
        let inv_h2 = [1.0 / (self.h[0] * self.h[0]), 1.0 / (self.h[1] * self.h[1])];
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                let f = values[idx];
                let left = if i > 0 {
                    values[idx - 1]
                } else {
                    let mut mid = self.center(idx);
                    mid[0] = self.origin[0];
                    2.0 * bc(BoundaryFace { axis: 0, side: Side::Lower, midpoint: mid }) - f
                };
                let right = if i + 1 < nx {
                    values[idx + 1]
                } else {
                    let mut mid = self.center(idx);
                    mid[0] = self.origin[0] + self.extent[0];
                    2.0 * bc(BoundaryFace { axis: 0, side: Side::Upper, midpoint: mid }) - f
                };
                let mut acc = (left - 2.0 * f + right) * inv_h2[0];
                if self.dim == 2 {
                    let down = if j > 0 {
                        values[idx - nx]
                    } else {
                        let mut mid = self.center(idx);
                        mid[1] = self.origin[1];
                        2.0 * bc(BoundaryFace { axis: 1, side: Side::Lower, midpoint: mid }) - f
                    };
                    let up = if j + 1 < ny {
                        values[idx + nx]
                    } else {
                        let mut mid = self.center(idx);
                        mid[1] = self.origin[1] + self.extent[1];
                        2.0 * bc(BoundaryFace { axis: 1, side: Side::Upper, midpoint: mid }) - f
                    };
                    acc += (down - 2.0 * f + up) * inv_h2[1];
                }
                out[idx] = acc;
            }
        }
    }

    /// Laplacian with one boundary value on every face.
    pub(crate) fn laplacian_uniform(&self, values: &[f64], bc: f64, out: &mut [f64]) {
        self.laplacian_into(values, |_| bc, out)
    }

    /// Sum over interior faces of `((f_R - f_L)/h)^2 * cell volume`, restricted
    /// to faces whose two cells are at least `margin` cells from the boundary.
    pub(crate) fn gradient_energy_window(&self, values: &[f64], margin: usize) -> f64 {
        let nx = self.cells[0];
        let ny = if self.dim == 2 { self.cells[1] } else { 1 };
        let vol = self.cell_volume();
        let inside = |k: usize, n: usize| k >= margin && k + margin < n;
        let mut acc = 0.0;
        for j in 0..ny {
            if self.dim == 2 && !inside(j, ny) {
                continue;
            }
            for i in 0..nx.saturating_sub(1) {
                if !(inside(i, nx) && inside(i + 1, nx)) {
                    continue;
                }
                let idx = j * nx + i;
                let g = (values[idx + 1] - values[idx]) / self.h[0];
                acc += g * g;
            }
        }
        if self.dim == 2 {
            for j in 0..ny - 1 {
                if !(inside(j, ny) && inside(j + 1, ny)) {
                    continue;
                }
                for i in 0..nx {
                    if !inside(i, nx) {
                        continue;
                    }
                    let idx = j * nx + i;
                    let g = (values[idx + nx] - values[idx]) / self.h[1];
                    acc += g * g;
                }
            }
        }
        acc * vol
    }

    /// Number of cells at least `margin` cells away from the boundary.
    pub fn window_len(&self, margin: usize) -> usize {
        self.cells().iter().map(|&n| n.saturating_sub(2 * margin)).product()
    }
}

/// One scalar per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

/// Thresholded support of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    pub cells: Vec<usize>,
    pub radius: f64,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self { values: vec![0.0; grid.len()], grid }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { values: vec![value; grid.len()], grid }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!("field has {} values, grid has {} cells", values.len(), grid.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("field value {v} is not finite")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.center(idx))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Cellwise sum of fields on the same grid, accumulated in order.
    pub fn sum<'a>(grid: Grid, fields: impl IntoIterator<Item = &'a Field>) -> Field {
        let mut out = Field::zeros(grid);
        let mut first = true;
        for f in fields {
            if first {
                out.values.copy_from_slice(&f.values);
                first = false;
            } else {
                for (o, v) in out.values.iter_mut().zip(&f.values) {
                    *o += v;
                }
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Laplacian with a single Dirichlet value on all faces.
    pub fn laplacian(&self, bc: f64) -> Field {
        self.laplacian_with(|_| bc)
    }

    /// Laplacian with face-dependent Dirichlet values.
    pub fn laplacian_with(&self, bc: impl FnMut(BoundaryFace) -> f64) -> Field {
        let mut out = vec![0.0; self.values.len()];
        self.grid.laplacian_into(&self.values, bc, &mut out);
        Field { grid: self.grid, values: out }
    }

    /// Cell-volume quadrature.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Discrete `||grad f||^2` over interior faces.
    pub fn gradient_energy(&self) -> f64 {
        self.grid.gradient_energy_window(&self.values, 0)
    }

    /// Support `{f > eps}` and its radius about `center`.
    pub fn support(&self, eps: f64, center: [f64; 2]) -> Support {
        let mut cells = Vec::new();
        let mut radius: f64 = 0.0;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > eps {
                cells.push(idx);
                radius = radius.max(self.grid.distance(self.grid.center(idx), center));
            }
        }
        Support { cells, radius }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit5() -> Grid {
        Grid::new_1d(5.0, 5, 0.0).unwrap()
    }

    #[test]
    fn rejects_small_grids() {
        assert!(Grid::new_1d(1.0, 2, 0.0).is_err());
        assert!(Grid::new_1d(0.0, 10, 0.0).is_err());
        assert!(Grid::new_2d([1.0, 1.0], [10, 2], [0.0, 0.0]).is_err());
    }

    #[test]
    fn centres_and_indexing() {
        let g = Grid::new_2d([2.0, 1.0], [4, 5], [-1.0, 0.0]).unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g.index(3, 2), 11);
        assert_eq!(g.coords(11), (3, 2));
        let c = g.center(g.index(0, 0));
        assert_relative_eq!(c[0], -0.75);
        assert_relative_eq!(c[1], 0.1);
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = Grid::new_2d([1.0, 1.0], [6, 7], [0.0, 0.0]).unwrap();
        let lap = Field::constant(g, 3.5).laplacian(3.5);
        assert!(lap.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn laplacian_of_quadratic_is_two_in_interior() {
        let g = Grid::new_1d(1.0, 20, 0.0).unwrap();
        let f = Field::from_fn(g, |x| x[0] * x[0]);
        let lap = f.laplacian(0.0);
        for v in &lap.values()[1..19] {
            assert_relative_eq!(*v, 2.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn laplacian_hand_stencil() {
        let f = Field::from_values(unit5(), vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.laplacian(0.0).values(), &[0.0, 1.0, -2.0, 1.0, 0.0]);
    }

    #[test]
    fn ghost_value_is_second_order_at_face() {
        // f = x on [0,1] with the exact face values; Laplacian of an affine
        // function is zero including the boundary cells.
        let g = Grid::new_1d(1.0, 10, 0.0).unwrap();
        let f = Field::from_fn(g, |x| x[0]);
        let lap = f.laplacian_with(|face| if face.side == Side::Lower { 0.0 } else { 1.0 });
        assert!(lap.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::new_1d(3.0, 30, 0.0).unwrap();
        assert_relative_eq!(Field::constant(g, 1.0).integrate(), 3.0, max_relative = 1e-14);
        let f = Field::from_values(unit5(), vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.integrate(), 1.0);
        let g2 = Grid::new_2d([1.0, 1.0], [10, 10], [0.0, 0.0]).unwrap();
        assert_relative_eq!(Field::constant(g2, 2.0).integrate(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn gradient_energy_examples() {
        let g = Grid::new_1d(2.0, 40, 0.0).unwrap();
        assert_eq!(Field::constant(g, 1.0).gradient_energy(), 0.0);
        // slope 1: 39 interior faces of width h; measure of covered region is 2 - h
        let e = Field::from_fn(g, |x| x[0]).gradient_energy();
        assert_relative_eq!(e, 2.0 - 0.05, max_relative = 1e-12);
        let f = Field::from_values(unit5(), vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.gradient_energy(), 2.0);
    }

    #[test]
    fn support_examples() {
        let g = unit5();
        assert_eq!(Field::zeros(g).support(1e-8, [2.5, 0.0]), Support { cells: vec![], radius: 0.0 });
        let f = Field::from_values(g, vec![0.0, 0.1, 0.8, 0.1, 0.0]).unwrap();
        let s = f.support(1e-8, g.center(2));
        assert_eq!(s.cells, vec![1, 2, 3]);
        assert_eq!(s.radius, 1.0);
        assert!(f.support(0.9, g.center(2)).cells.is_empty());
    }

    proptest! {
        #[test]
        fn discrete_divergence_theorem(vals in proptest::collection::vec(0.0f64..5.0, 6..40)) {
            // collar of two zero cells on each side
            let mut v = vec![0.0, 0.0];
            v.extend(vals);
            v.extend([0.0, 0.0]);
            let n = v.len();
            let g = Grid::new_1d(n as f64 * 0.1, n, 0.0).unwrap();
            let f = Field::from_values(g, v).unwrap();
            let total = f.laplacian(0.0).integrate();
            let scale: f64 = f.values().iter().sum::<f64>() / 0.1;
            prop_assert!(total.abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn support_monotone_in_threshold(vals in proptest::collection::vec(0.0f64..1.0, 3..30), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let g = Grid::new_1d(1.0, vals.len(), 0.0).unwrap();
            let f = Field::from_values(g, vals).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let big = f.support(lo, [0.5, 0.0]);
            let small = f.support(hi, [0.5, 0.0]);
            prop_assert!(small.cells.iter().all(|c| big.cells.contains(c)));
            prop_assert!(small.radius <= big.radius);
        }

        #[test]
        fn laplacian_exact_on_affine_2d(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
            let g = Grid::new_2d([1.0, 2.0], [5, 8], [0.0, 0.0]).unwrap();
            let f = Field::from_fn(g, |x| a * x[0] + b * x[1] + c);
            let lap = f.laplacian_with(|face| a * face.midpoint[0] + b * face.midpoint[1] + c);
            prop_assert!(lap.values().iter().all(|v| v.abs() < 1e-9));
        }
    }
}
