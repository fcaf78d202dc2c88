//! Uniform-grid and complex-field primitives shared by the walker engine and
//! the exact two-electron solver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform 1D grid on `[x_min, x_max]` with `n_points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::GridTooSmall { min: 2, got: n_points });
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Config(vec![format!(
                "grid bounds must satisfy x_max > x_min, got [{x_min}, {x_max}]"
            )]));
        }
        Ok(Grid1D { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Node position, exactly reproducible: `x_min + i * spacing`.
    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.x_min + i as f64 * self.spacing()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Index of the node at or immediately left of `x`, clamped so that
    /// `i + 1` is always a valid node.
    pub fn bracket(&self, x: f64) -> Result<(usize, f64)> {
        if !self.contains(x) {
            return Err(Error::WalkerLeftGrid { x });
        }
        let s = (x - self.x_min) / self.spacing();
        let i = (s.floor() as usize).min(self.n_points - 2);
        Ok((i, s - i as f64))
    }
}

/// Tensor-product 2D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub axis1: Grid1D,
    pub axis2: Grid1D,
}

impl Grid2D {
    pub fn new(axis1: Grid1D, axis2: Grid1D) -> Self {
        Grid2D { axis1, axis2 }
    }

    /// Symmetric square grid, the usual case for the two-electron model.
    pub fn square(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let axis = Grid1D::new(x_min, x_max, n_points)?;
        Ok(Grid2D { axis1: axis, axis2: axis })
    }

    pub fn cell_area(&self) -> f64 {
        self.axis1.spacing() * self.axis2.spacing()
    }

    pub fn n_total(&self) -> usize {
        self.axis1.n_points() * self.axis2.n_points()
    }
}

/// Complex amplitudes on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField1D {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.n_points(), "field length must match grid");
        ComplexField1D { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        ComplexField1D { grid, values: vec![Complex64::new(0.0, 0.0); grid.n_points()] }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.points().map(f).collect();
        ComplexField1D { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// L² norm squared under the rectangle rule.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Rescale to unit L² norm. Errors on a zero-norm field.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::DegenerateField);
        }
        let s = 1.0 / n.sqrt();
        for v in &mut self.values {
            *v *= s;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Second-order central differences; one-sided second-order at the ends.
    pub fn gradient_central(&self) -> Result<ComplexField1D> {
        let n = self.grid.n_points();
        if n < 3 {
            return Err(Error::GridTooSmall { min: 3, got: n });
        }
        let h = self.grid.spacing();
        let v = &self.values;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        for i in 1..n - 1 {
            out[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        Ok(ComplexField1D { grid: self.grid, values: out })
    }

    /// Linear interpolation; exact at grid nodes, errors off-grid.
    pub fn interpolate(&self, x: f64) -> Result<Complex64> {
        let (i, w) = self.grid.bracket(x)?;
        // node hits return the stored value untouched by rounding in w
        if x == self.grid.point(i) {
            return Ok(self.values[i]);
        }
        if x == self.grid.point(i + 1) {
            return Ok(self.values[i + 1]);
        }
        Ok(self.values[i] * (1.0 - w) + self.values[i + 1] * w)
    }
}

/// Complex amplitudes on a [`Grid2D`], row-major with axis2 contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    grid: Grid2D,
    values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid: Grid2D, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.n_total(), "field length must match grid");
        ComplexField2D { grid, values }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.n_total());
        for i in 0..grid.axis1.n_points() {
            let x1 = grid.axis1.point(i);
            for j in 0..grid.axis2.n_points() {
                values.push(f(x1, grid.axis2.point(j)));
            }
        }
        ComplexField2D { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.grid.axis2.n_points() + j]
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::DegenerateField);
        }
        let s = 1.0 / n.sqrt();
        for v in &mut self.values {
            *v *= s;
        }
        Ok(())
    }
}

/// Real scalar field on a [`Grid2D`], row-major with axis2 contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl RealField2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n_total(), "field length must match grid");
        RealField2D { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        RealField2D { grid, values: vec![0.0; grid.n_total()] }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.axis2.n_points() + j]
    }

    /// Rectangle-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}
