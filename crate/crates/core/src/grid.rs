//! Uniform vertex-centred 2D grid and the deterministic fields defined on it.
//!
//! Values are stored row-major with x fastest: vertex `(i, j)` lives at
//! `j * nx + i`. Cells are the `(nx - 1) x (ny - 1)` quads between vertices.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid2 {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
}

impl UniformGrid2 {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Grid(format!(
                "need at least 2 vertices per axis, got {nx}x{ny}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
            return Err(Error::Grid(format!(
                "spacing must be positive and finite, got dx={dx}, dy={dy}"
            )));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    /// Unit-spaced grid.
    pub fn unit(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells_x(&self) -> usize {
        self.nx - 1
    }

    pub fn cells_y(&self) -> usize {
        self.ny - 1
    }

    pub fn cell_count(&self) -> usize {
        self.cells_x() * self.cells_y()
    }

    /// Linear index of vertex `(i, j)`.
    pub fn vertex_index(&self, i: usize, j: usize) -> Result<usize> {
        if i >= self.nx || j >= self.ny {
            return Err(Error::Index {
                i,
                j,
                nx: self.nx,
                ny: self.ny,
            });
        }
        Ok(self.index_unchecked(i, j))
    }

    #[inline(always)]
    pub(crate) fn index_unchecked(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Inverse of [`vertex_index`](Self::vertex_index).
    pub fn vertex_coords(&self, index: usize) -> Result<(usize, usize)> {
        if index >= self.len() {
            return Err(Error::Index {
                i: index % self.nx,
                j: index / self.nx,
                nx: self.nx,
                ny: self.ny,
            });
        }
        Ok((index % self.nx, index / self.nx))
    }

    /// World position of vertex `(i, j)`; the origin vertex sits at `(0, 0)`.
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.dx, j as f64 * self.dy)
    }

    /// World extent `(width, height)` of the vertex bounding box.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.nx - 1) as f64 * self.dx,
            (self.ny - 1) as f64 * self.dy,
        )
    }
}

pub(crate) fn check_values(grid: &UniformGrid2, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::Length {
            expected: grid.len(),
            actual: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2 {
    grid: UniformGrid2,
    values: Vec<f64>,
}

impl ScalarField2 {
    pub fn new(grid: UniformGrid2, values: Vec<f64>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    /// Samples `f(x, y)` at every vertex position.
    pub fn from_fn(grid: UniformGrid2, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.ny())
            .flat_map(|j| (0..grid.nx()).map(move |i| (i, j)))
            .map(|(i, j)| {
                let (x, y) = grid.position(i, j);
                f(x, y)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: UniformGrid2, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &UniformGrid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index_unchecked(i, j)]
    }

    /// Exact minimum and maximum over all values.
    pub fn minmax(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Free-function form of [`ScalarField2::minmax`].
pub fn scalar_minmax(field: &ScalarField2) -> (f64, f64) {
    field.minmax()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    grid: UniformGrid2,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl VectorField2 {
    pub fn new(grid: UniformGrid2, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_values(&grid, &u)?;
        check_values(&grid, &v)?;
        Ok(Self { grid, u, v })
    }

    pub fn from_fn(grid: UniformGrid2, f: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        let mut u = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.position(i, j);
                let (a, b) = f(x, y);
                u.push(a);
                v.push(b);
            }
        }
        Self::new(grid, u, v)
    }

    pub fn zeros(grid: UniformGrid2) -> Self {
        Self {
            grid,
            u: vec![0.0; grid.len()],
            v: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &UniformGrid2 {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn into_parts(self) -> (UniformGrid2, Vec<f64>, Vec<f64>) {
        (self.grid, self.u, self.v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble2 {
    grid: UniformGrid2,
    members: Vec<VectorField2>,
}

impl Ensemble2 {
    pub fn new(members: Vec<VectorField2>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InsufficientEnsemble(members.len()));
        }
        let grid = *members[0].grid();
        if members.iter().any(|m| *m.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, members })
    }

    pub fn grid(&self) -> &UniformGrid2 {
        &self.grid
    }

    pub fn members(&self) -> &[VectorField2] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<VectorField2> {
        self.members
    }
}
