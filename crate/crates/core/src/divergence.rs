//! Divergence of deterministic fields and closed-form propagation of
//! independent Gaussian component uncertainty through it.
//!
//! At an interior vertex the divergence estimate
//!
//! ```text
//! D = (U[i+1,j] - U[i-1,j]) / 2dx + (V[i,j+1] - V[i,j-1]) / 2dy
//! ```
//!
//! is a linear combination of independent Gaussians, so it is Gaussian with
//!
//! ```text
//! mean     = (mu_u[i+1,j] - mu_u[i-1,j]) / 2dx + (mu_v[i,j+1] - mu_v[i,j-1]) / 2dy
//! variance = (s_u[i+1,j] / 2dx)^2 + (s_u[i-1,j] / 2dx)^2
//!          + (s_v[i,j+1] / 2dy)^2 + (s_v[i,j-1] / 2dy)^2
//! ```
//!
//! On the boundary the central difference along the affected axis is
//! replaced by a one-sided one, e.g. `(U[1,j] - U[0,j]) / dx` with variance
//! `(s_u[1,j]^2 + s_u[0,j]^2) / dx^2`. Corners are one-sided on both axes.

use crate::error::{Error, Result};
use crate::fit::GaussianVectorField;
use crate::grid::{check_values, ScalarField2, UniformGrid2, VectorField2};
use crate::parallel::{parallel_map, ParallelConfig};
use crate::stencil::{derivative, derivative_variance};

/// Per-vertex Gaussian distribution of a scalar quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianScalarField {
    grid: UniformGrid2,
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl GaussianScalarField {
    pub fn new(grid: UniformGrid2, mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        check_values(&grid, &mu)?;
        check_values(&grid, &sigma)?;
        if let Some(index) = sigma.iter().position(|&s| s < 0.0) {
            return Err(Error::NegativeSigma { index });
        }
        Ok(Self { grid, mu, sigma })
    }

    pub fn grid(&self) -> &UniformGrid2 {
        &self.grid
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn mu_field(&self) -> ScalarField2 {
        ScalarField2::new(self.grid, self.mu.clone()).expect("validated on construction")
    }

    pub fn sigma_field(&self) -> ScalarField2 {
        ScalarField2::new(self.grid, self.sigma.clone()).expect("validated on construction")
    }
}

/// Divergence at vertex `(i, j)`. `u` and `v` hold whole rows starting at
/// grid row `row0`.
#[inline(always)]
pub(crate) fn divergence_at(
    grid: &UniformGrid2,
    u: &[f64],
    v: &[f64],
    i: usize,
    j: usize,
    row0: usize,
) -> f64 {
    let nx = grid.nx();
    let du = derivative(nx, grid.dx(), i, |k| u[(j - row0) * nx + k]);
    let dv = derivative(grid.ny(), grid.dy(), j, |k| v[(k - row0) * nx + i]);
    du + dv
}

/// Variance of the divergence at `(i, j)` for independent Gaussian components.
#[inline(always)]
fn divergence_variance_at(
    grid: &UniformGrid2,
    sigma_u: &[f64],
    sigma_v: &[f64],
    i: usize,
    j: usize,
) -> f64 {
    let nx = grid.nx();
    let vu = derivative_variance(nx, grid.dx(), i, |k| sigma_u[j * nx + k]);
    let vv = derivative_variance(grid.ny(), grid.dy(), j, |k| sigma_v[k * nx + i]);
    vu + vv
}

pub fn divergence_deterministic(field: &VectorField2) -> ScalarField2 {
    divergence_deterministic_with(field, &ParallelConfig::default())
}

pub fn divergence_deterministic_with(
    field: &VectorField2,
    config: &ParallelConfig,
) -> ScalarField2 {
    let grid = *field.grid();
    let nx = grid.nx();
    let values = parallel_map(grid.len(), config, |k| {
        divergence_at(&grid, field.u(), field.v(), k % nx, k / nx, 0)
    });
    ScalarField2::new(grid, values).expect("divergence of finite data is finite")
}

/// Closed-form divergence distribution at every vertex.
pub fn propagate_divergence(model: &GaussianVectorField) -> GaussianScalarField {
    propagate_divergence_with(model, &ParallelConfig::default())
}

pub fn propagate_divergence_with(
    model: &GaussianVectorField,
    config: &ParallelConfig,
) -> GaussianScalarField {
    let grid = *model.grid();
    let nx = grid.nx();
    let pairs = parallel_map(grid.len(), config, |k| {
        let (i, j) = (k % nx, k / nx);
        let mu = divergence_at(&grid, model.mu_u(), model.mu_v(), i, j, 0);
        let var = divergence_variance_at(&grid, model.sigma_u(), model.sigma_v(), i, j);
        (mu, var.sqrt())
    });
    let (mu, sigma) = pairs.into_iter().unzip();
    GaussianScalarField { grid, mu, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> UniformGrid2 {
        UniformGrid2::unit(nx, ny).unwrap()
    }

    /// Independent double-loop stencil, written out case by case.
    fn brute_force_divergence(f: &VectorField2) -> Vec<f64> {
        let g = f.grid();
        let (nx, ny, dx, dy) = (g.nx(), g.ny(), g.dx(), g.dy());
        let u = |i: usize, j: usize| f.u()[j * nx + i];
        let v = |i: usize, j: usize| f.v()[j * nx + i];
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let ux = if i == 0 {
                    (u(1, j) - u(0, j)) / dx
                } else if i == nx - 1 {
                    (u(nx - 1, j) - u(nx - 2, j)) / dx
                } else {
                    (u(i + 1, j) - u(i - 1, j)) / (2.0 * dx)
                };
                let vy = if j == 0 {
                    (v(i, 1) - v(i, 0)) / dy
                } else if j == ny - 1 {
                    (v(i, ny - 1) - v(i, ny - 2)) / dy
                } else {
                    (v(i, j + 1) - v(i, j - 1)) / (2.0 * dy)
                };
                out[j * nx + i] = ux + vy;
            }
        }
        out
    }

    #[test]
    fn expansion_field_has_divergence_two() {
        let g = UniformGrid2::new(7, 5, 0.5, 0.25).unwrap();
        let f = VectorField2::from_fn(g, |x, y| (x, y)).unwrap();
        assert!(divergence_deterministic(&f)
            .values()
            .iter()
            .all(|&d| d == 2.0));
    }

    #[test]
    fn rotation_is_divergence_free() {
        let g = grid(9, 6);
        let f = VectorField2::from_fn(g, |x, y| (-y, x)).unwrap();
        assert!(divergence_deterministic(&f)
            .values()
            .iter()
            .all(|&d| d == 0.0));
    }

    #[test]
    fn matches_brute_force_bit_for_bit() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &(nx, ny) in &[(2, 2), (2, 7), (13, 3), (31, 17)] {
            let g = UniformGrid2::new(nx, ny, 0.37, 1.9).unwrap();
            let u: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
            let v: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-5.0..5.0)).collect();
            let f = VectorField2::new(g, u, v).unwrap();
            let got: Vec<u64> = divergence_deterministic(&f)
                .values()
                .iter()
                .map(|x| x.to_bits())
                .collect();
            let want: Vec<u64> = brute_force_divergence(&f)
                .iter()
                .map(|x| x.to_bits())
                .collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn zero_sigma_gives_deterministic_divergence() {
        let g = grid(6, 5);
        let mean = VectorField2::from_fn(g, |x, y| (x * x - y, x * y)).unwrap();
        let model = GaussianVectorField::new(
            g,
            mean.u().to_vec(),
            mean.v().to_vec(),
            vec![0.0; g.len()],
            vec![0.0; g.len()],
        )
        .unwrap();
        let out = propagate_divergence(&model);
        assert!(out.sigma().iter().all(|&s| s == 0.0));
        assert_eq!(out.mu(), divergence_deterministic(&mean).values());
    }

    #[test]
    fn uniform_sigma_interior_is_sigma_over_h() {
        for &(h, s) in &[(1.0, 0.3), (0.5, 1.2), (2.0, 0.7)] {
            let g = UniformGrid2::new(5, 5, h, h).unwrap();
            let n = g.len();
            let model =
                GaussianVectorField::new(g, vec![0.0; n], vec![0.0; n], vec![s; n], vec![s; n])
                    .unwrap();
            let out = propagate_divergence(&model);
            let k = g.vertex_index(2, 2).unwrap();
            assert!((out.sigma()[k] - s / h).abs() < 1e-14);
            // Corner: two one-sided pairs, each contributing 2 s^2 / h^2.
            assert!((out.sigma()[0] - 2.0 * s / h).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_variance_uses_one_sided_pairs() {
        let g = UniformGrid2::new(3, 3, 0.5, 2.0).unwrap();
        let n = g.len();
        let su: Vec<f64> = (0..n).map(|k| 0.1 * (k + 1) as f64).collect();
        let sv: Vec<f64> = (0..n).map(|k| 0.05 * (k + 2) as f64).collect();
        let model = GaussianVectorField::new(g, vec![0.0; n], vec![0.0; n], su.clone(), sv.clone())
            .unwrap();
        let out = propagate_divergence(&model);
        // vertex (0, 1): forward in x, central in y
        let k = g.vertex_index(0, 1).unwrap();
        let vx = (su[4].powi(2) + su[3].powi(2)) / 0.25;
        let vy = (sv[6] / 4.0).powi(2) + (sv[0] / 4.0).powi(2);
        assert!((out.sigma()[k] - (vx + vy).sqrt()).abs() < 1e-14);
    }
}
