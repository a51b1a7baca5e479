//! Per-vertex independent Gaussian model of an ensemble, and the
//! magnitude-gradient preprocessing applied to each member.

use crate::error::{Error, Result};
use crate::grid::{check_values, Ensemble2, ScalarField2, UniformGrid2, VectorField2};
use crate::parallel::{parallel_map, ParallelConfig};
use crate::stencil::derivative;

/// Mean and standard deviation of each vector component at every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVectorField {
    grid: UniformGrid2,
    mu_u: Vec<f64>,
    mu_v: Vec<f64>,
    sigma_u: Vec<f64>,
    sigma_v: Vec<f64>,
}

impl GaussianVectorField {
    pub fn new(
        grid: UniformGrid2,
        mu_u: Vec<f64>,
        mu_v: Vec<f64>,
        sigma_u: Vec<f64>,
        sigma_v: Vec<f64>,
    ) -> Result<Self> {
        for values in [&mu_u, &mu_v, &sigma_u, &sigma_v] {
            check_values(&grid, values)?;
        }
        for sigma in [&sigma_u, &sigma_v] {
            if let Some(index) = sigma.iter().position(|&s| s < 0.0) {
                return Err(Error::NegativeSigma { index });
            }
        }
        Ok(Self {
            grid,
            mu_u,
            mu_v,
            sigma_u,
            sigma_v,
        })
    }

    /// Builds a model from a mean field and a field of standard deviations.
    pub fn from_fields(mean: &VectorField2, sigma: &VectorField2) -> Result<Self> {
        if mean.grid() != sigma.grid() {
            return Err(Error::GridMismatch);
        }
        Self::new(
            *mean.grid(),
            mean.u().to_vec(),
            mean.v().to_vec(),
            sigma.u().to_vec(),
            sigma.v().to_vec(),
        )
    }

    pub fn grid(&self) -> &UniformGrid2 {
        &self.grid
    }

    pub fn mu_u(&self) -> &[f64] {
        &self.mu_u
    }

    pub fn mu_v(&self) -> &[f64] {
        &self.mu_v
    }

    pub fn sigma_u(&self) -> &[f64] {
        &self.sigma_u
    }

    pub fn sigma_v(&self) -> &[f64] {
        &self.sigma_v
    }

    pub fn mean_field(&self) -> VectorField2 {
        VectorField2::new(self.grid, self.mu_u.clone(), self.mu_v.clone())
            .expect("validated on construction")
    }

    pub fn sigma_field(&self) -> VectorField2 {
        VectorField2::new(self.grid, self.sigma_u.clone(), self.sigma_v.clone())
            .expect("validated on construction")
    }
}

/// Sample mean and Bessel-corrected sample standard deviation.
///
/// Values are sorted before accumulation so the result does not depend on
/// member order, and identical values give exactly that value with zero
/// spread.
fn sample_stats(values: &mut [f64]) -> (f64, f64) {
    values.sort_unstable_by(f64::total_cmp);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (values.len() - 1) as f64;
    (mean, var.max(0.0).sqrt())
}

pub fn fit_gaussian(ensemble: &Ensemble2) -> Result<GaussianVectorField> {
    fit_gaussian_with(ensemble, &ParallelConfig::default())
}

pub fn fit_gaussian_with(
    ensemble: &Ensemble2,
    config: &ParallelConfig,
) -> Result<GaussianVectorField> {
    let members = ensemble.members();
    if members.len() < 2 {
        return Err(Error::InsufficientEnsemble(members.len()));
    }
    let grid = *ensemble.grid();
    let stats = parallel_map(grid.len(), config, |k| {
        let mut u: Vec<f64> = members.iter().map(|m| m.u()[k]).collect();
        let mut v: Vec<f64> = members.iter().map(|m| m.v()[k]).collect();
        (sample_stats(&mut u), sample_stats(&mut v))
    });
    let mut mu_u = Vec::with_capacity(grid.len());
    let mut mu_v = Vec::with_capacity(grid.len());
    let mut sigma_u = Vec::with_capacity(grid.len());
    let mut sigma_v = Vec::with_capacity(grid.len());
    for ((mu, su), (mv, sv)) in stats {
        mu_u.push(mu);
        sigma_u.push(su);
        mu_v.push(mv);
        sigma_v.push(sv);
    }
    GaussianVectorField::new(grid, mu_u, mu_v, sigma_u, sigma_v)
}

pub fn velocity_magnitude(member: &VectorField2) -> ScalarField2 {
    let values = member
        .u()
        .iter()
        .zip(member.v())
        .map(|(&u, &v)| (u * u + v * v).sqrt())
        .collect();
    ScalarField2::new(*member.grid(), values).expect("magnitude of finite data is finite")
}

/// Central differences inside, one-sided differences on the boundary.
pub fn gradient(field: &ScalarField2) -> VectorField2 {
    let grid = *field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let s = field.values();
    let mut gx = Vec::with_capacity(grid.len());
    let mut gy = Vec::with_capacity(grid.len());
    for j in 0..ny {
        for i in 0..nx {
            gx.push(derivative(nx, grid.dx(), i, |k| s[j * nx + k]));
            gy.push(derivative(ny, grid.dy(), j, |k| s[k * nx + i]));
        }
    }
    VectorField2::new(grid, gx, gy).expect("gradient of finite data is finite")
}

/// Replaces every member by the gradient of its velocity magnitude.
pub fn gradient_ensemble(ensemble: &Ensemble2) -> Result<Ensemble2> {
    let members = ensemble
        .members()
        .iter()
        .map(|m| gradient(&velocity_magnitude(m)))
        .collect();
    Ensemble2::new(members)
}
