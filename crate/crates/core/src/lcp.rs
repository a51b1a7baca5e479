//! Level-crossing probability for cells with independent Gaussian vertices.
//!
//! With `p_k = P(X_k <= theta)` at the four corners of a cell, the isocontour
//! misses the cell only when every corner lies on the same side, so
//!
//! ```text
//! LCP = 1 - (prod p_k + prod (1 - p_k))
//! ```
//!
//! A corner with zero spread contributes a step: `p_k = 1` when
//! `mu_k <= theta`, else `0`.

use std::f64::consts::FRAC_1_SQRT_2;

use libm::erfc;

use crate::divergence::GaussianScalarField;
use crate::grid::UniformGrid2;
use crate::parallel::{parallel_map, ParallelConfig};

/// Standard normal CDF via `Phi(x) = erfc(-x / sqrt 2) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `(P(X <= theta), P(X > theta))` for `X ~ N(mu, sigma^2)`. Both tails are
/// evaluated directly so neither loses precision to `1 - p`.
#[inline]
pub fn side_probabilities(mu: f64, sigma: f64, theta: f64) -> (f64, f64) {
    if sigma == 0.0 {
        if mu <= theta {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let z = (theta - mu) / sigma;
        (normal_cdf(z), normal_cdf(-z))
    }
}

/// Crossing probability of one cell given its four corner distributions.
pub fn cell_crossing_probability(corners: [(f64, f64); 4], theta: f64) -> f64 {
    let mut below = 1.0;
    let mut above = 1.0;
    for (mu, sigma) in corners {
        let (p, q) = side_probabilities(mu, sigma, theta);
        below *= p;
        above *= q;
    }
    // The sum is commutative, which keeps the result exactly symmetric
    // under negating both the field and the isovalue.
    (1.0 - (below + above)).clamp(0.0, 1.0)
}

/// Per-cell crossing probabilities, indexed `j * (nx - 1) + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcpField {
    pub grid: UniformGrid2,
    pub isovalue: f64,
    pub probabilities: Vec<f64>,
}

impl LcpField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.probabilities[j * self.grid.cells_x() + i]
    }

    pub fn max(&self) -> f64 {
        self.probabilities.iter().copied().fold(0.0, f64::max)
    }
}

pub fn lcp(field: &GaussianScalarField, isovalue: f64) -> LcpField {
    lcp_with(field, isovalue, &ParallelConfig::default())
}

pub fn lcp_with(field: &GaussianScalarField, isovalue: f64, config: &ParallelConfig) -> LcpField {
    let grid = *field.grid();
    let (nx, cx) = (grid.nx(), grid.cells_x());
    let (mu, sigma) = (field.mu(), field.sigma());
    let probabilities = parallel_map(grid.cell_count(), config, |c| {
        let (i, j) = (c % cx, c / cx);
        let k = [
            j * nx + i,
            j * nx + i + 1,
            (j + 1) * nx + i + 1,
            (j + 1) * nx + i,
        ];
        cell_crossing_probability(k.map(|k| (mu[k], sigma[k])), isovalue)
    });
    LcpField {
        grid,
        isovalue,
        probabilities,
    }
}
