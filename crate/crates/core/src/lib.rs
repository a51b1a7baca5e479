//! Uncertainty of the divergence of 2D vector-field ensembles.
//!
//! The pipeline fits an independent Gaussian per vertex and component
//! ([`fit`]), propagates it in closed form through the finite-difference
//! divergence ([`divergence`]), and turns the resulting per-vertex Gaussians
//! into level-crossing probabilities ([`lcp`]) for rendering ([`render`]).
//! [`mc`] is the sampling-based reference the closed form is checked against.

pub mod cli;
pub mod contour;
pub mod divergence;
pub mod error;
pub mod fit;
pub mod grid;
pub mod io;
pub mod lcp;
pub mod mc;
pub mod parallel;
pub mod render;
pub mod rng;
mod stencil;

pub use contour::{marching_squares, ContourSet};
pub use divergence::{
    divergence_deterministic, divergence_deterministic_with, propagate_divergence,
    propagate_divergence_with, GaussianScalarField,
};
pub use error::{Error, Result};
pub use fit::{
    fit_gaussian, fit_gaussian_with, gradient, gradient_ensemble, velocity_magnitude,
    GaussianVectorField,
};
pub use grid::{scalar_minmax, Ensemble2, ScalarField2, UniformGrid2, VectorField2};
pub use lcp::{lcp, lcp_with, LcpField};
pub use mc::{
    error_metrics, mc_divergence, mc_divergence_with, mc_histogram_1d, ErrorMetrics, McConfig,
    McDivergenceEstimate, McHistogram, Normal, StencilNeighbors,
};
pub use parallel::{bench, parallel_map, try_parallel_map, BenchReport, ParallelConfig, Threads};
pub use render::{overlay_contours, render_colormap, Colormap, Rgb, RgbRaster};
