//! Monte Carlo estimate of the divergence distribution.
//!
//! Each sample draws every vertex component independently from its Gaussian,
//! evaluates the same finite-difference divergence used everywhere else, and
//! feeds the result into a per-vertex running mean/variance (Welford). The
//! draw for (vertex, component, sample) comes from a counter-based stream, so
//! the estimate is bit-identical under any thread count or partitioning.

use crate::divergence::{divergence_at, GaussianScalarField};
use crate::error::{Error, Result};
use crate::fit::GaussianVectorField;
use crate::grid::UniformGrid2;
use crate::parallel::{parallel_map, ParallelConfig};
use crate::rng::NormalStream;
use crate::stencil::{derivative, derivative_variance};

/// Rows per work item. Each item redraws one halo row on either side.
const BAND_ROWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    n_samples: u64,
    seed: u64,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        Ok(Self { n_samples, seed })
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McDivergenceEstimate {
    pub grid: UniformGrid2,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub n_samples: u64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Welford {
    mean: f64,
    m2: f64,
}

impl Welford {
    #[inline(always)]
    fn push(&mut self, x: f64, count: u64) {
        let delta = x - self.mean;
        self.mean += delta / count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn std(&self, n: u64) -> f64 {
        (self.m2 / (n - 1) as f64).max(0.0).sqrt()
    }
}

pub fn mc_divergence(
    model: &GaussianVectorField,
    config: &McConfig,
) -> Result<McDivergenceEstimate> {
    mc_divergence_with(model, config, &ParallelConfig::default())
}

pub fn mc_divergence_with(
    model: &GaussianVectorField,
    config: &McConfig,
    parallel: &ParallelConfig,
) -> Result<McDivergenceEstimate> {
    let n = config.n_samples;
    if n < 2 {
        return Err(Error::Config(format!(
            "Monte Carlo estimate needs at least 2 samples, got {n}"
        )));
    }
    let grid = *model.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let n_bands = ny.div_ceil(BAND_ROWS);

    let bands = parallel_map(n_bands, parallel, |band| {
        let row0 = band * BAND_ROWS;
        let row1 = (row0 + BAND_ROWS).min(ny);
        let lo = row0.saturating_sub(1);
        let hi = (row1 + 1).min(ny);
        let span = lo * nx..hi * nx;

        let streams: Vec<NormalStream> = span
            .clone()
            .map(|k| NormalStream::new(config.seed, k as u64))
            .collect();
        let (mu_u, mu_v) = (&model.mu_u()[span.clone()], &model.mu_v()[span.clone()]);
        let (sd_u, sd_v) = (&model.sigma_u()[span.clone()], &model.sigma_v()[span]);

        let mut u = vec![0.0; streams.len()];
        let mut v = vec![0.0; streams.len()];
        let mut acc = vec![Welford::default(); (row1 - row0) * nx];
        for s in 0..n {
            for (k, stream) in streams.iter().enumerate() {
                let (zu, zv) = stream.pair(s);
                u[k] = mu_u[k] + sd_u[k] * zu;
                v[k] = mu_v[k] + sd_v[k] * zv;
            }
            let mut a = acc.iter_mut();
            for j in row0..row1 {
                for i in 0..nx {
                    let d = divergence_at(&grid, &u, &v, i, j, lo);
                    a.next().expect("sized to band").push(d, s + 1);
                }
            }
        }
        acc
    });

    let mut mean = Vec::with_capacity(grid.len());
    let mut std = Vec::with_capacity(grid.len());
    for w in bands.into_iter().flatten() {
        mean.push(w.mean);
        std.push(w.std(n));
    }
    Ok(McDivergenceEstimate {
        grid,
        mean,
        std,
        n_samples: n,
    })
}

/// A Gaussian `(mu, sigma)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub mu: f64,
    pub sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Self { mu, sigma }
    }
}

/// The four neighbour distributions feeding the central-difference divergence
/// at a single interior vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilNeighbors {
    /// `U` at `(i - 1, j)`
    pub u_im: Normal,
    /// `U` at `(i + 1, j)`
    pub u_ip: Normal,
    /// `V` at `(i, j - 1)`
    pub v_jm: Normal,
    /// `V` at `(i, j + 1)`
    pub v_jp: Normal,
}

impl StencilNeighbors {
    fn as_array(&self) -> [Normal; 4] {
        [self.u_im, self.u_ip, self.v_jm, self.v_jp]
    }

    fn check(&self) -> Result<()> {
        for n in self.as_array() {
            if !(n.mu.is_finite() && n.sigma.is_finite()) {
                return Err(Error::Config("neighbour parameters must be finite".into()));
            }
            if n.sigma < 0.0 {
                return Err(Error::Config("neighbour sigma must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Divergence from concrete neighbour values, same arithmetic as the grid
    /// stencil.
    #[inline(always)]
    fn divergence(values: [f64; 4], (dx, dy): (f64, f64)) -> f64 {
        let [uim, uip, vjm, vjp] = values;
        let du = derivative(3, dx, 1, |k| if k == 0 { uim } else { uip });
        let dv = derivative(3, dy, 1, |k| if k == 0 { vjm } else { vjp });
        du + dv
    }

    /// Closed-form divergence distribution at the centre vertex.
    pub fn analytic(&self, (dx, dy): (f64, f64)) -> Normal {
        let mu = Self::divergence(
            [self.u_im.mu, self.u_ip.mu, self.v_jm.mu, self.v_jp.mu],
            (dx, dy),
        );
        let vx = derivative_variance(3, dx, 1, |k| {
            if k == 0 {
                self.u_im.sigma
            } else {
                self.u_ip.sigma
            }
        });
        let vy = derivative_variance(3, dy, 1, |k| {
            if k == 0 {
                self.v_jm.sigma
            } else {
                self.v_jp.sigma
            }
        });
        Normal::new(mu, (vx + vy).sqrt())
    }
}

/// Draws `n_samples` divergence values at a single vertex. Neighbour `k`
/// (in `u_im, u_ip, v_jm, v_jp` order) uses stream `k`.
pub fn sample_stencil_divergence(
    neighbors: &StencilNeighbors,
    spacing: (f64, f64),
    config: &McConfig,
) -> Result<Vec<f64>> {
    neighbors.check()?;
    check_spacing(spacing)?;
    let params = neighbors.as_array();
    let streams: [NormalStream; 4] =
        std::array::from_fn(|k| NormalStream::new(config.seed, k as u64));
    Ok((0..config.n_samples)
        .map(|s| {
            let values =
                std::array::from_fn(|k| params[k].mu + params[k].sigma * streams[k].pair(s).0);
            StencilNeighbors::divergence(values, spacing)
        })
        .collect())
}

fn check_spacing((dx, dy): (f64, f64)) -> Result<()> {
    if dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "spacing must be positive, got ({dx}, {dy})"
        )))
    }
}

/// Sample mean and Bessel-corrected standard deviation of `samples`.
pub fn sample_moments(samples: &[f64]) -> (f64, f64) {
    let mut w = Welford::default();
    for (k, &x) in samples.iter().enumerate() {
        w.push(x, k as u64 + 1);
    }
    let n = samples.len() as u64;
    (w.mean, if n >= 2 { w.std(n) } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct McHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: u64,
}

impl McHistogram {
    /// Uniform bins over `[min, max]` of the data. When every value is equal
    /// the result is a single unit-width bin centred on that value.
    pub fn from_samples(samples: &[f64], n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::Config("histogram needs at least one bin".into()));
        }
        if samples.is_empty() {
            return Err(Error::Config("histogram needs at least one sample".into()));
        }
        let (lo, hi) = samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        let n_samples = samples.len() as u64;
        if lo == hi {
            return Ok(Self {
                bin_edges: vec![lo - 0.5, lo + 0.5],
                counts: vec![n_samples],
                n_samples,
            });
        }
        let width = (hi - lo) / n_bins as f64;
        let mut bin_edges: Vec<f64> = (0..n_bins).map(|k| lo + k as f64 * width).collect();
        bin_edges.push(hi);
        let mut counts = vec![0u64; n_bins];
        for &x in samples {
            let b = (((x - lo) / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
        Ok(Self {
            bin_edges,
            counts,
            n_samples,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Fraction of samples in each bin.
    pub fn fractions(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n_samples as f64)
            .collect()
    }

    /// Probability density estimate per bin (integrates to one).
    pub fn densities(&self) -> Vec<f64> {
        self.fractions()
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(f, e)| f / (e[1] - e[0]))
            .collect()
    }

    /// Probability mass of `normal` inside each bin.
    pub fn normal_bin_mass(&self, normal: Normal) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|e| {
                if normal.sigma == 0.0 {
                    f64::from(u8::from(e[0] <= normal.mu && normal.mu < e[1]))
                } else {
                    crate::lcp::normal_cdf((e[1] - normal.mu) / normal.sigma)
                        - crate::lcp::normal_cdf((e[0] - normal.mu) / normal.sigma)
                }
            })
            .collect()
    }

    /// L1 distance between the normalised histogram and `normal` integrated
    /// over each bin.
    pub fn l1_distance(&self, normal: Normal) -> f64 {
        self.fractions()
            .iter()
            .zip(self.normal_bin_mass(normal))
            .map(|(f, p)| (f - p).abs())
            .sum()
    }
}

pub fn mc_histogram_1d(
    neighbors: &StencilNeighbors,
    spacing: (f64, f64),
    config: &McConfig,
    n_bins: usize,
) -> Result<McHistogram> {
    let samples = sample_stencil_divergence(neighbors, spacing, config)?;
    McHistogram::from_samples(&samples, n_bins)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// Mean absolute error of the empirical mean.
    pub e_m: f64,
    /// Mean absolute error of the empirical standard deviation.
    pub e_sigma: f64,
    /// Sum over vertices of squared mean and std errors.
    pub sse: f64,
}

pub fn error_metrics(
    estimate: &McDivergenceEstimate,
    analytic: &GaussianScalarField,
) -> Result<ErrorMetrics> {
    if estimate.grid != *analytic.grid()
        || estimate.mean.len() != analytic.mu().len()
        || estimate.std.len() != analytic.sigma().len()
    {
        return Err(Error::GridMismatch);
    }
    let n = estimate.mean.len() as f64;
    let mut e_m = 0.0;
    let mut e_sigma = 0.0;
    let mut sse = 0.0;
    for k in 0..estimate.mean.len() {
        let dm = estimate.mean[k] - analytic.mu()[k];
        let ds = estimate.std[k] - analytic.sigma()[k];
        e_m += dm.abs();
        e_sigma += ds.abs();
        sse += dm * dm + ds * ds;
    }
    Ok(ErrorMetrics {
        e_m: e_m / n,
        e_sigma: e_sigma / n,
        sse,
    })
}
