//! Synthetic ensembles standing in for measured wind and ocean data.
//!
//! Each member is a deterministic base flow plus i.i.d. Gaussian noise per
//! vertex and component. The noise for (vertex `k`, member `m`) is draw `m`
//! of counter stream `(seed, k)`, so ensembles are reproducible and a member
//! does not depend on how many members were requested.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Ensemble2, UniformGrid2, VectorField2};
use crate::rng::NormalStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Gaussian-windowed source on the left third, sink on the right third.
    SourceSink,
    /// Gaussian-windowed solid-body rotation about the centre.
    Vortex,
    /// Source-sink pair plus an off-centre vortex and a uniform drift.
    WindLike,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 3] = [Self::SourceSink, Self::Vortex, Self::WindLike];

    pub fn name(&self) -> &'static str {
        match self {
            Self::SourceSink => "source-sink",
            Self::Vortex => "vortex",
            Self::WindLike => "wind-like",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown synthetic kind {s:?}")))
    }
}

/// Geometry of the base flows in world units.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub width: f64,
    pub height: f64,
    pub radius: f64,
}

impl Layout {
    pub fn of(grid: &UniformGrid2) -> Self {
        let (width, height) = grid.extent();
        Self {
            width,
            height,
            radius: width.min(height) / 6.0,
        }
    }

    pub fn source_centre(&self) -> (f64, f64) {
        (self.width / 3.0, self.height / 2.0)
    }

    pub fn sink_centre(&self) -> (f64, f64) {
        (2.0 * self.width / 3.0, self.height / 2.0)
    }

    pub fn centre(&self) -> (f64, f64) {
        (self.width / 2.0, self.height / 2.0)
    }
}

fn window(dx: f64, dy: f64, radius: f64) -> f64 {
    (-(dx * dx + dy * dy) / (2.0 * radius * radius)).exp()
}

fn radial(x: f64, y: f64, (cx, cy): (f64, f64), radius: f64) -> (f64, f64) {
    let (dx, dy) = (x - cx, y - cy);
    let g = window(dx, dy, radius);
    (dx * g, dy * g)
}

fn swirl(x: f64, y: f64, (cx, cy): (f64, f64), radius: f64) -> (f64, f64) {
    let (dx, dy) = (x - cx, y - cy);
    let g = window(dx, dy, radius);
    (-dy * g, dx * g)
}

/// Noise-free flow of the given kind.
pub fn base_field(kind: SyntheticKind, grid: &UniformGrid2) -> Result<VectorField2> {
    let l = Layout::of(grid);
    VectorField2::from_fn(*grid, |x, y| {
        let source = radial(x, y, l.source_centre(), l.radius);
        let sink = radial(x, y, l.sink_centre(), l.radius);
        match kind {
            SyntheticKind::SourceSink => (source.0 - sink.0, source.1 - sink.1),
            SyntheticKind::Vortex => swirl(x, y, l.centre(), l.radius),
            SyntheticKind::WindLike => {
                let eddy_centre = (l.width / 2.0, 0.75 * l.height);
                let eddy = swirl(x, y, eddy_centre, 0.75 * l.radius);
                (
                    3.0 * (source.0 - sink.0) + 2.0 * eddy.0 + 1.5,
                    3.0 * (source.1 - sink.1) + 2.0 * eddy.1 + 0.5,
                )
            }
        }
    })
}

pub fn generate_synthetic(
    kind: SyntheticKind,
    grid: UniformGrid2,
    n_members: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Ensemble2> {
    if n_members < 2 {
        return Err(Error::InsufficientEnsemble(n_members));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::Config(format!(
            "noise sigma must be finite and non-negative, got {noise_sigma}"
        )));
    }
    let base = base_field(kind, &grid)?;
    let streams: Vec<NormalStream> = (0..grid.len())
        .map(|k| NormalStream::new(seed, k as u64))
        .collect();
    let members = (0..n_members)
        .map(|m| {
            let (u, v) = streams
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let (zu, zv) = s.pair(m as u64);
                    (
                        base.u()[k] + noise_sigma * zu,
                        base.v()[k] + noise_sigma * zv,
                    )
                })
                .unzip();
            VectorField2::new(grid, u, v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble2::new(members)
}
