//! DIVUQ1 ensemble container.
//!
//! ```text
//! DIVUQ1 <nx> <ny> <dx> <dy> <n_members>\n
//! member 0: u plane, v plane
//! member 1: u plane, v plane
//! ...
//! ```
//!
//! Each plane is `nx * ny` little-endian IEEE-754 `f32` values in row-major
//! (`j * nx + i`) order. Gaussian models reuse the container: a file of
//! means and a file of standard deviations, one member each. Scalar fields
//! are stored in the u plane of a single member with a zero v plane.

use std::path::Path;

use crate::divergence::GaussianScalarField;
use crate::error::{Error, Result};
use crate::fit::GaussianVectorField;
use crate::grid::{Ensemble2, ScalarField2, UniformGrid2, VectorField2};

pub const MAGIC: &str = "DIVUQ1";

/// Longest header line accepted before giving up on finding the newline.
const MAX_HEADER: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleFileHeader {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub n_members: usize,
}

impl EnsembleFileHeader {
    pub fn grid(&self) -> Result<UniformGrid2> {
        UniformGrid2::new(self.nx, self.ny, self.dx, self.dy)
            .map_err(|e| Error::Format(format!("bad header geometry: {e}")))
    }

    pub fn to_line(&self) -> String {
        format!(
            "{MAGIC} {} {} {} {} {}\n",
            self.nx, self.ny, self.dx, self.dy, self.n_members
        )
    }

    pub fn payload_len(&self) -> usize {
        self.n_members * 2 * self.nx * self.ny * 4
    }

    fn parse(line: &str) -> Result<Self> {
        let mut tokens = line.split_ascii_whitespace();
        if tokens.next() != Some(MAGIC) {
            return Err(Error::Format(format!("missing {MAGIC} magic")));
        }
        let mut field = |name: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::Format(format!("header is missing {name}")))
        };
        let int = |name: &str, s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad {name} {s:?}")))
        };
        let real = |name: &str, s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("bad {name} {s:?}")))
        };
        let nx = int("nx", field("nx")?)?;
        let ny = int("ny", field("ny")?)?;
        let dx = real("dx", field("dx")?)?;
        let dy = real("dy", field("dy")?)?;
        let n_members = int("n_members", field("n_members")?)?;
        if tokens.next().is_some() {
            return Err(Error::Format("trailing tokens in header".into()));
        }
        if n_members < 1 {
            return Err(Error::Format("file must hold at least one member".into()));
        }
        let header = Self {
            nx,
            ny,
            dx,
            dy,
            n_members,
        };
        header.grid()?;
        Ok(header)
    }
}

/// Contents of a DIVUQ1 file: one or more members on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFile {
    pub grid: UniformGrid2,
    pub members: Vec<VectorField2>,
}

impl EnsembleFile {
    pub fn new(members: Vec<VectorField2>) -> Result<Self> {
        let grid = *members
            .first()
            .ok_or_else(|| Error::Data("no members to write".into()))?
            .grid();
        if members.iter().any(|m| *m.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, members })
    }

    pub fn header(&self) -> EnsembleFileHeader {
        EnsembleFileHeader {
            nx: self.grid.nx(),
            ny: self.grid.ny(),
            dx: self.grid.dx(),
            dy: self.grid.dy(),
            n_members: self.members.len(),
        }
    }

    pub fn into_ensemble(self) -> Result<Ensemble2> {
        Ensemble2::new(self.members)
    }

    fn single(self, what: &str) -> Result<VectorField2> {
        if self.members.len() != 1 {
            return Err(Error::Data(format!(
                "{what} file must hold exactly one member, found {}",
                self.members.len()
            )));
        }
        Ok(self.members.into_iter().next().expect("length checked"))
    }
}

impl From<&Ensemble2> for EnsembleFile {
    fn from(e: &Ensemble2) -> Self {
        Self {
            grid: *e.grid(),
            members: e.members().to_vec(),
        }
    }
}

pub fn encode(file: &EnsembleFile) -> Result<Vec<u8>> {
    let header = file.header();
    let line = header.to_line();
    let mut out = Vec::with_capacity(line.len() + header.payload_len());
    out.extend_from_slice(line.as_bytes());
    for member in &file.members {
        for plane in [member.u(), member.v()] {
            for &x in plane {
                let narrow = x as f32;
                if !narrow.is_finite() {
                    return Err(Error::Data(format!("value {x} does not fit in f32")));
                }
                out.extend_from_slice(&narrow.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<EnsembleFile> {
    let newline = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("no header line".into()))?;
    let line = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let header = EnsembleFileHeader::parse(line)?;
    let grid = header.grid()?;
    let payload = &bytes[newline + 1..];
    let expected = header.payload_len();
    if payload.len() < expected {
        return Err(Error::Length {
            expected,
            actual: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            payload.len() - expected
        )));
    }

    let plane_bytes = grid.len() * 4;
    let plane = |k: usize| -> Result<Vec<f64>> {
        payload[k * plane_bytes..(k + 1) * plane_bytes]
            .chunks_exact(4)
            .enumerate()
            .map(|(index, b)| {
                let x = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                if x.is_finite() {
                    Ok(f64::from(x))
                } else {
                    Err(Error::Data(format!(
                        "non-finite value in plane {k} at index {index}"
                    )))
                }
            })
            .collect()
    };
    let members = (0..header.n_members)
        .map(|m| VectorField2::new(grid, plane(2 * m)?, plane(2 * m + 1)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleFile { grid, members })
}

pub fn read_ensemble(path: &Path) -> Result<EnsembleFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_ensemble(file: &EnsembleFile, path: &Path) -> Result<()> {
    let bytes = encode(file)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_vector_field(field: &VectorField2, path: &Path) -> Result<()> {
    write_ensemble(&EnsembleFile::new(vec![field.clone()])?, path)
}

pub fn read_vector_field(path: &Path) -> Result<VectorField2> {
    read_ensemble(path)?.single("vector field")
}

pub fn write_scalar(field: &ScalarField2, path: &Path) -> Result<()> {
    let grid = *field.grid();
    let member = VectorField2::new(grid, field.values().to_vec(), vec![0.0; grid.len()])?;
    write_vector_field(&member, path)
}

pub fn read_scalar(path: &Path) -> Result<ScalarField2> {
    let (grid, u, _) = read_vector_field(path)?.into_parts();
    ScalarField2::new(grid, u)
}

pub fn write_model(model: &GaussianVectorField, mu_path: &Path, sigma_path: &Path) -> Result<()> {
    write_vector_field(&model.mean_field(), mu_path)?;
    write_vector_field(&model.sigma_field(), sigma_path)
}

pub fn read_model(mu_path: &Path, sigma_path: &Path) -> Result<GaussianVectorField> {
    let mean = read_vector_field(mu_path)?;
    let sigma = read_vector_field(sigma_path)?;
    GaussianVectorField::from_fields(&mean, &sigma).map_err(|e| match e {
        Error::NegativeSigma { index } => Error::Data(format!(
            "{}: negative standard deviation at index {index}",
            sigma_path.display()
        )),
        Error::GridMismatch => Error::Data("mean and sigma files have different grids".into()),
        other => other,
    })
}

pub fn write_gaussian_scalar(
    field: &GaussianScalarField,
    mu_path: &Path,
    sigma_path: &Path,
) -> Result<()> {
    write_scalar(&field.mu_field(), mu_path)?;
    write_scalar(&field.sigma_field(), sigma_path)
}

pub fn read_gaussian_scalar(mu_path: &Path, sigma_path: &Path) -> Result<GaussianScalarField> {
    let mu = read_scalar(mu_path)?;
    let sigma = read_scalar(sigma_path)?;
    if mu.grid() != sigma.grid() {
        return Err(Error::Data(
            "mean and sigma files have different grids".into(),
        ));
    }
    GaussianScalarField::new(*mu.grid(), mu.into_values(), sigma.into_values()).map_err(|e| match e
    {
        Error::NegativeSigma { index } => Error::Data(format!(
            "{}: negative standard deviation at index {index}",
            sigma_path.display()
        )),
        other => other,
    })
}
