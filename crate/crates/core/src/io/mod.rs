//! File formats, CSV exports and synthetic data.

pub mod format;
pub mod synth;
pub mod tables;

pub use format::{
    read_ensemble, read_gaussian_scalar, read_model, read_scalar, read_vector_field,
    write_ensemble, write_gaussian_scalar, write_model, write_scalar, write_vector_field,
    EnsembleFile, EnsembleFileHeader,
};
pub use synth::{base_field, generate_synthetic, SyntheticKind};
