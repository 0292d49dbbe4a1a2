//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inadmissible or malformed material data.
    #[error("material: {0}")]
    Material(String),

    /// Invalid geometry description (fractions, radii, ids).
    #[error("geometry: {0}")]
    Geometry(String),

    /// Voxel grid validation failure (ids out of range, admissibility).
    #[error("grid: {0}")]
    Grid(String),

    /// Malformed voxel file or report payload.
    #[error("format: {0}")]
    Format(String),

    /// Invalid solver or study configuration.
    #[error("config: {0}")]
    Config(String),

    /// Scheme cannot run on this grid (e.g. porous grids need the
    /// displacement-based scheme; the strain-based fixed points diverge).
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
