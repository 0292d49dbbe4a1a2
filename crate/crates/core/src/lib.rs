//! FFT-based periodic homogenization for linear elasticity on voxel grids.
//!
//! Everything is generic over the scalar through [`scalar::Real`] (`f32` or
//! `f64`); the `*64` aliases below fix the double-precision instantiations
//! that the command-line tools and all shipped tolerances assume.

pub mod analysis;
pub mod error;
pub mod micro;
pub mod oracle;
pub mod scalar;
pub mod scheme;
pub mod spectral;
pub mod tensor;

pub use analysis::{
    emit_report, fit_loglog_slope, richardson_extrapolate, strain_error_study, sweep, RateStudy,
    ReferenceMode, ReportFormat, StudyKind, StudyOptions,
};
pub use error::{Error, Result};
pub use micro::{Geometry, Material, VoxelGrid};
pub use oracle::{
    dense_solve_fem, dense_solve_ms, dense_solve_willot, laminate_effective, voigt_reuss_bounds,
};
pub use scalar::Real;
pub use scheme::{
    effective_tensor, run_scheme, EffectiveTensor, Reference, Scheme, SchemeConfig, SolveResult,
};
pub use spectral::{fft::FftEngine, GridField, SpectralField};
pub use tensor::{LameParams, StiffnessTensor, SymMat};

pub type SymMat64 = SymMat<f64>;
pub type LameParams64 = LameParams<f64>;
pub type StiffnessTensor64 = StiffnessTensor<f64>;
pub type VoxelGrid64 = VoxelGrid<f64>;
pub type GridField64 = GridField<f64>;
pub type SchemeConfig64 = SchemeConfig<f64>;
pub type SolveResult64 = SolveResult<f64>;
pub type EffectiveTensor64 = EffectiveTensor<f64>;
pub type RateStudy64 = RateStudy<f64>;
