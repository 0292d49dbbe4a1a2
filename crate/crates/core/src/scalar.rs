//! Scalar abstraction: every solver, operator, and field in this crate is
//! generic over the floating-point type through the [`Real`] trait.
//!
//! `f32` lowers the memory footprint of large voxel grids; `f64` is the
//! default everywhere accuracy matters (all shipped tolerances assume f64).

use nalgebra::RealField;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating-point scalar usable for grids, spectra, and dense algebra.
///
/// The bound set is the union of what the FFT backend (`FftNum`), the dense
/// solvers (`RealField`), and plain numeric code (`Float` + const + casts)
/// require. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + FftNum + RealField + Default
{
    /// Converts an `f64` constant (tolerances, geometry parameters).
    ///
    /// Panics if the value is not representable, which cannot happen for the
    /// finite literals this crate feeds it.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 constant")
    }

    /// Converts a grid size or index.
    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("representable usize")
    }

    /// Converts an integer frequency component.
    #[inline]
    fn of_i64(k: i64) -> Self {
        <Self as FromPrimitive>::from_i64(k).expect("representable i64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
