//! 3-D FFT over the voxel lattice, built from batched 1-D transforms.
//!
//! The forward transform carries the 1/N^3 normalization (coefficient at
//! frequency 0 is the discrete mean); the inverse is the plain synthesis sum.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, Zero};
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;
use crate::spectral::{GridField, SpectralField};

/// Planned transforms for one resolution. Plan once, reuse for every field.
pub struct FftEngine<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> FftEngine<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "resolution {n} too small");
        if !n.is_power_of_two() {
            log::warn!("resolution {n} is not a power of two; FFTs will be slower");
        }
        let mut planner = FftPlanner::new();
        FftEngine {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place 3-D analysis transform with 1/N^3 normalization.
    pub fn fft3_forward(&self, buf: &mut [Complex<T>]) {
        self.fft3(buf, true);
        let scale = T::one() / T::of_usize(buf.len());
        for v in buf.iter_mut() {
            *v = *v * scale;
        }
    }

    /// In-place 3-D synthesis transform (no normalization).
    pub fn fft3_inverse(&self, buf: &mut [Complex<T>]) {
        self.fft3(buf, false);
    }

    fn fft3(&self, buf: &mut [Complex<T>], is_forward: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n * n * n, "buffer does not hold N^3 values");
        let fft = if is_forward {
            &self.forward
        } else {
            &self.inverse
        };
        let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];

        // axis 3 (fastest): contiguous lines, transformed chunk by chunk
        fft.process_with_scratch(buf, &mut scratch);

        // axis 2: stride n within each (i1, i3) pair
        let mut line = vec![Complex::zero(); n];
        for i1 in 0..n {
            for i3 in 0..n {
                let base = i1 * n * n + i3;
                for i2 in 0..n {
                    line[i2] = buf[base + i2 * n];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for i2 in 0..n {
                    buf[base + i2 * n] = line[i2];
                }
            }
        }

        // axis 1: stride n^2
        for i2 in 0..n {
            for i3 in 0..n {
                let base = i2 * n + i3;
                for i1 in 0..n {
                    line[i1] = buf[base + i1 * n * n];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for i1 in 0..n {
                    buf[base + i1 * n * n] = line[i1];
                }
            }
        }
    }

    /// Forward-transforms every component of a real field into `dst`
    /// (buffers reused; sizes must match).
    pub fn forward_into(&self, src: &GridField<T>, dst: &mut SpectralField<T>) {
        debug_assert_eq!(src.n(), self.n);
        debug_assert_eq!(src.ncomp(), dst.ncomp());
        for c in 0..src.ncomp() {
            let real = src.comp(c);
            let buf = dst.comp_mut(c);
            for (o, r) in buf.iter_mut().zip(real) {
                *o = Complex::new(*r, T::zero());
            }
            self.fft3_forward(buf);
        }
    }

    /// Inverse-transforms every component of `src` (in place, consuming its
    /// coefficient content) and stores real parts into `dst`.
    ///
    /// Returns the relative discarded imaginary norm
    /// ||Im||_2 / max(||Re||_2, tiny), the realness diagnostic logged by the
    /// iteration drivers.
    pub fn inverse_into(&self, src: &mut SpectralField<T>, dst: &mut GridField<T>) -> T {
        debug_assert_eq!(dst.n(), self.n);
        debug_assert_eq!(src.ncomp(), dst.ncomp());
        let mut im2 = T::zero();
        let mut re2 = T::zero();
        for c in 0..src.ncomp() {
            let buf = src.comp_mut(c);
            self.fft3_inverse(buf);
            let out = dst.comp_mut(c);
            for (o, v) in out.iter_mut().zip(buf.iter()) {
                *o = v.re;
                re2 += v.re * v.re;
                im2 += v.im * v.im;
            }
        }
        Float::sqrt(im2) / Float::max(Float::sqrt(re2), T::of(1e-300))
    }
}
