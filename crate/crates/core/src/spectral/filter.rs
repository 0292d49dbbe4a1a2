//! The voxel averaging filter in Fourier space and the operators built on
//! it: coefficient recovery from cell averages (exact on bandlimited
//! trigonometric polynomials) and the double-filter smoothing multiplier.

use num_complex::Complex;
use num_traits::Float;

use crate::scalar::Real;
use crate::spectral::fft::FftEngine;
use crate::spectral::{index_to_freq, GridField, SpectralField};

/// Fourier multiplier of the cell-averaging filter:
/// product over axes of sin(pi xi_m / N) / (pi xi_m / N), each factor 1 when
/// xi_m = 0. Lies in [(2/pi)^3, 1] on F_N.
pub fn g_hat<T: Real>(xi: [i64; 3], n: usize) -> T {
    let mut g = T::one();
    for &x in &xi {
        if x != 0 {
            let t = T::PI() * T::of_i64(x) / T::of_usize(n);
            g *= Float::sin(t) / t;
        }
    }
    g
}

/// Recovers trigonometric-polynomial coefficients from cell averages:
/// c[xi] = ghat^{-1}[xi] * exp(-pi i (xi1+xi2+xi3)/N) * fhat[xi],
/// where fhat is the DFT of the cell-average lattice.
///
/// If the averaged function is itself a polynomial over F_N, the exact
/// coefficients come back; in general the result is a bounded quasi-
/// interpolant (operator norm (pi/2)^3 on L2).
pub fn apply_qn<T: Real>(engine: &FftEngine<T>, cell_averages: &GridField<T>) -> SpectralField<T> {
    let mut spec = SpectralField::zeros(cell_averages.n(), cell_averages.ncomp());
    engine.forward_into(cell_averages, &mut spec);
    apply_qn_spectral(&mut spec);
    spec
}

/// Spectral side of [`apply_qn`]: multiplies already-transformed cell-average
/// coefficients by ghat^{-1}[xi] exp(-pi i (xi1+xi2+xi3)/N). Exposed
/// separately so complex-valued lattices can go through the same correction.
pub fn apply_qn_spectral<T: Real>(spec: &mut SpectralField<T>) {
    let n = spec.n();
    let pi_over_n = T::PI() / T::of_usize(n);
    for idx in 0..n * n * n {
        let xi = index_to_freq(idx, n);
        let g = g_hat::<T>(xi, n);
        let phase = -pi_over_n * T::of_i64(xi[0] + xi[1] + xi[2]);
        let factor = Complex::from_polar(T::one() / g, phase);
        for c in 0..spec.ncomp() {
            let v = &mut spec.comp_mut(c)[idx];
            *v = *v * factor;
        }
    }
}

/// Double-filter smoother: multiplies every coefficient by ghat[xi]^2.
/// A contraction (the multiplier never exceeds 1).
pub fn apply_rn<T: Real>(spec: &mut SpectralField<T>) {
    let n = spec.n();
    for idx in 0..n * n * n {
        let g = g_hat::<T>(index_to_freq(idx, n), n);
        let g2 = g * g;
        for c in 0..spec.ncomp() {
            let v = &mut spec.comp_mut(c)[idx];
            *v = *v * g2;
        }
    }
}

/// Squared L2 norm of the trigonometric polynomial with these coefficients
/// (Parseval over the unit cell), all components summed.
pub fn spectral_norm_sq<T: Real>(spec: &SpectralField<T>) -> T {
    let mut s = T::zero();
    for c in 0..spec.ncomp() {
        for v in spec.comp(c) {
            s += v.norm_sqr();
        }
    }
    s
}

/// Squared discrete L2 norm of a piecewise-constant field,
/// N^{-3} sum of squares, all components summed.
pub fn grid_norm_sq<T: Real>(field: &GridField<T>) -> T {
    let mut s = T::zero();
    for c in 0..field.ncomp() {
        for v in field.comp(c) {
            s += *v * *v;
        }
    }
    s / T::of_usize(field.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{freq_to_index, FrequencySet};
    use approx::assert_abs_diff_eq;
    use num_traits::Zero;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_2_PI, PI};

    #[test]
    fn g_hat_bounds_exhaustive() {
        let lo = FRAC_2_PI.powi(3);
        for n in [4usize, 8, 16, 32] {
            for xi in FrequencySet::full(n).iter() {
                let g = g_hat::<f64>(xi, n);
                assert!(
                    (lo - 1e-15..=1.0 + 1e-15).contains(&g),
                    "ghat {g} out of bounds at xi {xi:?}, N {n}"
                );
            }
        }
    }

    #[test]
    fn g_hat_special_values() {
        assert_eq!(g_hat::<f64>([0, 0, 0], 8), 1.0);
        // one component at the Nyquist frequency: sin(pi/2) / (pi/2) = 2/pi
        assert_abs_diff_eq!(g_hat::<f64>([-4, 0, 0], 8), FRAC_2_PI, epsilon = 1e-15);
        assert_abs_diff_eq!(
            g_hat::<f64>([-4, -4, -4], 8),
            FRAC_2_PI.powi(3),
            epsilon = 1e-15
        );
    }

    /// Random real-valued polynomial: conjugate-symmetric coefficients with
    /// real self-paired entries. Support stays on the reduced frequency set,
    /// because a frequency with a component at -N/2 has no conjugate partner
    /// inside F_N, so no real-valued polynomial can carry it.
    fn random_poly_coeffs(n: usize, rng: &mut ChaCha8Rng) -> Vec<num_complex::Complex<f64>> {
        let reduced = crate::spectral::FrequencySet::reduced(n);
        let mut c = vec![num_complex::Complex::zero(); n * n * n];
        for idx in 0..c.len() {
            if !reduced.contains(index_to_freq(idx, n)) {
                continue;
            }
            let j3 = idx % n;
            let j2 = (idx / n) % n;
            let j1 = idx / (n * n);
            let mirror = (((n - j1) % n) * n + (n - j2) % n) * n + (n - j3) % n;
            if mirror == idx {
                c[idx] = num_complex::Complex::new(rng.random_range(-1.0..1.0), 0.0);
            } else if mirror > idx {
                let v = num_complex::Complex::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                c[idx] = v;
                c[mirror] = v.conj();
            }
        }
        c
    }

    /// Analytic cell average of the polynomial with coefficients `c`:
    /// every coefficient is damped by the per-axis integral factor
    /// (exp(2 pi i xi/N) - 1) * N / (2 pi i xi), then synthesized.
    ///
    /// Derived locally from the integral of exp(2 pi i xi x) over a cell;
    /// deliberately not expressed through g_hat so it can serve as its oracle.
    fn analytic_cell_averages(
        c: &[num_complex::Complex<f64>],
        n: usize,
        engine: &FftEngine<f64>,
    ) -> GridField<f64> {
        let mut damped = c.to_vec();
        for (idx, v) in damped.iter_mut().enumerate() {
            let xi = index_to_freq(idx, n);
            for &x in &xi {
                if x != 0 {
                    let theta = 2.0 * PI * x as f64 / n as f64;
                    let num = num_complex::Complex::from_polar(1.0, theta)
                        - num_complex::Complex::new(1.0, 0.0);
                    let den = num_complex::Complex::new(0.0, 2.0 * PI * x as f64 / n as f64);
                    *v *= num / den;
                }
            }
        }
        engine.fft3_inverse(&mut damped);
        let mut out = GridField::zeros(n, 1);
        for (o, v) in out.comp_mut(0).iter_mut().zip(&damped) {
            assert!(v.im.abs() < 1e-12, "cell averages must be real");
            *o = v.re;
        }
        out
    }

    #[test]
    fn qn_recovers_polynomial_coefficients() {
        let n = 8usize;
        let engine = FftEngine::<f64>::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(211);
        for _ in 0..20 {
            let coeffs = random_poly_coeffs(n, &mut rng);
            let averages = analytic_cell_averages(&coeffs, n, &engine);
            let recovered = apply_qn(&engine, &averages);
            for idx in 0..coeffs.len() {
                let d = recovered.comp(0)[idx] - coeffs[idx];
                assert!(
                    d.norm() <= 1e-12,
                    "coefficient mismatch {d:?} at index {idx}"
                );
            }
        }
    }

    #[test]
    fn qn_recovers_complex_coefficients_on_full_set() {
        // Complex-valued polynomials span all of F_N, Nyquist bins included;
        // go through the spectral-side correction directly since their cell
        // averages are not real lattices.
        let n = 8usize;
        let engine = FftEngine::<f64>::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(227);
        for _ in 0..20 {
            let coeffs: Vec<num_complex::Complex<f64>> = (0..n * n * n)
                .map(|_| {
                    num_complex::Complex::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect();
            let mut averages = coeffs.clone();
            for (idx, v) in averages.iter_mut().enumerate() {
                let xi = index_to_freq(idx, n);
                for &x in &xi {
                    if x != 0 {
                        let theta = 2.0 * PI * x as f64 / n as f64;
                        let num = num_complex::Complex::from_polar(1.0, theta)
                            - num_complex::Complex::new(1.0, 0.0);
                        let den = num_complex::Complex::new(0.0, 2.0 * PI * x as f64 / n as f64);
                        *v *= num / den;
                    }
                }
            }
            engine.fft3_inverse(&mut averages);
            engine.fft3_forward(&mut averages);
            let mut spec = SpectralField::zeros(n, 1);
            spec.comp_mut(0).copy_from_slice(&averages);
            apply_qn_spectral(&mut spec);
            for idx in 0..coeffs.len() {
                let d = spec.comp(0)[idx] - coeffs[idx];
                assert!(d.norm() <= 1e-12, "coefficient mismatch at index {idx}");
            }
        }
    }

    #[test]
    fn qn_of_constant_is_single_coefficient() {
        let n = 8usize;
        let engine = FftEngine::<f64>::new(n);
        let field = GridField::constant_sym(n, &crate::tensor::SymMat([3.0; 6]));
        let spec = apply_qn(&engine, &field);
        for c in 0..6 {
            assert_abs_diff_eq!(spec.comp(c)[0].re, 3.0, epsilon = 1e-13);
            for v in &spec.comp(c)[1..] {
                assert!(v.norm() < 1e-13);
            }
        }
    }

    #[test]
    fn qn_norm_bound_on_random_fields() {
        let n = 8usize;
        let engine = FftEngine::<f64>::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(223);
        let bound = (PI / 2.0).powi(3);
        for _ in 0..100 {
            let mut f = GridField::<f64>::zeros(n, 1);
            for v in f.comp_mut(0) {
                *v = rng.random_range(-1.0..1.0);
            }
            let input_norm = grid_norm_sq(&f).sqrt();
            let output_norm = spectral_norm_sq(&apply_qn(&engine, &f)).sqrt();
            assert!(
                output_norm <= bound * input_norm * (1.0 + 1e-12),
                "norm bound violated: {output_norm} vs {} * {input_norm}",
                bound
            );
        }
    }

    #[test]
    fn rn_scales_by_squared_filter() {
        let n = 8usize;
        let mut spec = SpectralField::<f64>::zeros(n, 1);
        let at_zero = freq_to_index([0, 0, 0], n);
        let at_nyquist = freq_to_index([-4, 0, 0], n);
        spec.comp_mut(0)[at_zero] = num_complex::Complex::new(1.0, 0.0);
        spec.comp_mut(0)[at_nyquist] = num_complex::Complex::new(1.0, 0.0);
        apply_rn(&mut spec);
        assert_abs_diff_eq!(spec.comp(0)[at_zero].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            spec.comp(0)[at_nyquist].re,
            FRAC_2_PI.powi(2),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rn_is_a_contraction() {
        let n = 8usize;
        let mut rng = ChaCha8Rng::seed_from_u64(227);
        for _ in 0..20 {
            let mut spec = SpectralField::<f64>::zeros(n, 3);
            for c in 0..3 {
                for v in spec.comp_mut(c) {
                    *v = num_complex::Complex::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                }
            }
            let before = spectral_norm_sq(&spec);
            apply_rn(&mut spec);
            let after = spectral_norm_sq(&spec);
            assert!(after <= before * (1.0 + 1e-14));
        }
    }
}
