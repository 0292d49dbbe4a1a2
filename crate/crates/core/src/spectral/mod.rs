//! Frequency-domain machinery: frequency sets, field containers, FFT
//! transforms, the averaging filter and its induced operators, and the
//! per-frequency operator symbols used by the solvers.
//!
//! Conventions, fixed crate-wide:
//! * synthesis f[I] = sum over xi of fhat[xi] * exp(2 pi i xi.I / N); the
//!   forward (analysis) transform carries the 1/N^3 factor, so fhat[0] is the
//!   discrete mean;
//! * frequencies live on the full set F_N = {xi : -N/2 <= xi_m < N/2} or the
//!   reduced set F_N- = {xi : -N/2 < xi_m < N/2}; DFT bin j maps to
//!   frequency j for j < (N+1)/2 and j - N otherwise;
//! * spectral storage shares the real-space layout: linear index
//!   (j1*N + j2)*N + j3 with j3 fastest.

pub mod fft;
pub mod filter;
pub mod green;

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::scalar::Real;
use crate::tensor::SymMat;

/// Frequency of DFT bin `j` for resolution `n`.
#[inline]
pub fn bin_to_freq(j: usize, n: usize) -> i64 {
    let j = j as i64;
    let n = n as i64;
    if j < (n + 1) / 2 {
        j
    } else {
        j - n
    }
}

/// DFT bin of frequency `xi` (must lie in F_N).
#[inline]
pub fn freq_to_bin(xi: i64, n: usize) -> usize {
    if xi >= 0 {
        xi as usize
    } else {
        (xi + n as i64) as usize
    }
}

/// Frequency triple of a linear spectral index.
#[inline]
pub fn index_to_freq(idx: usize, n: usize) -> [i64; 3] {
    let j3 = idx % n;
    let j2 = (idx / n) % n;
    let j1 = idx / (n * n);
    [bin_to_freq(j1, n), bin_to_freq(j2, n), bin_to_freq(j3, n)]
}

/// Linear spectral index of a frequency triple in F_N.
#[inline]
pub fn freq_to_index(xi: [i64; 3], n: usize) -> usize {
    (freq_to_bin(xi[0], n) * n + freq_to_bin(xi[1], n)) * n + freq_to_bin(xi[2], n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreqKind {
    /// F_N: -N/2 <= xi_m < N/2.
    Full,
    /// F_N-: -N/2 < xi_m < N/2 (drops the unpaired Nyquist planes).
    Reduced,
}

/// One of the two frequency index sets at resolution N.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrequencySet {
    pub n: usize,
    pub kind: FreqKind,
}

impl FrequencySet {
    pub fn full(n: usize) -> Self {
        FrequencySet {
            n,
            kind: FreqKind::Full,
        }
    }

    pub fn reduced(n: usize) -> Self {
        FrequencySet {
            n,
            kind: FreqKind::Reduced,
        }
    }

    pub fn contains(&self, xi: [i64; 3]) -> bool {
        let n = self.n as i64;
        xi.iter().all(|&x| match self.kind {
            FreqKind::Full => 2 * x >= -n && 2 * x < n,
            FreqKind::Reduced => 2 * x > -n && 2 * x < n,
        })
    }

    /// Number of frequencies in the set.
    pub fn len(&self) -> usize {
        match self.kind {
            FreqKind::Full => self.n.pow(3),
            FreqKind::Reduced => {
                let per_axis = if self.n % 2 == 0 { self.n - 1 } else { self.n };
                per_axis.pow(3)
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All member frequencies, in spectral index order (skipping non-members).
    pub fn iter(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        let set = *self;
        (0..self.n.pow(3))
            .map(move |idx| index_to_freq(idx, set.n))
            .filter(move |&xi| set.contains(xi))
    }
}

/// Real-space field over the voxel lattice: `ncomp` scalar lattices of N^3
/// values each (structure-of-arrays, so components transform independently).
///
/// Strain fields use 6 components in the crate's Voigt order; displacement
/// fields use 3.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T> {
    n: usize,
    comps: Vec<Vec<T>>,
}

impl<T: Real> GridField<T> {
    pub fn zeros(n: usize, ncomp: usize) -> Self {
        GridField {
            n,
            comps: vec![vec![T::zero(); n * n * n]; ncomp],
        }
    }

    /// Constant symmetric-tensor field (6 components).
    pub fn constant_sym(n: usize, value: &SymMat<T>) -> Self {
        GridField {
            n,
            comps: (0..6).map(|c| vec![value.0[c]; n * n * n]).collect(),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    /// Lattice size N^3.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[T] {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.comps[c]
    }

    #[inline]
    pub fn sym_at(&self, idx: usize) -> SymMat<T> {
        SymMat(std::array::from_fn(|c| self.comps[c][idx]))
    }

    #[inline]
    pub fn set_sym(&mut self, idx: usize, v: &SymMat<T>) {
        for c in 0..6 {
            self.comps[c][idx] = v.0[c];
        }
    }

    #[inline]
    pub fn vec_at(&self, idx: usize) -> [T; 3] {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    #[inline]
    pub fn set_vec(&mut self, idx: usize, v: [T; 3]) {
        for c in 0..3 {
            self.comps[c][idx] = v[c];
        }
    }

    /// Discrete mean of a 6-component field.
    pub fn mean_sym(&self) -> SymMat<T> {
        let scale = T::one() / T::of_usize(self.len());
        SymMat(std::array::from_fn(|c| {
            self.comps[c].iter().fold(T::zero(), |a, &b| a + b) * scale
        }))
    }

    /// Discrete mean of a 3-component field.
    pub fn mean_vec(&self) -> [T; 3] {
        let scale = T::one() / T::of_usize(self.len());
        std::array::from_fn(|c| self.comps[c].iter().fold(T::zero(), |a, &b| a + b) * scale)
    }

    /// Plain l2 distance over all stored components, sqrt(sum of squares).
    ///
    /// With `shear_doubled` the last three of six components count twice, so
    /// the result is the discrete L2 norm of a symmetric-tensor field (up to
    /// the lattice normalization the caller applies).
    pub fn dist_l2(&self, other: &Self, shear_doubled: bool) -> T {
        debug_assert_eq!(self.ncomp(), other.ncomp());
        let mut total = T::zero();
        for c in 0..self.ncomp() {
            let mut s = T::zero();
            for (a, b) in self.comps[c].iter().zip(&other.comps[c]) {
                let d = *a - *b;
                s += d * d;
            }
            if shear_doubled && c >= 3 {
                s += s;
            }
            total += s;
        }
        Float::sqrt(total)
    }

    /// Largest absolute componentwise difference.
    pub fn dist_max(&self, other: &Self) -> T {
        let mut m = T::zero();
        for c in 0..self.ncomp() {
            for (a, b) in self.comps[c].iter().zip(&other.comps[c]) {
                m = Float::max(m, Float::abs(*a - *b));
            }
        }
        m
    }
}

/// Fourier-coefficient field over F_N: `ncomp` complex lattices sharing the
/// real-space layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T> {
    n: usize,
    comps: Vec<Vec<Complex<T>>>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(n: usize, ncomp: usize) -> Self {
        SpectralField {
            n,
            comps: vec![vec![Complex::zero(); n * n * n]; ncomp],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn comp(&self, c: usize) -> &[Complex<T>] {
        &self.comps[c]
    }

    #[inline]
    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        &mut self.comps[c]
    }

    #[inline]
    pub fn sym_at(&self, idx: usize) -> SymMat<Complex<T>> {
        SymMat(std::array::from_fn(|c| self.comps[c][idx]))
    }

    #[inline]
    pub fn set_sym(&mut self, idx: usize, v: &SymMat<Complex<T>>) {
        for c in 0..6 {
            self.comps[c][idx] = v.0[c];
        }
    }

    #[inline]
    pub fn vec_at(&self, idx: usize) -> [Complex<T>; 3] {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    #[inline]
    pub fn set_vec(&mut self, idx: usize, v: [Complex<T>; 3]) {
        for c in 0..3 {
            self.comps[c][idx] = v[c];
        }
    }

    /// Coefficient lookup by frequency.
    pub fn at_freq(&self, c: usize, xi: [i64; 3]) -> Complex<T> {
        self.comps[c][freq_to_index(xi, self.n)]
    }

    /// Worst-case violation of conjugate symmetry fhat[-xi] = conj(fhat[xi]),
    /// with the mirror taken modulo N so self-paired Nyquist bins are checked
    /// for realness too.
    pub fn conjugate_symmetry_error(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for idx in 0..self.len() {
            let j3 = idx % n;
            let j2 = (idx / n) % n;
            let j1 = idx / (n * n);
            let mirror = (((n - j1) % n) * n + (n - j2) % n) * n + (n - j3) % n;
            for c in 0..self.ncomp() {
                let d = self.comps[c][mirror] - self.comps[c][idx].conj();
                worst = Float::max(worst, Float::sqrt(d.norm_sqr()));
            }
        }
        worst
    }

    /// Debug dump: CSV with one row per frequency, columns xi1, xi2, xi3 and
    /// re/im per component.
    pub fn dump_csv(&self, path: &std::path::Path) -> crate::error::Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(into_io)?;
        let mut header = vec!["xi1".to_string(), "xi2".to_string(), "xi3".to_string()];
        for c in 0..self.ncomp() {
            header.push(format!("re{c}"));
            header.push(format!("im{c}"));
        }
        w.write_record(&header).map_err(into_io)?;
        for idx in 0..self.len() {
            let xi = index_to_freq(idx, self.n);
            let mut row = vec![xi[0].to_string(), xi[1].to_string(), xi[2].to_string()];
            for c in 0..self.ncomp() {
                let v = self.comps[c][idx];
                row.push(format!("{:?}", v.re));
                row.push(format!("{:?}", v.im));
            }
            w.write_record(&row).map_err(into_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn into_io(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Io(std::io::Error::other(e))
}
