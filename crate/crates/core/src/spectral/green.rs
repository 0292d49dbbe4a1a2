//! Per-frequency operator symbols: the continuous Green operator of an
//! isotropic reference medium, its finite-difference (modified-frequency)
//! counterpart, and the Gauss-point gradient symbols with their assembled
//! 3x3 systems for the element-based scheme.
//!
//! Each symbol comes in two forms that are tested against each other: the
//! displayed entrywise 6x6 matrix (readable, used by small-N tests) and a
//! factored application (used by the solvers; algebraically identical).

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::scalar::Real;
use crate::spectral::{bin_to_freq, index_to_freq};
use crate::tensor::{sym_outer_c, voigt66_apply, LameParams, StiffnessTensor, SymMat, VOIGT_PAIRS};

pub type Mat3c<T> = [[Complex<T>; 3]; 3];

/// Fourth-order complex symbol in Voigt storage (tensorial components).
#[derive(Clone, Debug)]
pub struct GreenSymbol<T> {
    pub m: [[Complex<T>; 6]; 6],
}

impl<T: Real> GreenSymbol<T> {
    pub fn apply(&self, f: &SymMat<Complex<T>>) -> SymMat<Complex<T>> {
        voigt66_apply(&self.m, f)
    }
}

#[inline]
fn delta<T: Real>(a: usize, b: usize) -> T {
    if a == b {
        T::one()
    } else {
        T::zero()
    }
}

/// Continuous Green-operator symbol of the isotropic reference medium at
/// integer frequency `xi` (entrywise, real-valued, homogeneous of degree 0):
///
/// entry(mnpq) = (xi_m xi_q d_np + xi_n xi_q d_mp + xi_m xi_p d_nq
///                + xi_n xi_p d_mq) / (4 |xi|^2 mu)
///              - (lambda + mu) xi_m xi_n xi_p xi_q
///                / (mu (lambda + 2 mu) |xi|^4).
pub fn gamma0_hat<T: Real>(xi: [i64; 3], lame: LameParams<T>) -> [[T; 6]; 6] {
    assert!(xi != [0, 0, 0], "symbol undefined at frequency 0");
    let x: [T; 3] = std::array::from_fn(|m| T::of_i64(xi[m]));
    let n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let c1 = T::one() / (T::of(4.0) * n2 * lame.mu);
    let c2 = (lame.lambda + lame.mu)
        / (lame.mu * (lame.lambda + T::of(2.0) * lame.mu) * n2 * n2);
    let mut out = [[T::zero(); 6]; 6];
    for (i, &(m, n)) in VOIGT_PAIRS.iter().enumerate() {
        for (j, &(p, q)) in VOIGT_PAIRS.iter().enumerate() {
            let bracket = x[m] * x[q] * delta::<T>(n, p)
                + x[n] * x[q] * delta::<T>(m, p)
                + x[m] * x[p] * delta::<T>(n, q)
                + x[n] * x[p] * delta::<T>(m, q);
            out[i][j] = bracket * c1 - c2 * x[m] * x[n] * x[p] * x[q];
        }
    }
    out
}

/// Factored application of [`gamma0_hat`] to a complex symmetric tensor,
/// taking the frequency as a real direction vector:
/// (x (x)_s (tau.x)) / (mu |x|^2) - c2 (x.tau.x) (x (x) x) / |x|^4.
pub fn gamma0_apply<T: Real>(
    lame: LameParams<T>,
    x: [T; 3],
    tau: &SymMat<Complex<T>>,
) -> SymMat<Complex<T>> {
    let n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let cx: [Complex<T>; 3] = std::array::from_fn(|m| Complex::new(x[m], T::zero()));
    let w = tau.dot_vec(cx);
    let s = cx[0] * w[0] + cx[1] * w[1] + cx[2] * w[2];
    let c1 = T::one() / (lame.mu * n2);
    let c2 = (lame.lambda + lame.mu)
        / (lame.mu * (lame.lambda + T::of(2.0) * lame.mu) * n2 * n2);
    sym_outer_c(cx, w)
        .scaled(c1)
        .sub(&sym_outer_c(cx, cx).scaled(s * c2))
}

fn assert_reduced(xi: [i64; 3], n: usize) {
    let half = n as i64;
    assert!(
        xi.iter().all(|&x| 2 * x > -half && 2 * x < half),
        "frequency {xi:?} outside the reduced set at resolution {n}"
    );
}

/// Modified frequency vector of the rotated finite-difference stencil:
/// (i N / 4) * prod_m (exp(2 pi i xi_m / N) + 1)
///          * [tan(pi xi_1 / N), tan(pi xi_2 / N), tan(pi xi_3 / N)].
///
/// Defined on the reduced frequency set only (tan pole at -N/2).
pub fn willot_k<T: Real>(xi: [i64; 3], n: usize) -> [Complex<T>; 3] {
    assert_reduced(xi, n);
    let nf = T::of_usize(n);
    let mut pref = Complex::new(T::zero(), nf / T::of(4.0));
    for m in 0..3 {
        let theta = T::of(2.0) * T::PI() * T::of_i64(xi[m]) / nf;
        pref *= Complex::from_polar(T::one(), theta) + Complex::new(T::one(), T::zero());
    }
    std::array::from_fn(|m| pref * Float::tan(T::PI() * T::of_i64(xi[m]) / nf))
}

/// Diagonal modified frequency with components 2 i N tan(pi xi_m / N).
/// Satisfies |tilde_k(xi)| >= 2 pi |xi| on the reduced set.
pub fn tilde_k<T: Real>(xi: [i64; 3], n: usize) -> [Complex<T>; 3] {
    assert_reduced(xi, n);
    let nf = T::of_usize(n);
    std::array::from_fn(|m| {
        Complex::new(
            T::zero(),
            T::of(2.0) * nf * Float::tan(T::PI() * T::of_i64(xi[m]) / nf),
        )
    })
}

/// Entrywise discrete Green symbol built on [`willot_k`]:
///
/// entry(mnpq) = (k_m conj(k_q) d_np + k_n conj(k_q) d_mp
///                + k_m conj(k_p) d_nq + k_n conj(k_p) d_mq) / (4 mu |k|^2)
///              - (lambda + mu) k_m conj(k_n) k_p conj(k_q)
///                / (mu (lambda + 2 mu) |k|^4).
pub fn willot_gamma_hat<T: Real>(xi: [i64; 3], n: usize, lame: LameParams<T>) -> GreenSymbol<T> {
    assert!(xi != [0, 0, 0], "symbol undefined at frequency 0");
    let k = willot_k::<T>(xi, n);
    let kb: [Complex<T>; 3] = std::array::from_fn(|m| k[m].conj());
    let n2 = k[0].norm_sqr() + k[1].norm_sqr() + k[2].norm_sqr();
    let c1 = T::one() / (T::of(4.0) * lame.mu * n2);
    let c2 = (lame.lambda + lame.mu)
        / (lame.mu * (lame.lambda + T::of(2.0) * lame.mu) * n2 * n2);
    let mut out = [[Complex::<T>::zero(); 6]; 6];
    for (i, &(m, nn)) in VOIGT_PAIRS.iter().enumerate() {
        for (j, &(p, q)) in VOIGT_PAIRS.iter().enumerate() {
            let bracket = k[m] * kb[q] * delta::<T>(nn, p)
                + k[nn] * kb[q] * delta::<T>(m, p)
                + k[m] * kb[p] * delta::<T>(nn, q)
                + k[nn] * kb[p] * delta::<T>(m, q);
            out[i][j] = bracket * c1 - k[m] * kb[nn] * k[p] * kb[q] * c2;
        }
    }
    GreenSymbol { m: out }
}

/// Factored application of the discrete Green symbol for a given modified
/// frequency vector: with w = tau . conj(k) and s = k . w,
/// (k (x)_s w) / (mu |k|^2) - c2 s (k (x)_s conj(k)) / |k|^4.
pub fn willot_apply<T: Real>(
    lame: LameParams<T>,
    k: &[Complex<T>; 3],
    tau: &SymMat<Complex<T>>,
) -> SymMat<Complex<T>> {
    let kb: [Complex<T>; 3] = std::array::from_fn(|m| k[m].conj());
    let w = tau.dot_vec(kb);
    let s = k[0] * w[0] + k[1] * w[1] + k[2] * w[2];
    let n2 = k[0].norm_sqr() + k[1].norm_sqr() + k[2].norm_sqr();
    let c1 = T::one() / (lame.mu * n2);
    let c2 = (lame.lambda + lame.mu)
        / (lame.mu * (lame.lambda + T::of(2.0) * lame.mu) * n2 * n2);
    sym_outer_c(*k, w)
        .scaled(c1)
        .sub(&sym_outer_c(*k, kb).scaled(s * c2))
}

/// The eight Gauss points of a voxel, as sign patterns: axis m of entry g
/// carries +1 when bit m of g is set. The 1-D point for sign s sits at
/// (1 + s/sqrt(3))/2 on the unit interval.
pub const GAUSS_SIGNS: [[i8; 3]; 8] = [
    [-1, -1, -1],
    [1, -1, -1],
    [-1, 1, -1],
    [1, 1, -1],
    [-1, -1, 1],
    [1, -1, 1],
    [-1, 1, 1],
    [1, 1, 1],
];

/// 1-D Gauss-point coordinate on the unit interval for a sign in {-1, +1}.
pub fn gauss_coord<T: Real>(sign: i8) -> T {
    (T::one() + T::of_i64(sign as i64) / Float::sqrt(T::of(3.0))) / T::of(2.0)
}

/// Gradient symbol of the trilinear interpolant at Gauss point `b`:
///
/// component m = N (exp(2 pi i xi_m / N) - 1)
///               * prod_{n != m} ((1 - g_n) + g_n exp(2 pi i xi_n / N)),
/// with g_n the 1-D coordinate for sign b_n. Vanishes at xi = 0.
pub fn fem_gauss_symbol<T: Real>(xi: [i64; 3], n: usize, b: [i8; 3]) -> [Complex<T>; 3] {
    let nf = T::of_usize(n);
    let e: [Complex<T>; 3] = std::array::from_fn(|m| {
        Complex::from_polar(
            T::one(),
            T::of(2.0) * T::PI() * T::of_i64(xi[m]) / nf,
        )
    });
    let g: [T; 3] = std::array::from_fn(|m| gauss_coord(b[m]));
    let one = Complex::new(T::one(), T::zero());
    let f: [Complex<T>; 3] =
        std::array::from_fn(|m| one * (T::one() - g[m]) + e[m] * g[m]);
    std::array::from_fn(|m| {
        let mut v = (e[m] - one) * nf;
        for nn in 0..3 {
            if nn != m {
                v *= f[nn];
            }
        }
        v
    })
}

/// Literal double contraction (conj(k) . C . k)_nq = sum_mp conj(k_m)
/// C_mnpq k_p, the 3x3 system block one Gauss symbol contributes.
pub fn acoustic_matrix<T: Real>(c: &StiffnessTensor<T>, k: &[Complex<T>; 3]) -> Mat3c<T> {
    let mut out = [[Complex::<T>::zero(); 3]; 3];
    for n in 0..3 {
        for q in 0..3 {
            let mut acc = Complex::<T>::zero();
            for m in 0..3 {
                for p in 0..3 {
                    acc += k[m].conj() * k[p] * c.entry(m, n, p, q);
                }
            }
            out[n][q] = acc;
        }
    }
    out
}

/// Assembles the averaged 3x3 system from the eight Gauss symbols, using the
/// closed isotropic contraction
/// (conj(k) . C . k)_nq = mu |k|^2 d_nq + mu k_n conj(k_q)
///                        + lambda conj(k_n) k_q.
pub fn assemble_fem_b<T: Real>(ks: &[[Complex<T>; 3]; 8], lame: LameParams<T>) -> Mat3c<T> {
    let mut out = [[Complex::<T>::zero(); 3]; 3];
    for k in ks {
        let n2 = k[0].norm_sqr() + k[1].norm_sqr() + k[2].norm_sqr();
        for n in 0..3 {
            for q in 0..3 {
                let mut v = k[n] * k[q].conj() * lame.mu + k[n].conj() * k[q] * lame.lambda;
                if n == q {
                    v += Complex::new(lame.mu * n2, T::zero());
                }
                out[n][q] += v;
            }
        }
    }
    let w = T::of(0.125);
    for row in &mut out {
        for v in row {
            *v = *v * w;
        }
    }
    out
}

/// Averaged Gauss-symbol system at one frequency:
/// 2^{-3} sum over b of conj(k^b) . C^ref . k^b.
pub fn fem_b<T: Real>(xi: [i64; 3], n: usize, lame: LameParams<T>) -> Mat3c<T> {
    let ks: [[Complex<T>; 3]; 8] =
        std::array::from_fn(|g| fem_gauss_symbol(xi, n, GAUSS_SIGNS[g]));
    assemble_fem_b(&ks, lame)
}

/// Right-hand-side contribution of one Gauss point: tau . conj(k).
pub fn polarization_flux<T: Real>(
    tau: &SymMat<Complex<T>>,
    k: &[Complex<T>; 3],
) -> [Complex<T>; 3] {
    tau.dot_vec(std::array::from_fn(|m| k[m].conj()))
}

/// Averaged right-hand side at one frequency:
/// 2^{-3} sum over b of tau^b . conj(k^b).
pub fn fem_zeta<T: Real>(
    taus: &[SymMat<Complex<T>>; 8],
    ks: &[[Complex<T>; 3]; 8],
) -> [Complex<T>; 3] {
    let mut out = [Complex::<T>::zero(); 3];
    for g in 0..8 {
        let f = polarization_flux(&taus[g], &ks[g]);
        for m in 0..3 {
            out[m] += f[m];
        }
    }
    let w = T::of(0.125);
    std::array::from_fn(|m| out[m] * w)
}

fn det3<T: Real>(b: &Mat3c<T>) -> Complex<T> {
    b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0])
}

fn frob_scale<T: Real>(b: &Mat3c<T>) -> T {
    let mut s = T::zero();
    for row in b {
        for v in row {
            s += v.norm_sqr();
        }
    }
    Float::sqrt(s / T::of(9.0))
}

/// Solves the 3x3 system b x = rhs by cofactor expansion.
///
/// Panics when the determinant is negligible against the matrix scale: the
/// averaged Gauss system is provably positive definite away from frequency
/// zero, so a singular matrix means the symbol derivation itself is broken.
pub fn solve3<T: Real>(b: &Mat3c<T>, rhs: [Complex<T>; 3], xi: [i64; 3]) -> [Complex<T>; 3] {
    let det = det3(b);
    let scale = frob_scale(b);
    assert!(
        Float::sqrt(det.norm_sqr()) > T::of(1e-13) * scale * scale * scale,
        "numerically singular 3x3 symbol system at frequency {xi:?}"
    );
    let inv_det = Complex::new(T::one(), T::zero()) / det;
    let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
        b[r1][c1] * b[r2][c2] - b[r1][c2] * b[r2][c1]
    };
    // inverse = adjugate / det; adj[i][j] = cofactor(j, i)
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    std::array::from_fn(|i| {
        (adj[i][0] * rhs[0] + adj[i][1] * rhs[1] + adj[i][2] * rhs[2]) * inv_det
    })
}

/// Inverse of a 3x3 symbol system (cofactor method, same conditioning guard
/// as [`solve3`]).
pub fn invert3<T: Real>(b: &Mat3c<T>, xi: [i64; 3]) -> Mat3c<T> {
    let cols: [[Complex<T>; 3]; 3] = std::array::from_fn(|j| {
        let mut e = [Complex::<T>::zero(); 3];
        e[j] = Complex::new(T::one(), T::zero());
        solve3(b, e, xi)
    });
    // transpose column solutions into rows
    std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i]))
}

/// Per-axis lookup tables for the hot per-frequency loops. Everything a
/// symbol needs factors over axes, so N-entry tables replace transcendental
/// calls per lattice point.
pub struct AxisTables<T> {
    pub n: usize,
    /// frequency value of each bin, as a scalar
    pub freq: Vec<T>,
    /// exp(2 pi i xi_j / N)
    pub expo: Vec<Complex<T>>,
    /// tan(pi xi_j / N); the pole bin (xi = -N/2) holds NaN and is never
    /// read on the reduced set
    pub tan: Vec<T>,
    /// N (exp(2 pi i xi_j / N) - 1)
    pub diff: Vec<Complex<T>>,
    /// (1 - g) + g exp(...) for the low (-1) and high (+1) Gauss coordinates
    pub gauss_lo: Vec<Complex<T>>,
    pub gauss_hi: Vec<Complex<T>>,
    /// whether the bin's frequency lies strictly inside (-N/2, N/2)
    pub reduced: Vec<bool>,
}

impl<T: Real> AxisTables<T> {
    pub fn new(n: usize) -> Self {
        let nf = T::of_usize(n);
        let one = Complex::new(T::one(), T::zero());
        let g_lo = gauss_coord::<T>(-1);
        let g_hi = gauss_coord::<T>(1);
        let mut t = AxisTables {
            n,
            freq: Vec::with_capacity(n),
            expo: Vec::with_capacity(n),
            tan: Vec::with_capacity(n),
            diff: Vec::with_capacity(n),
            gauss_lo: Vec::with_capacity(n),
            gauss_hi: Vec::with_capacity(n),
            reduced: Vec::with_capacity(n),
        };
        for j in 0..n {
            let xi = bin_to_freq(j, n);
            let xf = T::of_i64(xi);
            let e = Complex::from_polar(T::one(), T::of(2.0) * T::PI() * xf / nf);
            t.freq.push(xf);
            t.expo.push(e);
            t.tan.push(if 2 * xi == -(n as i64) {
                T::nan()
            } else {
                Float::tan(T::PI() * xf / nf)
            });
            t.diff.push((e - one) * nf);
            t.gauss_lo.push(one * (T::one() - g_lo) + e * g_lo);
            t.gauss_hi.push(one * (T::one() - g_hi) + e * g_hi);
            t.reduced.push(2 * xi > -(n as i64) && 2 * xi < n as i64);
        }
        t
    }

    /// Whether a bin triple lies on the reduced frequency set.
    #[inline]
    pub fn in_reduced(&self, bins: [usize; 3]) -> bool {
        self.reduced[bins[0]] && self.reduced[bins[1]] && self.reduced[bins[2]]
    }

    #[inline]
    pub fn bins_of(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Integer frequency triple as scalars.
    #[inline]
    pub fn freq_of(&self, bins: [usize; 3]) -> [T; 3] {
        std::array::from_fn(|m| self.freq[bins[m]])
    }

    /// Modified frequency vector at a bin triple (reduced set only; the
    /// caller must have excluded Nyquist bins).
    #[inline]
    pub fn willot_k_at(&self, bins: [usize; 3]) -> [Complex<T>; 3] {
        let one = Complex::new(T::one(), T::zero());
        let mut pref = Complex::new(T::zero(), T::of_usize(self.n) / T::of(4.0));
        for m in 0..3 {
            pref *= self.expo[bins[m]] + one;
        }
        std::array::from_fn(|m| pref * self.tan[bins[m]])
    }

    /// Gauss-point gradient symbol at a bin triple for one sign pattern.
    #[inline]
    pub fn fem_k_at(&self, bins: [usize; 3], b: [i8; 3]) -> [Complex<T>; 3] {
        let f = |axis: usize| {
            if b[axis] > 0 {
                self.gauss_hi[bins[axis]]
            } else {
                self.gauss_lo[bins[axis]]
            }
        };
        [
            self.diff[bins[0]] * f(1) * f(2),
            self.diff[bins[1]] * f(0) * f(2),
            self.diff[bins[2]] * f(0) * f(1),
        ]
    }

    /// All eight Gauss symbols at a bin triple.
    #[inline]
    pub fn fem_k_block(&self, bins: [usize; 3]) -> [[Complex<T>; 3]; 8] {
        std::array::from_fn(|g| self.fem_k_at(bins, GAUSS_SIGNS[g]))
    }
}

/// Which symbol family a table serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Basic,
    Willot,
    Fem,
}

enum SymbolCache<T> {
    None,
    /// Modified frequency per spectral index (zero vector on excluded bins).
    WillotK(Vec<[Complex<T>; 3]>),
    /// Inverted 3x3 system per spectral index (identity at index 0, unused).
    FemBInv(Vec<Mat3c<T>>),
}

/// Green-operator table: reference medium, per-axis tables, and an optional
/// precomputed per-frequency cache (a memory-for-speed knob; the default
/// recomputes symbols from the axis tables on the fly).
pub struct GreenTable<T> {
    kind: SymbolKind,
    lame: LameParams<T>,
    axes: AxisTables<T>,
    cache: SymbolCache<T>,
}

impl<T: Real> GreenTable<T> {
    pub fn new(kind: SymbolKind, n: usize, lame: LameParams<T>, precompute: bool) -> Self {
        let axes = AxisTables::new(n);
        let cache = if !precompute {
            SymbolCache::None
        } else {
            match kind {
                SymbolKind::Basic => SymbolCache::None,
                SymbolKind::Willot => {
                    let reduced = crate::spectral::FrequencySet::reduced(n);
                    let table = (0..n * n * n)
                        .map(|idx| {
                            let xi = index_to_freq(idx, n);
                            if idx == 0 || !reduced.contains(xi) {
                                [Complex::zero(); 3]
                            } else {
                                axes.willot_k_at(axes.bins_of(idx))
                            }
                        })
                        .collect();
                    SymbolCache::WillotK(table)
                }
                SymbolKind::Fem => {
                    let table = (0..n * n * n)
                        .map(|idx| {
                            if idx == 0 {
                                let mut id = [[Complex::<T>::zero(); 3]; 3];
                                for (m, row) in id.iter_mut().enumerate() {
                                    row[m] = Complex::new(T::one(), T::zero());
                                }
                                id
                            } else {
                                let bins = axes.bins_of(idx);
                                let b = assemble_fem_b(&axes.fem_k_block(bins), lame);
                                invert3(&b, index_to_freq(idx, n))
                            }
                        })
                        .collect();
                    SymbolCache::FemBInv(table)
                }
            }
        };
        GreenTable {
            kind,
            lame,
            axes,
            cache,
        }
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn lame(&self) -> LameParams<T> {
        self.lame
    }

    pub fn axes(&self) -> &AxisTables<T> {
        &self.axes
    }

    /// Applies the strain-update symbol at a nonzero spectral index
    /// (basic/willot families; the willot caller must stay on the reduced
    /// set).
    #[inline]
    pub fn apply_gamma(&self, idx: usize, tau: &SymMat<Complex<T>>) -> SymMat<Complex<T>> {
        debug_assert_ne!(idx, 0);
        match self.kind {
            SymbolKind::Basic => {
                let x = self.axes.freq_of(self.axes.bins_of(idx));
                gamma0_apply(self.lame, x, tau)
            }
            SymbolKind::Willot => {
                let k = match &self.cache {
                    SymbolCache::WillotK(table) => table[idx],
                    _ => self.axes.willot_k_at(self.axes.bins_of(idx)),
                };
                willot_apply(self.lame, &k, tau)
            }
            SymbolKind::Fem => unreachable!("strain symbol application on a displacement table"),
        }
    }

    /// Solves the averaged Gauss system at a nonzero spectral index.
    #[inline]
    pub fn solve_b(&self, idx: usize, rhs: [Complex<T>; 3]) -> [Complex<T>; 3] {
        debug_assert_ne!(idx, 0);
        match &self.cache {
            SymbolCache::FemBInv(table) => {
                let inv = &table[idx];
                std::array::from_fn(|i| {
                    inv[i][0] * rhs[0] + inv[i][1] * rhs[1] + inv[i][2] * rhs[2]
                })
            }
            _ => {
                let bins = self.axes.bins_of(idx);
                let b = assemble_fem_b(&self.axes.fem_k_block(bins), self.lame);
                solve3(&b, rhs, index_to_freq(idx, self.axes.n))
            }
        }
    }
}
