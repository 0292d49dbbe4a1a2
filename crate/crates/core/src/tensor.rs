//! Symmetric second-order tensors, fourth-order stiffness tensors, and the
//! Voigt-vector algebra connecting them.
//!
//! Storage convention used across the crate:
//! * symmetric 3x3 tensors are stored as 6-vectors of *tensorial* components
//!   in the order (11, 22, 33, 23, 13, 12); no engineering-shear doubling in
//!   storage;
//! * fourth-order tensors with the minor symmetries are stored as 6x6
//!   matrices of tensorial components in the same ordering;
//! * the factor of 2 on shear slots lives exclusively inside the contraction
//!   routines in this module. Real and complex tensors share those routines.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Real;

/// Index pairs (i, j) backing each Voigt slot, in storage order.
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

/// Voigt slot of the (i, j) component of a symmetric tensor.
#[inline]
pub fn voigt_index(i: usize, j: usize) -> usize {
    debug_assert!(i < 3 && j < 3);
    if i == j {
        i
    } else {
        // (1,2) -> 3, (0,2) -> 4, (0,1) -> 5, independent of order
        6 - i - j
    }
}

/// Component scalar of a tensor: the real type or its complexification.
pub trait Ring:
    Copy
    + Zero
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + SubAssign
    + Neg<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
}

impl<S> Ring for S where
    S: Copy
        + Zero
        + Add<Output = Self>
        + AddAssign
        + Sub<Output = Self>
        + SubAssign
        + Neg<Output = Self>
        + Mul<Output = Self>
        + Send
        + Sync
        + 'static
{
}

/// Symmetric 3x3 tensor stored as tensorial Voigt components
/// (11, 22, 33, 23, 13, 12).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMat<S>(pub [S; 6]);

impl<S: Ring> SymMat<S> {
    #[inline]
    pub fn zero() -> Self {
        SymMat([S::zero(); 6])
    }

    /// Full-index accessor: the (i, j) = (j, i) component.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.0[voigt_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.0[voigt_index(i, j)] = v;
    }

    /// Packs a full symmetric 3x3 matrix; the strict lower triangle is
    /// ignored, so callers must pass symmetric data.
    pub fn from_full(m: [[S; 3]; 3]) -> Self {
        SymMat(std::array::from_fn(|k| {
            let (i, j) = VOIGT_PAIRS[k];
            m[i][j]
        }))
    }

    /// Expands back to a full 3x3 matrix.
    pub fn to_full(&self) -> [[S; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.get(i, j)))
    }

    /// Double contraction a : b = sum_ij a_ij b_ij.
    ///
    /// Shear slots count twice; the doubling happens here, not in storage.
    /// For complex arguments this is the plain bilinear sum (no conjugation);
    /// callers conjugate explicitly where a sesquilinear pairing is meant.
    #[inline]
    pub fn ddot(&self, o: &Self) -> S {
        let mut s = S::zero();
        for k in 0..3 {
            s += self.0[k] * o.0[k];
        }
        for k in 3..6 {
            let p = self.0[k] * o.0[k];
            s += p + p;
        }
        s
    }

    /// Matrix-vector product (a . v)_i = sum_j a_ij v_j.
    #[inline]
    pub fn dot_vec(&self, v: [S; 3]) -> [S; 3] {
        let mut out = [S::zero(); 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += self.get(i, j) * v[j];
            }
        }
        out
    }

    #[inline]
    pub fn add(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..6 {
            r.0[k] += o.0[k];
        }
        r
    }

    #[inline]
    pub fn sub(&self, o: &Self) -> Self {
        let mut r = *self;
        for k in 0..6 {
            r.0[k] -= o.0[k];
        }
        r
    }

    /// Component-wise scaling by a (possibly narrower) scalar type.
    #[inline]
    pub fn scaled<C: Copy>(&self, f: C) -> Self
    where
        S: Mul<C, Output = S>,
    {
        let mut r = *self;
        for k in 0..6 {
            r.0[k] = r.0[k] * f;
        }
        r
    }
}

impl<T: Real> SymMat<T> {
    /// Identity tensor.
    pub fn identity() -> Self {
        let mut m = Self::zero();
        for k in 0..3 {
            m.0[k] = T::one();
        }
        m
    }

    /// Unit macroscopic strain for Voigt slot `j`: e_m (x)_s e_n for the pair
    /// (m, n) = `VOIGT_PAIRS[j]`. Shear slots carry tensorial value 1/2 so
    /// that the six strains extract the columns of a stiffness matrix.
    pub fn unit_strain(j: usize) -> Self {
        let mut m = Self::zero();
        m.0[j] = if j < 3 { T::one() } else { T::of(0.5) };
        m
    }

    /// Frobenius norm sqrt(a : a), shear slots counted twice.
    pub fn norm(&self) -> T {
        Float::sqrt(self.ddot(self))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| Float::is_finite(*v))
    }

    /// Promotes to a complex-component tensor.
    pub fn to_complex(&self) -> SymMat<Complex<T>> {
        SymMat(self.0.map(|v| Complex::new(v, T::zero())))
    }
}

impl<T: Real> SymMat<Complex<T>> {
    /// Real part, dropping imaginary components.
    pub fn re(&self) -> SymMat<T> {
        SymMat(self.0.map(|v| v.re))
    }

    /// Squared L2 size |a|^2 = sum_ij |a_ij|^2 (shear slots doubled).
    pub fn norm_sq(&self) -> T {
        let mut s = T::zero();
        for k in 0..6 {
            let m = self.0[k].norm_sqr();
            s += if k < 3 { m } else { m + m };
        }
        s
    }

    pub fn conj(&self) -> Self {
        SymMat(self.0.map(|v| v.conj()))
    }
}

/// Symmetrized outer product a (x)_s b of real 3-vectors.
pub fn sym_outer<T: Real>(a: [T; 3], b: [T; 3]) -> SymMat<T> {
    let half = T::of(0.5);
    let mut m = SymMat::zero();
    for k in 0..6 {
        let (i, j) = VOIGT_PAIRS[k];
        m.0[k] = (a[i] * b[j] + a[j] * b[i]) * half;
    }
    m
}

/// Symmetrized outer product of complex 3-vectors.
pub fn sym_outer_c<T: Real>(a: [Complex<T>; 3], b: [Complex<T>; 3]) -> SymMat<Complex<T>> {
    let half = T::of(0.5);
    let mut m = SymMat::zero();
    for k in 0..6 {
        let (i, j) = VOIGT_PAIRS[k];
        m.0[k] = (a[i] * b[j] + a[j] * b[i]) * half;
    }
    m
}

/// Applies a minor-symmetric fourth-order tensor (6x6 Voigt storage, entries
/// of type `C`) to a symmetric tensor with components of type `S`:
/// (c : f)_I = sum_J c_IJ w_J f_J with shear weights w_J = 2.
///
/// This is the single contraction code path shared by real stiffness tensors
/// acting on real or complex strains and by complex spectral symbols.
#[inline]
pub fn voigt66_apply<C: Copy, S: Ring + Mul<C, Output = S>>(c: &[[C; 6]; 6], f: &SymMat<S>) -> SymMat<S> {
    let mut out = SymMat::zero();
    for i in 0..6 {
        let mut acc = S::zero();
        for j in 0..3 {
            acc += f.0[j] * c[i][j];
        }
        for j in 3..6 {
            let p = f.0[j] * c[i][j];
            acc += p + p;
        }
        out.0[i] = acc;
    }
    out
}

/// Isotropic material parameters (Lame constants).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LameParams<T> {
    pub lambda: T,
    pub mu: T,
}

impl<T: Real> LameParams<T> {
    /// Validated constructor: mu > 0 and lambda + 2 mu > 0 (strong
    /// ellipticity), the conditions every closed-form expression built from a
    /// reference medium divides by.
    ///
    /// Positive definiteness on symmetric tensors (3 lambda + 2 mu > 0) is
    /// deliberately not required here; where a material must be coercive the
    /// grid-level admissibility check enforces it through eigenvalues.
    pub fn new(lambda: T, mu: T) -> Result<Self, Error> {
        if !(Float::is_finite(lambda) && Float::is_finite(mu)) {
            return Err(Error::Material("non-finite Lame parameters".into()));
        }
        if mu <= T::zero() || lambda + T::of(2.0) * mu <= T::zero() {
            return Err(Error::Material(
                "inadmissible Lame parameters: need mu > 0 and lambda + 2*mu > 0".into(),
            ));
        }
        Ok(LameParams { lambda, mu })
    }
}

/// Fourth-order stiffness tensor with both minor symmetries and the major
/// symmetry, stored as a symmetric 6x6 matrix of tensorial components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffnessTensor<T> {
    c: [[T; 6]; 6],
}

impl<T: Real> StiffnessTensor<T> {
    pub fn zero() -> Self {
        StiffnessTensor { c: [[T::zero(); 6]; 6] }
    }

    /// Isotropic stiffness C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk).
    ///
    /// In Voigt storage: C_iijj = lambda + 2 mu d_ij on the normal block and
    /// mu on the shear diagonal (tensorial components, so C_1212 = mu).
    pub fn isotropic(p: LameParams<T>) -> Self {
        let mut c = [[T::zero(); 6]; 6];
        let two_mu = T::of(2.0) * p.mu;
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] = p.lambda + if i == j { two_mu } else { T::zero() };
            }
        }
        for k in 3..6 {
            c[k][k] = p.mu;
        }
        StiffnessTensor { c }
    }

    /// Builds from the 21 upper-triangle entries of the Voigt matrix,
    /// row-major: (0,0)..(0,5), (1,1)..(1,5), ..., (5,5).
    pub fn from_upper_triangle(v: &[T]) -> Result<Self, Error> {
        if v.len() != 21 {
            return Err(Error::Material(format!(
                "anisotropic stiffness needs 21 entries, got {}",
                v.len()
            )));
        }
        if v.iter().any(|x| !Float::is_finite(*x)) {
            return Err(Error::Material("non-finite stiffness entry".into()));
        }
        let mut c = [[T::zero(); 6]; 6];
        let mut k = 0;
        for i in 0..6 {
            for j in i..6 {
                c[i][j] = v[k];
                c[j][i] = v[k];
                k += 1;
            }
        }
        Ok(StiffnessTensor { c })
    }

    /// Upper-triangle entries in the order accepted by
    /// [`StiffnessTensor::from_upper_triangle`].
    pub fn upper_triangle(&self) -> [T; 21] {
        let mut out = [T::zero(); 21];
        let mut k = 0;
        for i in 0..6 {
            for j in i..6 {
                out[k] = self.c[i][j];
                k += 1;
            }
        }
        out
    }

    /// Voigt-matrix entry by slot.
    #[inline]
    pub fn voigt(&self, i: usize, j: usize) -> T {
        self.c[i][j]
    }

    /// Full fourth-order component C_mnpq.
    #[inline]
    pub fn entry(&self, m: usize, n: usize, p: usize, q: usize) -> T {
        self.c[voigt_index(m, n)][voigt_index(p, q)]
    }

    /// Double contraction (C : f)_ij = sum_kl C_ijkl f_kl, valid for real and
    /// complex strains through the shared Voigt contraction path.
    #[inline]
    pub fn ddot<S: Ring + Mul<T, Output = S>>(&self, f: &SymMat<S>) -> SymMat<S> {
        voigt66_apply(&self.c, f)
    }

    /// Quadratic form f : C : f.
    pub fn quadratic_form(&self, f: &SymMat<T>) -> T {
        f.ddot(&self.ddot(f))
    }

    /// Eigenvalue range of C as a symmetric operator on symmetric tensors.
    ///
    /// Computed from the orthonormal (Mandel) 6x6 representation, whose
    /// eigenvalues are exactly the operator eigenvalues; for an isotropic
    /// tensor they are {2 mu (x5), 3 lambda + 2 mu}.
    pub fn eigen_range(&self) -> (T, T) {
        let eig = self.mandel_matrix().symmetric_eigen().eigenvalues;
        let mut lo = eig[0];
        let mut hi = eig[0];
        for k in 1..6 {
            lo = Float::min(lo, eig[k]);
            hi = Float::max(hi, eig[k]);
        }
        (lo, hi)
    }

    /// Orthonormal (Mandel) 6x6 matrix: rows/cols scaled by sqrt(2) on shear
    /// slots so that the matrix acts on 6-vectors with the Euclidean inner
    /// product matching the tensor double contraction.
    pub fn mandel_matrix(&self) -> nalgebra::SMatrix<T, 6, 6> {
        let s = mandel_scales::<T>();
        nalgebra::SMatrix::<T, 6, 6>::from_fn(|i, j| self.c[i][j] * s[i] * s[j])
    }

    /// Inverse of [`StiffnessTensor::mandel_matrix`].
    pub fn from_mandel(m: &nalgebra::SMatrix<T, 6, 6>) -> Self {
        let s = mandel_scales::<T>();
        let mut c = [[T::zero(); 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                c[i][j] = m[(i, j)] / (s[i] * s[j]);
            }
        }
        StiffnessTensor { c }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut c = self.c;
        for i in 0..6 {
            for j in 0..6 {
                c[i][j] += o.c[i][j];
            }
        }
        StiffnessTensor { c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut c = self.c;
        for i in 0..6 {
            for j in 0..6 {
                c[i][j] -= o.c[i][j];
            }
        }
        StiffnessTensor { c }
    }

    pub fn scaled(&self, f: T) -> Self {
        let mut c = self.c;
        for i in 0..6 {
            for j in 0..6 {
                c[i][j] *= f;
            }
        }
        StiffnessTensor { c }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().flatten().all(|v| Float::is_finite(*v))
    }

    /// Max-norm distance, used by equality-style assertions in tests.
    pub fn max_abs_diff(&self, o: &Self) -> T {
        let mut m = T::zero();
        for i in 0..6 {
            for j in 0..6 {
                m = Float::max(m, Float::abs(self.c[i][j] - o.c[i][j]));
            }
        }
        m
    }
}

fn mandel_scales<T: Real>() -> [T; 6] {
    let r = Float::sqrt(T::of(2.0));
    [T::one(), T::one(), T::one(), r, r, r]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: full 3x3x3x3 expansion of the double contraction,
    /// four nested index loops, no Voigt shortcuts.
    fn ddot4_loops(c: &StiffnessTensor<f64>, f: &SymMat<f64>) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for m in 0..3 {
            for n in 0..3 {
                for p in 0..3 {
                    for q in 0..3 {
                        out[m][n] += c.entry(m, n, p, q) * f.get(p, q);
                    }
                }
            }
        }
        out
    }

    fn random_symmat(rng: &mut ChaCha8Rng) -> SymMat<f64> {
        SymMat(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
    }

    fn random_stiffness(rng: &mut ChaCha8Rng) -> StiffnessTensor<f64> {
        let v: Vec<f64> = (0..21).map(|_| rng.random_range(-1.0..1.0)).collect();
        StiffnessTensor::from_upper_triangle(&v).unwrap()
    }

    #[test]
    fn voigt_index_round_trips() {
        for k in 0..6 {
            let (i, j) = VOIGT_PAIRS[k];
            assert_eq!(voigt_index(i, j), k);
            assert_eq!(voigt_index(j, i), k);
        }
    }

    #[test]
    fn isotropic_values_lambda0_mu_half() {
        let c = StiffnessTensor::isotropic(LameParams::new(0.0, 0.5).unwrap());
        assert_eq!(c.entry(0, 0, 0, 0), 1.0);
        assert_eq!(c.entry(0, 0, 1, 1), 0.0);
        assert_eq!(c.entry(0, 1, 0, 1), 0.5);
        // This tensor is the identity on symmetric tensors.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let f = random_symmat(&mut rng);
            let g = c.ddot(&f);
            for k in 0..6 {
                assert_abs_diff_eq!(g.0[k], f.0[k], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn isotropic_values_lambda1_mu1() {
        let c = StiffnessTensor::isotropic(LameParams::new(1.0, 1.0).unwrap());
        assert_eq!(c.entry(0, 0, 0, 0), 3.0);
        assert_eq!(c.entry(0, 0, 1, 1), 1.0);
        assert_eq!(c.entry(1, 2, 1, 2), 1.0);
    }

    #[test]
    fn isotropic_eigen_range() {
        // Eigenvalues are 2 mu (deviatoric, x5) and 3 lambda + 2 mu (spheric).
        let c = StiffnessTensor::isotropic(LameParams::new(2.0, 1.0).unwrap());
        let (lo, hi) = c.eigen_range();
        assert_abs_diff_eq!(lo, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn lame_params_rejects_inadmissible_values() {
        assert!(LameParams::new(1.0, 0.0).is_err());
        assert!(LameParams::new(1.0, -1.0).is_err());
        assert!(LameParams::new(f64::NAN, 1.0).is_err());
        // lambda + 2*mu <= 0
        assert!(LameParams::new(-3.0, 1.0).is_err());
        // negative lambda is fine while lambda + 2*mu stays positive
        assert!(LameParams::new(-1.0, 1.0).is_ok());
    }

    #[test]
    fn full_matrix_round_trip() {
        let f = SymMat([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let full = f.to_full();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full[i][j], full[j][i]);
                assert_eq!(full[i][j], f.get(i, j));
            }
        }
        assert_eq!(SymMat::from_full(full), f);
    }

    #[test]
    fn ddot_matches_nine_term_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_symmat(&mut rng);
            let b = random_symmat(&mut rng);
            let mut direct = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    direct += a.get(i, j) * b.get(i, j);
                }
            }
            assert_abs_diff_eq!(a.ddot(&b), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn ddot4_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let c = random_stiffness(&mut rng);
            let f = random_symmat(&mut rng);
            let fast = c.ddot(&f);
            let slow = ddot4_loops(&c, &f);
            for i in 0..3 {
                for j in 0..3 {
                    let denom = slow[i][j].abs().max(1.0);
                    assert!(
                        ((fast.get(i, j) - slow[i][j]) / denom).abs() <= 1e-14,
                        "mismatch at ({i},{j}): {} vs {}",
                        fast.get(i, j),
                        slow[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn ddot4_identity_and_zero() {
        let c = StiffnessTensor::isotropic(LameParams::new(0.0, 0.5).unwrap());
        let z = SymMat::<f64>::zero();
        assert_eq!(c.ddot(&z), z);
        let f = SymMat([1.0, -2.0, 0.5, 0.25, -0.75, 2.0]);
        let g = c.ddot(&f);
        for k in 0..6 {
            assert_abs_diff_eq!(g.0[k], f.0[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn ddot4_self_adjoint_under_major_symmetry() {
        // ddot4(C, F) : G == F : ddot4(C, G) for symmetric C.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let c = random_stiffness(&mut rng);
            let f = random_symmat(&mut rng);
            let g = random_symmat(&mut rng);
            let lhs = c.ddot(&f).ddot(&g);
            let rhs = f.ddot(&c.ddot(&g));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn quadratic_form_values_and_bounds() {
        let c = StiffnessTensor::isotropic(LameParams::new(0.0, 0.5).unwrap());
        assert_abs_diff_eq!(c.quadratic_form(&SymMat::identity()), 3.0, epsilon = 1e-15);
        assert_eq!(c.quadratic_form(&SymMat::zero()), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let c = StiffnessTensor::isotropic(LameParams::new(1.3, 0.8).unwrap());
        let (lo, hi) = c.eigen_range();
        for _ in 0..50 {
            let f = random_symmat(&mut rng);
            let ff = f.ddot(&f);
            let q = c.quadratic_form(&f);
            assert!(q >= lo * ff - 1e-12 && q <= hi * ff + 1e-12);
        }
    }

    #[test]
    fn constructed_tensors_have_full_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cs = [
            StiffnessTensor::isotropic(LameParams::new(2.0, 1.0).unwrap()),
            random_stiffness(&mut rng),
        ];
        for c in &cs {
            for m in 0..3 {
                for n in 0..3 {
                    for p in 0..3 {
                        for q in 0..3 {
                            let v = c.entry(m, n, p, q);
                            assert_eq!(v, c.entry(n, m, p, q));
                            assert_eq!(v, c.entry(m, n, q, p));
                            assert_eq!(v, c.entry(p, q, m, n));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn upper_triangle_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let c = random_stiffness(&mut rng);
        let packed = c.upper_triangle();
        let c2 = StiffnessTensor::from_upper_triangle(&packed).unwrap();
        assert_eq!(c.max_abs_diff(&c2), 0.0);
    }

    #[test]
    fn complex_contraction_shares_weights() {
        // C : (f + i g) must equal (C : f) + i (C : g).
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let c = random_stiffness(&mut rng);
        let f = random_symmat(&mut rng);
        let g = random_symmat(&mut rng);
        let fc = SymMat(std::array::from_fn(|k| Complex::new(f.0[k], g.0[k])));
        let out = c.ddot(&fc);
        let re = c.ddot(&f);
        let im = c.ddot(&g);
        for k in 0..6 {
            assert_abs_diff_eq!(out.0[k].re, re.0[k], epsilon = 1e-14);
            assert_abs_diff_eq!(out.0[k].im, im.0[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn sym_outer_projects_vectors() {
        let a = [1.0, 2.0, 3.0];
        let b = [-0.5, 0.25, 1.0];
        let m = sym_outer::<f64>(a, b);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m.get(i, j), 0.5 * (a[i] * b[j] + a[j] * b[i]), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unit_strains_extract_columns() {
        let c = StiffnessTensor::isotropic(LameParams::new(1.7, 0.9).unwrap());
        for j in 0..6 {
            let e = SymMat::<f64>::unit_strain(j);
            let s = c.ddot(&e);
            for i in 0..6 {
                assert_abs_diff_eq!(s.0[i], c.voigt(i, j), epsilon = 1e-15);
            }
        }
    }
}
