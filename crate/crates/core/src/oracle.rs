//! Independent reference solutions the test suite measures the iterative
//! solvers against: the closed-form laminate tensor, Voigt/Reuss voxel-average
//! bounds, and direct dense solves of the discrete problems at small N.
//!
//! Nothing here shares code with the transform pipeline or the precomputed
//! symbol tables. The dense systems are assembled from first principles by
//! naive lattice sums and small dense inversions: acoustic-tensor Green
//! blocks for the basic scheme's frequency-space fixed point,
//! corner-difference stencils for the rotated-grid system, and trilinear
//! element quadrature for the nodal system. Agreement with the iterative
//! schemes therefore exercises the solver loop, the transform layout, and
//! the symbol code against an independent route.

use nalgebra::{DMatrix, DVector, SMatrix};
use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::micro::VoxelGrid;
use crate::scalar::Real;
use crate::spectral::{bin_to_freq, index_to_freq, GridField};
use crate::tensor::{sym_outer, sym_outer_c, voigt_index, LameParams, StiffnessTensor, SymMat};

type Mat3<T> = SMatrix<T, 3, 3>;

/// Extracts the Lame parameters of an isotropic stiffness tensor, rejecting
/// tensors that are not isotropic to within a tight relative tolerance.
fn isotropic_parameters<T: Real>(c: &StiffnessTensor<T>) -> Result<LameParams<T>> {
    let lambda = c.voigt(0, 1);
    let mu = c.voigt(3, 3);
    let params = LameParams::new(lambda, mu)?;
    let rebuilt = StiffnessTensor::isotropic(params);
    let scale = Float::max(c.max_abs_diff(&StiffnessTensor::zero()), T::one());
    let defect = c.max_abs_diff(&rebuilt);
    if defect > T::of(1e-10) * scale {
        return Err(Error::Material(format!(
            "laminate oracle requires isotropic phases (anisotropy defect {defect:?})"
        )));
    }
    Ok(params)
}

fn block3<T: Real>(m: &SMatrix<T, 6, 6>, rows: [usize; 3], cols: [usize; 3]) -> Mat3<T> {
    Mat3::from_fn(|r, c| m[(rows[r], cols[c])])
}

/// Exact effective stiffness of a rank-1 laminate of isotropic phases layered
/// along `axis`.
///
/// Works in the orthonormal 6x6 representation split into the three slots
/// carrying the layering axis (continuous traction across interfaces) and the
/// three in-plane slots (continuous strain): with per-phase blocks
/// A (normal-normal), B (normal-plane), D (plane-plane), the mixture is
/// A_eff = H = (sum f A^-1)^-1, B_eff = H K with K = sum f A^-1 B, and
/// D_eff = K^T H K + sum f (D - B^T A^-1 B).
pub fn laminate_effective<T: Real>(
    phases: &[(StiffnessTensor<T>, T)],
    axis: usize,
) -> Result<StiffnessTensor<T>> {
    if axis >= 3 {
        return Err(Error::Config(format!("laminate axis {axis} out of range")));
    }
    if phases.is_empty() {
        return Err(Error::Config("laminate needs at least one phase".into()));
    }
    let mut total = T::zero();
    for (_, f) in phases {
        if !(*f > T::zero()) || !Float::is_finite(*f) {
            return Err(Error::Geometry("laminate fractions must be positive".into()));
        }
        total += *f;
    }
    if Float::abs(total - T::one()) > T::of(1e-10) {
        return Err(Error::Geometry(format!(
            "laminate fractions must sum to 1, got {total:?}"
        )));
    }

    let (b_ax, c_ax) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let nslots = [axis, voigt_index(axis, b_ax), voigt_index(axis, c_ax)];
    let pslots = [b_ax, c_ax, voigt_index(b_ax, c_ax)];

    let mut sum_ainv = Mat3::<T>::zeros();
    let mut sum_k = Mat3::<T>::zeros();
    let mut sum_rest = Mat3::<T>::zeros();
    for (c, f) in phases {
        isotropic_parameters(c)?;
        let m = c.mandel_matrix();
        let a = block3(&m, nslots, nslots);
        let b = block3(&m, nslots, pslots);
        let d = block3(&m, pslots, pslots);
        let ainv = a
            .try_inverse()
            .ok_or_else(|| Error::Material("laminate phase has a singular normal block".into()))?;
        sum_ainv += ainv * *f;
        sum_k += ainv * b * *f;
        sum_rest += (d - b.transpose() * ainv * b) * *f;
    }
    let h = sum_ainv
        .try_inverse()
        .ok_or_else(|| Error::Material("laminate normal-block mixture is singular".into()))?;
    let b_eff = h * sum_k;
    let d_eff = sum_k.transpose() * h * sum_k + sum_rest;

    let mut m = SMatrix::<T, 6, 6>::zeros();
    for r in 0..3 {
        for c in 0..3 {
            m[(nslots[r], nslots[c])] = h[(r, c)];
            m[(nslots[r], pslots[c])] = b_eff[(r, c)];
            m[(pslots[c], nslots[r])] = b_eff[(r, c)];
            m[(pslots[r], pslots[c])] = d_eff[(r, c)];
        }
    }
    Ok(StiffnessTensor::from_mandel(&m))
}

/// Arithmetic (Voigt) and harmonic (Reuss) voxel averages of the stiffness.
///
/// The Reuss bound needs every phase invertible; for porous grids (or any
/// degenerate phase) it is `None` and only the Voigt average is meaningful.
pub fn voigt_reuss_bounds<T: Real>(
    grid: &VoxelGrid<T>,
) -> (StiffnessTensor<T>, Option<StiffnessTensor<T>>) {
    let voigt = grid.mean_stiffness();
    if grid.is_porous() {
        return (voigt, None);
    }
    let fractions = grid.volume_fractions();
    let mut acc = SMatrix::<T, 6, 6>::zeros();
    for (id, f) in fractions.iter().enumerate() {
        if !(*f > T::zero()) {
            continue;
        }
        match grid.stiffness_table()[id].mandel_matrix().try_inverse() {
            Some(inv) => acc += inv * *f,
            None => return (voigt, None),
        }
    }
    match acc.try_inverse() {
        Some(h) => (voigt, Some(StiffnessTensor::from_mandel(&h))),
        None => (voigt, None),
    }
}

/// One assembled dense linear system.
///
/// Unknown ordering: [`willot_system`] carries three displacement components
/// per retained frequency, frequencies by grid bin (lexicographic, zero bin
/// excluded); [`ms_system`] carries six orthonormal strain components per
/// frequency over every bin, with the zero bin pinned to the macroscopic
/// strain; [`fem_system`] carries three displacement components per node in
/// linear grid index order and appends the three mean-value constraint rows
/// at the end.
pub struct DenseSystem<T: Real> {
    pub matrix: DMatrix<Complex<T>>,
    pub rhs: DVector<Complex<T>>,
}

impl<T: Real> DenseSystem<T> {
    pub fn unknowns(&self) -> usize {
        self.rhs.len()
    }

    /// Largest entrywise deviation from A = A^H, a structural self-check.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for r in 0..self.matrix.nrows() {
            for c in 0..=r {
                let d = (self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm();
                worst = Float::max(worst, d);
            }
        }
        worst
    }

    /// Direct LU solve.
    ///
    /// # Panics
    ///
    /// Panics when the factorization hits a zero pivot or the solution's
    /// backward residual is far above roundoff: the builders deflate every
    /// known null space, so a singular system here means degenerate input
    /// rather than a recoverable condition.
    pub fn solve(&self) -> DVector<Complex<T>> {
        let x = self
            .matrix
            .clone()
            .lu()
            .solve(&self.rhs)
            .unwrap_or_else(|| panic!("dense system of {} unknowns is singular", self.unknowns()));
        let residual = (&self.matrix * &x - &self.rhs).norm();
        let scale = self.matrix.norm() * x.norm() + self.rhs.norm() + T::one();
        assert!(
            residual <= T::epsilon() * T::of(1e8) * scale,
            "dense solve residual {residual:?} indicates a numerically singular system"
        );
        x
    }
}

/// One retained frequency of a coefficient-space system: for each
/// displacement component r, the constant cell-strain tensor that multiplies
/// the plane-wave phase field of `xi`.
struct CoeffBasis<T: Real> {
    xi: [i64; 3],
    strain: [SymMat<Complex<T>>; 3],
}

fn unit_roots<T: Real>(n: usize) -> Vec<Complex<T>> {
    let tau = T::of(2.0) * T::PI();
    (0..n)
        .map(|k| Complex::from_polar(T::one(), tau * T::of_usize(k) / T::of_usize(n)))
        .collect()
}

/// Fills `out[I] = exp(2 pi i xi . I / n)` over cells in linear index order.
fn phase_field<T: Real>(n: usize, xi: [i64; 3], roots: &[Complex<T>], out: &mut [Complex<T>]) {
    let ni = n as i64;
    let at = |x: i64, i: usize| ((x * i as i64).rem_euclid(ni)) as usize;
    let mut pos = 0usize;
    for i1 in 0..n {
        let p1 = roots[at(xi[0], i1)];
        for i2 in 0..n {
            let p12 = p1 * roots[at(xi[1], i2)];
            for i3 in 0..n {
                out[pos] = p12 * roots[at(xi[2], i3)];
                pos += 1;
            }
        }
    }
}

/// For each used material id, the lattice sums S[delta] = sum over cells of
/// that phase of exp(2 pi i delta . I / n), indexed by the bin of delta.
/// These turn per-cell Gram sums into per-phase scalar products.
fn indicator_bin_sums<T: Real>(grid: &VoxelGrid<T>) -> Vec<(usize, Vec<Complex<T>>)> {
    let n = grid.n();
    let roots = unit_roots::<T>(n);
    let ids = grid.ids();
    grid.used_ids()
        .into_iter()
        .map(|id| {
            let mut cells = Vec::new();
            let mut idx = 0usize;
            for i1 in 0..n {
                for i2 in 0..n {
                    for i3 in 0..n {
                        if ids[idx] as usize == id {
                            cells.push([i1, i2, i3]);
                        }
                        idx += 1;
                    }
                }
            }
            let mut sums = vec![Complex::<T>::zero(); grid.len()];
            let mut pos = 0usize;
            for d1 in 0..n {
                for d2 in 0..n {
                    for d3 in 0..n {
                        let mut s = Complex::<T>::zero();
                        for c in &cells {
                            s = s + roots[(d1 * c[0]) % n]
                                * roots[(d2 * c[1]) % n]
                                * roots[(d3 * c[2]) % n];
                        }
                        sums[pos] = s;
                        pos += 1;
                    }
                }
            }
            (id, sums)
        })
        .collect()
}

/// Acoustic tensor of the isotropic reference at integer frequency `xi`:
/// lambda0 xi xi^T + mu0 (|xi|^2 I + xi xi^T). The wavenumber scale 2 pi
/// cancels out of the strain Green operator and is omitted throughout.
fn acoustic_tensor<T: Real>(reference: &LameParams<T>, xi: [i64; 3]) -> Mat3<T> {
    let x = Mat3::<T>::from_fn(|r, c| T::of_i64(xi[r]) * T::of_i64(xi[c]));
    let norm_sq = T::of_i64(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    x * (reference.lambda + reference.mu) + Mat3::identity() * (reference.mu * norm_sq)
}

/// 3x6 matrix taking the orthonormal components of a symmetric tensor to the
/// contraction (tensor . xi).
fn mandel_contraction<T: Real>(xi: [i64; 3]) -> SMatrix<T, 3, 6> {
    let mut k = SMatrix::<T, 3, 6>::zeros();
    for r in 0..3 {
        for c in 0..3 {
            k[(r, voigt_index(r, c))] += T::of_i64(xi[c]);
        }
    }
    let inv_sqrt2 = T::one() / Float::sqrt(T::of(2.0));
    for col in 3..6 {
        for r in 0..3 {
            k[(r, col)] *= inv_sqrt2;
        }
    }
    k
}

/// Orthonormal-components matrix of the strain Green operator of the
/// reference medium at integer frequency `xi`: K^T A^-1 K, which maps a
/// polarization tensor to minus the strain response. Symmetric positive
/// semidefinite by construction.
fn green_strain_mandel<T: Real>(reference: &LameParams<T>, xi: [i64; 3]) -> SMatrix<T, 6, 6> {
    let a_inv = acoustic_tensor(reference, xi)
        .try_inverse()
        .expect("acoustic tensor is singular at a nonzero frequency");
    let k = mandel_contraction::<T>(xi);
    k.transpose() * a_inv * k
}

/// The frequency whose lattice plane wave is the complex conjugate of `xi`'s:
/// every component negated, except band-edge components (2 xi = -n), whose
/// negation falls outside the frequency set and aliases back onto themselves.
fn mirror_freq(xi: [i64; 3], n: usize) -> [i64; 3] {
    let ni = n as i64;
    xi.map(|x| if 2 * x == -ni { x } else { -x })
}

/// Green matrix averaged over a frequency and its conjugate mirror. This is
/// the symbol the basic scheme effectively applies once each iterate is
/// projected back onto real fields: discarding the imaginary part of an
/// inverse transform replaces the per-bin update by the mean of the bin's and
/// its mirror's. Away from the band edge the mirror is the negated frequency
/// and the average collapses to the plain Green matrix; on mixed band-edge
/// bins the two genuinely differ and the average (hence the scheme's fixed
/// point) depends on the reference medium.
fn mirror_averaged_green<T: Real>(
    reference: &LameParams<T>,
    xi: [i64; 3],
    n: usize,
) -> SMatrix<T, 6, 6> {
    let m = mirror_freq(xi, n);
    if m == xi {
        green_strain_mandel(reference, xi)
    } else {
        (green_strain_mandel(reference, xi) + green_strain_mandel(reference, m)) * T::of(0.5)
    }
}

/// Orthonormal (shear-scaled) components of a symmetric tensor.
fn sym_to_mandel<T: Real>(s: &SymMat<T>) -> [T; 6] {
    let sqrt2 = Float::sqrt(T::of(2.0));
    std::array::from_fn(|i| if i < 3 { s.0[i] } else { s.0[i] * sqrt2 })
}

/// DFT of the orthonormal-components stiffness deviation field: for each
/// difference bin delta, N^-3 sum over cells of (C[I] - C_ref)
/// exp(-2 pi i delta . I / N), folded through the per-phase indicator sums.
fn stiffness_deviation_bins<T: Real>(
    grid: &VoxelGrid<T>,
    reference: &LameParams<T>,
) -> Vec<SMatrix<Complex<T>, 6, 6>> {
    let table = grid.stiffness_table();
    let ref_mandel = StiffnessTensor::isotropic(*reference).mandel_matrix();
    let sums = indicator_bin_sums::<T>(grid);
    let invvol = T::one() / T::of_usize(grid.len());
    let deviations: Vec<SMatrix<T, 6, 6>> = sums
        .iter()
        .map(|(id, _)| table[*id].mandel_matrix() - ref_mandel)
        .collect();
    (0..grid.len())
        .map(|delta| {
            let mut acc = SMatrix::<Complex<T>, 6, 6>::zeros();
            for (dev, (_, s)) in deviations.iter().zip(&sums) {
                let w = s[delta].conj() * invvol;
                acc += dev.map(|v| w * v);
            }
            acc
        })
        .collect()
}

/// Gradient of the trilinear interpolant of the nodal plane wave
/// exp(2 pi i xi . J / n), evaluated at a cell center, divided by the cell's
/// own phase: the corner-difference stencil (N/4) (sum over high corners -
/// sum over low corners) along each axis.
fn center_gradient_symbol<T: Real>(xi: [i64; 3], n: usize) -> [Complex<T>; 3] {
    let tau = T::of(2.0) * T::PI();
    let nf = T::of_usize(n);
    let quarter = nf / T::of(4.0);
    let mut g = [Complex::<T>::zero(); 3];
    for c in 0..8usize {
        let mut theta = T::zero();
        for m in 0..3 {
            if (c >> m) & 1 == 1 {
                theta += tau * T::of_i64(xi[m]) / nf;
            }
        }
        let val = Complex::from_polar(T::one(), theta);
        for m in 0..3 {
            if (c >> m) & 1 == 1 {
                g[m] = g[m] + val;
            } else {
                g[m] = g[m] - val;
            }
        }
    }
    for v in &mut g {
        *v = *v * quarter;
    }
    g
}

fn unit_cvec<T: Real>(r: usize) -> [Complex<T>; 3] {
    let mut e = [Complex::<T>::zero(); 3];
    e[r] = Complex::new(T::one(), T::zero());
    e
}

/// Basis of the reduced-set nodal system: frequencies with every component
/// strictly inside the symmetric half-open band, strain = center-point
/// gradient stencil of the nodal plane wave (no cell averaging; the system
/// collocates at cell centers).
fn willot_basis<T: Real>(n: usize) -> Vec<CoeffBasis<T>> {
    let ni = n as i64;
    let reduced = |x: i64| 2 * x > -ni && 2 * x < ni;
    let mut out = Vec::new();
    for j1 in 0..n {
        for j2 in 0..n {
            for j3 in 0..n {
                if j1 == 0 && j2 == 0 && j3 == 0 {
                    continue;
                }
                let xi = [bin_to_freq(j1, n), bin_to_freq(j2, n), bin_to_freq(j3, n)];
                if !(reduced(xi[0]) && reduced(xi[1]) && reduced(xi[2])) {
                    continue;
                }
                let g = center_gradient_symbol::<T>(xi, n);
                let strain = std::array::from_fn(|r| sym_outer_c(g, unit_cvec(r)));
                out.push(CoeffBasis { xi, strain });
            }
        }
    }
    out
}

/// Hermitian double contraction conj(a) : b with tensorial shear doubling.
fn herm_ddot<T: Real>(a: &SymMat<Complex<T>>, b: &SymMat<Complex<T>>) -> Complex<T> {
    let two = T::of(2.0);
    let mut acc = Complex::<T>::zero();
    for s in 0..6 {
        let term = a.0[s].conj() * b.0[s];
        acc = acc + if s < 3 { term } else { term * two };
    }
    acc
}

/// Galerkin matrix and right-hand side over the given coefficient basis:
/// A[p][q] = mean over cells of conj(strain_p) : C : strain_q, rhs[p] =
/// -mean of conj(strain_p) : C : E, with the per-cell sums folded into the
/// per-phase lattice sums of [`indicator_bin_sums`].
fn assemble_coefficient_system<T: Real>(
    grid: &VoxelGrid<T>,
    macro_strain: &SymMat<T>,
    basis: &[CoeffBasis<T>],
) -> DenseSystem<T> {
    let n = grid.n();
    let ni = n as i64;
    let nunk = 3 * basis.len();
    let invvol = T::one() / T::of_usize(grid.len());
    let table = grid.stiffness_table();
    let sums = indicator_bin_sums::<T>(grid);

    let stresses: Vec<Vec<SymMat<Complex<T>>>> = sums
        .iter()
        .map(|(id, _)| {
            basis
                .iter()
                .flat_map(|b| b.strain.iter().map(|s| table[*id].ddot(s)))
                .collect()
        })
        .collect();
    let e_stress: Vec<SymMat<Complex<T>>> = sums
        .iter()
        .map(|(id, _)| table[*id].ddot(&macro_strain.to_complex()))
        .collect();

    let mut a = DMatrix::<Complex<T>>::zeros(nunk, nunk);
    let mut rhs = DVector::<Complex<T>>::zeros(nunk);
    for p in 0..nunk {
        let bp = &basis[p / 3];
        let sp = &bp.strain[p % 3];
        for q in 0..nunk {
            let bq = &basis[q / 3];
            let mut delta = 0usize;
            for m in 0..3 {
                delta = delta * n + (bq.xi[m] - bp.xi[m]).rem_euclid(ni) as usize;
            }
            let mut acc = Complex::<T>::zero();
            for (mat, (_, s)) in sums.iter().enumerate() {
                acc = acc + herm_ddot(sp, &stresses[mat][q]) * s[delta];
            }
            a[(p, q)] = acc * invvol;
        }
        let mut selfbin = 0usize;
        for m in 0..3 {
            selfbin = selfbin * n + bp.xi[m].rem_euclid(ni) as usize;
        }
        let mut racc = Complex::<T>::zero();
        for (mat, (_, s)) in sums.iter().enumerate() {
            racc = racc + herm_ddot(sp, &e_stress[mat]) * s[selfbin].conj();
        }
        rhs[p] = -(racc * invvol);
    }
    DenseSystem { matrix: a, rhs }
}

/// Evaluates the complex cell field sum over the basis of coefficient *
/// strain tensor * phase, the fluctuation part of a coefficient solution.
fn coefficient_complex_field<T: Real>(
    n: usize,
    basis: &[CoeffBasis<T>],
    x: &DVector<Complex<T>>,
) -> Vec<SymMat<Complex<T>>> {
    let vol = n * n * n;
    let roots = unit_roots::<T>(n);
    let mut acc = vec![SymMat::<Complex<T>>::zero(); vol];
    let mut phase = vec![Complex::<T>::zero(); vol];
    for (k, b) in basis.iter().enumerate() {
        let mut comb = SymMat::<Complex<T>>::zero();
        for r in 0..3 {
            comb = comb.add(&b.strain[r].scaled(x[3 * k + r]));
        }
        phase_field(n, b.xi, &roots, &mut phase);
        for (cell, ph) in phase.iter().enumerate() {
            acc[cell] = acc[cell].add(&comb.scaled(*ph));
        }
    }
    acc
}

/// Real total strain field E + fluctuation from a solved coefficient system.
///
/// # Panics
///
/// Panics if the reconstructed field has a meaningful imaginary part, which
/// would mean the solved system was not conjugate-symmetric.
fn coefficient_strain_field<T: Real>(
    n: usize,
    macro_strain: &SymMat<T>,
    basis: &[CoeffBasis<T>],
    x: &DVector<Complex<T>>,
) -> GridField<T> {
    let fluct = coefficient_complex_field(n, basis, x);
    let mut out = GridField::zeros(n, 6);
    let mut worst_im = T::zero();
    let mut largest = T::zero();
    for (cell, t) in fluct.iter().enumerate() {
        for s in 0..6 {
            worst_im = Float::max(worst_im, Float::abs(t.0[s].im));
            largest = Float::max(largest, Float::abs(t.0[s].re));
        }
        out.set_sym(cell, &macro_strain.add(&t.re()));
    }
    assert!(
        worst_im <= T::epsilon() * T::of(1e6) * (T::one() + largest),
        "dense solve produced a non-real strain field (max imag {worst_im:?})"
    );
    out
}

/// Frequency-space linear system whose unique solution is the basic scheme's
/// fixed point: six orthonormal strain components per bin, the zero bin
/// pinned to the macroscopic strain, and every other bin row reading
/// strain + mirror-averaged Green times (stiffness deviation convolved with
/// strain) = 0. Products of cell fields become cyclic convolutions over bins,
/// so the stiffness deviation enters through its lattice DFT.
///
/// The matrix is intentionally not Hermitian: it restates the update map, not
/// an energy. Its solution is conjugate-symmetric across mirror bins because
/// the deviation blocks are DFTs of a real field and the Green factor is
/// shared within each mirror pair, so the reconstructed strain field is real.
pub fn ms_system<T: Real>(
    grid: &VoxelGrid<T>,
    macro_strain: &SymMat<T>,
    reference: &LameParams<T>,
) -> DenseSystem<T> {
    let n = grid.n();
    let nn = grid.len();
    let dim = 6 * nn;
    let deviation = stiffness_deviation_bins(grid, reference);
    let mut a = DMatrix::<Complex<T>>::zeros(dim, dim);
    let mut rhs = DVector::<Complex<T>>::zeros(dim);

    let one = Complex::new(T::one(), T::zero());
    let em = sym_to_mandel(macro_strain);
    for s in 0..6 {
        a[(s, s)] = one;
        rhs[s] = Complex::new(em[s], T::zero());
    }

    for j in 1..nn {
        let xi = index_to_freq(j, n);
        let g = mirror_averaged_green(reference, xi, n).map(|v| Complex::new(v, T::zero()));
        let bj = [j / (n * n), (j / n) % n, j % n];
        for jp in 0..nn {
            let bp = [jp / (n * n), (jp / n) % n, jp % n];
            let mut delta = 0usize;
            for m in 0..3 {
                delta = delta * n + (bj[m] + n - bp[m]) % n;
            }
            let block = g * deviation[delta];
            for s in 0..6 {
                for sp in 0..6 {
                    a[(6 * j + s, 6 * jp + sp)] = block[(s, sp)];
                }
            }
        }
        for s in 0..6 {
            a[(6 * j + s, 6 * j + s)] += one;
        }
    }
    DenseSystem { matrix: a, rhs }
}

/// Real strain field reconstructed from solved per-bin orthonormal strain
/// coefficients (zero bin included, so the mean rides along).
///
/// # Panics
///
/// Panics if the reconstruction has a meaningful imaginary part, which would
/// mean the solved system broke the mirror conjugate symmetry.
fn spectral_strain_field<T: Real>(n: usize, x: &DVector<Complex<T>>) -> GridField<T> {
    let nn = n * n * n;
    let roots = unit_roots::<T>(n);
    let inv_sqrt2 = T::one() / Float::sqrt(T::of(2.0));
    let mut acc = vec![SymMat::<Complex<T>>::zero(); nn];
    let mut phase = vec![Complex::<T>::zero(); nn];
    for j in 0..nn {
        let mut t = SymMat::<Complex<T>>::zero();
        for s in 0..6 {
            t.0[s] = if s < 3 { x[6 * j + s] } else { x[6 * j + s] * inv_sqrt2 };
        }
        phase_field(n, index_to_freq(j, n), &roots, &mut phase);
        for (cell, ph) in phase.iter().enumerate() {
            acc[cell] = acc[cell].add(&t.scaled(*ph));
        }
    }
    let mut out = GridField::zeros(n, 6);
    let mut worst_im = T::zero();
    let mut largest = T::zero();
    for (cell, t) in acc.iter().enumerate() {
        for s in 0..6 {
            worst_im = Float::max(worst_im, Float::abs(t.0[s].im));
            largest = Float::max(largest, Float::abs(t.0[s].re));
        }
        out.set_sym(cell, &t.re());
    }
    assert!(
        worst_im <= T::epsilon() * T::of(1e6) * (T::one() + largest),
        "dense solve produced a non-real strain field (max imag {worst_im:?})"
    );
    out
}

/// Dense reduced-integration system over the reduced frequency set with
/// center-point gradient stencils, the variational form of the rotated-grid
/// scheme's fixed point. Restricting the basis to the reduced set removes the
/// checkerboard null modes of center-point collocation.
pub fn willot_system<T: Real>(grid: &VoxelGrid<T>, macro_strain: &SymMat<T>) -> DenseSystem<T> {
    assemble_coefficient_system(grid, macro_strain, &willot_basis(grid.n()))
}

/// Direct dense counterpart of the basic scheme: solves the frequency-space
/// system of [`ms_system`] in one shot and returns the per-cell strain field.
///
/// Unlike the other dense solvers this one genuinely depends on the reference
/// medium: the scheme's per-iteration projection onto real fields averages
/// the Green symbol over mirror bin pairs, and on mixed band-edge bins that
/// average moves with (lambda0, mu0). Pass the same reference the iterative
/// run used (it is recorded on the solve result). Intended for N <= 8 (the
/// matrix has (6 N^3)^2 complex entries).
pub fn dense_solve_ms<T: Real>(
    grid: &VoxelGrid<T>,
    macro_strain: &SymMat<T>,
    reference: &LameParams<T>,
) -> GridField<T> {
    let sys = ms_system(grid, macro_strain, reference);
    let x = sys.solve();
    spectral_strain_field(grid.n(), &x)
}

/// Direct dense counterpart of the rotated-grid scheme: returns the per-cell
/// strain field E + center-point symmetric gradient of the solution.
///
/// The reduced-set problem does not involve the reference medium; the
/// parameter is accepted only for call-shape parity with [`dense_solve_ms`].
pub fn dense_solve_willot<T: Real>(
    grid: &VoxelGrid<T>,
    macro_strain: &SymMat<T>,
    reference: &LameParams<T>,
) -> GridField<T> {
    let _ = reference;
    let basis = willot_basis(grid.n());
    let sys = assemble_coefficient_system(grid, macro_strain, &basis);
    let x = sys.solve();
    coefficient_strain_field(grid.n(), macro_strain, &basis, &x)
}

/// Gradient weights of the 8 corner shape functions of a trilinear element
/// with edge 1/n at local coordinate `t` in [0,1]^3; corner bit m selects the
/// high corner along axis m, `w[m][c]` multiplies corner value c in d/dx_m.
fn element_grad_weights<T: Real>(t: [T; 3], n: usize) -> [[T; 8]; 3] {
    let nf = T::of_usize(n);
    let mut w = [[T::zero(); 8]; 3];
    for c in 0..8usize {
        let high = [(c & 1) == 1, (c >> 1) & 1 == 1, (c >> 2) & 1 == 1];
        for m in 0..3 {
            let mut v = if high[m] { nf } else { -nf };
            for mm in 0..3 {
                if mm != m {
                    v *= if high[mm] { t[mm] } else { T::one() - t[mm] };
                }
            }
            w[m][c] = v;
        }
    }
    w
}

/// Dense full-integration trilinear element system on nodal displacements:
/// per-cell stiffness integrated exactly by 2x2x2 Gauss quadrature, periodic
/// wrap-around, and three appended rows pinning the mean of each displacement
/// component to zero.
pub fn fem_system<T: Real>(grid: &VoxelGrid<T>, macro_strain: &SymMat<T>) -> DenseSystem<T> {
    let n = grid.n();
    let nn = grid.len();
    let dof = 3 * nn;
    let mut a = DMatrix::<Complex<T>>::zeros(dof + 3, dof + 3);
    let mut rhs = DVector::<Complex<T>>::zeros(dof + 3);

    let half = T::of(0.5);
    let shift = Float::sqrt(T::one() / T::of(3.0)) * half;
    let coord = |hi: bool| if hi { half + shift } else { half - shift };
    let grads: [[[T; 8]; 3]; 8] = std::array::from_fn(|b| {
        element_grad_weights(
            [
                coord(b & 1 == 1),
                coord((b >> 1) & 1 == 1),
                coord((b >> 2) & 1 == 1),
            ],
            n,
        )
    });
    let w_gauss = T::one() / (T::of(8.0) * T::of_usize(nn));

    let mut idx = 0usize;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let c_i = grid.stiffness_at(idx);
                let stress_e = c_i.ddot(macro_strain);
                let nodes: [usize; 8] = std::array::from_fn(|c| {
                    let j1 = (i1 + (c & 1)) % n;
                    let j2 = (i2 + ((c >> 1) & 1)) % n;
                    let j3 = (i3 + ((c >> 2) & 1)) % n;
                    (j1 * n + j2) * n + j3
                });
                for w in &grads {
                    let mut shapes = [[SymMat::<T>::zero(); 3]; 8];
                    let mut stresses = [[SymMat::<T>::zero(); 3]; 8];
                    for c in 0..8 {
                        let g = [w[0][c], w[1][c], w[2][c]];
                        for r in 0..3 {
                            let mut e = [T::zero(); 3];
                            e[r] = T::one();
                            let sh = sym_outer(g, e);
                            stresses[c][r] = c_i.ddot(&sh);
                            shapes[c][r] = sh;
                        }
                    }
                    for c in 0..8 {
                        for r in 0..3 {
                            let row = 3 * nodes[c] + r;
                            rhs[row] -= Complex::new(w_gauss * shapes[c][r].ddot(&stress_e), T::zero());
                            for cc in 0..8 {
                                for s in 0..3 {
                                    let col = 3 * nodes[cc] + s;
                                    let v = w_gauss * shapes[c][r].ddot(&stresses[cc][s]);
                                    a[(row, col)] += Complex::new(v, T::zero());
                                }
                            }
                        }
                    }
                }
                idx += 1;
            }
        }
    }

    let one = Complex::new(T::one(), T::zero());
    for r in 0..3 {
        for j in 0..nn {
            a[(dof + r, 3 * j + r)] = one;
            a[(3 * j + r, dof + r)] = one;
        }
    }
    DenseSystem { matrix: a, rhs }
}

/// Direct dense counterpart of the displacement scheme: the nodal
/// displacement field solving the fully integrated trilinear element problem
/// under the imposed macroscopic strain, with zero mean per component.
/// Intended for N <= 8.
pub fn dense_solve_fem<T: Real>(grid: &VoxelGrid<T>, macro_strain: &SymMat<T>) -> GridField<T> {
    let sys = fem_system(grid, macro_strain);
    let x = sys.solve();
    let n = grid.n();
    let mut out = GridField::zeros(n, 3);
    let mut worst_im = T::zero();
    for j in 0..grid.len() {
        for r in 0..3 {
            let v = x[3 * j + r];
            worst_im = Float::max(worst_im, Float::abs(v.im));
            out.comp_mut(r)[j] = v.re;
        }
    }
    assert!(
        worst_im <= T::epsilon() * T::of(1e6),
        "nodal dense solve produced a non-real displacement"
    );
    out
}
