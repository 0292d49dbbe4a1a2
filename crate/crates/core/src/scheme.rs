//! Fixed-point homogenization solvers on voxel grids: a strain-based scheme
//! driven by the continuous Green symbol, its finite-difference variant on
//! the reduced frequency set, and a displacement-based scheme built on
//! Gauss-point gradients of trilinear elements. Effective stiffness tensors
//! come from running six unit load cases.

use num_complex::Complex;
use num_traits::{Float, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::micro::VoxelGrid;
use crate::scalar::Real;
use crate::spectral::fft::FftEngine;
use crate::spectral::green::{gauss_coord, polarization_flux, GreenTable, SymbolKind, GAUSS_SIGNS};
use crate::spectral::{GridField, SpectralField};
use crate::tensor::{LameParams, StiffnessTensor, SymMat, VOIGT_PAIRS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Basic,
    Willot,
    Fem,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Basic => "basic",
            Scheme::Willot => "willot",
            Scheme::Fem => "fem",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Scheme::Basic),
            "willot" => Ok(Scheme::Willot),
            "fem" => Ok(Scheme::Fem),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected basic, willot, or fem)"
            ))),
        }
    }
}

/// Reference-medium choice: derived from the grid's coefficient range, or
/// fixed by hand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference<T> {
    Auto,
    Manual(LameParams<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig<T> {
    pub scheme: Scheme,
    pub reference: Reference<T>,
    /// relative update-norm threshold (dimensionless)
    pub tolerance: T,
    pub max_iterations: usize,
    /// imposed macroscopic strain (tensorial components)
    pub macro_strain: SymMat<T>,
    /// trade N^3 memory for per-iteration symbol reuse
    pub precompute_symbols: bool,
    /// measure the fixed-point residual of the returned field by one extra
    /// update pass
    pub check_equilibrium: bool,
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(scheme: Scheme) -> Self {
        SchemeConfig {
            scheme,
            reference: Reference::Auto,
            tolerance: T::of(1e-8),
            max_iterations: 10_000,
            macro_strain: SymMat::zero(),
            precompute_symbols: false,
            check_equilibrium: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) || !Float::is_finite(self.tolerance) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !self.macro_strain.is_finite() {
            return Err(Error::Config("macroscopic strain must be finite".into()));
        }
        Ok(())
    }
}

/// Converged (or abandoned) solver state.
#[derive(Clone, Debug)]
pub enum FieldResult<T> {
    /// voxel strain field, 6 components
    Strain(GridField<T>),
    /// nodal displacement field, 3 components
    Displacement(GridField<T>),
}

#[derive(Clone, Debug)]
pub struct SolveResult<T> {
    pub converged: bool,
    /// residual per iteration; its length is the iteration count
    pub residuals: Vec<T>,
    /// largest imaginary-to-real norm ratio discarded by inverse transforms
    pub discarded_imag: T,
    /// volume average of stress at the returned field
    pub average_stress: SymMat<T>,
    pub field: FieldResult<T>,
    /// fixed-point residual of the returned field, when requested
    pub equilibrium_residual: Option<T>,
    /// reference medium the run actually used
    pub reference: LameParams<T>,
}

impl<T: Real> SolveResult<T> {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    pub fn strain(&self) -> Option<&GridField<T>> {
        match &self.field {
            FieldResult::Strain(f) => Some(f),
            FieldResult::Displacement(_) => None,
        }
    }

    pub fn displacement(&self) -> Option<&GridField<T>> {
        match &self.field {
            FieldResult::Displacement(f) => Some(f),
            FieldResult::Strain(_) => None,
        }
    }
}

/// 6x6 effective stiffness assembled from six unit-strain load cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTensor<T> {
    pub tensor: StiffnessTensor<T>,
    pub scheme: Scheme,
    pub n: usize,
    pub converged: bool,
    /// Frobenius norm of the pre-symmetrization asymmetry
    pub asymmetry: T,
    pub iterations: [usize; 6],
}

/// Resolves the reference medium: manual parameters are revalidated, "auto"
/// centers an isotropic medium on the grid's coefficient range with
/// mu0 = (lo + hi)/4 and lambda0 = mu0.
pub fn resolve_reference<T: Real>(
    grid: &VoxelGrid<T>,
    reference: Reference<T>,
) -> Result<LameParams<T>> {
    match reference {
        Reference::Manual(lame) => {
            if !(lame.mu > T::zero() && lame.lambda + T::of(2.0) * lame.mu > T::zero()) {
                return Err(Error::Config(format!(
                    "reference medium (lambda {:?}, mu {:?}) is not strongly elliptic",
                    lame.lambda, lame.mu
                )));
            }
            Ok(lame)
        }
        Reference::Auto => {
            let (lo, hi) = grid.coefficient_contrast();
            let mu = (lo + hi) / T::of(4.0);
            LameParams::new(mu, mu)
        }
    }
}

/// Runs the configured scheme on a grid.
pub fn run_scheme<T: Real>(grid: &VoxelGrid<T>, cfg: &SchemeConfig<T>) -> Result<SolveResult<T>> {
    match cfg.scheme {
        Scheme::Basic => run_basic(grid, cfg),
        Scheme::Willot => run_willot(grid, cfg),
        Scheme::Fem => run_fem(grid, cfg),
    }
}

/// Strain iteration with the continuous Green symbol applied on every
/// nonzero frequency; the mean is pinned to the macroscopic strain each
/// iteration.
pub fn run_basic<T: Real>(grid: &VoxelGrid<T>, cfg: &SchemeConfig<T>) -> Result<SolveResult<T>> {
    run_strain_scheme(grid, cfg, SymbolKind::Basic)
}

/// Strain iteration with the finite-difference symbol on the reduced
/// frequency set; coefficients outside it are zeroed exactly.
pub fn run_willot<T: Real>(grid: &VoxelGrid<T>, cfg: &SchemeConfig<T>) -> Result<SolveResult<T>> {
    run_strain_scheme(grid, cfg, SymbolKind::Willot)
}

fn run_strain_scheme<T: Real>(
    grid: &VoxelGrid<T>,
    cfg: &SchemeConfig<T>,
    kind: SymbolKind,
) -> Result<SolveResult<T>> {
    cfg.validate()?;
    let label = if kind == SymbolKind::Basic { "basic" } else { "willot" };
    if grid.is_porous() {
        return Err(Error::Unsupported(format!(
            "the {label} scheme is known to stall on porous grids; use the fem scheme"
        )));
    }
    let lame = resolve_reference(grid, cfg.reference)?;
    let cref = StiffnessTensor::isotropic(lame);
    let deltas: Vec<StiffnessTensor<T>> =
        grid.stiffness_table().iter().map(|c| c.sub(&cref)).collect();
    let n = grid.n();
    let table = GreenTable::new(kind, n, lame, cfg.precompute_symbols);
    let engine = FftEngine::new(n);

    let mut eps = GridField::constant_sym(n, &cfg.macro_strain);
    let mut next = GridField::zeros(n, 6);
    let mut spec = SpectralField::zeros(n, 6);
    let denom = denominator(&cfg.macro_strain, n);
    let e_complex = cfg.macro_strain.to_complex();

    let mut residuals = Vec::new();
    let mut discarded = T::zero();
    let mut converged = false;
    for it in 1..=cfg.max_iterations {
        let r = strain_step(
            grid, &deltas, &table, &engine, &eps, &mut next, &mut spec, &e_complex, denom,
            &mut discarded,
        );
        residuals.push(r);
        std::mem::swap(&mut eps, &mut next);
        log::debug!("{label} iteration {it}: residual {r:?}");
        if r <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    log::info!(
        "{label} N={n}: {} iterations, converged={converged}, discarded imag {discarded:?}",
        residuals.len()
    );

    let equilibrium_residual = if cfg.check_equilibrium {
        Some(strain_step(
            grid, &deltas, &table, &engine, &eps, &mut next, &mut spec, &e_complex, denom,
            &mut discarded,
        ))
    } else {
        None
    };

    let average_stress = average_stress_from_strain(grid, &eps);
    Ok(SolveResult {
        converged,
        residuals,
        discarded_imag: discarded,
        average_stress,
        field: FieldResult::Strain(eps),
        equilibrium_residual,
        reference: lame,
    })
}

/// One strain update: polarization, forward transform, symbol application
/// with the mean pinned, inverse transform. Returns the normalized update
/// norm; `next` receives the updated field.
#[allow(clippy::too_many_arguments)]
fn strain_step<T: Real>(
    grid: &VoxelGrid<T>,
    deltas: &[StiffnessTensor<T>],
    table: &GreenTable<T>,
    engine: &FftEngine<T>,
    eps: &GridField<T>,
    next: &mut GridField<T>,
    spec: &mut SpectralField<T>,
    e_complex: &SymMat<Complex<T>>,
    denom: T,
    discarded: &mut T,
) -> T {
    let ids = grid.ids();
    for idx in 0..ids.len() {
        let t = deltas[ids[idx] as usize].ddot(&eps.sym_at(idx));
        next.set_sym(idx, &t);
    }
    engine.forward_into(next, spec);

    let axes = table.axes();
    let willot = table.kind() == SymbolKind::Willot;
    let zero = SymMat([Complex::<T>::zero(); 6]);
    for idx in 1..spec.len() {
        if willot && !axes.in_reduced(axes.bins_of(idx)) {
            spec.set_sym(idx, &zero);
            continue;
        }
        let tau = spec.sym_at(idx);
        let update = table.apply_gamma(idx, &tau).scaled(-T::one());
        spec.set_sym(idx, &update);
    }
    spec.set_sym(0, e_complex);

    let imag = engine.inverse_into(spec, next);
    *discarded = Float::max(*discarded, imag);
    next.dist_l2(eps, true) / denom
}

/// Displacement iteration: Gauss-point polarizations per sign pattern,
/// averaged right-hand side in Fourier space, 3x3 solve per frequency, with
/// the mean displacement pinned to zero.
pub fn run_fem<T: Real>(grid: &VoxelGrid<T>, cfg: &SchemeConfig<T>) -> Result<SolveResult<T>> {
    cfg.validate()?;
    let lame = resolve_reference(grid, cfg.reference)?;
    let cref = StiffnessTensor::isotropic(lame);
    let deltas: Vec<StiffnessTensor<T>> =
        grid.stiffness_table().iter().map(|c| c.sub(&cref)).collect();
    let n = grid.n();
    let table = GreenTable::new(SymbolKind::Fem, n, lame, cfg.precompute_symbols);
    let engine = FftEngine::new(n);

    let mut u = GridField::zeros(n, 3);
    let mut next = GridField::zeros(n, 3);
    let mut scratch = FemScratch {
        tau: GridField::zeros(n, 6),
        tau_hat: SpectralField::zeros(n, 6),
        zeta: SpectralField::zeros(n, 3),
    };
    let denom = denominator(&cfg.macro_strain, n);

    let mut residuals = Vec::new();
    let mut discarded = T::zero();
    let mut converged = false;
    for it in 1..=cfg.max_iterations {
        let r = fem_step(
            grid, &deltas, &table, &engine, &cfg.macro_strain, &u, &mut next, &mut scratch,
            denom, &mut discarded,
        );
        residuals.push(r);
        std::mem::swap(&mut u, &mut next);
        log::debug!("fem iteration {it}: residual {r:?}");
        if r <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    log::info!(
        "fem N={n}: {} iterations, converged={converged}, discarded imag {discarded:?}",
        residuals.len()
    );

    let equilibrium_residual = if cfg.check_equilibrium {
        Some(fem_step(
            grid, &deltas, &table, &engine, &cfg.macro_strain, &u, &mut next, &mut scratch,
            denom, &mut discarded,
        ))
    } else {
        None
    };

    let average_stress = average_stress_from_displacement(grid, &u, &cfg.macro_strain);
    Ok(SolveResult {
        converged,
        residuals,
        discarded_imag: discarded,
        average_stress,
        field: FieldResult::Displacement(u),
        equilibrium_residual,
        reference: lame,
    })
}

struct FemScratch<T: Real> {
    tau: GridField<T>,
    tau_hat: SpectralField<T>,
    zeta: SpectralField<T>,
}

#[allow(clippy::too_many_arguments)]
fn fem_step<T: Real>(
    grid: &VoxelGrid<T>,
    deltas: &[StiffnessTensor<T>],
    table: &GreenTable<T>,
    engine: &FftEngine<T>,
    macro_strain: &SymMat<T>,
    u: &GridField<T>,
    next: &mut GridField<T>,
    s: &mut FemScratch<T>,
    denom: T,
    discarded: &mut T,
) -> T {
    let axes = table.axes();
    let len = s.zeta.len();
    for m in 0..3 {
        for v in s.zeta.comp_mut(m) {
            *v = Complex::zero();
        }
    }
    let weight = T::of(0.125);
    for b in GAUSS_SIGNS {
        let t: [T; 3] = std::array::from_fn(|m| gauss_coord(b[m]));
        polarization_from_displacement(grid, deltas, u, macro_strain, t, &mut s.tau);
        engine.forward_into(&s.tau, &mut s.tau_hat);
        for idx in 0..len {
            let k = axes.fem_k_at(axes.bins_of(idx), b);
            let f = polarization_flux(&s.tau_hat.sym_at(idx), &k);
            let acc = s.zeta.vec_at(idx);
            s.zeta
                .set_vec(idx, std::array::from_fn(|m| acc[m] + f[m] * weight));
        }
    }

    for idx in 1..len {
        let v = table.solve_b(idx, s.zeta.vec_at(idx));
        s.zeta.set_vec(idx, std::array::from_fn(|m| -v[m]));
    }
    s.zeta.set_vec(0, [Complex::zero(); 3]);

    let imag = engine.inverse_into(&mut s.zeta, next);
    *discarded = Float::max(*discarded, imag);
    next.dist_l2(u, false) / denom
}

/// Normalization of the update norm: ||E||_F * N^{3/2}, floored at N^{3/2}
/// so a zero macroscopic strain stays well-defined.
fn denominator<T: Real>(macro_strain: &SymMat<T>, n: usize) -> T {
    let nf = T::of_usize(n);
    Float::max(macro_strain.norm(), T::one()) * Float::sqrt(nf * nf * nf)
}

/// Corner weights of the gradient of the trilinear interpolant at local
/// point `t` of the unit cell, scaled by N (cell size 1/N). Corner index
/// bit m selects the high corner along axis m; weights[m][c] multiplies the
/// corner value in the d/dx_m component.
pub fn trilinear_grad_weights<T: Real>(t: [T; 3], n: usize) -> [[T; 8]; 3] {
    let nf = T::of_usize(n);
    let mut w = [[T::zero(); 8]; 3];
    for c in 0..8usize {
        for m in 0..3 {
            let mut v = nf;
            for mm in 0..3 {
                let high = (c >> mm) & 1 == 1;
                let phi = if high { t[mm] } else { T::one() - t[mm] };
                let dphi = if high { T::one() } else { -T::one() };
                v *= if mm == m { dphi } else { phi };
            }
            w[m][c] = v;
        }
    }
    w
}

/// Fills `out` with (C[I] - C^ref) : (grad_s u at local point t of cell I
/// + E), the polarization the displacement scheme transforms.
fn polarization_from_displacement<T: Real>(
    grid: &VoxelGrid<T>,
    deltas: &[StiffnessTensor<T>],
    u: &GridField<T>,
    macro_strain: &SymMat<T>,
    t: [T; 3],
    out: &mut GridField<T>,
) {
    let n = grid.n();
    let w = trilinear_grad_weights(t, n);
    let ids = grid.ids();
    let comps: [&[T]; 3] = [u.comp(0), u.comp(1), u.comp(2)];
    let next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let half = T::of(0.5);

    let mut idx = 0usize;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let j1 = [i1, next[i1]];
                let j2 = [i2, next[i2]];
                let j3 = [i3, next[i3]];
                let corners: [usize; 8] = std::array::from_fn(|c| {
                    (j1[c & 1] * n + j2[(c >> 1) & 1]) * n + j3[(c >> 2) & 1]
                });
                // grad[m][r] = d u_r / d x_m
                let mut grad = [[T::zero(); 3]; 3];
                for (c, &corner) in corners.iter().enumerate() {
                    for r in 0..3 {
                        let v = comps[r][corner];
                        for m in 0..3 {
                            grad[m][r] += w[m][c] * v;
                        }
                    }
                }
                let mut strain = *macro_strain;
                for (slot, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
                    strain.0[slot] += (grad[i][j] + grad[j][i]) * half;
                }
                let tau = deltas[ids[idx] as usize].ddot(&strain);
                out.set_sym(idx, &tau);
                idx += 1;
            }
        }
    }
}

/// Per-cell total strain E + grad_s u of a nodal displacement field,
/// evaluated at cell centers. For the trilinear interpolant the center value
/// of each gradient component equals its exact average over the cell, so
/// this is also the field of cell-averaged strains.
pub fn strain_from_displacement<T: Real>(
    n: usize,
    u: &GridField<T>,
    macro_strain: &SymMat<T>,
) -> GridField<T> {
    let half = T::of(0.5);
    let w = trilinear_grad_weights([half; 3], n);
    let comps: [&[T]; 3] = [u.comp(0), u.comp(1), u.comp(2)];
    let next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();

    let mut out = GridField::zeros(n, 6);
    let mut idx = 0usize;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let j1 = [i1, next[i1]];
                let j2 = [i2, next[i2]];
                let j3 = [i3, next[i3]];
                let corners: [usize; 8] = std::array::from_fn(|c| {
                    (j1[c & 1] * n + j2[(c >> 1) & 1]) * n + j3[(c >> 2) & 1]
                });
                let mut grad = [[T::zero(); 3]; 3];
                for (c, &corner) in corners.iter().enumerate() {
                    for r in 0..3 {
                        let v = comps[r][corner];
                        for m in 0..3 {
                            grad[m][r] += w[m][c] * v;
                        }
                    }
                }
                let mut strain = *macro_strain;
                for (slot, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
                    strain.0[slot] += (grad[i][j] + grad[j][i]) * half;
                }
                out.set_sym(idx, &strain);
                idx += 1;
            }
        }
    }
    out
}

fn average_stress_from_strain<T: Real>(grid: &VoxelGrid<T>, eps: &GridField<T>) -> SymMat<T> {
    let mut acc = SymMat::zero();
    for idx in 0..grid.len() {
        acc = acc.add(&grid.stiffness_at(idx).ddot(&eps.sym_at(idx)));
    }
    acc.scaled(T::one() / T::of_usize(grid.len()))
}

/// Volume average of C[I] : (grad_s u at the cell center + E).
fn average_stress_from_displacement<T: Real>(
    grid: &VoxelGrid<T>,
    u: &GridField<T>,
    macro_strain: &SymMat<T>,
) -> SymMat<T> {
    let n = grid.n();
    let half = T::of(0.5);
    let w = trilinear_grad_weights([half; 3], n);
    let comps: [&[T]; 3] = [u.comp(0), u.comp(1), u.comp(2)];
    let next: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();

    let mut acc = SymMat::zero();
    let mut idx = 0usize;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                let j1 = [i1, next[i1]];
                let j2 = [i2, next[i2]];
                let j3 = [i3, next[i3]];
                let corners: [usize; 8] = std::array::from_fn(|c| {
                    (j1[c & 1] * n + j2[(c >> 1) & 1]) * n + j3[(c >> 2) & 1]
                });
                let mut grad = [[T::zero(); 3]; 3];
                for (c, &corner) in corners.iter().enumerate() {
                    for r in 0..3 {
                        let v = comps[r][corner];
                        for m in 0..3 {
                            grad[m][r] += w[m][c] * v;
                        }
                    }
                }
                let mut strain = *macro_strain;
                for (slot, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
                    strain.0[slot] += (grad[i][j] + grad[j][i]) * half;
                }
                acc = acc.add(&grid.stiffness_at(idx).ddot(&strain));
                idx += 1;
            }
        }
    }
    acc.scaled(T::one() / T::of_usize(grid.len()))
}

/// Runs the configured scheme for the six unit strains and assembles the
/// effective stiffness, symmetrized, with the asymmetry recorded.
pub fn effective_tensor<T: Real>(
    grid: &VoxelGrid<T>,
    cfg: &SchemeConfig<T>,
) -> Result<EffectiveTensor<T>> {
    let mut columns = [[T::zero(); 6]; 6];
    let mut iterations = [0usize; 6];
    let mut converged = true;
    for j in 0..6 {
        let mut case = *cfg;
        case.macro_strain = SymMat::unit_strain(j);
        let result = run_scheme(grid, &case)?;
        converged &= result.converged;
        iterations[j] = result.iterations();
        columns[j] = result.average_stress.0;
    }

    let mut asym_sq = T::zero();
    let mut upper = Vec::with_capacity(21);
    for i in 0..6 {
        for j in 0..6 {
            let d = columns[j][i] - columns[i][j];
            asym_sq += d * d;
        }
        for j in i..6 {
            upper.push((columns[j][i] + columns[i][j]) * T::of(0.5));
        }
    }
    let asymmetry = Float::sqrt(asym_sq);
    let tensor = StiffnessTensor::from_upper_triangle(&upper)?;
    if converged && asymmetry > T::of(10.0) * cfg.tolerance {
        log::warn!("effective tensor asymmetry {asymmetry:?} above 10x solver tolerance");
    }
    Ok(EffectiveTensor {
        tensor,
        scheme: cfg.scheme,
        n: grid.n(),
        converged,
        asymmetry,
        iterations,
    })
}
