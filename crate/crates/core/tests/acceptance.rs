//! End-to-end acceptance checks, one numbered criterion per result line.
//!
//! The driver runs the criteria sequentially (no test harness) because the
//! sphere resolution sweeps are expensive and partly shared; the whole run
//! takes on the order of 45 minutes on a single core. Elapsed times are
//! printed next to each line together with the intended budget on
//! desktop-class hardware; they are reported, never asserted. Set RUST_LOG=info
//! to watch per-resolution progress of the sweeps.

use std::any::Any;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_2_PI, PI, TAU};

use homog_core::analysis::report_csv;
use homog_core::micro::rasterize;
use homog_core::spectral::filter::{apply_qn, g_hat, grid_norm_sq, spectral_norm_sq};
use homog_core::spectral::green::{
    fem_gauss_symbol, gamma0_hat, gauss_coord, willot_gamma_hat, willot_k, GAUSS_SIGNS,
};
use homog_core::spectral::{index_to_freq, FrequencySet};
use homog_core::tensor::{sym_outer, sym_outer_c, voigt66_apply};
use homog_core::{
    dense_solve_fem, dense_solve_ms, dense_solve_willot, effective_tensor, laminate_effective,
    richardson_extrapolate, run_scheme, strain_error_study, sweep, Error, FftEngine, Geometry,
    GridField, LameParams, Material, RateStudy, ReferenceMode, Scheme, SchemeConfig,
    StiffnessTensor, StudyOptions, SymMat, VoxelGrid,
};

/// label, runtime budget on desktop hardware, check body returning a
/// one-phrase summary of the measured margins.
type Check = (&'static str, &'static str, fn() -> String);

fn main() {
    let _ = env_logger::builder().format_timestamp(None).try_init();
    let checks: [Check; 10] = [
        (
            "averaging filter bounds and coefficient recovery",
            "<10s",
            filter_operator_suite,
        ),
        (
            "continuous and rotated-grid Green symbols act as projectors",
            "<5s",
            green_projector_identities,
        ),
        (
            "Gauss-point gradient symbol matches direct trilinear interpolation",
            "<5s",
            fem_symbol_gradient_oracle,
        ),
        (
            "iterative fixed points match dense direct solves at N=4",
            "<60s",
            dense_equivalence_small_grid,
        ),
        (
            "displacement scheme reproduces a grid-aligned laminate exactly",
            "<60s",
            laminate_exact_reproduction,
        ),
        (
            "sphere tensor errors decay at first order (displacement scheme)",
            "<30min",
            fem_sphere_first_order_rate,
        ),
        (
            "sphere strain errors decay at half order against a fine proxy",
            "<30min",
            sphere_strain_half_order_rate,
        ),
        (
            "strain-based schemes improve monotonically toward the extrapolated reference",
            "<30min",
            strain_schemes_monotone_improvement,
        ),
        (
            "porous sphere: displacement scheme converges, guard refuses basic, Voigt bound holds",
            "<10min",
            porous_sphere_robustness,
        ),
        (
            "repeating the sphere sweep reproduces byte-identical CSV",
            "none",
            repeated_study_is_byte_identical,
        ),
    ];

    let total = Instant::now();
    let mut failed = 0usize;
    for (i, (label, budget, check)) in checks.iter().enumerate() {
        eprintln!("-- criterion {}: {label}", i + 1);
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!(
                "criterion {:2} PASS {:8.1}s  {label}; {detail} (budget {budget})",
                i + 1,
                secs
            ),
            Err(payload) => {
                failed += 1;
                println!(
                    "criterion {:2} FAIL {:8.1}s  {label} (budget {budget}): {}",
                    i + 1,
                    secs,
                    panic_text(payload.as_ref())
                );
            }
        }
    }
    println!(
        "{}/10 acceptance criteria passed in {:.1}s",
        checks.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_text(payload: &(dyn Any + Send)) -> &str {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s
    } else {
        "non-string panic payload"
    }
}

// ---- criterion 1: averaging filter and coefficient recovery ----

/// Random real-valued trigonometric polynomial: conjugate-symmetric
/// coefficients with real self-paired entries, supported on the reduced
/// frequency set (a real polynomial cannot carry an unpaired band-edge bin).
fn random_real_poly_coeffs(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex<f64>> {
    let reduced = FrequencySet::reduced(n);
    let mut c = vec![Complex::new(0.0, 0.0); n * n * n];
    for idx in 0..c.len() {
        if !reduced.contains(index_to_freq(idx, n)) {
            continue;
        }
        let j3 = idx % n;
        let j2 = (idx / n) % n;
        let j1 = idx / (n * n);
        let mirror = (((n - j1) % n) * n + (n - j2) % n) * n + (n - j3) % n;
        if mirror == idx {
            c[idx] = Complex::new(rng.random_range(-1.0..1.0), 0.0);
        } else if mirror > idx {
            let v = Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            c[idx] = v;
            c[mirror] = v.conj();
        }
    }
    c
}

/// Exact cell averages of the polynomial with coefficients `c`: every
/// coefficient is damped by the per-axis integral factor
/// (exp(2 pi i xi/N) - 1) N / (2 pi i xi), then synthesized on the lattice.
/// Deliberately written without the filter multiplier so it can serve as its
/// oracle.
fn analytic_cell_averages(c: &[Complex<f64>], n: usize, engine: &FftEngine<f64>) -> GridField<f64> {
    let mut damped = c.to_vec();
    for (idx, v) in damped.iter_mut().enumerate() {
        let xi = index_to_freq(idx, n);
        for &x in &xi {
            if x != 0 {
                let theta = 2.0 * PI * x as f64 / n as f64;
                let num = Complex::from_polar(1.0, theta) - Complex::new(1.0, 0.0);
                let den = Complex::new(0.0, 2.0 * PI * x as f64 / n as f64);
                *v *= num / den;
            }
        }
    }
    engine.fft3_inverse(&mut damped);
    let mut out = GridField::zeros(n, 1);
    for (o, v) in out.comp_mut(0).iter_mut().zip(&damped) {
        assert!(
            v.im.abs() < 1e-12,
            "cell averages of a real polynomial must be real"
        );
        *o = v.re;
    }
    out
}

fn filter_operator_suite() -> String {
    // multiplier bounds, exhaustive over four resolutions
    let lo = FRAC_2_PI.powi(3);
    for n in [4usize, 8, 16, 32] {
        for xi in FrequencySet::full(n).iter() {
            let g = g_hat::<f64>(xi, n);
            assert!(
                (lo - 1e-15..=1.0 + 1e-15).contains(&g),
                "filter multiplier {g} out of [{lo}, 1] at frequency {xi:?}, N={n}"
            );
        }
    }

    // coefficient recovery on 20 random polynomials
    let n = 8usize;
    let engine = FftEngine::<f64>::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_gap = 0.0f64;
    for trial in 0..20 {
        let coeffs = random_real_poly_coeffs(n, &mut rng);
        let averages = analytic_cell_averages(&coeffs, n, &engine);
        let recovered = apply_qn(&engine, &averages);
        for (idx, (got, want)) in recovered.comp(0).iter().zip(&coeffs).enumerate() {
            let gap = (got - want).norm();
            assert!(
                gap <= 1e-12,
                "coefficient gap {gap:.3e} at spectral index {idx}, trial {trial}"
            );
            worst_gap = worst_gap.max(gap);
        }
    }

    // operator norm bound on 100 random piecewise-constant fields
    let bound = (PI / 2.0).powi(3);
    let mut worst_ratio = 0.0f64;
    for trial in 0..100 {
        let mut f = GridField::<f64>::zeros(n, 1);
        for v in f.comp_mut(0) {
            *v = rng.random_range(-1.0..1.0);
        }
        let input = grid_norm_sq(&f).sqrt();
        let output = spectral_norm_sq(&apply_qn(&engine, &f)).sqrt();
        assert!(
            output <= bound * input * (1.0 + 1e-12),
            "norm bound violated on trial {trial}: {output} > {bound} * {input}"
        );
        worst_ratio = worst_ratio.max(output / (bound * input));
    }
    format!("worst recovery gap {worst_gap:.2e}, worst norm fraction {worst_ratio:.3} of the bound")
}

// ---- criterion 2: Green-operator projector identities ----

fn green_projector_identities() -> String {
    let lame = LameParams::new(1.3, 0.7).unwrap();
    let cref = StiffnessTensor::isotropic(lame);
    let n = 8usize;
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst = 0.0f64;

    // continuous symbol on every nonzero frequency of the full set
    for xi in FrequencySet::full(n).iter() {
        if xi == [0, 0, 0] {
            continue;
        }
        let symbol = gamma0_hat(xi, lame);
        let x: [f64; 3] = std::array::from_fn(|m| xi[m] as f64);
        for _ in 0..10 {
            let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let e = sym_outer(x, a);
            let residual = voigt66_apply(&symbol, &cref.ddot(&e)).sub(&e).norm() / e.norm().max(1.0);
            assert!(
                residual <= 1e-12,
                "continuous projector residual {residual:.3e} at frequency {xi:?}"
            );
            worst = worst.max(residual);
        }
    }

    // rotated-grid symbol on every nonzero frequency of the reduced set,
    // against compatible fields built from the modified frequency
    for xi in FrequencySet::reduced(n).iter() {
        if xi == [0, 0, 0] {
            continue;
        }
        let symbol = willot_gamma_hat(xi, n, lame);
        let k = willot_k::<f64>(xi, n);
        for _ in 0..10 {
            let a: [Complex<f64>; 3] = std::array::from_fn(|_| {
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let e = sym_outer_c(k, a);
            let residual = symbol.apply(&cref.ddot(&e)).sub(&e).norm_sq().sqrt()
                / e.norm_sq().sqrt().max(1.0);
            assert!(
                residual <= 1e-12,
                "rotated-grid projector residual {residual:.3e} at frequency {xi:?}"
            );
            worst = worst.max(residual);
        }
    }
    format!("worst relative residual {worst:.2e}")
}

// ---- criterion 3: Gauss-point gradient symbol oracle ----

fn fem_symbol_gradient_oracle() -> String {
    // Trilinear interpolant of exp(2 pi i xi . I / N) on the unit cell at
    // corners c in {0,1}^3; its gradient at each Gauss point must equal the
    // symbol (cell I = 0, so the plane-wave prefactor is 1).
    let n = 4usize;
    let mut worst = 0.0f64;
    for xi in FrequencySet::full(n).iter() {
        for b in GAUSS_SIGNS {
            let g: [f64; 3] = std::array::from_fn(|m| gauss_coord::<f64>(b[m]));
            let mut grad = [Complex::new(0.0, 0.0); 3];
            for c in 0..8usize {
                let corner: [usize; 3] = std::array::from_fn(|m| (c >> m) & 1);
                let phase = TAU
                    * (0..3)
                        .map(|m| xi[m] as f64 * corner[m] as f64)
                        .sum::<f64>()
                    / n as f64;
                let value = Complex::from_polar(1.0, phase);
                for (m, gm) in grad.iter_mut().enumerate() {
                    // d/dx_m of the product of 1-D shape functions, scaled by
                    // N (cell size 1/N maps the unit-cell derivative)
                    let mut w = n as f64;
                    for mm in 0..3 {
                        let phi = if corner[mm] == 1 { g[mm] } else { 1.0 - g[mm] };
                        let dphi = if corner[mm] == 1 { 1.0 } else { -1.0 };
                        w *= if mm == m { dphi } else { phi };
                    }
                    *gm += value * w;
                }
            }
            let k = fem_gauss_symbol::<f64>(xi, n, b);
            for (m, (g, s)) in grad.iter().zip(&k).enumerate() {
                let gap = (g - s).norm() / s.norm().max(1.0);
                assert!(
                    gap <= 1e-12,
                    "gradient mismatch at frequency {xi:?}, Gauss point {b:?}, axis {m}"
                );
                worst = worst.max(gap);
            }
        }
    }
    format!("worst relative mismatch {worst:.2e} over all frequencies and Gauss points")
}

// ---- criterion 4: dense equivalence on a random small grid ----

fn dense_equivalence_small_grid() -> String {
    let n = 4usize;
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let ids: Vec<u16> = (0..n * n * n).map(|_| rng.random_range(0..2u16)).collect();
    let materials = vec![Material::isotropic(1.0, 1.0), Material::isotropic(2.0, 5.0)];
    let grid = VoxelGrid::new(n, ids, materials, false).unwrap();
    let e = SymMat([0.4, -0.3, 0.1, 0.25, -0.15, 0.05]);

    let mut gaps = Vec::new();
    for scheme in [Scheme::Basic, Scheme::Willot, Scheme::Fem] {
        let mut cfg = SchemeConfig::new(scheme);
        cfg.macro_strain = e;
        cfg.tolerance = 1e-13;
        cfg.max_iterations = 100_000;
        let run = run_scheme(&grid, &cfg).unwrap();
        assert!(
            run.converged,
            "{} scheme did not converge on the N=4 grid",
            scheme.label()
        );
        let gap = match scheme {
            Scheme::Basic => {
                dense_solve_ms(&grid, &e, &run.reference).dist_max(run.strain().unwrap())
            }
            Scheme::Willot => {
                dense_solve_willot(&grid, &e, &run.reference).dist_max(run.strain().unwrap())
            }
            Scheme::Fem => dense_solve_fem(&grid, &e).dist_max(run.displacement().unwrap()),
        };
        assert!(
            gap <= 1e-10,
            "{} fixed point differs from its dense solve by {gap:.3e}",
            scheme.label()
        );
        gaps.push(format!("{} {gap:.2e}", scheme.label()));
    }
    format!("max-norm gaps {}", gaps.join(", "))
}

// ---- criterion 5: exact laminate reproduction ----

fn laminate_exact_reproduction() -> String {
    let materials = vec![Material::isotropic(1.0, 1.0), Material::isotropic(3.7, 2.9)];
    let geometry = Geometry::Laminate {
        axis: 0,
        fractions: vec![0.5, 0.5],
        ids: vec![0, 1],
    };
    let exact = laminate_effective(
        &[
            (materials[0].stiffness().unwrap(), 0.5),
            (materials[1].stiffness().unwrap(), 0.5),
        ],
        0,
    )
    .unwrap();
    let mut worst = 0.0f64;
    for n in [8usize, 16] {
        let grid = rasterize(&geometry, n, materials.clone(), false).unwrap();
        let mut cfg = SchemeConfig::new(Scheme::Fem);
        cfg.tolerance = 1e-12;
        let eff = effective_tensor(&grid, &cfg).unwrap();
        assert!(eff.converged, "laminate solve did not converge at N={n}");
        let gap = eff.tensor.max_abs_diff(&exact);
        assert!(
            gap <= 1e-8,
            "laminate tensor gap {gap:.3e} at N={n} exceeds 1e-8"
        );
        worst = worst.max(gap);
    }
    format!("worst entrywise gap {worst:.2e} against the closed form")
}

// ---- criteria 6/8/10: shared sphere sweep ----

const SPHERE_RESOLUTIONS: [usize; 4] = [16, 32, 64, 128];

fn sphere_geometry() -> Geometry<f64> {
    Geometry::Sphere {
        center: [0.5; 3],
        radius: 0.25,
        inclusion: 1,
        matrix: 0,
    }
}

/// Matrix (1, 1) against a ten-fold stiffer inclusion.
fn sphere_materials() -> Vec<Material<f64>> {
    vec![
        Material::isotropic(1.0, 1.0),
        Material::isotropic(10.0, 10.0),
    ]
}

/// Solver settings for the sphere sweeps: the tolerance sits three orders
/// below the coarsest discretization error, so fitted slopes measure the
/// discretization and not the iteration cutoff.
fn sphere_config(scheme: Scheme) -> SchemeConfig<f64> {
    let mut cfg = SchemeConfig::new(scheme);
    cfg.tolerance = 1e-6;
    cfg.precompute_symbols = scheme == Scheme::Fem;
    cfg
}

fn run_fem_sphere_sweep() -> RateStudy<f64> {
    sweep(
        &sphere_geometry(),
        &sphere_materials(),
        false,
        &SPHERE_RESOLUTIONS,
        &sphere_config(Scheme::Fem),
        &StudyOptions::default(),
    )
    .expect("sphere sweep settings are valid")
}

static FEM_SPHERE: OnceLock<RateStudy<f64>> = OnceLock::new();

fn fem_sphere_study() -> &'static RateStudy<f64> {
    FEM_SPHERE.get_or_init(run_fem_sphere_sweep)
}

fn fem_sphere_first_order_rate() -> String {
    let study = fem_sphere_study();
    assert!(!study.partial, "a sphere solve failed to converge");
    assert_eq!(
        study.reference_mode,
        ReferenceMode::Richardson,
        "displacement-scheme sweep should extrapolate its own reference"
    );
    let probe = &study.probes[0];
    assert_eq!(probe.probe, SymMat::unit_strain(0), "probe is e1 x e1");
    let slope = probe
        .slope
        .expect("four resolutions leave enough points for a fit");
    assert!(
        slope <= -0.8,
        "tensor-error slope {slope:.3} is above the -0.8 gate"
    );
    format!("fitted slope {slope:.3} (gate -0.8)")
}

// ---- criterion 7: strain-error decay against a fine proxy ----

fn sphere_strain_half_order_rate() -> String {
    let mut cfg = sphere_config(Scheme::Fem);
    cfg.macro_strain = SymMat::unit_strain(0);
    let study = strain_error_study(
        &sphere_geometry(),
        &sphere_materials(),
        false,
        &SPHERE_RESOLUTIONS,
        &cfg,
        &StudyOptions::default(),
    )
    .expect("strain study settings are valid");
    assert!(!study.partial, "a strain-study solve failed to converge");
    let slope = study.probes[0]
        .slope
        .expect("three measured resolutions leave enough points for a fit");
    assert!(
        slope <= -0.4,
        "strain-error slope {slope:.3} is above the -0.4 gate"
    );
    format!(
        "fitted slope {slope:.3} (gate -0.4) against the N={} proxy",
        study.proxy_n.unwrap_or(0)
    )
}

// ---- criterion 8: monotone improvement of the strain-based schemes ----

fn strain_schemes_monotone_improvement() -> String {
    let fem = fem_sphere_study();
    let k = fem.resolutions.len();
    let reference = richardson_extrapolate(
        fem.resolutions[k - 2],
        &fem.tensors[k - 2].tensor,
        fem.resolutions[k - 1],
        &fem.tensors[k - 1].tensor,
    );
    let resolutions = [32usize, 64, 128];
    let mut curves = Vec::new();
    for scheme in [Scheme::Basic, Scheme::Willot] {
        let opts = StudyOptions {
            reference_override: Some(reference),
            ..StudyOptions::default()
        };
        let study = sweep(
            &sphere_geometry(),
            &sphere_materials(),
            false,
            &resolutions,
            &sphere_config(scheme),
            &opts,
        )
        .expect("sphere sweep settings are valid");
        assert!(
            !study.partial,
            "a {} sphere solve failed to converge",
            scheme.label()
        );
        let errors = &study.probes[0].errors;
        for i in 1..errors.len() {
            assert!(
                errors[i] <= errors[i - 1],
                "{} error rises from {:.6e} (N={}) to {:.6e} (N={})",
                scheme.label(),
                errors[i - 1],
                study.resolutions[i - 1],
                errors[i],
                study.resolutions[i]
            );
        }
        let curve: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
        curves.push(format!("{} {}", scheme.label(), curve.join(" > ")));
    }
    curves.join("; ")
}

// ---- criterion 9: porous robustness ----

fn porous_sphere_robustness() -> String {
    let materials = vec![Material::isotropic(1.0, 1.0), Material::void()];
    let grid = rasterize(&sphere_geometry(), 32, materials, true).unwrap();

    // the strain-based schemes must be refused up front
    for scheme in [Scheme::Basic, Scheme::Willot] {
        let mut cfg = SchemeConfig::new(scheme);
        cfg.macro_strain = SymMat::unit_strain(0);
        let refusal = run_scheme(&grid, &cfg);
        assert!(
            matches!(refusal, Err(Error::Unsupported(_))),
            "porous guard did not trip for the {} scheme",
            scheme.label()
        );
    }

    // the displacement scheme converges and its tensor sits below the
    // arithmetic-mean bound for every unit strain
    let cfg = sphere_config(Scheme::Fem);
    let eff = effective_tensor(&grid, &cfg).unwrap();
    assert!(
        eff.converged,
        "displacement scheme did not converge on the porous sphere within {} iterations",
        cfg.max_iterations
    );
    let mean = grid.mean_stiffness();
    let mut min_margin = f64::INFINITY;
    for j in 0..6 {
        let probe = SymMat::unit_strain(j);
        let effective = eff.tensor.quadratic_form(&probe);
        let bound = mean.quadratic_form(&probe);
        assert!(
            effective <= bound,
            "arithmetic-mean bound violated for unit strain {j}: {effective} > {bound}"
        );
        min_margin = min_margin.min((bound - effective) / bound);
    }
    format!(
        "guard tripped for basic and willot, {} iterations worst case, min bound margin {:.0}%",
        eff.iterations.iter().max().copied().unwrap_or(0),
        100.0 * min_margin
    )
}

// ---- criterion 10: determinism of a repeated study ----

fn repeated_study_is_byte_identical() -> String {
    let first = report_csv(fem_sphere_study());
    let rerun = run_fem_sphere_sweep();
    let second = report_csv(&rerun);
    assert!(
        first.as_bytes() == second.as_bytes(),
        "repeated sweep produced different CSV bytes"
    );
    assert!(
        fem_sphere_study() == &rerun,
        "repeated sweep produced a different in-memory study"
    );
    format!("{} CSV bytes identical, in-memory studies equal", first.len())
}
