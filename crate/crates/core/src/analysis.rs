//! Convergence-study harness: resolution sweeps of the effective tensor,
//! strain-field error studies against a fine-grid proxy, log-log rate
//! fitting, and deterministic report emission (CSV and JSON).

use std::path::Path;
use std::time::Instant;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::micro::{rasterize, Geometry, Material};
use crate::oracle::laminate_effective;
use crate::scalar::Real;
use crate::scheme::{
    effective_tensor, run_scheme, strain_from_displacement, EffectiveTensor, Scheme, SchemeConfig,
};
use crate::spectral::GridField;
use crate::tensor::{StiffnessTensor, SymMat};

/// How a study's reference value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// closed-form effective tensor (isotropic grid laminates)
    Analytic,
    /// first-order extrapolation from the two finest resolutions
    Richardson,
    /// finest-resolution tensor itself (schemes without a proven rate)
    Finest,
    /// caller-supplied tensor (e.g. extrapolated from another scheme's sweep)
    Supplied,
    /// finest-resolution strain field restricted to the coarser grids
    FinestField,
}

/// What kind of error a study measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// quadratic-form gaps of effective tensors
    Tensor,
    /// discrete L2 gaps of strain fields
    Strain,
}

/// Errors of one probe strain across the study's resolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeErrors<T> {
    /// the strain that produced these errors
    pub probe: SymMat<T>,
    /// one error per entry of the study's resolution list
    pub errors: Vec<T>,
    /// least-squares slope of log error against log N; absent when the
    /// study is resolved exactly or fewer than 3 positive errors remain
    pub slope: Option<T>,
}

/// Result of a resolution sweep: per-resolution solves, the reference they
/// are measured against, per-probe error curves, and fitted rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStudy<T> {
    /// microstructure the study rasterized at each resolution
    pub geometry: Geometry<T>,
    /// material table the geometry's ids point into
    pub materials: Vec<Material<T>>,
    /// whether void phases were accepted
    pub porous: bool,
    pub scheme: Scheme,
    pub kind: StudyKind,
    /// strictly increasing; for strain studies these are the measured
    /// resolutions, with the proxy recorded separately
    pub resolutions: Vec<usize>,
    /// proxy resolution of a strain study (its solve is the stand-in for
    /// the unknown exact field)
    pub proxy_n: Option<usize>,
    /// per-resolution effective tensors (empty for strain studies)
    pub tensors: Vec<EffectiveTensor<T>>,
    /// reference tensor errors are measured against (None for strain studies)
    pub reference: Option<StiffnessTensor<T>>,
    pub reference_mode: ReferenceMode,
    pub probes: Vec<ProbeErrors<T>>,
    /// per-resolution iteration counts; tensor sweeps record the worst of
    /// the six unit-strain solves
    pub iterations: Vec<usize>,
    /// per-resolution wall time; all zeros unless timing was recorded
    pub seconds: Vec<f64>,
    /// every error sits at solver-tolerance level, so no rate is fitted
    pub resolved_exactly: bool,
    /// at least one solve did not converge
    pub partial: bool,
    /// whether wall times were measured (timed reports are not
    /// byte-reproducible)
    pub timed: bool,
    /// solver configuration the study ran with
    pub config: SchemeConfig<T>,
}

/// Study knobs that are not part of the solver configuration.
#[derive(Clone, Debug)]
pub struct StudyOptions<T> {
    /// probe strains the tensor errors are evaluated at
    pub probes: Vec<SymMat<T>>,
    /// measure errors against this tensor instead of deriving a reference
    pub reference_override: Option<StiffnessTensor<T>>,
    /// record wall time per resolution (forfeits byte-identical reports)
    pub record_timing: bool,
}

impl<T: Real> Default for StudyOptions<T> {
    fn default() -> Self {
        StudyOptions {
            probes: vec![SymMat::unit_strain(0)],
            reference_override: None,
            record_timing: false,
        }
    }
}

/// Least-squares slope of ln(error) against ln(N).
///
/// Non-positive and non-finite errors are dropped (they carry no rate
/// information); returns None when fewer than 3 usable points remain.
pub fn fit_loglog_slope<T: Real>(resolutions: &[usize], errors: &[T]) -> Option<T> {
    assert_eq!(resolutions.len(), errors.len());
    let pts: Vec<(T, T)> = resolutions
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > T::zero() && Float::is_finite(**e))
        .map(|(n, e)| (Float::ln(T::of_usize(*n)), Float::ln(*e)))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let count = T::of_usize(pts.len());
    let mean_x = pts.iter().fold(T::zero(), |a, p| a + p.0) / count;
    let mean_y = pts.iter().fold(T::zero(), |a, p| a + p.1) / count;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (x, y) in pts {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    Some(sxy / sxx)
}

/// First-order Richardson extrapolation of two tensors computed at
/// resolutions n1 < n2: (n2 C2 - n1 C1) / (n2 - n1). Exact for sequences
/// C + c/N, and second-order accurate when an additional 1/N^2 term is
/// present.
pub fn richardson_extrapolate<T: Real>(
    n1: usize,
    c1: &StiffnessTensor<T>,
    n2: usize,
    c2: &StiffnessTensor<T>,
) -> StiffnessTensor<T> {
    assert!(n1 < n2, "extrapolation needs two distinct resolutions");
    let span = T::of_usize(n2 - n1);
    c2.scaled(T::of_usize(n2))
        .sub(&c1.scaled(T::of_usize(n1)))
        .scaled(T::one() / span)
}

fn validate_resolutions(resolutions: &[usize]) -> Result<()> {
    if resolutions.len() < 3 {
        return Err(Error::Config(format!(
            "a rate study needs at least 3 resolutions, got {}",
            resolutions.len()
        )));
    }
    if !resolutions.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config(
            "study resolutions must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Closed-form reference when the geometry admits one: a laminate of
/// isotropic phases. Anything else (or inadmissible phases) yields None.
fn analytic_reference<T: Real>(
    geometry: &Geometry<T>,
    materials: &[Material<T>],
) -> Option<StiffnessTensor<T>> {
    let Geometry::Laminate {
        axis,
        fractions,
        ids,
    } = geometry
    else {
        return None;
    };
    let mut phases = Vec::with_capacity(fractions.len());
    for (f, id) in fractions.iter().zip(ids) {
        let c = materials.get(*id as usize)?.stiffness().ok()?;
        phases.push((c, *f));
    }
    laminate_effective(&phases, *axis).ok()
}

/// Runs the configured scheme's effective tensor at every resolution and
/// measures each probe's error against the study reference.
///
/// The reference is, in order of preference: the caller's override, the
/// analytic laminate tensor when the geometry admits one, first-order
/// Richardson extrapolation of the two finest tensors for the
/// full-integration scheme, and the finest tensor itself for the two
/// strain-based schemes (no rate is proven for them, so no decay order is
/// assumed; their acceptance checks are monotone-decrease checks).
pub fn sweep<T: Real>(
    geometry: &Geometry<T>,
    materials: &[Material<T>],
    porous: bool,
    resolutions: &[usize],
    cfg: &SchemeConfig<T>,
    opts: &StudyOptions<T>,
) -> Result<RateStudy<T>> {
    validate_resolutions(resolutions)?;
    if opts.probes.is_empty() {
        return Err(Error::Config("a sweep needs at least one probe strain".into()));
    }

    let mut tensors = Vec::with_capacity(resolutions.len());
    let mut iterations = Vec::with_capacity(resolutions.len());
    let mut seconds = Vec::with_capacity(resolutions.len());
    let mut partial = false;
    for &n in resolutions {
        let grid = rasterize(geometry, n, materials.to_vec(), porous)?;
        let start = Instant::now();
        let eff = effective_tensor(&grid, cfg)?;
        seconds.push(if opts.record_timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        });
        partial |= !eff.converged;
        iterations.push(*eff.iterations.iter().max().expect("six solves"));
        log::info!(
            "{} N={n}: {} iterations (worst of 6)",
            cfg.scheme.label(),
            iterations.last().unwrap()
        );
        tensors.push(eff);
    }

    let (reference, reference_mode) = if let Some(r) = &opts.reference_override {
        (*r, ReferenceMode::Supplied)
    } else if let Some(r) = analytic_reference(geometry, materials) {
        (r, ReferenceMode::Analytic)
    } else if cfg.scheme == Scheme::Fem {
        let last = resolutions.len() - 1;
        (
            richardson_extrapolate(
                resolutions[last - 1],
                &tensors[last - 1].tensor,
                resolutions[last],
                &tensors[last].tensor,
            ),
            ReferenceMode::Richardson,
        )
    } else {
        (tensors.last().expect("nonempty").tensor, ReferenceMode::Finest)
    };

    let mut probes = Vec::with_capacity(opts.probes.len());
    let mut all_exact = true;
    for probe in &opts.probes {
        let scale = Float::max(Float::abs(reference.quadratic_form(probe)), T::one());
        let floor = T::of(10.0) * cfg.tolerance * scale;
        let errors: Vec<T> = tensors
            .iter()
            .map(|t| Float::abs(reference.sub(&t.tensor).quadratic_form(probe)))
            .collect();
        all_exact &= errors.iter().all(|e| *e <= floor);
        probes.push(ProbeErrors {
            probe: *probe,
            errors,
            slope: None,
        });
    }
    if !all_exact {
        for p in &mut probes {
            p.slope = fit_loglog_slope(resolutions, &p.errors);
        }
    }

    Ok(RateStudy {
        geometry: geometry.clone(),
        materials: materials.to_vec(),
        porous,
        scheme: cfg.scheme,
        kind: StudyKind::Tensor,
        resolutions: resolutions.to_vec(),
        proxy_n: None,
        tensors,
        reference: Some(reference),
        reference_mode,
        probes,
        iterations,
        seconds,
        resolved_exactly: all_exact,
        partial,
        timed: opts.record_timing,
        config: *cfg,
    })
}

/// Block mean of a 6-component cell field onto a coarser grid whose
/// resolution divides the fine one. Each coarse cell is the exact union of
/// k^3 fine cells, so the block mean is the restriction of cell averages.
fn restrict_cell_field<T: Real>(fine: &GridField<T>, n_coarse: usize) -> GridField<T> {
    let n_fine = fine.n();
    debug_assert_eq!(n_fine % n_coarse, 0);
    let k = n_fine / n_coarse;
    let weight = T::one() / T::of_usize(k * k * k);
    let mut out = GridField::zeros(n_coarse, 6);
    for c in 0..6 {
        let src = fine.comp(c);
        let dst = out.comp_mut(c);
        for i1 in 0..n_coarse {
            for i2 in 0..n_coarse {
                for i3 in 0..n_coarse {
                    let mut acc = T::zero();
                    for a1 in 0..k {
                        for a2 in 0..k {
                            for a3 in 0..k {
                                acc += src[((i1 * k + a1) * n_fine + i2 * k + a2) * n_fine
                                    + i3 * k
                                    + a3];
                            }
                        }
                    }
                    dst[(i1 * n_coarse + i2) * n_coarse + i3] = acc * weight;
                }
            }
        }
    }
    out
}

/// Strain-field convergence study for the full-integration scheme: the
/// finest resolution in the list acts as the proxy for the unknown exact
/// field, and each coarser solve is measured against its block-restricted
/// cell-averaged strain in the discrete L2 norm.
///
/// The probe strain is the configuration's macroscopic strain; every listed
/// resolution must divide the finest so the restriction is exact.
pub fn strain_error_study<T: Real>(
    geometry: &Geometry<T>,
    materials: &[Material<T>],
    porous: bool,
    resolutions: &[usize],
    cfg: &SchemeConfig<T>,
    opts: &StudyOptions<T>,
) -> Result<RateStudy<T>> {
    if cfg.scheme != Scheme::Fem {
        return Err(Error::Unsupported(
            "strain-rate studies need the full-integration displacement scheme".into(),
        ));
    }
    validate_resolutions(resolutions)?;
    let proxy_n = *resolutions.last().expect("validated nonempty");
    let coarse = &resolutions[..resolutions.len() - 1];
    for &n in coarse {
        if proxy_n % n != 0 {
            return Err(Error::Config(format!(
                "proxy resolution {proxy_n} must be a multiple of every study resolution, got {n}"
            )));
        }
    }

    let mut strains = Vec::with_capacity(resolutions.len());
    let mut iterations = Vec::with_capacity(coarse.len());
    let mut seconds = Vec::with_capacity(coarse.len());
    let mut partial = false;
    for &n in resolutions {
        let grid = rasterize(geometry, n, materials.to_vec(), porous)?;
        let start = Instant::now();
        let run = run_scheme(&grid, cfg)?;
        partial |= !run.converged;
        log::info!("{} N={n}: {} iterations", cfg.scheme.label(), run.iterations());
        let u = run
            .displacement()
            .expect("the displacement scheme returns a nodal field");
        strains.push(strain_from_displacement(n, u, &cfg.macro_strain));
        if n != proxy_n {
            seconds.push(if opts.record_timing {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            });
            iterations.push(run.iterations());
        }
    }

    let proxy = strains.pop().expect("proxy solve present");
    let errors: Vec<T> = coarse
        .iter()
        .zip(&strains)
        .map(|(&n, eps)| {
            let restricted = restrict_cell_field(&proxy, n);
            eps.dist_l2(&restricted, true) / Float::sqrt(T::of_usize(n * n * n))
        })
        .collect();

    let scale = Float::max(cfg.macro_strain.norm(), T::one());
    let floor = T::of(100.0) * cfg.tolerance * scale;
    let resolved_exactly = errors.iter().all(|e| *e <= floor);
    let slope = if resolved_exactly {
        None
    } else {
        fit_loglog_slope(coarse, &errors)
    };

    Ok(RateStudy {
        geometry: geometry.clone(),
        materials: materials.to_vec(),
        porous,
        scheme: cfg.scheme,
        kind: StudyKind::Strain,
        resolutions: coarse.to_vec(),
        proxy_n: Some(proxy_n),
        tensors: Vec::new(),
        reference: None,
        reference_mode: ReferenceMode::FinestField,
        probes: vec![ProbeErrors {
            probe: cfg.macro_strain,
            errors,
            slope,
        }],
        iterations,
        seconds,
        resolved_exactly,
        partial,
        timed: opts.record_timing,
        config: *cfg,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Plot-ready CSV rows of a study: one row per (resolution, probe) pair in
/// ascending resolution order, probe column by index into `study.probes`.
pub fn report_csv<T: Real>(study: &RateStudy<T>) -> String {
    let mut out = String::from("N,probe,error,iterations,seconds\n");
    for (i, &n) in study.resolutions.iter().enumerate() {
        for (p, probe) in study.probes.iter().enumerate() {
            use std::fmt::Write;
            writeln!(
                out,
                "{n},{p},{:?},{},{}",
                probe.errors[i], study.iterations[i], study.seconds[i]
            )
            .expect("string writes are infallible");
        }
    }
    out
}

/// Writes a study to disk as CSV (plot-ready table) or JSON (the full study,
/// configuration echo included). Output is byte-deterministic whenever the
/// study was run without timing.
pub fn emit_report<T: Real + Serialize>(
    study: &RateStudy<T>,
    path: &Path,
    format: ReportFormat,
) -> Result<()> {
    let bytes = match format {
        ReportFormat::Csv => report_csv(study).into_bytes(),
        ReportFormat::Json => {
            let mut b = serde_json::to_vec_pretty(study)?;
            b.push(b'\n');
            b
        }
    };
    std::fs::write(path, bytes).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}
