//! Command-line driver: microstructure generation, single solves on voxel
//! files, and resolution studies with rate fitting.
//!
//! Exit codes: 0 success (including partial studies), 2 usage or
//! configuration error, 3 non-convergence, 4 unsupported scheme/grid
//! combination. Thread count comes from `--threads`, then the
//! `HOMOG_THREADS` environment variable, then the available parallelism.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use homog_core::analysis::{
    emit_report, fit_loglog_slope, report_csv, strain_error_study, sweep, ReportFormat,
    StudyOptions,
};
use homog_core::micro::{load_voxels, rasterize, save_voxels_with, Geometry, Material};
use homog_core::scheme::{effective_tensor, resolve_reference, run_scheme};
use homog_core::{
    EffectiveTensor64, Error, LameParams64, Reference, Result, Scheme, SchemeConfig64, SymMat,
    SymMat64, VoxelGrid64,
};

#[derive(Parser)]
#[command(
    name = "homog",
    version,
    about = "FFT-based periodic homogenization of linear elasticity on voxel grids"
)]
struct Cli {
    /// worker threads (default: HOMOG_THREADS, then all available cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize a parametric microstructure into a voxel file
    Gen(GenArgs),
    /// Solve one macroscopic load case (or all six) on a voxel file
    Run(RunArgs),
    /// Sweep resolutions, measure errors, and fit a convergence rate
    Study(StudyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GeometryKind {
    Laminate,
    Sphere,
    Checkerboard,
    /// independent per-voxel phase draw; gen-only, needs --seed
    Random,
}

/// Geometry and material flags shared by `gen` and `study`.
#[derive(Args, Debug)]
struct ShapeArgs {
    /// phase volume fractions, comma separated (laminate layers, random mix)
    #[arg(long, value_delimiter = ',')]
    fractions: Vec<f64>,
    /// laminate layering axis (0, 1, or 2)
    #[arg(long, default_value_t = 0)]
    axis: usize,
    /// laminate layer material ids (default 0,1,2,...)
    #[arg(long, value_delimiter = ',')]
    ids: Vec<u16>,
    /// sphere radius in unit-cell lengths
    #[arg(long, default_value_t = 0.25)]
    radius: f64,
    /// sphere center
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.5, 0.5])]
    center: Vec<f64>,
    /// checkerboard tiles per edge
    #[arg(long, default_value_t = 2)]
    period: usize,
    /// isotropic phase as "LAMBDA,MU"; repeat once per material id
    /// (default: matrix 1,1 and inclusion 10,10)
    #[arg(long = "material", value_name = "LAMBDA,MU")]
    materials: Vec<String>,
    /// accept zero-stiffness (void) phases
    #[arg(long)]
    porous: bool,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// microstructure family
    #[arg(long, value_enum)]
    geometry: GeometryKind,
    /// grid resolution per edge
    #[arg(long = "N", value_name = "N")]
    n: usize,
    /// RNG seed for --geometry random
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// output voxel file
    #[arg(short, long, default_value = "grid.vox")]
    output: PathBuf,
    #[command(flatten)]
    shape: ShapeArgs,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// solver scheme: basic, willot, or fem
    #[arg(long)]
    scheme: Scheme,
    /// input voxel file
    #[arg(short, long)]
    input: PathBuf,
    /// relative update-norm convergence threshold
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// iteration cap
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// reference medium: "auto" or "LAMBDA,MU"
    #[arg(long, default_value = "auto")]
    reference: String,
    /// macroscopic strain, 6 Voigt components (tensorial shears)
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0])]
    probe: Vec<f64>,
    /// assemble the full 6x6 effective tensor (six unit-strain solves)
    #[arg(long)]
    full_tensor: bool,
    /// measure the fixed-point residual of the returned field
    #[arg(long)]
    check_equilibrium: bool,
    /// write the JSON report here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StudyMode {
    /// effective-tensor error against an analytic, extrapolated, or finest
    /// reference
    Tensor,
    /// strain-field error against the finest solve (fem only)
    Strain,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// fit an exact synthetic 1/N error curve, print its slope, and exit
    #[arg(long)]
    selftest: bool,
    /// microstructure family
    #[arg(long, value_enum, required_unless_present = "selftest")]
    geometry: Option<GeometryKind>,
    /// solver scheme: basic, willot, or fem
    #[arg(long, required_unless_present = "selftest")]
    scheme: Option<Scheme>,
    /// grid resolutions, comma separated, strictly increasing, at least 3
    #[arg(long, value_delimiter = ',', required_unless_present = "selftest")]
    resolutions: Option<Vec<usize>>,
    /// what to measure
    #[arg(long, value_enum, default_value_t = StudyMode::Tensor)]
    kind: StudyMode,
    /// probe strain, 6 Voigt components (tensorial shears)
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0])]
    probe: Vec<f64>,
    /// relative update-norm convergence threshold
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// iteration cap per solve
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// reference medium: "auto" or "LAMBDA,MU"
    #[arg(long, default_value = "auto")]
    reference: String,
    /// write the plot-ready error table here
    #[arg(long)]
    output_csv: Option<PathBuf>,
    /// write the full study record (config echo included) here
    #[arg(long)]
    output_json: Option<PathBuf>,
    /// record wall time per resolution (reports stop being byte-reproducible)
    #[arg(long)]
    time: bool,
    #[command(flatten)]
    shape: ShapeArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unsupported(_) => 4,
        Error::Config(_)
        | Error::Geometry(_)
        | Error::Grid(_)
        | Error::Material(_)
        | Error::Format(_) => 2,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    let threads = resolve_threads(cli.threads)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    match &cli.command {
        Command::Gen(args) => cmd_gen(args, threads),
        Command::Run(args) => cmd_run(args, threads),
        Command::Study(args) => cmd_study(args, threads),
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    let threads = match flag {
        Some(t) => t,
        None => match std::env::var("HOMOG_THREADS") {
            Ok(v) => v.trim().parse::<usize>().map_err(|_| {
                Error::Config(format!("HOMOG_THREADS must be a positive integer, got '{v}'"))
            })?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if threads == 0 {
        return Err(Error::Config("thread count must be at least 1".into()));
    }
    Ok(threads)
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("expected \"{what}\", got '{s}'")));
    }
    let parse = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| Error::Config(format!("bad number '{p}' in \"{what}\"")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?))
}

fn parse_reference(s: &str) -> Result<Reference<f64>> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Reference::Auto);
    }
    let (lambda, mu) = parse_pair(s, "LAMBDA,MU")?;
    Ok(Reference::Manual(LameParams64::new(lambda, mu)?))
}

fn parse_strain(comps: &[f64]) -> Result<SymMat64> {
    if comps.len() != 6 {
        return Err(Error::Config(format!(
            "a strain needs 6 Voigt components, got {}",
            comps.len()
        )));
    }
    let e: SymMat64 = SymMat([comps[0], comps[1], comps[2], comps[3], comps[4], comps[5]]);
    if !e.is_finite() {
        return Err(Error::Config("strain components must be finite".into()));
    }
    Ok(e)
}

fn parse_materials(specs: &[String]) -> Result<Vec<Material<f64>>> {
    if specs.is_empty() {
        return Ok(vec![
            Material::isotropic(1.0, 1.0),
            Material::isotropic(10.0, 10.0),
        ]);
    }
    specs
        .iter()
        .map(|s| {
            let (lambda, mu) = parse_pair(s, "LAMBDA,MU")?;
            Ok(Material::isotropic(lambda, mu))
        })
        .collect()
}

fn build_geometry(kind: GeometryKind, shape: &ShapeArgs) -> Result<Geometry<f64>> {
    match kind {
        GeometryKind::Laminate => {
            let fractions = if shape.fractions.is_empty() {
                vec![0.5, 0.5]
            } else {
                shape.fractions.clone()
            };
            let ids = if shape.ids.is_empty() {
                (0..fractions.len() as u16).collect()
            } else {
                shape.ids.clone()
            };
            Ok(Geometry::Laminate {
                axis: shape.axis,
                fractions,
                ids,
            })
        }
        GeometryKind::Sphere => {
            if shape.center.len() != 3 {
                return Err(Error::Config("--center needs exactly 3 components".into()));
            }
            Ok(Geometry::Sphere {
                center: [shape.center[0], shape.center[1], shape.center[2]],
                radius: shape.radius,
                inclusion: 1,
                matrix: 0,
            })
        }
        GeometryKind::Checkerboard => Ok(Geometry::Checkerboard {
            period: shape.period,
            even: 0,
            odd: 1,
        }),
        GeometryKind::Random => Err(Error::Config(
            "random microstructures have no parametric form; generate a voxel file with `gen`"
                .into(),
        )),
    }
}

/// Independent per-voxel draw from the fraction weights, reproducible from
/// the seed.
fn random_ids(n: usize, fractions: &[f64], nmat: usize, seed: u64) -> Result<Vec<u16>> {
    let fr: Vec<f64> = if fractions.is_empty() {
        vec![0.5, 0.5]
    } else {
        fractions.to_vec()
    };
    if fr.len() > nmat {
        return Err(Error::Config(format!(
            "random mix lists {} fractions but only {nmat} materials are declared",
            fr.len()
        )));
    }
    if fr.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
        return Err(Error::Config("random fractions must be non-negative".into()));
    }
    let total: f64 = fr.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Config("random fractions must not all vanish".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n * n * n)
        .map(|_| {
            let x = rng.random_range(0.0..total);
            let mut acc = 0.0;
            for (i, f) in fr.iter().enumerate() {
                acc += *f;
                if x < acc {
                    return i as u16;
                }
            }
            (fr.len() - 1) as u16
        })
        .collect())
}

fn cmd_gen(args: &GenArgs, threads: usize) -> Result<u8> {
    let materials = parse_materials(&args.shape.materials)?;
    let grid = match args.geometry {
        GeometryKind::Random => {
            let ids = random_ids(args.n, &args.shape.fractions, materials.len(), args.seed)?;
            VoxelGrid64::new(args.n, ids, materials, args.shape.porous)?
        }
        kind => rasterize(
            &build_geometry(kind, &args.shape)?,
            args.n,
            materials,
            args.shape.porous,
        )?,
    };
    let provenance = serde_json::json!({
        "subcommand": "gen",
        "geometry": kind_name(args.geometry),
        "N": args.n,
        "fractions": args.shape.fractions,
        "axis": args.shape.axis,
        "ids": args.shape.ids,
        "radius": args.shape.radius,
        "center": args.shape.center,
        "period": args.shape.period,
        "porous": args.shape.porous,
        "seed": args.seed,
        "threads": threads,
    });
    save_voxels_with(&grid, &args.output, Some(provenance))?;

    let mut counts = vec![0usize; grid.materials().len()];
    for &id in grid.ids() {
        counts[id as usize] += 1;
    }
    println!(
        "wrote {} (N={}, {} voxels)",
        args.output.display(),
        grid.n(),
        grid.len()
    );
    for (id, count) in counts.iter().enumerate() {
        println!(
            "phase {id}: {count} voxels (fraction {:.6})",
            *count as f64 / grid.len() as f64
        );
    }
    Ok(0)
}

fn kind_name(kind: GeometryKind) -> &'static str {
    match kind {
        GeometryKind::Laminate => "laminate",
        GeometryKind::Sphere => "sphere",
        GeometryKind::Checkerboard => "checkerboard",
        GeometryKind::Random => "random",
    }
}

#[derive(Serialize)]
struct RunEcho {
    subcommand: &'static str,
    scheme: Scheme,
    input: String,
    tolerance: f64,
    max_iterations: usize,
    reference: String,
    probe: SymMat64,
    full_tensor: bool,
    check_equilibrium: bool,
    threads: usize,
}

#[derive(Serialize)]
struct RunReport {
    config: RunEcho,
    n: usize,
    porous: bool,
    /// reference medium the solver actually used
    reference: LameParams64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    average_stress: Option<SymMat64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discarded_imag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    equilibrium_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    effective: Option<EffectiveTensor64>,
}

fn cmd_run(args: &RunArgs, threads: usize) -> Result<u8> {
    let grid: VoxelGrid64 = load_voxels(&args.input)?;
    let probe = parse_strain(&args.probe)?;
    let mut cfg = SchemeConfig64::new(args.scheme);
    cfg.tolerance = args.tolerance;
    cfg.max_iterations = args.max_iterations;
    cfg.reference = parse_reference(&args.reference)?;
    cfg.macro_strain = probe;
    cfg.check_equilibrium = args.check_equilibrium;

    let config = RunEcho {
        subcommand: "run",
        scheme: args.scheme,
        input: args.input.display().to_string(),
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        reference: args.reference.clone(),
        probe,
        full_tensor: args.full_tensor,
        check_equilibrium: args.check_equilibrium,
        threads,
    };

    let report = if args.full_tensor {
        let effective = effective_tensor(&grid, &cfg)?;
        RunReport {
            config,
            n: grid.n(),
            porous: grid.is_porous(),
            reference: resolve_reference(&grid, cfg.reference)?,
            converged: effective.converged,
            iterations: Some(*effective.iterations.iter().max().expect("six solves")),
            residuals: None,
            average_stress: None,
            discarded_imag: None,
            equilibrium_residual: None,
            effective: Some(effective),
        }
    } else {
        let run = run_scheme(&grid, &cfg)?;
        RunReport {
            config,
            n: grid.n(),
            porous: grid.is_porous(),
            reference: run.reference,
            converged: run.converged,
            iterations: Some(run.iterations()),
            residuals: Some(run.residuals.clone()),
            average_stress: Some(run.average_stress),
            discarded_imag: Some(run.discarded_imag),
            equilibrium_residual: run.equilibrium_residual,
            effective: None,
        }
    };

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    match &args.output {
        Some(path) => std::fs::write(path, &json)?,
        None => print!("{json}"),
    }

    if !report.converged {
        eprintln!(
            "did not converge within {} iterations (last residual {:?})",
            cfg.max_iterations,
            report.residuals.as_ref().and_then(|r| r.last()),
        );
        return Ok(3);
    }
    Ok(0)
}

fn cmd_study(args: &StudyArgs, _threads: usize) -> Result<u8> {
    if args.selftest {
        let ns = [8usize, 16, 32, 64, 128];
        let errors: Vec<f64> = ns.iter().map(|&n| 3.5 / n as f64).collect();
        let slope = fit_loglog_slope(&ns, &errors).expect("five exact points");
        println!("slope {slope:.12}");
        return Ok(0);
    }
    let kind = args.geometry.expect("required unless selftest");
    let geometry = build_geometry(kind, &args.shape)?;
    let materials = parse_materials(&args.shape.materials)?;
    let resolutions = args.resolutions.clone().expect("required unless selftest");
    let probe = parse_strain(&args.probe)?;

    let mut cfg = SchemeConfig64::new(args.scheme.expect("required unless selftest"));
    cfg.tolerance = args.tolerance;
    cfg.max_iterations = args.max_iterations;
    cfg.reference = parse_reference(&args.reference)?;
    cfg.macro_strain = probe;
    let opts = StudyOptions {
        probes: vec![probe],
        reference_override: None,
        record_timing: args.time,
    };

    let study = match args.kind {
        StudyMode::Tensor => sweep(
            &geometry,
            &materials,
            args.shape.porous,
            &resolutions,
            &cfg,
            &opts,
        )?,
        StudyMode::Strain => strain_error_study(
            &geometry,
            &materials,
            args.shape.porous,
            &resolutions,
            &cfg,
            &opts,
        )?,
    };

    if let Some(path) = &args.output_csv {
        emit_report(&study, path, ReportFormat::Csv)?;
    }
    if let Some(path) = &args.output_json {
        emit_report(&study, path, ReportFormat::Json)?;
    }
    if args.output_csv.is_none() && args.output_json.is_none() {
        print!("{}", report_csv(&study));
    }

    for probe_errors in &study.probes {
        match probe_errors.slope {
            Some(s) => println!("slope {s:.12}"),
            None => println!("slope none"),
        }
    }
    if study.resolved_exactly {
        println!("status resolved-exactly");
    } else if study.partial {
        println!("status partial");
    } else {
        println!("status complete");
    }
    Ok(0)
}
