//! Command-line front end for the cyclekit analysis pipeline.
//!
//! Subcommands: `reduce` (kinetic -> LLS form), `count` (averaged
//! amplitude equation and cycle classification), `verify` (numerical
//! cross-check), `table` (maximum-cycle-count grid), `zoo` (bundled
//! models). Exit codes: 0 success, 1 input error, 2 reduction failure,
//! 3 not oscillatory.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use cyclekit::averaging::{kb_average, rescale, AveragedDynamics, RescaledOscillator};
use cyclekit::cycles::{
    classify_cycles, generic_degree_bound, radial_roots, CycleReport, RadialRoots,
    ORIGIN_RHO_TOL,
};
use cyclekit::error::Error;
use cyclekit::modelzoo::{build as build_model, zoo, ModelEntry};
use cyclekit::odeverify::{
    compare_with_kb, detect_limit_cycles, integrate, DetectSettings, Detection, Direction,
    PlanarField, SeedStatus, SimSpec,
};
use cyclekit::poly::{parse_rat, rat_str, rat_to_f64, Rat};
use cyclekit::reduction::{
    build_reduction_map, classify_lls, find_fixed_points, reduce_to_lls, FixedPointInfo,
    KineticSystem, LLSSystem, ReductionMap, SearchBox,
};
use cyclekit::report::{
    averaged_section, class_section, comparison_section, cycle_section, detection_section,
    parse_system_json, radial_flow_csv, reduction_section, table_csv, table_text,
    trajectory_csv, LoadedSystem, ModelDescriptor, ReportFile, SystemFile,
};

#[derive(Parser)]
#[command(
    name = "cyclekit",
    version,
    about = "Reduce planar kinetic systems to generalized Lienard form, derive the averaged \
             amplitude equation, and count/verify limit cycles"
)]
struct Cli {
    /// Seed for the deterministic jitter of the fixed-point search grid.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cast a planar kinetic system into second-order LLS form and classify it.
    Reduce(ReduceArgs),
    /// Derive the averaged amplitude/phase equations and count limit cycles.
    Count(CountArgs),
    /// Cross-check the averaged prediction against numerical cycle detection.
    Verify(VerifyArgs),
    /// Print the maximum-cycle-count grid over damping/restoring degrees.
    Table(TableArgs),
    /// List the bundled benchmark models.
    Zoo,
}

#[derive(Args)]
struct InputArgs {
    /// JSON system file (kinetic or lls); a report with an embedded lls
    /// block is also accepted.
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,

    /// Bundled model name (see `cyclekit zoo`).
    #[arg(long)]
    model: Option<String>,

    /// Model parameter override, repeatable: --param name=value
    /// (values may be rationals like 4/3 or exact decimals like 0.144).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,

    /// Reduce at this fixed point instead of searching, as "x,y".
    #[arg(long, value_name = "X,Y")]
    fixed_point: Option<String>,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EpsPolicy {
    /// Warn when eps >= 0.3 but continue.
    Warn,
    /// Refuse to average when eps >= 0.3.
    Strict,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "warn")]
    eps_policy: EpsPolicy,
    /// Report averaged rates in original time t instead of scaled time tau.
    #[arg(long)]
    t_time: bool,
    /// Also write a CSV sampling of the radial flow dr/dtau for plotting.
    #[arg(long, value_name = "FILE")]
    emit_radial: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated seed amplitudes for the detector.
    #[arg(long, default_value = "0.5,2.0")]
    seeds: String,
    /// Integration budget per orbit.
    #[arg(long, default_value_t = 3000.0)]
    tmax: f64,
    /// Convergence window for successive section crossings.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    /// Force the detector onto the reduced plane even when the original
    /// kinetic system is available.
    #[arg(long)]
    reduced_plane: bool,
    /// Directory for per-seed trajectory CSV files.
    #[arg(long, value_name = "DIR")]
    emit_trajectories: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 10)]
    nmax: u32,
    #[arg(long, default_value_t = 10)]
    mmax: u32,
    #[arg(long, value_enum, default_value = "text")]
    format: TableFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotProportional
            | Error::AffineTermsInF(_)
            | Error::NoFixedPointFound
            | Error::DegenerateTransform
            | Error::NotReducible(_)
            | Error::FixedPointNotShifted { .. } => 2,
            Error::NotOscillatory { .. } => 3,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("CYCLEKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Reduce(args) => cmd_reduce(args, cli.seed),
        Command::Count(args) => cmd_count(args, cli.seed),
        Command::Verify(args) => cmd_verify(args, cli.seed),
        Command::Table(args) => cmd_table(args),
        Command::Zoo => cmd_zoo(),
    }
}

/// Everything the pipeline stages need, resolved from --input or --model.
struct Resolved {
    descriptor: Option<ModelDescriptor>,
    kinetic: Option<KineticSystem>,
    /// Closed-form fixed point, when the model provides one.
    fixed_point_hint: Option<(Rat, Rat)>,
    /// Directly provided second-order form (lls input files, and the
    /// canonical form of zoo models).
    lls_direct: Option<LLSSystem>,
    notes: Vec<String>,
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, Rat>, CliError> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--param '{pair}' is not NAME=VALUE")))?;
        out.insert(name.trim().to_string(), parse_rat(value)?);
    }
    Ok(out)
}

fn resolve(input: &InputArgs) -> Result<Resolved, CliError> {
    match (&input.input, &input.model) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            let file = parse_system_json(&text)?;
            match file.load()? {
                LoadedSystem::Kinetic(sys) => Ok(Resolved {
                    descriptor: None,
                    kinetic: Some(sys),
                    fixed_point_hint: None,
                    lls_direct: None,
                    notes: vec![],
                }),
                LoadedSystem::Lls(lls) => Ok(Resolved {
                    descriptor: None,
                    kinetic: None,
                    fixed_point_hint: None,
                    lls_direct: Some(lls),
                    notes: vec![],
                }),
            }
        }
        (None, Some(name)) => {
            let params = parse_params(&input.params)?;
            let entry: ModelEntry = build_model(name, &params)?;
            let descriptor = ModelDescriptor {
                name: entry.name.clone(),
                params: entry
                    .params
                    .iter()
                    .map(|(n, v)| (n.clone(), rat_str(v)))
                    .collect(),
            };
            Ok(Resolved {
                descriptor: Some(descriptor),
                kinetic: entry.kinetic.as_ref().map(|k| k.sys.clone()),
                fixed_point_hint: entry.kinetic.as_ref().map(|k| k.fixed_point.clone()),
                lls_direct: Some(entry.lls),
                notes: entry.expected.notes.clone(),
            })
        }
        (None, None) => Err(CliError::usage("provide --input FILE or --model NAME")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

/// Pick the fixed point for a kinetic reduction: an explicit request, the
/// model's closed form, or a Newton search over a default box (preferring
/// oscillatory points, with a warning when several are found).
fn choose_fixed_point(
    sys: &KineticSystem,
    hint: &Option<(Rat, Rat)>,
    requested: &Option<String>,
    seed: u64,
    warnings: &mut Vec<String>,
) -> Result<FixedPointInfo, CliError> {
    if let Some(text) = requested {
        let (xs, ys) = text
            .split_once(',')
            .ok_or_else(|| CliError::usage("--fixed-point must be \"x,y\""))?;
        let xr = parse_rat(xs)?;
        let yr = parse_rat(ys)?;
        // exact residual check first; otherwise refine numerically nearby
        if let Ok(fp) = FixedPointInfo::from_exact(sys, xr.clone(), yr.clone()) {
            return Ok(fp);
        }
        let x = rat_to_f64(&xr);
        let y = rat_to_f64(&yr);
        let spread = 0.5 + 0.1 * (x.abs() + y.abs());
        let fps = find_fixed_points(
            sys,
            SearchBox::new(x - spread, x + spread, y - spread, y + spread)?,
            3,
            seed,
        )?;
        let nearest = fps
            .into_iter()
            .min_by(|a, b| {
                let da = (a.x - x).hypot(a.y - y);
                let db = (b.x - x).hypot(b.y - y);
                da.partial_cmp(&db).unwrap()
            })
            .ok_or(Error::NoFixedPointFound)?;
        warnings.push(format!(
            "requested fixed point ({x}, {y}) refined to ({}, {})",
            nearest.x, nearest.y
        ));
        return Ok(nearest);
    }
    if let Some((xs, ys)) = hint {
        return Ok(FixedPointInfo::from_exact(sys, xs.clone(), ys.clone())?);
    }
    let fps = find_fixed_points(sys, SearchBox::centered(10.0), 9, seed)?;
    if fps.len() > 1 {
        let list: Vec<String> = fps
            .iter()
            .map(|fp| {
                format!(
                    "({:.6}, {:.6}){}",
                    fp.x,
                    fp.y,
                    if fp.is_saddle() { " [saddle]" } else { "" }
                )
            })
            .collect();
        warnings.push(format!(
            "{} fixed points found: {}; reducing at the first oscillatory one \
             (use --fixed-point to override)",
            fps.len(),
            list.join(", ")
        ));
    }
    let chosen = fps
        .iter()
        .find(|fp| fp.is_oscillatory())
        .or_else(|| fps.iter().find(|fp| !fp.is_saddle()))
        .or(fps.first())
        .cloned()
        .ok_or(Error::NoFixedPointFound)?;
    Ok(chosen)
}

struct ReducedPipeline {
    lls: LLSSystem,
    fp: Option<FixedPointInfo>,
    map: Option<ReductionMap>,
    warnings: Vec<String>,
}

/// Obtain the second-order form: reduce the kinetic system when present,
/// otherwise use the direct form.
fn to_lls(res: &Resolved, input: &InputArgs, seed: u64) -> Result<ReducedPipeline, CliError> {
    let mut warnings = res.notes.clone();
    if let Some(sys) = &res.kinetic {
        let fp = choose_fixed_point(
            sys,
            &res.fixed_point_hint,
            &input.fixed_point,
            seed,
            &mut warnings,
        )?;
        let map = build_reduction_map(sys, &fp)?;
        let lls = reduce_to_lls(sys, &fp, &map)?;
        Ok(ReducedPipeline {
            lls,
            fp: Some(fp),
            map: Some(map),
            warnings,
        })
    } else if let Some(lls) = &res.lls_direct {
        Ok(ReducedPipeline {
            lls: lls.clone(),
            fp: None,
            map: None,
            warnings,
        })
    } else {
        Err(CliError::usage("no system resolved"))
    }
}

fn emit(report: &ReportFile, output: &Option<PathBuf>) -> Result<(), CliError> {
    let json = report.to_json();
    match output {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_reduce(args: ReduceArgs, seed: u64) -> Result<(), CliError> {
    let res = resolve(&args.input)?;
    let pipeline = to_lls(&res, &args.input, seed)?;
    let mut report = ReportFile::new();
    report.model = res.descriptor;
    if let (Some(fp), Some(map)) = (&pipeline.fp, &pipeline.map) {
        report.reduction = Some(reduction_section(fp, map));
    } else {
        report
            .warnings
            .push("input already in reduced form; nothing to transform".into());
    }
    report.lls = Some(SystemFile::from_lls(&pipeline.lls));
    report.classification = Some(class_section(
        &classify_lls(&pipeline.lls),
        pipeline.lls.kind(),
    ));
    report.warnings.extend(pipeline.warnings);
    emit(&report, &args.output)
}

struct Averaged {
    osc: RescaledOscillator,
    avg: AveragedDynamics,
    cycle_report: Option<CycleReport>,
    warnings: Vec<String>,
}

fn run_averaging(lls: &LLSSystem, eps_policy: EpsPolicy) -> Result<Averaged, CliError> {
    let osc = rescale(lls)?;
    let mut warnings: Vec<String> = osc.warnings().to_vec();
    if eps_policy == EpsPolicy::Strict && !osc.warnings().is_empty() {
        return Err(CliError {
            code: 3,
            message: format!(
                "eps = {} is outside the weakly nonlinear regime and --eps-policy is strict",
                osc.eps_f64()
            ),
        });
    }
    let avg = kb_average(&osc);
    let cycle_report = match radial_roots(&avg, ORIGIN_RHO_TOL) {
        Ok(roots) => {
            let report = classify_cycles(&avg, &roots);
            warnings.extend(report.warnings.clone());
            Some(report)
        }
        Err(Error::IdenticallyZero) => {
            warnings.push(
                "radial polynomial is identically zero: center at first order, no cycles"
                    .into(),
            );
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Averaged {
        osc,
        avg,
        cycle_report,
        warnings,
    })
}

fn cmd_count(args: CountArgs, seed: u64) -> Result<(), CliError> {
    let res = resolve(&args.input)?;
    let pipeline = to_lls(&res, &args.input, seed)?;
    let averaged = run_averaging(&pipeline.lls, args.eps_policy)?;

    let mut report = ReportFile::new();
    report.model = res.descriptor;
    if let (Some(fp), Some(map)) = (&pipeline.fp, &pipeline.map) {
        report.reduction = Some(reduction_section(fp, map));
    }
    report.lls = Some(SystemFile::from_lls(&pipeline.lls));
    report.classification = Some(class_section(
        &classify_lls(&pipeline.lls),
        pipeline.lls.kind(),
    ));
    report.averaged = Some(averaged_section(&averaged.osc, &averaged.avg, args.t_time));
    if let Some(cr) = &averaged.cycle_report {
        report.cycles = Some(cycle_section(cr, pipeline.lls.kind()));
    }
    report.warnings.extend(pipeline.warnings);
    report.warnings.extend(averaged.warnings.clone());

    if let Some(path) = &args.emit_radial {
        let r_max = averaged
            .cycle_report
            .as_ref()
            .and_then(|cr| cr.cycles.last().map(|c| 1.2 * c.radius))
            .unwrap_or(3.0);
        std::fs::write(path, radial_flow_csv(&averaged.avg, r_max, 400))?;
    }
    emit(&report, &args.output)
}

fn cmd_verify(args: VerifyArgs, seed: u64) -> Result<(), CliError> {
    let res = resolve(&args.input)?;
    let pipeline = to_lls(&res, &args.input, seed)?;
    let averaged = run_averaging(&pipeline.lls, EpsPolicy::Warn)?;

    let seeds: Vec<f64> = args
        .seeds
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad seed amplitude '{s}'")))
        })
        .collect::<Result<_, _>>()?;
    if seeds.is_empty() {
        return Err(CliError::usage("--seeds must name at least one amplitude"));
    }

    // detector plane: the original kinetic system when available (the
    // honest oracle), unless the reduced plane is forced
    let omega = averaged.avg.omega();
    let (field, reduced_plane) = match (&res.kinetic, &pipeline.map, args.reduced_plane) {
        (Some(sys), Some(map), false) => (PlanarField::from_kinetic(sys, map, omega), false),
        _ => (PlanarField::from_lls(&pipeline.lls), true),
    };

    let settings = DetectSettings {
        rel_tol: args.rel_tol,
        t_max: args.tmax,
        ..DetectSettings::default()
    };

    // fan out the seeds, then merge deterministically in seed order
    let per_seed: Vec<Result<Detection, Error>> = seeds
        .par_iter()
        .map(|&s| detect_limit_cycles(&field, &[s], &settings))
        .collect();
    let mut detection = Detection {
        cycles: vec![],
        outcomes: vec![],
        warnings: vec![],
    };
    for d in per_seed {
        let d = d?;
        detection.outcomes.extend(d.outcomes);
        detection.warnings.extend(d.warnings);
        for c in d.cycles {
            let dup = detection
                .cycles
                .iter()
                .any(|e| (e.amplitude - c.amplitude).abs() <= 1e-3 * c.amplitude.abs());
            if !dup {
                detection.cycles.push(c);
            }
        }
    }
    detection
        .cycles
        .sort_by(|a, b| a.amplitude.partial_cmp(&b.amplitude).unwrap());

    let empty_report;
    let cycle_report = match &averaged.cycle_report {
        Some(cr) => cr,
        None => {
            let roots = RadialRoots {
                roots: vec![],
                complex_pairs: 0,
                nonpositive_real: 0,
                warnings: vec![],
            };
            empty_report = classify_cycles(&averaged.avg, &roots);
            &empty_report
        }
    };
    let comparison = compare_with_kb(cycle_report, &detection.cycles, averaged.osc.eps_f64());

    if let Some(dir) = &args.emit_trajectories {
        std::fs::create_dir_all(dir)?;
        for (i, &s) in seeds.iter().enumerate() {
            let spec = SimSpec {
                initial: field.seed_state(s),
                t_max: args.tmax.min(500.0),
                rel_tol: 1e-9,
                abs_tol: 1e-12,
                direction: Direction::Forward,
            };
            let traj = integrate(&field, &spec)?;
            let header = if reduced_plane {
                ("t", "xi", "xidot")
            } else {
                ("t", "x", "y")
            };
            let path = dir.join(format!("trajectory_seed{i}.csv"));
            std::fs::write(path, trajectory_csv(header, &traj.samples))?;
        }
    }

    let mut report = ReportFile::new();
    report.model = res.descriptor;
    report.lls = Some(SystemFile::from_lls(&pipeline.lls));
    report.averaged = Some(averaged_section(&averaged.osc, &averaged.avg, false));
    if let Some(cr) = &averaged.cycle_report {
        report.cycles = Some(cycle_section(cr, pipeline.lls.kind()));
    }
    report.detection = Some(detection_section(&detection));
    report.comparison = Some(comparison_section(&comparison));
    report.warnings.extend(pipeline.warnings);
    report.warnings.extend(averaged.warnings.clone());
    report.warnings.extend(detection.warnings.clone());
    for outcome in &detection.outcomes {
        if outcome.status == SeedStatus::NoConvergence
            || outcome.status == SeedStatus::NeutralOrbit
        {
            report.warnings.push(format!(
                "seed {} ({}): {}",
                outcome.seed,
                outcome.direction.name(),
                outcome.status.name()
            ));
        }
    }
    emit(&report, &args.output)
}

fn cmd_table(args: TableArgs) -> Result<(), CliError> {
    if args.nmax < 1 || args.mmax < 1 {
        return Err(CliError::usage("--nmax and --mmax must be at least 1"));
    }
    // cells are independent; compute rows in parallel
    let grid: Vec<Vec<(u32, u32)>> = (1..=args.nmax)
        .into_par_iter()
        .map(|n| (1..=args.mmax).map(|m| generic_degree_bound(n, m)).collect())
        .collect();
    let text = match args.format {
        TableFormat::Text => table_text(&grid),
        TableFormat::Csv => table_csv(&grid),
    };
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_zoo() -> Result<(), CliError> {
    println!("{:<22} {:<40} expected", "model", "parameters (defaults)");
    for entry in zoo() {
        let params: Vec<String> = entry
            .params
            .iter()
            .map(|(n, v)| format!("{n}={}", rat_str(v)))
            .collect();
        let expected = match entry.expected.cycles {
            Some(0) => "no cycles (center-type)".to_string(),
            Some(n) => {
                let radii = if entry.expected.radii.is_empty() {
                    String::new()
                } else {
                    format!(
                        " at radii {}",
                        entry
                            .expected
                            .radii
                            .iter()
                            .map(|r| format!("{r}"))
                            .collect::<Vec<_>>()
                            .join(",")
                    )
                };
                format!("{n} cycle(s){radii}")
            }
            None => "depends on parameters".to_string(),
        };
        println!("{:<22} {:<40} {}", entry.name, params.join(" "), expected);
    }
    Ok(())
}
