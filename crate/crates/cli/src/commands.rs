use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use hypergrowth_core::diagnostics::DEFAULT_CANDIDATES;
use hypergrowth_core::{
    convert_maddison_horizontal, derive_per_capita, diagnose_per_capita, diagnose_series, parse_series_csv, refine_fit,
    write_series_csv, BridgeDegree, ComponentFit, DiagnosticConfig, Error, GrowthSeries, PiecewiseTrajectory,
    RegionConfig, RegionSettings, SegmentModel, SeriesKind,
};
use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, ConvertArgs, Format, RunArgs};
use crate::bundle::{self, Breakpoints, ReportBundle, BUNDLE_VERSION};
use crate::error::CliError;

pub const DATA_ENV: &str = "HYPERGROWTH_DATA";
pub const DEFAULT_DATA_FILE: &str = "maddison_excerpt.csv";

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(args) => {
            let b = cmd_fit(&args)?;
            emit_bundle(&b, &args)
        }
        Command::Ratio(args) if args.all_regions => {
            let rows = table_one(&args)?;
            emit(args.output.as_deref(), |w| write_table_one(&rows, args.format, w))
        }
        Command::Ratio(args) => {
            let b = cmd_ratio(&args)?;
            emit_bundle(&b, &args)
        }
        Command::Diagnose(args) => {
            let b = cmd_diagnose(&args)?;
            emit_bundle(&b, &args)
        }
        Command::Report(args) => cmd_report(&args),
        Command::Convert(args) => cmd_convert(&args),
    }
}

/// Loaded data plus the fit settings for the requested region.
struct Context {
    series: Vec<GrowthSeries>,
    region: String,
    settings: RegionSettings,
}

fn input_path(args: &RunArgs) -> Result<PathBuf, CliError> {
    if let Some(p) = &args.input {
        return Ok(p.clone());
    }
    match std::env::var_os(DATA_ENV) {
        Some(dir) => Ok(Path::new(&dir).join(DEFAULT_DATA_FILE)),
        None => Err(CliError::Usage(format!("no --input given and {DATA_ENV} is not set"))),
    }
}

fn read_series(path: &Path) -> Result<Vec<GrowthSeries>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
    Ok(parse_series_csv(io::BufReader::new(file))?)
}

/// Input series in model units plus the region settings file.
fn load_inputs(args: &RunArgs) -> Result<(Vec<GrowthSeries>, RegionConfig), CliError> {
    let mut series = read_series(&input_path(args)?)?;
    if let Some(p) = &args.pop_input {
        series.extend(read_series(p)?);
    }
    let series = series.iter().map(GrowthSeries::to_model_units).collect();
    let config = match &args.regions_config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p.display(), e))?;
            RegionConfig::parse(&text)?
        }
        None => RegionConfig::builtin(),
    };
    Ok((series, config))
}

fn load(args: &RunArgs) -> Result<Context, CliError> {
    let (series, config) = load_inputs(args)?;

    let region = match &args.region {
        Some(r) => r.clone(),
        None => {
            let mut names: Vec<&str> = series.iter().map(|s| s.region()).collect();
            names.sort_unstable();
            names.dedup();
            match names.as_slice() {
                [one] => one.to_string(),
                _ => {
                    return Err(CliError::Usage(
                        "--region is required when the input holds several regions".into(),
                    ))
                }
            }
        }
    };

    let settings = override_settings(config.get(&region), args)?;
    Ok(Context {
        series,
        region,
        settings,
    })
}

fn override_settings(mut s: RegionSettings, args: &RunArgs) -> Result<RegionSettings, CliError> {
    if let Some(w) = args.window {
        s.window = w;
    }
    if let Some(b) = args.breakpoint {
        s.breakpoint = Some(b);
    }
    if let Some(w) = args.bridge_width {
        if !(w > 0.0 && w.is_finite()) {
            return Err(CliError::Usage(format!("--bridge-width must be positive, got {w}")));
        }
        s.bridge_width = w;
    }
    if let Some(d) = &args.bridge_degree {
        s.bridge_degree = if d == "1" {
            BridgeDegree::Linear
        } else {
            BridgeDegree::Cubic
        };
    }
    Ok(s)
}

fn diagnostic_config(args: &RunArgs) -> Result<DiagnosticConfig, CliError> {
    if !(args.threshold > 0.0 && args.threshold.is_finite()) {
        return Err(CliError::Usage(format!(
            "--threshold must be positive, got {}",
            args.threshold
        )));
    }
    if args.persistence == 0 {
        return Err(CliError::Usage("--persistence must be at least 1".into()));
    }
    if !(args.flatness > 0.0 && args.flatness.is_finite()) {
        return Err(CliError::Usage(format!(
            "--flatness must be positive, got {}",
            args.flatness
        )));
    }
    Ok(DiagnosticConfig {
        threshold: args.threshold,
        persistence: args.persistence,
        flatness: args.flatness,
        ..DiagnosticConfig::default()
    })
}

/// `--candidate` years, or both defaults with the region category's own
/// year first.
fn candidates(args: &RunArgs, settings: &RegionSettings) -> Vec<f64> {
    if !args.candidates.is_empty() {
        return args.candidates.clone();
    }
    let mut years = DEFAULT_CANDIDATES.to_vec();
    if let Some(own) = settings.category.takeoff_candidate() {
        years.sort_by_key(|&y| y != own);
    }
    years
}

impl Context {
    fn find(&self, kind: SeriesKind) -> Result<GrowthSeries, CliError> {
        if let Some(s) = self
            .series
            .iter()
            .find(|s| s.region() == self.region && s.kind() == kind)
        {
            return Ok(s.clone());
        }
        if kind == SeriesKind::GdpPerCapita {
            return Ok(derive_per_capita(
                &self.find(SeriesKind::Gdp)?,
                &self.find(SeriesKind::Population)?,
            )?);
        }
        Err(CliError::Usage(format!(
            "no {kind} series for region {:?}",
            self.region
        )))
    }
}

/// Warns on the diagnostic stream about observations the trajectory only
/// reaches by extrapolation.
fn warn_extrapolation(points: &[(f64, f64)], trajectory: &PiecewiseTrajectory) {
    let segs = trajectory.segments();
    let (Some(first), Some(last)) = (segs.first(), segs.last()) else {
        return;
    };
    let outside = points
        .iter()
        .filter(|(t, _)| *t < first.window.lo || *t > last.window.hi)
        .count();
    if outside > 0 {
        eprintln!(
            "warning: {outside} observation(s) lie outside the model window {}:{}",
            first.window.lo, last.window.hi
        );
    }
}

fn fit_component(ctx: &Context, series: &GrowthSeries, refine: bool) -> Result<ComponentFit, CliError> {
    let fit = ctx.settings.fit_component(series)?;
    match fit {
        ComponentFit::Single(report) if refine => match refine_fit(&report, series) {
            Ok(r) => Ok(ComponentFit::Single(r)),
            Err(Error::DidNotConverge { iterations, best }) => {
                eprintln!("warning: refinement stopped after {iterations} iterations");
                Ok(ComponentFit::Single(*best))
            }
            Err(e) => Err(e.into()),
        },
        ComponentFit::Piecewise(_) if refine => {
            eprintln!("warning: --refine applies to single-segment fits only");
            Ok(fit)
        }
        fit => Ok(fit),
    }
}

fn series_bundle(command: &str, args: &RunArgs, diagnose: bool) -> Result<ReportBundle, CliError> {
    let ctx = load(args)?;
    let kind = args.kind.ok_or_else(|| CliError::Usage("--kind is required".into()))?;
    let series = ctx.find(kind)?;
    let fit = fit_component(&ctx, &series, args.refine)?;
    let trajectory = fit.trajectory();
    warn_extrapolation(series.points(), &trajectory);
    let diagnosis = if diagnose {
        Some(diagnose_series(
            &series,
            &fit.last().model,
            &candidates(args, &ctx.settings),
            &diagnostic_config(args)?,
        )?)
    } else {
        None
    };
    let bp = bundle::breakpoint_of(&fit);
    Ok(ReportBundle {
        version: BUNDLE_VERSION,
        command: command.to_string(),
        region: ctx.region.clone(),
        kind,
        unit: series.unit(),
        breakpoints: bp.map(|b| match kind {
            SeriesKind::Population => Breakpoints {
                gdp: None,
                population: Some(b),
            },
            _ => Breakpoints {
                gdp: Some(b),
                population: None,
            },
        }),
        segments: bundle::component_segments(&fit, kind),
        bridges: trajectory.bridges().to_vec(),
        monotonicity_class: None,
        diagnosis,
        table: bundle::table(series.points(), &trajectory),
    })
}

fn ratio_bundle(command: &str, args: &RunArgs, diagnose: bool) -> Result<ReportBundle, CliError> {
    let ctx = load(args)?;
    let gdp = ctx.find(SeriesKind::Gdp)?;
    let pop = ctx.find(SeriesKind::Population)?;
    let per_capita = derive_per_capita(&gdp, &pop)?;
    let fit = ctx.settings.fit_ratio(&gdp, &pop)?;
    warn_extrapolation(per_capita.points(), &fit.trajectory);
    let diagnosis = if diagnose {
        Some(diagnose_per_capita(
            &gdp,
            &pop,
            &fit,
            &candidates(args, &ctx.settings),
            &diagnostic_config(args)?,
        )?)
    } else {
        None
    };
    let class = match fit.trajectory.segments().first().map(|s| s.model) {
        Some(SegmentModel::Ratio(r)) => Some(r.classify()),
        _ => None,
    };
    let (gb, pb) = (bundle::breakpoint_of(&fit.gdp), bundle::breakpoint_of(&fit.pop));
    Ok(ReportBundle {
        version: BUNDLE_VERSION,
        command: command.to_string(),
        region: ctx.region.clone(),
        kind: SeriesKind::GdpPerCapita,
        unit: per_capita.unit(),
        breakpoints: (gb.is_some() || pb.is_some()).then_some(Breakpoints {
            gdp: gb,
            population: pb,
        }),
        segments: bundle::ratio_segments(&fit),
        bridges: fit.trajectory.bridges().to_vec(),
        monotonicity_class: class,
        diagnosis,
        table: bundle::table(per_capita.points(), &fit.trajectory),
    })
}

fn per_capita_requested(args: &RunArgs) -> bool {
    matches!(args.kind, None | Some(SeriesKind::GdpPerCapita))
}

pub fn cmd_fit(args: &RunArgs) -> Result<ReportBundle, CliError> {
    series_bundle("fit", args, false)
}

pub fn cmd_ratio(args: &RunArgs) -> Result<ReportBundle, CliError> {
    if !per_capita_requested(args) {
        return Err(CliError::Usage("ratio works on gdp_per_capita only".into()));
    }
    ratio_bundle("ratio", args, false)
}

/// GDP/cap (the default kind) goes through the ratio of component fits;
/// other kinds are checked against their own hyperbola.
pub fn cmd_diagnose(args: &RunArgs) -> Result<ReportBundle, CliError> {
    if per_capita_requested(args) {
        ratio_bundle("diagnose", args, true)
    } else {
        series_bundle("diagnose", args, true)
    }
}

pub fn cmd_report(args: &RunArgs) -> Result<(), CliError> {
    let prefix = args
        .output
        .as_ref()
        .ok_or_else(|| CliError::Usage("report needs --output PREFIX".into()))?;
    let b = if per_capita_requested(args) {
        ratio_bundle("report", args, true)?
    } else {
        series_bundle("report", args, true)?
    };
    let csv_path = with_suffix(prefix, "csv");
    let json_path = with_suffix(prefix, "json");
    emit(Some(&csv_path), |w| write_table_csv(&b, w))?;
    emit(Some(&json_path), |w| write_json(&b, w))
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<(), CliError> {
    let file = File::open(&args.input).map_err(|e| CliError::io(args.input.display(), e))?;
    let series = convert_maddison_horizontal(io::BufReader::new(file), args.kind, args.scale)?;
    emit(args.output.as_deref(), |w| Ok(write_series_csv(&series, w)?))
}

/// One line of the per-region summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOneRow {
    pub region: String,
    pub segment: String,
    pub a1: f64,
    pub k1: f64,
    pub a2: f64,
    pub k2: f64,
    pub stagnation: bool,
    pub takeoff: bool,
}

/// Every configured region present in the input, in config order.
pub fn table_one(args: &RunArgs) -> Result<Vec<TableOneRow>, CliError> {
    let (series, config) = load_inputs(args)?;
    let cfg = diagnostic_config(args)?;
    let names: Vec<String> = config
        .regions
        .iter()
        .map(|r| r.name.clone())
        .filter(|n| {
            let present = |k| series.iter().any(|s| s.region() == n && s.kind() == k);
            let ok = present(SeriesKind::Gdp) && present(SeriesKind::Population);
            if !ok {
                eprintln!("warning: skipping {n}: gdp or population missing from input");
            }
            ok
        })
        .collect();

    let one = |name: &String| -> Result<Vec<TableOneRow>, CliError> {
        let ctx = Context {
            series: series.clone(),
            region: name.clone(),
            settings: override_settings(config.get(name), args)?,
        };
        let gdp = ctx.find(SeriesKind::Gdp)?;
        let pop = ctx.find(SeriesKind::Population)?;
        let fit = ctx.settings.fit_ratio(&gdp, &pop)?;
        let d = diagnose_per_capita(&gdp, &pop, &fit, &candidates(args, &ctx.settings), &cfg)?;
        Ok(bundle::ratio_segments(&fit)
            .into_iter()
            .map(|s| TableOneRow {
                region: name.clone(),
                segment: s.id,
                a1: s.a1.unwrap_or(f64::NAN),
                k1: s.k1.unwrap_or(f64::NAN),
                a2: s.a2.unwrap_or(f64::NAN),
                k2: s.k2.unwrap_or(f64::NAN),
                stagnation: d.stagnation.is_present(),
                takeoff: d.any_takeoff(),
            })
            .collect())
    };

    let results: Vec<Result<Vec<TableOneRow>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = names.iter().map(|n| scope.spawn(move || one(n))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("region worker panicked"))
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn emit(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p.display(), e))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(|e| CliError::io(p.display(), e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush().map_err(|e| CliError::io("stdout", e))
        }
    }
}

fn emit_bundle(b: &ReportBundle, args: &RunArgs) -> Result<(), CliError> {
    emit(args.output.as_deref(), |w| match args.format {
        Format::Json => write_json(b, w),
        Format::Csv => write_table_csv(b, w),
    })
}

fn write_json<T: Serialize>(value: &T, w: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w).map_err(|e| CliError::io("output", e))
}

fn write_table_csv(b: &ReportBundle, w: &mut dyn Write) -> Result<(), CliError> {
    let io_err = |e| CliError::io("output", e);
    writeln!(w, "year,observed,fitted,residual,segment").map_err(io_err)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &b.table {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.year,
            r.observed,
            opt(r.fitted),
            opt(r.residual),
            r.segment
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn write_table_one(rows: &[TableOneRow], format: Format, w: &mut dyn Write) -> Result<(), CliError> {
    if format == Format::Json {
        return write_json(&rows, w);
    }
    let io_err = |e| CliError::io("output", e);
    writeln!(w, "region,segment,a1,k1,a2,k2,stagnation,takeoff").map_err(io_err)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.3e},{:.3e},{:.3e},{:.3e},{},{}",
            r.region, r.segment, r.a1, r.k1, r.a2, r.k2, r.stagnation, r.takeoff
        )
        .map_err(io_err)?;
    }
    Ok(())
}
