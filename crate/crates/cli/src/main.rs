//! `phasezone`: batch driver that writes every computation of the library
//! as CSV or JSON.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical
//! failure.

mod state;
mod validate;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phasezone::fresnel::{self, FieldSummary, FresnelGeometry, SumMode, ZoneMask, DEFAULT_DENSITY};
use phasezone::io::{fmt_float, to_json, Cell, ComplexReport, Table};
use phasezone::semiclassics::compare_poisson;
use phasezone::spinmap::{self, SpinSphere};
use phasezone::wigner::{self, PhaseGrid, WignerField};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] phasezone::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "phasezone",
    version,
    about = "Phase-space and Fresnel-zone computations as batch runs"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Wigner function of a state on a rectangular grid.
    Wigner {
        /// vacuum | fock:<n> | coherent:<re>[,<im>] | mixture:<spec>@<w>;...
        #[arg(long)]
        state: String,
        /// min:max:count, used for both axes unless --grid-v is given.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// min:max:count for the v axis.
        #[arg(long, allow_hyphen_values = true)]
        grid_v: Option<String>,
        #[arg(long, value_enum, default_value = "direct")]
        method: Method,
    },
    /// Area-of-overlap estimate against the Poisson distribution.
    Overlap {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// Minimum number of bands in the table.
        #[arg(long)]
        bands: Option<usize>,
    },
    /// On-axis field of a spherical wave by Fresnel zones.
    Fresnel {
        #[arg(long, allow_hyphen_values = true)]
        r0: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        amplitude: f64,
        /// Gauss-Legendre nodes per zone.
        #[arg(long, default_value_t = DEFAULT_DENSITY)]
        density: usize,
        #[command(subcommand)]
        action: FresnelAction,
    },
    /// Belts of a spin sphere and their stereographic images.
    Spin {
        #[arg(long, allow_hyphen_values = true)]
        j: f64,
        #[command(subcommand)]
        action: SpinAction,
    },
    /// Check a file written by this tool.
    Validate { file: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Direct,
    Parity,
    Both,
}

#[derive(Debug, Subcommand)]
enum FresnelAction {
    /// Per-zone radii and contributions.
    Zones {
        #[arg(long)]
        n: usize,
    },
    /// Tapered integral beside both zone sums and the free field.
    Integral {
        /// Zones covered; all that fit on the sphere when absent.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Alternating zone sum.
    Zonesum {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "averaged")]
        mode: ModeArg,
    },
    /// Field behind a zone plate.
    Plate {
        #[arg(long, value_enum)]
        open: OpenArg,
        #[arg(long)]
        n: usize,
        /// Comma-separated 0-based zone indices, for --open list.
        #[arg(long, value_delimiter = ',')]
        zones: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Raw,
    Averaged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OpenArg {
    Odd,
    Even,
    All,
    List,
}

#[derive(Debug, Subcommand)]
enum SpinAction {
    /// Equal-area belts of the sphere.
    Belts,
    /// Stereographic images of every belt.
    Project,
    /// Areas of the bounded images.
    Areas,
    /// Inner radius of band n across several J.
    Converge {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        j_values: Vec<f64>,
        #[arg(long)]
        n: usize,
    },
}

/// Where results go. Summary lines accompany data written to a file on
/// stdout, and otherwise go to stderr so stdout stays parseable.
struct Sink {
    format: Format,
    out: Option<PathBuf>,
}

impl Sink {
    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_sibling(&self, suffix: &str, text: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(path) = &self.out else {
            return Ok(None);
        };
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let ext = path
            .extension()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.format.extension().to_string());
        let sibling = path.with_file_name(format!("{stem}-{suffix}.{ext}"));
        write_file(&sibling, text)?;
        Ok(Some(sibling))
    }

    fn summary(&self, line: &str) {
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    fn pick(&self, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> String {
        match self.format {
            Format::Csv => csv(),
            Format::Json => json(),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_axis(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Usage(format!("grid '{spec}' is not min:max:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi, n))
}

fn run_wigner(sink: &Sink, state: &str, grid: &str, grid_v: Option<&str>, method: Method) -> Result<(), CliError> {
    let rho = state::parse_state(state)?;
    let (u_min, u_max, n_u) = parse_axis(grid)?;
    let (v_min, v_max, n_v) = match grid_v {
        Some(g) => parse_axis(g)?,
        None => (u_min, u_max, n_u),
    };
    let grid = PhaseGrid::new(u_min, u_max, n_u, v_min, v_max, n_v)?;
    let render = |w: &WignerField| sink.pick(|| w.to_csv(), || w.to_json());
    let primary = match method {
        Method::Direct | Method::Both => wigner::wigner_direct(&rho, &grid)?,
        Method::Parity => wigner::wigner_parity(&rho, &grid)?,
    };
    if !primary.contained() {
        eprintln!("warning: the state is not contained in the grid; totals and slices are unreliable");
    }
    if method == Method::Both {
        let parity = wigner::wigner_parity(&rho, &grid)?;
        let deviation = primary.max_abs_deviation(&parity)?;
        sink.emit(&render(&primary))?;
        sink.emit_sibling("parity", &render(&parity))?;
        sink.summary(&format!("max_deviation={}", fmt_float(deviation)));
    } else {
        sink.emit(&render(&primary))?;
    }
    Ok(())
}

fn run_overlap(sink: &Sink, beta: f64, bands: Option<usize>) -> Result<(), CliError> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(CliError::Usage(format!(
            "--beta must be finite and non-negative, got {beta}"
        )));
    }
    let report = compare_poisson(beta, bands.unwrap_or(0))?;
    sink.emit(&sink.pick(|| report.to_csv(), || report.to_json()))?;
    sink.summary(&format!(
        "overlap_mean={} tv_distance={}",
        fmt_float(report.overlap_mean),
        fmt_float(report.tv_distance)
    ));
    Ok(())
}

#[derive(Serialize)]
struct ZonesReport<'a> {
    geometry: FresnelGeometry,
    fitted_slope: Option<f64>,
    zones: &'a [fresnel::ZoneRow],
}

#[derive(Serialize)]
struct ZoneSumReport {
    geometry: FresnelGeometry,
    zones: usize,
    mode: SumMode,
    #[serde(rename = "U")]
    u: ComplexReport,
    #[serde(rename = "U_free")]
    u_free: ComplexReport,
}

#[derive(Serialize)]
struct PlateReport {
    geometry: FresnelGeometry,
    zones: usize,
    open: Vec<usize>,
    #[serde(rename = "U_plate")]
    u_plate: ComplexReport,
    #[serde(rename = "U_free")]
    u_free: ComplexReport,
    ratio: f64,
}

fn quantity_csv(rows: &[(&str, ComplexReport)]) -> String {
    let mut t = Table::new(&["quantity", "re", "im", "abs", "phase"]);
    for (name, z) in rows {
        t.push(vec![
            Cell::from(*name),
            Cell::from(z.re),
            Cell::from(z.im),
            Cell::from(z.abs),
            Cell::from(z.phase),
        ]);
    }
    t.to_csv()
}

fn run_fresnel(sink: &Sink, geom: FresnelGeometry, density: usize, action: &FresnelAction) -> Result<(), CliError> {
    match action {
        FresnelAction::Zones { n } => {
            let rows = fresnel::zone_table(&geom, *n, density)?;
            let slope = if *n >= 2 {
                Some(fresnel::radius_exponent(&geom, 1, *n)?)
            } else {
                None
            };
            let report = ZonesReport {
                geometry: geom,
                fitted_slope: slope,
                zones: &rows,
            };
            sink.emit(&sink.pick(|| fresnel::zone_table_csv(&rows), || to_json(&report)))?;
            if let Some(s) = slope {
                sink.summary(&format!("fitted_slope={}", fmt_float(s)));
            }
        }
        FresnelAction::Integral { n } => {
            let count = n.unwrap_or_else(|| geom.feasible_zones());
            let summary = FieldSummary::compute(&geom, count, density)?;
            sink.emit(&sink.pick(|| summary.to_csv(), || summary.to_json()))?;
        }
        FresnelAction::Zonesum { n, mode } => {
            let mode = match mode {
                ModeArg::Raw => SumMode::Raw,
                ModeArg::Averaged => SumMode::Averaged,
            };
            let u = fresnel::zone_sum(&geom, *n, mode, density)?;
            let report = ZoneSumReport {
                geometry: geom,
                zones: *n,
                mode,
                u: u.into(),
                u_free: geom.free_field().into(),
            };
            let label = match mode {
                SumMode::Raw => "U_zone_sum_raw",
                SumMode::Averaged => "U_zone_sum_averaged",
            };
            sink.emit(&sink.pick(
                || quantity_csv(&[("U_free", report.u_free), (label, report.u)]),
                || to_json(&report),
            ))?;
            sink.summary(&format!(
                "ratio_to_free={}",
                fmt_float(report.u.abs / report.u_free.abs)
            ));
        }
        FresnelAction::Plate { open, n, zones } => {
            let mask = match open {
                OpenArg::Odd => ZoneMask::Odd,
                OpenArg::Even => ZoneMask::Even,
                OpenArg::All => ZoneMask::All,
                OpenArg::List => {
                    if zones.is_empty() {
                        return Err(CliError::Usage("--open list needs --zones".into()));
                    }
                    ZoneMask::List(zones.clone())
                }
            };
            if *open != OpenArg::List && !zones.is_empty() {
                return Err(CliError::Usage("--zones only applies to --open list".into()));
            }
            let u = fresnel::zone_plate(&geom, &mask, *n, density)?;
            let free = geom.free_field();
            let report = PlateReport {
                geometry: geom,
                zones: *n,
                open: mask.indices(*n)?,
                u_plate: u.into(),
                u_free: free.into(),
                ratio: u.norm() / free.norm(),
            };
            sink.emit(&sink.pick(
                || quantity_csv(&[("U_free", report.u_free), ("U_plate", report.u_plate)]),
                || to_json(&report),
            ))?;
            sink.summary(&format!("ratio_to_free={}", fmt_float(report.ratio)));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SpinReport<T: Serialize> {
    j: f64,
    radius: f64,
    rows: Vec<T>,
}

#[derive(Serialize)]
struct BeltRow {
    #[serde(flatten)]
    belt: spinmap::Belt,
    area: f64,
}

fn run_spin(sink: &Sink, j: f64, action: &SpinAction) -> Result<(), CliError> {
    if let SpinAction::Converge { j_values, n } = action {
        if j_values.is_empty() {
            return Err(CliError::Usage("--j-values needs at least one value".into()));
        }
        let report = spinmap::convergence(j_values, *n)?;
        return sink.emit(&sink.pick(|| report.to_csv(), || report.to_json()));
    }
    let sphere = SpinSphere::new(j)?;
    match action {
        SpinAction::Belts => {
            let belts = spinmap::belts(&sphere);
            let rows: Vec<BeltRow> = belts
                .iter()
                .map(|b| BeltRow {
                    belt: *b,
                    area: b.area(&sphere),
                })
                .collect();
            let report = SpinReport {
                j,
                radius: sphere.radius,
                rows,
            };
            sink.emit(&sink.pick(|| spinmap::belts_csv(&sphere, &belts), || to_json(&report)))?;
        }
        SpinAction::Project | SpinAction::Areas => {
            let mut bands = spinmap::projected_bands(&sphere);
            if matches!(action, SpinAction::Areas) {
                bands.retain(|b| !b.open);
                let below = bands.iter().filter(|b| b.area() < 2.0 * PI).count();
                sink.summary(&format!("bands={} below_2pi={below}", bands.len()));
            }
            let report = SpinReport {
                j,
                radius: sphere.radius,
                rows: bands.clone(),
            };
            sink.emit(&sink.pick(|| spinmap::bands_csv(&bands), || to_json(&report)))?;
        }
        SpinAction::Converge { .. } => unreachable!(),
    }
    Ok(())
}

fn run_validate(path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let looks_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    let report = if looks_json {
        validate::validate_json(&text)
    } else {
        validate::validate_csv(&text)
    }
    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    println!("ok schema={} rows={}", report.schema, report.rows);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let sink = Sink {
        format: cli.format,
        out: cli.out,
    };
    match &cli.command {
        Command::Wigner {
            state,
            grid,
            grid_v,
            method,
        } => run_wigner(&sink, state, grid, grid_v.as_deref(), *method),
        Command::Overlap { beta, bands } => run_overlap(&sink, *beta, *bands),
        Command::Fresnel {
            r0,
            b,
            lambda,
            amplitude,
            density,
            action,
        } => {
            let geom = FresnelGeometry::new(*r0, *b, *lambda, *amplitude)?;
            run_fresnel(&sink, geom, *density, action)
        }
        Command::Spin { j, action } => run_spin(&sink, *j, action),
        Command::Validate { file } => run_validate(file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
