//! focuskit: first-order design math, exact ray tracing and focus-travel
//! analysis for lenses built around a miniature focusing module.
//!
//! All distances on the command line are millimetres except travel and spot
//! sizes, which are micrometres; angles are degrees. Object distances are
//! given as the distance in front of the lens (`2000` means two metres), or
//! `inf` for the far point. Outputs are deterministic: the same invocation
//! produces byte-identical documents.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use focuskit::array::{cone_lateral_extent_mm, ArrayPlan, ArraySpec};
use focuskit::focus::{
    perturb_focus_group, spot_rms_with, travel_sweep, FocusError, SweepEntry,
};
use focuskit::gaussian::{
    aperture_model, solve_stop_position, ApertureReport, GaussianError, ObjectDistance,
    TwoGroupSpec,
};
use focuskit::prescription::{
    builtin, parse_with_catalog, GlassCatalog, Prescription, PrescriptionError,
};
use focuskit::raytrace::{ray_fan, trace_ray, ParaxialError};
use focuskit::travel::{
    self, far_field_ok, gamma_closed, whole_lens_travel, TravelError, TravelResult,
    UNIVERSAL_FAMILY,
};

use report::{csv, sig6, svg_line_plot, svg_scatter};

#[derive(Parser)]
#[command(
    name = "focuskit",
    version,
    about = "First-order optics and sequential ray tracing for miniature-focus lens systems",
    after_help = "Units: lengths in mm, travel and spot radii in um, angles in degrees.\n\
                  Object distances are measured in front of the lens; use `inf` for the far point.\n\
                  Set FOCUSKIT_CATALOG to override the glass catalog used for --input files."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the artifact to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Args)]
struct LensSource {
    /// Built-in prescription: mfm30 (30 mm discrete) or mms45 (45 mm multiscale channel).
    #[arg(long, conflicts_with = "input")]
    lens: Option<String>,
    /// Path to a prescription JSON document.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Two-group first-order report: focal length, clear apertures, stop window, travel.
    FirstOrder {
        /// Front-group focal length (mm).
        #[arg(long, allow_negative_numbers = true)]
        f1: f64,
        /// Back-group focal length (mm).
        #[arg(long, allow_negative_numbers = true)]
        f2: f64,
        /// Group separation (mm).
        #[arg(long)]
        d: f64,
        /// Stop distance behind the front group (mm).
        #[arg(long, default_value_t = 0.0)]
        ds: f64,
        /// System F-number; enables the clear-aperture report.
        #[arg(long)]
        fno: Option<f64>,
        /// Full field of view (degrees).
        #[arg(long, default_value_t = 0.0)]
        fov: f64,
        /// Near point in front of the lens (mm); enables the travel report.
        #[arg(long)]
        near: Option<f64>,
        /// Front clear-aperture limit (mm); with --d2-max, solves the stop window.
        #[arg(long)]
        d1_max: Option<f64>,
        /// Back clear-aperture limit (mm).
        #[arg(long)]
        d2_max: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Travel-ratio curve gamma(alpha) = |alpha^2 / (1 - alpha^2)|.
    GammaCurve {
        /// Lower alpha = f1/f bound.
        #[arg(long, default_value_t = 0.1)]
        from: f64,
        /// Upper alpha bound.
        #[arg(long, default_value_t = 0.95)]
        to: f64,
        /// Sample count.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// The eight-lens universal focusing family (25-60 mm on one module).
    Table2 {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Trace a pupil fan through a prescription and report the spot.
    Trace {
        #[command(flatten)]
        source: LensSource,
        /// Field angle (degrees).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        field: f64,
        /// Object distance in front of the lens (mm) or `inf`.
        #[arg(long, default_value = "inf")]
        object: String,
        /// Focusing-group shift (um, positive toward the image).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        shift_um: f64,
        /// Pupil rings in the fan.
        #[arg(long, default_value_t = 8)]
        rings: usize,
        /// Azimuthal arms per ring.
        #[arg(long, default_value_t = 16)]
        arms: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Best-focus sweep over object distances: shifts, travel range, ratio.
    FocusSweep {
        #[command(flatten)]
        source: LensSource,
        /// Near point in front of the lens (mm); sweeps {inf, near}.
        #[arg(long)]
        near: Option<f64>,
        /// Explicit comma-separated distances (mm or `inf`), overriding --near.
        #[arg(long)]
        distances: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Spot change under focusing-group decenter (um) and tilt (degrees).
    Tolerance {
        #[command(flatten)]
        source: LensSource,
        /// Transverse decenter of the focusing group (um).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        decenter_um: f64,
        /// Tilt of the focusing group about its first vertex (degrees).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tilt_deg: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Array-camera plan: tiling, overlap, ifov, equivalent focal lengths, zoom.
    ArrayPlan {
        /// Physical cone angle per channel (degrees).
        #[arg(long)]
        cone: f64,
        /// Full field of view of one channel (degrees).
        #[arg(long)]
        mfov: f64,
        /// Total coverage target (degrees).
        #[arg(long)]
        total_fov: f64,
        /// Pixel pitch (um).
        #[arg(long)]
        pitch: f64,
        /// Channel focal length (mm).
        #[arg(long)]
        efl: f64,
        /// Sensor diagonal (mm).
        #[arg(long)]
        diagonal: f64,
        /// Display width (pixels); enables the zoom-ratio figure.
        #[arg(long)]
        display_px: Option<u32>,
        /// Reference pixel pitch for the ifov-matched equivalent focal length (um).
        #[arg(long, default_value_t = 8.0)]
        ref_pixel: f64,
        /// Report the lateral cone clearance at this distance from the vertex (mm).
        #[arg(long)]
        clearance_at: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Check a prescription and print its vitals.
    Validate {
        #[command(flatten)]
        source: LensSource,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum CliError {
    Usage(String),
    Input(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<PrescriptionError> for CliError {
    fn from(e: PrescriptionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GaussianError> for CliError {
    fn from(e: GaussianError) -> Self {
        match e {
            GaussianError::InvalidSpec(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<TravelError> for CliError {
    fn from(e: TravelError) -> Self {
        match e {
            TravelError::InvalidInput(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ParaxialError> for CliError {
    fn from(e: ParaxialError) -> Self {
        match e {
            ParaxialError::Prescription(p) => CliError::Input(p.to_string()),
            ParaxialError::Afocal => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<FocusError> for CliError {
    fn from(e: FocusError) -> Self {
        match e {
            FocusError::InvalidInput(_) | FocusError::PerturbationOutOfRange(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<focuskit::array::ArrayError> for CliError {
    fn from(e: focuskit::array::ArrayError) -> Self {
        use focuskit::array::ArrayError::*;
        match e {
            CoverageGap { .. } | InvalidInput(_) => CliError::Input(e.to_string()),
            NoZoomHeadroom => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl LensSource {
    fn load(&self) -> Result<Prescription, CliError> {
        match (&self.lens, &self.input) {
            (Some(name), None) => Ok(builtin(name)?),
            (None, Some(path)) => {
                let doc = std::fs::read_to_string(path)?;
                let catalog = match std::env::var_os("FOCUSKIT_CATALOG") {
                    Some(path) => {
                        GlassCatalog::from_json(&std::fs::read_to_string(PathBuf::from(path))?)?
                    }
                    None => GlassCatalog::bundled().clone(),
                };
                Ok(parse_with_catalog(&doc, &catalog)?)
            }
            _ => Err(CliError::Usage(
                "exactly one of --lens or --input is required".into(),
            )),
        }
    }
}

fn parse_distance(text: &str) -> Result<ObjectDistance, CliError> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(ObjectDistance::Infinity);
    }
    let value: f64 = t
        .parse()
        .map_err(|_| CliError::Usage(format!("bad object distance {t:?}")))?;
    if value == 0.0 || !value.is_finite() {
        return Err(CliError::Usage(format!("bad object distance {t:?}")));
    }
    Ok(ObjectDistance::At(-value.abs()))
}

fn distance_cell(d: ObjectDistance) -> String {
    match d {
        ObjectDistance::Infinity => "inf".into(),
        ObjectDistance::At(l) => sig6(l),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut doc = serde_json::to_string_pretty(value).expect("report serializes");
    doc.push('\n');
    doc
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let output = cli.output.clone();
    match run(cli).and_then(|artifact| write_artifact(&output, &artifact)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn write_artifact(output: &Option<PathBuf>, artifact: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, artifact)?,
        None => print!("{artifact}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct StopWindowReport {
    feasible: bool,
    lo_mm: f64,
    hi_mm: f64,
}

#[derive(Serialize)]
struct FirstOrderReport {
    efl_mm: f64,
    alpha: f64,
    beta: f64,
    gamma_closed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    apertures: Option<ApertureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop_window: Option<StopWindowReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    travel: Option<TravelResult>,
}

#[derive(Serialize)]
struct FamilyRow {
    lens: u8,
    f_mm: f64,
    fno: f64,
    near_m: f64,
    travel_um: f64,
    r_o_um: f64,
    gamma_published: f64,
    gamma_computed: f64,
}

#[derive(Serialize)]
struct SweepReport {
    name: String,
    entries: Vec<SweepEntry>,
    travel_range_um: f64,
    gamma_measured: f64,
}

#[derive(Serialize)]
struct ArrayPlanReport {
    #[serde(flatten)]
    plan: ArrayPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    cone_clearance_mm: Option<f64>,
    spec: ArraySpec,
}

#[derive(Serialize)]
struct ValidateReport {
    name: String,
    surfaces: usize,
    #[serde(flatten)]
    report: focuskit::prescription::ValidationReport,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let output = cli.output.clone();
    match cli.command {
        Command::FirstOrder {
            f1,
            f2,
            d,
            ds,
            fno,
            fov,
            near,
            d1_max,
            d2_max,
            format,
        } => {
            let efl = focuskit::gaussian::two_group_efl(f1, f2, d)?;
            let alpha = f1 / efl;
            let beta = d / efl;
            let mut apertures = None;
            let mut stop_window = None;
            if let Some(fno) = fno {
                let spec = TwoGroupSpec::from_groups(f1, f2, d, ds, fno, fov)?;
                apertures = Some(aperture_model(&spec)?);
                if let (Some(d1_max), Some(d2_max)) = (d1_max, d2_max) {
                    stop_window = Some(match solve_stop_position(&spec, d1_max, d2_max)? {
                        Some(win) => StopWindowReport {
                            feasible: true,
                            lo_mm: win.lo_mm,
                            hi_mm: win.hi_mm,
                        },
                        None => StopWindowReport {
                            feasible: false,
                            lo_mm: 0.0,
                            hi_mm: 0.0,
                        },
                    });
                }
            }
            let travel = match near {
                Some(near) => {
                    let near = parse_distance(&near.to_string())?;
                    if !far_field_ok(efl, near) {
                        eprintln!(
                            "warning: near point is within 40 focal lengths; the first-order travel approximation degrades"
                        );
                    }
                    Some(travel::travel_two_group(f1, f2, d, near)?)
                }
                None => None,
            };
            let report = FirstOrderReport {
                efl_mm: efl,
                alpha,
                beta,
                gamma_closed: gamma_closed(alpha)?,
                apertures,
                stop_window,
                travel,
            };
            match format {
                Format::Json => Ok(to_json(&report)),
                Format::Csv => {
                    let mut rows = vec![
                        vec!["efl_mm".into(), sig6(report.efl_mm)],
                        vec!["alpha".into(), sig6(report.alpha)],
                        vec!["beta".into(), sig6(report.beta)],
                        vec!["gamma_closed".into(), sig6(report.gamma_closed)],
                    ];
                    if let Some(a) = &report.apertures {
                        rows.push(vec!["d1_mm".into(), sig6(a.d1_mm)]);
                        rows.push(vec!["d2_mm".into(), sig6(a.d2_mm)]);
                        rows.push(vec!["l2_prime_mm".into(), sig6(a.l2_prime_mm)]);
                    }
                    if let Some(w) = &report.stop_window {
                        rows.push(vec!["stop_window_feasible".into(), w.feasible.to_string()]);
                        rows.push(vec!["stop_window_lo_mm".into(), sig6(w.lo_mm)]);
                        rows.push(vec!["stop_window_hi_mm".into(), sig6(w.hi_mm)]);
                    }
                    if let Some(t) = &report.travel {
                        rows.push(vec!["r_o_um".into(), sig6(t.r_o_um)]);
                        rows.push(vec!["r_um".into(), sig6(t.r_um)]);
                        rows.push(vec!["gamma".into(), sig6(t.gamma)]);
                    }
                    Ok(csv(&["quantity", "value"], &rows))
                }
                _ => Err(CliError::Usage("first-order emits json or csv".into())),
            }
        }

        Command::GammaCurve { from, to, n, format } => {
            let curve = travel::gamma_curve(from, to, n)?;
            match format {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = curve
                        .iter()
                        .map(|(a, g)| vec![sig6(*a), sig6(*g)])
                        .collect();
                    Ok(csv(&["alpha", "gamma"], &rows))
                }
                Format::Svg => Ok(svg_line_plot(&curve, "alpha = f1/f", "gamma = R/R_o")),
                _ => Err(CliError::Usage("gamma-curve emits csv or svg".into())),
            }
        }

        Command::Table2 { format } => {
            let rows: Vec<FamilyRow> = UNIVERSAL_FAMILY
                .iter()
                .map(|lens| {
                    let r_o = whole_lens_travel(
                        lens.f_mm,
                        ObjectDistance::Infinity,
                        ObjectDistance::At(-1000.0 * lens.near_m),
                    )
                    .expect("family rows are valid");
                    FamilyRow {
                        lens: lens.index,
                        f_mm: lens.f_mm,
                        fno: lens.fno,
                        near_m: lens.near_m,
                        travel_um: lens.travel_um,
                        r_o_um: r_o,
                        gamma_published: lens.gamma,
                        gamma_computed: lens.travel_um / r_o,
                    }
                })
                .collect();
            match format {
                Format::Csv => {
                    let cells: Vec<Vec<String>> = rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.lens.to_string(),
                                sig6(r.f_mm),
                                sig6(r.fno),
                                sig6(r.near_m),
                                sig6(r.travel_um),
                                sig6(r.r_o_um),
                                sig6(r.gamma_published),
                                sig6(r.gamma_computed),
                            ]
                        })
                        .collect();
                    Ok(csv(
                        &[
                            "lens",
                            "f_mm",
                            "fno",
                            "near_m",
                            "travel_um",
                            "r_o_um",
                            "gamma_published",
                            "gamma_computed",
                        ],
                        &cells,
                    ))
                }
                Format::Json => Ok(to_json(&rows)),
                _ => Err(CliError::Usage("table2 emits csv or json".into())),
            }
        }

        Command::Trace {
            source,
            field,
            object,
            shift_um,
            rings,
            arms,
            format,
        } => {
            let p = source.load()?;
            let object = parse_distance(&object)?;
            let shift_mm = shift_um * 1e-3;
            match format {
                Format::Json => {
                    let spot = spot_rms_with(&p, object, field, shift_mm, rings, arms, 1.0)?;
                    Ok(to_json(&spot))
                }
                Format::Csv | Format::Svg => {
                    let fan = ray_fan(&p, field, object, rings, arms)?;
                    let mut rows = Vec::with_capacity(fan.len());
                    let mut points = Vec::new();
                    for (i, ray) in fan.iter().enumerate() {
                        match trace_ray(&p, ray, shift_mm) {
                            Ok(path) => {
                                points.push((path.image_xy[0], path.image_xy[1]));
                                rows.push(vec![
                                    i.to_string(),
                                    sig6(path.image_xy[0]),
                                    sig6(path.image_xy[1]),
                                    "image".into(),
                                ]);
                            }
                            Err(fault) => rows.push(vec![
                                i.to_string(),
                                String::new(),
                                String::new(),
                                fault.to_string(),
                            ]),
                        }
                    }
                    if format == Format::Csv {
                        Ok(csv(&["ray", "image_x_mm", "image_y_mm", "status"], &rows))
                    } else {
                        if points.is_empty() {
                            return Err(CliError::Numeric(
                                "every ray in the fan was vignetted or lost".into(),
                            ));
                        }
                        Ok(svg_scatter(&points, "image x (mm)", "image y (mm)"))
                    }
                }
                _ => Err(CliError::Usage("trace emits json, csv or svg".into())),
            }
        }

        Command::FocusSweep {
            source,
            near,
            distances,
            format,
        } => {
            let p = source.load()?;
            let distances: Vec<ObjectDistance> = match (distances, near) {
                (Some(list), _) => list
                    .split(',')
                    .map(parse_distance)
                    .collect::<Result<_, _>>()?,
                (None, Some(near)) => vec![
                    ObjectDistance::Infinity,
                    parse_distance(&near.to_string())?,
                ],
                (None, None) => {
                    return Err(CliError::Usage(
                        "focus-sweep needs --near or --distances".into(),
                    ))
                }
            };
            let sweep = travel_sweep(&p, &distances)?;
            if sweep.entries.is_empty() {
                return Err(CliError::Numeric("sweep produced no entries".into()));
            }
            match format {
                Format::Json => Ok(to_json(&SweepReport {
                    name: p.name.clone(),
                    entries: sweep.entries,
                    travel_range_um: sweep.travel_range_um,
                    gamma_measured: sweep.gamma_measured,
                })),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = sweep
                        .entries
                        .iter()
                        .map(|e| {
                            vec![
                                distance_cell(e.object_distance_mm),
                                sig6(e.best_shift_um),
                                sig6(e.rms_um),
                            ]
                        })
                        .collect();
                    Ok(csv(&["object_distance_mm", "best_shift_um", "rms_um"], &rows))
                }
                _ => Err(CliError::Usage("focus-sweep emits json or csv".into())),
            }
        }

        Command::Tolerance {
            source,
            decenter_um,
            tilt_deg,
            format,
        } => {
            let p = source.load()?;
            let report = perturb_focus_group(&p, decenter_um * 1e-3, tilt_deg)?;
            match format {
                Format::Json => Ok(to_json(&report)),
                _ => Err(CliError::Usage("tolerance emits json".into())),
            }
        }

        Command::ArrayPlan {
            cone,
            mfov,
            total_fov,
            pitch,
            efl,
            diagonal,
            display_px,
            ref_pixel,
            clearance_at,
            format,
        } => {
            let spec = ArraySpec {
                cone_deg: cone,
                mfov_deg: mfov,
                total_fov_deg: total_fov,
                pixel_pitch_um: pitch,
                efl_mm: efl,
                sensor_diagonal_mm: diagonal,
            };
            let plan = ArrayPlan::build(&spec, display_px, ref_pixel)?;
            let report = ArrayPlanReport {
                plan,
                cone_clearance_mm: clearance_at.map(|d| cone_lateral_extent_mm(cone, d)),
                spec,
            };
            match format {
                Format::Json => Ok(to_json(&report)),
                Format::Csv => {
                    let mut rows = vec![
                        vec!["overlap_deg".into(), sig6(report.plan.overlap_deg)],
                        vec![
                            "channels_per_axis".into(),
                            report.plan.channels_per_axis.to_string(),
                        ],
                        vec!["ifov_urad".into(), sig6(report.plan.ifov_urad)],
                        vec!["eq_fl_diagonal_mm".into(), sig6(report.plan.eq_fl_diagonal_mm)],
                        vec!["eq_fl_ifov_mm".into(), sig6(report.plan.eq_fl_ifov_mm)],
                        vec!["ref_pixel_um".into(), sig6(report.plan.ref_pixel_um)],
                    ];
                    if let Some(zoom) = report.plan.zoom_ratio {
                        rows.push(vec!["zoom_ratio".into(), sig6(zoom)]);
                    }
                    if let Some(clearance) = report.cone_clearance_mm {
                        rows.push(vec!["cone_clearance_mm".into(), sig6(clearance)]);
                    }
                    Ok(csv(&["quantity", "value"], &rows))
                }
                _ => Err(CliError::Usage("array-plan emits json or csv".into())),
            }
        }

        Command::Validate { source, format } => {
            let p = source.load()?;
            let report = p.validate();
            let artifact = match format {
                Format::Text => {
                    let mut out = String::new();
                    out.push_str(&format!("prescription: {}\n", p.name));
                    out.push_str(&format!("surfaces: {}\n", p.surfaces.len()));
                    out.push_str(&format!("total_track_mm: {:.3}\n", report.total_track_mm));
                    out.push_str(&format!(
                        "max_focusing_group_diameter_mm: {:.3}\n",
                        report.max_focusing_group_diameter_mm
                    ));
                    out.push_str(&format!("violations: {}\n", report.violations.len()));
                    for issue in &report.violations {
                        match issue.surface {
                            Some(s) => out.push_str(&format!("  - surface {s}: {}\n", issue.message)),
                            None => out.push_str(&format!("  - {}\n", issue.message)),
                        }
                    }
                    out.push_str(&format!("warnings: {}\n", report.warnings.len()));
                    for issue in &report.warnings {
                        match issue.surface {
                            Some(s) => out.push_str(&format!("  - surface {s}: {}\n", issue.message)),
                            None => out.push_str(&format!("  - {}\n", issue.message)),
                        }
                    }
                    out
                }
                Format::Json => to_json(&ValidateReport {
                    name: p.name.clone(),
                    surfaces: p.surfaces.len(),
                    report: report.clone(),
                }),
                _ => return Err(CliError::Usage("validate emits text or json".into())),
            };
            if !report.is_clean() {
                // still emit the report, then fail the invocation
                write_artifact(&output, &artifact)?;
                return Err(CliError::Input(format!(
                    "{} violation(s) found",
                    report.violations.len()
                )));
            }
            Ok(artifact)
        }
    }
}
