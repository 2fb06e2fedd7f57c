//! Refocus solving and travel measurement on real prescriptions.
//!
//! Focus quality is judged by the geometric RMS spot radius of an
//! entrance-pupil fan; the best focus for an object distance is the group
//! shift minimizing the on-axis RMS, with the infinity solution defining the
//! zero of the shift axis. Travel ranges measured here are what the
//! first-order model in [`crate::travel`] predicts.

use serde::Serialize;
use thiserror::Error;

use crate::gaussian::ObjectDistance;
use crate::prescription::Prescription;
use crate::raytrace::{
    image_plane_z, paraxial_image_z, ray_fan_scaled, trace_ray_perturbed, GroupPerturbation,
    ParaxialError, Ray, TraceFault, D_LINE_NM,
};
use crate::travel::{self, TravelError};

/// Group-shift search window (mm); comfortably beyond any voice-coil stroke.
pub const SHIFT_SEARCH_LIMIT_MM: f64 = 0.5;
/// Best-focus location tolerance (mm) = 0.1 um.
pub const SHIFT_TOL_MM: f64 = 1e-4;

const DEFAULT_RINGS: usize = 8;
const DEFAULT_ARMS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FocusError {
    #[error("every ray in the fan was vignetted or lost")]
    NoThroughput,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("perturbation out of range: {0}")]
    PerturbationOutOfRange(String),
    #[error("sweep failed at object distance {distance}: {message}")]
    SweepFailed { distance: String, message: String },
    #[error(transparent)]
    Paraxial(#[from] ParaxialError),
    #[error(transparent)]
    Travel(#[from] TravelError),
}

/// Geometric spot statistics of one traced fan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpotReport {
    pub field_deg: f64,
    pub object_distance_mm: ObjectDistance,
    pub focus_shift_mm: f64,
    /// RMS transverse radius about the centroid (um).
    pub rms_radius_um: f64,
    /// Centroid of the unvignetted hits (mm).
    pub centroid_mm: [f64; 2],
    /// Rays that reached the image plane.
    pub n_traced: u32,
    /// Rays lost to apertures, misses or total internal reflection.
    pub n_vignetted: u32,
}

/// Best focus shift per object distance plus the resulting travel range.
#[derive(Clone, Debug, Serialize)]
pub struct TravelSweep {
    pub entries: Vec<SweepEntry>,
    /// max - min of the best shifts (um).
    pub travel_range_um: f64,
    /// Measured travel over the whole-lens travel of the nominal focal
    /// length between infinity and the nearest point.
    pub gamma_measured: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepEntry {
    pub object_distance_mm: ObjectDistance,
    /// Best shift relative to the infinity reference (um).
    pub best_shift_um: f64,
    pub rms_um: f64,
}

/// First-order travel ratios next to the measured one.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FirstOrderComparison {
    /// Closed form with alpha = f1 / nominal EFL.
    pub gamma_closed: f64,
    /// Explicit back-group route with the nominal EFL.
    pub gamma_first_order: f64,
    /// From the traced travel sweep.
    pub gamma_measured: f64,
    pub measured_minus_closed: f64,
    pub measured_minus_first_order: f64,
}

/// Spot change under a rigid focusing-group misalignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub decenter_mm: f64,
    pub tilt_deg: f64,
    pub baseline: SpotReport,
    pub perturbed: SpotReport,
    pub rms_growth_um: f64,
    pub centroid_shift_mm: f64,
}

fn spot_from_fan(
    p: &Prescription,
    fan: &[Ray],
    object: ObjectDistance,
    field_deg: f64,
    shift_mm: f64,
    perturbation: Option<&GroupPerturbation>,
) -> Result<SpotReport, FocusError> {
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(fan.len());
    let mut vignetted = 0u32;
    for ray in fan {
        match trace_ray_perturbed(p, ray, shift_mm, perturbation) {
            Ok(path) => points.push(path.image_xy),
            Err(TraceFault::UnsupportedWavelength { nm }) => {
                return Err(FocusError::InvalidInput(format!("wavelength {nm} nm")))
            }
            Err(_) => vignetted += 1,
        }
    }
    if points.is_empty() {
        return Err(FocusError::NoThroughput);
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let mean_sq = points
        .iter()
        .map(|p| {
            let dx = p[0] - cx;
            let dy = p[1] - cy;
            dx * dx + dy * dy
        })
        .sum::<f64>()
        / n;
    Ok(SpotReport {
        field_deg,
        object_distance_mm: object,
        focus_shift_mm: shift_mm,
        rms_radius_um: mean_sq.sqrt() * 1e3,
        centroid_mm: [cx, cy],
        n_traced: points.len() as u32,
        n_vignetted: vignetted,
    })
}

/// RMS spot of the default pupil fan at the d line.
pub fn spot_rms(
    p: &Prescription,
    object: ObjectDistance,
    field_deg: f64,
    focus_shift_mm: f64,
) -> Result<SpotReport, FocusError> {
    spot_rms_with(
        p,
        object,
        field_deg,
        focus_shift_mm,
        DEFAULT_RINGS,
        DEFAULT_ARMS,
        1.0,
    )
}

/// [`spot_rms`] with explicit fan sampling and pupil scaling.
pub fn spot_rms_with(
    p: &Prescription,
    object: ObjectDistance,
    field_deg: f64,
    focus_shift_mm: f64,
    n_rings: usize,
    n_arms: usize,
    pupil_fraction: f64,
) -> Result<SpotReport, FocusError> {
    let fan = ray_fan_scaled(p, field_deg, object, n_rings, n_arms, pupil_fraction)?;
    spot_from_fan(p, &fan, object, field_deg, focus_shift_mm, None)
}

/// Absolute best-focus shift (mm) for one object distance: minimum on-axis
/// RMS over the search window, golden-section refined, seeded by the shift
/// that paraxially lands the image on the image plane.
fn absolute_best_shift(p: &Prescription, object: ObjectDistance) -> Result<f64, FocusError> {
    let fan = ray_fan_scaled(p, 0.0, object, DEFAULT_RINGS, DEFAULT_ARMS, 1.0)?;
    let rms_at = |shift: f64| -> f64 {
        match spot_from_fan(p, &fan, object, 0.0, shift, None) {
            Ok(report) => report.rms_radius_um,
            Err(_) => f64::INFINITY,
        }
    };

    let seed = paraxial_match_shift(p, object).unwrap_or(0.0);
    let limit = SHIFT_SEARCH_LIMIT_MM;
    let seed = seed.clamp(-limit, limit);

    // scan a bracket around the seed; widen once if the valley is not inside
    let mut half_width = 0.08;
    for _ in 0..2 {
        let lo = (seed - half_width).max(-limit);
        let hi = (seed + half_width).min(limit);
        if let Some((a, b)) = interior_valley(&rms_at, lo, hi) {
            return Ok(golden_section(&rms_at, a, b));
        }
        half_width *= 4.0;
    }

    // dense fallback: global minimum on a 1 um grid
    let steps = (2.0 * limit / 1e-3).round() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let s = -limit + i as f64 * 1e-3;
        let v = rms_at(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    if best.0.is_infinite() {
        return Err(FocusError::NoThroughput);
    }
    Ok(best.1)
}

/// Shift that places the paraxial image on the image plane, found by
/// bisection on the monotone image-position curve.
fn paraxial_match_shift(p: &Prescription, object: ObjectDistance) -> Option<f64> {
    let plane = image_plane_z(p);
    let miss = |s: f64| -> Option<f64> {
        paraxial_image_z(p, object, D_LINE_NM, s)
            .ok()
            .map(|z| z - plane)
    };
    let limit = SHIFT_SEARCH_LIMIT_MM;
    let (mut lo, mut hi) = (-limit, limit);
    let (mut f_lo, f_hi) = (miss(lo)?, miss(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f_mid = miss(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Sample the bracket and return a sub-bracket with an interior minimum, or
/// `None` when the scan does not look unimodal.
fn interior_valley<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Option<(f64, f64)> {
    const N: usize = 9;
    let xs: Vec<f64> = (0..N)
        .map(|i| lo + (hi - lo) * i as f64 / (N - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let m = ys
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)?;
    if m == 0 || m == N - 1 || ys[m].is_infinite() {
        return None;
    }
    // single descent then ascent across the scan
    for i in 0..m {
        if ys[i + 1] > ys[i] {
            return None;
        }
    }
    for i in m..N - 1 {
        if ys[i + 1] < ys[i] {
            return None;
        }
    }
    Some((xs[m - 1], xs[m + 1]))
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > SHIFT_TOL_MM {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Best focus shift for `object`, in mm, relative to the infinity solution
/// (so `best_focus_shift(p, Infinity)` is zero by construction).
pub fn best_focus_shift(p: &Prescription, object: ObjectDistance) -> Result<f64, FocusError> {
    if object.is_infinity() {
        return Ok(0.0);
    }
    let reference = absolute_best_shift(p, ObjectDistance::Infinity)?;
    Ok(absolute_best_shift(p, object)? - reference)
}

fn distance_label(d: ObjectDistance) -> String {
    match d {
        ObjectDistance::Infinity => "inf".into(),
        ObjectDistance::At(l) => format!("{l} mm"),
    }
}

/// Best-focus sweep over a list of object distances.
pub fn travel_sweep(p: &Prescription, distances: &[ObjectDistance]) -> Result<TravelSweep, FocusError> {
    if distances.len() < 2 {
        return Err(FocusError::InvalidInput("need at least 2 object distances".into()));
    }
    let reference = absolute_best_shift(p, ObjectDistance::Infinity).map_err(|e| {
        FocusError::SweepFailed { distance: "inf".into(), message: e.to_string() }
    })?;

    let mut entries = Vec::with_capacity(distances.len());
    for &d in distances {
        let absolute = if d.is_infinity() {
            reference
        } else {
            absolute_best_shift(p, d).map_err(|e| FocusError::SweepFailed {
                distance: distance_label(d),
                message: e.to_string(),
            })?
        };
        let rms = spot_rms(p, d, 0.0, absolute)
            .map(|r| r.rms_radius_um)
            .map_err(|e| FocusError::SweepFailed {
                distance: distance_label(d),
                message: e.to_string(),
            })?;
        entries.push(SweepEntry {
            object_distance_mm: d,
            best_shift_um: (absolute - reference) * 1e3,
            rms_um: rms,
        });
    }

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for e in &entries {
        lo = lo.min(e.best_shift_um);
        hi = hi.max(e.best_shift_um);
    }
    let travel_range_um = hi - lo;

    // nearest point = largest diopter among the finite distances
    let nearest = distances
        .iter()
        .filter_map(|d| d.finite())
        .max_by(|a, b| (1.0 / a.abs()).partial_cmp(&(1.0 / b.abs())).unwrap())
        .ok_or_else(|| FocusError::InvalidInput("sweep needs a finite near point".into()))?;
    let r_o = travel::whole_lens_travel(
        p.nominal.efl_mm,
        ObjectDistance::Infinity,
        ObjectDistance::At(nearest),
    )?;
    let gamma_measured = if r_o > 0.0 { travel_range_um / r_o } else { f64::NAN };

    Ok(TravelSweep { entries, travel_range_um, gamma_measured })
}

/// Closed-form, explicit first-order and measured travel ratios side by
/// side, all referenced to the nominal focal length of the prescription.
pub fn compare_first_order(
    p: &Prescription,
    f1: f64,
    f2: f64,
    d: f64,
    near: ObjectDistance,
) -> Result<FirstOrderComparison, FocusError> {
    let near_mm = near.finite().ok_or_else(|| {
        FocusError::InvalidInput("near point at infinity leaves the ratios undefined".into())
    })?;
    let f_nominal = p.nominal.efl_mm;
    let alpha = f1 / f_nominal;
    let gamma_closed = travel::gamma_closed(alpha)?;
    let (factor, _l2) = travel::back_group_factor(f1, f2, d)?;
    let gamma_first_order = factor * alpha * alpha;
    let sweep = travel_sweep(
        p,
        &[ObjectDistance::Infinity, ObjectDistance::At(near_mm)],
    )?;
    let gamma_measured = sweep.gamma_measured;
    Ok(FirstOrderComparison {
        gamma_closed,
        gamma_first_order,
        gamma_measured,
        measured_minus_closed: gamma_measured - gamma_closed,
        measured_minus_first_order: gamma_measured - gamma_first_order,
    })
}

/// Retrace the on-axis infinity spot with the focusing group rigidly
/// decentered and tilted about its first vertex.
pub fn perturb_focus_group(
    p: &Prescription,
    decenter_mm: f64,
    tilt_deg: f64,
) -> Result<PerturbationReport, FocusError> {
    if decenter_mm.abs() > 0.2 {
        return Err(FocusError::PerturbationOutOfRange(format!(
            "|decenter| = {} mm exceeds 0.2 mm",
            decenter_mm.abs()
        )));
    }
    if tilt_deg.abs() > 1.0 {
        return Err(FocusError::PerturbationOutOfRange(format!(
            "|tilt| = {} deg exceeds 1 deg",
            tilt_deg.abs()
        )));
    }
    let object = ObjectDistance::Infinity;
    let shift = absolute_best_shift(p, object)?;
    let fan = ray_fan_scaled(p, 0.0, object, DEFAULT_RINGS, DEFAULT_ARMS, 1.0)?;
    let pose = GroupPerturbation { decenter_y_mm: decenter_mm, tilt_x_deg: tilt_deg };
    let baseline = spot_from_fan(p, &fan, object, 0.0, shift, None)?;
    let perturbed = spot_from_fan(p, &fan, object, 0.0, shift, Some(&pose))?;
    let dx = perturbed.centroid_mm[0] - baseline.centroid_mm[0];
    let dy = perturbed.centroid_mm[1] - baseline.centroid_mm[1];
    Ok(PerturbationReport {
        decenter_mm,
        tilt_deg,
        baseline,
        perturbed,
        rms_growth_um: perturbed.rms_radius_um - baseline.rms_radius_um,
        centroid_shift_mm: (dx * dx + dy * dy).sqrt(),
    })
}
