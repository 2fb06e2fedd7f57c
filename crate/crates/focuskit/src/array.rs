//! Array-camera planning: angular tiling, per-pixel resolution and the
//! digital zoom envelope.

use serde::Serialize;
use thiserror::Error;

/// Full-frame reference diagonal (36 x 24 mm) used for crop factors.
pub const FULL_FRAME_DIAGONAL_MM: f64 = 43.27;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrayError {
    #[error("coverage gap: channel field {mfov_deg} deg is narrower than the cone angle {cone_deg} deg")]
    CoverageGap { mfov_deg: f64, cone_deg: f64 },
    #[error("no zoom headroom: the narrowest useful view already covers the full field")]
    NoZoomHeadroom,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Geometry of one channel inside the array.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArraySpec {
    /// Physical cone angle allotted per channel (degrees).
    pub cone_deg: f64,
    /// Full field of view of one channel (degrees).
    pub mfov_deg: f64,
    /// Total coverage target (degrees).
    pub total_fov_deg: f64,
    pub pixel_pitch_um: f64,
    pub efl_mm: f64,
    pub sensor_diagonal_mm: f64,
}

/// Derived array numbers; both equivalent-focal-length definitions are
/// reported because they disagree for small sensors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArrayPlan {
    pub overlap_deg: f64,
    pub channels_per_axis: u32,
    pub ifov_urad: f64,
    /// Crop-factor definition: efl scaled by the sensor-diagonal ratio.
    pub eq_fl_diagonal_mm: f64,
    /// Per-pixel definition: efl scaled to a reference pixel pitch.
    pub eq_fl_ifov_mm: f64,
    /// Reference pixel pitch used by the ifov definition (um).
    pub ref_pixel_um: f64,
    pub zoom_ratio: Option<f64>,
}

/// Overlap between neighbouring channels and the channel count needed per
/// great-circle axis (1-D angular pitch model).
pub fn plan_geometry(spec: &ArraySpec) -> Result<(f64, u32), ArrayError> {
    if spec.cone_deg <= 0.0 || spec.total_fov_deg < spec.mfov_deg {
        return Err(ArrayError::InvalidInput(
            "need cone > 0 and total coverage >= channel field".into(),
        ));
    }
    if spec.mfov_deg < spec.cone_deg {
        return Err(ArrayError::CoverageGap {
            mfov_deg: spec.mfov_deg,
            cone_deg: spec.cone_deg,
        });
    }
    let overlap = spec.mfov_deg - spec.cone_deg;
    let channels = (spec.total_fov_deg / spec.cone_deg).ceil() as u32;
    Ok((overlap, channels))
}

/// Instantaneous field of view of one pixel in microradians (small angle).
pub fn ifov_urad(pixel_pitch_um: f64, efl_mm: f64) -> f64 {
    pixel_pitch_um / efl_mm * 1e3
}

/// Which equivalent-focal-length definition to apply.
#[derive(Clone, Copy, Debug)]
pub enum EqFlMode {
    /// Match the field of view against the full-frame diagonal.
    Diagonal { sensor_diagonal_mm: f64 },
    /// Match the per-pixel angle against a reference pixel pitch.
    Ifov { pixel_pitch_um: f64, ref_pixel_um: f64 },
}

pub fn equivalent_focal_length(efl_mm: f64, mode: EqFlMode) -> Result<f64, ArrayError> {
    match mode {
        EqFlMode::Diagonal { sensor_diagonal_mm } => {
            if sensor_diagonal_mm <= 0.0 {
                return Err(ArrayError::InvalidInput("sensor diagonal must be positive".into()));
            }
            Ok(efl_mm * FULL_FRAME_DIAGONAL_MM / sensor_diagonal_mm)
        }
        EqFlMode::Ifov { pixel_pitch_um, ref_pixel_um } => {
            if pixel_pitch_um <= 0.0 || ref_pixel_um <= 0.0 {
                return Err(ArrayError::InvalidInput("pixel pitches must be positive".into()));
            }
            Ok(efl_mm * ref_pixel_um / pixel_pitch_um)
        }
    }
}

/// Ratio between the synthesized wide view and the narrowest view that still
/// maps one sensor pixel per display pixel.
pub fn zoom_envelope(spec: &ArraySpec, display_px: u32) -> Result<f64, ArrayError> {
    if display_px == 0 {
        return Err(ArrayError::InvalidInput("display width must be positive".into()));
    }
    let ifov_rad = ifov_urad(spec.pixel_pitch_um, spec.efl_mm) * 1e-6;
    let narrow_rad = display_px as f64 * ifov_rad;
    let total_rad = spec.total_fov_deg.to_radians();
    if narrow_rad >= total_rad {
        return Err(ArrayError::NoZoomHeadroom);
    }
    Ok((total_rad / 2.0).tan() / (narrow_rad / 2.0).tan())
}

/// Lateral extent of the channel cone at `distance_mm` from its vertex.
pub fn cone_lateral_extent_mm(cone_deg: f64, distance_mm: f64) -> f64 {
    2.0 * distance_mm * (cone_deg.to_radians() / 2.0).tan()
}

impl ArrayPlan {
    /// Assemble the full plan. `display_px` enables the zoom-ratio figure;
    /// `ref_pixel_um` feeds the ifov-matched equivalent focal length.
    pub fn build(
        spec: &ArraySpec,
        display_px: Option<u32>,
        ref_pixel_um: f64,
    ) -> Result<ArrayPlan, ArrayError> {
        let (overlap, channels) = plan_geometry(spec)?;
        let ifov = ifov_urad(spec.pixel_pitch_um, spec.efl_mm);
        let eq_diag = equivalent_focal_length(
            spec.efl_mm,
            EqFlMode::Diagonal { sensor_diagonal_mm: spec.sensor_diagonal_mm },
        )?;
        let eq_ifov = equivalent_focal_length(
            spec.efl_mm,
            EqFlMode::Ifov { pixel_pitch_um: spec.pixel_pitch_um, ref_pixel_um },
        )?;
        let zoom_ratio = match display_px {
            Some(px) => Some(zoom_envelope(spec, px)?),
            None => None,
        };
        Ok(ArrayPlan {
            overlap_deg: overlap,
            channels_per_axis: channels,
            ifov_urad: ifov,
            eq_fl_diagonal_mm: eq_diag,
            eq_fl_ifov_mm: eq_ifov,
            ref_pixel_um,
            zoom_ratio,
        })
    }
}
