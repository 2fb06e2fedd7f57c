//! Lens prescriptions: the data model, JSON file format, validation and the
//! two built-in designs.
//!
//! A prescription is an ordered list of surfaces hit by light travelling
//! toward +z. Surface indices are 1-based everywhere, matching how
//! prescriptions are printed. A positive radius puts the center of curvature
//! to the right of the vertex; a flat surface stores an infinite radius.

mod catalog;
mod format;

pub use catalog::{
    GlassCatalog, GlassEntry, Material, C_LINE_NM, D_LINE_NM, F_LINE_NM, WAVELENGTH_BAND_NM,
};
pub use format::{emit, parse, parse_with_catalog};

use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrescriptionError {
    #[error("document is not valid JSON: {0}")]
    Json(String),
    #[error("missing or malformed field {0:?}")]
    MissingField(String),
    #[error("no surfaces")]
    NoSurfaces,
    #[error("surface {surface}: unknown material {name:?}")]
    UnknownMaterial { surface: usize, name: String },
    #[error("surface {surface}: malformed number in {field:?}: {value:?}")]
    MalformedNumber {
        surface: usize,
        field: &'static str,
        value: String,
    },
    #[error("surface {surface}: negative thickness makes the surface list non-monotone")]
    NonMonotone { surface: usize },
    #[error("stop index {0} missing or not a stop surface strictly inside the lens")]
    BadStop(usize),
    #[error("focusing group {0}..={1} must lie strictly between the first and image surfaces")]
    BadFocusingGroup(usize, usize),
    #[error("the image surface must be the last surface")]
    ImageNotLast,
    #[error("glass {name:?} has a non-physical index or Abbe number")]
    BadGlass { name: String },
    #[error("wavelength {nm} nm is outside the supported 400-750 nm band")]
    WavelengthOutOfBand { nm: f64 },
    #[error("unknown builtin lens {0:?}")]
    UnknownBuiltin(String),
}

/// What a surface does to the beam.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Sphere,
    Asphere,
    Plane,
    Stop,
    Image,
}

impl SurfaceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Asphere => "asphere",
            SurfaceKind::Plane => "plane",
            SurfaceKind::Stop => "stop",
            SurfaceKind::Image => "image",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sphere" => SurfaceKind::Sphere,
            "asphere" => SurfaceKind::Asphere,
            "plane" => SurfaceKind::Plane,
            "stop" => SurfaceKind::Stop,
            "image" => SurfaceKind::Image,
            _ => return None,
        })
    }
}

/// One surface: curvature, distance to the next surface, the medium behind
/// it, clear semi-diameter and the even-asphere profile terms.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceDef {
    pub kind: SurfaceKind,
    /// Radius of curvature (mm); `f64::INFINITY` is the flat sentinel.
    pub radius_mm: f64,
    /// Axial distance to the next surface (mm).
    pub thickness_mm: f64,
    /// Medium between this surface and the next.
    pub material: Material,
    /// Clear semi-diameter (mm); rays beyond it are vignetted.
    pub semi_diameter_mm: f64,
    /// Conic constant k.
    pub conic: f64,
    pub a4: f64,
    pub a6: f64,
    pub a8: f64,
    pub a10: f64,
    pub a12: f64,
}

impl SurfaceDef {
    /// Curvature `c = 1/R`, zero for a flat surface.
    pub fn curvature(&self) -> f64 {
        if self.radius_mm.is_infinite() {
            0.0
        } else {
            1.0 / self.radius_mm
        }
    }

    pub fn is_flat(&self) -> bool {
        self.radius_mm.is_infinite()
    }

    pub fn has_asphere_terms(&self) -> bool {
        self.a4 != 0.0 || self.a6 != 0.0 || self.a8 != 0.0 || self.a10 != 0.0 || self.a12 != 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Nominal {
    pub efl_mm: f64,
    pub fno: f64,
    pub fov_deg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sensor {
    pub pixel_pitch_um: f64,
    pub diagonal_mm: f64,
    pub h_px: u32,
    pub v_px: u32,
}

impl Sensor {
    pub fn pixel_count(&self) -> u64 {
        self.h_px as u64 * self.v_px as u64
    }
}

/// Array-camera metadata carried by multiscale designs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArrayMeta {
    /// Physical cone angle allotted to each channel (degrees).
    pub cone_deg: f64,
    /// Full field of view of one channel (degrees).
    pub mfov_deg: f64,
}

/// A complete lens prescription. Immutable after parsing.
#[derive(Clone, Debug, PartialEq)]
pub struct Prescription {
    pub name: String,
    pub nominal: Nominal,
    pub sensor: Sensor,
    /// 1-based index of the stop surface.
    pub stop_index: usize,
    /// 1-based inclusive range of surfaces translated to focus.
    pub focusing_group: (usize, usize),
    pub array: Option<ArrayMeta>,
    pub surfaces: Vec<SurfaceDef>,
}

impl Prescription {
    /// Surface by 1-based index, as printed in prescriptions.
    pub fn surface(&self, index: usize) -> &SurfaceDef {
        &self.surfaces[index - 1]
    }

    /// 1-based index of the image surface (always the last).
    pub fn image_index(&self) -> usize {
        self.surfaces.len()
    }

    pub fn stop_surface(&self) -> &SurfaceDef {
        self.surface(self.stop_index)
    }

    /// Sum of thicknesses from the first surface to the image plane (mm).
    pub fn total_track_mm(&self) -> f64 {
        self.surfaces[..self.surfaces.len().saturating_sub(1)]
            .iter()
            .map(|s| s.thickness_mm)
            .sum()
    }

    pub fn in_focusing_group(&self, index: usize) -> bool {
        let (a, b) = self.focusing_group;
        (a..=b).contains(&index)
    }

    /// Structural and dimensional checks. Content problems come back as a
    /// report, never as an error.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut warnings = Vec::new();

        if self.surfaces.is_empty() {
            violations.push(Issue::global("no surfaces"));
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            let index = i + 1;
            if s.thickness_mm < 0.0 {
                violations.push(Issue::at(index, format!(
                    "negative thickness {} mm",
                    s.thickness_mm
                )));
            }
            if s.kind != SurfaceKind::Image && s.semi_diameter_mm <= 0.0 {
                violations.push(Issue::at(index, "semi-diameter must be positive".into()));
            }
            if s.kind == SurfaceKind::Image && index != self.image_index() {
                violations.push(Issue::at(index, "image surface before the end".into()));
            }
        }
        if let Some(last) = self.surfaces.last() {
            if last.kind != SurfaceKind::Image {
                violations.push(Issue::global("last surface is not the image plane"));
            }
        }
        let interior = 2..self.image_index().max(2);
        if !interior.contains(&self.stop_index)
            || self.surface(self.stop_index).kind != SurfaceKind::Stop
        {
            violations.push(Issue::global(format!(
                "stop index {} is not an interior stop surface",
                self.stop_index
            )));
        }
        let (g0, g1) = self.focusing_group;
        if g0 > g1 || g0 <= 1 || g1 >= self.image_index() {
            violations.push(Issue::global(format!(
                "focusing group {g0}..={g1} is not strictly interior"
            )));
        }

        // the focusing module package caps element diameters at about 6 mm
        let mut max_focusing_diameter: f64 = 0.0;
        if g0 <= g1 && g1 <= self.surfaces.len() {
            for index in g0..=g1 {
                let dia = 2.0 * self.surface(index).semi_diameter_mm;
                max_focusing_diameter = max_focusing_diameter.max(dia);
                if dia > 6.0 {
                    warnings.push(Issue::at(index, format!(
                        "focusing-group diameter {dia:.3} mm exceeds the 6 mm package guideline"
                    )));
                }
            }
        }

        ValidationReport {
            violations,
            warnings,
            max_focusing_group_diameter_mm: max_focusing_diameter,
            total_track_mm: self.total_track_mm(),
        }
    }
}

/// One validation finding, with the 1-based surface it concerns when there
/// is one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub surface: Option<usize>,
    pub message: String,
}

impl Issue {
    fn at(surface: usize, message: String) -> Self {
        Issue { surface: Some(surface), message }
    }

    fn global(message: impl Into<String>) -> Self {
        Issue { surface: None, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub warnings: Vec<Issue>,
    pub max_focusing_group_diameter_mm: f64,
    pub total_track_mm: f64,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A built-in prescription by name: `mfm30` (the 30 mm discrete design) or
/// `mms45` (the 45 mm monocentric multiscale channel).
pub fn builtin(name: &str) -> Result<Prescription, PrescriptionError> {
    static MFM30: OnceLock<Prescription> = OnceLock::new();
    static MMS45: OnceLock<Prescription> = OnceLock::new();
    let cached = |cell: &'static OnceLock<Prescription>, doc: &str| {
        cell.get_or_init(|| {
            parse_with_catalog(doc, GlassCatalog::bundled()).expect("bundled prescription must parse")
        })
        .clone()
    };
    match name.to_ascii_lowercase().as_str() {
        "mfm30" => Ok(cached(&MFM30, include_str!("../../data/mfm30.json"))),
        "mms45" => Ok(cached(&MMS45, include_str!("../../data/mms45.json"))),
        other => Err(PrescriptionError::UnknownBuiltin(other.to_string())),
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 2] = ["mfm30", "mms45"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_mfm30_structure() {
        let p = builtin("mfm30").unwrap();
        assert_eq!(p.surfaces.len(), 19);
        assert_eq!(p.stop_index, 6);
        assert_eq!(p.focusing_group, (11, 16));
        assert_eq!(p.surface(6).kind, SurfaceKind::Stop);
        assert!((p.nominal.efl_mm - 30.0).abs() < 1e-12);
        assert!((p.surface(11).conic - 11.893).abs() < 1e-12);
        assert!((p.surface(11).a4 - 2.028e-4).abs() < 1e-18);
        // all six focusing-group surfaces carry the asphere profile
        for i in 11..=16 {
            assert_eq!(p.surface(i).kind, SurfaceKind::Asphere, "surface {i}");
        }
        assert_eq!(p.surface(10).kind, SurfaceKind::Sphere);
    }

    #[test]
    fn builtin_mms45_structure() {
        let p = builtin("mms45").unwrap();
        assert_eq!(p.surfaces.len(), 23);
        assert_eq!(p.stop_index, 6);
        assert_eq!(p.focusing_group, (13, 20));
        assert!((p.surface(1).radius_mm - 43.074).abs() < 1e-12);
        let meta = p.array.expect("multiscale metadata");
        assert!((meta.cone_deg - 7.0).abs() < 1e-12);
        assert!((meta.mfov_deg - 8.28).abs() < 1e-12);
    }

    #[test]
    fn builtin_unknown_name() {
        assert!(matches!(
            builtin("mfm31"),
            Err(PrescriptionError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn total_track_of_builtins() {
        let mfm = builtin("mfm30").unwrap();
        assert!((mfm.total_track_mm() - 51.908).abs() < 5e-3, "{}", mfm.total_track_mm());
        let mms = builtin("mms45").unwrap();
        assert!((mms.total_track_mm() - 124.100).abs() < 5e-3, "{}", mms.total_track_mm());
    }

    #[test]
    fn validate_mfm30_is_clean() {
        let report = builtin("mfm30").unwrap().validate();
        assert!(report.is_clean(), "{:?}", report.violations);
        assert!(report.warnings.is_empty());
        assert!((report.max_focusing_group_diameter_mm - 5.302).abs() < 1e-9);
    }

    #[test]
    fn validate_mms45_warns_about_package_limit() {
        let report = builtin("mms45").unwrap().validate();
        assert!(report.is_clean(), "{:?}", report.violations);
        // surfaces 19 (6.066) and 20 (6.520) sit beyond the 6 mm guideline
        let flagged: Vec<_> = report.warnings.iter().filter_map(|w| w.surface).collect();
        assert_eq!(flagged, vec![19, 20]);
        assert!((report.max_focusing_group_diameter_mm - 6.520).abs() < 1e-9);
    }

    #[test]
    fn validate_flags_negative_thickness() {
        let mut p = builtin("mfm30").unwrap();
        p.surfaces[4].thickness_mm = -1.0;
        let report = p.validate();
        assert!(!report.is_clean());
        assert_eq!(report.violations[0].surface, Some(5));
    }

    #[test]
    fn monocentric_objective_shares_one_center() {
        let p = builtin("mms45").unwrap();
        let mut z = 0.0;
        let mut centers = Vec::new();
        for s in &p.surfaces[..5] {
            if !s.is_flat() {
                centers.push(z + s.radius_mm);
            }
            z += s.thickness_mm;
        }
        for c in &centers {
            assert!((c - centers[0]).abs() < 1e-9, "centers {centers:?}");
        }
    }
}
