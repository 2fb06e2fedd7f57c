//! First-order optics and exact sequential ray tracing for camera lenses
//! whose focusing is delegated to a miniature voice-coil module.
//!
//! The crate is organised around the workflow of such a design:
//!
//! * [`gaussian`]: Gauss lens formula, conjugate-distance solutions and the
//!   clear-aperture / back-working-distance model of a two-group system.
//! * [`travel`]: focus-travel modeling, whole-lens travel, two-group reduced
//!   travel, the closed-form travel ratio, hyperfocal and focus-position
//!   accounting.
//! * [`prescription`]: surface-by-surface lens prescriptions, the JSON file
//!   format, the glass catalog, and the two built-in designs.
//! * [`raytrace`]: exact sequential tracing (even-asphere sag, Newton
//!   intersection, vector refraction) plus paraxial y-nu traces.
//! * [`focus`]: refocus solving on real prescriptions with spot metrics, best
//!   focus search, travel sweeps and focusing-group misalignment.
//! * [`array`]: array-camera planning, field tiling, overlap, ifov,
//!   equivalent focal length and the digital zoom envelope.
//!
//! All lengths are millimetres unless a name says otherwise; travel ranges and
//! spot radii are reported in micrometres, angles cross API boundaries in
//! degrees.

pub mod array;
pub mod focus;
pub mod gaussian;
pub mod prescription;
pub mod raytrace;
pub mod travel;

pub use gaussian::ObjectDistance;
