//! Focus-travel modeling.
//!
//! Refocusing a whole lens from conjugate `L_a` to `L_b` needs a travel of
//! `R_o = f^2 |1/L_a - 1/L_b|`. Assigning the motion to a back group behind a
//! fixed front group of focal length `f1 = alpha * f` rescales that to
//! `R = gamma * R_o` with the closed form `gamma = |alpha^2 / (1 - alpha^2)|`,
//! so a front group with `f1 < f/sqrt(2)` shortens the required stroke.

use serde::Serialize;
use thiserror::Error;

use crate::gaussian::{self, GaussianError, ObjectDistance};

/// Typical stroke ceiling of the miniature voice-coil modules (micrometres).
pub const DEFAULT_TRAVEL_BUDGET_UM: f64 = 300.0;

/// Default circle of confusion: two 2 um pixels (mm).
pub const DEFAULT_COC_MM: f64 = 0.004;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TravelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("travel ratio has a pole at alpha = 1")]
    PoleAtUnitAlpha,
    #[error("back-group conjugate is complex: L2^2 - 4 L2 f2 = {discriminant} < 0")]
    BackConjugateComplex { discriminant: f64 },
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// Two-group travel solution for one near point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TravelResult {
    /// Whole-lens travel between the same conjugates (um).
    pub r_o_um: f64,
    /// Shift of the intermediate image formed by the front group (um).
    pub delta_l1_um: f64,
    /// Back-group conjugate distance L2 (mm).
    pub l2_conj_mm: f64,
    /// Back-group travel (um).
    pub r_um: f64,
    /// Travel ratio R / R_o.
    pub gamma: f64,
}

/// Focus-position and pixel-count accounting for one lens.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FocusBudget {
    pub hyperfocal_mm: f64,
    pub coc_mm: f64,
    /// Distinct focus positions needed from infinity to the near point.
    pub positions: u32,
    /// Sensor pixels summed over every focus position.
    pub total_pixels: u64,
    /// Actuator stroke budget (um).
    pub travel_budget_um: f64,
}

/// True when the object is far enough that `R_o ~ f^2/|l|` holds well.
/// The first-order derivation assumes `|l| >> 4|f|`.
pub fn far_field_ok(f_mm: f64, l: ObjectDistance) -> bool {
    match l {
        ObjectDistance::Infinity => true,
        ObjectDistance::At(l) => l.abs() >= 40.0 * f_mm.abs(),
    }
}

/// Whole-lens travel `R_o = f^2 |1/l_a - 1/l_b|` in micrometres.
pub fn whole_lens_travel(
    f_mm: f64,
    l_a: ObjectDistance,
    l_b: ObjectDistance,
) -> Result<f64, TravelError> {
    if f_mm <= 0.0 || !f_mm.is_finite() {
        return Err(TravelError::InvalidInput("focal length must be positive".into()));
    }
    for l in [l_a, l_b] {
        if let ObjectDistance::At(v) = l {
            if v == 0.0 || !v.is_finite() {
                return Err(TravelError::InvalidInput(
                    "object distance must be nonzero and finite".into(),
                ));
            }
        }
    }
    Ok(f_mm * f_mm * (l_a.reciprocal() - l_b.reciprocal()).abs() * 1e3)
}

/// Travel ratio factor of the back group, `R / ((f1/f)^2 R_o)`, from the
/// back-group conjugate `L2 = -(f1-d)^2/(f1+f2-d)`:
///
/// ```text
/// 1/2 |1 + (L2 - 2 f2) / sqrt(L2^2 - 4 L2 f2)|
/// ```
///
/// Returns `(factor, L2)`.
pub fn back_group_factor(f1: f64, f2: f64, d: f64) -> Result<(f64, f64), TravelError> {
    let denom = f1 + f2 - d;
    if denom.abs() <= 1e-12 * f1.abs().max(f2.abs()).max(1.0) {
        return Err(TravelError::Gaussian(GaussianError::Afocal));
    }
    let l2 = -(f1 - d) * (f1 - d) / denom;
    let disc = l2 * l2 - 4.0 * l2 * f2;
    if disc < 0.0 {
        return Err(TravelError::BackConjugateComplex { discriminant: disc });
    }
    let factor = 0.5 * (1.0 + (l2 - 2.0 * f2) / disc.sqrt()).abs();
    Ok((factor, l2))
}

/// Two-group travel for refocusing from infinity to the near point `l_b`.
///
/// The total focal length comes from the group powers, the intermediate-image
/// shift is `(f1/f)^2 R_o`, and the back-group travel follows from the
/// derivative of the conjugate solution at `L2`.
pub fn travel_two_group(
    f1: f64,
    f2: f64,
    d: f64,
    l_b: ObjectDistance,
) -> Result<TravelResult, TravelError> {
    let f = gaussian::two_group_efl(f1, f2, d)?;
    if f <= 0.0 {
        return Err(TravelError::InvalidInput("total focal length must be positive".into()));
    }
    let r_o = whole_lens_travel(f, ObjectDistance::Infinity, l_b)?;
    let alpha = f1 / f;
    let (factor, l2) = back_group_factor(f1, f2, d)?;
    let gamma = factor * alpha * alpha;
    Ok(TravelResult {
        r_o_um: r_o,
        delta_l1_um: alpha * alpha * r_o,
        l2_conj_mm: l2,
        r_um: gamma * r_o,
        gamma,
    })
}

/// Closed-form travel ratio `gamma = |alpha^2 / (1 - alpha^2)|`.
pub fn gamma_closed(alpha: f64) -> Result<f64, TravelError> {
    let denom = 1.0 - alpha * alpha;
    if denom == 0.0 {
        return Err(TravelError::PoleAtUnitAlpha);
    }
    Ok((alpha * alpha / denom).abs())
}

/// Uniformly sampled travel-ratio curve over `[alpha_min, alpha_max]`.
/// Samples falling on the pole at alpha = 1 are dropped, which splits a
/// straddling range into two segments.
pub fn gamma_curve(
    alpha_min: f64,
    alpha_max: f64,
    n_samples: usize,
) -> Result<Vec<(f64, f64)>, TravelError> {
    if !(alpha_min > 0.0 && alpha_max > alpha_min) {
        return Err(TravelError::InvalidInput(
            "need 0 < alpha_min < alpha_max".into(),
        ));
    }
    if n_samples < 2 {
        return Err(TravelError::InvalidInput("need at least 2 samples".into()));
    }
    let step = (alpha_max - alpha_min) / (n_samples - 1) as f64;
    let mut curve = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let alpha = alpha_min + step * i as f64;
        match gamma_closed(alpha) {
            Ok(gamma) => curve.push((alpha, gamma)),
            Err(TravelError::PoleAtUnitAlpha) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(curve)
}

/// Hyperfocal distance `H = f^2/(F# c) + f` in mm.
pub fn hyperfocal(f_mm: f64, fno: f64, coc_mm: f64) -> Result<f64, TravelError> {
    if f_mm <= 0.0 || fno <= 0.0 || coc_mm <= 0.0 {
        return Err(TravelError::InvalidInput("all inputs must be positive".into()));
    }
    Ok(f_mm * f_mm / (fno * coc_mm) + f_mm)
}

/// Focus positions needed to cover infinity down to `near_mm`, stepping one
/// depth of field at a time in diopter space, plus the resulting accessible
/// pixel count.
pub fn focus_positions(
    f_mm: f64,
    fno: f64,
    coc_mm: f64,
    near_mm: f64,
    sensor_pixels: u64,
) -> Result<FocusBudget, TravelError> {
    if near_mm <= 0.0 {
        return Err(TravelError::InvalidInput("near point must be positive".into()));
    }
    let hyperfocal_mm = hyperfocal(f_mm, fno, coc_mm)?;
    // one depth of field spans 2 F# c / f^2 diopters
    let step = 2.0 * fno * coc_mm / (f_mm * f_mm);
    let span = 1.0 / near_mm;
    let positions = (span / step).ceil().max(1.0) as u32;
    Ok(FocusBudget {
        hyperfocal_mm,
        coc_mm,
        positions,
        total_pixels: positions as u64 * sensor_pixels,
        travel_budget_um: DEFAULT_TRAVEL_BUDGET_UM,
    })
}

/// One member of the published family of lenses sharing a single focusing
/// module: focal length, aperture, near point, measured back-group travel and
/// the resulting travel ratio.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FamilyLens {
    pub index: u8,
    pub f_mm: f64,
    pub fno: f64,
    pub near_m: f64,
    pub travel_um: f64,
    pub gamma: f64,
}

/// The eight-lens universal focusing family (25 mm to 60 mm) built around
/// one shared back module.
pub const UNIVERSAL_FAMILY: [FamilyLens; 8] = [
    FamilyLens { index: 1, f_mm: 25.0, fno: 2.5, near_m: 2.0, travel_um: 238.0, gamma: 0.76 },
    FamilyLens { index: 2, f_mm: 30.0, fno: 3.0, near_m: 3.0, travel_um: 207.0, gamma: 0.69 },
    FamilyLens { index: 3, f_mm: 35.0, fno: 3.0, near_m: 4.0, travel_um: 238.0, gamma: 0.78 },
    FamilyLens { index: 4, f_mm: 40.0, fno: 3.0, near_m: 5.0, travel_um: 252.0, gamma: 0.79 },
    FamilyLens { index: 5, f_mm: 45.0, fno: 3.5, near_m: 6.0, travel_um: 224.0, gamma: 0.66 },
    FamilyLens { index: 6, f_mm: 50.0, fno: 3.5, near_m: 8.0, travel_um: 204.0, gamma: 0.65 },
    FamilyLens { index: 7, f_mm: 55.0, fno: 3.5, near_m: 10.0, travel_um: 208.0, gamma: 0.68 },
    FamilyLens { index: 8, f_mm: 60.0, fno: 4.0, near_m: 12.0, travel_um: 205.0, gamma: 0.68 },
];
