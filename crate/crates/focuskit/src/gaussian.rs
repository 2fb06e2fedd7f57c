//! Exact and piecewise first-order imaging math.
//!
//! Sign convention: light travels toward +z, a real object lies to the left
//! of the lens so its distance `l` is negative, and distances measured to the
//! right are positive. The conjugate distance is `L = l' - l`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("focal length must be nonzero and finite")]
    InvalidFocalLength,
    #[error("object distance must be nonzero")]
    InvalidObjectDistance,
    #[error("object at the front focal point images at infinity")]
    ImageAtInfinity,
    #[error("no real conjugate: L^2 - 4Lf = {discriminant} < 0")]
    NoRealConjugate { discriminant: f64 },
    #[error("afocal configuration: f1 + f2 = d gives infinite focal length")]
    Afocal,
    #[error("stop sits at the front-group focal point (d_s = f1)")]
    StopAtFrontFocus,
    #[error("invalid two-group spec: {0}")]
    InvalidSpec(String),
}

/// Axial object position in millimetres. `Infinity` is the far-point
/// sentinel, an object infinitely far to the left; every operation branches
/// on it explicitly instead of relying on a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObjectDistance {
    Infinity,
    At(f64),
}

impl ObjectDistance {
    /// 1/l in 1/mm, zero for the far-point sentinel.
    pub fn reciprocal(self) -> f64 {
        match self {
            ObjectDistance::Infinity => 0.0,
            ObjectDistance::At(l) => 1.0 / l,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, ObjectDistance::Infinity)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ObjectDistance::Infinity => None,
            ObjectDistance::At(l) => Some(l),
        }
    }
}

impl Serialize for ObjectDistance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ObjectDistance::Infinity => serializer.serialize_str("inf"),
            ObjectDistance::At(l) => serializer.serialize_f64(*l),
        }
    }
}

/// A solved object/image pair: `1/l' - 1/l = 1/f` and `L = l' - l`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GaussianConjugate {
    pub object_distance_mm: f64,
    pub image_distance_mm: f64,
    pub conjugate_distance_mm: f64,
    pub focal_length_mm: f64,
}

impl GaussianConjugate {
    pub fn solve(l: f64, f: f64) -> Result<Self, GaussianError> {
        let l_prime = image_distance_gauss(ObjectDistance::At(l), f)?;
        Ok(GaussianConjugate {
            object_distance_mm: l,
            image_distance_mm: l_prime,
            conjugate_distance_mm: l_prime - l,
            focal_length_mm: f,
        })
    }
}

/// Image distance from the Gauss lens formula `1/l' - 1/l = 1/f`.
/// The far-point sentinel images at the focal point.
pub fn image_distance_gauss(l: ObjectDistance, f: f64) -> Result<f64, GaussianError> {
    if f == 0.0 || !f.is_finite() {
        return Err(GaussianError::InvalidFocalLength);
    }
    let l = match l {
        ObjectDistance::Infinity => return Ok(f),
        ObjectDistance::At(l) => l,
    };
    if l == 0.0 || !l.is_finite() {
        return Err(GaussianError::InvalidObjectDistance);
    }
    let denom = f + l;
    if denom.abs() <= 1e-12 * f.abs().max(l.abs()) {
        return Err(GaussianError::ImageAtInfinity);
    }
    Ok(f * l / denom)
}

/// Which root of `l'^2 - L l' + L f = 0` applies, split by the sign of the
/// focal length and the object interval. `Lower` selects `(L - sqrt(D))/2`,
/// `Upper` selects `(L + sqrt(D))/2`.
///
/// For f < 0 the intervals are read by magnitude: with m = |f|, the lower
/// root covers real objects and virtual objects in (m, 2m], the upper root
/// covers (0, m] and (2m, +inf]. The table is validated against a brute-force
/// root oracle rather than trusted from notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConjugateBranch {
    PositiveLower,
    PositiveUpper,
    NegativeLower,
    NegativeUpper,
}

impl ConjugateBranch {
    fn picks_upper(self) -> bool {
        matches!(
            self,
            ConjugateBranch::PositiveUpper | ConjugateBranch::NegativeUpper
        )
    }
}

/// Both roots of the conjugate quadratic, `(lower, upper)`.
///
/// The larger-magnitude root is evaluated directly and the other recovered
/// from the product `L*f`, which keeps the cancellation-prone root accurate
/// for photographic conjugates where `L >> f`.
pub fn conjugate_roots(conjugate: f64, f: f64) -> Result<(f64, f64), GaussianError> {
    let disc = conjugate * conjugate - 4.0 * conjugate * f;
    if disc < 0.0 {
        return Err(GaussianError::NoRealConjugate { discriminant: disc });
    }
    let s = disc.sqrt();
    let (lower, upper);
    if conjugate >= 0.0 {
        upper = 0.5 * (conjugate + s);
        lower = if upper != 0.0 {
            conjugate * f / upper
        } else {
            0.5 * (conjugate - s)
        };
    } else {
        lower = 0.5 * (conjugate - s);
        upper = if lower != 0.0 {
            conjugate * f / lower
        } else {
            0.5 * (conjugate + s)
        };
    }
    Ok((lower, upper))
}

/// Image distance from the conjugate distance `L`, selecting the root named
/// by `branch`.
pub fn image_distance_conjugate(
    conjugate: f64,
    f: f64,
    branch: ConjugateBranch,
) -> Result<f64, GaussianError> {
    if f == 0.0 || !f.is_finite() {
        return Err(GaussianError::InvalidFocalLength);
    }
    let (lower, upper) = conjugate_roots(conjugate, f)?;
    Ok(if branch.picks_upper() { upper } else { lower })
}

/// The conjugate-solution case containing the object position `l`.
pub fn classify_branch(l: ObjectDistance, f: f64) -> Result<ConjugateBranch, GaussianError> {
    if f == 0.0 || !f.is_finite() {
        return Err(GaussianError::InvalidFocalLength);
    }
    if f > 0.0 {
        let branch = match l {
            ObjectDistance::Infinity => ConjugateBranch::PositiveLower,
            // lower: [-inf, -2f] and (-f, 0]; upper: (-2f, -f] and (0, +inf]
            ObjectDistance::At(l) => {
                if l <= -2.0 * f || (l > -f && l <= 0.0) {
                    ConjugateBranch::PositiveLower
                } else {
                    ConjugateBranch::PositiveUpper
                }
            }
        };
        Ok(branch)
    } else {
        let m = -f;
        let branch = match l {
            ObjectDistance::Infinity => ConjugateBranch::NegativeLower,
            // lower: [-inf, 0] and (m, 2m]; upper: (0, m] and (2m, +inf]
            ObjectDistance::At(l) => {
                if l <= 0.0 || (l > m && l <= 2.0 * m) {
                    ConjugateBranch::NegativeLower
                } else {
                    ConjugateBranch::NegativeUpper
                }
            }
        };
        Ok(branch)
    }
}

/// Combined focal length of two separated groups, `f1*f2/(f1 + f2 - d)`.
pub fn two_group_efl(f1: f64, f2: f64, d: f64) -> Result<f64, GaussianError> {
    let denom = f1 + f2 - d;
    let scale = f1.abs().max(f2.abs()).max(d.abs()).max(1.0);
    if denom.abs() <= 1e-12 * scale {
        return Err(GaussianError::Afocal);
    }
    Ok(f1 * f2 / denom)
}

/// First-order description of a front group plus focusing back group.
///
/// Constructed through [`TwoGroupSpec::from_groups`], which derives the total
/// focal length from the group powers and enforces the design-space
/// constraint `alpha > beta` (`f1/f > d/f`).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwoGroupSpec {
    /// Total effective focal length (mm, positive).
    pub f: f64,
    /// Front-group focal length (mm).
    pub f1: f64,
    /// Back-group focal length (mm).
    pub f2: f64,
    /// Separation between the groups (mm, positive).
    pub d: f64,
    /// Stop distance behind the front group (mm, in [0, d]).
    pub d_s: f64,
    /// System F-number.
    pub fno: f64,
    /// Full field of view in degrees.
    pub fov_deg: f64,
}

impl TwoGroupSpec {
    pub fn from_groups(
        f1: f64,
        f2: f64,
        d: f64,
        d_s: f64,
        fno: f64,
        fov_deg: f64,
    ) -> Result<Self, GaussianError> {
        if d <= 0.0 {
            return Err(GaussianError::InvalidSpec(
                "group separation d must be positive".into(),
            ));
        }
        if !(0.0..=d).contains(&d_s) {
            return Err(GaussianError::InvalidSpec(
                "stop distance d_s must lie in [0, d]".into(),
            ));
        }
        if fno <= 0.0 {
            return Err(GaussianError::InvalidSpec("F-number must be positive".into()));
        }
        if fov_deg < 0.0 {
            return Err(GaussianError::InvalidSpec(
                "field of view must be nonnegative".into(),
            ));
        }
        let f = two_group_efl(f1, f2, d)?;
        if f <= 0.0 {
            return Err(GaussianError::InvalidSpec(
                "total focal length must be positive".into(),
            ));
        }
        if f1 <= d {
            return Err(GaussianError::InvalidSpec(
                "design space requires alpha > beta, i.e. f1 > d".into(),
            ));
        }
        Ok(TwoGroupSpec {
            f,
            f1,
            f2,
            d,
            d_s,
            fno,
            fov_deg,
        })
    }

    /// f1/f.
    pub fn alpha(&self) -> f64 {
        self.f1 / self.f
    }

    /// d/f.
    pub fn beta(&self) -> f64 {
        self.d / self.f
    }

    fn with_stop(&self, d_s: f64) -> TwoGroupSpec {
        TwoGroupSpec { d_s, ..*self }
    }
}

/// Clear apertures and back working distance of a two-group system.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApertureReport {
    /// Front-group clear aperture diameter (mm).
    pub d1_mm: f64,
    /// Back-group clear aperture diameter (mm).
    pub d2_mm: f64,
    /// Back working distance of the back group (mm).
    pub l2_prime_mm: f64,
}

/// Clear apertures `D1`, `D2` and back working distance `l2'` of the
/// two-group model:
///
/// ```text
/// D1  = 2 tan(FoV/2) f1 d_s / (f1 - d_s) + f / F#
/// D2  = 2 tan(FoV/2) f1 (d - d_s) / (f1 - d_s) + l2' / F#
/// l2' = (f1 - d) f2 / (f1 + f2 - d)
/// ```
pub fn aperture_model(spec: &TwoGroupSpec) -> Result<ApertureReport, GaussianError> {
    if (spec.f1 - spec.d_s).abs() <= 1e-12 * spec.f1.abs().max(1.0) {
        return Err(GaussianError::StopAtFrontFocus);
    }
    let denom = spec.f1 + spec.f2 - spec.d;
    if denom.abs() <= 1e-12 * spec.f1.abs().max(spec.f2.abs()).max(1.0) {
        return Err(GaussianError::Afocal);
    }
    let l2_prime = (spec.f1 - spec.d) * spec.f2 / denom;
    let field = 2.0 * (spec.fov_deg.to_radians() / 2.0).tan();
    let d1 = field * spec.f1 * spec.d_s / (spec.f1 - spec.d_s) + spec.f / spec.fno;
    let d2 = field * spec.f1 * (spec.d - spec.d_s) / (spec.f1 - spec.d_s) + l2_prime / spec.fno;
    Ok(ApertureReport {
        d1_mm: d1,
        d2_mm: d2,
        l2_prime_mm: l2_prime,
    })
}

/// Range of admissible stop positions, `[lo, hi]` within `[0, d]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StopWindow {
    pub lo_mm: f64,
    pub hi_mm: f64,
}

/// Stop positions where both clear apertures fit under the given limits.
///
/// `D1` grows and `D2` shrinks as the stop moves toward the back group (the
/// validated design space has `f1 > d`, so both are monotone over `[0, d]`);
/// each boundary is located by bisection. An empty window is a normal
/// outcome, reported as `None`.
pub fn solve_stop_position(
    spec: &TwoGroupSpec,
    d1_max: f64,
    d2_max: f64,
) -> Result<Option<StopWindow>, GaussianError> {
    if d1_max <= 0.0 || d2_max <= 0.0 {
        return Ok(None);
    }
    let d1_at = |ds: f64| -> Result<f64, GaussianError> {
        Ok(aperture_model(&spec.with_stop(ds))?.d1_mm)
    };
    let d2_at = |ds: f64| -> Result<f64, GaussianError> {
        Ok(aperture_model(&spec.with_stop(ds))?.d2_mm)
    };

    if spec.fov_deg == 0.0 {
        // the field terms vanish and the stop position drops out entirely
        return Ok(if d1_at(0.0)? <= d1_max && d2_at(0.0)? <= d2_max {
            Some(StopWindow {
                lo_mm: 0.0,
                hi_mm: spec.d,
            })
        } else {
            None
        });
    }

    // D1 is increasing in d_s: feasible prefix [0, hi].
    if d1_at(0.0)? > d1_max {
        return Ok(None);
    }
    let hi = if d1_at(spec.d)? <= d1_max {
        spec.d
    } else {
        bisect_boundary(&d1_at, 0.0, spec.d, d1_max)?
    };

    // D2 is decreasing in d_s: feasible suffix [lo, d].
    if d2_at(spec.d)? > d2_max {
        return Ok(None);
    }
    let lo = if d2_at(0.0)? <= d2_max {
        0.0
    } else {
        bisect_boundary(&|ds| Ok(-d2_at(ds)?), 0.0, spec.d, -d2_max)?
    };

    Ok(if lo <= hi {
        Some(StopWindow { lo_mm: lo, hi_mm: hi })
    } else {
        None
    })
}

/// Bisection for the largest x in [a, b] with g(x) <= limit, given g
/// increasing, g(a) <= limit and g(b) > limit.
fn bisect_boundary<G>(g: &G, a: f64, b: f64, limit: f64) -> Result<f64, GaussianError>
where
    G: Fn(f64) -> Result<f64, GaussianError>,
{
    let (mut lo, mut hi) = (a, b);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
