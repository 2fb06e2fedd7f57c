//! Glass catalog and the two-term Cauchy dispersion model.
//!
//! Only `n_d` and the Abbe number are catalogued; the index at other
//! wavelengths comes from `n(lambda) = A + B/lambda^2` fitted so that
//! `n(587.56 nm) = n_d` and `n(F) - n(C) = (n_d - 1)/v_d`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::PrescriptionError;

/// Helium d line (nm), the default trace wavelength.
pub const D_LINE_NM: f64 = 587.56;
/// Hydrogen F line (nm).
pub const F_LINE_NM: f64 = 486.13;
/// Hydrogen C line (nm).
pub const C_LINE_NM: f64 = 656.27;

/// Supported wavelength band (nm); the Cauchy fit is not trusted outside it.
pub const WAVELENGTH_BAND_NM: (f64, f64) = (400.0, 750.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlassEntry {
    pub name: String,
    pub n_d: f64,
    pub v_d: f64,
    /// Where the numbers were taken from, one line per entry.
    pub source: String,
}

impl GlassEntry {
    /// Refractive index at `wavelength_nm` from the Cauchy fit.
    pub fn index_at(&self, wavelength_nm: f64) -> Result<f64, PrescriptionError> {
        check_band(wavelength_nm)?;
        let spread = 1.0 / (F_LINE_NM * F_LINE_NM) - 1.0 / (C_LINE_NM * C_LINE_NM);
        let b = (self.n_d - 1.0) / (self.v_d * spread);
        let a = self.n_d - b / (D_LINE_NM * D_LINE_NM);
        Ok(a + b / (wavelength_nm * wavelength_nm))
    }
}

fn check_band(wavelength_nm: f64) -> Result<(), PrescriptionError> {
    let (lo, hi) = WAVELENGTH_BAND_NM;
    if !(lo..=hi).contains(&wavelength_nm) {
        return Err(PrescriptionError::WavelengthOutOfBand { nm: wavelength_nm });
    }
    Ok(())
}

/// A surface medium: air or a catalogued glass.
#[derive(Clone, Debug, PartialEq)]
pub enum Material {
    Air,
    Glass(GlassEntry),
}

impl Material {
    pub fn name(&self) -> &str {
        match self {
            Material::Air => "AIR",
            Material::Glass(g) => &g.name,
        }
    }

    /// Air is exactly 1 at any wavelength; glass uses the Cauchy fit.
    pub fn index_at(&self, wavelength_nm: f64) -> Result<f64, PrescriptionError> {
        match self {
            Material::Air => Ok(1.0),
            Material::Glass(g) => g.index_at(wavelength_nm),
        }
    }

    pub fn is_air(&self) -> bool {
        matches!(self, Material::Air)
    }
}

/// Read-only set of glass entries, looked up by case-insensitive name.
#[derive(Clone, Debug, Default)]
pub struct GlassCatalog {
    entries: Vec<GlassEntry>,
}

impl GlassCatalog {
    pub fn new(entries: Vec<GlassEntry>) -> Self {
        GlassCatalog { entries }
    }

    pub fn from_json(doc: &str) -> Result<Self, PrescriptionError> {
        let entries: Vec<GlassEntry> = serde_json::from_str(doc)
            .map_err(|e| PrescriptionError::Json(e.to_string()))?;
        for g in &entries {
            if g.n_d <= 1.0 || g.v_d <= 0.0 {
                return Err(PrescriptionError::BadGlass { name: g.name.clone() });
            }
        }
        Ok(GlassCatalog { entries })
    }

    pub fn get(&self, name: &str) -> Option<&GlassEntry> {
        self.entries.iter().find(|g| g.name.eq_ignore_ascii_case(name))
    }

    /// Resolve a material name; `AIR` (any case) is the air medium.
    pub fn material(&self, name: &str) -> Option<Material> {
        if name.eq_ignore_ascii_case("AIR") {
            return Some(Material::Air);
        }
        self.get(name).cloned().map(Material::Glass)
    }

    pub fn entries(&self) -> &[GlassEntry] {
        &self.entries
    }

    /// The catalog bundled with the crate, covering every material used by
    /// the built-in prescriptions.
    pub fn bundled() -> &'static GlassCatalog {
        static CATALOG: OnceLock<GlassCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| {
            GlassCatalog::from_json(include_str!("../../data/glass_catalog.json"))
                .expect("bundled glass catalog must parse")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn air_is_unity_everywhere() {
        assert_eq!(Material::Air.index_at(400.0).unwrap(), 1.0);
        assert_eq!(Material::Air.index_at(9999.0).unwrap(), 1.0);
    }

    #[test]
    fn d_line_reproduces_catalog_index() {
        let e48r = GlassCatalog::bundled().get("E48R").unwrap();
        assert!((e48r.index_at(D_LINE_NM).unwrap() - 1.531).abs() < 1e-12);
    }

    #[test]
    fn dispersion_matches_abbe_number() {
        let pc = GlassCatalog::bundled().get("POLYCARB").unwrap();
        let spread = pc.index_at(F_LINE_NM).unwrap() - pc.index_at(C_LINE_NM).unwrap();
        let expected = (1.586 - 1.0) / 29.91;
        assert!((spread - expected).abs() < 1e-12);
        assert!((expected - 0.019592).abs() < 1e-6);
    }

    #[test]
    fn out_of_band_wavelength_rejected() {
        let bk7 = GlassCatalog::bundled().get("BK7").unwrap();
        assert!(matches!(
            bk7.index_at(900.0),
            Err(PrescriptionError::WavelengthOutOfBand { .. })
        ));
    }

    #[test]
    fn lookup_is_case_insensitive_and_air_is_special() {
        let cat = GlassCatalog::bundled();
        assert!(cat.material("fk54").is_some());
        assert_eq!(cat.material("Air"), Some(Material::Air));
        assert!(cat.material("UNOBTANIUM").is_none());
    }

    #[test]
    fn bundled_catalog_covers_every_table_material() {
        let cat = GlassCatalog::bundled();
        for name in [
            "FK54", "LAF2", "BK7", "E48R", "POLYCARB", "S-NBH8", "F_SILICA", "N-SK16",
            "N-FK51A", "N-LASF40", "N-BAK7",
        ] {
            assert!(cat.get(name).is_some(), "missing {name}");
        }
    }
}
