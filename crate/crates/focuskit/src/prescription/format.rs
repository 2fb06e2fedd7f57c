//! The prescription file format.
//!
//! A prescription is one JSON document. Numeric fields may be JSON numbers or
//! decimal strings; the emitter always writes decimal strings so table values
//! survive a round trip unchanged as decimals. A flat radius is the string
//! `"inf"` (or `"-inf"`).

use serde_json::{json, Map, Value};

use super::{
    ArrayMeta, GlassCatalog, Nominal, Prescription, PrescriptionError, Sensor, SurfaceDef,
    SurfaceKind,
};

/// Parse a prescription document against the bundled glass catalog.
pub fn parse(doc: &str) -> Result<Prescription, PrescriptionError> {
    parse_with_catalog(doc, GlassCatalog::bundled())
}

/// Parse a prescription document, resolving materials in `catalog`.
pub fn parse_with_catalog(
    doc: &str,
    catalog: &GlassCatalog,
) -> Result<Prescription, PrescriptionError> {
    let root: Value =
        serde_json::from_str(doc).map_err(|e| PrescriptionError::Json(e.to_string()))?;

    let name = root
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| PrescriptionError::MissingField("name".into()))?
        .to_string();

    let nominal = {
        let v = field(&root, "nominal")?;
        Nominal {
            efl_mm: top_number(v, "nominal.efl_mm")?,
            fno: top_number(v, "nominal.fno")?,
            fov_deg: top_number(v, "nominal.fov_deg")?,
        }
    };
    let sensor = {
        let v = field(&root, "sensor")?;
        Sensor {
            pixel_pitch_um: top_number(v, "sensor.pixel_pitch_um")?,
            diagonal_mm: top_number(v, "sensor.diagonal_mm")?,
            h_px: top_number(v, "sensor.h_px")? as u32,
            v_px: top_number(v, "sensor.v_px")? as u32,
        }
    };
    let stop_index = top_number(&root, "stop_index")? as usize;
    let focusing_group = {
        let v = field(&root, "focusing_group")?;
        let arr = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| PrescriptionError::MissingField("focusing_group".into()))?;
        let lo = value_number(&arr[0])
            .ok_or_else(|| PrescriptionError::MissingField("focusing_group".into()))?;
        let hi = value_number(&arr[1])
            .ok_or_else(|| PrescriptionError::MissingField("focusing_group".into()))?;
        (lo as usize, hi as usize)
    };
    let array = match root.get("array") {
        None | Some(Value::Null) => None,
        Some(v) => Some(ArrayMeta {
            cone_deg: top_number(v, "array.cone_deg")?,
            mfov_deg: top_number(v, "array.mfov_deg")?,
        }),
    };

    let raw_surfaces = root
        .get("surfaces")
        .and_then(Value::as_array)
        .ok_or_else(|| PrescriptionError::MissingField("surfaces".into()))?;
    if raw_surfaces.is_empty() {
        return Err(PrescriptionError::NoSurfaces);
    }

    let mut surfaces = Vec::with_capacity(raw_surfaces.len());
    for (i, raw) in raw_surfaces.iter().enumerate() {
        let surface = i + 1;
        let kind_str = raw
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| PrescriptionError::MissingField(format!("surfaces[{surface}].kind")))?;
        let kind = SurfaceKind::from_name(kind_str).ok_or_else(|| {
            PrescriptionError::MissingField(format!("surfaces[{surface}].kind = {kind_str:?}"))
        })?;
        let radius_mm = surf_number(raw, surface, "radius_mm", true)?;
        let thickness_mm = surf_number(raw, surface, "thickness_mm", false)?;
        if thickness_mm < 0.0 {
            return Err(PrescriptionError::NonMonotone { surface });
        }
        let material_name = raw
            .get("material")
            .and_then(Value::as_str)
            .ok_or_else(|| PrescriptionError::MissingField(format!("surfaces[{surface}].material")))?;
        let material = catalog.material(material_name).ok_or_else(|| {
            PrescriptionError::UnknownMaterial {
                surface,
                name: material_name.to_string(),
            }
        })?;
        let semi_diameter_mm = surf_number(raw, surface, "semi_diameter_mm", false)?;
        let conic = optional_number(raw, surface, "conic")?;
        surfaces.push(SurfaceDef {
            kind,
            radius_mm,
            thickness_mm,
            material,
            semi_diameter_mm,
            conic,
            a4: optional_number(raw, surface, "a4")?,
            a6: optional_number(raw, surface, "a6")?,
            a8: optional_number(raw, surface, "a8")?,
            a10: optional_number(raw, surface, "a10")?,
            a12: optional_number(raw, surface, "a12")?,
        });
    }

    let image_index = surfaces.len();
    if surfaces.last().map(|s| s.kind) != Some(SurfaceKind::Image)
        || surfaces[..image_index - 1].iter().any(|s| s.kind == SurfaceKind::Image)
    {
        return Err(PrescriptionError::ImageNotLast);
    }
    if !(2..image_index).contains(&stop_index)
        || surfaces[stop_index - 1].kind != SurfaceKind::Stop
    {
        return Err(PrescriptionError::BadStop(stop_index));
    }
    let (g0, g1) = focusing_group;
    if g0 > g1 || g0 <= 1 || g1 >= image_index {
        return Err(PrescriptionError::BadFocusingGroup(g0, g1));
    }

    Ok(Prescription {
        name,
        nominal,
        sensor,
        stop_index,
        focusing_group,
        array,
        surfaces,
    })
}

/// Serialize a prescription back to its document form. All numbers are
/// written as decimal strings (shortest round-trip form); keys are sorted, so
/// the output is byte-deterministic.
pub fn emit(p: &Prescription) -> String {
    let surfaces: Vec<Value> = p
        .surfaces
        .iter()
        .map(|s| {
            let mut m = Map::new();
            m.insert("kind".into(), json!(s.kind.as_str()));
            m.insert("radius_mm".into(), json!(decimal(s.radius_mm)));
            m.insert("thickness_mm".into(), json!(decimal(s.thickness_mm)));
            m.insert("material".into(), json!(s.material.name()));
            m.insert("semi_diameter_mm".into(), json!(decimal(s.semi_diameter_mm)));
            if s.conic != 0.0 {
                m.insert("conic".into(), json!(decimal(s.conic)));
            }
            for (key, value) in [
                ("a4", s.a4),
                ("a6", s.a6),
                ("a8", s.a8),
                ("a10", s.a10),
                ("a12", s.a12),
            ] {
                if value != 0.0 {
                    m.insert(key.into(), json!(decimal(value)));
                }
            }
            Value::Object(m)
        })
        .collect();

    let mut root = Map::new();
    root.insert("name".into(), json!(p.name));
    root.insert(
        "nominal".into(),
        json!({
            "efl_mm": decimal(p.nominal.efl_mm),
            "fno": decimal(p.nominal.fno),
            "fov_deg": decimal(p.nominal.fov_deg),
        }),
    );
    root.insert(
        "sensor".into(),
        json!({
            "pixel_pitch_um": decimal(p.sensor.pixel_pitch_um),
            "diagonal_mm": decimal(p.sensor.diagonal_mm),
            "h_px": p.sensor.h_px,
            "v_px": p.sensor.v_px,
        }),
    );
    root.insert("stop_index".into(), json!(p.stop_index));
    root.insert("focusing_group".into(), json!([p.focusing_group.0, p.focusing_group.1]));
    if let Some(meta) = &p.array {
        root.insert(
            "array".into(),
            json!({
                "cone_deg": decimal(meta.cone_deg),
                "mfov_deg": decimal(meta.mfov_deg),
            }),
        );
    }
    root.insert("surfaces".into(), Value::Array(surfaces));
    serde_json::to_string_pretty(&Value::Object(root)).expect("prescription serializes")
}

fn decimal(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn field<'v>(root: &'v Value, name: &str) -> Result<&'v Value, PrescriptionError> {
    root.get(name)
        .ok_or_else(|| PrescriptionError::MissingField(name.into()))
}

/// Number that may be a JSON number or a decimal string; `"inf"`/`"-inf"`
/// map to the flat sentinel.
fn value_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => {
            let t = s.trim();
            if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
                Some(f64::INFINITY)
            } else if t.eq_ignore_ascii_case("-inf") || t.eq_ignore_ascii_case("-infinity") {
                Some(f64::NEG_INFINITY)
            } else {
                t.parse::<f64>().ok().filter(|x| x.is_finite())
            }
        }
        _ => None,
    }
}

fn top_number(parent: &Value, path: &str) -> Result<f64, PrescriptionError> {
    let key = path.rsplit('.').next().unwrap_or(path);
    parent
        .get(key)
        .and_then(value_number)
        .filter(|x| x.is_finite())
        .ok_or_else(|| PrescriptionError::MissingField(path.into()))
}

fn surf_number(
    raw: &Value,
    surface: usize,
    fieldname: &'static str,
    allow_infinite: bool,
) -> Result<f64, PrescriptionError> {
    let v = raw.get(fieldname).ok_or(PrescriptionError::MalformedNumber {
        surface,
        field: fieldname,
        value: "<missing>".into(),
    })?;
    let parsed = value_number(v).ok_or_else(|| PrescriptionError::MalformedNumber {
        surface,
        field: fieldname,
        value: v.to_string(),
    })?;
    if !allow_infinite && !parsed.is_finite() {
        return Err(PrescriptionError::MalformedNumber {
            surface,
            field: fieldname,
            value: v.to_string(),
        });
    }
    Ok(parsed)
}

fn optional_number(
    raw: &Value,
    surface: usize,
    fieldname: &'static str,
) -> Result<f64, PrescriptionError> {
    match raw.get(fieldname) {
        None | Some(Value::Null) => Ok(0.0),
        Some(v) => value_number(v)
            .filter(|x| x.is_finite())
            .ok_or_else(|| PrescriptionError::MalformedNumber {
                surface,
                field: fieldname,
                value: v.to_string(),
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prescription::builtin;

    #[test]
    fn round_trip_is_idempotent() {
        for name in ["mfm30", "mms45"] {
            let p = builtin(name).unwrap();
            let doc1 = emit(&p);
            let p2 = parse(&doc1).unwrap();
            assert_eq!(p, p2, "{name}: reparse changed the prescription");
            let doc2 = emit(&p2);
            assert_eq!(doc1, doc2, "{name}: emit is not idempotent");
        }
    }

    #[test]
    fn rejects_empty_surface_list() {
        let doc = r#"{
            "name": "x",
            "nominal": {"efl_mm": 1, "fno": 1, "fov_deg": 0},
            "sensor": {"pixel_pitch_um": 1, "diagonal_mm": 1, "h_px": 1, "v_px": 1},
            "stop_index": 1, "focusing_group": [1, 1], "surfaces": []
        }"#;
        assert_eq!(parse(doc), Err(PrescriptionError::NoSurfaces));
    }

    #[test]
    fn unknown_material_names_the_surface() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&emit(&builtin("mfm30").unwrap())).unwrap();
        doc["surfaces"][2]["material"] = serde_json::json!("UNOBTANIUM");
        let err = parse(&doc.to_string()).unwrap_err();
        assert_eq!(
            err,
            PrescriptionError::UnknownMaterial { surface: 3, name: "UNOBTANIUM".into() }
        );
    }

    #[test]
    fn malformed_number_names_surface_and_field() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&emit(&builtin("mfm30").unwrap())).unwrap();
        doc["surfaces"][4]["thickness_mm"] = serde_json::json!("14.26.4");
        let err = parse(&doc.to_string()).unwrap_err();
        assert!(matches!(
            err,
            PrescriptionError::MalformedNumber { surface: 5, field: "thickness_mm", .. }
        ));
    }

    #[test]
    fn negative_thickness_is_non_monotone() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&emit(&builtin("mfm30").unwrap())).unwrap();
        doc["surfaces"][7]["thickness_mm"] = serde_json::json!(-0.5);
        assert_eq!(
            parse(&doc.to_string()),
            Err(PrescriptionError::NonMonotone { surface: 8 })
        );
    }

    #[test]
    fn missing_stop_rejected() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&emit(&builtin("mfm30").unwrap())).unwrap();
        doc["surfaces"][5]["kind"] = serde_json::json!("plane");
        assert_eq!(parse(&doc.to_string()), Err(PrescriptionError::BadStop(6)));
    }

    #[test]
    fn numbers_accept_both_json_forms() {
        let mut doc: serde_json::Value =
            serde_json::from_str(&emit(&builtin("mfm30").unwrap())).unwrap();
        doc["surfaces"][0]["radius_mm"] = serde_json::json!(38.400);
        let p = parse(&doc.to_string()).unwrap();
        assert_eq!(p.surface(1).radius_mm, 38.4);
    }
}
