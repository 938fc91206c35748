//! The style parameter record, its validation rules and a reflected schema.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Every tunable constant of the renderer. Missing keys take their default;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StyleParams {
    /// Ambient (paper) brightness and shadow floor. Measured.
    pub ambient: f64,
    /// Diffuse weight; `ambient + kd` is the lit ceiling 0.8. Derived.
    pub kd: f64,
    pub ks: f64,
    pub shininess: f64,
    pub background_brightness: f64,
    /// Measured.
    pub light_azimuth_deg: f64,
    /// Measured.
    pub light_elevation_deg: f64,
    /// Measured.
    pub w_geom: f64,
    /// Measured.
    pub w_nd: f64,
    pub blur_radius_px: u32,
    pub geometry_line_darkness: f64,
    pub nd_k_depth: f64,
    pub nd_k_normal: f64,
    pub line_threshold: f64,
    /// Measured.
    pub line_b_min: f64,
    /// Measured.
    pub line_b_max: f64,
    pub crease_threshold_deg: f64,
    pub shadow_bias: f64,
    pub pcf_radius_px: u32,
    pub depth_offset: f64,
    pub samples_per_edge_min: u32,
    pub paper_tint: [f64; 3],
}

impl Default for StyleParams {
    fn default() -> Self {
        Self {
            ambient: 0.55,
            kd: 0.25,
            ks: 0.10,
            shininess: 24.0,
            background_brightness: 0.62,
            light_azimuth_deg: 45.0,
            light_elevation_deg: 45.0,
            w_geom: 0.3,
            w_nd: 0.7,
            blur_radius_px: 1,
            geometry_line_darkness: 0.6,
            nd_k_depth: 6.0,
            nd_k_normal: 0.5,
            line_threshold: 0.05,
            line_b_min: 0.4,
            line_b_max: 0.8,
            crease_threshold_deg: 40.0,
            shadow_bias: 2e-3,
            pcf_radius_px: 2,
            depth_offset: 1e-3,
            samples_per_edge_min: 8,
            paper_tint: [1.0, 1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Measured from the reference drawings.
    Measured,
    /// Fixed by arithmetic on measured constants.
    Derived,
    /// Free tuning knob with a documented default.
    Placeholder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Number,
    Integer,
    Rgb,
}

/// Reflection entry for one [`StyleParams`] field.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSchema {
    pub name: &'static str,
    pub kind: FieldKind,
    pub min: f64,
    pub max: f64,
    pub min_exclusive: bool,
    pub max_exclusive: bool,
    pub default: Value,
    pub provenance: Provenance,
    pub description: &'static str,
}

struct FieldSpec {
    name: &'static str,
    kind: FieldKind,
    min: f64,
    max: f64,
    min_exclusive: bool,
    max_exclusive: bool,
    provenance: Provenance,
    description: &'static str,
}

const fn num(name: &'static str, min: f64, max: f64, provenance: Provenance, description: &'static str) -> FieldSpec {
    FieldSpec {
        name,
        kind: FieldKind::Number,
        min,
        max,
        min_exclusive: false,
        max_exclusive: false,
        provenance,
        description,
    }
}

const fn int(name: &'static str, min: f64, max: f64, description: &'static str) -> FieldSpec {
    FieldSpec {
        kind: FieldKind::Integer,
        ..num(name, min, max, Provenance::Placeholder, description)
    }
}

const fn open_low(spec: FieldSpec) -> FieldSpec {
    FieldSpec {
        min_exclusive: true,
        ..spec
    }
}

const fn open_high(spec: FieldSpec) -> FieldSpec {
    FieldSpec {
        max_exclusive: true,
        ..spec
    }
}

use Provenance::{Derived, Measured, Placeholder};

const FIELDS: &[FieldSpec] = &[
    num("ambient", 0.0, 1.0, Measured, "ambient brightness; also the shadow colour"),
    num("kd", 0.0, 1.0, Derived, "diffuse weight"),
    num("ks", 0.0, 1.0, Placeholder, "specular weight"),
    num("shininess", 1.0, 1024.0, Placeholder, "specular exponent"),
    num("background_brightness", 0.0, 1.0, Placeholder, "brightness of uncovered pixels"),
    num("light_azimuth_deg", -360.0, 360.0, Measured, "light heading in the ground plane"),
    open_low(num("light_elevation_deg", 0.0, 90.0, Measured, "light angle above the ground plane")),
    num("w_geom", 0.0, 1.0, Measured, "weight of geometry lines in the composite"),
    num("w_nd", 0.0, 1.0, Measured, "weight of normal-depth lines in the composite"),
    int("blur_radius_px", 0.0, 16.0, "box blur radius applied to geometry lines"),
    num("geometry_line_darkness", 0.0, 1.0, Placeholder, "stroke darkness of geometry lines"),
    num("nd_k_depth", 0.0, 100.0, Placeholder, "depth gain of the normal-depth edge operator"),
    num("nd_k_normal", 0.0, 10.0, Placeholder, "normal gain of the normal-depth edge operator"),
    open_high(num("line_threshold", 0.0, 1.0, Placeholder, "composite darkness treated as no line")),
    open_low(num("line_b_min", 0.0, 1.0, Measured, "brightness of the strongest line")),
    open_low(num("line_b_max", 0.0, 1.0, Measured, "brightness of the faintest line")),
    open_high(open_low(num("crease_threshold_deg", 0.0, 180.0, Placeholder, "normal angle above which an edge is a crease"))),
    num("shadow_bias", 0.0, 0.1, Placeholder, "shadow-map depth bias (light-frame normalized)"),
    int("pcf_radius_px", 0.0, 16.0, "percentage-closer filter radius"),
    num("depth_offset", 0.0, 0.1, Placeholder, "edge-over-surface depth allowance in the id pass"),
    int("samples_per_edge_min", 1.0, 4096.0, "minimum visibility samples per edge"),
    FieldSpec {
        kind: FieldKind::Rgb,
        ..num("paper_tint", 0.0, 1.0, Placeholder, "channel-wise multiplier applied to the final image")
    },
];

/// One rule broken by a parameter document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub value: Value,
    pub allowed: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} (value {}, allowed {})", self.field, self.message, self.value, self.allowed)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ParamsError {
    #[error("malformed parameter document: {0}")]
    Malformed(String),
    #[error("{} invalid parameter(s): {}", .0.len(), join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl ParamsError {
    pub fn violations(&self) -> Vec<Violation> {
        match self {
            ParamsError::Invalid(v) => v.clone(),
            ParamsError::Malformed(m) => vec![Violation {
                field: String::new(),
                value: Value::Null,
                allowed: "a StyleParams JSON object".into(),
                message: m.clone(),
            }],
        }
    }
}

impl StyleParams {
    /// Parse and validate a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ParamsError> {
        let params: Self = serde_json::from_str(text).map_err(|e| ParamsError::Malformed(e.to_string()))?;
        validate_params(params)
    }

    pub fn from_value(value: Value) -> Result<Self, ParamsError> {
        let params: Self = serde_json::from_value(value).map_err(|e| ParamsError::Malformed(e.to_string()))?;
        validate_params(params)
    }
}

fn range_text(s: &FieldSpec) -> String {
    format!(
        "{}{}, {}{}",
        if s.min_exclusive { '(' } else { '[' },
        s.min,
        s.max,
        if s.max_exclusive { ')' } else { ']' }
    )
}

fn in_range(s: &FieldSpec, v: f64) -> bool {
    v.is_finite()
        && (if s.min_exclusive { v > s.min } else { v >= s.min })
        && (if s.max_exclusive { v < s.max } else { v <= s.max })
}

/// Check every rule and report all violations together.
pub fn validate_params(params: StyleParams) -> Result<StyleParams, ParamsError> {
    let doc = serde_json::to_value(&params).expect("params serialize");
    let mut out = Vec::new();
    for spec in FIELDS {
        let value = doc.get(spec.name).cloned().unwrap_or(Value::Null);
        let ok = match spec.kind {
            FieldKind::Rgb => value
                .as_array()
                .is_some_and(|a| a.iter().all(|c| c.as_f64().is_some_and(|c| in_range(spec, c)))),
            _ => value.as_f64().is_some_and(|v| in_range(spec, v)),
        };
        if !ok {
            out.push(Violation {
                field: spec.name.into(),
                value,
                allowed: range_text(spec),
                message: "out of range".into(),
            });
        }
    }
    if params.w_geom + params.w_nd > 1.0 + 1e-9 {
        out.push(Violation {
            field: "w_geom+w_nd".into(),
            value: serde_json::json!(params.w_geom + params.w_nd),
            allowed: "sum <= 1".into(),
            message: "weights exceed 1".into(),
        });
    }
    if params.ambient + params.kd > 1.0 + 1e-9 {
        out.push(Violation {
            field: "ambient+kd".into(),
            value: serde_json::json!(params.ambient + params.kd),
            allowed: "sum <= 1".into(),
            message: "ambient plus diffuse exceeds 1".into(),
        });
    }
    if !(params.line_b_min < params.line_b_max) {
        out.push(Violation {
            field: "line_b_min".into(),
            value: serde_json::json!([params.line_b_min, params.line_b_max]),
            allowed: "line_b_min < line_b_max".into(),
            message: "line_b_min must be below line_b_max".into(),
        });
    }
    if out.is_empty() {
        Ok(params)
    } else {
        Err(ParamsError::Invalid(out))
    }
}

/// Name, range, default and provenance of every field, in declaration order.
pub fn params_schema() -> Vec<FieldSchema> {
    let defaults = serde_json::to_value(StyleParams::default()).expect("params serialize");
    FIELDS
        .iter()
        .map(|s| FieldSchema {
            name: s.name,
            kind: s.kind,
            min: s.min,
            max: s.max,
            min_exclusive: s.min_exclusive,
            max_exclusive: s.max_exclusive,
            default: defaults[s.name].clone(),
            provenance: s.provenance,
            description: s.description,
        })
        .collect()
}
