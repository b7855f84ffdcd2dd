//! JSON fractal configuration: one document describing the scheme, masses
//! and equivalence mode. Exact coordinates and masses are `"num/den"`
//! strings; plain JSON numbers switch a map to tolerance mode.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use fractal_chain::adjacency::{EquivalenceMode, RuleSet};
use fractal_chain::chain::MassDistribution;
use fractal_chain::error::Error as CoreError;
use fractal_chain::ifs::{AffineMap, FloatMap, IfsSpec, OpenSet};
use fractal_chain::linalg::Vector;
use fractal_chain::rat::{self, Rational};
use fractal_chain::word::Word;

#[derive(Debug)]
pub enum ConfigError {
    Json(serde_json::Error),
    Invalid(String),
    Core(CoreError),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Json(e) => write!(f, "config parse error: {e}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
            ConfigError::Core(e) => write!(f, "invalid config: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl From<CoreError> for ConfigError {
    fn from(e: CoreError) -> Self {
        ConfigError::Core(e)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    dimension: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default = "default_arithmetic")]
    arithmetic: Value,
    maps: Vec<RawMap>,
    #[serde(default)]
    vertices: Option<Vec<Vec<f64>>>,
    masses: Vec<String>,
    #[serde(default = "default_equivalence")]
    equivalence: Value,
    #[serde(default)]
    open_set: Option<Value>,
}

fn default_arithmetic() -> Value {
    Value::String("exact".into())
}

fn default_equivalence() -> Value {
    Value::String("geometric".into())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    ratio: Value,
    #[serde(default)]
    fixed_point: Option<Vec<Value>>,
    #[serde(default)]
    fixed_point_bary: Option<Vec<String>>,
    #[serde(default)]
    matrix: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    translation: Option<Vec<Value>>,
}

/// A fully-loaded fixture ready for chain building.
pub struct Fixture {
    pub name: String,
    pub ifs: Arc<IfsSpec>,
    pub mode: EquivalenceMode,
    pub masses: MassDistribution,
    pub dimension: usize,
}

fn rational_value(v: &Value, what: &str) -> Result<Rational, ConfigError> {
    match v {
        Value::String(s) => Ok(rat::parse(s)?),
        _ => Err(ConfigError::Invalid(format!(
            "{what}: exact mode needs \"num/den\" strings, got {v}"
        ))),
    }
}

fn float_value(v: &Value, what: &str) -> Result<f64, ConfigError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| ConfigError::Invalid(format!("{what}: bad number"))),
        Value::String(s) => Ok(rat::to_f64(&rat::parse(s)?)),
        _ => Err(ConfigError::Invalid(format!("{what}: expected a number"))),
    }
}

pub fn parse_config(text: &str) -> Result<Fixture, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(ConfigError::Json)?;
    if raw.maps.len() != raw.n {
        return Err(ConfigError::Invalid(format!(
            "N = {} but {} maps given",
            raw.n,
            raw.maps.len()
        )));
    }

    let tolerance: Option<f64> = match &raw.arithmetic {
        Value::String(s) if s == "exact" => None,
        Value::Object(o) => match o.get("tolerance") {
            Some(eps) => Some(float_value(eps, "tolerance")?),
            None => {
                return Err(ConfigError::Invalid(
                    "arithmetic must be \"exact\" or {\"tolerance\": ε}".into(),
                ))
            }
        },
        other => {
            return Err(ConfigError::Invalid(format!(
                "arithmetic must be \"exact\" or {{\"tolerance\": ε}}, got {other}"
            )))
        }
    };

    let barycentric = raw.maps.iter().any(|m| m.fixed_point_bary.is_some());
    let ifs = match (tolerance, barycentric) {
        (None, true) => {
            let mut maps = Vec::with_capacity(raw.n);
            for (i, m) in raw.maps.iter().enumerate() {
                let Some(bary) = &m.fixed_point_bary else {
                    return Err(ConfigError::Invalid(format!(
                        "map {}: all maps must use fixed_point_bary in barycentric mode",
                        i + 1
                    )));
                };
                let ratio = rational_value(&m.ratio, "ratio")?;
                let center = bary
                    .iter()
                    .map(|s| rat::parse(s).map_err(ConfigError::Core))
                    .collect::<Result<Vector, _>>()?;
                maps.push((ratio, center));
            }
            let open_set = parse_open_set(&raw.open_set, true)?;
            if raw.vertices.is_none() {
                return Err(ConfigError::Invalid(
                    "barycentric configs need Cartesian vertices for rendering".into(),
                ));
            }
            IfsSpec::barycentric(&raw.name, raw.n, maps, raw.vertices.clone(), open_set)?
        }
        (None, false) => {
            let mut maps = Vec::with_capacity(raw.n);
            for (i, m) in raw.maps.iter().enumerate() {
                let ratio = rational_value(&m.ratio, "ratio")?;
                let affine = if let Some(fp) = &m.fixed_point {
                    let center = fp
                        .iter()
                        .map(|v| rational_value(v, "fixed_point"))
                        .collect::<Result<Vector, _>>()?;
                    AffineMap::homothety(&center, &ratio)
                } else if let (Some(matrix), Some(translation)) = (&m.matrix, &m.translation) {
                    let matrix = matrix
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|v| rational_value(v, "matrix"))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let translation = translation
                        .iter()
                        .map(|v| rational_value(v, "translation"))
                        .collect::<Result<Vector, _>>()?;
                    AffineMap {
                        matrix,
                        translation,
                        ratio,
                    }
                } else {
                    return Err(ConfigError::Invalid(format!(
                        "map {}: need fixed_point, fixed_point_bary, or matrix+translation",
                        i + 1
                    )));
                };
                maps.push(affine);
            }
            let open_set = parse_open_set(&raw.open_set, false)?;
            IfsSpec::exact_box(&raw.name, raw.dimension, maps, open_set)?
        }
        (Some(eps), _) => {
            let mut maps = Vec::with_capacity(raw.n);
            for (i, m) in raw.maps.iter().enumerate() {
                let ratio = float_value(&m.ratio, "ratio")?;
                let fmap = if let Some(fp) = &m.fixed_point {
                    let center = fp
                        .iter()
                        .map(|v| float_value(v, "fixed_point"))
                        .collect::<Result<Vec<f64>, _>>()?;
                    let dim = center.len();
                    let mut matrix = vec![vec![0.0; dim]; dim];
                    for (d, row) in matrix.iter_mut().enumerate() {
                        row[d] = ratio;
                    }
                    let translation = center.iter().map(|c| (1.0 - ratio) * c).collect();
                    FloatMap {
                        matrix,
                        translation,
                        ratio,
                    }
                } else if let (Some(matrix), Some(translation)) = (&m.matrix, &m.translation) {
                    let matrix = matrix
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|v| float_value(v, "matrix"))
                                .collect::<Result<Vec<f64>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let translation = translation
                        .iter()
                        .map(|v| float_value(v, "translation"))
                        .collect::<Result<Vec<f64>, _>>()?;
                    FloatMap {
                        matrix,
                        translation,
                        ratio,
                    }
                } else {
                    return Err(ConfigError::Invalid(format!(
                        "map {}: need fixed_point or matrix+translation",
                        i + 1
                    )));
                };
                maps.push(fmap);
            }
            let open_set = match &raw.open_set {
                None => None,
                Some(Value::Object(o)) if o.contains_key("polygon") => {
                    let poly = o["polygon"]
                        .as_array()
                        .ok_or_else(|| ConfigError::Invalid("polygon must be an array".into()))?
                        .iter()
                        .map(|pt| {
                            pt.as_array()
                                .ok_or_else(|| {
                                    ConfigError::Invalid("polygon vertex must be an array".into())
                                })?
                                .iter()
                                .map(|v| float_value(v, "polygon"))
                                .collect::<Result<Vec<f64>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Some(OpenSet::FloatPolygon(poly))
                }
                Some(other) => {
                    return Err(ConfigError::Invalid(format!(
                        "tolerance-mode open_set must be a polygon, got {other}"
                    )))
                }
            };
            IfsSpec::tolerance(&raw.name, raw.dimension, maps, eps, open_set)?
        }
    };

    let masses = MassDistribution::new(
        raw.masses
            .iter()
            .map(|s| rat::parse(s).map_err(ConfigError::Core))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    if masses.alphabet() != raw.n {
        return Err(ConfigError::Invalid(format!(
            "N = {} but {} masses given",
            raw.n,
            masses.alphabet()
        )));
    }

    let mode = parse_equivalence(&raw.equivalence, raw.n)?;

    Ok(Fixture {
        name: raw.name,
        ifs: Arc::new(ifs),
        mode,
        masses,
        dimension: raw.dimension,
    })
}

fn parse_rules(list: &Value, alphabet: usize) -> Result<RuleSet, ConfigError> {
    let arr = list
        .as_array()
        .ok_or_else(|| ConfigError::Invalid("rules must be an array of word pairs".into()))?;
    let mut pairs = Vec::with_capacity(arr.len());
    for entry in arr {
        let pair = entry
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| ConfigError::Invalid(format!("rule must be a pair, got {entry}")))?;
        let parse_word = |v: &Value| -> Result<Word, ConfigError> {
            let s = v
                .as_str()
                .ok_or_else(|| ConfigError::Invalid(format!("rule word must be a string: {v}")))?;
            Word::parse(s, alphabet).map_err(ConfigError::Core)
        };
        pairs.push((parse_word(&pair[0])?, parse_word(&pair[1])?));
    }
    RuleSet::new(pairs, alphabet).map_err(ConfigError::Core)
}

fn parse_equivalence(v: &Value, alphabet: usize) -> Result<EquivalenceMode, ConfigError> {
    match v {
        Value::String(s) if s == "geometric" => Ok(EquivalenceMode::Geometric),
        Value::Object(o) => {
            if let Some(rules) = o.get("rules") {
                Ok(EquivalenceMode::Rules(parse_rules(rules, alphabet)?))
            } else if let Some(rules) = o.get("geometric_plus_rules") {
                Ok(EquivalenceMode::GeometricPlusRules(parse_rules(
                    rules, alphabet,
                )?))
            } else {
                Err(ConfigError::Invalid(
                    "equivalence object needs \"rules\" or \"geometric_plus_rules\"".into(),
                ))
            }
        }
        other => Err(ConfigError::Invalid(format!(
            "equivalence must be \"geometric\" or a rules object, got {other}"
        ))),
    }
}

fn parse_open_set(v: &Option<Value>, barycentric: bool) -> Result<Option<OpenSet>, ConfigError> {
    match v {
        None => Ok(None),
        Some(Value::String(s)) if s == "unit-simplex" => {
            if barycentric {
                Ok(Some(OpenSet::UnitSimplex))
            } else {
                Err(ConfigError::Invalid(
                    "unit-simplex open set needs barycentric mode".into(),
                ))
            }
        }
        Some(Value::Object(o)) if o.contains_key("polygon") => {
            let poly = o["polygon"]
                .as_array()
                .ok_or_else(|| ConfigError::Invalid("polygon must be an array".into()))?
                .iter()
                .map(|pt| {
                    pt.as_array()
                        .ok_or_else(|| {
                            ConfigError::Invalid("polygon vertex must be an array".into())
                        })?
                        .iter()
                        .map(|c| rational_value(c, "polygon"))
                        .collect::<Result<Vector, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Some(OpenSet::Polygon(poly)))
        }
        Some(other) => Err(ConfigError::Invalid(format!(
            "open_set must be \"unit-simplex\" or {{\"polygon\": …}}, got {other}"
        ))),
    }
}
