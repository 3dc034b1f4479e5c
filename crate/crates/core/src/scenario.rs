//! Scenario descriptions: parameters, KPIs, xApps and their subscriptions.
//!
//! Scenarios are TOML documents with four sections:
//!
//! ```toml
//! [model]
//! id = "gaussian-4kpi"
//!
//! [[parameters]]
//! name = "P1"
//! lower = 0.0
//! upper = 300.0
//!
//! [[kpis]]
//! name = "K1"
//! equation = "K1"
//!
//! [[xapps]]
//! name = "a1"
//! controls = ["P1"]
//! monitors = ["K1"]
//! ```
//!
//! `model` may be omitted, in which case the four-KPI Gaussian model is used.
//! `xapps` may be empty.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Source text of the shipped default scenario.
pub const DEFAULT_SCENARIO_TOML: &str = include_str!("../../../scenarios/default.toml");

/// Built-in structural-equation sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ModelId {
    /// Seven parameters, four KPIs with Gaussian closed forms.
    #[default]
    #[serde(rename = "gaussian-4kpi")]
    Gaussian4Kpi,
}

impl ModelId {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Gaussian4Kpi => "gaussian-4kpi",
        }
    }

    pub fn parameter_count(self) -> usize {
        match self {
            ModelId::Gaussian4Kpi => 7,
        }
    }

    /// Equation identifiers, in evaluation order.
    pub fn equations(self) -> &'static [&'static str] {
        match self {
            ModelId::Gaussian4Kpi => &["K1", "K2", "K3", "K4"],
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-4kpi" => Ok(ModelId::Gaussian4Kpi),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl ParameterSpec {
    pub fn range(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpiSpec {
    pub name: String,
    /// Which structural equation of the model produces this KPI.
    pub equation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XAppSpec {
    pub name: String,
    #[serde(default)]
    pub controls: Vec<String>,
    #[serde(default)]
    pub monitors: Vec<String>,
}

/// A validated scenario. Construct through [`Scenario::new`], [`Scenario::from_toml_str`]
/// or [`load_scenario`] so the invariants hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    parameters: Vec<ParameterSpec>,
    kpis: Vec<KpiSpec>,
    xapps: Vec<XAppSpec>,
    model_id: ModelId,
    /// `kpi_slots[j]` is the index into `model_id.equations()` feeding KPI `j`.
    #[serde(skip)]
    kpi_slots: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    id: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    model: Option<RawModel>,
    #[serde(default)]
    parameters: Vec<ParameterSpec>,
    #[serde(default)]
    kpis: Vec<KpiSpec>,
    #[serde(default)]
    xapps: Vec<XAppSpec>,
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::InvalidScenario {
        location: location.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn new(
        parameters: Vec<ParameterSpec>,
        kpis: Vec<KpiSpec>,
        xapps: Vec<XAppSpec>,
        model_id: ModelId,
    ) -> Result<Self> {
        Self::validate(parameters, kpis, xapps, model_id, "scenario")
    }

    fn validate(
        parameters: Vec<ParameterSpec>,
        kpis: Vec<KpiSpec>,
        xapps: Vec<XAppSpec>,
        model_id: ModelId,
        origin: &str,
    ) -> Result<Self> {
        let mut names = HashSet::new();
        for (i, p) in parameters.iter().enumerate() {
            let loc = format!("{origin}: parameters[{i}]");
            if p.name.trim().is_empty() {
                return Err(invalid(loc, "empty parameter name"));
            }
            if !names.insert(p.name.as_str()) {
                return Err(invalid(loc, format!("duplicate name `{}`", p.name)));
            }
            if !(p.lower.is_finite() && p.upper.is_finite()) {
                return Err(invalid(loc, format!("bounds of `{}` must be finite", p.name)));
            }
            if p.lower >= p.upper {
                return Err(invalid(
                    loc,
                    format!(
                        "invalid bounds for `{}`: lower {} must be < upper {}",
                        p.name, p.lower, p.upper
                    ),
                ));
            }
        }
        for (i, k) in kpis.iter().enumerate() {
            let loc = format!("{origin}: kpis[{i}]");
            if k.name.trim().is_empty() {
                return Err(invalid(loc, "empty KPI name"));
            }
            if !names.insert(k.name.as_str()) {
                return Err(invalid(loc, format!("duplicate name `{}`", k.name)));
            }
        }

        let expected = model_id.parameter_count();
        if parameters.len() != expected {
            return Err(invalid(
                format!("{origin}: parameters"),
                format!(
                    "model `{model_id}` needs exactly {expected} parameters, found {}",
                    parameters.len()
                ),
            ));
        }
        let equations = model_id.equations();
        if kpis.len() != equations.len() {
            return Err(invalid(
                format!("{origin}: kpis"),
                format!(
                    "model `{model_id}` needs exactly {} KPIs, found {}",
                    equations.len(),
                    kpis.len()
                ),
            ));
        }
        let mut kpi_slots = Vec::with_capacity(kpis.len());
        for (i, k) in kpis.iter().enumerate() {
            let loc = format!("{origin}: kpis[{i}].equation");
            let slot = equations
                .iter()
                .position(|e| *e == k.equation)
                .ok_or_else(|| {
                    invalid(
                        &loc,
                        format!("model `{model_id}` has no equation `{}`", k.equation),
                    )
                })?;
            if kpi_slots.contains(&slot) {
                return Err(invalid(loc, format!("equation `{}` bound twice", k.equation)));
            }
            kpi_slots.push(slot);
        }

        let param_names: HashSet<&str> = parameters.iter().map(|p| p.name.as_str()).collect();
        let kpi_names: HashSet<&str> = kpis.iter().map(|k| k.name.as_str()).collect();
        for (i, a) in xapps.iter().enumerate() {
            let loc = format!("{origin}: xapps[{i}]");
            if a.name.trim().is_empty() {
                return Err(invalid(loc, "empty xApp name"));
            }
            if !names.insert(a.name.as_str()) {
                return Err(invalid(loc, format!("duplicate name `{}`", a.name)));
            }
            let mut seen = HashSet::new();
            for (j, c) in a.controls.iter().enumerate() {
                if !param_names.contains(c.as_str()) {
                    return Err(invalid(
                        format!("{loc}.controls[{j}]"),
                        format!("xApp `{}` controls undeclared parameter `{c}`", a.name),
                    ));
                }
                if !seen.insert(c.as_str()) {
                    return Err(invalid(
                        format!("{loc}.controls[{j}]"),
                        format!("`{c}` listed twice"),
                    ));
                }
            }
            for (j, m) in a.monitors.iter().enumerate() {
                if !kpi_names.contains(m.as_str()) {
                    return Err(invalid(
                        format!("{loc}.monitors[{j}]"),
                        format!("xApp `{}` monitors undeclared KPI `{m}`", a.name),
                    ));
                }
                if !seen.insert(m.as_str()) {
                    return Err(invalid(
                        format!("{loc}.monitors[{j}]"),
                        format!("`{m}` listed twice"),
                    ));
                }
            }
        }

        Ok(Self {
            parameters,
            kpis,
            xapps,
            model_id,
            kpi_slots,
        })
    }

    /// Parses and validates scenario TOML. `origin` names the source in error locations.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("{origin}:{line}:{col}")
                }
                None => origin.to_string(),
            };
            Error::Parse {
                location,
                message: e.message().to_string(),
            }
        })?;
        let model_id = match raw.model {
            Some(m) => m.id.parse()?,
            None => ModelId::default(),
        };
        Self::validate(raw.parameters, raw.kpis, raw.xapps, model_id, origin)
    }

    /// The shipped default scenario.
    pub fn default_scenario() -> Self {
        Self::from_toml_str(DEFAULT_SCENARIO_TOML, "default")
            .expect("shipped default scenario is valid")
    }

    /// Same parameters, KPIs and model with a different xApp population.
    pub fn with_xapps(&self, xapps: Vec<XAppSpec>) -> Result<Self> {
        Self::new(
            self.parameters.clone(),
            self.kpis.clone(),
            xapps,
            self.model_id,
        )
    }

    pub fn parameters(&self) -> &[ParameterSpec] {
        &self.parameters
    }

    pub fn kpis(&self) -> &[KpiSpec] {
        &self.kpis
    }

    pub fn xapps(&self) -> &[XAppSpec] {
        &self.xapps
    }

    pub fn model_id(&self) -> ModelId {
        self.model_id
    }

    /// Equation slot feeding each declared KPI.
    pub(crate) fn kpi_slots(&self) -> &[usize] {
        &self.kpi_slots
    }

    /// Parameter names followed by KPI names, in declared order.
    pub fn feature_names(&self) -> Vec<String> {
        self.parameters
            .iter()
            .map(|p| p.name.clone())
            .chain(self.kpis.iter().map(|k| k.name.clone()))
            .collect()
    }

    pub fn feature_count(&self) -> usize {
        self.parameters.len() + self.kpis.len()
    }

    /// Short stable digest of the validated content.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("scenario serializes");
        let digest = Sha256::digest(&canonical);
        hex::encode(&digest[..8])
    }
}

/// Reads a scenario file. The literal path `default` selects the shipped scenario.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    if path.as_os_str() == "default" {
        return Ok(Scenario::default_scenario());
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_toml_str(&text, &path.display().to_string())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_with(xapps: &str) -> String {
        let base = DEFAULT_SCENARIO_TOML;
        let cut = base.find("[[xapps]]").unwrap();
        format!("{}{}", &base[..cut], xapps)
    }

    #[test]
    fn default_has_seven_parameters_four_kpis() {
        let s = Scenario::default_scenario();
        assert_eq!(s.parameters().len(), 7);
        assert_eq!(s.kpis().len(), 4);
        assert_eq!(s.xapps().len(), 6);
        assert_eq!(s.model_id(), ModelId::Gaussian4Kpi);
        assert_eq!(s.feature_names().len(), 11);
    }

    #[test]
    fn load_default_keyword_and_file_agree() {
        let from_keyword = load_scenario("default").unwrap();
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/default.toml");
        let from_file = load_scenario(path).unwrap();
        assert_eq!(from_keyword.feature_names(), from_file.feature_names());
        assert_eq!(from_keyword.xapps(), from_file.xapps());
        assert_eq!(from_keyword.hash(), from_file.hash());
    }

    #[test]
    fn undeclared_parameter_is_named() {
        let text = default_with("[[xapps]]\nname = \"a1\"\ncontrols = [\"P9\"]\n");
        let err = Scenario::from_toml_str(&text, "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("P9"), "{msg}");
        assert!(msg.contains("xapps[0].controls[0]"), "{msg}");
    }

    #[test]
    fn undeclared_kpi_is_named() {
        let text = default_with("[[xapps]]\nname = \"a1\"\nmonitors = [\"K7\"]\n");
        let msg = Scenario::from_toml_str(&text, "test").unwrap_err().to_string();
        assert!(msg.contains("K7"), "{msg}");
    }

    #[test]
    fn empty_xapps_is_valid() {
        let text = default_with("");
        let s = Scenario::from_toml_str(&text, "test").unwrap();
        assert!(s.xapps().is_empty());
    }

    #[test]
    fn inverted_bounds_rejected() {
        let text = DEFAULT_SCENARIO_TOML.replacen("upper = 300.0", "upper = -1.0", 1);
        let msg = Scenario::from_toml_str(&text, "test").unwrap_err().to_string();
        assert!(msg.contains("parameters[0]"), "{msg}");
        assert!(msg.contains("lower"), "{msg}");
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = DEFAULT_SCENARIO_TOML.replacen("name = \"P2\"", "name = \"P1\"", 1);
        let msg = Scenario::from_toml_str(&text, "test").unwrap_err().to_string();
        assert!(msg.contains("duplicate"), "{msg}");
    }

    #[test]
    fn unknown_model_rejected() {
        let text = DEFAULT_SCENARIO_TOML.replace("gaussian-4kpi", "linear-9");
        let err = Scenario::from_toml_str(&text, "test").unwrap_err();
        assert!(matches!(err, Error::UnknownModel(ref m) if m == "linear-9"));
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "[model]\nid = \"gaussian-4kpi\"\n[[parameters]\n";
        let err = Scenario::from_toml_str(text, "bad.toml").unwrap_err();
        match err {
            Error::Parse { location, .. } => assert!(location.starts_with("bad.toml:3"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_scenario("/nonexistent/scenario.toml").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/scenario.toml"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = Scenario::default_scenario();
        let b = a.with_xapps(vec![]).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), Scenario::default_scenario().hash());
    }

    #[test]
    fn kpis_may_be_declared_out_of_equation_order() {
        let text = DEFAULT_SCENARIO_TOML
            .replacen("equation = \"K1\"", "equation = \"TMP\"", 1)
            .replacen("equation = \"K2\"", "equation = \"K1\"", 1)
            .replacen("equation = \"TMP\"", "equation = \"K2\"", 1);
        let s = Scenario::from_toml_str(&text, "test").unwrap();
        assert_eq!(s.kpi_slots(), &[1, 0, 2, 3]);
    }
}
