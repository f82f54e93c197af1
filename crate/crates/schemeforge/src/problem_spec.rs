//! Declarative problem description: fields, operator terms, domain, hardware
//! and length scales, read from a single TOML document.
//!
//! The file is the sole input to the scheme selector. Parsing is strict:
//! syntax errors, schema violations and unsupported requests are rejected
//! with the path of the offending key, never silently defaulted.
//!
//! Schema (all keys lowercase):
//!
//! ```toml
//! [[fields]]
//! name = "alpha1"
//! rank = "scalar"              # "scalar" | "vector"
//! governed = true
//! # constraint = "1 - alpha1"  # required iff governed = false
//! # continuity = "discontinuous"  # optional classifier hint
//!
//! [[equations]]
//! field = "alpha1"
//! rhs_depends_on = []          # of "position" | "solution" |
//!                              #    "lower_derivatives" | "highest_derivatives"
//!   [[equations.terms]]
//!   order = 1                  # derivative order, 0..=2
//!   axes = ["t"]               # 1 axis for order 1, 2 axes for order 2
//!     [equations.terms.coeff]
//!     value = 1.0              # representative value; required when
//!                              # depends_on is empty and for all order-2 terms
//!     depends_on = []
//!
//! [domain]
//! dim = 2
//! extents = [[0.0, 5.0], [0.0, 5.0]]
//! geometry = "cartesian_regular"   # | "irregular"
//! has_holes = false
//!
//! [hardware]
//! workers = 8
//! arch = "cpu"                 # | "gpu"
//! memory_gb = 16.0
//!
//! [scales]
//! lengths = [5.0]
//! # multiscale = false         # optional override of the ratio test
//!
//! # Optional. Only the defaults shown are supported; anything else is
//! # rejected as an unsupported feature.
//! # [method]
//! # galerkin = "bubnov"
//! # space = "lagrange"
//! ```

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("syntax error: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid value at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("unsupported feature at `{path}`: {message}")]
    Unsupported { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Validation { path: path.into(), message: message.into() }
}

fn unsupported(path: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Unsupported { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorRank {
    Scalar,
    Vector,
}

/// Classifier hint for fields whose discontinuity structure is known a
/// priori (e.g. pressure-like constraints without a smooth evolution law).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuityExpectation {
    Continuous,
    Discontinuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub rank: TensorRank,
    pub governed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuity: Option<ContinuityExpectation>,
}

/// What a coefficient (or the right-hand side) is allowed to depend on.
/// An empty set means a plain constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependency {
    None,
    Position,
    Solution,
    LowerDerivatives,
    HighestDerivatives,
}

pub type DependencySet = BTreeSet<Dependency>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default)]
    pub depends_on: DependencySet,
}

impl CoefficientDecl {
    pub fn constant(value: f64) -> Self {
        CoefficientDecl { value: Some(value), depends_on: BTreeSet::new() }
    }

    pub fn is_constant(&self) -> bool {
        self.depends_on.iter().all(|d| *d == Dependency::None)
    }

    pub fn depends_on_any(&self, deps: &[Dependency]) -> bool {
        deps.iter().any(|d| self.depends_on.contains(d))
    }
}

/// One additive operator term `coeff * d^order u / (d axes)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorTerm {
    pub order: u8,
    pub axes: Vec<String>,
    pub coeff: CoefficientDecl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEquation {
    pub field: String,
    #[serde(default)]
    pub terms: Vec<OperatorTerm>,
    #[serde(default)]
    pub rhs_depends_on: DependencySet,
}

impl FieldEquation {
    pub fn max_order(&self) -> u8 {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }

    pub fn has_second_order_terms(&self) -> bool {
        self.terms.iter().any(|t| t.order == 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    CartesianRegular,
    Irregular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dim: u8,
    pub extents: Vec<[f64; 2]>,
    pub geometry: Geometry,
    pub has_holes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Cpu,
    Gpu,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Cpu => write!(f, "cpu"),
            Architecture::Gpu => write!(f, "gpu"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub workers: u32,
    pub arch: Architecture,
    pub memory_gb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleDecl {
    #[serde(default)]
    pub lengths: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiscale: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub galerkin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub fields: Vec<FieldDecl>,
    #[serde(default)]
    pub equations: Vec<FieldEquation>,
    pub domain: DomainSpec,
    pub hardware: HardwareConfig,
    pub scales: ScaleDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodRequest>,
}

impl ProblemSpec {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn equation_for(&self, field: &str) -> Option<&FieldEquation> {
        self.equations.iter().find(|e| e.field == field)
    }

    pub fn governed_fields(&self) -> impl Iterator<Item = &FieldDecl> {
        self.fields.iter().filter(|f| f.governed)
    }

    /// Spatial axis names valid for this domain, time excluded.
    pub fn spatial_axes(&self) -> &'static [&'static str] {
        match self.domain.dim {
            1 => &["x"],
            2 => &["x", "y"],
            _ => &["x", "y", "z"],
        }
    }
}

/// Parse and validate a problem description from TOML text.
pub fn parse_problem_spec(text: &str) -> Result<ProblemSpec, SpecError> {
    let spec: ProblemSpec = toml::from_str(text)?;
    validate(&spec)?;
    Ok(spec)
}

/// Serialize back to TOML. `parse(serialize(spec)) == spec` for any spec
/// that passed validation.
pub fn serialize_problem_spec(spec: &ProblemSpec) -> String {
    toml::to_string(spec).expect("validated spec serializes")
}

fn validate(spec: &ProblemSpec) -> Result<(), SpecError> {
    validate_method(spec)?;
    validate_domain(spec)?;
    validate_hardware(spec)?;
    validate_scales(spec)?;
    validate_fields(spec)?;
    validate_equations(spec)?;
    Ok(())
}

fn validate_method(spec: &ProblemSpec) -> Result<(), SpecError> {
    if let Some(m) = &spec.method {
        if let Some(g) = &m.galerkin {
            if g != "bubnov" {
                return Err(unsupported(
                    "method.galerkin",
                    format!("`{g}` is not supported; trial and test spaces are identical (bubnov)"),
                ));
            }
        }
        if let Some(s) = &m.space {
            if s != "lagrange" {
                return Err(unsupported(
                    "method.space",
                    format!("`{s}` is not supported; only lagrange polynomial spaces are available"),
                ));
            }
        }
    }
    Ok(())
}

fn validate_domain(spec: &ProblemSpec) -> Result<(), SpecError> {
    let d = &spec.domain;
    if !(1..=3).contains(&d.dim) {
        return Err(invalid("domain.dim", format!("dim must be 1, 2 or 3, got {}", d.dim)));
    }
    if d.extents.len() != d.dim as usize {
        return Err(invalid(
            "domain.extents",
            format!("expected {} extent pairs for dim {}, got {}", d.dim, d.dim, d.extents.len()),
        ));
    }
    for (i, e) in d.extents.iter().enumerate() {
        if !(e[0].is_finite() && e[1].is_finite() && e[1] > e[0]) {
            return Err(invalid(
                format!("domain.extents[{i}]"),
                format!("extent must be a finite [min, max] pair with max > min, got [{}, {}]", e[0], e[1]),
            ));
        }
    }
    if d.geometry == Geometry::CartesianRegular && d.has_holes {
        return Err(invalid(
            "domain.has_holes",
            "a cartesian_regular domain cannot have holes; declare geometry = \"irregular\"",
        ));
    }
    Ok(())
}

fn validate_hardware(spec: &ProblemSpec) -> Result<(), SpecError> {
    if spec.hardware.workers == 0 {
        return Err(invalid("hardware.workers", "worker count must be at least 1"));
    }
    if !(spec.hardware.memory_gb > 0.0) {
        return Err(invalid("hardware.memory_gb", "memory must be positive"));
    }
    Ok(())
}

fn validate_scales(spec: &ProblemSpec) -> Result<(), SpecError> {
    let s = &spec.scales;
    if s.lengths.is_empty() && s.multiscale.is_none() {
        return Err(invalid(
            "scales.lengths",
            "at least one length scale is required when no multiscale override is given",
        ));
    }
    for (i, l) in s.lengths.iter().enumerate() {
        if !(l.is_finite() && *l > 0.0) {
            return Err(invalid(format!("scales.lengths[{i}]"), format!("length scales must be positive, got {l}")));
        }
    }
    Ok(())
}

fn validate_fields(spec: &ProblemSpec) -> Result<(), SpecError> {
    if spec.fields.is_empty() {
        return Err(invalid("fields", "at least one field is required"));
    }
    for (i, f) in spec.fields.iter().enumerate() {
        if f.name.is_empty() {
            return Err(invalid(format!("fields[{i}].name"), "field name must be non-empty"));
        }
        if spec.fields.iter().filter(|g| g.name == f.name).count() > 1 {
            return Err(invalid(format!("fields[{i}].name"), format!("duplicate field name `{}`", f.name)));
        }
        if f.governed && f.constraint.is_some() {
            return Err(invalid(
                format!("fields[{i}].constraint"),
                "a governed field is defined by its equation, not a constraint expression",
            ));
        }
        if !f.governed && f.constraint.is_none() {
            return Err(invalid(
                format!("fields[{i}].constraint"),
                "a non-governed field must declare the constraint expression that determines it",
            ));
        }
    }
    Ok(())
}

fn validate_equations(spec: &ProblemSpec) -> Result<(), SpecError> {
    for (i, eq) in spec.equations.iter().enumerate() {
        let field = spec.field(&eq.field).ok_or_else(|| {
            invalid(format!("equations[{i}].field"), format!("unknown field `{}`", eq.field))
        })?;
        if !field.governed {
            return Err(invalid(
                format!("equations[{i}].field"),
                format!("field `{}` is constrained, not governed; it cannot carry an equation", eq.field),
            ));
        }
        if spec.equations.iter().filter(|e| e.field == eq.field).count() > 1 {
            return Err(invalid(
                format!("equations[{i}].field"),
                format!("field `{}` has more than one equation", eq.field),
            ));
        }
        if eq.terms.is_empty() {
            return Err(invalid(format!("equations[{i}].terms"), "an equation needs at least one operator term"));
        }
        validate_dependency_set(&eq.rhs_depends_on, format!("equations[{i}].rhs_depends_on"))?;
        for (j, term) in eq.terms.iter().enumerate() {
            validate_term(spec, term, i, j)?;
        }
    }
    for f in spec.governed_fields() {
        let n = spec.equations.iter().filter(|e| e.field == f.name).count();
        if n != 1 {
            return Err(invalid(
                "equations",
                format!("governed field `{}` must have exactly one equation, found {n}", f.name),
            ));
        }
    }
    Ok(())
}

fn validate_term(spec: &ProblemSpec, term: &OperatorTerm, eq_idx: usize, term_idx: usize) -> Result<(), SpecError> {
    let path = format!("equations[{eq_idx}].terms[{term_idx}]");
    if term.order > 2 {
        return Err(unsupported(
            format!("{path}.order"),
            format!("derivative order {} exceeds the supported maximum of 2", term.order),
        ));
    }
    let expected_axes = term.order as usize;
    if term.axes.len() != expected_axes {
        return Err(invalid(
            format!("{path}.axes"),
            format!("an order-{} term takes exactly {} axis name(s), got {}", term.order, expected_axes, term.axes.len()),
        ));
    }
    for (k, axis) in term.axes.iter().enumerate() {
        let ok = axis == "t" || spec.spatial_axes().contains(&axis.as_str());
        if !ok {
            return Err(invalid(
                format!("{path}.axes[{k}]"),
                format!("axis `{axis}` is not declared for a {}-dimensional domain (valid: t, {})",
                    spec.domain.dim, spec.spatial_axes().join(", ")),
            ));
        }
    }
    validate_dependency_set(&term.coeff.depends_on, format!("{path}.coeff.depends_on"))?;
    if term.coeff.is_constant() {
        match term.coeff.value {
            Some(v) if v.is_finite() => {}
            _ => {
                return Err(invalid(
                    format!("{path}.coeff.value"),
                    "a constant coefficient must supply a finite value",
                ));
            }
        }
    }
    if term.order == 2 && term.coeff.value.is_none() {
        return Err(invalid(
            format!("{path}.coeff.value"),
            "order-2 coefficients must supply a representative value for classification",
        ));
    }
    Ok(())
}

fn validate_dependency_set(set: &DependencySet, path: String) -> Result<(), SpecError> {
    if set.contains(&Dependency::None) && set.len() > 1 {
        return Err(invalid(path, "`none` cannot be combined with other dependencies; use an empty list"));
    }
    Ok(())
}
