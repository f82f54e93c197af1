//! The decision walk: global hardware/scale gate first, then per-field PDE
//! classification down to a scheme, with every verdict recorded in an
//! auditable trail.
//!
//! Node vocabulary: P-nodes evaluate something (P1 hardware scale, P2 length
//! scales, P3 PDE type, P4 linearity), D-nodes decide a branch (D1 global
//! discontinuous override, D2 type branch, D3 domain regularity, D4
//! linearity branch, D5 per-field loop control). Trails start at P1 and end
//! at the node that emitted the scheme; D5 is pure loop control and never
//! appears in a trail.

use crate::classifier::{
    classify_field, classify_hardware, evaluate_multiscale, ClassifyError, PdeClassification,
};
use crate::problem_spec::{Geometry, ProblemSpec};

#[derive(Debug, thiserror::Error)]
pub enum SelectError {
    #[error("field `{field}`: {source}")]
    Classify {
        field: String,
        #[source]
        source: ClassifyError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Fdm,
    Fvm,
    Cgm,
    Dgm,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Fdm => "FDM",
            Scheme::Fvm => "FVM",
            Scheme::Cgm => "CGM",
            Scheme::Dgm => "DGM",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s.to_ascii_uppercase().as_str() {
            "FDM" => Some(Scheme::Fdm),
            "FVM" => Some(Scheme::Fvm),
            "CGM" => Some(Scheme::Cgm),
            "DGM" => Some(Scheme::Dgm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeId {
    P1,
    P2,
    P3,
    P4,
    D1,
    D2,
    D3,
    D4,
    D5,
}

impl NodeId {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeId::P1 => "P1",
            NodeId::P2 => "P2",
            NodeId::P3 => "P3",
            NodeId::P4 => "P4",
            NodeId::D1 => "D1",
            NodeId::D2 => "D2",
            NodeId::D3 => "D3",
            NodeId::D4 => "D4",
            NodeId::D5 => "D5",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrailEntry {
    pub node: NodeId,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeAssignment {
    pub field: String,
    pub scheme: Scheme,
    pub trail: Vec<TrailEntry>,
    /// Absent when the global D1 override skipped per-field classification.
    pub classification: Option<PdeClassification>,
}

impl SchemeAssignment {
    pub fn verdict_for(&self, node: NodeId) -> Option<&str> {
        self.trail.iter().find(|e| e.node == node).map(|e| e.verdict.as_str())
    }

    /// Compact `NODE:verdict;...` rendering used in CSV output.
    pub fn trail_string(&self) -> String {
        self.trail
            .iter()
            .map(|e| format!("{}:{}", e.node.as_str(), e.verdict))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorConfig {
    /// CPU worker count at which D1 flips to the massively-parallel branch.
    pub worker_threshold: u32,
    /// Largest/smallest length-scale ratio that counts as multiscale.
    pub multiscale_ratio: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig { worker_threshold: 50, multiscale_ratio: 100.0 }
    }
}

/// Walk the decision graph for every governed field, in declaration order.
pub fn select_schemes(
    spec: &ProblemSpec,
    config: &SelectorConfig,
) -> Result<Vec<SchemeAssignment>, SelectError> {
    let hw = classify_hardware(&spec.hardware, config.worker_threshold);
    let multiscale = evaluate_multiscale(&spec.scales, config.multiscale_ratio);
    let override_all = hw.massively_parallel || multiscale;

    let prefix = vec![
        TrailEntry { node: NodeId::P1, verdict: hw.reason.as_str().to_string() },
        TrailEntry {
            node: NodeId::P2,
            verdict: if multiscale { "multiscale" } else { "single_scale" }.to_string(),
        },
        TrailEntry {
            node: NodeId::D1,
            verdict: if override_all { "yes" } else { "no" }.to_string(),
        },
    ];

    let mut out = Vec::new();
    for field in spec.governed_fields() {
        if override_all {
            out.push(SchemeAssignment {
                field: field.name.clone(),
                scheme: Scheme::Dgm,
                trail: prefix.clone(),
                classification: None,
            });
            continue;
        }
        let cls = classify_field(spec, &field.name)
            .map_err(|source| SelectError::Classify { field: field.name.clone(), source })?;
        let mut trail = prefix.clone();
        trail.push(TrailEntry { node: NodeId::P3, verdict: cls.pde_type.as_str().to_string() });
        let scheme = if cls.pde_type.is_hyperbolic() {
            trail.push(TrailEntry { node: NodeId::D2, verdict: "hyperbolic".to_string() });
            trail.push(TrailEntry { node: NodeId::P4, verdict: cls.linearity.as_str().to_string() });
            trail.push(TrailEntry { node: NodeId::D4, verdict: cls.linearity.as_str().to_string() });
            use crate::classifier::Linearity::*;
            match cls.linearity {
                Linear | Semilinear => Scheme::Dgm,
                Quasilinear | FullyNonlinear => Scheme::Fvm,
            }
        } else {
            trail.push(TrailEntry { node: NodeId::D2, verdict: "parabolic_or_elliptic".to_string() });
            match spec.domain.geometry {
                Geometry::CartesianRegular => {
                    trail.push(TrailEntry { node: NodeId::D3, verdict: "cartesian".to_string() });
                    Scheme::Fdm
                }
                Geometry::Irregular => {
                    trail.push(TrailEntry { node: NodeId::D3, verdict: "irregular".to_string() });
                    Scheme::Cgm
                }
            }
        };
        out.push(SchemeAssignment { field: field.name.clone(), scheme, trail, classification: Some(cls) });
    }
    Ok(out)
}

/// Table column for D2 as decision summaries print it: the fine-grained
/// family of the classified type, or n.a. under the D1 override.
pub fn d2_display(assignment: &SchemeAssignment) -> &'static str {
    match &assignment.classification {
        Some(c) => c.pde_type.family(),
        None => "n.a.",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_spec::{
        Architecture, CoefficientDecl, Dependency, DomainSpec, FieldDecl, FieldEquation, Geometry,
        HardwareConfig, OperatorTerm, ProblemSpec, ScaleDecl, TensorRank,
    };
    use std::collections::BTreeSet;

    fn scalar_field(name: &str) -> FieldDecl {
        FieldDecl {
            name: name.into(),
            rank: TensorRank::Scalar,
            governed: true,
            constraint: None,
            continuity: None,
        }
    }

    fn term(order: u8, axes: &[&str], coeff: CoefficientDecl) -> OperatorTerm {
        OperatorTerm { order, axes: axes.iter().map(|s| s.to_string()).collect(), coeff }
    }

    fn heat_spec(geometry: Geometry, workers: u32, arch: Architecture) -> ProblemSpec {
        ProblemSpec {
            fields: vec![scalar_field("u")],
            equations: vec![FieldEquation {
                field: "u".into(),
                terms: vec![
                    term(1, &["t"], CoefficientDecl::constant(1.0)),
                    term(2, &["x", "x"], CoefficientDecl::constant(-1.0)),
                    term(2, &["y", "y"], CoefficientDecl::constant(-1.0)),
                ],
                rhs_depends_on: BTreeSet::new(),
            }],
            domain: DomainSpec {
                dim: 2,
                extents: vec![[0.0, 1.0], [0.0, 1.0]],
                geometry,
                has_holes: false,
            },
            hardware: HardwareConfig { workers, arch, memory_gb: 16.0 },
            scales: ScaleDecl { lengths: vec![1.0], multiscale: None },
            method: None,
        }
    }

    fn advection_spec(workers: u32) -> ProblemSpec {
        let mut spec = heat_spec(Geometry::CartesianRegular, workers, Architecture::Cpu);
        spec.equations[0].terms = vec![
            term(1, &["t"], CoefficientDecl::constant(1.0)),
            term(1, &["x"], CoefficientDecl::constant(1.0)),
            term(1, &["y"], CoefficientDecl::constant(1.0)),
        ];
        spec
    }

    #[test]
    fn parabolic_cartesian_goes_fdm() {
        let spec = heat_spec(Geometry::CartesianRegular, 8, Architecture::Cpu);
        let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].scheme, Scheme::Fdm);
        assert_eq!(out[0].verdict_for(NodeId::D1), Some("no"));
        assert_eq!(out[0].verdict_for(NodeId::P3), Some("parabolic"));
        assert_eq!(out[0].verdict_for(NodeId::D3), Some("cartesian"));
        assert_eq!(out[0].verdict_for(NodeId::D4), None);
    }

    #[test]
    fn parabolic_irregular_goes_cgm() {
        let spec = heat_spec(Geometry::Irregular, 8, Architecture::Cpu);
        let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(out[0].scheme, Scheme::Cgm);
        assert_eq!(out[0].verdict_for(NodeId::D3), Some("irregular"));
    }

    #[test]
    fn linear_hyperbolic_goes_dgm() {
        let spec = advection_spec(8);
        let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(out[0].scheme, Scheme::Dgm);
        assert_eq!(out[0].verdict_for(NodeId::P3), Some("hyperbolic_first_order"));
        assert_eq!(out[0].verdict_for(NodeId::D2), Some("hyperbolic"));
        assert_eq!(out[0].verdict_for(NodeId::D4), Some("linear"));
        assert_eq!(out[0].verdict_for(NodeId::D3), None);
    }

    #[test]
    fn quasilinear_hyperbolic_goes_fvm() {
        // wave operator with solution-dependent stiffness
        let mut spec = heat_spec(Geometry::CartesianRegular, 8, Architecture::Cpu);
        spec.equations[0].terms = vec![
            term(2, &["t", "t"], CoefficientDecl::constant(1.0)),
            term(
                2,
                &["x", "x"],
                CoefficientDecl {
                    value: Some(-1.0),
                    depends_on: [Dependency::Solution].into_iter().collect(),
                },
            ),
        ];
        let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(out[0].scheme, Scheme::Fvm);
        assert_eq!(out[0].verdict_for(NodeId::P3), Some("hyperbolic_second_order"));
        assert_eq!(out[0].verdict_for(NodeId::D4), Some("quasilinear"));
    }

    #[test]
    fn continuity_hint_bypasses_first_order_refusal() {
        // Burgers-like flux: first-order coefficient depends on the solution,
        // which the plain path refuses; the declared discontinuity hint
        // routes it to the hyperbolic branch and D4 sends it to FVM.
        let mut spec = advection_spec(8);
        spec.fields[0].continuity = Some(crate::problem_spec::ContinuityExpectation::Discontinuous);
        spec.equations[0].terms[1].coeff =
            CoefficientDecl { value: None, depends_on: [Dependency::Solution].into_iter().collect() };
        let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(out[0].scheme, Scheme::Fvm);

        // Without the hint the same spec is refused with the field named.
        spec.fields[0].continuity = None;
        let err = select_schemes(&spec, &SelectorConfig::default()).unwrap_err();
        let SelectError::Classify { field, source } = err;
        assert_eq!(field, "u");
        assert_eq!(source, ClassifyError::NonConstantFirstOrderCoefficients);
    }

    #[test]
    fn d1_override_dominates_everything() {
        for make in [
            || heat_spec(Geometry::CartesianRegular, 128, Architecture::Cpu),
            || heat_spec(Geometry::Irregular, 1, Architecture::Gpu),
            || {
                let mut s = heat_spec(Geometry::CartesianRegular, 8, Architecture::Cpu);
                s.scales.lengths = vec![1e-7, 1e-5];
                s
            },
        ] {
            let spec = make();
            let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
            for a in &out {
                assert_eq!(a.scheme, Scheme::Dgm);
                assert_eq!(a.trail.last().unwrap().node, NodeId::D1);
                assert_eq!(a.verdict_for(NodeId::D1), Some("yes"));
                assert!(a.classification.is_none());
            }
        }
    }

    #[test]
    fn worker_threshold_is_a_knob() {
        let spec = heat_spec(Geometry::CartesianRegular, 30, Architecture::Cpu);
        let strict = SelectorConfig { worker_threshold: 16, ..SelectorConfig::default() };
        let out = select_schemes(&spec, &strict).unwrap();
        assert_eq!(out[0].scheme, Scheme::Dgm);
        let default = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(default[0].scheme, Scheme::Fdm);
    }

    #[test]
    fn trails_start_at_p1_and_end_at_an_emitting_node() {
        for spec in [
            heat_spec(Geometry::CartesianRegular, 8, Architecture::Cpu),
            heat_spec(Geometry::Irregular, 8, Architecture::Cpu),
            advection_spec(8),
            advection_spec(128),
        ] {
            let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
            for a in &out {
                assert_eq!(a.trail.first().unwrap().node, NodeId::P1);
                let last = a.trail.last().unwrap().node;
                assert!(matches!(last, NodeId::D1 | NodeId::D3 | NodeId::D4), "trail ended at {last:?}");
            }
        }
    }

    #[test]
    fn selection_is_deterministic() {
        let spec = heat_spec(Geometry::Irregular, 8, Architecture::Cpu);
        let a = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        let b = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trail_string_is_compact() {
        let spec = advection_spec(8);
        let out = select_schemes(&spec, &SelectorConfig::default()).unwrap();
        let s = out[0].trail_string();
        assert_eq!(
            s,
            "P1:below_threshold;P2:single_scale;D1:no;P3:hyperbolic_first_order;D2:hyperbolic;P4:linear;D4:linear"
        );
    }
}
