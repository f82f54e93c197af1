//! Per-field classification: PDE type from the symmetrized coefficient
//! matrix of the second-order terms, linearity from coefficient
//! dependencies, plus the hardware-scale and multiscale context tests.

use crate::problem_spec::{
    Architecture, ContinuityExpectation, Dependency, FieldEquation, HardwareConfig, ProblemSpec,
    ScaleDecl,
};

/// Relative threshold below which an eigenvalue counts as zero, and below
/// which an asymmetry in the coefficient matrix is ignored.
pub const EPS_ZERO: f64 = 1e-12;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClassifyError {
    #[error("equation has no second-order terms; use the first-order path")]
    NoSecondOrderTerms,
    #[error("all coefficient-matrix eigenvalues vanish; the operator is degenerate")]
    DegenerateAllZero,
    #[error("first-order coefficients are not constant; classification requires expert input")]
    NonConstantFirstOrderCoefficients,
    #[error("order-2 term lacks a representative coefficient value")]
    MissingCoefficientValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeType {
    Elliptic,
    Parabolic,
    HyperbolicSecondOrder,
    HyperbolicFirstOrder,
}

impl PdeType {
    pub fn as_str(&self) -> &'static str {
        match self {
            PdeType::Elliptic => "elliptic",
            PdeType::Parabolic => "parabolic",
            PdeType::HyperbolicSecondOrder => "hyperbolic_second_order",
            PdeType::HyperbolicFirstOrder => "hyperbolic_first_order",
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, PdeType::HyperbolicFirstOrder | PdeType::HyperbolicSecondOrder)
    }

    /// Coarse family name as it appears in decision tables.
    pub fn family(&self) -> &'static str {
        match self {
            PdeType::Elliptic => "elliptic",
            PdeType::Parabolic => "parabolic",
            PdeType::HyperbolicFirstOrder | PdeType::HyperbolicSecondOrder => "hyperbolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Linearity {
    Linear,
    Semilinear,
    Quasilinear,
    FullyNonlinear,
}

impl Linearity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Linearity::Linear => "linear",
            Linearity::Semilinear => "semilinear",
            Linearity::Quasilinear => "quasilinear",
            Linearity::FullyNonlinear => "fully_nonlinear",
        }
    }
}

/// Symmetrized coefficient matrix of the order-2 terms over the axes the
/// equation actually references, time first.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub axes: Vec<String>,
    /// Row-major dense storage, `axes.len()` square.
    pub a: Vec<f64>,
}

impl CoefficientMatrix {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.dim() + j]
    }
}

/// Collect the order-2 structure of `eq` into a symmetric matrix. A term on
/// axes (i, j) contributes its representative value split evenly across
/// a_ij and a_ji (the full value on the diagonal).
pub fn build_coefficient_matrix(eq: &FieldEquation) -> Result<CoefficientMatrix, ClassifyError> {
    if !eq.has_second_order_terms() {
        return Err(ClassifyError::NoSecondOrderTerms);
    }
    let mut axes: Vec<String> = Vec::new();
    for name in ["t", "x", "y", "z"] {
        if eq.terms.iter().any(|t| t.axes.iter().any(|a| a == name)) {
            axes.push(name.to_string());
        }
    }
    let n = axes.len();
    let idx = |name: &str| axes.iter().position(|a| a == name).unwrap();
    let mut a = vec![0.0; n * n];
    for term in eq.terms.iter().filter(|t| t.order == 2) {
        let v = term.coeff.value.ok_or(ClassifyError::MissingCoefficientValue)?;
        let i = idx(&term.axes[0]);
        let j = idx(&term.axes[1]);
        if i == j {
            a[i * n + i] += v;
        } else {
            a[i * n + j] += v / 2.0;
            a[j * n + i] += v / 2.0;
        }
    }
    Ok(CoefficientMatrix { axes, a })
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn symmetric_eigenvalues(m: &CoefficientMatrix) -> Vec<f64> {
    let n = m.dim();
    // Symmetrize first so callers may hand in raw (possibly lopsided) data.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m.a[i * n + j] + m.a[j * n + i]);
        }
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[p * n + k] = a[k * n + p];
                        a[k * n + q] = s * akp + c * akq;
                        a[q * n + k] = a[k * n + q];
                    }
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Second-order type test on the eigenvalue signs. An eigenvalue counts as
/// zero when its magnitude is below `EPS_ZERO` relative to the largest.
pub fn classify_second_order(m: &CoefficientMatrix) -> Result<(PdeType, Vec<f64>), ClassifyError> {
    let eig = symmetric_eigenvalues(m);
    let max_abs = eig.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()));
    if max_abs == 0.0 {
        return Err(ClassifyError::DegenerateAllZero);
    }
    let tol = EPS_ZERO * max_abs;
    let pos = eig.iter().filter(|e| **e > tol).count();
    let neg = eig.iter().filter(|e| **e < -tol).count();
    let zero = eig.len() - pos - neg;
    let ty = if pos > 0 && neg > 0 {
        PdeType::HyperbolicSecondOrder
    } else if zero > 0 {
        PdeType::Parabolic
    } else {
        PdeType::Elliptic
    };
    Ok((ty, eig))
}

/// First-order equations with constant real coefficients take the
/// discontinuity-capable hyperbolic path. Anything solution-dependent at
/// first order is refused rather than guessed at.
pub fn classify_first_order(eq: &FieldEquation) -> Result<PdeType, ClassifyError> {
    debug_assert!(!eq.has_second_order_terms());
    let all_constant = eq.terms.iter().filter(|t| t.order == 1).all(|t| t.coeff.is_constant());
    if all_constant {
        Ok(PdeType::HyperbolicFirstOrder)
    } else {
        Err(ClassifyError::NonConstantFirstOrderCoefficients)
    }
}

const SOLUTION_LIKE: [Dependency; 3] =
    [Dependency::Solution, Dependency::LowerDerivatives, Dependency::HighestDerivatives];

/// Linearity ladder over the declared dependency sets: the coefficients of
/// the highest-order terms decide between fully nonlinear / quasilinear,
/// then solution-dependence anywhere lower (or on the right-hand side)
/// separates semilinear from linear.
pub fn classify_linearity(eq: &FieldEquation) -> Linearity {
    let top = eq.max_order();
    let top_terms = eq.terms.iter().filter(|t| t.order == top);
    for term in top_terms {
        if term.coeff.depends_on.contains(&Dependency::HighestDerivatives) {
            return Linearity::FullyNonlinear;
        }
    }
    for term in eq.terms.iter().filter(|t| t.order == top) {
        if term.coeff.depends_on_any(&[Dependency::Solution, Dependency::LowerDerivatives]) {
            return Linearity::Quasilinear;
        }
    }
    let lower_solution_dep = eq
        .terms
        .iter()
        .filter(|t| t.order < top)
        .any(|t| t.coeff.depends_on_any(&SOLUTION_LIKE));
    if lower_solution_dep || SOLUTION_LIKE.iter().any(|d| eq.rhs_depends_on.contains(d)) {
        return Linearity::Semilinear;
    }
    Linearity::Linear
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardwareReason {
    GpuArchitecture,
    WorkerThreshold,
    BelowThreshold,
}

impl HardwareReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            HardwareReason::GpuArchitecture => "gpu_architecture",
            HardwareReason::WorkerThreshold => "worker_threshold",
            HardwareReason::BelowThreshold => "below_threshold",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardwareScale {
    pub massively_parallel: bool,
    pub reason: HardwareReason,
}

/// A target counts as massively parallel on a GPU architecture or at or
/// above `worker_threshold` workers.
pub fn classify_hardware(hw: &HardwareConfig, worker_threshold: u32) -> HardwareScale {
    if hw.arch == Architecture::Gpu {
        HardwareScale { massively_parallel: true, reason: HardwareReason::GpuArchitecture }
    } else if hw.workers >= worker_threshold {
        HardwareScale { massively_parallel: true, reason: HardwareReason::WorkerThreshold }
    } else {
        HardwareScale { massively_parallel: false, reason: HardwareReason::BelowThreshold }
    }
}

/// Multiscale test: an explicit override wins; otherwise the spread between
/// the largest and smallest declared length scale is compared to
/// `ratio_threshold` (inclusive).
pub fn evaluate_multiscale(scales: &ScaleDecl, ratio_threshold: f64) -> bool {
    if let Some(v) = scales.multiscale {
        return v;
    }
    let mut min = f64::INFINITY;
    let mut max = 0.0_f64;
    for l in &scales.lengths {
        min = min.min(*l);
        max = max.max(*l);
    }
    if !min.is_finite() || min <= 0.0 {
        return false;
    }
    max / min >= ratio_threshold
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeClassification {
    pub pde_type: PdeType,
    pub linearity: Linearity,
    /// Ascending eigenvalues of the coefficient matrix; empty on the
    /// first-order path.
    pub eigenvalues: Vec<f64>,
}

/// Full classification of one governed field. A declared discontinuity
/// expectation routes the field to the hyperbolic first-order branch even
/// when its coefficients would otherwise refuse classification.
pub fn classify_field(spec: &ProblemSpec, field_name: &str) -> Result<PdeClassification, ClassifyError> {
    let eq = spec
        .equation_for(field_name)
        .expect("classification runs on governed fields, which carry exactly one equation");
    let linearity = classify_linearity(eq);
    if spec.field(field_name).and_then(|f| f.continuity) == Some(ContinuityExpectation::Discontinuous) {
        return Ok(PdeClassification {
            pde_type: PdeType::HyperbolicFirstOrder,
            linearity,
            eigenvalues: Vec::new(),
        });
    }
    if eq.has_second_order_terms() {
        let m = build_coefficient_matrix(eq)?;
        let (pde_type, eigenvalues) = classify_second_order(&m)?;
        Ok(PdeClassification { pde_type, linearity, eigenvalues })
    } else {
        let pde_type = classify_first_order(eq)?;
        Ok(PdeClassification { pde_type, linearity, eigenvalues: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem_spec::{CoefficientDecl, OperatorTerm};
    use std::collections::BTreeSet;

    fn term(order: u8, axes: &[&str], coeff: CoefficientDecl) -> OperatorTerm {
        OperatorTerm { order, axes: axes.iter().map(|s| s.to_string()).collect(), coeff }
    }

    fn deps(list: &[Dependency]) -> BTreeSet<Dependency> {
        list.iter().copied().collect()
    }

    fn eq_with(terms: Vec<OperatorTerm>, rhs: &[Dependency]) -> FieldEquation {
        FieldEquation { field: "u".into(), terms, rhs_depends_on: deps(rhs) }
    }

    fn matrix(axes: &[&str], a: &[f64]) -> CoefficientMatrix {
        CoefficientMatrix { axes: axes.iter().map(|s| s.to_string()).collect(), a: a.to_vec() }
    }

    #[test]
    fn jacobi_reproduces_closed_form_eigenvalues() {
        let m = matrix(&["x", "y"], &[2.0, 1.0, 1.0, 2.0]);
        let eig = symmetric_eigenvalues(&m);
        assert!((eig[0] - 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);

        let m = matrix(&["x", "y"], &[0.0, 1.0, 1.0, 0.0]);
        let eig = symmetric_eigenvalues(&m);
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 1.0).abs() < 1e-12);

        // Tridiagonal (2,1) matrix: eigenvalues 2 - sqrt(2), 2, 2 + sqrt(2).
        let m = matrix(&["x", "y", "z"], &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let eig = symmetric_eigenvalues(&m);
        let s = 2.0_f64.sqrt();
        assert!((eig[0] - (2.0 - s)).abs() < 1e-12);
        assert!((eig[1] - 2.0).abs() < 1e-12);
        assert!((eig[2] - (2.0 + s)).abs() < 1e-12);
    }

    #[test]
    fn second_order_sign_patterns() {
        let parabolic = matrix(&["t", "x", "y"], &[0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
        let (ty, eig) = classify_second_order(&parabolic).unwrap();
        assert_eq!(ty, PdeType::Parabolic);
        assert_eq!(eig.len(), 3);

        let elliptic = matrix(&["x", "y"], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(classify_second_order(&elliptic).unwrap().0, PdeType::Elliptic);

        let wave = matrix(&["t", "x", "y"], &[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(classify_second_order(&wave).unwrap().0, PdeType::HyperbolicSecondOrder);

        let zero = matrix(&["t", "x"], &[0.0; 4]);
        assert_eq!(classify_second_order(&zero).unwrap_err(), ClassifyError::DegenerateAllZero);
    }

    #[test]
    fn zero_threshold_is_relative() {
        let nearly_zero = matrix(&["x", "y"], &[1.0, 0.0, 0.0, 1e-13]);
        assert_eq!(classify_second_order(&nearly_zero).unwrap().0, PdeType::Parabolic);
        let small_but_nonzero = matrix(&["x", "y"], &[1.0, 0.0, 0.0, 1e-11]);
        assert_eq!(classify_second_order(&small_but_nonzero).unwrap().0, PdeType::Elliptic);
    }

    #[test]
    fn build_matrix_for_reaction_diffusion() {
        // time derivative plus unit-mobility Laplacian, the interface-motion benchmark shape
        let eq = eq_with(
            vec![
                term(1, &["t"], CoefficientDecl::constant(1.0)),
                term(2, &["x", "x"], CoefficientDecl::constant(-1.0)),
                term(2, &["y", "y"], CoefficientDecl::constant(-1.0)),
            ],
            &[Dependency::Solution],
        );
        let m = build_coefficient_matrix(&eq).unwrap();
        assert_eq!(m.axes, vec!["t", "x", "y"]);
        assert_eq!(m.a, vec![0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
        let (ty, _) = classify_second_order(&m).unwrap();
        assert_eq!(ty, PdeType::Parabolic);
        assert_eq!(classify_linearity(&eq), Linearity::Semilinear);
    }

    #[test]
    fn build_matrix_without_time_axis() {
        let eq = eq_with(
            vec![
                term(2, &["x", "x"], CoefficientDecl::constant(1.0)),
                term(2, &["y", "y"], CoefficientDecl::constant(1.0)),
            ],
            &[],
        );
        let m = build_coefficient_matrix(&eq).unwrap();
        assert_eq!(m.axes, vec!["x", "y"]);
        assert_eq!(m.a, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(classify_second_order(&m).unwrap().0, PdeType::Elliptic);
    }

    #[test]
    fn mixed_term_splits_evenly() {
        let eq = eq_with(vec![term(2, &["t", "x"], CoefficientDecl::constant(1.0))], &[]);
        let m = build_coefficient_matrix(&eq).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 0), 0.5);
        assert_eq!(classify_second_order(&m).unwrap().0, PdeType::HyperbolicSecondOrder);
    }

    #[test]
    fn first_order_paths() {
        let adv = eq_with(
            vec![
                term(1, &["t"], CoefficientDecl::constant(1.0)),
                term(1, &["x"], CoefficientDecl::constant(1.0)),
            ],
            &[],
        );
        assert_eq!(classify_first_order(&adv).unwrap(), PdeType::HyperbolicFirstOrder);
        assert_eq!(classify_linearity(&adv), Linearity::Linear);

        let quasi = eq_with(
            vec![term(1, &["x"], CoefficientDecl { value: None, depends_on: deps(&[Dependency::Solution]) })],
            &[],
        );
        assert_eq!(classify_first_order(&quasi).unwrap_err(), ClassifyError::NonConstantFirstOrderCoefficients);
    }

    #[test]
    fn no_second_order_terms_error() {
        let adv = eq_with(vec![term(1, &["x"], CoefficientDecl::constant(1.0))], &[]);
        assert_eq!(build_coefficient_matrix(&adv).unwrap_err(), ClassifyError::NoSecondOrderTerms);
    }

    #[test]
    fn linearity_ladder() {
        let top_on_highest = eq_with(
            vec![term(2, &["x", "x"], CoefficientDecl { value: Some(1.0), depends_on: deps(&[Dependency::HighestDerivatives]) })],
            &[],
        );
        assert_eq!(classify_linearity(&top_on_highest), Linearity::FullyNonlinear);

        let top_on_solution = eq_with(
            vec![term(2, &["x", "x"], CoefficientDecl { value: Some(1.0), depends_on: deps(&[Dependency::Solution]) })],
            &[],
        );
        assert_eq!(classify_linearity(&top_on_solution), Linearity::Quasilinear);

        let top_on_lower = eq_with(
            vec![term(2, &["x", "x"], CoefficientDecl { value: Some(1.0), depends_on: deps(&[Dependency::LowerDerivatives]) })],
            &[],
        );
        assert_eq!(classify_linearity(&top_on_lower), Linearity::Quasilinear);

        let rhs_solution = eq_with(
            vec![term(2, &["x", "x"], CoefficientDecl::constant(1.0))],
            &[Dependency::Solution],
        );
        assert_eq!(classify_linearity(&rhs_solution), Linearity::Semilinear);

        let position_only = eq_with(
            vec![
                term(2, &["x", "x"], CoefficientDecl { value: Some(1.0), depends_on: deps(&[Dependency::Position]) }),
                term(0, &[], CoefficientDecl { value: None, depends_on: deps(&[Dependency::Position]) }),
            ],
            &[Dependency::Position],
        );
        assert_eq!(classify_linearity(&position_only), Linearity::Linear);
    }

    #[test]
    fn lower_order_solution_dependence_is_semilinear() {
        let eq = eq_with(
            vec![
                term(2, &["x", "x"], CoefficientDecl::constant(1.0)),
                term(1, &["x"], CoefficientDecl { value: None, depends_on: deps(&[Dependency::Solution]) }),
            ],
            &[],
        );
        assert_eq!(classify_linearity(&eq), Linearity::Semilinear);
    }

    #[test]
    fn hardware_scale_rules() {
        let cpu = |workers| HardwareConfig { workers, arch: Architecture::Cpu, memory_gb: 16.0 };
        assert_eq!(
            classify_hardware(&cpu(8), 50),
            HardwareScale { massively_parallel: false, reason: HardwareReason::BelowThreshold }
        );
        assert_eq!(
            classify_hardware(&cpu(49), 50),
            HardwareScale { massively_parallel: false, reason: HardwareReason::BelowThreshold }
        );
        assert_eq!(
            classify_hardware(&cpu(50), 50),
            HardwareScale { massively_parallel: true, reason: HardwareReason::WorkerThreshold }
        );
        let gpu = HardwareConfig { workers: 1, arch: Architecture::Gpu, memory_gb: 8.0 };
        assert_eq!(
            classify_hardware(&gpu, 50),
            HardwareScale { massively_parallel: true, reason: HardwareReason::GpuArchitecture }
        );
    }

    #[test]
    fn multiscale_rules() {
        let plain = |lengths: &[f64]| ScaleDecl { lengths: lengths.to_vec(), multiscale: None };
        assert!(evaluate_multiscale(&plain(&[1e-5, 1e-7]), 100.0));
        assert!(!evaluate_multiscale(&plain(&[1.5, 100.0]), 100.0));
        assert!(evaluate_multiscale(&plain(&[1.0, 100.0]), 100.0), "threshold is inclusive");
        let override_no = ScaleDecl { lengths: vec![1e-9, 1.0], multiscale: Some(false) };
        assert!(!evaluate_multiscale(&override_no, 100.0));
        let override_yes = ScaleDecl { lengths: vec![1.0], multiscale: Some(true) };
        assert!(evaluate_multiscale(&override_yes, 100.0));
    }

    #[test]
    fn classification_invariant_under_scaling_and_permutation() {
        let base = vec![0.0, 0.3, 0.0, 0.3, -1.0, 0.1, 0.0, 0.1, -2.0];
        let m = matrix(&["t", "x", "y"], &base);
        let ty = classify_second_order(&m).unwrap().0;
        for c in [1e-6, 0.5, 3.0, 1e6] {
            let scaled: Vec<f64> = base.iter().map(|v| v * c).collect();
            let ms = matrix(&["t", "x", "y"], &scaled);
            assert_eq!(classify_second_order(&ms).unwrap().0, ty, "scale {c}");
        }
        // Reverse the axis order: a -> P a P^T with P the reversal permutation.
        let n = 3;
        let mut rev = vec![0.0; 9];
        for i in 0..n {
            for j in 0..n {
                rev[(n - 1 - i) * n + (n - 1 - j)] = base[i * n + j];
            }
        }
        let mp = matrix(&["y", "x", "t"], &rev);
        assert_eq!(classify_second_order(&mp).unwrap().0, ty);
    }
}
