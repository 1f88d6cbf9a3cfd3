//! Source/target correspondence checks, speedup classification and
//! validation reports.
//!
//! A *simulation* report is about the exemplar system being manipulated and
//! carries internal checks only. An *emulation* report additionally claims
//! that the exemplar is probative about a target class, which requires at
//! least one external check. Reports that break either rule are rejected
//! rather than reinterpreted.

use serde::{Deserialize, Serialize};

use crate::hamiltonians::{map_network, Hamiltonian, MappingRecord};
use crate::linalg::{hermitian_eigenvalues, hermitian_eigh};
use crate::{CVector, Error, Result};

/// Schema tag written into every serialized report.
pub const REPORT_SCHEMA: &str = "qanalog.validation/1";

pub const TAG_INTERNAL: &str = "internally valid";
pub const TAG_EXTERNAL: &str = "externally valid";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Isomorphism,
    Approximation,
}

/// Identifies a Hamiltonian by content hash.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianRef {
    pub fingerprint: String,
    pub dim: usize,
}

impl HamiltonianRef {
    pub fn of(h: &Hamiltonian) -> Self {
        HamiltonianRef { fingerprint: h.fingerprint(), dim: h.dim() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceCheck {
    pub kind: CheckKind,
    pub inputs: Vec<HamiltonianRef>,
    pub metric: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Spectral norm of `H_full - H_reduced`, reported alongside the
    /// state-set residual for approximation checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_norm: Option<f64>,
    #[serde(default)]
    pub description: String,
}

impl CorrespondenceCheck {
    pub fn new(kind: CheckKind, inputs: Vec<HamiltonianRef>, metric: f64, tolerance: f64) -> Result<Self> {
        if !(metric >= 0.0 && metric.is_finite()) {
            return Err(Error::param("metric", format!("must be finite and >= 0, got {metric}")));
        }
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(Error::param("tolerance", format!("must be finite and >= 0, got {tolerance}")));
        }
        Ok(CorrespondenceCheck {
            kind,
            inputs,
            metric,
            tolerance,
            passed: metric <= tolerance,
            operator_norm: None,
            description: String::new(),
        })
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    fn is_consistent(&self) -> bool {
        self.metric >= 0.0
            && self.metric.is_finite()
            && self.tolerance >= 0.0
            && self.passed == (self.metric <= self.tolerance)
    }
}

/// Compares `h_a` with `h_b` carried through `rec`:
/// `max |H_a - map_network(H_b, rec)|`.
pub fn check_isomorphism(
    h_a: &Hamiltonian,
    h_b: &Hamiltonian,
    rec: &MappingRecord,
    tol: f64,
) -> Result<CorrespondenceCheck> {
    if h_a.dim() != h_b.dim() {
        return Err(Error::DimensionMismatch { expected: h_a.dim(), actual: h_b.dim() });
    }
    let mapped = map_network(h_b, rec)?;
    let metric = h_a.max_abs_diff(&mapped)?;
    Ok(CorrespondenceCheck::new(
        CheckKind::Isomorphism,
        vec![HamiltonianRef::of(h_a), HamiltonianRef::of(h_b)],
        metric,
        tol,
    )?
    .with_description(format!(
        "entrywise distance under bijection {:?}, unit scale {}",
        rec.site_bijection(),
        rec.unit_scale()
    )))
}

/// Largest relative residual `‖(H_full - H_reduced)ψ‖ / ‖H_reduced ψ‖` over
/// `states`, falling back to the absolute residual when `H_reduced ψ = 0`.
pub fn approximation_bound(
    h_full: &Hamiltonian,
    h_reduced: &Hamiltonian,
    states: &[CVector],
    tol: f64,
) -> Result<CorrespondenceCheck> {
    if h_full.dim() != h_reduced.dim() {
        return Err(Error::DimensionMismatch { expected: h_reduced.dim(), actual: h_full.dim() });
    }
    if states.is_empty() {
        return Err(Error::param("state_set", "needs at least one state"));
    }
    let diff = h_full.matrix() - h_reduced.matrix();
    let mut metric: f64 = 0.0;
    for psi in states {
        if psi.len() != h_full.dim() {
            return Err(Error::DimensionMismatch { expected: h_full.dim(), actual: psi.len() });
        }
        let residual = (&diff * psi).norm();
        let reference = (h_reduced.matrix() * psi).norm();
        let r = if reference > 0.0 { residual / reference } else { residual };
        metric = metric.max(r);
    }
    let operator_norm = hermitian_eigenvalues(&diff).into_iter().map(f64::abs).fold(0.0, f64::max);
    let mut check = CorrespondenceCheck::new(
        CheckKind::Approximation,
        vec![HamiltonianRef::of(h_full), HamiltonianRef::of(h_reduced)],
        metric,
        tol,
    )?
    .with_description(format!("relative residual over {} states", states.len()));
    check.operator_norm = Some(operator_norm);
    Ok(check)
}

/// The `k` lowest eigenstates of `h`, the default state set for
/// [`approximation_bound`].
pub fn lowest_eigenstates(h: &Hamiltonian, k: usize) -> Result<Vec<CVector>> {
    if k == 0 || k > h.dim() {
        return Err(Error::param("k", format!("need 1 <= k <= {}, got {k}", h.dim())));
    }
    let (_, vectors) = hermitian_eigh(h.matrix());
    Ok((0..k).map(|j| vectors.column(j).into_owned()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeedupAnswers {
    pub hardness_proof: bool,
    pub efficient_classical_known: bool,
    pub scalable_accuracy: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeedupClass {
    class_id: u8,
    pub justification: String,
}

impl SpeedupClass {
    pub fn new(class_id: u8, justification: impl Into<String>) -> Result<Self> {
        if !(1..=4).contains(&class_id) {
            return Err(Error::param("class_id", format!("must be 1..=4, got {class_id}")));
        }
        Ok(SpeedupClass { class_id, justification: justification.into() })
    }

    pub fn class_id(&self) -> u8 {
        self.class_id
    }
}

pub fn classify_speedup(answers: SpeedupAnswers) -> SpeedupClass {
    let (id, why) = if answers.hardness_proof {
        (1, "the simulated problem is proven strictly harder than classically simulable problems")
    } else if !answers.efficient_classical_known && answers.scalable_accuracy {
        (2, "no efficient classical algorithm is known and the simulator scales without losing accuracy")
    } else if !answers.efficient_classical_known {
        (3, "no efficient classical algorithm is known; scalability of the simulator is unknown")
    } else {
        (4, "efficient classical algorithms exist; only the resource scaling favours the simulator")
    };
    SpeedupClass { class_id: id, justification: why.to_string() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Simulation,
    Emulation,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Narrative {
    /// The system being manipulated.
    pub source: String,
    /// The system or class the experiment is meant to inform.
    pub target: String,
    pub notes: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    pub role: Role,
    pub internal_checks: Vec<CorrespondenceCheck>,
    pub external_checks: Vec<CorrespondenceCheck>,
    pub speedup: SpeedupClass,
    pub narrative: Narrative,
    pub tags: Vec<String>,
}

impl ValidationReport {
    /// Re-checks every report invariant, e.g. after deserialization.
    pub fn verify(&self) -> Result<()> {
        if self.schema != REPORT_SCHEMA {
            return Err(Error::ReportRejected(format!("unknown schema {:?}", self.schema)));
        }
        let rebuilt = build_report(
            self.role,
            self.internal_checks.clone(),
            self.external_checks.clone(),
            self.speedup.clone(),
            self.narrative.clone(),
        )?;
        if rebuilt.tags != self.tags {
            return Err(Error::ReportRejected(format!(
                "tags {:?} do not follow from the checks (expected {:?})",
                self.tags, rebuilt.tags
            )));
        }
        Ok(())
    }

    pub fn internally_valid(&self) -> bool {
        self.tags.iter().any(|t| t == TAG_INTERNAL)
    }

    pub fn externally_valid(&self) -> bool {
        self.tags.iter().any(|t| t == TAG_EXTERNAL)
    }
}

pub fn build_report(
    role: Role,
    internal_checks: Vec<CorrespondenceCheck>,
    external_checks: Vec<CorrespondenceCheck>,
    speedup: SpeedupClass,
    narrative: Narrative,
) -> Result<ValidationReport> {
    if internal_checks.is_empty() {
        return Err(Error::ReportRejected("a report needs at least one internal check".into()));
    }
    match role {
        Role::Simulation if !external_checks.is_empty() => {
            return Err(Error::ReportRejected(
                "simulation reports cannot carry external checks; request role = emulation".into(),
            ));
        }
        Role::Emulation if external_checks.is_empty() => {
            return Err(Error::ReportRejected(
                "emulation reports need at least one external check; request role = simulation to report on the exemplar alone".into(),
            ));
        }
        _ => {}
    }
    if let Some(bad) = internal_checks.iter().chain(&external_checks).find(|c| !c.is_consistent()) {
        return Err(Error::ReportRejected(format!(
            "check with metric {} and tolerance {} has inconsistent pass flag",
            bad.metric, bad.tolerance
        )));
    }
    if !(1..=4).contains(&speedup.class_id) {
        return Err(Error::ReportRejected(format!("speedup class {} out of range", speedup.class_id)));
    }
    let mut tags = Vec::new();
    if internal_checks.iter().all(|c| c.passed) {
        tags.push(TAG_INTERNAL.to_string());
    }
    if !external_checks.is_empty() && external_checks.iter().all(|c| c.passed) {
        tags.push(TAG_EXTERNAL.to_string());
    }
    Ok(ValidationReport {
        schema: REPORT_SCHEMA.to_string(),
        role,
        internal_checks,
        external_checks,
        speedup,
        narrative,
        tags,
    })
}
