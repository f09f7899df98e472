//! Product detecting states and the discrimination verdicts built on them.
//!
//! A product detecting state for member k of an ensemble is a product
//! vector (one factor per party) orthogonal to every other member and
//! non-orthogonal to member k; its existence is equivalent to k being
//! conclusively identifiable by local operations. This module decides that
//! existence:
//!
//! - exactly, for ensembles of product states, by enumerating every
//!   assignment of orthogonality constraints to parties
//!   ([`exact_product_detect`]);
//! - compositionally, for derived marking sets whose base members all have
//!   certificates ([`compositional_detect`]);
//! - heuristically, for bipartite ensembles with entangled members, by a
//!   seeded alternating search ([`heuristic_detect`]) whose negative
//!   answers are evidence, never proof.
//!
//! Every certificate emitted by any path is re-verified against the raw
//! ensemble states by [`verify_certificate`] before it is returned.

mod exact;
mod heuristic;

pub use exact::{
    exact_product_detect, BranchFailure, DetectOutcome, ExactInfeasibilityReport, FailureKind,
};
pub use heuristic::heuristic_detect;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ensembles::{Ensemble, EnsembleError};
use crate::marking::{derive_marking_set, DerivedMarkingSet, MarkingError};
use crate::numkernel::{
    hermitian_inner, numerical_rank, tensor_product, NumError, StateVector, ToleranceConfig,
};

/// Floor on the modulus of a certificate's target overlap; anything below
/// is treated as an orthogonal (useless) detector.
pub const TARGET_OVERLAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Marking(#[from] MarkingError),
    #[error("member `{0}` has no per-party product factorization")]
    NonProductMember(String),
    #[error("member `{0}` is mixed")]
    MixedMember(String),
    #[error("{got} branches exceed the cap {cap}")]
    BranchCapExceeded { got: u128, cap: u64 },
    #[error("operation requires a bipartite ensemble, found {0} parties")]
    NotBipartite(usize),
    #[error("missing base certificate for member `{0}`")]
    MissingBaseCertificate(String),
    #[error("composed certificate for `{target}` failed re-verification: {reason}")]
    CompositionFailed { target: String, reason: String },
    #[error("certificate verification failed: {0}")]
    VerificationFailed(String),
}

/// A verified product detecting state for one ensemble member.
#[derive(Clone, Debug)]
pub struct DetectingCertificate {
    pub target_label: String,
    /// One unit vector per party, on that party's factor space.
    pub per_party_vectors: Vec<StateVector>,
    /// max_j≠target |<psi_j | phi>|, measured on re-verification.
    pub max_offtarget_overlap: f64,
    /// |<psi_target | phi>|, measured on re-verification.
    pub target_overlap_modulus: f64,
}

impl DetectingCertificate {
    /// The full-space detector, assembled in the ensemble's factor order.
    pub fn detector_state(&self, e: &Ensemble) -> Result<StateVector, DetectError> {
        Ok(e.structure().assemble_product(&self.per_party_vectors)?)
    }
}

/// Check a candidate detector directly against the ensemble states and
/// emit a certificate when it meets the detecting conditions. This is the
/// single verification path shared by every certificate producer.
pub fn verify_certificate(
    e: &Ensemble,
    target_label: &str,
    per_party_vectors: &[StateVector],
    tol: &ToleranceConfig,
) -> Result<DetectingCertificate, DetectError> {
    let target_idx = e.member_index(target_label)?;
    let phi = e.structure().assemble_product(per_party_vectors)?;
    let mut max_off = 0.0f64;
    let mut target_overlap = 0.0f64;
    for (j, m) in e.members().iter().enumerate() {
        let psi = m
            .pure_state()
            .ok_or_else(|| DetectError::MixedMember(m.label().to_string()))?;
        let ov = hermitian_inner(psi, &phi)?.norm();
        if j == target_idx {
            target_overlap = ov;
        } else {
            max_off = max_off.max(ov);
        }
    }
    if max_off > tol.orth_tol {
        return Err(DetectError::VerificationFailed(format!(
            "off-target overlap {max_off:.3e} exceeds {:.3e}",
            tol.orth_tol
        )));
    }
    if target_overlap < TARGET_OVERLAP_FLOOR {
        return Err(DetectError::VerificationFailed(format!(
            "target overlap {target_overlap:.3e} below the {TARGET_OVERLAP_FLOOR:.0e} floor"
        )));
    }
    Ok(DetectingCertificate {
        target_label: target_label.to_string(),
        per_party_vectors: per_party_vectors.to_vec(),
        max_offtarget_overlap: max_off,
        target_overlap_modulus: target_overlap,
    })
}

/// Report of one alternating-search run.
#[derive(Clone, Debug)]
pub struct HeuristicSearchReport {
    pub target_label: String,
    pub restarts: u32,
    pub seed: u64,
    pub best_target_overlap: f64,
    pub best_offtarget_residual: f64,
    pub verdict: HeuristicVerdict,
}

/// `Found` carries an independently re-verified certificate; `NotFound` is
/// not a nonexistence proof.
#[derive(Clone, Debug)]
pub enum HeuristicVerdict {
    Found(DetectingCertificate),
    NotFound,
}

impl HeuristicSearchReport {
    pub fn found(&self) -> bool {
        matches!(self.verdict, HeuristicVerdict::Found(_))
    }
}

/// Exact evidence that a member admits no product detecting state.
#[derive(Clone, Debug)]
pub enum InfeasibilityEvidence {
    /// Every constraint-to-party assignment failed.
    BranchEnumeration(exact::ExactInfeasibilityReport),
    /// The member lies in the span of the others, so any vector orthogonal
    /// to the rest is orthogonal to it too.
    LinearDependence { span_rank: usize },
}

/// Per-member finding inside a discrimination verdict.
#[derive(Clone, Debug)]
pub enum StateFinding {
    Identifiable(DetectingCertificate),
    NotIdentifiable(InfeasibilityEvidence),
    Unknown { report: Option<HeuristicSearchReport>, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverallVerdict {
    Distinguishable,
    Indistinguishable,
    Undetermined,
}

/// Conclusive-local-discrimination verdict for a full ensemble.
///
/// `Indistinguishable` always rests on exact evidence for at least one
/// member; heuristic failures only ever yield `Undetermined`.
#[derive(Clone, Debug)]
pub struct CLSDVerdict {
    pub per_state: BTreeMap<String, StateFinding>,
    pub overall: OverallVerdict,
}

/// Knobs shared by the verdict pipelines.
#[derive(Clone, Copy, Debug)]
pub struct DetectConfig {
    pub seed: u64,
    pub restarts: u32,
    pub branch_cap: u64,
    pub tol: ToleranceConfig,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self { seed: 42, restarts: 1000, branch_cap: 1 << 20, tol: ToleranceConfig::default() }
    }
}

fn overall_from(per_state: &BTreeMap<String, StateFinding>) -> OverallVerdict {
    if per_state.values().any(|f| matches!(f, StateFinding::NotIdentifiable(_))) {
        OverallVerdict::Indistinguishable
    } else if per_state.values().all(|f| matches!(f, StateFinding::Identifiable(_))) {
        OverallVerdict::Distinguishable
    } else {
        OverallVerdict::Undetermined
    }
}

/// Decide conclusive local discriminability of a pure ensemble.
///
/// Members inside the span of the rest are rejected exactly (no detecting
/// state exists even globally). Product ensembles are decided exactly by
/// branch enumeration; entangled bipartite ensembles fall back to the
/// heuristic and may come back `Undetermined`, never a false
/// `Indistinguishable`.
pub fn clsd_verdict(e: &Ensemble, cfg: &DetectConfig) -> Result<CLSDVerdict, DetectError> {
    let states = e
        .pure_states()
        .ok_or_else(|| DetectError::MixedMember("<mixed body>".to_string()))?;
    let all: Vec<StateVector> = states.iter().map(|s| (*s).clone()).collect();
    let rank_all = numerical_rank(&all, &cfg.tol)?;
    let mut per_state = BTreeMap::new();
    for (k, member) in e.members().iter().enumerate() {
        let others: Vec<StateVector> = all
            .iter()
            .enumerate()
            .filter_map(|(j, s)| (j != k).then(|| s.clone()))
            .collect();
        let finding = if !others.is_empty() {
            let rank_others = numerical_rank(&others, &cfg.tol)?;
            if rank_others == rank_all {
                Some(StateFinding::NotIdentifiable(InfeasibilityEvidence::LinearDependence {
                    span_rank: rank_others,
                }))
            } else {
                None
            }
        } else {
            None
        };
        let finding = match finding {
            Some(f) => f,
            None => decide_single_member(e, member.label(), cfg)?,
        };
        per_state.insert(member.label().to_string(), finding);
    }
    let overall = overall_from(&per_state);
    Ok(CLSDVerdict { per_state, overall })
}

fn decide_single_member(
    e: &Ensemble,
    label: &str,
    cfg: &DetectConfig,
) -> Result<StateFinding, DetectError> {
    if e.len() == 1 {
        // A singleton is detected by itself (or its product factors).
        let member = &e.members()[0];
        if let Some(factors) = member.product_factors() {
            let cert = verify_certificate(e, label, factors, &cfg.tol)?;
            return Ok(StateFinding::Identifiable(cert));
        }
    }
    if e.all_product() {
        return Ok(match exact_product_detect(e, label, cfg.branch_cap, &cfg.tol)? {
            DetectOutcome::Feasible(cert) => StateFinding::Identifiable(cert),
            DetectOutcome::Infeasible(report) => {
                StateFinding::NotIdentifiable(InfeasibilityEvidence::BranchEnumeration(report))
            }
        });
    }
    if e.structure().is_bipartite() {
        let report = heuristic_detect(e, label, cfg.restarts, cfg.seed, &cfg.tol)?;
        return Ok(match report.verdict.clone() {
            HeuristicVerdict::Found(cert) => StateFinding::Identifiable(cert),
            HeuristicVerdict::NotFound => StateFinding::Unknown {
                report: Some(report),
                reason: "heuristic search exhausted its restarts".into(),
            },
        });
    }
    Ok(StateFinding::Unknown {
        report: None,
        reason: "no exact or heuristic method applies (entangled, non-bipartite)".into(),
    })
}

/// Marking verdict for the m-fold derived set.
#[derive(Clone, Debug)]
pub struct ClsmOutcome {
    pub derived: DerivedMarkingSet,
    pub verdict: CLSDVerdict,
    /// Complete base certificate map when the compositional path succeeded.
    pub base_certificates: Option<BTreeMap<String, DetectingCertificate>>,
}

/// Decide m-fold conclusive local markability.
///
/// When every base member has an exact certificate the derived set is
/// settled compositionally (slot-wise tensor detectors, re-verified);
/// otherwise each derived member is decided like any other ensemble.
pub fn clsm_verdict(e: &Ensemble, m: usize, cfg: &DetectConfig) -> Result<ClsmOutcome, DetectError> {
    let derived = derive_marking_set(e, m)?;
    if e.all_product() {
        let mut base_certs = BTreeMap::new();
        let mut complete = true;
        for member in e.members() {
            match exact_product_detect(e, member.label(), cfg.branch_cap, &cfg.tol)? {
                DetectOutcome::Feasible(cert) => {
                    base_certs.insert(member.label().to_string(), cert);
                }
                DetectOutcome::Infeasible(_) => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            let composed = compositional_detect(&derived, &base_certs, &cfg.tol)?;
            let mut per_state = BTreeMap::new();
            for cert in composed.into_values() {
                per_state
                    .insert(cert.target_label.clone(), StateFinding::Identifiable(cert));
            }
            let overall = overall_from(&per_state);
            return Ok(ClsmOutcome {
                derived,
                verdict: CLSDVerdict { per_state, overall },
                base_certificates: Some(base_certs),
            });
        }
    }
    let verdict = clsd_verdict(derived.derived(), cfg)?;
    Ok(ClsmOutcome { derived, verdict, base_certificates: None })
}

/// Slot-wise tensor detectors for every tuple of a derived marking set,
/// each re-verified against the whole derived ensemble.
pub fn compositional_detect(
    d: &DerivedMarkingSet,
    base_certificates: &BTreeMap<String, DetectingCertificate>,
    tol: &ToleranceConfig,
) -> Result<BTreeMap<String, DetectingCertificate>, DetectError> {
    let base = d.base();
    let parties = base.structure().num_parties();
    // Fail fast on gaps before composing anything.
    for tuple in d.tuples() {
        for &i in tuple {
            let label = base.members()[i].label();
            if !base_certificates.contains_key(label) {
                return Err(DetectError::MissingBaseCertificate(label.to_string()));
            }
        }
    }
    let mut out = BTreeMap::new();
    for tuple in d.tuples() {
        let label = d.tuple_label(tuple);
        let mut per_party = Vec::with_capacity(parties);
        for p in 0..parties {
            let mut v = base_certificates[base.members()[tuple[0]].label()].per_party_vectors[p]
                .clone();
            for &i in &tuple[1..] {
                let next = &base_certificates[base.members()[i].label()].per_party_vectors[p];
                v = tensor_product(&v, next);
            }
            per_party.push(v);
        }
        let cert = verify_certificate(d.derived(), &label, &per_party, tol).map_err(|err| {
            DetectError::CompositionFailed { target: label.clone(), reason: err.to_string() }
        })?;
        out.insert(label, cert);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
