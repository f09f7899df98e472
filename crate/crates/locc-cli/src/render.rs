//! JSON rendering of certificates, verdicts and reports.
//!
//! Everything here produces plain `serde_json::Value`s with sorted keys so
//! that repeated runs serialize byte-identically.

use serde_json::{json, Map, Value};

use locc_core::detect::{
    BranchFailure, CLSDVerdict, DetectingCertificate, ExactInfeasibilityReport, FailureKind,
    HeuristicSearchReport, HeuristicVerdict, InfeasibilityEvidence, OverallVerdict, StateFinding,
};
use locc_core::marking::{DependenceWitness, Independence};
use locc_core::protocol::SimulationReport;
use locc_core::upb::{GubCrosscheck, PartitionWitness, SubsetVerdict, UBClassification};
use locc_core::StateVector;

pub fn state_vector(v: &StateVector) -> Value {
    Value::Array(v.amplitudes().iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn certificate(c: &DetectingCertificate) -> Value {
    json!({
        "target": c.target_label,
        "per_party_vectors": c.per_party_vectors.iter().map(state_vector).collect::<Vec<_>>(),
        "max_offtarget_overlap": c.max_offtarget_overlap,
        "target_overlap_modulus": c.target_overlap_modulus,
    })
}

fn branch_failure(b: &BranchFailure) -> Value {
    match b.failure {
        FailureKind::EmptyNullspace { party } => {
            json!({ "assignment": b.assignment, "condition": "empty_nullspace", "party": party })
        }
        FailureKind::TargetKilledOnParty { party } => {
            json!({ "assignment": b.assignment, "condition": "target_killed_on_party", "party": party })
        }
    }
}

pub fn infeasibility_report(r: &ExactInfeasibilityReport) -> Value {
    json!({
        "target": r.target_label,
        "branch_count": r.branch_count,
        "per_branch_failure": r.per_branch_failure.iter().map(branch_failure).collect::<Vec<_>>(),
    })
}

/// Compact form without the per-branch table (for large summaries).
pub fn infeasibility_summary(r: &ExactInfeasibilityReport) -> Value {
    json!({
        "target": r.target_label,
        "branch_count": r.branch_count,
        "branches_failed": r.per_branch_failure.len(),
    })
}

pub fn heuristic_report(r: &HeuristicSearchReport) -> Value {
    let mut m = Map::new();
    m.insert("target".into(), json!(r.target_label));
    m.insert("restarts".into(), json!(r.restarts));
    m.insert("seed".into(), json!(r.seed));
    m.insert("best_target_overlap".into(), json!(r.best_target_overlap));
    m.insert("best_offtarget_residual".into(), json!(r.best_offtarget_residual));
    match &r.verdict {
        HeuristicVerdict::Found(c) => {
            m.insert("verdict".into(), json!("found"));
            m.insert("certificate".into(), certificate(c));
        }
        HeuristicVerdict::NotFound => {
            m.insert("verdict".into(), json!("not_found"));
        }
    }
    Value::Object(m)
}

pub fn overall(o: OverallVerdict) -> &'static str {
    match o {
        OverallVerdict::Distinguishable => "distinguishable",
        OverallVerdict::Indistinguishable => "indistinguishable",
        OverallVerdict::Undetermined => "undetermined",
    }
}

pub fn state_finding(f: &StateFinding, full_branches: bool) -> Value {
    match f {
        StateFinding::Identifiable(c) => json!({
            "verdict": "identifiable",
            "certificate": certificate(c),
        }),
        StateFinding::NotIdentifiable(InfeasibilityEvidence::BranchEnumeration(r)) => json!({
            "verdict": "not_identifiable",
            "evidence": "branch_enumeration",
            "report": if full_branches { infeasibility_report(r) } else { infeasibility_summary(r) },
        }),
        StateFinding::NotIdentifiable(InfeasibilityEvidence::LinearDependence { span_rank }) => {
            json!({
                "verdict": "not_identifiable",
                "evidence": "linear_dependence",
                "span_rank": span_rank,
            })
        }
        StateFinding::Unknown { report, reason } => {
            let mut m = Map::new();
            m.insert("verdict".into(), json!("unknown"));
            m.insert("reason".into(), json!(reason));
            if let Some(r) = report {
                m.insert("heuristic".into(), heuristic_report(r));
            }
            Value::Object(m)
        }
    }
}

pub fn clsd_verdict(v: &CLSDVerdict, full_branches: bool) -> Value {
    let per_state: Map<String, Value> = v
        .per_state
        .iter()
        .map(|(label, f)| (label.clone(), state_finding(f, full_branches)))
        .collect();
    json!({
        "overall": overall(v.overall),
        "per_state": Value::Object(per_state),
    })
}

pub fn independence(i: &Independence) -> Value {
    match i {
        Independence::Independent => json!({ "independent": true }),
        Independence::Dependent { rank } => json!({ "independent": false, "rank": rank }),
    }
}

pub fn dependence_witness(w: &DependenceWitness) -> Value {
    json!({
        "anchor_tuple": w.anchor_tuple,
        "residual_norm": w.residual_norm,
        "coefficients": w.coefficients.iter()
            .map(|(t, c)| json!({ "tuple": t, "value": [c.re, c.im] }))
            .collect::<Vec<_>>(),
    })
}

pub fn partition_witness(w: &PartitionWitness) -> Value {
    let mut m = Map::new();
    m.insert("set_a".into(), json!(w.set_a_labels));
    m.insert("set_b".into(), json!(w.set_b_labels));
    m.insert("r_a".into(), json!(w.r_a));
    m.insert("r_b".into(), json!(w.r_b));
    if let Some(ext) = &w.extension_state {
        m.insert("extension_state".into(), state_vector(ext));
    }
    Value::Object(m)
}

pub fn classification(c: &UBClassification) -> Value {
    let subsets: Map<String, Value> = c
        .maximal_subset_reports
        .iter()
        .map(|(label, v)| {
            let val = match v {
                SubsetVerdict::Extendible(w) => {
                    json!({ "extendible": true, "witness": partition_witness(w) })
                }
                SubsetVerdict::Unextendible { partitions_checked } => {
                    json!({ "extendible": false, "partitions_checked": partitions_checked })
                }
            };
            (label.clone(), val)
        })
        .collect();
    json!({
        "is_ub": c.flags.is_ub,
        "is_gub": c.flags.is_gub,
        "is_upb": c.flags.is_upb,
        "is_gupb": c.flags.is_gupb,
        "spans_full_space": c.flags.spans_full_space,
        "complement_dim": c.complement_dim,
        "maximal_subsets": Value::Object(subsets),
    })
}

pub fn crosscheck(c: &GubCrosscheck) -> Value {
    let mut m = Map::new();
    m.insert("is_gub".into(), json!(c.is_gub));
    m.insert("clsd".into(), json!(overall(c.clsd_overall)));
    m.insert("consistent".into(), json!(c.consistent));
    if let Some(reason) = &c.skipped {
        m.insert("skipped".into(), json!(reason));
    }
    Value::Object(m)
}

pub fn simulation(r: &SimulationReport) -> Value {
    let per: Map<String, Value> = r
        .per_hypothesis
        .iter()
        .map(|(label, h)| {
            (
                label.clone(),
                json!({
                    "success_probability": h.success_probability,
                    "error_probability": h.error_probability,
                    "distribution": h.distribution,
                }),
            )
        })
        .collect();
    json!({
        "zero_error": r.zero_error,
        "per_hypothesis": Value::Object(per),
    })
}
