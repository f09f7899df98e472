//! Exact protocol simulation by density-operator propagation.

use std::collections::BTreeMap;

use crate::ensembles::Ensemble;
use crate::numkernel::{Operator, ToleranceConfig, C64};

use super::{
    verify_povm, Branch, Declaration, HypothesisOutcome, ProtocolError, ProtocolNode,
    SimulationReport,
};

/// Paths below this probability are not descended into; their mass is
/// orders of magnitude below every tolerance asserted on the output.
const DESCENT_CUTOFF: f64 = 1e-15;

const INCONCLUSIVE_KEY: &str = "inconclusive";

fn validate_tree(
    node: &ProtocolNode,
    e: &Ensemble,
    tol: &ToleranceConfig,
) -> Result<(), ProtocolError> {
    let st = e.structure();
    if node.acting_party >= st.num_parties() {
        return Err(ProtocolError::MalformedTree(format!(
            "party {} out of range",
            node.acting_party
        )));
    }
    let owned = st.party_factors(node.acting_party);
    for &f in &node.subsystem {
        if !owned.contains(&f) {
            return Err(ProtocolError::MalformedTree(format!(
                "factor {f} is not owned by party {} (local-implementability guard)",
                node.acting_party
            )));
        }
    }
    let sub_dim: usize = node.subsystem.iter().map(|&f| st.factor_dims()[f]).product();
    if node.povm.total_dim() != sub_dim {
        return Err(ProtocolError::MalformedTree(format!(
            "POVM dimension {} on a subsystem of dimension {sub_dim}",
            node.povm.total_dim()
        )));
    }
    let report = verify_povm(&node.povm, tol);
    if !report.pass {
        return Err(ProtocolError::MalformedTree(format!(
            "invalid POVM (completeness residual {:.3e}, min eigenvalue {:.3e})",
            report.completeness_residual, report.min_effect_eigenvalue
        )));
    }
    for (_, branch) in &node.branches {
        match branch {
            Branch::Node(child) => validate_tree(child, e, tol)?,
            Branch::Leaf(Declaration::Answer(label)) => {
                e.member_index(label)
                    .map_err(|_| ProtocolError::UnmappedAnswer(label.clone()))?;
            }
            Branch::Leaf(Declaration::Inconclusive) => {}
        }
    }
    Ok(())
}

fn propagate(
    node: &ProtocolNode,
    e: &Ensemble,
    rho: &Operator,
    path_prob: f64,
    dist: &mut BTreeMap<String, f64>,
) -> Result<(), ProtocolError> {
    let full_dims = e.structure().factor_dims();
    for ((_, effect), (_, branch)) in node.povm.effects().iter().zip(&node.branches) {
        let effect_full = effect.embed(full_dims, &node.subsystem)?;
        let p = rho.trace_product(&effect_full)?.re.max(0.0);
        match branch {
            Branch::Leaf(Declaration::Answer(label)) => {
                *dist.entry(label.clone()).or_insert(0.0) += path_prob * p;
            }
            Branch::Leaf(Declaration::Inconclusive) => {
                *dist.entry(INCONCLUSIVE_KEY.to_string()).or_insert(0.0) += path_prob * p;
            }
            Branch::Node(child) => {
                if p <= DESCENT_CUTOFF {
                    // Vanishing path: keep the mass accounted for.
                    *dist.entry(INCONCLUSIVE_KEY.to_string()).or_insert(0.0) += path_prob * p;
                    continue;
                }
                let m_full = effect.psd_sqrt().embed(full_dims, &node.subsystem)?;
                let updated = m_full
                    .mul(rho)?
                    .mul(&m_full)? // measurement operators are hermitian
                    .scale(C64::new(1.0 / p, 0.0));
                propagate(child, e, &updated, path_prob * p, dist)?;
            }
        }
    }
    Ok(())
}

/// Simulate a protocol tree on every hypothesis of an ensemble.
///
/// Pure hypotheses are promoted to projectors; each branch applies the
/// square-root measurement update. Success is the probability of declaring
/// the hypothesis's own label, error the total probability of declaring
/// any other label.
pub fn simulate(
    root: &ProtocolNode,
    hypotheses: &Ensemble,
    tol: &ToleranceConfig,
) -> Result<SimulationReport, ProtocolError> {
    validate_tree(root, hypotheses, tol)?;
    let mut per_hypothesis = BTreeMap::new();
    let mut zero_error = true;
    for member in hypotheses.members() {
        let rho = member.body().density();
        let mut dist = BTreeMap::new();
        propagate(root, hypotheses, &rho, 1.0, &mut dist)?;
        let total: f64 = dist.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ProtocolError::MalformedTree(format!(
                "outcome distribution for `{}` sums to {total}",
                member.label()
            )));
        }
        let success = dist.get(member.label()).copied().unwrap_or(0.0);
        let error: f64 = dist
            .iter()
            .filter(|(k, _)| k.as_str() != INCONCLUSIVE_KEY && k.as_str() != member.label())
            .map(|(_, &v)| v)
            .sum();
        if error > 1e-12 {
            zero_error = false;
        }
        per_hypothesis.insert(
            member.label().to_string(),
            HypothesisOutcome {
                distribution: dist,
                success_probability: success,
                error_probability: error,
            },
        );
    }
    Ok(SimulationReport { per_hypothesis, zero_error })
}
