//! Exact detecting-state decision for product ensembles.
//!
//! For a product ensemble, orthogonality of a product detector to a
//! non-target member factorizes into a disjunction over parties: at least
//! one party's detector factor must kill that member's factor on the same
//! party. Enumerating every assignment of one party per constraint and
//! solving each party's linear system exactly turns Lemma-style detecting
//! feasibility into a finite, certifiable search: the verdict is exact up
//! to the configured tolerances in both directions.

use crate::ensembles::Ensemble;
use crate::numkernel::{
    hermitian_inner, orthocomplement, StateVector, ToleranceConfig, C64,
};

use super::{verify_certificate, DetectError, DetectingCertificate, TARGET_OVERLAP_FLOOR};

/// Why one branch (one constraint-to-party assignment) admits no detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// The factors assigned to this party span its whole space.
    EmptyNullspace { party: usize },
    /// The target's factor on this party is orthogonal to the party's
    /// admissible subspace (including the case where the product of the
    /// per-party projections falls below the certificate floor).
    TargetKilledOnParty { party: usize },
}

/// One enumerated branch and its failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchFailure {
    /// Mixed-radix assignment code: digit j (base = party count) is the
    /// party assigned to constraint j. For two parties this is the bitmask
    /// with bit j = 1 meaning "killed on party 1".
    pub assignment: u64,
    pub failure: FailureKind,
}

/// Exhaustive proof that no branch yields a detector for the target.
#[derive(Clone, Debug)]
pub struct ExactInfeasibilityReport {
    pub target_label: String,
    /// parties^(N-1) assignments, all enumerated.
    pub branch_count: u64,
    /// One entry per branch, in assignment order.
    pub per_branch_failure: Vec<BranchFailure>,
}

/// Outcome of the exact search: a verified certificate from the first
/// feasible assignment, or the full table of branch failures.
#[derive(Clone, Debug)]
pub enum DetectOutcome {
    Feasible(DetectingCertificate),
    Infeasible(ExactInfeasibilityReport),
}

/// Decide detecting-state feasibility for `target` by branch enumeration.
///
/// Branch order is the assignment code ascending (constraint j's party is
/// digit j), and the first feasible branch yields the certificate: each
/// party's detector factor is the normalized projection of the target's
/// factor onto the nullspace of the factors assigned to that party.
pub fn exact_product_detect(
    e: &Ensemble,
    target: &str,
    branch_cap: u64,
    tol: &ToleranceConfig,
) -> Result<DetectOutcome, DetectError> {
    let target_idx = e.member_index(target)?;
    let parties = e.structure().num_parties();
    for m in e.members() {
        if m.product_factors().is_none() {
            return Err(DetectError::NonProductMember(m.label().to_string()));
        }
    }
    let constraints: Vec<&[StateVector]> = e
        .members()
        .iter()
        .enumerate()
        .filter_map(|(j, m)| (j != target_idx).then(|| m.product_factors().expect("checked")))
        .collect();
    let target_factors = e.members()[target_idx].product_factors().expect("checked");
    let n_constraints = constraints.len();

    let branch_count = (parties as u128)
        .checked_pow(n_constraints as u32)
        .ok_or(DetectError::BranchCapExceeded { got: u128::MAX, cap: branch_cap })?;
    if branch_count > branch_cap as u128 {
        return Err(DetectError::BranchCapExceeded { got: branch_count, cap: branch_cap });
    }

    let mut failures = Vec::with_capacity(branch_count as usize);
    for code in 0..branch_count as u64 {
        match try_branch(e, &constraints, target_factors, code, parties, tol) {
            BranchResult::Feasible(per_party) => {
                let cert = verify_certificate(e, target, &per_party, tol)?;
                return Ok(DetectOutcome::Feasible(cert));
            }
            BranchResult::Failed(kind) => {
                failures.push(BranchFailure { assignment: code, failure: kind });
            }
        }
    }
    Ok(DetectOutcome::Infeasible(ExactInfeasibilityReport {
        target_label: target.to_string(),
        branch_count: branch_count as u64,
        per_branch_failure: failures,
    }))
}

enum BranchResult {
    Feasible(Vec<StateVector>),
    Failed(FailureKind),
}

fn try_branch(
    e: &Ensemble,
    constraints: &[&[StateVector]],
    target_factors: &[StateVector],
    code: u64,
    parties: usize,
    tol: &ToleranceConfig,
) -> BranchResult {
    let structure = e.structure();
    // Digit j of the code is the party that must kill constraint j.
    let mut assignment = Vec::with_capacity(constraints.len());
    let mut digits = code;
    for _ in 0..constraints.len() {
        assignment.push((digits % parties as u64) as usize);
        digits /= parties as u64;
    }
    let mut projections: Vec<StateVector> = Vec::with_capacity(parties);
    let mut proj_norms: Vec<f64> = Vec::with_capacity(parties);
    for p in 0..parties {
        let assigned: Vec<StateVector> = constraints
            .iter()
            .zip(&assignment)
            .filter_map(|(factors, &party)| (party == p).then(|| factors[p].clone()))
            .collect();
        let party_dim: usize = structure.party_factor_dims(p).iter().product();
        let nullspace = orthocomplement(&assigned, party_dim, tol).expect("uniform party dims");
        if nullspace.is_empty() {
            return BranchResult::Failed(FailureKind::EmptyNullspace { party: p });
        }
        // Projection of the target's party factor onto the nullspace.
        let dims = structure.party_factor_dims(p);
        let mut proj = vec![C64::new(0.0, 0.0); party_dim];
        for basis in &nullspace {
            let coeff = hermitian_inner(basis, &target_factors[p]).expect("matching dims");
            for (out, amp) in proj.iter_mut().zip(basis.amplitudes().iter()) {
                *out += amp * coeff;
            }
        }
        let norm = proj.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= tol.orth_tol {
            return BranchResult::Failed(FailureKind::TargetKilledOnParty { party: p });
        }
        let unit: Vec<C64> = proj.iter().map(|z| z / C64::new(norm, 0.0)).collect();
        projections
            .push(StateVector::new(dims, unit).expect("normalized projection"));
        proj_norms.push(norm);
    }
    // The certificate's target overlap is exactly the product of the
    // projection norms; stay above the floor so it remains meaningful.
    let product: f64 = proj_norms.iter().product();
    if product < TARGET_OVERLAP_FLOOR {
        let worst = proj_norms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite norms"))
            .map(|(p, _)| p)
            .unwrap_or(0);
        return BranchResult::Failed(FailureKind::TargetKilledOnParty { party: worst });
    }
    BranchResult::Feasible(projections)
}
