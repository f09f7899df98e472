//! Derived marking sets and linear (in)dependence evidence.
//!
//! The m-fold marking task over an ensemble of N pure states is a
//! discrimination task over the derived set of all N!/(N-m)! ordered
//! m-tuples of distinct members. Each derived state is the slot-wise tensor
//! product of its tuple, regrouped so that every party's factors from all m
//! slots sit together (slot-major within each party); that regrouped
//! coordinate convention is fixed here and shared by the detection and
//! protocol modules.
//!
//! Linear dependence of the base set propagates to every derived set: an
//! antisymmetrized tensor extension of any base dependence yields an
//! explicit [`DependenceWitness`] whose residual is checkable by summation.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ensembles::{Ensemble, EnsembleError, EnsembleMember, PartyStructure};
use crate::numkernel::{
    regroup_factors, right_nullspace, tensor_product, CMatrix, CVector, NumError, StateVector,
    ToleranceConfig, C64,
};

#[derive(Debug, Error)]
pub enum MarkingError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("m = {m} out of range 1..={n}")]
    MOutOfRange { m: usize, n: usize },
    #[error("member `{0}` is mixed; marking sets are derived from pure ensembles only")]
    MixedMember(String),
    #[error("coefficient vector of length {got} for {want} members")]
    CoefficientLength { got: usize, want: usize },
    #[error("base coefficients are not a dependence: residual {0:.3e}")]
    NotADependence(f64),
    #[error("no anchor tuple leaves a nonzero coefficient outside it")]
    NoAnchorTuple,
    #[error("antisymmetrized witness failed verification: residual {0:.3e}")]
    WitnessResidual(f64),
}

/// All ordered `m`-tuples of distinct values from `0..n`, lexicographic.
pub fn ordered_tuples(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, m: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(n, m, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, m, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// The m-fold marking set of a base ensemble: ordered tuples of distinct
/// member indices together with the derived, regrouped ensemble.
#[derive(Clone, Debug)]
pub struct DerivedMarkingSet {
    base: Ensemble,
    m: usize,
    tuples: Vec<Vec<usize>>,
    derived: Ensemble,
}

impl DerivedMarkingSet {
    pub fn base(&self) -> &Ensemble {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn derived(&self) -> &Ensemble {
        &self.derived
    }

    /// Label of the derived member for a tuple: base labels joined by '-'.
    pub fn tuple_label(&self, tuple: &[usize]) -> String {
        tuple
            .iter()
            .map(|&i| self.base.members()[i].label())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn tuple_index(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.iter().position(|t| t == tuple)
    }

    /// Global factor positions (in the derived ensemble) of party `p`'s
    /// slot-`s` factors.
    pub fn slot_party_factor_positions(&self, party: usize, slot: usize) -> Vec<usize> {
        let base_st = self.base.structure();
        let mut offset = 0usize;
        for q in 0..party {
            offset += self.m * base_st.party_factors(q).len();
        }
        let k = base_st.party_factors(party).len();
        (0..k).map(|f| offset + slot * k + f).collect()
    }

    /// Serialize the derived ensemble with a `derived_from` annotation.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = crate::ensembles::serialize_ensemble_value(&self.derived);
        if let serde_json::Value::Object(map) = &mut v {
            map.insert(
                "derived_from".into(),
                serde_json::json!({ "name": self.base.name(), "m": self.m }),
            );
        }
        v
    }
}

/// Factor permutation taking the plain slot-major tensor order of `m`
/// copies of `base` to the regrouped party-major order.
fn derived_regroup_perm(base: &PartyStructure, m: usize) -> Vec<usize> {
    let k = base.num_factors();
    let mut perm = Vec::with_capacity(m * k);
    for p in 0..base.num_parties() {
        for s in 0..m {
            for f in base.party_factors(p) {
                perm.push(s * k + f);
            }
        }
    }
    perm
}

fn derived_structure(base: &PartyStructure, m: usize) -> Result<PartyStructure, EnsembleError> {
    let mut factor_dims = Vec::new();
    let mut assignment = Vec::new();
    for p in 0..base.num_parties() {
        for _ in 0..m {
            for f in base.party_factors(p) {
                factor_dims.push(base.factor_dims()[f]);
                assignment.push(p);
            }
        }
    }
    PartyStructure::new(factor_dims, assignment)
}

/// Build the m-fold marking set of a pure ensemble.
///
/// Tuples are enumerated lexicographically; each derived member is the
/// slot-wise tensor product regrouped so that party p's space is the m-fold
/// tensor power of p's base space (slot 1's factors first). Per-party
/// product factors propagate whenever every base member in the tuple is a
/// product.
pub fn derive_marking_set(e: &Ensemble, m: usize) -> Result<DerivedMarkingSet, MarkingError> {
    let n = e.len();
    if m == 0 || m > n {
        return Err(MarkingError::MOutOfRange { m, n });
    }
    for member in e.members() {
        if !member.is_pure() {
            return Err(MarkingError::MixedMember(member.label().to_string()));
        }
    }
    let base_st = e.structure();
    let perm = derived_regroup_perm(base_st, m);
    let structure = derived_structure(base_st, m)?;
    let tuples = ordered_tuples(n, m);
    let mut members = Vec::with_capacity(tuples.len());
    for tuple in &tuples {
        let label = tuple
            .iter()
            .map(|&i| e.members()[i].label())
            .collect::<Vec<_>>()
            .join("-");
        let mut body = e.members()[tuple[0]].pure_state().expect("pure checked").clone();
        for &i in &tuple[1..] {
            body = tensor_product(&body, e.members()[i].pure_state().expect("pure checked"));
        }
        let body = regroup_factors(&body, &perm)?;
        let product_factors = if tuple.iter().all(|&i| e.members()[i].product_factors().is_some()) {
            let mut per_party = Vec::with_capacity(base_st.num_parties());
            for p in 0..base_st.num_parties() {
                let mut v = e.members()[tuple[0]].product_factors().expect("checked")[p].clone();
                for &i in &tuple[1..] {
                    v = tensor_product(&v, &e.members()[i].product_factors().expect("checked")[p]);
                }
                per_party.push(v);
            }
            Some(per_party)
        } else {
            None
        };
        members.push(EnsembleMember::pure_with_factors(label, body, product_factors));
    }
    let derived = Ensemble::new(format!("{}_({m})", e.name()), structure, members)?;
    Ok(DerivedMarkingSet { base: e.clone(), m, tuples, derived })
}

/// Verdict of a linear-independence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Independence {
    Independent,
    Dependent { rank: usize },
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

/// Independent iff the numerical rank equals the state count.
///
/// Large stacks take a Gram-Cholesky fast path first: success certifies a
/// singular-value ratio far above the rank tolerance, and failure falls
/// back to the singular-value count, so the verdict never differs.
pub fn check_linear_independence(
    states: &[StateVector],
    tol: &ToleranceConfig,
) -> Result<Independence, MarkingError> {
    assert!(!states.is_empty(), "independence check needs at least one state");
    if states.len() >= 64 && crate::numkernel::gram_certifies_full_rank(states)? {
        return Ok(Independence::Independent);
    }
    let rank = crate::numkernel::numerical_rank(states, tol)?;
    if rank == states.len() {
        Ok(Independence::Independent)
    } else {
        Ok(Independence::Dependent { rank })
    }
}

/// Coefficient vectors spanning {c : sum_i c_i psi_i = 0}.
pub fn nullspace_coefficients(
    states: &[StateVector],
    tol: &ToleranceConfig,
) -> Result<Vec<Vec<C64>>, MarkingError> {
    assert!(!states.is_empty());
    let dim = states[0].total_dim();
    let m = CMatrix::from_fn(dim, states.len(), |r, c| states[c].amplitudes()[r]);
    Ok(right_nullspace(&m, tol.rank_rel_tol)
        .into_iter()
        .map(|v| v.iter().copied().collect())
        .collect())
}

/// An explicit linear relation among derived marking states.
#[derive(Clone, Debug)]
pub struct DependenceWitness {
    /// Fixed tuple (j_2, ..., j_m) tensored onto the base relation; empty
    /// for m = 1.
    pub anchor_tuple: Vec<usize>,
    /// Nonzero coefficients per derived tuple.
    pub coefficients: BTreeMap<Vec<usize>, C64>,
    /// Norm of the coefficient-weighted sum of derived states.
    pub residual_norm: f64,
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Antisymmetrize a base dependence into a dependence among the m-tuple
/// derived states.
///
/// The base relation is tensored with a fixed anchor tuple (j_2,...,j_m)
/// and summed over all slot permutations with signs; terms with repeated
/// indices cancel exactly, so the surviving coefficients are supported on
/// permutations of (i, j_2,...,j_m) for every index i outside the anchor.
/// The anchor is the lexicographically first ordered tuple that leaves at
/// least one coefficient of modulus > 1e-9 outside it.
pub fn build_dependence_witness(
    e: &Ensemble,
    base_coeffs: &[C64],
    m: usize,
    tol: &ToleranceConfig,
) -> Result<DependenceWitness, MarkingError> {
    let n = e.len();
    if base_coeffs.len() != n {
        return Err(MarkingError::CoefficientLength { got: base_coeffs.len(), want: n });
    }
    if m == 0 || m > n {
        return Err(MarkingError::MOutOfRange { m, n });
    }
    let states = e
        .pure_states()
        .ok_or_else(|| MarkingError::MixedMember("<mixed body>".to_string()))?;
    // Verify the base relation by direct summation.
    let dim = states[0].total_dim();
    let mut sum = CVector::zeros(dim);
    for (c, s) in base_coeffs.iter().zip(&states) {
        sum += s.amplitudes() * *c;
    }
    let base_residual = sum.norm();
    if base_residual > tol.orth_tol {
        return Err(MarkingError::NotADependence(base_residual));
    }
    let significant: Vec<usize> = (0..n).filter(|&i| base_coeffs[i].norm() > 1e-9).collect();
    if significant.is_empty() {
        return Err(MarkingError::NotADependence(0.0));
    }

    if m == 1 {
        let mut coefficients = BTreeMap::new();
        for i in 0..n {
            if base_coeffs[i].norm() > 1e-14 {
                coefficients.insert(vec![i], base_coeffs[i]);
            }
        }
        return Ok(DependenceWitness {
            anchor_tuple: Vec::new(),
            coefficients,
            residual_norm: base_residual,
        });
    }

    // First lexicographic anchor leaving a significant coefficient outside.
    let anchor = ordered_tuples(n, m - 1)
        .into_iter()
        .find(|t| significant.iter().any(|i| !t.contains(i)))
        .ok_or(MarkingError::NoAnchorTuple)?;

    let slot_perms = ordered_tuples(m, m);
    let mut coefficients: BTreeMap<Vec<usize>, C64> = BTreeMap::new();
    for i in 0..n {
        if anchor.contains(&i) || base_coeffs[i].norm() <= 1e-14 {
            continue;
        }
        let mut seq = Vec::with_capacity(m);
        seq.push(i);
        seq.extend_from_slice(&anchor);
        for posperm in &slot_perms {
            let tuple: Vec<usize> = posperm.iter().map(|&p| seq[p]).collect();
            let sign = permutation_sign(posperm);
            *coefficients.entry(tuple).or_insert_with(|| C64::new(0.0, 0.0)) +=
                base_coeffs[i] * C64::new(sign, 0.0);
        }
    }

    // Verify by summation over the derived set.
    let derived = derive_marking_set(e, m)?;
    let ddim = derived.derived().structure().total_dim();
    let mut dsum = CVector::zeros(ddim);
    for (tuple, c) in &coefficients {
        let idx = derived.tuple_index(tuple).expect("witness tuples are derived tuples");
        let state = derived.derived().members()[idx].pure_state().expect("derived sets are pure");
        dsum += state.amplitudes() * *c;
    }
    let residual_norm = dsum.norm();
    if residual_norm > tol.orth_tol {
        return Err(MarkingError::WitnessResidual(residual_norm));
    }
    Ok(DependenceWitness { anchor_tuple: anchor, coefficients, residual_norm })
}

/// Partition of the derived tuples by first-slot member index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotGrouping {
    /// Per tuple (aligned with `DerivedMarkingSet::tuples`), the first-slot
    /// member index.
    pub group_index: Vec<usize>,
}

impl SlotGrouping {
    /// Group -> tuple indices, disjoint and covering.
    pub fn groups(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (t, &g) in self.group_index.iter().enumerate() {
            out.entry(g).or_default().push(t);
        }
        out
    }
}

pub fn group_by_first_slot(d: &DerivedMarkingSet) -> SlotGrouping {
    SlotGrouping { group_index: d.tuples().iter().map(|t| t[0]).collect() }
}
