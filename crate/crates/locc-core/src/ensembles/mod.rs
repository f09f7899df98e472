//! Ensembles of multipartite quantum states with party structure.
//!
//! An [`Ensemble`] is an ordered list of labeled pure or mixed states over
//! a declared split of tensor factors into spatially separated parties.
//! Members that are products across the parties carry their per-party
//! factors explicitly; everything downstream (detecting-state search,
//! partition-rank enumeration, protocol construction) keys off that
//! metadata.
//!
//! Construction always validates: [`Ensemble::new`] rejects any input whose
//! [`validate`] report is non-empty, so an `Ensemble` value in hand
//! satisfies all type invariants up to the stated tolerances.

mod json;
pub(crate) mod named;

pub use json::{parse_ensemble, serialize_ensemble, serialize_ensemble_value};
pub use named::{build_named, NamedEnsemble};

use thiserror::Error;

use crate::numkernel::{
    hermitian_inner, invert_perm, regroup_factors, tensor_product, NumError, Operator,
    StateVector, ToleranceConfig,
};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("invalid party structure: {0}")]
    Structure(String),
    #[error("unknown named ensemble `{0}`")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schema error at {0}")]
    Schema(String),
    #[error("ensemble invariants violated:\n{0}")]
    Invalid(ValidationReport),
    #[error("no member labeled `{0}`")]
    NoSuchMember(String),
}

/// Assignment of tensor factors to spatially separated parties.
///
/// Factors are indexed in amplitude order (first factor slowest); each is
/// assigned to exactly one party and a party's dimension is the product of
/// its factors' dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct PartyStructure {
    factor_dims: Vec<usize>,
    factor_assignment: Vec<usize>,
    party_dims: Vec<usize>,
}

impl PartyStructure {
    pub fn new(factor_dims: Vec<usize>, factor_assignment: Vec<usize>) -> Result<Self, EnsembleError> {
        if factor_dims.is_empty() || factor_dims.len() != factor_assignment.len() {
            return Err(EnsembleError::Structure(format!(
                "{} factor dims vs {} assignments",
                factor_dims.len(),
                factor_assignment.len()
            )));
        }
        if factor_dims.iter().any(|&d| d == 0) {
            return Err(EnsembleError::Structure("zero factor dimension".into()));
        }
        let n_parties = factor_assignment.iter().max().map_or(0, |m| m + 1);
        let mut party_dims = vec![1usize; n_parties];
        let mut seen = vec![false; n_parties];
        for (f, &p) in factor_assignment.iter().enumerate() {
            party_dims[p] *= factor_dims[f];
            seen[p] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(EnsembleError::Structure(
                "every party must own at least one factor".into(),
            ));
        }
        Ok(Self { factor_dims, factor_assignment, party_dims })
    }

    /// One party per factor.
    pub fn one_factor_per_party(factor_dims: Vec<usize>) -> Result<Self, EnsembleError> {
        let assignment = (0..factor_dims.len()).collect();
        Self::new(factor_dims, assignment)
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn factor_assignment(&self) -> &[usize] {
        &self.factor_assignment
    }

    pub fn party_dims(&self) -> &[usize] {
        &self.party_dims
    }

    pub fn num_parties(&self) -> usize {
        self.party_dims.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn is_bipartite(&self) -> bool {
        self.num_parties() == 2
    }

    /// Factor indices owned by party `p`, in ascending order.
    pub fn party_factors(&self, p: usize) -> Vec<usize> {
        self.factor_assignment
            .iter()
            .enumerate()
            .filter_map(|(f, &q)| (q == p).then_some(f))
            .collect()
    }

    /// Factor dimensions of party `p`, in ascending factor order.
    pub fn party_factor_dims(&self, p: usize) -> Vec<usize> {
        self.party_factors(p).into_iter().map(|f| self.factor_dims[f]).collect()
    }

    /// All factors listed party-major (party 0's factors, then party 1's, ...).
    pub fn party_major_factor_order(&self) -> Vec<usize> {
        (0..self.num_parties()).flat_map(|p| self.party_factors(p)).collect()
    }

    /// Assemble a full-space state from per-party vectors, respecting the
    /// structure's factor order.
    pub fn assemble_product(&self, party_vectors: &[StateVector]) -> Result<StateVector, EnsembleError> {
        if party_vectors.len() != self.num_parties() {
            return Err(EnsembleError::Structure(format!(
                "{} party vectors for {} parties",
                party_vectors.len(),
                self.num_parties()
            )));
        }
        for (p, v) in party_vectors.iter().enumerate() {
            if v.dims() != self.party_factor_dims(p).as_slice() {
                return Err(EnsembleError::Structure(format!(
                    "party {p} vector has factor dims {:?}, expected {:?}",
                    v.dims(),
                    self.party_factor_dims(p)
                )));
            }
        }
        let mut tensored = party_vectors[0].clone();
        for v in &party_vectors[1..] {
            tensored = tensor_product(&tensored, v);
        }
        // The tensored state lists factors party-major; permute back so that
        // output position k carries original factor k.
        let party_major = self.party_major_factor_order();
        let perm = invert_perm(&party_major);
        Ok(regroup_factors(&tensored, &perm)?)
    }
}

/// Pure or mixed body of an ensemble member.
#[derive(Clone, Debug, PartialEq)]
pub enum MemberBody {
    Pure(StateVector),
    Mixed(Operator),
}

impl MemberBody {
    pub fn total_dim(&self) -> usize {
        match self {
            MemberBody::Pure(s) => s.total_dim(),
            MemberBody::Mixed(o) => o.total_dim(),
        }
    }

    /// Density operator of the body (projector for pure states).
    pub fn density(&self) -> Operator {
        match self {
            MemberBody::Pure(s) => Operator::projector(s),
            MemberBody::Mixed(o) => o.clone(),
        }
    }
}

/// A labeled ensemble member with optional per-party product factors.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleMember {
    label: String,
    body: MemberBody,
    product_factors: Option<Vec<StateVector>>,
}

impl EnsembleMember {
    pub fn pure(label: impl Into<String>, state: StateVector) -> Self {
        Self { label: label.into(), body: MemberBody::Pure(state), product_factors: None }
    }

    pub fn mixed(label: impl Into<String>, op: Operator) -> Self {
        Self { label: label.into(), body: MemberBody::Mixed(op), product_factors: None }
    }

    /// Product member assembled from per-party factors.
    pub fn product(
        label: impl Into<String>,
        structure: &PartyStructure,
        party_vectors: Vec<StateVector>,
    ) -> Result<Self, EnsembleError> {
        let body = structure.assemble_product(&party_vectors)?;
        Ok(Self {
            label: label.into(),
            body: MemberBody::Pure(body),
            product_factors: Some(party_vectors),
        })
    }

    pub(crate) fn pure_with_factors(
        label: impl Into<String>,
        state: StateVector,
        product_factors: Option<Vec<StateVector>>,
    ) -> Self {
        Self { label: label.into(), body: MemberBody::Pure(state), product_factors }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn body(&self) -> &MemberBody {
        &self.body
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.body, MemberBody::Pure(_))
    }

    pub fn pure_state(&self) -> Option<&StateVector> {
        match &self.body {
            MemberBody::Pure(s) => Some(s),
            MemberBody::Mixed(_) => None,
        }
    }

    pub fn product_factors(&self) -> Option<&[StateVector]> {
        self.product_factors.as_deref()
    }
}

/// One invariant violation found by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub member: Option<String>,
    pub message: String,
}

/// Outcome of checking all type invariants of an ensemble.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            match &v.member {
                Some(m) => writeln!(f, "[{m}] {}", v.message)?,
                None => writeln!(f, "{}", v.message)?,
            }
        }
        Ok(())
    }
}

/// An ordered, validated collection of states over a shared party structure.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    name: String,
    structure: PartyStructure,
    members: Vec<EnsembleMember>,
}

impl Ensemble {
    pub fn new(
        name: impl Into<String>,
        structure: PartyStructure,
        members: Vec<EnsembleMember>,
    ) -> Result<Self, EnsembleError> {
        let e = Self { name: name.into(), structure, members };
        let report = validate(&e);
        if !report.is_valid() {
            return Err(EnsembleError::Invalid(report));
        }
        Ok(e)
    }

    pub(crate) fn new_unvalidated(
        name: impl Into<String>,
        structure: PartyStructure,
        members: Vec<EnsembleMember>,
    ) -> Self {
        Self { name: name.into(), structure, members }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn structure(&self) -> &PartyStructure {
        &self.structure
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.label()).collect()
    }

    pub fn member_index(&self, label: &str) -> Result<usize, EnsembleError> {
        self.members
            .iter()
            .position(|m| m.label() == label)
            .ok_or_else(|| EnsembleError::NoSuchMember(label.to_string()))
    }

    pub fn member(&self, label: &str) -> Result<&EnsembleMember, EnsembleError> {
        Ok(&self.members[self.member_index(label)?])
    }

    pub fn all_pure(&self) -> bool {
        self.members.iter().all(EnsembleMember::is_pure)
    }

    /// True when every member carries a per-party product factorization.
    pub fn all_product(&self) -> bool {
        self.members.iter().all(|m| m.product_factors().is_some())
    }

    pub fn pure_states(&self) -> Option<Vec<&StateVector>> {
        self.members.iter().map(EnsembleMember::pure_state).collect()
    }

    /// The ensemble with one member removed (for maximal-subset analysis).
    pub fn without_member(&self, label: &str) -> Result<Ensemble, EnsembleError> {
        let idx = self.member_index(label)?;
        let mut members = self.members.clone();
        members.remove(idx);
        Ok(Ensemble {
            name: format!("{} \\ {{{label}}}", self.name),
            structure: self.structure.clone(),
            members,
        })
    }

    /// A sub-ensemble of the given member indices (kept in the given order).
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Ensemble {
        Ensemble {
            name: name.into(),
            structure: self.structure.clone(),
            members: indices.iter().map(|&i| self.members[i].clone()).collect(),
        }
    }
}

/// Check all type invariants, collecting violations per member.
pub fn validate(e: &Ensemble) -> ValidationReport {
    validate_with(e, &ToleranceConfig::default())
}

pub fn validate_with(e: &Ensemble, tol: &ToleranceConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut push = |member: Option<&str>, message: String| {
        report.violations.push(Violation { member: member.map(str::to_string), message });
    };
    let total = e.structure.total_dim();

    let mut seen = std::collections::BTreeSet::new();
    for m in &e.members {
        if !seen.insert(m.label().to_string()) {
            push(Some(m.label()), "duplicate label".into());
        }
    }

    for m in &e.members {
        let label = Some(m.label());
        if m.body.total_dim() != total {
            push(
                label,
                format!("member dimension {} does not match structure {total}", m.body.total_dim()),
            );
            continue;
        }
        match &m.body {
            MemberBody::Pure(s) => {
                if s.dims() != e.structure.factor_dims() {
                    push(
                        label,
                        format!(
                            "factor dims {:?} do not match structure {:?}",
                            s.dims(),
                            e.structure.factor_dims()
                        ),
                    );
                }
                let norm = s.norm();
                if (norm - 1.0).abs() > 1e-9 {
                    push(label, format!("norm out of tolerance: {norm}"));
                }
            }
            MemberBody::Mixed(op) => {
                if op.dims() != e.structure.factor_dims() {
                    push(
                        label,
                        format!(
                            "factor dims {:?} do not match structure {:?}",
                            op.dims(),
                            e.structure.factor_dims()
                        ),
                    );
                }
                let herm = op.hermiticity_residual();
                if herm > tol.identity_tol {
                    push(label, format!("not hermitian: residual {herm:.3e}"));
                } else {
                    let min_eig = op.min_eigenvalue();
                    if min_eig < -1e-9 {
                        push(label, format!("not positive semidefinite: min eigenvalue {min_eig:.3e}"));
                    }
                }
                let tr = op.trace();
                if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
                    push(label, format!("trace {tr} not within 1e-9 of 1"));
                }
            }
        }
        if let Some(factors) = m.product_factors() {
            if !m.is_pure() {
                push(label, "product_factors attached to a mixed body".into());
                continue;
            }
            if factors.len() != e.structure.num_parties() {
                push(
                    label,
                    format!(
                        "{} product factors for {} parties",
                        factors.len(),
                        e.structure.num_parties()
                    ),
                );
                continue;
            }
            let mut dims_ok = true;
            for (p, v) in factors.iter().enumerate() {
                if v.dims() != e.structure.party_factor_dims(p).as_slice() {
                    push(
                        label,
                        format!(
                            "party {p} factor dims {:?}, expected {:?}",
                            v.dims(),
                            e.structure.party_factor_dims(p)
                        ),
                    );
                    dims_ok = false;
                }
            }
            if dims_ok {
                match e.structure.assemble_product(factors) {
                    Ok(assembled) => {
                        let body = m.pure_state().expect("checked pure above");
                        let diff: f64 = assembled
                            .amplitudes()
                            .iter()
                            .zip(body.amplitudes().iter())
                            .map(|(a, b)| (a - b).norm())
                            .fold(0.0, f64::max);
                        if diff > tol.orth_tol {
                            push(label, format!("factorization mismatch: max deviation {diff:.3e}"));
                        }
                    }
                    Err(err) => push(label, format!("factorization mismatch: {err}")),
                }
            }
        }
    }
    report
}

/// Max-entry residual between the two pairwise-Bell decompositions of the
/// four-qubit Smolin state, after regrouping both to a common factor order.
pub fn smolin_identity_residual() -> f64 {
    let bells: Vec<Operator> = (1..=4).map(|i| Operator::projector(&named::bell_state(i))).collect();
    let quarter = crate::numkernel::C64::new(0.25, 0.0);
    // Sum of B_i x B_i over (A1,B1),(A2,B2), factor order (A1,B1,A2,B2).
    let mut dec1 = Operator::tensor(&bells[0], &bells[0]);
    for b in &bells[1..] {
        dec1 = dec1.add(&Operator::tensor(b, b)).expect("same dims");
    }
    let dec1 = dec1.scale(quarter);
    // Sum of B_i x B_i over (A1,A2),(B1,B2), regrouped to (A1,B1,A2,B2).
    let mut dec2 = Operator::tensor(&bells[0], &bells[0]);
    for b in &bells[1..] {
        dec2 = dec2.add(&Operator::tensor(b, b)).expect("same dims");
    }
    // Current factor order is (A1,A2,B1,B2); position k takes factor perm[k].
    let dec2 = dec2.scale(quarter).regroup_factors(&[0, 2, 1, 3]).expect("valid permutation");
    dec1.max_abs_diff(&dec2).expect("same dims")
}

/// Pairwise Hermitian overlap (pure) or Tr(rho sigma) (mixed) of two members.
pub fn member_overlap(a: &EnsembleMember, b: &EnsembleMember) -> Result<f64, EnsembleError> {
    match (a.body(), b.body()) {
        (MemberBody::Pure(u), MemberBody::Pure(v)) => Ok(hermitian_inner(u, v)?.norm()),
        _ => {
            let ra = a.body().density();
            let rb = b.body().density();
            Ok(ra.trace_product(&rb)?.norm())
        }
    }
}
