//! POVMs, finite local-measurement protocol trees, and their exact
//! simulation on pure or mixed hypotheses.
//!
//! A protocol is a finite tree: each node is one POVM measured by one
//! party on a subset of that party's tensor factors, with one branch per
//! outcome leading to a child node or a terminal declaration (an answer
//! label or an inconclusive shrug). Classical communication is implicit in
//! the branching. Simulation propagates each hypothesis density operator
//! through every branch with the square-root (Lüders) update, so untouched
//! factors are exactly invariant and declared probabilities are exact up
//! to floating point.

mod named;
mod simulate;

pub use named::{
    build_named_protocol, build_sequential_marking_protocol, named_protocol_hypotheses,
    NamedProtocol, YuMode,
};
pub use simulate::simulate;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::detect::{DetectError, DetectingCertificate};
use crate::ensembles::{Ensemble, EnsembleError, MemberBody};
use crate::numkernel::{NumError, Operator, ToleranceConfig};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("malformed POVM: {0}")]
    MalformedPovm(String),
    #[error("malformed protocol tree: {0}")]
    MalformedTree(String),
    #[error("answer label `{0}` is not a hypothesis")]
    UnmappedAnswer(String),
    #[error("missing base certificate for member `{0}`")]
    MissingCertificate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A labeled collection of effects on one subsystem.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<(String, Operator)>,
}

impl Povm {
    pub fn new(effects: Vec<(String, Operator)>) -> Result<Self, ProtocolError> {
        if effects.is_empty() {
            return Err(ProtocolError::MalformedPovm("no effects".into()));
        }
        let dim = effects[0].1.total_dim();
        let mut seen = std::collections::BTreeSet::new();
        for (label, op) in &effects {
            if op.total_dim() != dim {
                return Err(ProtocolError::MalformedPovm(format!(
                    "effect `{label}` has dimension {} != {dim}",
                    op.total_dim()
                )));
            }
            if !seen.insert(label.clone()) {
                return Err(ProtocolError::MalformedPovm(format!("duplicate label `{label}`")));
            }
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[(String, Operator)] {
        &self.effects
    }

    pub fn total_dim(&self) -> usize {
        self.effects[0].1.total_dim()
    }

    /// Max-entry deviation of the effect sum from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.total_dim();
        let mut sum = Operator::new(
            self.effects[0].1.dims().to_vec(),
            crate::numkernel::CMatrix::zeros(dim, dim),
        )
        .expect("square zero matrix");
        for (_, op) in &self.effects {
            sum = sum.add(op).expect("uniform dims");
        }
        let identity = Operator::identity(self.effects[0].1.dims().to_vec()).expect("valid dims");
        sum.max_abs_diff(&identity).expect("uniform dims")
    }
}

/// Validity report for one POVM.
#[derive(Clone, Debug)]
pub struct PovmReport {
    pub hermiticity_residual: f64,
    pub min_effect_eigenvalue: f64,
    pub completeness_residual: f64,
    pub pass: bool,
}

/// Check hermiticity, positivity and completeness of a POVM.
pub fn verify_povm(p: &Povm, tol: &ToleranceConfig) -> PovmReport {
    let mut herm = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for (_, op) in p.effects() {
        herm = herm.max(op.hermiticity_residual());
        min_eig = min_eig.min(op.min_eigenvalue());
    }
    let completeness = p.completeness_residual();
    let pass = herm <= tol.identity_tol && min_eig >= -1e-9 && completeness <= tol.identity_tol;
    PovmReport {
        hermiticity_residual: herm,
        min_effect_eigenvalue: min_eig,
        completeness_residual: completeness,
        pass,
    }
}

/// Terminal outcome of a protocol path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Declaration {
    Answer(String),
    Inconclusive,
}

/// Child of one measurement outcome.
#[derive(Clone, Debug)]
pub enum Branch {
    Node(Box<ProtocolNode>),
    Leaf(Declaration),
}

/// One measurement round: a POVM on a subset of one party's factors.
#[derive(Clone, Debug)]
pub struct ProtocolNode {
    pub acting_party: usize,
    /// Global tensor-factor positions, strictly ascending, all owned by the
    /// acting party.
    pub subsystem: Vec<usize>,
    pub povm: Povm,
    /// One branch per effect label, same order as the effects.
    pub branches: Vec<(String, Branch)>,
}

impl ProtocolNode {
    pub fn new(
        acting_party: usize,
        subsystem: Vec<usize>,
        povm: Povm,
        branches: Vec<(String, Branch)>,
    ) -> Result<Self, ProtocolError> {
        let effect_labels: Vec<&str> = povm.effects().iter().map(|(l, _)| l.as_str()).collect();
        let branch_labels: Vec<&str> = branches.iter().map(|(l, _)| l.as_str()).collect();
        if effect_labels != branch_labels {
            return Err(ProtocolError::MalformedTree(format!(
                "branches {branch_labels:?} do not match outcomes {effect_labels:?}"
            )));
        }
        if subsystem.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ProtocolError::MalformedTree(
                "subsystem positions must be strictly ascending".into(),
            ));
        }
        Ok(Self { acting_party, subsystem, povm, branches })
    }

    /// Leaf helper.
    pub fn answer(label: impl Into<String>) -> Branch {
        Branch::Leaf(Declaration::Answer(label.into()))
    }

    pub fn inconclusive() -> Branch {
        Branch::Leaf(Declaration::Inconclusive)
    }

    /// Serialize the tree: node = {party, subsystem, effects, branches}.
    pub fn to_json_value(&self) -> serde_json::Value {
        use serde_json::{json, Value};
        fn branch_value(b: &Branch) -> Value {
            match b {
                Branch::Node(n) => n.to_json_value(),
                Branch::Leaf(Declaration::Answer(l)) => json!({ "answer": l }),
                Branch::Leaf(Declaration::Inconclusive) => Value::String("inconclusive".into()),
            }
        }
        let effects: Vec<Value> = self
            .povm
            .effects()
            .iter()
            .map(|(l, op)| json!({ "label": l, "matrix": crate::jsonutil::matrix_to_json(op) }))
            .collect();
        let mut branches = serde_json::Map::new();
        for (l, b) in &self.branches {
            branches.insert(l.clone(), branch_value(b));
        }
        json!({
            "party": self.acting_party,
            "subsystem": self.subsystem,
            "effects": effects,
            "branches": Value::Object(branches),
        })
    }
}

/// Measured statistics of one hypothesis under a protocol.
#[derive(Clone, Debug)]
pub struct HypothesisOutcome {
    /// Declaration label ("inconclusive" for the silent outcome) -> probability.
    pub distribution: BTreeMap<String, f64>,
    pub success_probability: f64,
    pub error_probability: f64,
}

/// Exact per-hypothesis outcome statistics of a protocol.
#[derive(Clone, Debug)]
pub struct SimulationReport {
    pub per_hypothesis: BTreeMap<String, HypothesisOutcome>,
    /// True when every answer declaration has probability <= 1e-12 under
    /// every non-matching hypothesis.
    pub zero_error: bool,
}

impl SimulationReport {
    pub fn success(&self, label: &str) -> f64 {
        self.per_hypothesis.get(label).map_or(0.0, |h| h.success_probability)
    }
}

/// Trace conditions of a conclusive measurement on a full-space POVM.
#[derive(Clone, Debug)]
pub struct ConclusiveReport {
    /// Largest |Tr(rho_l P_k)| over mapped effects k and members l != k.
    pub off_diagonal_max: f64,
    /// Effect label -> Tr(rho_k P_k) for its mapped member.
    pub success_probabilities: BTreeMap<String, f64>,
    pub pass: bool,
}

/// Verify Tr(rho_l P_k) = p_k δ_{l,k} for every answering effect.
pub fn verify_conclusive_condition(
    p: &Povm,
    e: &Ensemble,
    answer_map: &BTreeMap<String, String>,
    tol: &ToleranceConfig,
) -> Result<ConclusiveReport, ProtocolError> {
    if p.total_dim() != e.structure().total_dim() {
        return Err(ProtocolError::MalformedPovm(format!(
            "POVM dimension {} vs ensemble dimension {}",
            p.total_dim(),
            e.structure().total_dim()
        )));
    }
    for target in answer_map.values() {
        e.member_index(target).map_err(|_| ProtocolError::UnmappedAnswer(target.clone()))?;
    }
    let mut off_max = 0.0f64;
    let mut successes = BTreeMap::new();
    let mut pass = true;
    for (label, effect) in p.effects() {
        let Some(target) = answer_map.get(label) else { continue };
        for member in e.members() {
            let rho = match member.body() {
                MemberBody::Pure(s) => Operator::projector(s),
                MemberBody::Mixed(o) => o.clone(),
            };
            let t = rho.trace_product(effect)?;
            if member.label() == target {
                successes.insert(label.clone(), t.re);
                if t.re <= 0.0 {
                    pass = false;
                }
            } else {
                off_max = off_max.max(t.norm());
            }
        }
    }
    if off_max > tol.identity_tol {
        pass = false;
    }
    Ok(ConclusiveReport { off_diagonal_max: off_max, success_probabilities: successes, pass })
}

/// The two-effect full-space POVM induced by a detecting certificate.
pub fn povm_from_certificate(
    cert: &DetectingCertificate,
    e: &Ensemble,
) -> Result<Povm, ProtocolError> {
    let phi = cert.detector_state(e)?;
    let detect = Operator::projector(&phi);
    let identity = Operator::identity(phi.dims().to_vec())?;
    let rest = identity.sub(&detect)?;
    Povm::new(vec![("detect".into(), detect), ("rest".into(), rest)])
}

#[cfg(test)]
mod tests;
