//! Named protocols and the generic sequential marking construction.

use std::collections::BTreeMap;

use crate::detect::DetectingCertificate;
use crate::ensembles::named::{qubit_perp, tiles_factors, trine_state};
use crate::ensembles::{build_named, Ensemble, EnsembleMember, NamedEnsemble, PartyStructure};
use crate::marking::DerivedMarkingSet;
use crate::numkernel::{Operator, StateVector, C64};

use super::{Branch, Povm, ProtocolError, ProtocolNode};

/// Detection rule for the pairwise-mixed marking protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YuMode {
    /// Only the (0,1) outcome pair counts as a detection.
    Strict01,
    /// Any anticorrelated outcome pair counts; zero error is preserved
    /// because the maximally entangled state never anticorrelates.
    AnyAnticorrelated,
}

/// Protocols shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedProtocol {
    /// Conclusive identification of one double-trine member (0, 1 or 2):
    /// both parties measure the orthogonal-complement basis of the other
    /// two trine directions.
    PwConclusive { target: usize },
    /// Two-round computational-basis marking of {rho x sigma, sigma x rho}
    /// built from the maximally entangled/complement pair in dimension d.
    YuMarking { d: usize, mode: YuMode },
    /// Two-round marking of {upb x ent, ent x upb} using local projections
    /// onto the first tiles member's factors.
    UpbMarking,
}

fn projector_povm(states: &[(String, StateVector)]) -> Result<Povm, ProtocolError> {
    Povm::new(
        states
            .iter()
            .map(|(l, s)| (l.clone(), Operator::projector(s)))
            .collect(),
    )
}

/// Two-effect POVM {projector, rest} on the subsystem of `state`.
fn click_povm(state: &StateVector) -> Result<Povm, ProtocolError> {
    let p = Operator::projector(state);
    let identity = Operator::identity(state.dims().to_vec())?;
    let rest = identity.sub(&p)?;
    Povm::new(vec![("click".into(), p), ("rest".into(), rest)])
}

fn computational_povm(d: usize) -> Result<Povm, ProtocolError> {
    let effects = (0..d)
        .map(|i| {
            let e = StateVector::basis(vec![d], i).expect("valid index");
            (i.to_string(), Operator::projector(&e))
        })
        .collect();
    Povm::new(effects)
}

/// The hypothesis ensemble a named protocol is meant to discriminate.
pub fn named_protocol_hypotheses(which: NamedProtocol) -> Result<Ensemble, ProtocolError> {
    match which {
        NamedProtocol::PwConclusive { .. } => Ok(build_named(NamedEnsemble::PwTrine)?),
        NamedProtocol::YuMarking { d, .. } => {
            let base = build_named(NamedEnsemble::Yu { d })?;
            let rho = base.member("rho")?.body().density();
            let sigma = base.member("sigma")?.body().density();
            pair_marking_ensemble(
                format!("yu{d}_(2)"),
                d,
                ("rho_sigma", &rho, &sigma),
                ("sigma_rho", &sigma, &rho),
            )
        }
        NamedProtocol::UpbMarking => {
            let base = build_named(NamedEnsemble::XbFromUpb)?;
            let upb = base.member("sigma_upb")?.body().density();
            let ent = base.member("rho_ent")?.body().density();
            pair_marking_ensemble(
                "xb_(2)".to_string(),
                3,
                ("upb_first", &upb, &ent),
                ("upb_second", &ent, &upb),
            )
        }
    }
}

/// {first x second, ...} over two bipartite d x d states, regrouped to the
/// (A1,A2,B1,B2) party convention.
fn pair_marking_ensemble(
    name: String,
    d: usize,
    m1: (&str, &Operator, &Operator),
    m2: (&str, &Operator, &Operator),
) -> Result<Ensemble, ProtocolError> {
    let st = PartyStructure::new(vec![d, d, d, d], vec![0, 0, 1, 1])?;
    let build = |slot1: &Operator, slot2: &Operator| -> Result<Operator, ProtocolError> {
        // slot tensor is ordered (A1,B1,A2,B2); regroup to (A1,A2,B1,B2)
        Ok(Operator::tensor(slot1, slot2).regroup_factors(&[0, 2, 1, 3])?)
    };
    let members = vec![
        EnsembleMember::mixed(m1.0, build(m1.1, m1.2)?),
        EnsembleMember::mixed(m2.0, build(m2.1, m2.2)?),
    ];
    Ok(Ensemble::new(name, st, members)?)
}

/// Build a named protocol tree.
pub fn build_named_protocol(which: NamedProtocol) -> Result<ProtocolNode, ProtocolError> {
    match which {
        NamedProtocol::PwConclusive { target } => {
            if target > 2 {
                return Err(ProtocolError::InvalidParameter(format!(
                    "trine target {target} out of range 0..=2"
                )));
            }
            let w1 = trine_state((target + 1) % 3);
            let w2 = trine_state((target + 2) % 3);
            let bob = ProtocolNode::new(
                1,
                vec![1],
                projector_povm(&[
                    ("perp".into(), qubit_perp(&w2)),
                    ("par".into(), w2.clone()),
                ])?,
                vec![
                    ("perp".into(), ProtocolNode::answer(format!("w{target}w{target}"))),
                    ("par".into(), ProtocolNode::inconclusive()),
                ],
            )?;
            ProtocolNode::new(
                0,
                vec![0],
                projector_povm(&[
                    ("perp".into(), qubit_perp(&w1)),
                    ("par".into(), w1.clone()),
                ])?,
                vec![
                    ("perp".into(), Branch::Node(Box::new(bob))),
                    ("par".into(), ProtocolNode::inconclusive()),
                ],
            )
        }
        NamedProtocol::YuMarking { d, mode } => {
            if d < 2 {
                return Err(ProtocolError::InvalidParameter(format!(
                    "yu marking requires d >= 2, got {d}"
                )));
            }
            let detects = |a: usize, b: usize| match mode {
                YuMode::Strict01 => a == 0 && b == 1,
                YuMode::AnyAnticorrelated => a != b,
            };
            let slot2 = yu_round(d, 1, 3, &|a, b| {
                if detects(a, b) {
                    ProtocolNode::answer("rho_sigma")
                } else {
                    ProtocolNode::inconclusive()
                }
            })?;
            yu_round(d, 0, 2, &|a, b| {
                if detects(a, b) {
                    ProtocolNode::answer("sigma_rho")
                } else if a == b {
                    Branch::Node(Box::new(slot2.clone()))
                } else {
                    ProtocolNode::inconclusive()
                }
            })
        }
        NamedProtocol::UpbMarking => {
            let (u_a, u_b) = tiles_factors().into_iter().next().expect("five tiles members");
            let slot2 = upb_round(&u_a, &u_b, 1, 3, "upb_second", ProtocolNode::inconclusive())?;
            upb_round(&u_a, &u_b, 0, 2, "upb_first", Branch::Node(Box::new(slot2)))
        }
    }
}

/// One computational round on factors (a_factor, b_factor): Alice measures,
/// then Bob, and `decide(a, b)` picks the continuation.
fn yu_round(
    d: usize,
    a_factor: usize,
    b_factor: usize,
    decide: &dyn Fn(usize, usize) -> Branch,
) -> Result<ProtocolNode, ProtocolError> {
    let mut alice_branches = Vec::with_capacity(d);
    for a in 0..d {
        let bob_branches =
            (0..d).map(|b| (b.to_string(), decide(a, b))).collect::<Vec<_>>();
        let bob = ProtocolNode::new(1, vec![b_factor], computational_povm(d)?, bob_branches)?;
        alice_branches.push((a.to_string(), Branch::Node(Box::new(bob))));
    }
    ProtocolNode::new(0, vec![a_factor], computational_povm(d)?, alice_branches)
}

/// One click-test round on factors (a_factor, b_factor): both parties test
/// their factor of the chosen UPB member; a double click answers, anything
/// else follows `fallback`.
fn upb_round(
    u_a: &StateVector,
    u_b: &StateVector,
    a_factor: usize,
    b_factor: usize,
    answer: &str,
    fallback: Branch,
) -> Result<ProtocolNode, ProtocolError> {
    let bob = ProtocolNode::new(
        1,
        vec![b_factor],
        click_povm(u_b)?,
        vec![
            ("click".into(), ProtocolNode::answer(answer)),
            ("rest".into(), fallback.clone()),
        ],
    )?;
    ProtocolNode::new(
        0,
        vec![a_factor],
        click_povm(u_a)?,
        vec![
            ("click".into(), Branch::Node(Box::new(bob))),
            ("rest".into(), fallback),
        ],
    )
}

/// Slot-by-slot marking protocol from per-member detecting certificates.
///
/// At slot s with candidate set C, every party measures the subnormalized
/// POVM {|phi_k><phi_k| / |C|}_{k in C} plus a remainder on its slot-s
/// factors; matching conclusive outcomes across all parties identify the
/// slot's member and the protocol recurses on the remaining candidates.
/// Mismatched or remainder outcomes end inconclusively, so a tuple is only
/// ever declared after every slot matched — zero error by the detecting
/// property of the certificates.
pub fn build_sequential_marking_protocol(
    d: &DerivedMarkingSet,
    base_certificates: &BTreeMap<String, DetectingCertificate>,
) -> Result<ProtocolNode, ProtocolError> {
    for m in d.base().members() {
        if !base_certificates.contains_key(m.label()) {
            return Err(ProtocolError::MissingCertificate(m.label().to_string()));
        }
    }
    let candidates: Vec<usize> = (0..d.base().len()).collect();
    let mut prefix = Vec::new();
    slot_node(d, base_certificates, &candidates, &mut prefix, 0)
}

fn slot_node(
    d: &DerivedMarkingSet,
    certs: &BTreeMap<String, DetectingCertificate>,
    candidates: &[usize],
    prefix: &mut Vec<usize>,
    slot: usize,
) -> Result<ProtocolNode, ProtocolError> {
    party_chain(d, certs, candidates, prefix, slot, 0, None)
}

fn party_chain(
    d: &DerivedMarkingSet,
    certs: &BTreeMap<String, DetectingCertificate>,
    candidates: &[usize],
    prefix: &mut Vec<usize>,
    slot: usize,
    party: usize,
    matched: Option<usize>,
) -> Result<ProtocolNode, ProtocolError> {
    let base = d.base();
    let parties = base.structure().num_parties();
    let subsystem = d.slot_party_factor_positions(party, slot);
    let sub_dims = base.structure().party_factor_dims(party);
    let scale = C64::new(1.0 / candidates.len() as f64, 0.0);

    let mut effects = Vec::with_capacity(candidates.len() + 1);
    let mut sum = Operator::new(
        sub_dims.clone(),
        crate::numkernel::CMatrix::zeros(
            sub_dims.iter().product(),
            sub_dims.iter().product(),
        ),
    )?;
    for &k in candidates {
        let label = base.members()[k].label().to_string();
        let vector = &certs[&label].per_party_vectors[party];
        let effect = Operator::projector(vector).scale(scale);
        sum = sum.add(&effect)?;
        effects.push((label, effect));
    }
    let rest = Operator::identity(sub_dims)?.sub(&sum)?;
    effects.push(("rest".into(), rest));
    let povm = Povm::new(effects)?;

    let mut branches = Vec::with_capacity(candidates.len() + 1);
    for &k in candidates {
        let label = base.members()[k].label().to_string();
        let continues = matched.map_or(true, |c| c == k);
        let branch = if !continues {
            ProtocolNode::inconclusive()
        } else if party + 1 < parties {
            Branch::Node(Box::new(party_chain(d, certs, candidates, prefix, slot, party + 1, Some(k))?))
        } else {
            // Slot settled on k: recurse into the next slot or declare.
            prefix.push(k);
            let next = if slot + 1 < d.m() {
                let remaining: Vec<usize> =
                    candidates.iter().copied().filter(|&c| c != k).collect();
                Branch::Node(Box::new(slot_node(d, certs, &remaining, prefix, slot + 1)?))
            } else {
                ProtocolNode::answer(d.tuple_label(prefix))
            };
            prefix.pop();
            next
        };
        branches.push((label, branch));
    }
    branches.push(("rest".into(), ProtocolNode::inconclusive()));
    ProtocolNode::new(party, subsystem, povm, branches)
}
