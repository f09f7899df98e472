use std::collections::BTreeMap;

use super::*;
use crate::detect::{exact_product_detect, DetectOutcome};
use crate::ensembles::named::trine_state;
use crate::ensembles::{build_named, Ensemble, EnsembleMember, NamedEnsemble, PartyStructure};
use crate::marking::derive_marking_set;
use crate::numkernel::{hermitian_inner, StateVector, ToleranceConfig, C64};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn named(which: NamedEnsemble) -> Ensemble {
    build_named(which).unwrap()
}

fn prop1_measurement() -> Povm {
    // Product basis {w1p w2p, w1p w2, w1 w2p, w1 w2} on the full space.
    let w1 = trine_state(1);
    let w2 = trine_state(2);
    let w1p = crate::ensembles::named::qubit_perp(&w1);
    let w2p = crate::ensembles::named::qubit_perp(&w2);
    let t = crate::numkernel::tensor_product;
    Povm::new(vec![
        ("E0".into(), Operator::projector(&t(&w1p, &w2p))),
        ("E1".into(), Operator::projector(&t(&w1p, &w2))),
        ("E2".into(), Operator::projector(&t(&w1, &w2p))),
        ("E3".into(), Operator::projector(&t(&w1, &w2))),
    ])
    .unwrap()
}

#[test]
fn computational_projectors_form_a_povm() {
    let e0 = StateVector::basis(vec![2], 0).unwrap();
    let e1 = StateVector::basis(vec![2], 1).unwrap();
    let p = Povm::new(vec![
        ("0".into(), Operator::projector(&e0)),
        ("1".into(), Operator::projector(&e1)),
    ])
    .unwrap();
    assert!(verify_povm(&p, &tol()).pass);
}

#[test]
fn prop1_product_basis_is_a_valid_povm() {
    assert!(verify_povm(&prop1_measurement(), &tol()).pass);
}

#[test]
fn scaled_down_effects_fail_completeness() {
    let e0 = StateVector::basis(vec![2], 0).unwrap();
    let e1 = StateVector::basis(vec![2], 1).unwrap();
    let p = Povm::new(vec![
        ("0".into(), Operator::projector(&e0).scale(C64::new(0.9, 0.0))),
        ("1".into(), Operator::projector(&e1).scale(C64::new(0.9, 0.0))),
    ])
    .unwrap();
    let report = verify_povm(&p, &tol());
    assert!(!report.pass);
    assert!(report.completeness_residual > 0.05);
}

// Oracle for the trine success value: |<w0|w1perp>|^2 |<w0|w2perp>|^2 = (3/4)^2.
fn trine_success_oracle() -> f64 {
    let w0 = trine_state(0);
    let a = hermitian_inner(&crate::ensembles::named::qubit_perp(&trine_state(1)), &w0)
        .unwrap()
        .norm_sqr();
    let b = hermitian_inner(&crate::ensembles::named::qubit_perp(&trine_state(2)), &w0)
        .unwrap()
        .norm_sqr();
    a * b
}

#[test]
fn conclusive_condition_holds_for_the_trine_effect() {
    let e = named(NamedEnsemble::PwTrine);
    let mut answers = BTreeMap::new();
    answers.insert("E0".to_string(), "w0w0".to_string());
    let report = verify_conclusive_condition(&prop1_measurement(), &e, &answers, &tol()).unwrap();
    assert!(report.pass);
    assert!(report.off_diagonal_max <= 1e-12);
    let oracle = trine_success_oracle();
    assert!((oracle - 9.0 / 16.0).abs() < 1e-12);
    assert!((report.success_probabilities["E0"] - oracle).abs() < 1e-9);
}

#[test]
fn identity_povm_fails_the_conclusive_condition() {
    let e = named(NamedEnsemble::PwTrine);
    let p = Povm::new(vec![(
        "all".into(),
        Operator::identity(vec![2, 2]).unwrap(),
    )])
    .unwrap();
    let mut answers = BTreeMap::new();
    answers.insert("all".to_string(), "w0w0".to_string());
    let report = verify_conclusive_condition(&p, &e, &answers, &tol()).unwrap();
    assert!(!report.pass);
}

#[test]
fn certificate_induced_povm_passes_for_its_target() {
    let e = named(NamedEnsemble::Bennett9);
    let cert = match exact_product_detect(&e, "psi1", 1 << 20, &tol()).unwrap() {
        DetectOutcome::Feasible(c) => c,
        DetectOutcome::Infeasible(_) => unreachable!(),
    };
    let povm = povm_from_certificate(&cert, &e).unwrap();
    assert!(verify_povm(&povm, &tol()).pass);
    let mut answers = BTreeMap::new();
    answers.insert("detect".to_string(), "psi1".to_string());
    let report = verify_conclusive_condition(&povm, &e, &answers, &tol()).unwrap();
    assert!(report.pass);
}

#[test]
fn unmapped_answer_labels_error() {
    let e = named(NamedEnsemble::PwTrine);
    let mut answers = BTreeMap::new();
    answers.insert("E0".to_string(), "nope".to_string());
    assert!(matches!(
        verify_conclusive_condition(&prop1_measurement(), &e, &answers, &tol()),
        Err(ProtocolError::UnmappedAnswer(_))
    ));
}

fn single_qubit_pair_ensemble() -> Ensemble {
    let st = PartyStructure::new(vec![2, 2], vec![0, 1]).unwrap();
    let e0 = StateVector::basis(vec![2], 0).unwrap();
    let e1 = StateVector::basis(vec![2], 1).unwrap();
    Ensemble::new(
        "pair",
        st.clone(),
        vec![
            EnsembleMember::product("zero", &st, vec![e0.clone(), e0.clone()]).unwrap(),
            EnsembleMember::product("one", &st, vec![e1.clone(), e1]).unwrap(),
        ],
    )
    .unwrap()
}

#[test]
fn one_round_computational_measurement_discriminates_basis_states() {
    let e = single_qubit_pair_ensemble();
    let povm = Povm::new(vec![
        ("0".into(), Operator::projector(&StateVector::basis(vec![2], 0).unwrap())),
        ("1".into(), Operator::projector(&StateVector::basis(vec![2], 1).unwrap())),
    ])
    .unwrap();
    let root = ProtocolNode::new(
        0,
        vec![0],
        povm,
        vec![
            ("0".into(), ProtocolNode::answer("zero")),
            ("1".into(), ProtocolNode::answer("one")),
        ],
    )
    .unwrap();
    let report = simulate(&root, &e, &tol()).unwrap();
    assert!(report.zero_error);
    for label in ["zero", "one"] {
        let h = &report.per_hypothesis[label];
        assert!((h.success_probability - 1.0).abs() < 1e-12);
        assert!(h.error_probability <= 1e-12);
    }
}

#[test]
fn measuring_the_other_partys_factor_is_rejected() {
    let e = single_qubit_pair_ensemble();
    let povm = Povm::new(vec![(
        "all".into(),
        Operator::identity(vec![2]).unwrap(),
    )])
    .unwrap();
    let root = ProtocolNode::new(
        0,
        vec![1], // factor 1 belongs to party 1
        povm,
        vec![("all".into(), ProtocolNode::inconclusive())],
    )
    .unwrap();
    assert!(matches!(
        simulate(&root, &e, &tol()),
        Err(ProtocolError::MalformedTree(_))
    ));
}

#[test]
fn trine_protocols_reach_nine_sixteenths_per_target() {
    let e = named(NamedEnsemble::PwTrine);
    let oracle = trine_success_oracle();
    for target in 0..3usize {
        let root = build_named_protocol(NamedProtocol::PwConclusive { target }).unwrap();
        let report = simulate(&root, &e, &tol()).unwrap();
        assert!(report.zero_error, "target {target}");
        let label = format!("w{target}w{target}");
        assert!((report.success(&label) - oracle).abs() <= 1e-9);
        for m in e.members() {
            if m.label() != label {
                assert!(report.per_hypothesis[m.label()].error_probability <= 1e-12);
            }
        }
    }
}

// Density-matrix oracle for the pairwise-mixed marking values: the strict
// detector probability is <01|sigma|01>, the anticorrelated probability is
// the sum over all i != j.
fn yu_oracle(d: usize) -> (f64, f64) {
    let base = named(NamedEnsemble::Yu { d });
    let sigma = base.member("sigma").unwrap().body().density();
    let mut strict = 0.0;
    let mut anti = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let ket = StateVector::basis(vec![d, d], i * d + j).unwrap();
            let p = Operator::projector(&ket);
            let val = sigma.trace_product(&p).unwrap().re;
            anti += val;
            if i == 0 && j == 1 {
                strict = val;
            }
        }
    }
    (strict, anti)
}

#[test]
fn yu_marking_success_matches_the_density_matrix_oracle() {
    for d in [2usize, 3] {
        let (strict, anti) = yu_oracle(d);
        assert!((strict - 1.0 / ((d * d - 1) as f64)).abs() < 1e-12);
        assert!((anti - d as f64 / (d as f64 + 1.0)).abs() < 1e-12);
        for (mode, expect) in [(YuMode::Strict01, strict), (YuMode::AnyAnticorrelated, anti)] {
            let hyps =
                named_protocol_hypotheses(NamedProtocol::YuMarking { d, mode }).unwrap();
            let root = build_named_protocol(NamedProtocol::YuMarking { d, mode }).unwrap();
            let report = simulate(&root, &hyps, &tol()).unwrap();
            assert!(report.zero_error, "d={d} {mode:?}");
            for label in ["rho_sigma", "sigma_rho"] {
                assert!(
                    (report.success(label) - expect).abs() <= 1e-9,
                    "d={d} {mode:?} {label}: {} vs {expect}",
                    report.success(label)
                );
            }
        }
    }
}

#[test]
fn upb_marking_is_zero_error_with_positive_success() {
    let hyps = named_protocol_hypotheses(NamedProtocol::UpbMarking).unwrap();
    let root = build_named_protocol(NamedProtocol::UpbMarking).unwrap();
    let report = simulate(&root, &hyps, &tol()).unwrap();
    assert!(report.zero_error);
    for label in ["upb_first", "upb_second"] {
        let s = report.success(label);
        assert!(s > 0.0, "{label} success {s}");
        assert!((s - 0.2).abs() < 1e-9, "tiles click probability is 1/5");
    }
}

fn trine_certs() -> BTreeMap<String, crate::detect::DetectingCertificate> {
    let e = named(NamedEnsemble::PwTrine);
    let mut out = BTreeMap::new();
    for m in e.members() {
        match exact_product_detect(&e, m.label(), 1 << 20, &tol()).unwrap() {
            DetectOutcome::Feasible(c) => out.insert(m.label().to_string(), c),
            DetectOutcome::Infeasible(_) => unreachable!(),
        };
    }
    out
}

#[test]
fn sequential_marking_on_the_trine_is_zero_error_and_composes() {
    let e = named(NamedEnsemble::PwTrine);
    let d = derive_marking_set(&e, 2).unwrap();
    let certs = trine_certs();
    let root = build_sequential_marking_protocol(&d, &certs).unwrap();
    let report = simulate(&root, d.derived(), &tol()).unwrap();
    assert!(report.zero_error);
    // Per-tuple success equals the product of the per-slot detector
    // probabilities (candidate-count subnormalization included).
    for tuple in d.tuples() {
        let label = d.tuple_label(tuple);
        let s = report.success(&label);
        assert!(s > 0.0, "{label}");
        let mut expect = 1.0;
        for (slot, &k) in tuple.iter().enumerate() {
            let c = e.len() - slot;
            let t = certs[e.members()[k].label()].target_overlap_modulus;
            expect *= t * t / (c * c) as f64;
        }
        assert!((s - expect).abs() <= 1e-9, "{label}: {s} vs {expect}");
    }
    // Distributions are normalized.
    for h in report.per_hypothesis.values() {
        let total: f64 = h.distribution.values().sum();
        assert!((total - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sequential_marking_m1_reduces_to_discrimination() {
    let e = named(NamedEnsemble::PwTrine);
    let d = derive_marking_set(&e, 1).unwrap();
    let root = build_sequential_marking_protocol(&d, &trine_certs()).unwrap();
    let report = simulate(&root, d.derived(), &tol()).unwrap();
    assert!(report.zero_error);
    for m in e.members() {
        assert!(report.success(m.label()) > 0.0);
    }
}

#[test]
fn sequential_marking_requires_every_certificate() {
    let e = named(NamedEnsemble::PwTrine);
    let d = derive_marking_set(&e, 2).unwrap();
    let mut certs = trine_certs();
    certs.remove("w1w1");
    assert!(matches!(
        build_sequential_marking_protocol(&d, &certs),
        Err(ProtocolError::MissingCertificate(_))
    ));
}

#[test]
fn protocol_trees_serialize_to_json() {
    let root = build_named_protocol(NamedProtocol::PwConclusive { target: 0 }).unwrap();
    let v = root.to_json_value();
    assert_eq!(v["party"], 0);
    assert!(v["branches"]["perp"]["branches"]["perp"]["answer"] == "w0w0");
}
