use super::*;
use crate::ensembles::{build_named, Ensemble, EnsembleMember, NamedEnsemble, PartyStructure};
use crate::marking::derive_marking_set;
use crate::numkernel::{hermitian_inner, StateVector, C64};

fn cfg() -> DetectConfig {
    DetectConfig::default()
}

fn named(which: NamedEnsemble) -> Ensemble {
    build_named(which).unwrap()
}

fn basis_overlap(v: &StateVector, dims: Vec<usize>, index: usize) -> f64 {
    hermitian_inner(&StateVector::basis(dims, index).unwrap(), v).unwrap().norm()
}

#[test]
fn bennett9_first_member_detected_by_one_one() {
    let e = named(NamedEnsemble::Bennett9);
    let out = exact_product_detect(&e, "psi1", 1 << 20, &cfg().tol).unwrap();
    match out {
        DetectOutcome::Feasible(cert) => {
            assert!(cert.max_offtarget_overlap <= 1e-9);
            assert!(cert.target_overlap_modulus >= 1.0 - 1e-9);
            // The first feasible branch reproduces the computational-basis
            // detector |1>x|1> up to phase.
            assert!((basis_overlap(&cert.per_party_vectors[0], vec![3], 1) - 1.0).abs() < 1e-9);
            assert!((basis_overlap(&cert.per_party_vectors[1], vec![3], 1) - 1.0).abs() < 1e-9);
        }
        DetectOutcome::Infeasible(_) => panic!("psi1 must be detectable"),
    }
}

#[test]
fn bennett9_every_member_is_detectable() {
    let e = named(NamedEnsemble::Bennett9);
    for m in e.members() {
        let out = exact_product_detect(&e, m.label(), 1 << 20, &cfg().tol).unwrap();
        assert!(matches!(out, DetectOutcome::Feasible(_)), "{} must be detectable", m.label());
    }
}

#[test]
fn duan4_targets_are_all_infeasible_over_eight_branches() {
    let e = named(NamedEnsemble::Duan4);
    for m in e.members() {
        match exact_product_detect(&e, m.label(), 1 << 20, &cfg().tol).unwrap() {
            DetectOutcome::Infeasible(report) => {
                assert_eq!(report.branch_count, 8);
                assert_eq!(report.per_branch_failure.len(), 8);
                let mut seen: Vec<u64> =
                    report.per_branch_failure.iter().map(|b| b.assignment).collect();
                seen.sort_unstable();
                assert_eq!(seen, (0..8).collect::<Vec<_>>());
            }
            DetectOutcome::Feasible(_) => panic!("{} must be infeasible", m.label()),
        }
    }
}

#[test]
fn duan4_pair_set_target_fails_all_2048_branches() {
    let e = named(NamedEnsemble::Duan4);
    let d = derive_marking_set(&e, 2).unwrap();
    match exact_product_detect(d.derived(), "D1-D2", 1 << 20, &cfg().tol).unwrap() {
        DetectOutcome::Infeasible(report) => {
            assert_eq!(report.branch_count, 2048);
            assert_eq!(report.per_branch_failure.len(), 2048);
        }
        DetectOutcome::Feasible(_) => panic!("D1-D2 must be infeasible"),
    }
}

#[test]
fn singleton_is_detected_by_itself() {
    let e = named(NamedEnsemble::Duan4);
    let single = e.subset(&[2], "single");
    let out = exact_product_detect(&single, "D3", 1 << 20, &cfg().tol).unwrap();
    match out {
        DetectOutcome::Feasible(cert) => {
            assert!(cert.target_overlap_modulus >= 1.0 - 1e-9);
        }
        DetectOutcome::Infeasible(_) => panic!("singleton must be feasible"),
    }
}

#[test]
fn exact_detect_rejects_non_product_members() {
    let e = named(NamedEnsemble::Bell);
    assert!(matches!(
        exact_product_detect(&e, "B1", 1 << 20, &cfg().tol),
        Err(DetectError::NonProductMember(_))
    ));
}

#[test]
fn branch_cap_is_enforced() {
    let e = named(NamedEnsemble::Duan4);
    let d = derive_marking_set(&e, 2).unwrap();
    assert!(matches!(
        exact_product_detect(d.derived(), "D1-D2", 100, &cfg().tol),
        Err(DetectError::BranchCapExceeded { .. })
    ));
}

fn bennett9_base_certs() -> (Ensemble, std::collections::BTreeMap<String, DetectingCertificate>) {
    let e = named(NamedEnsemble::Bennett9);
    let mut certs = std::collections::BTreeMap::new();
    for m in e.members() {
        match exact_product_detect(&e, m.label(), 1 << 20, &cfg().tol).unwrap() {
            DetectOutcome::Feasible(c) => {
                certs.insert(m.label().to_string(), c);
            }
            DetectOutcome::Infeasible(_) => unreachable!(),
        }
    }
    (e, certs)
}

#[test]
fn compositional_detect_verifies_all_72_pair_certificates() {
    let (e, certs) = bennett9_base_certs();
    let d = derive_marking_set(&e, 2).unwrap();
    let composed = compositional_detect(&d, &certs, &cfg().tol).unwrap();
    assert_eq!(composed.len(), 72);
    for cert in composed.values() {
        assert!(cert.max_offtarget_overlap <= 1e-9);
        assert!(cert.target_overlap_modulus >= TARGET_OVERLAP_FLOOR);
    }
}

#[test]
fn compositional_detect_m1_reproduces_base_certificates() {
    let (e, certs) = bennett9_base_certs();
    let d = derive_marking_set(&e, 1).unwrap();
    let composed = compositional_detect(&d, &certs, &cfg().tol).unwrap();
    assert_eq!(composed.len(), 9);
    for (label, cert) in &composed {
        let base = &certs[label];
        for (a, b) in cert.per_party_vectors.iter().zip(&base.per_party_vectors) {
            assert!((hermitian_inner(a, b).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn compositional_detect_needs_every_base_certificate() {
    let (e, mut certs) = bennett9_base_certs();
    certs.remove("psi5");
    let d = derive_marking_set(&e, 2).unwrap();
    assert!(matches!(
        compositional_detect(&d, &certs, &cfg().tol),
        Err(DetectError::MissingBaseCertificate(_))
    ));
}

#[test]
fn trine_triples_compose_from_exact_base_certificates() {
    let e = named(NamedEnsemble::PwTrine);
    let mut certs = std::collections::BTreeMap::new();
    for m in e.members() {
        match exact_product_detect(&e, m.label(), 1 << 20, &cfg().tol).unwrap() {
            DetectOutcome::Feasible(c) => certs.insert(m.label().to_string(), c),
            DetectOutcome::Infeasible(_) => panic!("trine members are detectable"),
        };
    }
    let d = derive_marking_set(&e, 3).unwrap();
    let composed = compositional_detect(&d, &certs, &cfg().tol).unwrap();
    assert_eq!(composed.len(), 6);
}

#[test]
fn heuristic_finds_the_trine_detector() {
    let e = named(NamedEnsemble::PwTrine);
    let report = heuristic_detect(&e, "w0w0", 40, 42, &cfg().tol).unwrap();
    let cert = match &report.verdict {
        HeuristicVerdict::Found(c) => c,
        HeuristicVerdict::NotFound => panic!("trine target must be found"),
    };
    assert!(cert.max_offtarget_overlap <= 1e-9);
    assert!(cert.target_overlap_modulus >= 1e-6);
    // The solution manifold kills w1 on one side and w2 on the other.
    let w1 = crate::ensembles::build_named(NamedEnsemble::PwTrine)
        .unwrap()
        .members()[1]
        .product_factors()
        .unwrap()[0]
        .clone();
    let w2 = named(NamedEnsemble::PwTrine).members()[2].product_factors().unwrap()[0].clone();
    let a_kills_w1 = hermitian_inner(&w1, &cert.per_party_vectors[0]).unwrap().norm() <= 1e-8;
    let b_kills_w1 = hermitian_inner(&w1, &cert.per_party_vectors[1]).unwrap().norm() <= 1e-8;
    let a_kills_w2 = hermitian_inner(&w2, &cert.per_party_vectors[0]).unwrap().norm() <= 1e-8;
    let b_kills_w2 = hermitian_inner(&w2, &cert.per_party_vectors[1]).unwrap().norm() <= 1e-8;
    assert!((a_kills_w1 && b_kills_w2) || (a_kills_w2 && b_kills_w1));
}

#[test]
fn heuristic_finds_detectors_for_orthogonal_products() {
    let st = PartyStructure::new(vec![2, 2], vec![0, 1]).unwrap();
    let e0 = StateVector::basis(vec![2], 0).unwrap();
    let e1 = StateVector::basis(vec![2], 1).unwrap();
    let e = Ensemble::new(
        "two_orth",
        st.clone(),
        vec![
            EnsembleMember::product("a", &st, vec![e0.clone(), e0]).unwrap(),
            EnsembleMember::product("b", &st, vec![e1.clone(), e1]).unwrap(),
        ],
    )
    .unwrap();
    for label in ["a", "b"] {
        let report = heuristic_detect(&e, label, 20, 7, &cfg().tol).unwrap();
        assert!(report.found(), "{label} must be found");
    }
}

#[test]
fn heuristic_does_not_certify_the_bell_pair_target() {
    let e = named(NamedEnsemble::Bell);
    let d = derive_marking_set(&e, 2).unwrap();
    let report = heuristic_detect(d.derived(), "B1-B2", 60, 42, &cfg().tol).unwrap();
    assert!(!report.found());
    assert!(
        report.best_offtarget_residual >= 1e-3,
        "best residual {} should stay visibly positive",
        report.best_offtarget_residual
    );
}

#[test]
fn heuristic_reports_are_deterministic() {
    let e = named(NamedEnsemble::Bell);
    let d = derive_marking_set(&e, 2).unwrap();
    let a = heuristic_detect(d.derived(), "B1-B3", 25, 9, &cfg().tol).unwrap();
    let b = heuristic_detect(d.derived(), "B1-B3", 25, 9, &cfg().tol).unwrap();
    assert_eq!(a.best_target_overlap.to_bits(), b.best_target_overlap.to_bits());
    assert_eq!(a.best_offtarget_residual.to_bits(), b.best_offtarget_residual.to_bits());
    assert_eq!(a.found(), b.found());
}

#[test]
fn heuristic_requires_bipartite_input() {
    let e = named(NamedEnsemble::Smolin);
    // Mixed member aside, the party structure alone must already reject.
    assert!(matches!(
        heuristic_detect(&e, "smolin", 5, 1, &cfg().tol),
        Err(DetectError::NotBipartite(4))
    ));
}

#[test]
fn clsd_bennett9_is_distinguishable() {
    let v = clsd_verdict(&named(NamedEnsemble::Bennett9), &cfg()).unwrap();
    assert_eq!(v.overall, OverallVerdict::Distinguishable);
    assert!(v.per_state.values().all(|f| matches!(f, StateFinding::Identifiable(_))));
}

#[test]
fn clsd_trine_is_distinguishable() {
    let v = clsd_verdict(&named(NamedEnsemble::PwTrine), &cfg()).unwrap();
    assert_eq!(v.overall, OverallVerdict::Distinguishable);
}

#[test]
fn clsd_antiparallel_sic_is_indistinguishable_by_enumeration() {
    let v = clsd_verdict(&named(NamedEnsemble::DoubleSicAntiparallel), &cfg()).unwrap();
    assert_eq!(v.overall, OverallVerdict::Indistinguishable);
    for f in v.per_state.values() {
        assert!(matches!(
            f,
            StateFinding::NotIdentifiable(InfeasibilityEvidence::BranchEnumeration(_))
        ));
    }
}

#[test]
fn clsd_parallel_sic_fails_by_linear_dependence() {
    let v = clsd_verdict(&named(NamedEnsemble::DoubleSicParallel), &cfg()).unwrap();
    assert_eq!(v.overall, OverallVerdict::Indistinguishable);
    for f in v.per_state.values() {
        assert!(matches!(
            f,
            StateFinding::NotIdentifiable(InfeasibilityEvidence::LinearDependence { span_rank: 3 })
        ));
    }
}

#[test]
fn clsm_bennett9_pairs_via_compositional_path() {
    let out = clsm_verdict(&named(NamedEnsemble::Bennett9), 2, &cfg()).unwrap();
    assert_eq!(out.verdict.overall, OverallVerdict::Distinguishable);
    assert!(out.base_certificates.is_some());
    assert_eq!(out.verdict.per_state.len(), 72);
}

#[test]
fn clsm_duan4_pairs_are_indistinguishable() {
    let out = clsm_verdict(&named(NamedEnsemble::Duan4), 2, &cfg()).unwrap();
    assert_eq!(out.verdict.overall, OverallVerdict::Indistinguishable);
    assert!(out.base_certificates.is_none());
    assert!(matches!(
        out.verdict.per_state["D1-D2"],
        StateFinding::NotIdentifiable(InfeasibilityEvidence::BranchEnumeration(_))
    ));
}

#[test]
fn theorem1_consistency_on_the_trine() {
    let e = named(NamedEnsemble::PwTrine);
    assert_eq!(clsd_verdict(&e, &cfg()).unwrap().overall, OverallVerdict::Distinguishable);
    for m in 1..=3usize {
        let out = clsm_verdict(&e, m, &cfg()).unwrap();
        assert_eq!(out.verdict.overall, OverallVerdict::Distinguishable, "m={m}");
    }
}

#[test]
fn verdicts_are_invariant_under_member_phases() {
    let st = PartyStructure::new(vec![2, 2], vec![0, 1]).unwrap();
    let base = named(NamedEnsemble::Duan4);
    let phase = C64::from_polar(1.0, 0.83);
    let mut members = Vec::new();
    for (k, m) in base.members().iter().enumerate() {
        let f = m.product_factors().unwrap();
        let a = if k == 1 {
            StateVector::new(
                vec![2],
                f[0].amplitudes().iter().map(|z| z * phase).collect(),
            )
            .unwrap()
        } else {
            f[0].clone()
        };
        members.push(EnsembleMember::product(m.label(), &st, vec![a, f[1].clone()]).unwrap());
    }
    let rotated = Ensemble::new("duan4_phase", st, members).unwrap();
    for label in ["D1", "D2", "D3", "D4"] {
        let orig = exact_product_detect(&base, label, 1 << 20, &cfg().tol).unwrap();
        let rot = exact_product_detect(&rotated, label, 1 << 20, &cfg().tol).unwrap();
        assert_eq!(
            matches!(orig, DetectOutcome::Feasible(_)),
            matches!(rot, DetectOutcome::Feasible(_))
        );
    }
}
