//! Command implementations: each returns a JSON value plus a text
//! rendering of the same structure.

use std::path::PathBuf;

use serde_json::{json, Map, Value};

use locc_core::detect::{
    clsd_verdict, clsm_verdict, exact_product_detect, heuristic_detect, DetectOutcome,
    HeuristicVerdict, StateFinding,
};
use locc_core::ensembles::{
    build_named, parse_ensemble, serialize_ensemble, Ensemble, NamedEnsemble,
};
use locc_core::marking::{check_linear_independence, derive_marking_set, Independence};
use locc_core::protocol::{
    build_named_protocol, build_sequential_marking_protocol, named_protocol_hypotheses,
    simulate, NamedProtocol, SimulationReport, YuMode,
};
use locc_core::upb::classify_unextendible_basis;

use crate::claims::{run_claims, ClaimRecord, ClaimStatus};
use crate::config::RunConfig;
use crate::render;
use crate::CliError;

/// Where an ensemble comes from on the command line.
#[derive(Clone, Debug)]
pub enum Source {
    Named { name: String, d: Option<usize> },
    File(PathBuf),
}

impl Source {
    pub fn from_flags(
        named: Option<String>,
        file: Option<PathBuf>,
        d: Option<usize>,
    ) -> Result<Self, CliError> {
        match (named, file) {
            (Some(name), None) => Ok(Source::Named { name, d }),
            (None, Some(path)) => Ok(Source::File(path)),
            (Some(_), Some(_)) => {
                Err(CliError::Input("--named and --file are mutually exclusive".into()))
            }
            (None, None) => Err(CliError::Input("one of --named or --file is required".into())),
        }
    }

    pub fn load(&self) -> Result<Ensemble, CliError> {
        match self {
            Source::Named { name, d } => {
                let which = NamedEnsemble::parse(name, *d)?;
                Ok(build_named(which)?)
            }
            Source::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok(parse_ensemble(&text)?)
            }
        }
    }

    fn named_kind(&self) -> Option<(&str, Option<usize>)> {
        match self {
            Source::Named { name, d } => Some((name.as_str(), *d)),
            Source::File(_) => None,
        }
    }
}

pub struct CommandOutput {
    pub json: Value,
    pub text: String,
    /// Exit code 1 is reserved for claim failures in `reproduce`.
    pub claim_failure: bool,
}

impl CommandOutput {
    fn new(json: Value, text: String) -> Self {
        Self { json, text, claim_failure: false }
    }
}

fn ensemble_header(e: &Ensemble) -> String {
    format!(
        "ensemble {}: {} members, party dims {:?}, {}",
        e.name(),
        e.len(),
        e.structure().party_dims(),
        if e.all_pure() { "pure" } else { "mixed" }
    )
}

pub fn cmd_analyze(source: &Source, m: Option<usize>, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let e = source.load()?;
    let mut root = Map::new();
    let mut text = vec![ensemble_header(&e)];
    root.insert("ensemble".into(), json!(e.name()));
    root.insert("members".into(), json!(e.labels()));
    root.insert("validation".into(), json!("ok"));

    if !e.all_pure() {
        text.push("mixed members: independence and discrimination pipelines need pure \
                   states; use `mark` for the shipped mixed-state protocols"
            .into());
        root.insert("note".into(), json!("mixed ensemble; discrimination analysis skipped"));
        return Ok(CommandOutput::new(Value::Object(root), text.join("\n")));
    }

    let states: Vec<_> =
        e.pure_states().expect("pure checked").into_iter().cloned().collect();
    let independence = check_linear_independence(&states, &cfg.tol)?;
    root.insert("independence".into(), render::independence(&independence));
    text.push(match independence {
        Independence::Independent => "independence: independent".to_string(),
        Independence::Dependent { rank } => format!("independence: dependent (rank {rank})"),
    });

    let verdict = clsd_verdict(&e, &cfg.detect_config())?;
    root.insert("clsd".into(), render::clsd_verdict(&verdict, false));
    text.push(format!("clsd: {}", render::overall(verdict.overall)));
    for (label, finding) in &verdict.per_state {
        text.push(format!("  {label}: {}", finding_line(finding)));
    }

    if let Some(m) = m {
        let outcome = clsm_verdict(&e, m, &cfg.detect_config())?;
        root.insert(
            "clsm".into(),
            json!({
                "m": m,
                "derived_members": outcome.derived.derived().len(),
                "verdict": render::clsd_verdict(&outcome.verdict, false),
                "via_base_certificates": outcome.base_certificates.is_some(),
            }),
        );
        text.push(format!(
            "clsm (m = {m}): {} over {} derived states{}",
            render::overall(outcome.verdict.overall),
            outcome.derived.derived().len(),
            if outcome.base_certificates.is_some() {
                " (composed from base certificates)"
            } else {
                ""
            }
        ));
    }
    Ok(CommandOutput::new(Value::Object(root), text.join("\n")))
}

fn finding_line(f: &StateFinding) -> String {
    match f {
        StateFinding::Identifiable(c) => format!(
            "identifiable (target overlap {:.3e}, off-target {:.3e})",
            c.target_overlap_modulus, c.max_offtarget_overlap
        ),
        StateFinding::NotIdentifiable(
            locc_core::detect::InfeasibilityEvidence::BranchEnumeration(r),
        ) => format!("not identifiable ({} branches all fail)", r.branch_count),
        StateFinding::NotIdentifiable(
            locc_core::detect::InfeasibilityEvidence::LinearDependence { span_rank },
        ) => format!("not identifiable (inside the span of the rest, rank {span_rank})"),
        StateFinding::Unknown { report, reason } => match report {
            Some(r) => format!(
                "unknown ({reason}; best residual {:.3e}, best target {:.3e})",
                r.best_offtarget_residual, r.best_target_overlap
            ),
            None => format!("unknown ({reason})"),
        },
    }
}

pub fn cmd_classify(source: &Source, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let e = source.load()?;
    let c = classify_unextendible_basis(&e, &cfg.tol)?;
    let json = render::classification(&c);
    let mut text = vec![ensemble_header(&e)];
    text.push(format!(
        "classification: ub={} gub={} upb={} gupb={} (complement dim {}, spans full space: {})",
        c.flags.is_ub,
        c.flags.is_gub,
        c.flags.is_upb,
        c.flags.is_gupb,
        c.complement_dim,
        c.flags.spans_full_space,
    ));
    for (label, verdict) in &c.maximal_subset_reports {
        let line = match verdict {
            locc_core::upb::SubsetVerdict::Extendible(w) => format!(
                "  without {label}: extendible (r_a={}, r_b={})",
                w.r_a, w.r_b
            ),
            locc_core::upb::SubsetVerdict::Unextendible { partitions_checked } => {
                format!("  without {label}: unextendible ({partitions_checked} partitions)")
            }
        };
        text.push(line);
    }
    Ok(CommandOutput::new(json, text.join("\n")))
}

pub fn cmd_detect(
    source: &Source,
    target: Option<String>,
    cfg: &RunConfig,
) -> Result<CommandOutput, CliError> {
    let e = source.load()?;
    if !e.all_pure() {
        return Err(CliError::Input(
            "detecting-state search needs pure states; mixed ensembles are handled by \
             the shipped protocols in `mark`"
                .into(),
        ));
    }
    let targets: Vec<String> = match target {
        Some(t) => {
            e.member_index(&t)?;
            vec![t]
        }
        None => e.labels().iter().map(|s| s.to_string()).collect(),
    };
    let mut entries = Vec::new();
    let mut text = vec![ensemble_header(&e)];
    for t in &targets {
        if e.all_product() {
            match exact_product_detect(&e, t, cfg.branch_cap, &cfg.tol)? {
                DetectOutcome::Feasible(c) => {
                    text.push(format!(
                        "{t}: feasible (target overlap {:.6}, off-target {:.3e})",
                        c.target_overlap_modulus, c.max_offtarget_overlap
                    ));
                    entries.push(json!({
                        "target": t,
                        "method": "exact",
                        "outcome": "feasible",
                        "certificate": render::certificate(&c),
                    }));
                }
                DetectOutcome::Infeasible(r) => {
                    text.push(format!("{t}: infeasible ({} branches all fail)", r.branch_count));
                    entries.push(json!({
                        "target": t,
                        "method": "exact",
                        "outcome": "infeasible",
                        "report": render::infeasibility_report(&r),
                    }));
                }
            }
        } else {
            let report = heuristic_detect(&e, t, cfg.restarts, cfg.seed, &cfg.tol)?;
            let outcome = match report.verdict {
                HeuristicVerdict::Found(_) => "found",
                HeuristicVerdict::NotFound => "not_found",
            };
            text.push(format!(
                "{t}: heuristic {outcome} (best target {:.3e}, best residual {:.3e})",
                report.best_target_overlap, report.best_offtarget_residual
            ));
            entries.push(json!({
                "target": t,
                "method": "heuristic",
                "report": render::heuristic_report(&report),
            }));
        }
    }
    let json = json!({ "ensemble": e.name(), "detections": entries });
    Ok(CommandOutput::new(json, text.join("\n")))
}

fn simulation_text(report: &SimulationReport, header: String) -> String {
    let mut text = vec![header];
    text.push(format!(
        "zero error: {} ({} hypotheses)",
        report.zero_error,
        report.per_hypothesis.len()
    ));
    if report.per_hypothesis.len() <= 24 {
        for (label, h) in &report.per_hypothesis {
            text.push(format!(
                "  {label}: success {:.6}, error {:.3e}",
                h.success_probability, h.error_probability
            ));
        }
    } else {
        let min = report
            .per_hypothesis
            .values()
            .map(|h| h.success_probability)
            .fold(f64::INFINITY, f64::min);
        let max = report
            .per_hypothesis
            .values()
            .map(|h| h.success_probability)
            .fold(0.0f64, f64::max);
        text.push(format!("  success range [{min:.6}, {max:.6}]"));
    }
    text.join("\n")
}

pub fn cmd_mark(
    source: &Source,
    m: usize,
    mode: YuMode,
    cfg: &RunConfig,
) -> Result<CommandOutput, CliError> {
    // The two mixed-pair protocols ship under their source ensemble names.
    if let Some((name, d)) = source.named_kind() {
        let which = match name {
            "yu" => Some(NamedProtocol::YuMarking { d: d.unwrap_or(2), mode }),
            "xb_from_upb" => Some(NamedProtocol::UpbMarking),
            _ => None,
        };
        if let Some(which) = which {
            if m != 2 {
                return Err(CliError::NoProtocol(format!(
                    "the pairwise mixed-state marking protocol is defined for m = 2, got m = {m}"
                )));
            }
            let hyps = named_protocol_hypotheses(which)?;
            let root = build_named_protocol(which)?;
            let report = simulate(&root, &hyps, &cfg.tol)?;
            let json = json!({
                "protocol": format!("{which:?}"),
                "hypotheses": hyps.name(),
                "simulation": render::simulation(&report),
            });
            let text = simulation_text(&report, format!("marking protocol on {}", hyps.name()));
            return Ok(CommandOutput::new(json, text));
        }
    }

    let e = source.load()?;
    let derived = derive_marking_set(&e, m)?;
    if !e.all_product() {
        return Err(CliError::NoProtocol(format!(
            "no marking protocol constructible for `{}`: base members are not all \
             product states, so no exact base certificates exist",
            e.name()
        )));
    }
    let mut certs = std::collections::BTreeMap::new();
    for member in e.members() {
        match exact_product_detect(&e, member.label(), cfg.branch_cap, &cfg.tol)? {
            DetectOutcome::Feasible(c) => {
                certs.insert(member.label().to_string(), c);
            }
            DetectOutcome::Infeasible(r) => {
                return Err(CliError::NoProtocol(format!(
                    "no marking protocol constructible: member `{}` admits no product \
                     detecting state (all {} branches fail; run `detect --target {}` \
                     for the certificate)",
                    member.label(),
                    r.branch_count,
                    member.label()
                )));
            }
        }
    }
    let root = build_sequential_marking_protocol(&derived, &certs)?;
    let report = simulate(&root, derived.derived(), &cfg.tol)?;
    let json = json!({
        "ensemble": e.name(),
        "m": m,
        "hypotheses": derived.derived().len(),
        "simulation": render::simulation(&report),
    });
    let text = simulation_text(
        &report,
        format!("sequential marking protocol for {} at m = {m}", e.name()),
    );
    Ok(CommandOutput::new(json, text))
}

pub fn cmd_reproduce(ids: &[String], cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let records = run_claims(ids, cfg)?;
    let any_fail = records.iter().any(|r| r.status == ClaimStatus::Fail);
    let mut text = Vec::new();
    for r in &records {
        text.push(format!("claim {:<18} {:<14} {}", r.id, r.status.as_str(), r.description));
    }
    text.push(format!(
        "{} claims: {} pass, {} heuristic-pass, {} fail",
        records.len(),
        records.iter().filter(|r| r.status == ClaimStatus::Pass).count(),
        records.iter().filter(|r| r.status == ClaimStatus::HeuristicPass).count(),
        records.iter().filter(|r| r.status == ClaimStatus::Fail).count(),
    ));
    let json = json!({
        "schema_version": 1,
        "config": {
            "seed": cfg.seed,
            "restarts": cfg.restarts,
            "branch_cap": cfg.branch_cap,
        },
        "claims": records.iter().map(ClaimRecord::to_json).collect::<Vec<_>>(),
    });
    let mut out = CommandOutput::new(json, text.join("\n"));
    out.claim_failure = any_fail;
    Ok(out)
}

pub fn cmd_ensembles(source: Option<&Source>, m: Option<usize>) -> Result<CommandOutput, CliError> {
    match source {
        None => {
            let names = NamedEnsemble::all_names();
            let text = names.join("\n");
            Ok(CommandOutput::new(json!({ "named_ensembles": names }), text))
        }
        Some(src) => {
            let e = src.load()?;
            let json: Value = match m {
                None => {
                    let doc = serialize_ensemble(&e);
                    serde_json::from_str(&doc).expect("serializer emits valid JSON")
                }
                // Dump the m-fold marking set with its derived_from tag.
                Some(m) => derive_marking_set(&e, m)?.to_json_value(),
            };
            let text = serde_json::to_string_pretty(&json).expect("serializable");
            Ok(CommandOutput::new(json, text))
        }
    }
}
