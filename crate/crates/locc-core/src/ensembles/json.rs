//! JSON (de)serialization of ensembles.
//!
//! Schema (UTF-8, no comments):
//!
//! ```text
//! { "name": string,
//!   "party_dims": [int],
//!   "factor_assignment": [int],          // tensor factor -> party
//!   "members": [ {
//!       "label": string,
//!       "kind": "pure" | "mixed",
//!       "amplitudes": <nested [re,im]>,  // pure; nesting = factor shape
//!       "matrix": [[ [re,im], ... ]],    // mixed; row-major, square
//!       "product_factors": [[ [re,im], ... ] per party]  // optional
//!   } ] }
//! ```
//!
//! Factor dimensions are carried by the amplitude nesting of pure members;
//! an all-mixed ensemble defaults to one factor per party. A top-level
//! `derived_from` annotation (written for derived marking sets) is accepted
//! and ignored on input.

use serde_json::{Map, Value};

use crate::jsonutil::{
    amplitudes_from_json, amplitudes_to_json, c64_from_json, c64_to_json, matrix_from_json,
    matrix_to_json,
};
use crate::numkernel::{Operator, StateVector};

use super::{Ensemble, EnsembleError, EnsembleMember, MemberBody, PartyStructure};

fn schema_err(msg: impl Into<String>) -> EnsembleError {
    EnsembleError::Schema(msg.into())
}

fn get_usize_array(obj: &Map<String, Value>, key: &str) -> Result<Vec<usize>, EnsembleError> {
    let arr = obj
        .get(key)
        .ok_or_else(|| schema_err(format!("$.{key}: missing")))?
        .as_array()
        .ok_or_else(|| schema_err(format!("$.{key}: expected an array of integers")))?;
    arr.iter()
        .enumerate()
        .map(|(k, v)| {
            v.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| schema_err(format!("$.{key}[{k}]: expected a nonnegative integer")))
        })
        .collect()
}

/// Parse an ensemble document, reporting schema problems with their path
/// and invariant problems through the validation report.
pub fn parse_ensemble(document: &str) -> Result<Ensemble, EnsembleError> {
    let root: Value = serde_json::from_str(document)
        .map_err(|e| schema_err(format!("$: invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| schema_err("$: expected an object"))?;
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "name" | "party_dims" | "factor_assignment" | "members" | "derived_from"
        ) {
            return Err(schema_err(format!("$.{key}: unknown key")));
        }
    }
    let name = obj
        .get("name")
        .ok_or_else(|| schema_err("$.name: missing"))?
        .as_str()
        .ok_or_else(|| schema_err("$.name: expected a string"))?
        .to_string();
    let party_dims = get_usize_array(obj, "party_dims")?;
    let factor_assignment = get_usize_array(obj, "factor_assignment")?;
    let members_json = obj
        .get("members")
        .ok_or_else(|| schema_err("$.members: missing"))?
        .as_array()
        .ok_or_else(|| schema_err("$.members: expected an array"))?;
    if members_json.is_empty() {
        return Err(schema_err("$.members: must not be empty"));
    }
    if party_dims.is_empty() {
        return Err(schema_err("$.party_dims: must not be empty"));
    }
    if let Some(&bad) = factor_assignment.iter().find(|&&p| p >= party_dims.len()) {
        return Err(schema_err(format!(
            "$.factor_assignment: party index {bad} out of range for {} parties",
            party_dims.len()
        )));
    }

    // Factor dimensions come from the first pure member's amplitude nesting;
    // an all-mixed document gets one factor per party.
    let mut factor_dims: Option<Vec<usize>> = None;
    for (k, mj) in members_json.iter().enumerate() {
        let mobj = mj
            .as_object()
            .ok_or_else(|| schema_err(format!("$.members[{k}]: expected an object")))?;
        if mobj.get("kind").and_then(Value::as_str) == Some("pure") {
            if let Some(amps) = mobj.get("amplitudes") {
                let (dims, _) =
                    amplitudes_from_json(amps, &format!("$.members[{k}].amplitudes"), None)
                        .map_err(schema_err)?;
                factor_dims = Some(dims);
                break;
            }
        }
    }
    let factor_dims = match factor_dims {
        Some(dims) => {
            if dims.len() != factor_assignment.len() {
                return Err(schema_err(format!(
                    "$.factor_assignment: {} assignments for {} tensor factors",
                    factor_assignment.len(),
                    dims.len()
                )));
            }
            dims
        }
        None => {
            if factor_assignment.len() != party_dims.len() {
                return Err(schema_err(
                    "$.factor_assignment: cannot infer factor dimensions for an all-mixed \
                     ensemble unless each party is a single factor"
                        .to_string(),
                ));
            }
            factor_assignment.iter().map(|&p| party_dims[p]).collect()
        }
    };
    let structure = PartyStructure::new(factor_dims.clone(), factor_assignment)?;
    if structure.party_dims() != party_dims.as_slice() {
        return Err(schema_err(format!(
            "$.party_dims: declared {party_dims:?} but factors give {:?}",
            structure.party_dims()
        )));
    }

    let mut members = Vec::with_capacity(members_json.len());
    for (k, mj) in members_json.iter().enumerate() {
        let path = format!("$.members[{k}]");
        let mobj = mj
            .as_object()
            .ok_or_else(|| schema_err(format!("{path}: expected an object")))?;
        for key in mobj.keys() {
            if !matches!(key.as_str(), "label" | "kind" | "amplitudes" | "matrix" | "product_factors") {
                return Err(schema_err(format!("{path}.{key}: unknown key")));
            }
        }
        let label = mobj
            .get("label")
            .and_then(Value::as_str)
            .ok_or_else(|| schema_err(format!("{path}.label: expected a string")))?
            .to_string();
        let kind = mobj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| schema_err(format!("{path}.kind: expected \"pure\" or \"mixed\"")))?;
        let body = match kind {
            "pure" => {
                if mobj.contains_key("matrix") {
                    return Err(schema_err(format!("{path}.matrix: not allowed for a pure member")));
                }
                let amps_json = mobj
                    .get("amplitudes")
                    .ok_or_else(|| schema_err(format!("{path}.amplitudes: missing")))?;
                let (_, amps) = amplitudes_from_json(
                    amps_json,
                    &format!("{path}.amplitudes"),
                    Some(&factor_dims),
                )
                .map_err(schema_err)?;
                MemberBody::Pure(
                    StateVector::raw(factor_dims.clone(), amps)
                        .map_err(|e| schema_err(format!("{path}.amplitudes: {e}")))?,
                )
            }
            "mixed" => {
                if mobj.contains_key("amplitudes") {
                    return Err(schema_err(format!(
                        "{path}.amplitudes: not allowed for a mixed member"
                    )));
                }
                let mat_json = mobj
                    .get("matrix")
                    .ok_or_else(|| schema_err(format!("{path}.matrix: missing")))?;
                let mat = matrix_from_json(mat_json, &format!("{path}.matrix")).map_err(schema_err)?;
                if mat.nrows() != structure.total_dim() {
                    return Err(schema_err(format!(
                        "{path}.matrix: size {} does not match total dimension {}",
                        mat.nrows(),
                        structure.total_dim()
                    )));
                }
                MemberBody::Mixed(
                    Operator::new(factor_dims.clone(), mat)
                        .map_err(|e| schema_err(format!("{path}.matrix: {e}")))?,
                )
            }
            other => {
                return Err(schema_err(format!(
                    "{path}.kind: expected \"pure\" or \"mixed\", found \"{other}\""
                )))
            }
        };
        let product_factors = match mobj.get("product_factors") {
            None => None,
            Some(pf) => {
                let parties = pf
                    .as_array()
                    .ok_or_else(|| schema_err(format!("{path}.product_factors: expected an array")))?;
                if parties.len() != structure.num_parties() {
                    return Err(schema_err(format!(
                        "{path}.product_factors: {} entries for {} parties",
                        parties.len(),
                        structure.num_parties()
                    )));
                }
                let mut factors = Vec::with_capacity(parties.len());
                for (p, fj) in parties.iter().enumerate() {
                    let fpath = format!("{path}.product_factors[{p}]");
                    let arr = fj
                        .as_array()
                        .ok_or_else(|| schema_err(format!("{fpath}: expected an array")))?;
                    let dims = structure.party_factor_dims(p);
                    let want: usize = dims.iter().product();
                    if arr.len() != want {
                        return Err(schema_err(format!(
                            "{fpath}: {} amplitudes for party dimension {want}",
                            arr.len()
                        )));
                    }
                    let amps = arr
                        .iter()
                        .enumerate()
                        .map(|(i, v)| c64_from_json(v, &format!("{fpath}[{i}]")))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(schema_err)?;
                    factors.push(
                        StateVector::raw(dims, amps)
                            .map_err(|e| schema_err(format!("{fpath}: {e}")))?,
                    );
                }
                Some(factors)
            }
        };
        members.push(EnsembleMember { label, body, product_factors });
    }

    let ensemble = Ensemble::new_unvalidated(name, structure, members);
    let report = super::validate(&ensemble);
    if !report.is_valid() {
        return Err(EnsembleError::Invalid(report));
    }
    Ok(ensemble)
}

/// Serialize to the documented JSON schema as a `serde_json::Value`.
pub fn serialize_ensemble_value(e: &Ensemble) -> Value {
    let mut root = Map::new();
    root.insert("name".into(), Value::String(e.name().to_string()));
    root.insert(
        "party_dims".into(),
        Value::Array(e.structure().party_dims().iter().map(|&d| d.into()).collect()),
    );
    root.insert(
        "factor_assignment".into(),
        Value::Array(e.structure().factor_assignment().iter().map(|&p| p.into()).collect()),
    );
    let members = e
        .members()
        .iter()
        .map(|m| {
            let mut mo = Map::new();
            mo.insert("label".into(), Value::String(m.label().to_string()));
            match m.body() {
                MemberBody::Pure(s) => {
                    mo.insert("kind".into(), Value::String("pure".into()));
                    mo.insert("amplitudes".into(), amplitudes_to_json(s));
                }
                MemberBody::Mixed(op) => {
                    mo.insert("kind".into(), Value::String("mixed".into()));
                    mo.insert("matrix".into(), matrix_to_json(op));
                }
            }
            if let Some(factors) = m.product_factors() {
                mo.insert(
                    "product_factors".into(),
                    Value::Array(
                        factors
                            .iter()
                            .map(|f| {
                                Value::Array(
                                    f.amplitudes().iter().map(|&z| c64_to_json(z)).collect(),
                                )
                            })
                            .collect(),
                    ),
                );
            }
            Value::Object(mo)
        })
        .collect();
    root.insert("members".into(), Value::Array(members));
    Value::Object(root)
}

/// Serialize to a JSON string.
pub fn serialize_ensemble(e: &Ensemble) -> String {
    serde_json::to_string_pretty(&serialize_ensemble_value(e)).expect("serializable value")
}
