//! Small helpers for the JSON schemas used across the crate.
//!
//! Complex numbers serialize as two-element `[re, im]` arrays; amplitude
//! vectors as arrays nested by tensor-factor shape (depth equals the number
//! of factors, leaves are `[re, im]`); matrices as row-major arrays of rows.

use serde_json::{json, Value};

use crate::numkernel::{strides, unflatten, CMatrix, Operator, StateVector, C64};

pub fn c64_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Parse a `[re, im]` pair.
pub fn c64_from_json(v: &Value, path: &str) -> Result<C64, String> {
    let arr = v
        .as_array()
        .ok_or_else(|| format!("{path}: expected [re, im] array"))?;
    if arr.len() != 2 {
        return Err(format!("{path}: expected exactly two entries [re, im]"));
    }
    let re = arr[0]
        .as_f64()
        .ok_or_else(|| format!("{path}[0]: expected a number"))?;
    let im = arr[1]
        .as_f64()
        .ok_or_else(|| format!("{path}[1]: expected a number"))?;
    Ok(C64::new(re, im))
}

/// Amplitudes as nested arrays shaped by `dims`, leaves `[re, im]`.
pub fn amplitudes_to_json(s: &StateVector) -> Value {
    fn build(amps: &[C64], dims: &[usize]) -> Value {
        if dims.is_empty() {
            return c64_to_json(amps[0]);
        }
        let block = amps.len() / dims[0];
        Value::Array(
            (0..dims[0])
                .map(|k| build(&amps[k * block..(k + 1) * block], &dims[1..]))
                .collect(),
        )
    }
    let amps: Vec<C64> = s.amplitudes().iter().copied().collect();
    build(&amps, s.dims())
}

/// Parse nested amplitude arrays, inferring the factor shape from the
/// nesting. A bare `[re, im]` leaf is a single one-dimensional factor only
/// when `expect_factors == Some(0)` never happens; leaves sit below at
/// least one array level.
pub fn amplitudes_from_json(
    v: &Value,
    path: &str,
    expect_dims: Option<&[usize]>,
) -> Result<(Vec<usize>, Vec<C64>), String> {
    fn is_leaf(v: &Value) -> bool {
        match v.as_array() {
            Some(a) => a.len() == 2 && a.iter().all(Value::is_number),
            None => false,
        }
    }
    fn walk(
        v: &Value,
        path: &str,
        dims: &mut Vec<usize>,
        depth: usize,
        out: &mut Vec<C64>,
    ) -> Result<(), String> {
        if is_leaf(v) {
            if depth != dims.len() {
                return Err(format!("{path}: ragged amplitude nesting"));
            }
            out.push(c64_from_json(v, path)?);
            return Ok(());
        }
        let arr = v
            .as_array()
            .ok_or_else(|| format!("{path}: expected an array"))?;
        if arr.is_empty() {
            return Err(format!("{path}: empty amplitude array"));
        }
        if depth == dims.len() {
            dims.push(arr.len());
        } else if dims[depth] != arr.len() {
            return Err(format!(
                "{path}: inconsistent factor size {} (expected {})",
                arr.len(),
                dims[depth]
            ));
        }
        for (k, item) in arr.iter().enumerate() {
            walk(item, &format!("{path}[{k}]"), dims, depth + 1, out)?;
        }
        Ok(())
    }
    let mut dims = Vec::new();
    let mut out = Vec::new();
    walk(v, path, &mut dims, 0, &mut out)?;
    if let Some(expect) = expect_dims {
        if dims != expect {
            return Err(format!(
                "{path}: amplitude shape {dims:?} does not match declared factors {expect:?}"
            ));
        }
    }
    Ok((dims, out))
}

/// Matrix as a row-major array of rows of `[re, im]` entries.
pub fn matrix_to_json(op: &Operator) -> Value {
    let m = op.matrix();
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| c64_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value, path: &str) -> Result<CMatrix, String> {
    let rows = v
        .as_array()
        .ok_or_else(|| format!("{path}: expected an array of rows"))?;
    let n = rows.len();
    if n == 0 {
        return Err(format!("{path}: empty matrix"));
    }
    let mut mat = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let cols = row
            .as_array()
            .ok_or_else(|| format!("{path}[{i}]: expected an array"))?;
        if cols.len() != n {
            return Err(format!("{path}[{i}]: expected {n} entries, found {}", cols.len()));
        }
        for (j, entry) in cols.iter().enumerate() {
            mat[(i, j)] = c64_from_json(entry, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(mat)
}

/// Multi-index of a flat amplitude position, for diagnostics.
pub fn multi_index(flat: usize, dims: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    unflatten(flat, dims, &st)
}
