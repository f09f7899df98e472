//! Seeded alternating search for product detecting states of bipartite
//! ensembles with entangled members.
//!
//! With one side fixed, the off-target orthogonality constraints are a
//! linear system on the other side; the solver restricts to that system's
//! (regularized) nullspace and maximizes the target overlap inside it,
//! then swaps sides until the objective stalls. A final polish pass snaps
//! onto the exact nullspace where one exists, so genuinely feasible
//! targets come back with residuals at machine scale. A `NotFound` verdict
//! carries the best candidate seen and is evidence only.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensembles::Ensemble;
use crate::numkernel::{regroup_factors, CMatrix, CVector, StateVector, ToleranceConfig, C64};

use super::{
    verify_certificate, DetectError, HeuristicSearchReport, HeuristicVerdict,
    TARGET_OVERLAP_FLOOR,
};

const MAX_ITERS: usize = 200;
const POLISH_ROUNDS: usize = 3;
const CONVERGENCE_DELTA: f64 = 1e-12;

/// Conjugated member matrices: overlap(j) = alpha^T C_j beta.
struct Bilinear {
    mats: Vec<CMatrix>,
    target: usize,
    dim_a: usize,
    dim_b: usize,
}

impl Bilinear {
    fn overlap(&self, j: usize, alpha: &CVector, beta: &CVector) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..self.dim_a {
            let mut row = C64::new(0.0, 0.0);
            for b in 0..self.dim_b {
                row += self.mats[j][(a, b)] * beta[b];
            }
            acc += alpha[a] * row;
        }
        acc
    }

    /// Constraint rows and target row on the B side for a fixed alpha.
    fn rows_for_beta(&self, alpha: &CVector) -> (Vec<CVector>, CVector) {
        let rows = (0..self.mats.len())
            .filter(|&j| j != self.target)
            .map(|j| self.mats[j].tr_mul(alpha))
            .collect();
        (rows, self.mats[self.target].tr_mul(alpha))
    }

    /// Constraint rows and target row on the A side for a fixed beta.
    fn rows_for_alpha(&self, beta: &CVector) -> (Vec<CVector>, CVector) {
        let rows = (0..self.mats.len())
            .filter(|&j| j != self.target)
            .map(|j| &self.mats[j] * beta)
            .collect();
        (rows, &self.mats[self.target] * beta)
    }

    fn max_offtarget(&self, alpha: &CVector, beta: &CVector) -> f64 {
        (0..self.mats.len())
            .filter(|&j| j != self.target)
            .map(|j| self.overlap(j, alpha, beta).norm())
            .fold(0.0, f64::max)
    }
}

/// Maximize |target_row . x| under a ridge penalty on the constraint rows.
///
/// Exact nullspace directions of the constraint matrix dominate the ridge,
/// so when a constraint-satisfying direction with target weight exists the
/// solution lands on it; otherwise the result balances residual against
/// target overlap. Returns a unit vector.
fn ridge_step(rows: &[CVector], target_row: &CVector, dim: usize, rel_tol: f64) -> CVector {
    let padded_rows = rows.len().max(dim);
    let mut h = DMatrix::zeros(padded_rows, dim);
    for (r, row) in rows.iter().enumerate() {
        for c in 0..dim {
            h[(r, c)] = row[c];
        }
    }
    let svd = h.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let lambda = ((rel_tol * smax).powi(2)).max(1e-60);
    // t_i = target_row . V_i with V_i = conj(row i of v_t).
    let mut coeffs = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut t_i = C64::new(0.0, 0.0);
        for k in 0..dim {
            t_i += target_row[k] * v_t[(i, k)].conj();
        }
        let sigma = if i < sv.len() { sv[i] } else { 0.0 };
        coeffs.push(t_i.conj() / C64::new(sigma * sigma + lambda, 0.0));
    }
    let mut x = CVector::zeros(dim);
    for (i, c) in coeffs.iter().enumerate() {
        for k in 0..dim {
            x[k] += v_t[(i, k)].conj() * c;
        }
    }
    let norm = x.norm();
    if norm < 1e-150 {
        // Target row orthogonal to everything useful; fall back to the
        // least-violating direction.
        let imin = (0..sv.len())
            .min_by(|&a, &b| sv[a].partial_cmp(&sv[b]).expect("finite"))
            .unwrap_or(0);
        let mut fallback = CVector::zeros(dim);
        for k in 0..dim {
            fallback[k] = v_t[(imin, k)].conj();
        }
        return fallback.normalize();
    }
    x / C64::new(norm, 0.0)
}

/// Project the target representer onto the exact (loose-tolerance)
/// nullspace of the constraint rows, if that projection is nontrivial.
fn nullspace_snap(rows: &[CVector], target_row: &CVector, dim: usize) -> Option<CVector> {
    let mut h = CMatrix::zeros(rows.len().max(1), dim);
    for (r, row) in rows.iter().enumerate() {
        for c in 0..dim {
            h[(r, c)] = row[c];
        }
    }
    let basis = crate::numkernel::right_nullspace(&h, 1e-6);
    if basis.is_empty() {
        return None;
    }
    let mut x = CVector::zeros(dim);
    for n in &basis {
        // weight = target_row . n, so that |target_row . x| is maximized.
        let mut w = C64::new(0.0, 0.0);
        for k in 0..dim {
            w += target_row[k] * n[k];
        }
        for k in 0..dim {
            x[k] += n[k] * w.conj();
        }
    }
    let norm = x.norm();
    (norm > 1e-12).then(|| x / C64::new(norm, 0.0))
}

struct RunResult {
    alpha: CVector,
    beta: CVector,
    offtarget: f64,
    target: f64,
}

fn run_restart(bi: &Bilinear, rng: &mut ChaCha8Rng, rel_tol: f64) -> RunResult {
    let mut alpha = CVector::from_fn(bi.dim_a, |_, _| {
        C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    })
    .normalize();
    let mut beta = CVector::zeros(bi.dim_b);
    let mut prev_obj = -1.0f64;
    for _ in 0..MAX_ITERS {
        let (rows_b, target_b) = bi.rows_for_beta(&alpha);
        beta = ridge_step(&rows_b, &target_b, bi.dim_b, rel_tol);
        let (rows_a, target_a) = bi.rows_for_alpha(&beta);
        alpha = ridge_step(&rows_a, &target_a, bi.dim_a, rel_tol);
        let obj = bi.overlap(bi.target, &alpha, &beta).norm();
        if (obj - prev_obj).abs() < CONVERGENCE_DELTA {
            break;
        }
        prev_obj = obj;
    }
    // Snap onto exact constraint solutions where they exist.
    for _ in 0..POLISH_ROUNDS {
        let (rows_b, target_b) = bi.rows_for_beta(&alpha);
        if let Some(b) = nullspace_snap(&rows_b, &target_b, bi.dim_b) {
            beta = b;
        }
        let (rows_a, target_a) = bi.rows_for_alpha(&beta);
        if let Some(a) = nullspace_snap(&rows_a, &target_a, bi.dim_a) {
            alpha = a;
        }
    }
    RunResult {
        offtarget: bi.max_offtarget(&alpha, &beta),
        target: bi.overlap(bi.target, &alpha, &beta).norm(),
        alpha,
        beta,
    }
}

/// Alternating detecting-state search with `restarts` seeded starts.
///
/// `found` requires an off-target residual at most `orth_tol` and a target
/// overlap at least the certificate floor, after independent
/// re-verification. Identical seed and restart count reproduce the report
/// bit for bit; each restart draws from its own counter-indexed stream.
pub fn heuristic_detect(
    e: &Ensemble,
    target: &str,
    restarts: u32,
    seed: u64,
    tol: &ToleranceConfig,
) -> Result<HeuristicSearchReport, DetectError> {
    if !e.structure().is_bipartite() {
        return Err(DetectError::NotBipartite(e.structure().num_parties()));
    }
    let target_idx = e.member_index(target)?;
    let party_major = e.structure().party_major_factor_order();
    let dim_a: usize = e.structure().party_factor_dims(0).iter().product();
    let dim_b: usize = e.structure().party_factor_dims(1).iter().product();
    let mut mats = Vec::with_capacity(e.len());
    for m in e.members() {
        let s = m
            .pure_state()
            .ok_or_else(|| DetectError::MixedMember(m.label().to_string()))?;
        let grouped = regroup_factors(s, &party_major)?;
        let mat = CMatrix::from_fn(dim_a, dim_b, |a, b| grouped.amplitudes()[a * dim_b + b].conj());
        mats.push(mat);
    }
    let bi = Bilinear { mats, target: target_idx, dim_a, dim_b };

    let mut best_found: Option<(super::DetectingCertificate, u32)> = None;
    let mut best_run: Option<RunResult> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(r) + 1);
        let run = run_restart(&bi, &mut rng, tol.rank_rel_tol);
        if run.offtarget <= tol.orth_tol && run.target >= TARGET_OVERLAP_FLOOR {
            let per_party = vec![
                StateVector::new(
                    e.structure().party_factor_dims(0),
                    run.alpha.iter().copied().collect(),
                )?,
                StateVector::new(
                    e.structure().party_factor_dims(1),
                    run.beta.iter().copied().collect(),
                )?,
            ];
            if let Ok(cert) = verify_certificate(e, target, &per_party, tol) {
                let better = match &best_found {
                    Some((prev, _)) => {
                        cert.target_overlap_modulus > prev.target_overlap_modulus
                    }
                    None => true,
                };
                if better {
                    best_found = Some((cert, r));
                }
                continue;
            }
        }
        let better = match &best_run {
            Some(prev) => run.target > prev.target,
            None => true,
        };
        if better {
            best_run = Some(run);
        }
    }

    let report = match best_found {
        Some((cert, _)) => HeuristicSearchReport {
            target_label: target.to_string(),
            restarts,
            seed,
            best_target_overlap: cert.target_overlap_modulus,
            best_offtarget_residual: cert.max_offtarget_overlap,
            verdict: HeuristicVerdict::Found(cert),
        },
        None => {
            let run = best_run.expect("at least one restart");
            HeuristicSearchReport {
                target_label: target.to_string(),
                restarts,
                seed,
                best_target_overlap: run.target,
                best_offtarget_residual: run.offtarget,
                verdict: HeuristicVerdict::NotFound,
            }
        }
    };
    Ok(report)
}
