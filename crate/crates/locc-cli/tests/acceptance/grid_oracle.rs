//! Dense projective grid oracles for detecting-state feasibility and
//! product-extension existence on qubit-pair ensembles.
//!
//! These are deliberately independent of the enumeration code they check:
//! every qubit ray is sampled on a 200 x 200 (theta, phi) grid and the
//! bilinear overlap conditions are evaluated on grid pairs. The reported
//! value is the exact minimum over all 200^4 pairs of the worst constraint
//! overlap; a sorted-prefix bound makes that minimum computable on one
//! core without touching most pairs (any pair beating the running minimum
//! must keep its largest alpha-side constraint below min/|<a|alpha>|,
//! which is a binary-searchable prefix of a presorted beta order).
//!
//! Decisions use two thresholds: a feasibility threshold generous enough
//! to absorb the grid spacing (the nearest grid point to an exact solution
//! sits within ~0.018 in ray distance) and the 1e-4 floor that every
//! infeasible instance must stay above.

use locc_core::C64;

/// Grid resolution per real parameter (theta and phi).
pub const GRID_N: usize = 200;
/// A verdict counts as grid-feasible below this residual.
pub const FEASIBLE_THRESHOLD: f32 = 5e-2;
/// Infeasible instances must keep the grid minimum above this floor.
pub const INFEASIBLE_FLOOR: f32 = 1e-4;
/// Pairs whose target overlap falls below this are not candidate detectors.
pub const TARGET_FLOOR: f32 = 1e-3;

/// All 200^2 qubit rays cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
pub fn qubit_grid() -> Vec<[C64; 2]> {
    let mut points = Vec::with_capacity(GRID_N * GRID_N);
    for i in 0..GRID_N {
        let theta = std::f64::consts::PI * i as f64 / (GRID_N - 1) as f64;
        let (s, c) = (theta / 2.0).sin_cos();
        for k in 0..GRID_N {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / GRID_N as f64;
            points.push([C64::new(c, 0.0), C64::from_polar(s, phi)]);
        }
    }
    points
}

/// |<factor | grid_p>| for every grid point, one row stride per factor.
pub fn overlap_table(factors: &[[C64; 2]], grid: &[[C64; 2]]) -> Vec<f32> {
    let m = factors.len();
    let mut table = vec![0f32; grid.len() * m];
    for (p, g) in grid.iter().enumerate() {
        for (j, f) in factors.iter().enumerate() {
            let ip = f[0].conj() * g[0] + f[1].conj() * g[1];
            table[p * m + j] = ip.norm() as f32;
        }
    }
    table
}

#[inline]
fn pair_worst(
    ra: &[f32],
    rb: &[f32],
    target: Option<usize>,
    constraints: &[usize],
) -> Option<f32> {
    if let Some(t) = target {
        if ra[t] * rb[t] < TARGET_FLOOR {
            return None;
        }
    }
    let mut worst = 0f32;
    for &j in constraints {
        let v = ra[j] * rb[j];
        if v > worst {
            worst = v;
        }
    }
    Some(worst)
}

/// Minimum over all grid pairs (alpha, beta) of
/// max_{j != target} |<a_j|alpha>| |<b_j|beta>|, restricted to pairs whose
/// target overlap stays above `TARGET_FLOOR`. `target = None` drops the
/// restriction and ranges over every constraint (extension search).
pub fn grid_min_residual(
    table_a: &[f32],
    table_b: &[f32],
    n_members: usize,
    target: Option<usize>,
) -> f32 {
    let n_points = table_a.len() / n_members;
    let constraints: Vec<usize> = (0..n_members).filter(|&j| Some(j) != target).collect();
    if constraints.is_empty() {
        return 0.0;
    }
    // Beta points presorted per constraint by their overlap with it.
    let mut sorted: Vec<Vec<(f32, u32)>> = Vec::with_capacity(constraints.len());
    for &j in &constraints {
        let mut order: Vec<(f32, u32)> =
            (0..n_points).map(|q| (table_b[q * n_members + j], q as u32)).collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite overlaps"));
        sorted.push(order);
    }

    let mut best = f32::INFINITY;
    // Seed from the alpha point with the strongest target overlap (its
    // beta row is guaranteed to clear the target floor somewhere), then a
    // coarse sweep; both keep the prefixes short from the start.
    let mut seeds: Vec<usize> = (0..n_points).step_by(97).collect();
    if let Some(t) = target {
        let p_star = (0..n_points)
            .max_by(|&a, &b| {
                table_a[a * n_members + t]
                    .partial_cmp(&table_a[b * n_members + t])
                    .expect("finite")
            })
            .expect("nonempty grid");
        seeds.push(p_star);
    }
    for p in seeds {
        let ra = &table_a[p * n_members..(p + 1) * n_members];
        for q in (0..n_points).step_by(101) {
            let rb = &table_b[q * n_members..(q + 1) * n_members];
            if let Some(w) = pair_worst(ra, rb, target, &constraints) {
                best = best.min(w);
            }
        }
    }

    for p in 0..n_points {
        let ra = &table_a[p * n_members..(p + 1) * n_members];
        // Strongest alpha-side constraint gives the tightest beta prefix.
        let (ci, amax) = constraints
            .iter()
            .enumerate()
            .map(|(ci, &j)| (ci, ra[j]))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("nonempty constraints");
        if amax <= 1e-12 {
            // Alpha kills every constraint outright; any beta gives zero.
            if target.is_none() {
                return 0.0;
            }
            for q in 0..n_points {
                let rb = &table_b[q * n_members..(q + 1) * n_members];
                if let Some(w) = pair_worst(ra, rb, target, &constraints) {
                    best = best.min(w);
                }
            }
            continue;
        }
        // Any pair improving on `best` satisfies tb[ci] < best / amax.
        let cutoff = best / amax;
        let order = &sorted[ci];
        let end = order.partition_point(|&(v, _)| v < cutoff);
        for &(_, q) in &order[..end] {
            let q = q as usize;
            let rb = &table_b[q * n_members..(q + 1) * n_members];
            if let Some(w) = pair_worst(ra, rb, target, &constraints) {
                best = best.min(w);
            }
        }
    }
    best
}
