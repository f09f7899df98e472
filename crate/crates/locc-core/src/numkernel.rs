//! Dense complex linear algebra over small tensor-factor spaces.
//!
//! Everything here works on explicit amplitude vectors and matrices in
//! double precision; the spaces of interest have total dimension well
//! below 10^4, so no sparsity or blocking is attempted. Amplitude ordering
//! is row-major with the first tensor factor slowest, and every
//! multi-index computation in the crate derives from that convention.
//!
//! Rank and nullspace decisions are made against a [`ToleranceConfig`]
//! with thresholds relative to the largest singular value.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Dense complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = DVector<C64>;

#[derive(Debug, Error)]
pub enum NumError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid factor dimensions: {0}")]
    InvalidDims(String),
    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),
    #[error("norm {0} outside [1-1e-9, 1+1e-9]")]
    NormOutOfTolerance(f64),
    #[error("cannot normalize a vector of norm {0}")]
    ZeroNorm(f64),
    #[error("invalid permutation {0:?} of {1} factors")]
    InvalidPermutation(Vec<usize>, usize),
    #[error("invalid split {0:?}: need a proper nonempty subset of 0..{1}")]
    InvalidSplit(Vec<usize>, usize),
    #[error("invalid tolerance config: {0}")]
    InvalidTolerance(String),
    #[error("operator is not hermitian: max |M - M^H| entry = {0}")]
    NotHermitian(f64),
}

/// Numerical thresholds for rank, orthogonality and identity decisions.
///
/// `rank_rel_tol` is relative to the largest singular value of whatever
/// matrix is being ranked; `orth_tol` bounds admissible residual overlaps;
/// `identity_tol` bounds entrywise deviations from exact operator
/// identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig {
    pub rank_rel_tol: f64,
    pub orth_tol: f64,
    pub identity_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { rank_rel_tol: 1e-9, orth_tol: 1e-9, identity_tol: 1e-12 }
    }
}

impl ToleranceConfig {
    /// All thresholds must be strictly positive and below 1e-3.
    pub fn validate(&self) -> Result<(), NumError> {
        for (name, v) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("orth_tol", self.orth_tol),
            ("identity_tol", self.identity_tol),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(NumError::InvalidTolerance(format!(
                    "{name} = {v} not in (0, 1e-3)"
                )));
            }
        }
        Ok(())
    }
}

fn check_dims(dims: &[usize]) -> Result<usize, NumError> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(NumError::InvalidDims(format!("{dims:?}")));
    }
    Ok(dims.iter().product())
}

fn check_finite(amps: &[C64]) -> Result<(), NumError> {
    for (k, a) in amps.iter().enumerate() {
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(NumError::NonFinite(k));
        }
    }
    Ok(())
}

/// A pure state on an explicit tensor-factor space.
///
/// Invariants: the amplitude vector has length equal to the product of the
/// factor dimensions, is finite everywhere, and has unit norm up to 1e-9.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: CVector,
}

impl StateVector {
    /// Build from already-normalized amplitudes.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(NumError::DimensionMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        check_finite(&amps)?;
        let amps = CVector::from_vec(amps);
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(NumError::NormOutOfTolerance(norm));
        }
        Ok(Self { dims, amps })
    }

    /// Build from unnormalized amplitudes, rescaling to unit norm.
    pub fn normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(NumError::DimensionMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        check_finite(&amps)?;
        let mut amps = CVector::from_vec(amps);
        let norm = amps.norm();
        if norm < 1e-12 {
            return Err(NumError::ZeroNorm(norm));
        }
        amps /= C64::new(norm, 0.0);
        Ok(Self { dims, amps })
    }

    /// Bypass the norm check; used by parsers so that out-of-tolerance
    /// inputs surface as validation-report entries instead of hard errors.
    pub(crate) fn raw(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(NumError::DimensionMismatch(format!(
                "{} amplitudes for total dimension {total}",
                amps.len()
            )));
        }
        check_finite(&amps)?;
        Ok(Self { dims, amps: CVector::from_vec(amps) })
    }

    /// Computational basis vector `index` of the given factor space.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        if index >= total {
            return Err(NumError::DimensionMismatch(format!(
                "basis index {index} >= {total}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); total];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { dims, amps: CVector::from_vec(amps) })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Same amplitudes viewed with a different factor structure.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        if total != self.total_dim() {
            return Err(NumError::DimensionMismatch(format!(
                "reshape {:?} -> {:?}",
                self.dims, dims
            )));
        }
        Ok(Self { dims, amps: self.amps.clone() })
    }
}

/// Row-major strides: `stride[f] = prod(dims[f+1..])`.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        s[f] = s[f + 1] * dims[f + 1];
    }
    s
}

pub(crate) fn unflatten(mut flat: usize, dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; dims.len()];
    for f in 0..dims.len() {
        idx[f] = flat / strides[f];
        flat %= strides[f];
    }
    idx
}

fn validate_perm(perm: &[usize], n: usize) -> Result<(), NumError> {
    if perm.len() != n {
        return Err(NumError::InvalidPermutation(perm.to_vec(), n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(NumError::InvalidPermutation(perm.to_vec(), n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Index remapping for a factor permutation: output flat index -> input
/// flat index, where output position `k` carries input factor `perm[k]`.
fn regroup_index_map(dims: &[usize], perm: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let in_strides = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let out_strides = strides(&out_dims);
    let total: usize = dims.iter().product();
    let mut map = vec![0usize; total];
    for (out_flat, entry) in map.iter_mut().enumerate() {
        let out_idx = unflatten(out_flat, &out_dims, &out_strides);
        let mut in_flat = 0usize;
        for (k, &p) in perm.iter().enumerate() {
            in_flat += out_idx[k] * in_strides[p];
        }
        *entry = in_flat;
    }
    (out_dims, map)
}

/// Hermitian inner product ⟨u|v⟩, conjugate-linear in the first argument.
///
/// Only the total dimensions must agree; the factor structures may differ.
pub fn hermitian_inner(u: &StateVector, v: &StateVector) -> Result<C64, NumError> {
    if u.total_dim() != v.total_dim() {
        return Err(NumError::DimensionMismatch(format!(
            "inner product between dimensions {} and {}",
            u.total_dim(),
            v.total_dim()
        )));
    }
    Ok(u.amps.dotc(&v.amps))
}

/// Tensor product u ⊗ v; the factors of `u` come first (slowest).
pub fn tensor_product(u: &StateVector, v: &StateVector) -> StateVector {
    let mut dims = u.dims.clone();
    dims.extend_from_slice(&v.dims);
    let mut amps = Vec::with_capacity(u.total_dim() * v.total_dim());
    for a in u.amps.iter() {
        for b in v.amps.iter() {
            amps.push(a * b);
        }
    }
    StateVector { dims, amps: CVector::from_vec(amps) }
}

/// Reorder tensor factors: output position `k` carries input factor
/// `perm[k]`. Regrouping by `perm` and then by its inverse is the identity.
pub fn regroup_factors(s: &StateVector, perm: &[usize]) -> Result<StateVector, NumError> {
    validate_perm(perm, s.dims.len())?;
    let (out_dims, map) = regroup_index_map(&s.dims, perm);
    let amps: Vec<C64> = map.iter().map(|&i| s.amps[i]).collect();
    Ok(StateVector { dims: out_dims, amps: CVector::from_vec(amps) })
}

/// Inverse of a factor permutation.
pub fn invert_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

fn stack_rows(states: &[StateVector]) -> Result<CMatrix, NumError> {
    let dim = states[0].total_dim();
    for s in states {
        if s.total_dim() != dim {
            return Err(NumError::DimensionMismatch(format!(
                "stacked states of dimensions {} and {}",
                dim,
                s.total_dim()
            )));
        }
    }
    Ok(CMatrix::from_fn(states.len(), dim, |r, c| states[r].amps[c]))
}

fn matrix_singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub(crate) fn matrix_rank(m: &CMatrix, tol: &ToleranceConfig) -> usize {
    let sv = matrix_singular_values(m);
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_rel_tol * smax).count()
}

/// Number of singular values of the stacked state matrix above
/// `rank_rel_tol` times the largest one. Empty input has rank 0.
pub fn numerical_rank(states: &[StateVector], tol: &ToleranceConfig) -> Result<usize, NumError> {
    if states.is_empty() {
        return Ok(0);
    }
    Ok(matrix_rank(&stack_rows(states)?, tol))
}

/// Gram matrix G[i,j] = <psi_i | psi_j>, computed through four real
/// matrix products (much faster than complex gemm for large stacks).
pub(crate) fn gram_matrix(states: &[StateVector]) -> Result<CMatrix, NumError> {
    let m = stack_rows(states)?;
    let re = nalgebra::DMatrix::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
    let im = nalgebra::DMatrix::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im);
    // conj(M) M^T = (re - i im)(re + i im)^T
    let g_re = &re * re.transpose() + &im * im.transpose();
    let g_im = &re * im.transpose() - &im * re.transpose();
    Ok(CMatrix::from_fn(m.nrows(), m.nrows(), |i, j| C64::new(g_re[(i, j)], g_im[(i, j)])))
}

/// Cheap sufficient check for full rank: a successful Cholesky of the Gram
/// matrix certifies a smallest-to-largest singular-value ratio well above
/// the default rank tolerance. `false` means "undecided", not dependent.
pub(crate) fn gram_certifies_full_rank(states: &[StateVector]) -> Result<bool, NumError> {
    let g = gram_matrix(states)?;
    Ok(nalgebra::Cholesky::new(g).is_some())
}

/// Orthonormal basis of the right nullspace of `m` (vectors v with mv = 0),
/// including the trivial directions when `m` has fewer rows than columns.
pub(crate) fn right_nullspace(m: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let n = m.ncols();
    // Pad with zero rows so the SVD carries a complete right-singular basis.
    let padded = if m.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("SVD with v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let mut basis = Vec::new();
    for i in 0..n {
        let s = if i < sv.len() { sv[i] } else { 0.0 };
        if smax == 0.0 || s <= rel_tol * smax {
            basis.push(v_t.row(i).conjugate().transpose());
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of the span of `states`
/// inside dimension `within_dim`. Every returned vector is Hermitian-
/// orthogonal to every input.
pub fn orthocomplement(
    states: &[StateVector],
    within_dim: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<StateVector>, NumError> {
    if states.is_empty() {
        return (0..within_dim)
            .map(|k| StateVector::basis(vec![within_dim], k))
            .collect();
    }
    let dims = states[0].dims.clone();
    if states[0].total_dim() != within_dim {
        return Err(NumError::DimensionMismatch(format!(
            "states of dimension {} inside {}",
            states[0].total_dim(),
            within_dim
        )));
    }
    // Rows conj(psi_j) so that the nullspace is Hermitian-orthogonal to the inputs.
    let m = stack_rows(states)?.conjugate();
    Ok(right_nullspace(&m, tol.rank_rel_tol)
        .into_iter()
        .map(|v| StateVector { dims: dims.clone(), amps: v })
        .collect())
}

fn validate_split(split: &[usize], n_factors: usize) -> Result<(), NumError> {
    if split.is_empty() || split.len() >= n_factors {
        return Err(NumError::InvalidSplit(split.to_vec(), n_factors));
    }
    let mut seen = vec![false; n_factors];
    for &f in split {
        if f >= n_factors || seen[f] {
            return Err(NumError::InvalidSplit(split.to_vec(), n_factors));
        }
        seen[f] = true;
    }
    Ok(())
}

/// Schmidt rank of `s` across the bipartition `split` vs. the remaining
/// factors: the numerical rank of the reshaped coefficient matrix. Equals 1
/// exactly when the state is a product across the split.
pub fn schmidt_rank(
    s: &StateVector,
    split: &[usize],
    tol: &ToleranceConfig,
) -> Result<usize, NumError> {
    validate_split(split, s.dims.len())?;
    let mut left: Vec<usize> = split.to_vec();
    left.sort_unstable();
    let right: Vec<usize> =
        (0..s.dims.len()).filter(|f| !left.contains(f)).collect();
    let mut perm = left.clone();
    perm.extend_from_slice(&right);
    let re = regroup_factors(s, &perm)?;
    let l_dim: usize = left.iter().map(|&f| s.dims[f]).product();
    let r_dim = s.total_dim() / l_dim;
    let m = CMatrix::from_fn(l_dim, r_dim, |i, j| re.amps[i * r_dim + j]);
    Ok(matrix_rank(&m, tol))
}

/// A square operator on an explicit tensor-factor space, stored dense.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl Operator {
    pub fn new(dims: Vec<usize>, mat: CMatrix) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        if mat.nrows() != total || mat.ncols() != total {
            return Err(NumError::DimensionMismatch(format!(
                "{}x{} matrix for total dimension {total}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        for a in mat.iter() {
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(NumError::NonFinite(0));
            }
        }
        Ok(Self { dims, mat })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self, NumError> {
        let total = check_dims(&dims)?;
        Ok(Self { dims, mat: CMatrix::identity(total, total) })
    }

    /// Rank-one projector |s⟩⟨s|.
    pub fn projector(s: &StateVector) -> Self {
        let d = s.total_dim();
        let mat = CMatrix::from_fn(d, d, |i, j| s.amps[i] * s.amps[j].conj());
        Self { dims: s.dims.clone(), mat }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    /// Largest entrywise deviation from hermiticity, max |M - M^H|.
    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.mat.adjoint();
        (&self.mat - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<(), NumError> {
        let r = self.hermiticity_residual();
        if r > tol {
            return Err(NumError::NotHermitian(r));
        }
        Ok(())
    }

    /// Eigenvalues assuming hermiticity (callers verify that separately).
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        nalgebra::SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// PSD square root via eigendecomposition, clamping tiny negatives to 0.
    pub fn psd_sqrt(&self) -> Self {
        let eig = nalgebra::SymmetricEigen::new(self.mat.clone());
        let d = self.total_dim();
        let mut mat = CMatrix::zeros(d, d);
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            let s = lam.max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            for i in 0..d {
                for j in 0..d {
                    mat[(i, j)] += C64::new(s, 0.0) * v[i] * v[j].conj();
                }
            }
        }
        Self { dims: self.dims.clone(), mat }
    }

    pub fn tensor(a: &Operator, b: &Operator) -> Operator {
        let mut dims = a.dims.clone();
        dims.extend_from_slice(&b.dims);
        Operator { dims, mat: a.mat.kronecker(&b.mat) }
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator { dims: self.dims.clone(), mat: &self.mat * c }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator, NumError> {
        if self.total_dim() != other.total_dim() {
            return Err(NumError::DimensionMismatch("operator sum".into()));
        }
        Ok(Operator { dims: self.dims.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator, NumError> {
        if self.total_dim() != other.total_dim() {
            return Err(NumError::DimensionMismatch("operator difference".into()));
        }
        Ok(Operator { dims: self.dims.clone(), mat: &self.mat - &other.mat })
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator, NumError> {
        if self.total_dim() != other.total_dim() {
            return Err(NumError::DimensionMismatch("operator product".into()));
        }
        Ok(Operator { dims: self.dims.clone(), mat: &self.mat * &other.mat })
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64, NumError> {
        if self.total_dim() != other.total_dim() {
            return Err(NumError::DimensionMismatch("operator comparison".into()));
        }
        Ok((&self.mat - &other.mat).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Tr(self · other).
    pub fn trace_product(&self, other: &Operator) -> Result<C64, NumError> {
        if self.total_dim() != other.total_dim() {
            return Err(NumError::DimensionMismatch("trace product".into()));
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.mat.nrows() {
            for j in 0..self.mat.ncols() {
                acc += self.mat[(i, j)] * other.mat[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Reorder tensor factors of rows and columns simultaneously.
    pub fn regroup_factors(&self, perm: &[usize]) -> Result<Operator, NumError> {
        validate_perm(perm, self.dims.len())?;
        let (out_dims, map) = regroup_index_map(&self.dims, perm);
        let total = self.total_dim();
        let mat = CMatrix::from_fn(total, total, |i, j| self.mat[(map[i], map[j])]);
        Ok(Operator { dims: out_dims, mat })
    }

    /// Embed an operator acting on the factors `positions` (ascending) of a
    /// larger space, as identity elsewhere.
    pub fn embed(&self, full_dims: &[usize], positions: &[usize]) -> Result<Operator, NumError> {
        if positions.len() != self.dims.len() {
            return Err(NumError::DimensionMismatch(format!(
                "{} positions for {} factors",
                positions.len(),
                self.dims.len()
            )));
        }
        let mut seen = vec![false; full_dims.len()];
        for (k, &p) in positions.iter().enumerate() {
            if p >= full_dims.len() || seen[p] || full_dims[p] != self.dims[k] {
                return Err(NumError::DimensionMismatch(format!(
                    "embedding positions {positions:?} into {full_dims:?}"
                )));
            }
            seen[p] = true;
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NumError::DimensionMismatch(
                "embedding positions must be strictly ascending".into(),
            ));
        }
        let full_total: usize = full_dims.iter().product();
        let full_strides = strides(full_dims);
        let sub_strides = strides(&self.dims);
        let rest: Vec<usize> =
            (0..full_dims.len()).filter(|f| !positions.contains(f)).collect();
        let mut mat = CMatrix::zeros(full_total, full_total);
        for row in 0..full_total {
            let ridx = unflatten(row, full_dims, &full_strides);
            let mut sub_row = 0usize;
            for (k, &p) in positions.iter().enumerate() {
                sub_row += ridx[p] * sub_strides[k];
            }
            for srow_col in 0..self.total_dim() {
                let z = self.mat[(sub_row, srow_col)];
                if z == C64::new(0.0, 0.0) {
                    continue;
                }
                // Column index: same rest-factor indices, subsystem column.
                let cidx = unflatten(srow_col, &self.dims, &sub_strides);
                let mut col = 0usize;
                for (k, &p) in positions.iter().enumerate() {
                    col += cidx[k] * full_strides[p];
                }
                for &f in &rest {
                    col += ridx[f] * full_strides[f];
                }
                mat[(row, col)] = z;
            }
        }
        Ok(Operator { dims: full_dims.to_vec(), mat })
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &CVector) -> Result<CVector, NumError> {
        if v.len() != self.total_dim() {
            return Err(NumError::DimensionMismatch("operator application".into()));
        }
        Ok(&self.mat * v)
    }
}
