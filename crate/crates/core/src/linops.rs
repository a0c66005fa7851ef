//! Dense complex linear algebra over tensor-product spaces: validated state
//! types, partial transpose and partial trace, trace norm, and spectral
//! decompositions.
//!
//! Matrices act on a Hilbert space `H_1 ⊗ ... ⊗ H_k` whose factor dimensions
//! are tracked by [`SubsystemDims`]. Composite indices are row-major: basis
//! vector `|i_1 ... i_k⟩` has index `((i_1 d_2 + i_2) d_3 + ...) + i_k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default tolerance for state validation (Hermiticity, trace, positivity,
/// normalization).
pub const DEFAULT_TOL: f64 = 1e-8;

/// Eigenvalues with `|λ|` at or below this are assigned to the positive part
/// in [`jordan_parts`], so the split is stable for rank-deficient input.
pub const JORDAN_ZERO_TOL: f64 = 1e-12;

/// Which tensor factor of a bipartite space an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Dimensions of the tensor factors of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemDims(Vec<usize>);

impl SubsystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("empty dimension list".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "subsystem dimensions must be positive, got {dims:?}"
            )));
        }
        Ok(SubsystemDims(dims))
    }

    /// Single factor of dimension `d`. Panics if `d == 0`.
    pub fn single(d: usize) -> Self {
        Self::new(vec![d]).expect("positive dimension")
    }

    /// Two factors `d_a ⊗ d_b`. Panics if either is zero.
    pub fn bipartite(da: usize, db: usize) -> Self {
        Self::new(vec![da, db]).expect("positive dimensions")
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Total dimension (product of all factors).
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// The two factor dimensions, if this space is bipartite.
    pub fn as_pair(&self) -> Option<(usize, usize)> {
        match self.0.as_slice() {
            &[a, b] => Some((a, b)),
            _ => None,
        }
    }
}

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidState("matrix contains non-finite entries".into()))
    }
}

/// Largest entrywise deviation `|M_ij - conj(M_ji)|` from Hermiticity.
pub fn herm_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigendecomposition of an (exactly or approximately) Hermitian matrix.
/// The input is symmetrized first; no Hermiticity check is performed.
pub(crate) fn eig_sorted(h: &CMat) -> (DVector<f64>, CMat) {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix, with
/// eigenvalues in ascending order and orthonormal eigenvector columns.
///
/// Errors if `H` is not square or deviates from Hermiticity by more than
/// [`DEFAULT_TOL`]; deviations below that are symmetrized away.
pub fn hermitian_eig(h: &CMat) -> Result<(DVector<f64>, CMat)> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    check_finite(h)?;
    let dev = herm_deviation(h);
    if dev > DEFAULT_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(eig_sorted(h))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig(h: &CMat) -> Result<f64> {
    let (vals, _) = hermitian_eig(h)?;
    Ok(vals[0])
}

/// Trace norm `‖H‖_1 = Σ|λ_i|` of a Hermitian matrix, by eigendecomposition.
pub fn trace_norm(h: &CMat) -> Result<f64> {
    let (vals, _) = hermitian_eig(h)?;
    Ok(vals.iter().map(|l| l.abs()).sum())
}

/// Jordan decomposition `H = H_+ - H_-` into orthogonal positive-semidefinite
/// parts. Eigenvalues within [`JORDAN_ZERO_TOL`] of zero go to `H_+`.
pub fn jordan_parts(h: &CMat) -> Result<(CMat, CMat)> {
    let (vals, vecs) = hermitian_eig(h)?;
    let n = h.nrows();
    let mut pos = CMat::zeros(n, n);
    let mut neg = CMat::zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        let v = vecs.column(i);
        let outer = v * v.adjoint();
        if l < -JORDAN_ZERO_TOL {
            neg += outer.scale(-l);
        } else {
            pos += outer.scale(l);
        }
    }
    Ok((pos, neg))
}

/// Operator absolute value `|H| = H_+ + H_-` of a Hermitian matrix.
pub fn abs_hermitian(h: &CMat) -> Result<CMat> {
    let (pos, neg) = jordan_parts(h)?;
    Ok(pos + neg)
}

/// Partial transpose of a bipartite matrix on the given side:
/// for `side == B`, `⟨a β| M' |b α⟩ = ⟨a α| M |b β⟩`.
pub fn partial_transpose(m: &CMat, dims: &SubsystemDims, side: Side) -> Result<CMat> {
    let (da, db) = dims.as_pair().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "partial transpose needs a bipartite space, got {} factors",
            dims.len()
        ))
    })?;
    let n = da * db;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but dims {:?} give total {}",
            m.nrows(),
            m.ncols(),
            dims.dims(),
            n
        )));
    }
    let mut out = CMat::zeros(n, n);
    for a in 0..da {
        for al in 0..db {
            for b in 0..da {
                for be in 0..db {
                    let v = m[(a * db + al, b * db + be)];
                    match side {
                        Side::B => out[(a * db + be, b * db + al)] = v,
                        Side::A => out[(b * db + al, a * db + be)] = v,
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let k = dims.len();
    let mut stride = vec![1usize; k];
    for s in (0..k.saturating_sub(1)).rev() {
        stride[s] = stride[s + 1] * dims[s + 1];
    }
    stride
}

/// Composite-index offsets contributed by the subsystems in `subset`,
/// enumerated in row-major order of their joint index.
fn axis_offsets(dims: &[usize], subset: &[usize]) -> Vec<usize> {
    let stride = strides(dims);
    let total: usize = subset.iter().map(|&s| dims[s]).product();
    let mut offs = Vec::with_capacity(total);
    let mut idx = vec![0usize; subset.len()];
    for _ in 0..total {
        offs.push(idx.iter().zip(subset).map(|(&v, &s)| v * stride[s]).sum());
        for pos in (0..subset.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < dims[subset[pos]] {
                break;
            }
            idx[pos] = 0;
        }
    }
    offs
}

pub(crate) fn partial_trace_mat(m: &CMat, dims: &[usize], keep: &[usize]) -> (CMat, Vec<usize>) {
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
    let keep_offs = axis_offsets(dims, keep);
    let tr_offs = axis_offsets(dims, &traced);
    let nk = keep_offs.len();
    let mut out = CMat::zeros(nk, nk);
    for (i, &oi) in keep_offs.iter().enumerate() {
        for (j, &oj) in keep_offs.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &ot in &tr_offs {
                acc += m[(oi + ot, oj + ot)];
            }
            out[(i, j)] = acc;
        }
    }
    (out, keep.iter().map(|&s| dims[s]).collect())
}

/// Trace out all subsystems not listed in `keep` (strictly increasing indices).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let k = rho.dims().len();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("must keep at least one subsystem".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&s| s >= k) {
        return Err(Error::InvalidArgument(format!(
            "keep indices must be strictly increasing and below {k}, got {keep:?}"
        )));
    }
    let (out, new_dims) = partial_trace_mat(rho.matrix(), rho.dims().dims(), keep);
    DensityMatrix::with_tol(out, SubsystemDims::new(new_dims)?, rho.tol())
}

pub(crate) fn permute_systems_mat(m: &CMat, dims: &[usize], perm: &[usize]) -> (CMat, Vec<usize>) {
    let k = dims.len();
    let old_stride = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n: usize = dims.iter().product();
    let mut map = vec![0usize; n];
    let mut idx = vec![0usize; k];
    for entry in map.iter_mut() {
        *entry = idx.iter().zip(perm).map(|(&v, &p)| v * old_stride[p]).sum();
        for pos in (0..k).rev() {
            idx[pos] += 1;
            if idx[pos] < new_dims[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
    let out = CMat::from_fn(n, n, |i, j| m[(map[i], map[j])]);
    (out, new_dims)
}

/// Reorder tensor factors so that new factor `k` is old factor `perm[k]`.
pub fn permute_systems(
    m: &CMat,
    dims: &SubsystemDims,
    perm: &[usize],
) -> Result<(CMat, SubsystemDims)> {
    let k = dims.len();
    let mut seen = vec![false; k];
    if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument(format!(
            "not a permutation of 0..{k}: {perm:?}"
        )));
    }
    let n = dims.total();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but dims {:?} give total {}",
            m.nrows(),
            m.ncols(),
            dims.dims(),
            n
        )));
    }
    let (out, new_dims) = permute_systems_mat(m, dims.dims(), perm);
    Ok((out, SubsystemDims::new(new_dims)?))
}

/// Unitary `exp(-i H t)` of a Hermitian `H`, via eigendecomposition.
pub fn exp_spectral(h: &CMat, t: f64) -> Result<CMat> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite time {t}")));
    }
    let (vals, vecs) = hermitian_eig(h)?;
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let phase = C64::new(0.0, -vals[j] * t).exp();
        for e in scaled.column_mut(j).iter_mut() {
            *e *= phase;
        }
    }
    Ok(scaled * vecs.adjoint())
}

/// A validated density matrix: Hermitian, unit trace, and positive
/// semidefinite, each within the stored tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMat,
    dims: SubsystemDims,
    tol: f64,
}

impl DensityMatrix {
    /// Validates with [`DEFAULT_TOL`].
    pub fn new(mat: CMat, dims: SubsystemDims) -> Result<Self> {
        Self::with_tol(mat, dims, DEFAULT_TOL)
    }

    pub fn with_tol(mat: CMat, dims: SubsystemDims, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let n = dims.total();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but dims {:?} give total {}",
                mat.nrows(),
                mat.ncols(),
                dims.dims(),
                n
            )));
        }
        check_finite(&mat)?;
        let dev = herm_deviation(&mat);
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace is {:.12}{:+.3e}i, expected 1 within {tol:.1e}",
                tr.re, tr.im
            )));
        }
        let (vals, _) = eig_sorted(&mat);
        if vals[0] < -tol {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {:.3e} below -{tol:.1e}",
                vals[0]
            )));
        }
        Ok(DensityMatrix { mat, dims, tol })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The factor dimensions, if this state is bipartite.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        self.dims.as_pair().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "expected a bipartite state, got {} factors",
                self.dims.len()
            ))
        })
    }

    /// Partial transpose of this (bipartite) state on the given side.
    pub fn partial_transpose(&self, side: Side) -> Result<CMat> {
        partial_transpose(&self.mat, &self.dims, side)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// A validated pure-state vector with unit Euclidean norm.
#[derive(Debug, Clone)]
pub struct PureState {
    amp: CVec,
    dims: SubsystemDims,
}

impl PureState {
    pub fn new(amp: CVec, dims: SubsystemDims) -> Result<Self> {
        Self::with_tol(amp, dims, DEFAULT_TOL)
    }

    pub fn with_tol(amp: CVec, dims: SubsystemDims, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        if amp.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "vector has length {} but dims {:?} give total {}",
                amp.len(),
                dims.dims(),
                dims.total()
            )));
        }
        if !amp.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidState("vector contains non-finite entries".into()));
        }
        let norm = amp.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!(
                "norm is {norm:.12}, expected 1 within {tol:.1e}"
            )));
        }
        Ok(PureState { amp, dims })
    }

    /// Computational basis state `|i_1 ... i_k⟩`.
    pub fn basis(dims: SubsystemDims, indices: &[usize]) -> Result<Self> {
        if indices.len() != dims.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} indices, got {}",
                dims.len(),
                indices.len()
            )));
        }
        if indices.iter().zip(dims.dims()).any(|(&i, &d)| i >= d) {
            return Err(Error::InvalidArgument(format!(
                "basis indices {indices:?} out of range for dims {:?}",
                dims.dims()
            )));
        }
        let stride = strides(dims.dims());
        let pos: usize = indices.iter().zip(&stride).map(|(&i, &s)| i * s).sum();
        let mut amp = CVec::zeros(dims.total());
        amp[pos] = C64::new(1.0, 0.0);
        Ok(PureState { amp, dims })
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amp
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        self.dims.as_pair().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "expected a bipartite state, got {} factors",
                self.dims.len()
            ))
        })
    }

    /// Projector `|ψ⟩⟨ψ|`, renormalized so the trace is exactly 1.
    pub fn to_density(&self) -> DensityMatrix {
        let n2 = self.amp.norm_squared();
        let mat = (&self.amp * self.amp.adjoint()).scale(1.0 / n2);
        DensityMatrix {
            mat,
            dims: self.dims.clone(),
            tol: DEFAULT_TOL,
        }
    }
}

/// Schmidt decomposition `|ψ⟩ = Σ_i c_i |u_i⟩|w_i⟩` of a bipartite pure
/// state. Coefficients are nonnegative and sorted in descending order; the
/// basis matrices are square unitaries whose first `coefficients.len()`
/// columns are the Schmidt vectors.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left_basis: CMat,
    pub right_basis: CMat,
}

impl SchmidtForm {
    /// Squared coefficients `p_i = c_i²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c * c).collect()
    }

    /// Reassemble the state vector from the decomposition.
    pub fn reconstruct(&self) -> CVec {
        let da = self.left_basis.nrows();
        let db = self.right_basis.nrows();
        let mut amp = CVec::zeros(da * db);
        for (i, &c) in self.coefficients.iter().enumerate() {
            let u = self.left_basis.column(i);
            let w = self.right_basis.column(i);
            for a in 0..da {
                for b in 0..db {
                    amp[a * db + b] += u[a] * w[b] * C64::new(c, 0.0);
                }
            }
        }
        amp
    }
}

/// Extend a set of orthonormal columns to a full orthonormal basis.
fn complete_basis(cols: CMat) -> CMat {
    let d = cols.nrows();
    let k = cols.ncols();
    let mut out = CMat::zeros(d, d);
    for j in 0..k {
        out.set_column(j, &cols.column(j));
    }
    let mut have = k;
    for cand in 0..d {
        if have == d {
            break;
        }
        let mut v = CVec::zeros(d);
        v[cand] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for j in 0..have {
                let col = out.column(j);
                let ip = col.dotc(&v);
                v -= col * ip;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.set_column(have, &v.unscale(norm));
            have += 1;
        }
    }
    debug_assert_eq!(have, d);
    out
}

/// Schmidt decomposition of a bipartite pure state, by singular value
/// decomposition of the amplitude matrix.
pub fn schmidt(psi: &PureState) -> Result<SchmidtForm> {
    let (da, db) = psi.bipartite_dims()?;
    let amp = psi.amplitudes();
    let m = CMat::from_fn(da, db, |a, b| amp[a * db + b]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients: Vec<f64> = order.iter().map(|&i| svd.singular_values[i].max(0.0)).collect();
    let mut left = CMat::zeros(da, r);
    let mut right = CMat::zeros(db, r);
    for (j, &i) in order.iter().enumerate() {
        left.set_column(j, &u.column(i));
        // rows of V† are the conjugated right Schmidt vectors
        for b in 0..db {
            right[(b, j)] = v_t[(i, b)];
        }
    }
    Ok(SchmidtForm {
        coefficients,
        left_basis: complete_basis(left),
        right_basis: complete_basis(right),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Deterministic pseudo-arbitrary unit vector.
    fn test_vector(n: usize, phase: f64) -> CVec {
        let mut v = CVec::from_fn(n, |i, _| {
            c((i as f64 + 1.3 + phase).sin(), (3.0 * i as f64 + phase).cos())
        });
        let norm = v.norm();
        v /= c(norm, 0.0);
        v
    }

    fn bell() -> PureState {
        let amp = CVec::from_vec(vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ]);
        PureState::new(amp, SubsystemDims::bipartite(2, 2)).unwrap()
    }

    #[test]
    fn partial_transpose_bell_has_negative_eigenvalue() {
        let rho = bell().to_density();
        let pt = rho.partial_transpose(Side::B).unwrap();
        let (vals, _) = hermitian_eig(&pt).unwrap();
        assert_abs_diff_eq!(vals[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[3], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let dims = SubsystemDims::bipartite(2, 3);
        let v = test_vector(6, 0.7);
        let m = &v * v.adjoint();
        let twice = partial_transpose(
            &partial_transpose(&m, &dims, Side::B).unwrap(),
            &dims,
            Side::B,
        )
        .unwrap();
        assert!((twice - &m).norm() < 1e-14);
    }

    #[test]
    fn partial_transpose_sides_are_related_by_full_transpose() {
        let dims = SubsystemDims::bipartite(2, 3);
        let v = test_vector(6, 1.9);
        let m = &v * v.adjoint();
        let ta = partial_transpose(&m, &dims, Side::A).unwrap();
        let tb = partial_transpose(&m, &dims, Side::B).unwrap();
        assert!((ta - tb.transpose()).norm() < 1e-14);
    }

    #[test]
    fn trace_norm_matches_known_spectrum() {
        // build H = V diag(1.5, -0.25, 0, 2) V† from an orthonormal set
        let lambda = [1.5, -0.25, 0.0, 2.0];
        let seed = test_vector(4, 0.2);
        let basis = complete_basis(CMat::from_fn(4, 1, |i, _| seed[i]));
        let mut h = CMat::zeros(4, 4);
        for (i, &l) in lambda.iter().enumerate() {
            let col = basis.column(i);
            h += (col * col.adjoint()).scale(l);
        }
        assert_abs_diff_eq!(trace_norm(&h).unwrap(), 3.75, epsilon = 1e-10);
    }

    #[test]
    fn trace_norm_of_density_matrix_is_one() {
        let rho = bell().to_density();
        assert_abs_diff_eq!(trace_norm(rho.matrix()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_rejects_non_hermitian() {
        let m = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0));
        assert!(matches!(trace_norm(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn jordan_parts_reconstruct_and_are_orthogonal() {
        let rho = bell().to_density();
        let pt = rho.partial_transpose(Side::B).unwrap();
        let (pos, neg) = jordan_parts(&pt).unwrap();
        assert!((&pos - &neg - &pt).norm() < 1e-12);
        assert!((&pos * &neg).norm() < 1e-12);
        assert!(min_eig(&pos).unwrap() > -1e-12);
        assert!(min_eig(&neg).unwrap() > -1e-12);
        assert_abs_diff_eq!(neg.trace().re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn abs_hermitian_squares_to_h_squared() {
        let v = test_vector(6, 2.4);
        let m = &v * v.adjoint();
        let pt = partial_transpose(&m, &SubsystemDims::bipartite(2, 3), Side::B).unwrap();
        let a = abs_hermitian(&pt).unwrap();
        assert!((&a * &a - &pt * &pt).norm() < 1e-10);
    }

    #[test]
    fn hermitian_eig_sorted_and_reconstructs() {
        let v = test_vector(5, 3.3);
        let w = test_vector(5, 4.1);
        let h = (&v * v.adjoint()).scale(2.0) - (&w * w.adjoint()).scale(0.7);
        let (vals, vecs) = hermitian_eig(&h).unwrap();
        assert!(vals.iter().zip(vals.iter().skip(1)).all(|(a, b)| a <= b));
        let mut rec = CMat::zeros(5, 5);
        for i in 0..5 {
            let col = vecs.column(i);
            rec += (col * col.adjoint()).scale(vals[i]);
        }
        assert!((rec - &h).norm() < 1e-12);
        assert!((vecs.adjoint() * &vecs - CMat::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn schmidt_of_bell_state() {
        let form = schmidt(&bell()).unwrap();
        assert_eq!(form.coefficients.len(), 2);
        for c in &form.coefficients {
            assert_abs_diff_eq!(*c, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        }
        let p: f64 = form.probabilities().iter().sum();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn schmidt_of_product_state_has_single_coefficient() {
        let psi = PureState::basis(SubsystemDims::bipartite(3, 3), &[1, 2]).unwrap();
        let form = schmidt(&psi).unwrap();
        assert_abs_diff_eq!(form.coefficients[0], 1.0, epsilon = 1e-12);
        for c in &form.coefficients[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_reconstructs_generic_states() {
        for (da, db, phase) in [(3, 3, 0.4), (2, 4, 1.1), (4, 2, 2.6)] {
            let dims = SubsystemDims::bipartite(da, db);
            let psi = PureState::new(test_vector(da * db, phase), dims).unwrap();
            let form = schmidt(&psi).unwrap();
            let p: f64 = form.probabilities().iter().sum();
            assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
            assert!((form.reconstruct() - psi.amplitudes()).norm() < 1e-10);
            let ub = &form.left_basis;
            let wb = &form.right_basis;
            assert!((ub.adjoint() * ub - CMat::identity(da, da)).norm() < 1e-10);
            assert!((wb.adjoint() * wb - CMat::identity(db, db)).norm() < 1e-10);
            assert!(form.coefficients.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let va = test_vector(2, 0.3);
        let vb = test_vector(3, 1.2);
        let ra = &va * va.adjoint();
        let rb = &vb * vb.adjoint();
        let rho = DensityMatrix::new(kron(&ra, &rb), SubsystemDims::bipartite(2, 3)).unwrap();
        let ta = partial_trace(&rho, &[0]).unwrap();
        let tb = partial_trace(&rho, &[1]).unwrap();
        assert!((ta.matrix() - &ra).norm() < 1e-12);
        assert!((tb.matrix() - &rb).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_tripartite_keeps_selected_factors() {
        let vs: Vec<CMat> = [(2, 0.5), (3, 1.5), (2, 2.5)]
            .iter()
            .map(|&(d, ph)| {
                let v = test_vector(d, ph);
                &v * v.adjoint()
            })
            .collect();
        let rho = DensityMatrix::new(
            kron(&kron(&vs[0], &vs[1]), &vs[2]),
            SubsystemDims::new(vec![2, 3, 2]).unwrap(),
        )
        .unwrap();
        let kept = partial_trace(&rho, &[0, 2]).unwrap();
        assert_eq!(kept.dims().dims(), &[2, 2]);
        assert!((kept.matrix() - kron(&vs[0], &vs[2])).norm() < 1e-12);
    }

    #[test]
    fn permute_systems_roundtrip_and_product_swap() {
        let va = test_vector(2, 0.9);
        let vb = test_vector(3, 1.7);
        let ra = &va * va.adjoint();
        let rb = &vb * vb.adjoint();
        let m = kron(&ra, &rb);
        let dims = SubsystemDims::bipartite(2, 3);
        let (swapped, sdims) = permute_systems(&m, &dims, &[1, 0]).unwrap();
        assert_eq!(sdims.dims(), &[3, 2]);
        assert!((&swapped - kron(&rb, &ra)).norm() < 1e-14);
        let (back, bdims) = permute_systems(&swapped, &sdims, &[1, 0]).unwrap();
        assert_eq!(bdims, dims);
        assert!((back - m).norm() < 1e-14);
    }

    #[test]
    fn exp_spectral_is_unitary_and_identity_at_zero() {
        let v = test_vector(4, 0.8);
        let w = test_vector(4, 1.6);
        let h = (&v * v.adjoint()).scale(1.3) + (&w * w.adjoint()).scale(-0.4);
        let u = exp_spectral(&h, 2.7).unwrap();
        assert!((u.adjoint() * &u - CMat::identity(4, 4)).norm() < 1e-12);
        let id = exp_spectral(&h, 0.0).unwrap();
        assert!((id - CMat::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_validation_rejects_bad_input() {
        let dims = SubsystemDims::single(2);
        // wrong trace
        let m = CMat::identity(2, 2);
        assert!(matches!(
            DensityMatrix::new(m, dims.clone()),
            Err(Error::InvalidState(_))
        ));
        // negative eigenvalue
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(
            DensityMatrix::new(m, dims.clone()),
            Err(Error::InvalidState(_))
        ));
        // non-hermitian
        let mut m = CMat::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.3, 0.0);
        assert!(matches!(
            DensityMatrix::new(m, dims.clone()),
            Err(Error::NotHermitian(_))
        ));
        // dimension mismatch
        let m = CMat::identity(3, 3).scale(1.0 / 3.0);
        assert!(matches!(
            DensityMatrix::new(m, dims),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pure_state_validation_rejects_unnormalized() {
        let amp = CVec::from_vec(vec![c(1.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(
            PureState::new(amp, SubsystemDims::single(2)),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn basis_state_indexing_is_row_major() {
        let psi = PureState::basis(SubsystemDims::new(vec![2, 3, 2]).unwrap(), &[1, 2, 0]).unwrap();
        let amp = psi.amplitudes();
        // |1,2,0⟩ sits at composite index (1·3 + 2)·2 + 0 = 10
        assert_abs_diff_eq!(amp[10].re, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(amp.norm(), 1.0, epsilon = 1e-15);
    }
}
