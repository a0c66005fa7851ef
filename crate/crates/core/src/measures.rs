//! Partial-transpose distance, negativity, and the correlation quantifiers
//! defined as partial-transpose distances to restricted state sets.
//!
//! For a bipartite state the distance `d_T(ρ, σ) = ½‖ρ^{T_B} − σ^{T_B}‖_1`
//! is minimized over classical-classical or product states to give the
//! quantifiers computed here. Closed forms are available for pure states
//! and for classical probability vectors; general mixed states get sampling
//! upper bounds.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linops::{
    C64, CMat, DensityMatrix, PureState, SchmidtForm, Side, SubsystemDims, abs_hermitian,
    hermitian_eig, jordan_parts, kron, partial_transpose, permute_systems_mat, schmidt,
    trace_norm,
};
use crate::randstates::{SeededStream, dirichlet_flat, haar_unitary, random_product};

/// Distances and quantifier values this close below zero are treated as
/// numerical noise and clamped to zero.
pub const VALUE_CLAMP: f64 = 1e-12;

/// PSD threshold on the partial transpose of the normalized positive part
/// reported by [`sigma_n`].
pub const SIGMA_N_PSD_TOL: f64 = 1e-9;

const CLASSICAL_SUM_TOL: f64 = 1e-12;

fn clamp_value(x: f64) -> f64 {
    if x < 0.0 { 0.0 } else { x }
}

/// A probability vector sorted in descending order, with the permutation
/// that maps sorted positions back to the original indices.
#[derive(Debug, Clone)]
pub struct ClassicalState {
    probs: Vec<f64>,
    perm: Vec<usize>,
}

impl ClassicalState {
    /// Validates that `p` sums to 1 within `1e-12` with nonnegative entries
    /// (noise down to `-1e-12` is clamped), then sorts.
    pub fn new(p: &[f64]) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("probabilities contain non-finite entries".into()));
        }
        if let Some(bad) = p.iter().find(|&&x| x < -CLASSICAL_SUM_TOL) {
            return Err(Error::InvalidState(format!("negative probability {bad:.3e}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > CLASSICAL_SUM_TOL {
            return Err(Error::InvalidState(format!(
                "probabilities sum to {total:.15}, expected 1 within {CLASSICAL_SUM_TOL:.1e}"
            )));
        }
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[b].total_cmp(&p[a]));
        let probs = order.iter().map(|&i| clamp_value(p[i])).collect();
        Ok(ClassicalState { probs, perm: order })
    }

    /// Probabilities in descending order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `permutation()[k]` is the original index of sorted entry `k`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The correlated state `Σ_i p_i |ii⟩⟨ii|` on `d ⊗ d`, in the sorted basis.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.probs.len();
        let mut m = CMat::zeros(d * d, d * d);
        for (i, &p) in self.probs.iter().enumerate() {
            let idx = i * d + i;
            m[(idx, idx)] = C64::new(p, 0.0);
        }
        DensityMatrix::new(m, SubsystemDims::bipartite(d, d)).expect("valid diagonal state")
    }
}

/// How a [`QuantifierResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Sdp,
    SamplingUpperBound,
}

/// Value of a correlation quantifier, with the achieving state when the
/// method produces one.
#[derive(Debug, Clone)]
pub struct QuantifierResult {
    pub value: f64,
    pub closest_state: Option<DensityMatrix>,
    pub method: Method,
}

/// Restricted state sets that the quantifiers minimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrSet {
    /// Classical-classical states `Σ q_ij |a_i b_j⟩⟨a_i b_j|` over local
    /// orthonormal bases.
    ClassicalClassical,
    /// Product states `ρ_A ⊗ ρ_B`.
    Product,
}

/// Partial-transpose distance `½‖ρ^{T} − σ^{T}‖_1` between two states on the
/// same bipartite space.
pub fn pt_distance(rho: &DensityMatrix, sigma: &DensityMatrix, side: Side) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "states live on different spaces: {:?} vs {:?}",
            rho.dims().dims(),
            sigma.dims().dims()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    let pt = partial_transpose(&diff, rho.dims(), side)?;
    Ok(clamp_value(0.5 * trace_norm(&pt)?))
}

fn check_cut(k: usize, cut: &[usize]) -> Result<Vec<usize>> {
    if cut.is_empty() {
        return Err(Error::InvalidArgument("cut must name at least one subsystem".into()));
    }
    if cut.windows(2).any(|w| w[0] >= w[1]) || cut.iter().any(|&s| s >= k) {
        return Err(Error::InvalidArgument(format!(
            "cut indices must be strictly increasing and below {k}, got {cut:?}"
        )));
    }
    let keep: Vec<usize> = (0..k).filter(|s| !cut.contains(s)).collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "cut must leave at least one subsystem untransposed".into(),
        ));
    }
    Ok(keep)
}

/// Negativity `½(‖ρ^{T_cut}‖_1 − 1)` across the bipartition defined by
/// transposing the subsystems in `cut`. Results are clamped to `≥ 0`.
pub fn negativity(rho: &DensityMatrix, cut: &[usize]) -> Result<f64> {
    let dims = rho.dims();
    let keep = check_cut(dims.len(), cut)?;
    let perm: Vec<usize> = keep.iter().chain(cut).copied().collect();
    let (m, new_dims) = permute_systems_mat(rho.matrix(), dims.dims(), &perm);
    let d_keep: usize = new_dims[..keep.len()].iter().product();
    let d_cut: usize = new_dims[keep.len()..].iter().product();
    let grouped = SubsystemDims::bipartite(d_keep, d_cut);
    let pt = partial_transpose(&m, &grouped, Side::B)?;
    Ok(clamp_value(0.5 * (trace_norm(&pt)? - 1.0)))
}

/// Normalized positive part of `ρ^{T_B}`, together with a flag telling
/// whether its own partial transpose is PSD (down to [`SIGMA_N_PSD_TOL`]).
/// When the flag is true this state attains `d_T(ρ, ·) = N(ρ)` over PPT
/// states.
pub fn sigma_n(rho: &DensityMatrix) -> Result<(DensityMatrix, bool)> {
    let pt = rho.partial_transpose(Side::B)?;
    let (pos, _) = jordan_parts(&pt)?;
    let tr = pos.trace().re;
    let sn_mat = pos.unscale(tr);
    let sn_pt = partial_transpose(&sn_mat, rho.dims(), Side::B)?;
    let (vals, _) = hermitian_eig(&sn_pt)?;
    let pt_is_psd = vals[0] >= -SIGMA_N_PSD_TOL;
    let sn = DensityMatrix::with_tol(sn_mat, rho.dims().clone(), rho.tol())?;
    Ok((sn, pt_is_psd))
}

/// Smallest eigenvalue of the binegativity `(|ρ^{T_B}|)^{T_B}`.
pub fn binegativity_min_eig(rho: &DensityMatrix) -> Result<f64> {
    let pt = rho.partial_transpose(Side::B)?;
    let abs = abs_hermitian(&pt)?;
    let back = partial_transpose(&abs, rho.dims(), Side::B)?;
    let (vals, _) = hermitian_eig(&back)?;
    Ok(vals[0])
}

/// Distance from a pure state to the classical-classical set, in closed
/// form: `Σ_{i<j} c_i c_j` over Schmidt coefficients, attained by dephasing
/// in the Schmidt bases.
pub fn q_cc_pure(psi: &PureState) -> Result<QuantifierResult> {
    let (da, db) = psi.bipartite_dims()?;
    let form = schmidt(psi)?;
    let c = &form.coefficients;
    let value = pairwise_product_sum(c);
    let mut closest = CMat::zeros(da * db, da * db);
    for (i, &ci) in c.iter().enumerate() {
        let u = form.left_basis.column(i);
        let w = form.right_basis.column(i);
        let proj = kron(&(u * u.adjoint()), &(w * w.adjoint()));
        closest += proj.scale(ci * ci);
    }
    let closest = DensityMatrix::new(closest, psi.dims().clone())?;
    Ok(QuantifierResult {
        value,
        closest_state: Some(closest),
        method: Method::ClosedForm,
    })
}

/// `Σ_{i<j} c_i c_j`, the negativity of a pure state with Schmidt
/// coefficients `c`.
fn pairwise_product_sum(c: &[f64]) -> f64 {
    let mut value = 0.0;
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            value += c[i] * c[j];
        }
    }
    value
}

/// Split index `m` and remainder `r` of the closest-product construction for
/// a sorted probability vector: `m` is the largest index with
/// `Σ_{i<m} √p_i ≤ 1` and `r = 1 − Σ_{i<m} √p_i`.
fn prod_split(p: &[f64]) -> (usize, f64) {
    let mut acc = 0.0;
    let mut m = 0;
    for &pi in p {
        let next = acc + pi.sqrt();
        if next > 1.0 {
            break;
        }
        acc = next;
        m += 1;
    }
    (m, (1.0 - acc).max(0.0))
}

/// Distance from the correlated state `Σ p_i |ii⟩⟨ii|` to the product set,
/// in closed form: `1 − Σ_{i<m} p_i − r²` with `(m, r)` from the capped
/// square-root split. The closest state is the product `χ ⊗ χ` with local
/// weights `(√p_1, ..., √p_m, r, 0, ...)`, returned in the sorted basis.
pub fn q_prod_classical(p: &ClassicalState) -> Result<QuantifierResult> {
    let probs = p.probs();
    let d = probs.len();
    let (m, r) = prod_split(probs);
    let head: f64 = probs[..m].iter().sum();
    let value = clamp_value(1.0 - head - r * r);
    let mut local = CMat::zeros(d, d);
    for (i, &pi) in probs.iter().enumerate().take(m) {
        local[(i, i)] = C64::new(pi.sqrt(), 0.0);
    }
    if m < d {
        local[(m, m)] = C64::new(r, 0.0);
    }
    let closest = DensityMatrix::new(kron(&local, &local), SubsystemDims::bipartite(d, d))?;
    Ok(QuantifierResult {
        value,
        closest_state: Some(closest),
        method: Method::ClosedForm,
    })
}

/// Product state from the square-root split of the Schmidt probabilities,
/// with local factors `Σ_{i<m} √p_i |u_i⟩⟨u_i| + r |u_m⟩⟨u_m|` built in the
/// Schmidt bases of `psi`.
fn chi_product(form: &SchmidtForm, psi: &PureState) -> Result<DensityMatrix> {
    let (da, db) = psi.bipartite_dims()?;
    let probs = form.probabilities();
    let (m, r) = prod_split(&probs);
    let mut weights = vec![0.0; probs.len()];
    for (i, w) in weights.iter_mut().enumerate().take(m) {
        *w = probs[i].sqrt();
    }
    if m < weights.len() {
        weights[m] = r;
    }
    let mut chi_a = CMat::zeros(da, da);
    let mut chi_b = CMat::zeros(db, db);
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let u = form.left_basis.column(i);
        let v = form.right_basis.column(i);
        chi_a += (u * u.adjoint()).scale(w);
        chi_b += (v * v.adjoint()).scale(w);
    }
    DensityMatrix::new(kron(&chi_a, &chi_b), psi.dims().clone())
}

/// Distance from a pure state to the square-root-split product state in
/// its Schmidt bases, in closed form: `N(ψ) + ½ C` where `N` is the
/// negativity and `C` is the distance from the Schmidt-probability
/// classical state to the product set ([`q_prod_classical`]). This is the
/// best known candidate for the distance to the product set; for maximally
/// entangled inputs it attains that distance exactly, and sampling over
/// product states never beats it.
pub fn q_prod_pure(psi: &PureState) -> Result<QuantifierResult> {
    let form = schmidt(psi)?;
    let probs = form.probabilities();
    let neg = pairwise_product_sum(&form.coefficients);
    let classical = q_prod_classical(&ClassicalState::new(&probs)?)?.value;
    let chi = chi_product(&form, psi)?;
    Ok(QuantifierResult {
        value: clamp_value(neg + 0.5 * classical),
        closest_state: Some(chi),
        method: Method::ClosedForm,
    })
}

fn prod_objective(p: &[f64], u: &[f64]) -> f64 {
    p.iter().zip(u).map(|(&pi, &ui)| (pi - ui * ui).max(0.0)).sum()
}

/// Independent numerical check of [`q_prod_classical`]: minimizes
/// `Σ_i max(0, p_i − u_i²)` over probability vectors `u` by enumerating the
/// vertices of the capped polytope `{0 ≤ u_i ≤ √p_i, Σ u_i = 1}` and by a
/// simplex grid search refined with pairwise-transfer descent down to step
/// `grid`. Supports up to 8 outcomes.
pub fn q_prod_oracle(p: &ClassicalState, grid: f64) -> Result<f64> {
    let probs = p.probs();
    let d = probs.len();
    if d > 8 {
        return Err(Error::InvalidArgument(format!(
            "oracle enumeration supports at most 8 outcomes, got {d}"
        )));
    }
    if !(grid.is_finite() && grid > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {grid}")));
    }
    let caps: Vec<f64> = probs.iter().map(|&pi| pi.sqrt()).collect();
    let mut best = f64::INFINITY;

    // vertices of the capped polytope: all coordinates at their caps except
    // at most one carrying the slack
    let mut best_vertex = vec![0.0; d];
    for mask in 0u32..(1 << d) {
        let s: f64 = (0..d).filter(|&i| mask & (1 << i) != 0).map(|i| caps[i]).sum();
        if s > 1.0 + 1e-12 {
            continue;
        }
        let rem = (1.0 - s).max(0.0);
        for j in 0..d {
            if mask & (1 << j) != 0 && rem > 1e-15 {
                continue;
            }
            let mut u: Vec<f64> =
                (0..d).map(|i| if mask & (1 << i) != 0 { caps[i] } else { 0.0 }).collect();
            u[j] += rem;
            let v = prod_objective(probs, &u);
            if v < best {
                best = v;
                best_vertex = u;
            }
        }
    }

    // coarse simplex grid, then local refinement
    let steps: usize = match d {
        1 => 1,
        2 => ((1.0 / grid).ceil() as usize).clamp(2, 20_000),
        3 => 60,
        4 => 28,
        5 => 16,
        _ => 12,
    };
    let h = 1.0 / steps as f64;
    let mut grid_best = vec![0.0; d];
    let mut grid_val = f64::INFINITY;
    let mut u = vec![0.0; d];
    enumerate_simplex(probs, &mut u, 0, steps, h, &mut grid_val, &mut grid_best);
    if grid_val < best {
        best = grid_val;
    }

    for start in [grid_best, best_vertex] {
        let refined = refine_pairwise(probs, start, h, grid);
        if refined < best {
            best = refined;
        }
    }
    Ok(clamp_value(best))
}

fn enumerate_simplex(
    p: &[f64],
    u: &mut Vec<f64>,
    pos: usize,
    left: usize,
    h: f64,
    best: &mut f64,
    best_u: &mut Vec<f64>,
) {
    if pos == u.len() - 1 {
        u[pos] = left as f64 * h;
        let v = prod_objective(p, u);
        if v < *best {
            *best = v;
            best_u.clone_from(u);
        }
        return;
    }
    for k in 0..=left {
        u[pos] = k as f64 * h;
        enumerate_simplex(p, u, pos + 1, left - k, h, best, best_u);
    }
}

fn refine_pairwise(p: &[f64], mut u: Vec<f64>, delta0: f64, grid: f64) -> f64 {
    let d = u.len();
    let mut best = prod_objective(p, &u);
    let mut delta = delta0;
    let mut guard = 0;
    while delta > 0.49 * grid && guard < 200_000 {
        let mut improved = false;
        for i in 0..d {
            for j in 0..d {
                if i == j || u[j] < delta {
                    continue;
                }
                guard += 1;
                u[i] += delta;
                u[j] -= delta;
                let v = prod_objective(p, &u);
                if v < best - 1e-15 {
                    best = v;
                    improved = true;
                } else {
                    u[i] -= delta;
                    u[j] += delta;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    best
}

/// Exact decomposition of the distance from a pure state to its closest
/// product state: `d_T(ψ, χ) = N(ψ) + ½ C_T(p)` where `p` are the Schmidt
/// probabilities and `χ` is the product state built from their square-root
/// split. `equality_gap` is the numerically computed left side minus the
/// right side and is zero up to eigensolver error for every pure state.
#[derive(Debug, Clone)]
pub struct SubadditivityRecord {
    pub negativity: f64,
    pub classical: f64,
    pub chi_distance: f64,
    pub rhs: f64,
    pub equality_gap: f64,
}

pub fn pure_subadditivity(psi: &PureState) -> Result<SubadditivityRecord> {
    let form = schmidt(psi)?;
    let neg = pairwise_product_sum(&form.coefficients);
    let probs = form.probabilities();
    let classical = q_prod_classical(&ClassicalState::new(&probs)?)?.value;
    let chi = chi_product(&form, psi)?;
    let chi_distance = pt_distance(&psi.to_density(), &chi, Side::B)?;
    let rhs = neg + 0.5 * classical;
    Ok(SubadditivityRecord {
        negativity: neg,
        classical,
        chi_distance,
        rhs,
        equality_gap: chi_distance - rhs,
    })
}

/// Sampling upper bound on the distance from `ρ` to a restricted state set.
/// Draws `samples` candidates from the set (Haar local bases with flat
/// Dirichlet weights for classical-classical; independent induced-measure
/// factors for product) and returns the smallest distance found, with the
/// achieving candidate.
pub fn q_upper_bound_sampling(
    rho: &DensityMatrix,
    set: CorrSet,
    samples: usize,
    seed: u64,
) -> Result<QuantifierResult> {
    let (da, db) = rho.bipartite_dims()?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let root = SeededStream::new(seed);
    let candidates: Vec<(f64, DensityMatrix)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut s = root.substream(k as u64);
            let sigma = match set {
                CorrSet::ClassicalClassical => {
                    let ua = haar_unitary(da, &mut s);
                    let ub = haar_unitary(db, &mut s);
                    let q = dirichlet_flat(da * db, &mut s);
                    let local = kron(&ua, &ub);
                    let diag = CMat::from_fn(da * db, da * db, |i, j| {
                        if i == j { C64::new(q[i], 0.0) } else { C64::new(0.0, 0.0) }
                    });
                    DensityMatrix::new(&local * diag * local.adjoint(), rho.dims().clone())?
                }
                CorrSet::Product => random_product(da, db, &mut s)?,
            };
            let dist = pt_distance(rho, &sigma, Side::B)?;
            Ok((dist, sigma))
        })
        .collect::<Result<_>>()?;
    let (value, closest) = candidates
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one sample");
    Ok(QuantifierResult {
        value,
        closest_state: Some(closest),
        method: Method::SamplingUpperBound,
    })
}
