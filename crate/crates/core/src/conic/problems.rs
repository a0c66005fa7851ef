//! The cone programs used by the toolkit: distance to the PPT set, the
//! positive-part witness feasibility check, and optimal PPT-constrained
//! two-state discrimination.

use super::instance::{SdpInstance, pt_svec_perm, svec, svec_len};
use super::solver::{SdpSolution, SdpStatus, solve};
use crate::error::{Error, Result};
use crate::linops::{CMat, DensityMatrix, Side, eig_sorted, jordan_parts, partial_transpose};

fn solver_failure(sol: &SdpSolution) -> Error {
    Error::SolverFailure {
        status: sol.status,
        value: sol.value,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
    }
}

/// Program for `Q_PPT(ρ) = min { d_T(ρ, σ) : σ a PPT state }`.
///
/// Variables: `Y = σ^{T_B}` (PSD), its partial transpose `σ` as the linked
/// block `Ypt` (PSD), and the Jordan split `P − Q = ρ^{T_B} − Y` whose trace
/// sum is twice the distance. Blocks in order: `P`, `Q`, `Y`, `Ypt`; the
/// minimizing PPT state is the final `Ypt` block.
pub fn build_qppt(rho: &DensityMatrix) -> Result<SdpInstance> {
    let (da, db) = rho.bipartite_dims()?;
    let n = da * db;
    let sv = svec_len(n);
    let rho_pt = svec(&rho.partial_transpose(Side::B)?);
    let (perm, sign) = pt_svec_perm(da, db);

    let mut inst = SdpInstance::new();
    let p = inst.add_block("P", n);
    let q = inst.add_block("Q", n);
    let y = inst.add_block("Y", n);
    let w = inst.add_block("Ypt", n);

    for (k, &target) in rho_pt.iter().enumerate().take(sv) {
        inst.add_constraint(
            vec![
                (inst.block_coord(p, k), 1.0),
                (inst.block_coord(q, k), -1.0),
                (inst.block_coord(y, k), 1.0),
            ],
            target,
        )?;
    }
    for k in 0..sv {
        inst.add_constraint(
            vec![
                (inst.block_coord(w, k), 1.0),
                (inst.block_coord(y, perm[k]), -sign[k]),
            ],
            0.0,
        )?;
    }
    let trace_row: Vec<(usize, f64)> = (0..n).map(|i| (inst.diag_coord(y, i), 1.0)).collect();
    inst.add_constraint(trace_row, 1.0)?;

    let objective: Vec<(usize, f64)> = (0..n)
        .flat_map(|i| [(inst.diag_coord(p, i), 0.5), (inst.diag_coord(q, i), 0.5)])
        .collect();
    inst.set_objective(objective)?;
    Ok(inst)
}

/// Result of [`solve_qppt`].
#[derive(Debug, Clone)]
pub struct QpptOutcome {
    /// The distance `Q_PPT(ρ)`.
    pub value: f64,
    /// The minimizing PPT state (unvalidated matrix; feasible up to solver
    /// tolerance).
    pub closest_ppt: CMat,
    pub solution: SdpSolution,
}

/// Build and solve the PPT-distance program. Non-optimal solver statuses
/// are returned as errors.
pub fn solve_qppt(rho: &DensityMatrix, tol: f64, max_iter: usize) -> Result<QpptOutcome> {
    let inst = build_qppt(rho)?;
    let sol = solve(&inst, tol, max_iter);
    if sol.status != SdpStatus::Optimal {
        return Err(solver_failure(&sol));
    }
    let closest_ppt = sol.blocks[3].clone();
    Ok(QpptOutcome {
        value: sol.value.max(0.0),
        closest_ppt,
        solution: sol,
    })
}

/// Outcome of the positive-part witness search of [`check_conjecture_alt`].
#[derive(Debug, Clone)]
pub struct AltConjectureCheck {
    /// True when a witness satisfying all four conditions (within `10·tol`)
    /// was found.
    pub feasible: bool,
    /// The witness `X`: a unit-trace PSD operator dominated by
    /// `[ρ^{T_B}]_+` whose partial transpose is also PSD. `X^{T_B}` is then
    /// a PPT state at distance exactly `N(ρ)` from `ρ`.
    pub witness: Option<CMat>,
    pub status: SdpStatus,
    /// Largest violation among the witness conditions.
    pub max_violation: f64,
    pub iterations: usize,
}

/// Feasibility search for `X ⪰ 0` with `X^{T_B} ⪰ 0`, `Tr X = 1`, and
/// `X ≤ [ρ^{T_B}]_+`. Existence of such an `X` is equivalent to the
/// negativity-attainment property of `ρ`: `min_σ∈PPT d_T(ρ,σ) = N(ρ)`.
///
/// Verification of the returned witness is what decides `feasible`, not the
/// solver status. A solver that failed to converge *and* produced no valid
/// witness is an error; a certified infeasibility is a `false` result.
pub fn check_conjecture_alt(rho: &DensityMatrix, tol: f64) -> Result<AltConjectureCheck> {
    let (da, db) = rho.bipartite_dims()?;
    let n = da * db;
    let sv = svec_len(n);
    let rho_pt = rho.partial_transpose(Side::B)?;
    let (pos, _) = jordan_parts(&rho_pt)?;
    let pos_svec = svec(&pos);
    let (perm, sign) = pt_svec_perm(da, db);

    let mut inst = SdpInstance::new();
    let x = inst.add_block("X", n);
    let w = inst.add_block("Xpt", n);
    let s = inst.add_block("S", n);

    // X + S = [ρ^{T_B}]_+  (slack S ⪰ 0 enforces the dominance)
    for (k, &target) in pos_svec.iter().enumerate().take(sv) {
        inst.add_constraint(
            vec![(inst.block_coord(x, k), 1.0), (inst.block_coord(s, k), 1.0)],
            target,
        )?;
    }
    for k in 0..sv {
        inst.add_constraint(
            vec![
                (inst.block_coord(w, k), 1.0),
                (inst.block_coord(x, perm[k]), -sign[k]),
            ],
            0.0,
        )?;
    }
    let trace_row: Vec<(usize, f64)> = (0..n).map(|i| (inst.diag_coord(x, i), 1.0)).collect();
    inst.add_constraint(trace_row, 1.0)?;

    let sol = solve(&inst, tol, super::solver::DEFAULT_MAX_ITER);
    let witness = sol.blocks[0].clone();

    // verify the witness directly, independent of the solver's bookkeeping
    let dims = rho.dims();
    let wit_pt = partial_transpose(&witness, dims, Side::B)?;
    let (pt_vals, _) = eig_sorted(&wit_pt);
    let (dom_vals, _) = eig_sorted(&(&pos - &witness));
    let tr_dev = (witness.trace().re - 1.0).abs();
    let max_violation = (-pt_vals[0]).max(-dom_vals[0]).max(tr_dev).max(0.0);
    let feasible = max_violation <= 10.0 * tol;

    if feasible {
        Ok(AltConjectureCheck {
            feasible: true,
            witness: Some(witness),
            status: sol.status,
            max_violation,
            iterations: sol.iterations,
        })
    } else if sol.status == SdpStatus::Infeasible {
        Ok(AltConjectureCheck {
            feasible: false,
            witness: None,
            status: sol.status,
            max_violation,
            iterations: sol.iterations,
        })
    } else {
        Err(solver_failure(&sol))
    }
}

/// Best success probability for discriminating `ρ` and `σ` (equal priors)
/// with a POVM `{M, 1−M}` whose elements are PPT:
/// `p = ½ + max Tr[(ρ−σ)/2 · M]`. Bounds from above by `½(1 + d_T(ρ,σ))`.
pub fn ppt_povm_discrimination(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: f64,
) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "states live on different spaces: {:?} vs {:?}",
            rho.dims().dims(),
            sigma.dims().dims()
        )));
    }
    let (da, db) = rho.bipartite_dims()?;
    let n = da * db;
    let sv = svec_len(n);
    let (perm, sign) = pt_svec_perm(da, db);
    let delta = (rho.matrix() - sigma.matrix()).scale(0.5);
    let delta_svec = svec(&delta);
    let id_svec = svec(&CMat::identity(n, n));

    let mut inst = SdpInstance::new();
    let m = inst.add_block("M", n);
    let nb = inst.add_block("N", n);
    let wm = inst.add_block("Mpt", n);
    let wn = inst.add_block("Npt", n);

    for (k, &target) in id_svec.iter().enumerate().take(sv) {
        inst.add_constraint(
            vec![(inst.block_coord(m, k), 1.0), (inst.block_coord(nb, k), 1.0)],
            target,
        )?;
    }
    for (block, linked) in [(m, wm), (nb, wn)] {
        for k in 0..sv {
            inst.add_constraint(
                vec![
                    (inst.block_coord(linked, k), 1.0),
                    (inst.block_coord(block, perm[k]), -sign[k]),
                ],
                0.0,
            )?;
        }
    }
    let objective: Vec<(usize, f64)> = (0..sv)
        .filter(|&k| delta_svec[k] != 0.0)
        .map(|k| (inst.block_coord(m, k), -delta_svec[k]))
        .collect();
    inst.set_objective(objective)?;

    let sol = solve(&inst, tol, super::solver::DEFAULT_MAX_ITER);
    if sol.status != SdpStatus::Optimal {
        return Err(solver_failure(&sol));
    }
    Ok((0.5 - sol.value).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{C64, CVec, PureState, SubsystemDims, trace_norm};
    use crate::measures::{negativity, pt_distance};
    use crate::randstates::{SeededStream, induced_mixed, random_product};
    use approx::assert_abs_diff_eq;

    fn bell() -> DensityMatrix {
        let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amp = CVec::zeros(4);
        amp[0] = w;
        amp[3] = w;
        PureState::new(amp, SubsystemDims::bipartite(2, 2)).unwrap().to_density()
    }

    #[test]
    fn qppt_of_bell_equals_negativity() {
        let rho = bell();
        let out = solve_qppt(&rho, 1e-6, 50_000).unwrap();
        assert_abs_diff_eq!(out.value, 0.5, epsilon = 1e-5);
        assert!(out.solution.dual_value <= out.value + 1e-5);
        // the closest PPT state is a valid state up to solver tolerance
        assert_abs_diff_eq!(out.closest_ppt.trace().re, 1.0, epsilon = 1e-4);
        let dims = SubsystemDims::bipartite(2, 2);
        let pt = partial_transpose(&out.closest_ppt, &dims, Side::B).unwrap();
        let (vals, _) = eig_sorted(&pt);
        assert!(vals[0] >= -1e-4);
    }

    #[test]
    fn qppt_of_separable_state_is_zero() {
        let mut s = SeededStream::new(40);
        let rho = random_product(2, 2, &mut s).unwrap();
        let out = solve_qppt(&rho, 1e-6, 50_000).unwrap();
        assert!(out.value <= 1e-5, "distance {} for a PPT state", out.value);
    }

    #[test]
    fn qppt_matches_negativity_on_random_states() {
        let mut s = SeededStream::new(41);
        for _ in 0..3 {
            let rho = induced_mixed(2, 2, None, &mut s).unwrap();
            let n = negativity(&rho, &[1]).unwrap();
            let out = solve_qppt(&rho, 1e-6, 50_000).unwrap();
            assert!(
                (out.value - n).abs() <= 1e-5,
                "Q_PPT {} vs negativity {n}",
                out.value
            );
        }
    }

    #[test]
    fn alt_check_certifies_bell() {
        let rho = bell();
        let check = check_conjecture_alt(&rho, 1e-6).unwrap();
        assert!(check.feasible);
        let x = check.witness.unwrap();
        // d_T(ρ, X^{T_B}) = ½‖ρ^{T_B} − X‖₁ should equal N(ρ) = ½
        let gap = 0.5 * trace_norm(&(rho.partial_transpose(Side::B).unwrap() - x)).unwrap();
        assert_abs_diff_eq!(gap, 0.5, epsilon = 1e-5);
    }

    #[test]
    fn povm_discrimination_limits() {
        let rho = bell();
        // identical states cannot be told apart
        let p_same = ppt_povm_discrimination(&rho, &rho, 1e-6).unwrap();
        assert_abs_diff_eq!(p_same, 0.5, epsilon = 1e-5);
        // orthogonal product states are perfectly distinguishable with PPT
        // measurements
        let dims = SubsystemDims::bipartite(2, 2);
        let s00 = PureState::basis(dims.clone(), &[0, 0]).unwrap().to_density();
        let s11 = PureState::basis(dims.clone(), &[1, 1]).unwrap().to_density();
        let p_orth = ppt_povm_discrimination(&s00, &s11, 1e-6).unwrap();
        assert_abs_diff_eq!(p_orth, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn povm_discrimination_respects_distance_bound() {
        let mut s = SeededStream::new(44);
        let a = induced_mixed(2, 2, None, &mut s).unwrap();
        let b = induced_mixed(2, 2, None, &mut s).unwrap();
        let p = ppt_povm_discrimination(&a, &b, 1e-6).unwrap();
        let bound = 0.5 * (1.0 + pt_distance(&a, &b, Side::B).unwrap());
        assert!(p <= bound + 1e-5, "p = {p}, bound = {bound}");
    }
}
