//! First-order solver for the cone programs in this module: consensus ADMM
//! with over-relaxation, periodic residual balancing, and a stall-based
//! infeasibility heuristic.
//!
//! The KKT system solved each iteration reduces to one Cholesky backsolve
//! with `AA^T`, factored once up front; the penalty parameter never enters
//! the factorization, so balancing is free.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::instance::{SdpInstance, svec_len, unsvec};
use crate::linops::{C64, CMat, eig_sorted};

pub const DEFAULT_SDP_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 50_000;

const ALPHA: f64 = 1.6;
const CHECK_EVERY: usize = 25;
const BALANCE_EVERY: usize = 100;
const INFEAS_WINDOW: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    /// All scaled residuals and the duality gap reached the tolerance.
    Optimal,
    /// Residuals stalled far above tolerance while the scaled dual variable
    /// diverged; the problem is judged to have no feasible point.
    Infeasible,
    /// Iteration budget exhausted without meeting the tolerance.
    MaxIter,
    /// Non-finite quantities appeared (or the normal equations could not be
    /// factored).
    NumericalTrouble,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::MaxIter => "max_iter",
            SdpStatus::NumericalTrouble => "numerical_trouble",
        };
        f.write_str(s)
    }
}

/// Solver output: final (projected, hence exactly PSD) blocks, objective
/// values for both sides, and the scaled residuals at exit.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Primal objective `c·x` at the final iterate.
    pub value: f64,
    /// Dual objective `b·y`; weak duality gives `dual_value ≤ value` up to
    /// solver tolerance.
    pub dual_value: f64,
    pub blocks: Vec<CMat>,
    pub free: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

struct Compiled {
    n: usize,
    m: usize,
    rows: Vec<Vec<(usize, f64)>>,
    b: DVector<f64>,
    c: DVector<f64>,
    normb: f64,
    normc: f64,
    blocks: Vec<(usize, usize)>,
}

fn compile(inst: &SdpInstance) -> Compiled {
    let n = inst.n_vars();
    let mut rows = Vec::with_capacity(inst.n_constraints());
    let mut b = DVector::zeros(inst.n_constraints());
    for (r, (terms, rhs)) in inst.constraint_rows().enumerate() {
        rows.push(terms.to_vec());
        b[r] = rhs;
    }
    let mut c = DVector::zeros(n);
    for &(i, coef) in inst.objective_terms() {
        c[i] += coef;
    }
    let normb = b.norm();
    let normc = c.norm();
    Compiled {
        n,
        m: rows.len(),
        rows,
        b,
        c,
        normb,
        normc,
        blocks: inst.blocks_layout(),
    }
}

fn apply_a(rows: &[Vec<(usize, f64)>], v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        rows.len(),
        rows.iter().map(|row| row.iter().map(|&(i, a)| a * v[i]).sum::<f64>()),
    )
}

fn apply_at(rows: &[Vec<(usize, f64)>], y: &DVector<f64>, n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        let yr = y[r];
        for &(i, a) in row {
            out[i] += a * yr;
        }
    }
    out
}

/// Project the PSD-block coordinates of `v` onto the cone (eigenvalue clamp
/// per block); free coordinates pass through.
fn project_cone(v: &mut DVector<f64>, blocks: &[(usize, usize)]) {
    for &(off, dim) in blocks {
        let h = unsvec(&v.as_slice()[off..off + svec_len(dim)], dim);
        let (vals, vecs) = eig_sorted(&h);
        let mut scaled = vecs.clone();
        for j in 0..dim {
            let w = vals[j].max(0.0);
            for e in scaled.column_mut(j).iter_mut() {
                *e *= C64::new(w, 0.0);
            }
        }
        let clamped = scaled * vecs.adjoint();
        let sv = super::instance::svec(&clamped);
        v.as_mut_slice()[off..off + svec_len(dim)].copy_from_slice(&sv);
    }
}

struct Diagnostics {
    pres: f64,
    dres: f64,
    gap: f64,
    pobj: f64,
    dobj: f64,
}

fn diagnostics(
    p: &Compiled,
    z: &DVector<f64>,
    u: &DVector<f64>,
    lam: &DVector<f64>,
    atl: &DVector<f64>,
    rho: f64,
) -> Diagnostics {
    let az = apply_a(&p.rows, z);
    let pres = (az - &p.b).norm() / (1.0 + p.normb);
    let dvec = &p.c + atl + u.scale(rho);
    let dres = dvec.norm() / (1.0 + p.normc);
    let pobj = p.c.dot(z);
    let dobj = -p.b.dot(lam);
    let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
    Diagnostics { pres, dres, gap, pobj, dobj }
}

fn extract(p: &Compiled, z: &DVector<f64>) -> (Vec<CMat>, Vec<f64>) {
    let blocks = p
        .blocks
        .iter()
        .map(|&(off, dim)| unsvec(&z.as_slice()[off..off + svec_len(dim)], dim))
        .collect();
    let free_start = p.blocks.iter().map(|&(_, d)| svec_len(d)).sum::<usize>();
    let free = z.as_slice()[free_start..].to_vec();
    (blocks, free)
}

fn failed(p: &Compiled, z: &DVector<f64>, status: SdpStatus, iterations: usize) -> SdpSolution {
    let (blocks, free) = extract(p, z);
    SdpSolution {
        status,
        value: p.c.dot(z),
        dual_value: f64::NAN,
        blocks,
        free,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        gap: f64::INFINITY,
        iterations,
    }
}

/// Solve a cone program to the given scaled tolerance on primal residual,
/// dual residual, and duality gap. Deterministic: no randomness and no
/// intra-solve parallelism.
pub fn solve(inst: &SdpInstance, tol: f64, max_iter: usize) -> SdpSolution {
    let p = compile(inst);
    let zero = DVector::zeros(p.n);
    if !(tol.is_finite() && tol > 0.0) || max_iter == 0 {
        return failed(&p, &zero, SdpStatus::NumericalTrouble, 0);
    }

    // normal matrix AA^T, assembled column by column of A
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.n];
    for (r, row) in p.rows.iter().enumerate() {
        for &(i, a) in row {
            cols[i].push((r, a));
        }
    }
    let mut aat = DMatrix::zeros(p.m, p.m);
    for col in &cols {
        for &(r, ar) in col {
            for &(s, as_) in col {
                aat[(r, s)] += ar * as_;
            }
        }
    }
    let mut chol: Option<Cholesky<f64, nalgebra::Dyn>> = None;
    for jitter in [1e-12, 1e-9, 1e-6] {
        let mut try_m = aat.clone();
        for i in 0..p.m {
            try_m[(i, i)] += jitter;
        }
        if let Some(f) = Cholesky::new(try_m) {
            chol = Some(f);
            break;
        }
    }
    let Some(chol) = chol else {
        return failed(&p, &zero, SdpStatus::NumericalTrouble, 0);
    };

    let ac = apply_a(&p.rows, &p.c);

    let mut z = DVector::zeros(p.n);
    let mut u = DVector::zeros(p.n);
    let mut rho = 1.0_f64;
    let mut status = SdpStatus::MaxIter;
    let mut iterations = max_iter;
    let mut diag: Option<Diagnostics> = None;
    let mut window_best = f64::INFINITY;
    let mut window_u_norm = 0.0_f64;

    for it in 1..=max_iter {
        let v = &z - &u;
        let av = apply_a(&p.rows, &v);
        let rhs = (av - &p.b).scale(rho) - &ac;
        let lam = chol.solve(&rhs);
        let atl = apply_at(&p.rows, &lam, p.n);
        let x = &v - &(&p.c + &atl).unscale(rho);
        let xhat = x.scale(ALPHA) + z.scale(1.0 - ALPHA);
        let mut znew = &xhat + &u;
        project_cone(&mut znew, &p.blocks);
        u += &xhat - &znew;
        z = znew;

        if it % CHECK_EVERY != 0 {
            continue;
        }
        let d = diagnostics(&p, &z, &u, &lam, &atl, rho);
        if !(d.pres.is_finite() && d.dres.is_finite() && d.gap.is_finite()) {
            return failed(&p, &z, SdpStatus::NumericalTrouble, it);
        }
        if d.pres <= tol && d.dres <= tol && d.gap <= tol {
            status = SdpStatus::Optimal;
            iterations = it;
            diag = Some(d);
            break;
        }
        window_best = window_best.min(d.pres.max(d.dres));
        diag = Some(d);

        if it % BALANCE_EVERY == 0 {
            let d = diag.as_ref().expect("just set");
            if d.pres > 10.0 * d.dres {
                rho = (rho * 2.0).min(1e6);
                u.unscale_mut(2.0);
            } else if d.dres > 10.0 * d.pres {
                rho = (rho / 2.0).max(1e-6);
                u.scale_mut(2.0);
            }
        }
        if it % INFEAS_WINDOW == 0 {
            let un = u.norm();
            if window_best > 1e3 * tol && un > 2.0 * window_u_norm && un > 1.0 {
                status = SdpStatus::Infeasible;
                iterations = it;
                break;
            }
            window_u_norm = un;
            window_best = f64::INFINITY;
        }
    }

    let d = diag.unwrap_or_else(|| {
        // budgets smaller than the check interval never produced diagnostics
        let v = &z - &u;
        let av = apply_a(&p.rows, &v);
        let rhs = (av - &p.b).scale(rho) - &ac;
        let lam = chol.solve(&rhs);
        let atl = apply_at(&p.rows, &lam, p.n);
        diagnostics(&p, &z, &u, &lam, &atl, rho)
    });
    let (blocks, free) = extract(&p, &z);
    SdpSolution {
        status,
        value: d.pobj,
        dual_value: d.dobj,
        blocks,
        free,
        primal_residual: d.pres,
        dual_residual: d.dres,
        gap: d.gap,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// min Tr P over PSD 2x2 P with Tr P = 1.
    #[test]
    fn trivial_trace_program() {
        let mut inst = SdpInstance::new();
        let p = inst.add_block("P", 2);
        inst.add_constraint(vec![(inst.diag_coord(p, 0), 1.0), (inst.diag_coord(p, 1), 1.0)], 1.0)
            .unwrap();
        inst.set_objective(vec![(inst.diag_coord(p, 0), 1.0), (inst.diag_coord(p, 1), 1.0)])
            .unwrap();
        let sol = solve(&inst, 1e-6, 10_000);
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(sol.value, 1.0, epsilon = 1e-5);
        assert!(sol.dual_value <= sol.value + 1e-5);
        assert_eq!(sol.blocks.len(), 1);
        assert_abs_diff_eq!(sol.blocks[0].trace().re, 1.0, epsilon = 1e-5);
    }

    /// Tr P = 1 and P_22 = 2 force P_11 = -1, impossible for PSD P.
    #[test]
    fn infeasible_program_is_flagged() {
        let mut inst = SdpInstance::new();
        let p = inst.add_block("P", 2);
        inst.add_constraint(vec![(inst.diag_coord(p, 0), 1.0), (inst.diag_coord(p, 1), 1.0)], 1.0)
            .unwrap();
        inst.add_constraint(vec![(inst.diag_coord(p, 1), 1.0)], 2.0).unwrap();
        inst.set_objective(vec![(inst.diag_coord(p, 0), 1.0)]).unwrap();
        let sol = solve(&inst, 1e-6, 40_000);
        assert!(
            matches!(sol.status, SdpStatus::Infeasible | SdpStatus::MaxIter),
            "unexpected status {:?}",
            sol.status
        );
        assert!(sol.status != SdpStatus::Optimal);
    }

    #[test]
    fn zero_iteration_budget_is_numerical_trouble() {
        let mut inst = SdpInstance::new();
        let p = inst.add_block("P", 2);
        inst.set_objective(vec![(inst.diag_coord(p, 0), 1.0)]).unwrap();
        let sol = solve(&inst, 1e-6, 0);
        assert_eq!(sol.status, SdpStatus::NumericalTrouble);
    }
}
