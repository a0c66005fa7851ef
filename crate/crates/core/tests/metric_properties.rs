//! Metric axioms and monotonicity of the partial-transpose distance on
//! randomly sampled states, plus the trace-norm facts the closed forms rely
//! on.

use approx::assert_abs_diff_eq;
use ptdist::linops::{herm_deviation, kron, partial_trace, partial_transpose, trace_norm};
use ptdist::measures::{CorrSet, q_prod_pure, q_upper_bound_sampling};
use ptdist::randstates::{
    CptpChannel, SeededStream, dirichlet_flat, ginibre, haar_pure, haar_unitary, induced_mixed,
    random_cptp, random_product,
};
use ptdist::{C64, CMat, DensityMatrix, Side, SubsystemDims, negativity, pt_distance, q_cc_pure};

fn induced(da: usize, db: usize, s: &mut SeededStream) -> DensityMatrix {
    induced_mixed(da, db, None, s).unwrap()
}

fn rotate(rho: &DensityMatrix, u: &CMat) -> DensityMatrix {
    DensityMatrix::new(u * rho.matrix() * u.adjoint(), rho.dims().clone()).unwrap()
}

#[test]
fn trace_norm_dominates_the_trace() {
    let mut s = SeededStream::new(101);
    for k in 0..1000 {
        let d = 2 + k % 5;
        let g = ginibre(d, d, &mut s);
        let h = &g + g.adjoint();
        assert!(trace_norm(&h).unwrap() >= h.trace().re.abs() - 1e-10);
    }
}

#[test]
fn two_level_trace_norm_oracle() {
    // ‖a₀1 + a·σ‖₁ = 2·max{|a₀|, |a|} from the eigenvalues a₀ ± |a|
    let mut s = SeededStream::new(102);
    for _ in 0..1000 {
        let (a0, ax, ay, az) = (s.normal(), s.normal(), s.normal(), s.normal());
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = C64::new(a0 + az, 0.0);
        m[(1, 1)] = C64::new(a0 - az, 0.0);
        m[(0, 1)] = C64::new(ax, -ay);
        m[(1, 0)] = C64::new(ax, ay);
        let r = (ax * ax + ay * ay + az * az).sqrt();
        assert_abs_diff_eq!(trace_norm(&m).unwrap(), 2.0 * a0.abs().max(r), epsilon = 1e-10);
    }
}

#[test]
fn partial_transpose_preserves_trace_and_hermiticity() {
    let mut s = SeededStream::new(103);
    let dims_cycle = [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4)];
    for k in 0..1000 {
        let (da, db) = dims_cycle[k % dims_cycle.len()];
        let rho = induced(da, db, &mut s);
        let pt = rho.partial_transpose(Side::B).unwrap();
        assert!((pt.trace() - rho.matrix().trace()).norm() <= 1e-12);
        assert!(herm_deviation(&pt) <= 1e-12);
    }
}

#[test]
fn schmidt_reconstruction_roundtrip() {
    let mut s = SeededStream::new(104);
    let dims_cycle = [(2, 2), (2, 3), (3, 2), (2, 4), (4, 2), (3, 3)];
    for k in 0..1000 {
        let (da, db) = dims_cycle[k % dims_cycle.len()];
        let psi = haar_pure(&SubsystemDims::bipartite(da, db), &mut s);
        let form = ptdist::linops::schmidt(&psi).unwrap();
        let back = form.reconstruct();
        let diff: f64 =
            (0..da * db).map(|i| (psi.amplitudes()[i] - back[i]).norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-10, "reconstruction off by {diff} at dims ({da},{db})");
    }
}

#[test]
fn pt_distance_is_symmetric() {
    let mut s = SeededStream::new(105);
    for _ in 0..1000 {
        let rho = induced(2, 2, &mut s);
        let sigma = induced(2, 2, &mut s);
        let ab = pt_distance(&rho, &sigma, Side::B).unwrap();
        let ba = pt_distance(&sigma, &rho, Side::B).unwrap();
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
    }
}

#[test]
fn pt_distance_triangle_inequality() {
    let mut s = SeededStream::new(106);
    let dims_cycle = [(2, 2), (2, 2), (3, 3), (2, 4)];
    for k in 0..1000 {
        let (da, db) = dims_cycle[k % dims_cycle.len()];
        let a = induced(da, db, &mut s);
        let b = induced(da, db, &mut s);
        let c = induced(da, db, &mut s);
        let ac = pt_distance(&a, &c, Side::B).unwrap();
        let through_b =
            pt_distance(&a, &b, Side::B).unwrap() + pt_distance(&b, &c, Side::B).unwrap();
        assert!(ac <= through_b + 1e-10, "triangle violated: {ac} > {through_b}");
    }
}

#[test]
fn pt_distance_identifies_equal_states() {
    let mut s = SeededStream::new(107);
    for _ in 0..200 {
        let rho = induced(2, 2, &mut s);
        let sigma = induced(2, 2, &mut s);
        assert_eq!(pt_distance(&rho, &rho, Side::B).unwrap(), 0.0);
        let d = pt_distance(&rho, &sigma, Side::B).unwrap();
        let max_entry = (rho.matrix() - sigma.matrix())
            .iter()
            .map(|e| e.norm())
            .fold(0.0, f64::max);
        assert_eq!(d <= 1e-12, max_entry <= 1e-9);
    }
}

#[test]
fn pt_distance_is_locally_unitary_invariant() {
    let mut s = SeededStream::new(108);
    for _ in 0..1000 {
        let rho = induced(2, 3, &mut s);
        let sigma = induced(2, 3, &mut s);
        let u = kron(&haar_unitary(2, &mut s), &haar_unitary(3, &mut s));
        let before = pt_distance(&rho, &sigma, Side::B).unwrap();
        let after = pt_distance(&rotate(&rho, &u), &rotate(&sigma, &u), Side::B).unwrap();
        assert_abs_diff_eq!(before, after, epsilon = 1e-10);
    }
}

#[test]
fn pt_distance_is_side_independent() {
    let mut s = SeededStream::new(109);
    let dims_cycle = [(2, 2), (2, 3), (3, 2), (4, 2)];
    for k in 0..1000 {
        let (da, db) = dims_cycle[k % dims_cycle.len()];
        let rho = induced(da, db, &mut s);
        let sigma = induced(da, db, &mut s);
        let a = pt_distance(&rho, &sigma, Side::A).unwrap();
        let b = pt_distance(&rho, &sigma, Side::B).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }
}

fn apply_on_first(ch: &CptpChannel, rho: &DensityMatrix, db: usize) -> DensityMatrix {
    let id = CMat::identity(db, db);
    let d_out = ch.d_out() * db;
    let mut out = CMat::zeros(d_out, d_out);
    for k in ch.kraus_ops() {
        let l = kron(&k, &id);
        out += &l * rho.matrix() * l.adjoint();
    }
    DensityMatrix::new(out, SubsystemDims::bipartite(ch.d_out(), db)).unwrap()
}

#[test]
fn pt_distance_contracts_under_channels_on_the_untransposed_side() {
    let mut s = SeededStream::new(110);
    for _ in 0..1000 {
        let rho = induced(2, 2, &mut s);
        let sigma = induced(2, 2, &mut s);
        let ch = random_cptp(2, 2, 2, &mut s).unwrap();
        let before = pt_distance(&rho, &sigma, Side::B).unwrap();
        let after =
            pt_distance(&apply_on_first(&ch, &rho, 2), &apply_on_first(&ch, &sigma, 2), Side::B)
                .unwrap();
        assert!(after <= before + 1e-10, "expansion: {after} > {before}");
    }
}

#[test]
fn negativity_lower_bounds_the_distance_to_ppt_states() {
    let mut s = SeededStream::new(111);
    for _ in 0..1000 {
        let rho = induced(2, 2, &mut s);
        // separable mixtures are PPT
        let w = dirichlet_flat(3, &mut s);
        let mut sep = CMat::zeros(4, 4);
        for &wk in &w {
            sep += random_product(2, 2, &mut s).unwrap().matrix().scale(wk);
        }
        let sigma = DensityMatrix::new(sep, SubsystemDims::bipartite(2, 2)).unwrap();
        let d = pt_distance(&rho, &sigma, Side::B).unwrap();
        assert!(d >= negativity(&rho, &[1]).unwrap() - 1e-10);
    }
}

#[test]
fn pure_closed_forms_are_ordered_and_dominated_by_sampling() {
    let mut s = SeededStream::new(112);
    for k in 0..20 {
        let dims = if k % 2 == 0 {
            SubsystemDims::bipartite(2, 2)
        } else {
            SubsystemDims::bipartite(3, 3)
        };
        let psi = haar_pure(&dims, &mut s);
        let rho = psi.to_density();
        let cc = q_cc_pure(&psi).unwrap().value;
        let prod = q_prod_pure(&psi).unwrap().value;
        assert_abs_diff_eq!(cc, negativity(&rho, &[1]).unwrap(), epsilon = 1e-12);
        assert!(cc <= prod + 1e-12);
        let bound = q_upper_bound_sampling(&rho, CorrSet::Product, 60, 1000 + k as u64)
            .unwrap()
            .value;
        assert!(bound >= prod - 1e-9, "sampling bound {bound} undercuts closed form {prod}");
    }
}

#[test]
fn reduced_states_of_purifications_match_partial_trace() {
    let mut s = SeededStream::new(113);
    for _ in 0..50 {
        let psi = haar_pure(&SubsystemDims::bipartite(3, 4), &mut s);
        let rho = psi.to_density();
        let a = partial_trace(&rho, &[0]).unwrap();
        let b = partial_trace(&rho, &[1]).unwrap();
        // identical nonzero spectra
        let ea = ptdist::linops::hermitian_eig(a.matrix()).unwrap().0;
        let eb = ptdist::linops::hermitian_eig(b.matrix()).unwrap().0;
        for i in 0..3 {
            assert_abs_diff_eq!(ea[2 - i], eb[3 - i], epsilon = 1e-10);
        }
    }
}

#[test]
fn partial_transpose_composes_to_full_transpose() {
    let mut s = SeededStream::new(114);
    for _ in 0..200 {
        let rho = induced(2, 3, &mut s);
        let a = partial_transpose(rho.matrix(), rho.dims(), Side::A).unwrap();
        let both = partial_transpose(&a, rho.dims(), Side::B).unwrap();
        assert!((both - rho.matrix().transpose()).norm() <= 1e-12);
    }
}
