//! Seeded sampling of states, unitaries, and channels.
//!
//! All sampling goes through [`SeededStream`], a counter-based generator
//! (ChaCha8) addressed by `(seed, stream)`. Independent substreams for
//! parallel work are derived from the same seed by stream index, so results
//! are reproducible regardless of thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linops::{C64, CMat, CVec, DensityMatrix, PureState, SubsystemDims, kron};
use crate::measures::ClassicalState;

/// Generator identifier recorded in scan manifests.
pub const RNG_ALGORITHM: &str = "chacha8";

/// A deterministic random stream. `new(seed)` opens the root stream;
/// [`SeededStream::substream`] derives independent streams for subtasks.
#[derive(Debug, Clone)]
pub struct SeededStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        SeededStream { rng, seed, stream: 0 }
    }

    /// Stream for subtask `task`, independent of this stream's position.
    /// Substream indices are offset by one so the root stream stays distinct.
    pub fn substream(&self, task: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let stream = task
            .checked_add(1)
            .expect("substream index overflow");
        rng.set_stream(stream);
        SeededStream { rng, seed: self.seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Standard normal draw (ziggurat).
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Standard exponential draw.
    pub fn exponential(&mut self) -> f64 {
        self.rng.sample(Exp1)
    }

    /// Standard complex normal draw, `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()).scale(std::f64::consts::FRAC_1_SQRT_2)
    }
}

/// Matrix with iid standard complex normal entries.
pub fn ginibre(rows: usize, cols: usize, s: &mut SeededStream) -> CMat {
    // nalgebra's from_fn fills column by column; fill row-major explicitly so
    // the draw order matches the documented entry order
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = s.complex_normal();
        }
    }
    m
}

/// Haar-random pure state on the given space.
pub fn haar_pure(dims: &SubsystemDims, s: &mut SeededStream) -> PureState {
    let n = dims.total();
    loop {
        let v = CVec::from_iterator(n, (0..n).map(|_| s.complex_normal()));
        let norm = v.norm();
        if norm > 1e-6 {
            return PureState::new(v.unscale(norm), dims.clone()).expect("unit vector");
        }
    }
}

/// Scale the columns of a QR factor by the phases of the corresponding
/// diagonal entries of R, which makes the distribution Haar.
fn phase_fix(mut q: CMat, r: &CMat) -> CMat {
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d.unscale(d.norm()) } else { C64::new(1.0, 0.0) };
        for e in q.column_mut(j).iter_mut() {
            *e *= phase;
        }
    }
    q
}

/// Haar-random unitary, from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary(d: usize, s: &mut SeededStream) -> CMat {
    let (q, r) = ginibre(d, d, s).qr().unpack();
    phase_fix(q, &r)
}

/// Mixed state from the induced measure: `ρ = GG†/Tr GG†` with `G` of shape
/// `(d_a d_b) × k`. The ancilla dimension `k` defaults to `d_a d_b`.
pub fn induced_mixed(
    da: usize,
    db: usize,
    ancilla: Option<usize>,
    s: &mut SeededStream,
) -> Result<DensityMatrix> {
    let dims = SubsystemDims::new(vec![da, db])?;
    let n = da * db;
    let k = ancilla.unwrap_or(n);
    if k == 0 {
        return Err(Error::InvalidArgument("ancilla dimension must be positive".into()));
    }
    let g = ginibre(n, k, s);
    let gram = &g * g.adjoint();
    let tr = gram.trace().re;
    DensityMatrix::new(gram.unscale(tr), dims)
}

fn induced_single(d: usize, s: &mut SeededStream) -> CMat {
    let g = ginibre(d, d, s);
    let gram = &g * g.adjoint();
    let tr = gram.trace().re;
    gram.unscale(tr)
}

/// Product state `ρ_A ⊗ ρ_B` with independent induced-measure factors.
pub fn random_product(da: usize, db: usize, s: &mut SeededStream) -> Result<DensityMatrix> {
    let dims = SubsystemDims::new(vec![da, db])?;
    let a = induced_single(da, s);
    let b = induced_single(db, s);
    DensityMatrix::new(kron(&a, &b), dims)
}

/// Probability vector drawn from the flat Dirichlet measure on the simplex,
/// in draw order (unsorted).
pub fn dirichlet_flat(d: usize, s: &mut SeededStream) -> Vec<f64> {
    let mut p: Vec<f64> = (0..d).map(|_| s.exponential()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

/// Random probability vector as a sorted [`ClassicalState`].
pub fn random_classical(d: usize, s: &mut SeededStream) -> Result<ClassicalState> {
    ClassicalState::new(&dirichlet_flat(d, s))
}

/// A channel in Stinespring form: an isometry `V : H_in → H_out ⊗ H_env`
/// followed by tracing out the environment.
#[derive(Debug, Clone)]
pub struct CptpChannel {
    isometry: CMat,
    d_in: usize,
    d_out: usize,
    env: usize,
}

impl CptpChannel {
    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn isometry(&self) -> &CMat {
        &self.isometry
    }

    /// Kraus operators `K_e = ⟨e|_env V`, satisfying `Σ K_e† K_e = 1`.
    pub fn kraus_ops(&self) -> Vec<CMat> {
        (0..self.env)
            .map(|e| {
                CMat::from_fn(self.d_out, self.d_in, |o, i| self.isometry[(o * self.env + e, i)])
            })
            .collect()
    }

    /// Apply to a raw matrix on the input space.
    pub fn apply_mat(&self, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.d_in || m.ncols() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}-dimensional, matrix is {}x{}",
                self.d_in,
                m.nrows(),
                m.ncols()
            )));
        }
        let lifted = &self.isometry * m * self.isometry.adjoint();
        let (out, _) = crate::linops::partial_trace_mat(&lifted, &[self.d_out, self.env], &[0]);
        Ok(out)
    }

    /// Apply to a density matrix; the output is a single-factor state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_mat(rho.matrix())?;
        DensityMatrix::with_tol(out, SubsystemDims::single(self.d_out), rho.tol())
    }
}

/// Random CPTP channel via a Haar-random Stinespring isometry with an
/// `env`-dimensional environment. Requires `d_out · env ≥ d_in`.
pub fn random_cptp(d_in: usize, d_out: usize, env: usize, s: &mut SeededStream) -> Result<CptpChannel> {
    if d_in == 0 || d_out == 0 || env == 0 {
        return Err(Error::InvalidArgument("channel dimensions must be positive".into()));
    }
    let rows = d_out * env;
    if rows < d_in {
        return Err(Error::InvalidArgument(format!(
            "no isometry from dimension {d_in} into {d_out}·{env} = {rows}"
        )));
    }
    let (q, r) = ginibre(rows, d_in, s).qr().unpack();
    let v = phase_fix(q, &r);
    Ok(CptpChannel {
        isometry: v,
        d_in,
        d_out,
        env,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = SeededStream::new(7).substream(3);
        let mut b = SeededStream::new(7).substream(3);
        let mut c = SeededStream::new(7).substream(4);
        let ga = ginibre(3, 3, &mut a);
        let gb = ginibre(3, 3, &mut b);
        let gc = ginibre(3, 3, &mut c);
        assert_eq!(ga, gb);
        assert!((ga - gc).norm() > 1e-3);
    }

    #[test]
    fn substream_is_independent_of_parent_position() {
        let mut root = SeededStream::new(42);
        let before = {
            let mut s = root.substream(5);
            ginibre(2, 2, &mut s)
        };
        let _ = ginibre(4, 4, &mut root);
        let after = {
            let mut s = root.substream(5);
            ginibre(2, 2, &mut s)
        };
        assert_eq!(before, after);
    }

    #[test]
    fn ginibre_second_moment() {
        let mut s = SeededStream::new(11);
        let n = 2000;
        let mut acc = 0.0;
        for _ in 0..n {
            let g = ginibre(2, 2, &mut s);
            acc += g.iter().map(|z| z.norm_sqr()).sum::<f64>() / 4.0;
        }
        assert_abs_diff_eq!(acc / n as f64, 1.0, epsilon = 0.05);
    }

    #[test]
    fn haar_pure_is_normalized_and_unbiased() {
        let dims = SubsystemDims::bipartite(3, 1);
        let mut s = SeededStream::new(5);
        let n = 2000;
        let mut acc = 0.0;
        for _ in 0..n {
            let psi = haar_pure(&dims, &mut s);
            assert_abs_diff_eq!(psi.amplitudes().norm(), 1.0, epsilon = 1e-12);
            acc += psi.amplitudes()[0].norm_sqr();
        }
        assert_abs_diff_eq!(acc / n as f64, 1.0 / 3.0, epsilon = 0.02);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut s = SeededStream::new(9);
        for d in [2, 3, 5] {
            let u = haar_unitary(d, &mut s);
            let id = CMat::identity(d, d);
            assert!((u.adjoint() * &u - id).norm() < 1e-12);
        }
    }

    #[test]
    fn induced_mixed_purity_mean() {
        // with ancilla k the expected purity is (k + n)/(kn + 1)
        let mut s = SeededStream::new(13);
        let n = 1500;
        let mut acc = 0.0;
        for _ in 0..n {
            let rho = induced_mixed(2, 2, None, &mut s).unwrap();
            acc += rho.purity();
        }
        assert_abs_diff_eq!(acc / n as f64, 8.0 / 17.0, epsilon = 0.01);
    }

    #[test]
    fn random_product_has_product_form() {
        let mut s = SeededStream::new(21);
        let rho = random_product(2, 3, &mut s).unwrap();
        let a = crate::linops::partial_trace(&rho, &[0]).unwrap();
        let b = crate::linops::partial_trace(&rho, &[1]).unwrap();
        let rebuilt = kron(a.matrix(), b.matrix());
        assert!((rebuilt - rho.matrix()).norm() < 1e-12);
    }

    #[test]
    fn dirichlet_flat_sums_to_one() {
        let mut s = SeededStream::new(3);
        let p = dirichlet_flat(5, &mut s);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn random_cptp_is_trace_preserving_and_complete() {
        let mut s = SeededStream::new(17);
        let ch = random_cptp(3, 3, 4, &mut s).unwrap();
        let kraus = ch.kraus_ops();
        let mut sum = CMat::zeros(3, 3);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        assert!((sum - CMat::identity(3, 3)).norm() < 1e-12);

        let dims = SubsystemDims::single(3);
        let psi = haar_pure(&dims, &mut s);
        let out = ch.apply(&psi.to_density()).unwrap();
        assert_abs_diff_eq!(out.matrix().trace().re, 1.0, epsilon = 1e-12);
    }
}
