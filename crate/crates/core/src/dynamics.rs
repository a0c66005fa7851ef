//! Dynamics applications: entanglement bounds for non-decomposable
//! multipartite evolution, and negativity revivals as a non-Markovianity
//! witness.
//!
//! The two-mode Jaynes-Cummings setup couples one atom (C) to two field
//! modes (A, B) with `H = g(â σ₊ + â† σ₋) + g(b̂ σ₊ + b̂† σ₋)`. Starting
//! from a NOON state on the modes with the atom in the ground state, the
//! mode-mode negativity can exceed any bound achievable by dynamics
//! decomposable into steps that touch only one mode at a time; the bound is
//! assembled in [`decomposability_bound`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{
    C64, CMat, CVec, DensityMatrix, PureState, SubsystemDims, hermitian_eig, kron,
};
use crate::measures::negativity;
use crate::randstates::{SeededStream, random_cptp};

/// Field-mode truncation and coupling for the Jaynes-Cummings model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FockSpec {
    /// Highest Fock level kept per mode; each mode has `n_max + 1` levels.
    pub n_max: usize,
    /// Mode-atom coupling strength.
    pub g: f64,
}

impl FockSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidArgument("need at least two Fock levels".into()));
        }
        if !self.g.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coupling {}", self.g)));
        }
        Ok(())
    }

    fn levels(&self) -> usize {
        self.n_max + 1
    }

    /// The tripartite space `A ⊗ B ⊗ C` (modes first, atom last).
    pub fn dims(&self) -> SubsystemDims {
        SubsystemDims::new(vec![self.levels(), self.levels(), 2]).expect("positive dims")
    }
}

fn lowering(levels: usize) -> CMat {
    let mut a = CMat::zeros(levels, levels);
    for n in 1..levels {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Two-mode Jaynes-Cummings Hamiltonian on `A ⊗ B ⊗ C` (resonant rotating
/// frame, so only the exchange terms remain).
pub fn jc_hamiltonian(spec: &FockSpec) -> Result<CMat> {
    spec.validate()?;
    let nf = spec.levels();
    let a = lowering(nf);
    let ad = a.adjoint();
    let idm = CMat::identity(nf, nf);
    let mut sp = CMat::zeros(2, 2);
    sp[(1, 0)] = C64::new(1.0, 0.0);
    let sm = sp.adjoint();
    let h = kron(&kron(&a, &idm), &sp)
        + kron(&kron(&ad, &idm), &sm)
        + kron(&kron(&idm, &a), &sp)
        + kron(&kron(&idm, &ad), &sm);
    Ok(h.scale(spec.g))
}

/// `(|n,0⟩ + |0,n⟩)/√2` on the modes, atom in the ground state.
pub fn noon_with_ground_atom(n: usize, spec: &FockSpec) -> Result<PureState> {
    spec.validate()?;
    if n > spec.n_max {
        return Err(Error::InvalidArgument(format!(
            "NOON level {n} exceeds truncation {}",
            spec.n_max
        )));
    }
    let nf = spec.levels();
    let dims = spec.dims();
    let mut amp = CVec::zeros(dims.total());
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amp[(n * nf) * 2] = w;
    amp[n * 2] = w;
    PureState::new(amp, dims)
}

/// States on a common space at strictly increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    dims: SubsystemDims,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times vs {} states",
                times.len(),
                states.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite times".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let dims = states[0].dims().clone();
        if states.iter().any(|s| s.dims() != &dims) {
            return Err(Error::DimensionMismatch(
                "all trajectory states must share one space".into(),
            ));
        }
        Ok(Trajectory { times, states, dims })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn dims(&self) -> &SubsystemDims {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Uniform grid `0, dt, 2·dt, ..., ≤ t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive horizon and step, got t_max={t_max}, dt={dt}"
        )));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

/// Unitary evolution `ρ(t) = e^{-iHt} ρ₀ e^{iHt}` sampled on a time grid.
/// The Hamiltonian is diagonalized once.
pub fn evolve(h: &CMat, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    if h.nrows() != rho0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {}x{}, state is {}-dimensional",
            h.nrows(),
            h.ncols(),
            rho0.dim()
        )));
    }
    let (vals, vecs) = hermitian_eig(h)?;
    let states = times
        .iter()
        .map(|&t| {
            let m = propagate(&vals, &vecs, rho0.matrix(), t);
            DensityMatrix::with_tol(m, rho0.dims().clone(), rho0.tol())
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

fn propagate(vals: &nalgebra::DVector<f64>, vecs: &CMat, rho0: &CMat, t: f64) -> CMat {
    let n = vecs.nrows();
    let mut u = vecs.clone();
    for j in 0..n {
        let phase = C64::new(0.0, -vals[j] * t).exp();
        for e in u.column_mut(j).iter_mut() {
            *e *= phase;
        }
    }
    let u = u * vecs.adjoint();
    &u * rho0 * u.adjoint()
}

/// Mode-mode negativity along the Jaynes-Cummings evolution, against the
/// bound for mediated (one-mode-at-a-time) dynamics.
#[derive(Debug, Clone, Serialize)]
pub struct JcWitness {
    pub times: Vec<f64>,
    /// Negativity between the two modes after tracing out the atom.
    pub negativity_ab: Vec<f64>,
    /// Largest mode-mode negativity mediated dynamics could reach.
    pub bound: f64,
    /// `N_{AC:B}` of the initial state (enters the bound).
    pub initial_ac_b_negativity: f64,
    pub max_negativity: f64,
    pub violated: bool,
    /// First grid time with `negativity_ab > bound`.
    pub first_violation: Option<f64>,
    /// Largest population outside the initial excitation sector across the
    /// run; nonzero values signal truncation artifacts.
    pub max_sector_leakage: f64,
}

/// Bound on the mode-mode negativity reachable when every step of the
/// dynamics couples the atom to a single mode: the initial `N_{AC:B}`, plus
/// `½` for the classical-correlation half-term (at most 1), plus
/// `½(d_C − 1)` for the negativity a `d_C`-dimensional mediator can carry.
pub fn decomposability_bound(initial_ac_b_negativity: f64, d_c: usize) -> f64 {
    initial_ac_b_negativity + 0.5 + 0.5 * (d_c as f64 - 1.0)
}

/// Run the NOON-state witness: evolve `(|n,0⟩+|0,n⟩)/√2 ⊗ |0⟩_C` with
/// `n = 4` under the two-mode Hamiltonian and track the mode-mode
/// negativity against [`decomposability_bound`]. Requires `n_max ≥ 4`.
pub fn jc_witness(spec: &FockSpec, times: &[f64]) -> Result<JcWitness> {
    spec.validate()?;
    const NOON_LEVEL: usize = 4;
    if spec.n_max < NOON_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "witness needs n_max ≥ {NOON_LEVEL}, got {}",
            spec.n_max
        )));
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    let psi0 = noon_with_ground_atom(NOON_LEVEL, spec)?;
    let rho0 = psi0.to_density();
    let initial_ac_b = negativity(&rho0, &[1])?;
    let bound = decomposability_bound(initial_ac_b, 2);

    let h = jc_hamiltonian(spec)?;
    let (vals, vecs) = hermitian_eig(&h)?;
    let nf = spec.levels();
    let full_dims = [nf, nf, 2];

    let mut negativity_ab = Vec::with_capacity(times.len());
    let mut max_leak = 0.0_f64;
    for &t in times {
        let rho_t = propagate(&vals, &vecs, rho0.matrix(), t);
        let mut leak = 0.0;
        for idx in 0..rho_t.nrows() {
            let (na, rest) = (idx / (nf * 2), idx % (nf * 2));
            let (nb, c) = (rest / 2, rest % 2);
            if na + nb + c != NOON_LEVEL {
                leak += rho_t[(idx, idx)].re.abs();
            }
        }
        max_leak = max_leak.max(leak);
        let (ab, _) = crate::linops::partial_trace_mat(&rho_t, &full_dims, &[0, 1]);
        let rho_ab =
            DensityMatrix::with_tol(ab, SubsystemDims::bipartite(nf, nf), rho0.tol())?;
        negativity_ab.push(negativity(&rho_ab, &[1])?);
    }

    let max_negativity = negativity_ab.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first_violation = times
        .iter()
        .zip(&negativity_ab)
        .find(|&(_, &n)| n > bound)
        .map(|(&t, _)| t);
    Ok(JcWitness {
        times: times.to_vec(),
        negativity_ab,
        bound,
        initial_ac_b_negativity: initial_ac_b,
        max_negativity,
        violated: first_violation.is_some(),
        first_violation,
        max_sector_leakage: max_leak,
    })
}

/// Negativity across `cut` at every trajectory time.
pub fn negativity_series(traj: &Trajectory, cut: &[usize]) -> Result<Vec<f64>> {
    traj.states().iter().map(|s| negativity(s, cut)).collect()
}

/// An interval where the negativity across `cut` increased by more than
/// `tol`, which no Markovian (CP-divisible) local dynamics allows.
#[derive(Debug, Clone, Serialize)]
pub struct MarkovViolation {
    pub t_start: f64,
    pub t_end: f64,
    /// Negativity increase over the interval.
    pub delta: f64,
}

/// Scan consecutive trajectory steps for negativity revivals beyond `tol`.
pub fn markov_witness(traj: &Trajectory, cut: &[usize], tol: f64) -> Result<Vec<MarkovViolation>> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be nonnegative, got {tol}")));
    }
    let series = negativity_series(traj, cut)?;
    let mut out = Vec::new();
    for (w, n) in traj.times().windows(2).zip(series.windows(2)) {
        let delta = n[1] - n[0];
        if delta > tol {
            out.push(MarkovViolation { t_start: w[0], t_end: w[1], delta });
        }
    }
    Ok(out)
}

/// Built-in open-system models for the non-Markovianity witness. All act on
/// a maximally entangled qubit pair, with the dynamics on the second qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinModel {
    /// Coherent exchange with a single environment qubit: negativity
    /// collapses and revives, so violations are reported.
    Exchange,
    /// Amplitude damping with monotone rate `γ(t) = 1 − e^{-t}`: Markovian,
    /// no violations.
    Damping,
    /// One fixed random CPTP map applied per grid step: CP-divisible by
    /// construction, no violations.
    Divisible,
}

impl std::str::FromStr for BuiltinModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exchange" => Ok(BuiltinModel::Exchange),
            "damping" => Ok(BuiltinModel::Damping),
            "divisible" => Ok(BuiltinModel::Divisible),
            other => Err(Error::InvalidArgument(format!(
                "unknown model '{other}' (expected exchange, damping, or divisible)"
            ))),
        }
    }
}

fn entangled_pair() -> CMat {
    let mut amp = CVec::zeros(4);
    let w = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amp[0] = w;
    amp[3] = w;
    &amp * amp.adjoint()
}

fn exchange_trajectory(times: &[f64]) -> Result<Trajectory> {
    // reference ⊗ system ⊗ environment, exchange coupling on S-E
    let mut sp = CMat::zeros(2, 2);
    sp[(1, 0)] = C64::new(1.0, 0.0);
    let sm = sp.adjoint();
    let exchange = kron(&sp, &sm) + kron(&sm, &sp);
    let h = kron(&CMat::identity(2, 2), &exchange);
    let mut env0 = CMat::zeros(2, 2);
    env0[(0, 0)] = C64::new(1.0, 0.0);
    let rho0 = kron(&entangled_pair(), &env0);
    let (vals, vecs) = hermitian_eig(&h)?;
    let dims = [2usize, 2, 2];
    let states = times
        .iter()
        .map(|&t| {
            let full = propagate(&vals, &vecs, &rho0, t);
            let (rs, _) = crate::linops::partial_trace_mat(&full, &dims, &[0, 1]);
            DensityMatrix::new(rs, SubsystemDims::bipartite(2, 2))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

fn damping_trajectory(times: &[f64]) -> Result<Trajectory> {
    let rho0 = entangled_pair();
    let id = CMat::identity(2, 2);
    let states = times
        .iter()
        .map(|&t| {
            let gamma = 1.0 - (-t).exp();
            let mut k0 = CMat::identity(2, 2);
            k0[(1, 1)] = C64::new((1.0 - gamma).sqrt(), 0.0);
            let mut k1 = CMat::zeros(2, 2);
            k1[(0, 1)] = C64::new(gamma.sqrt(), 0.0);
            let l0 = kron(&id, &k0);
            let l1 = kron(&id, &k1);
            let m = &l0 * &rho0 * l0.adjoint() + &l1 * &rho0 * l1.adjoint();
            DensityMatrix::new(m, SubsystemDims::bipartite(2, 2))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(times.to_vec(), states)
}

fn divisible_trajectory(times: &[f64], seed: u64) -> Result<Trajectory> {
    let mut s = SeededStream::new(seed);
    let step = random_cptp(2, 2, 2, &mut s)?;
    let id = CMat::identity(2, 2);
    let lifted: Vec<CMat> = step.kraus_ops().iter().map(|k| kron(&id, k)).collect();
    let mut current = entangled_pair();
    let mut states = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        if i > 0 {
            let mut next = CMat::zeros(4, 4);
            for l in &lifted {
                next += l * &current * l.adjoint();
            }
            current = next;
        }
        states.push(DensityMatrix::new(current.clone(), SubsystemDims::bipartite(2, 2))?);
    }
    Trajectory::new(times.to_vec(), states)
}

/// Trajectory of a built-in model on the given time grid. The seed only
/// affects [`BuiltinModel::Divisible`], which draws its fixed step channel.
pub fn builtin_trajectory(model: BuiltinModel, times: &[f64], seed: u64) -> Result<Trajectory> {
    match model {
        BuiltinModel::Exchange => exchange_trajectory(times),
        BuiltinModel::Damping => damping_trajectory(times),
        BuiltinModel::Divisible => divisible_trajectory(times, seed),
    }
}
