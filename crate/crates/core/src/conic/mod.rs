//! Cone programs over Hermitian PSD blocks, and the partial-transpose
//! problems built on them.
//!
//! Problems are stated as `min c·x` subject to `Ax = b` with `x` the
//! concatenated [`svec`] coordinates of the PSD blocks (plus optional free
//! scalars). The partial transpose acts on svec coordinates as a signed
//! permutation, so linking a block to the partial transpose of another costs
//! one sparse row per coordinate. [`solve`] is a first-order operator
//! splitting method (ADMM) with over-relaxation and residual balancing.

mod instance;
mod problems;
mod solver;

pub use instance::{BlockId, SdpInstance, pt_svec_perm, svec, svec_len, unsvec};
pub use problems::{
    AltConjectureCheck, QpptOutcome, build_qppt, check_conjecture_alt, ppt_povm_discrimination,
    solve_qppt,
};
pub use solver::{DEFAULT_MAX_ITER, DEFAULT_SDP_TOL, SdpSolution, SdpStatus, solve};
