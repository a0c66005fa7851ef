//! Numerical toolkit for partial-transpose geometry of finite-dimensional
//! bipartite quantum states.
//!
//! The central object is the partial-transpose distance
//! `d_T(ρ, σ) = ½‖ρ^{T_B} − σ^{T_B}‖₁`, together with the correlation
//! quantifiers it induces: distance to the PPT cone ([`measures::pt_distance`],
//! [`conic::solve_qppt`]), to classically correlated states, and to product
//! states. For pure states these admit closed forms in the Schmidt
//! coefficients ([`measures::q_cc_pure`], [`measures::q_prod_pure`]); for
//! mixed states the PPT quantifier is a semidefinite program solved by the
//! first-order solver in [`conic`].
//!
//! On top of the primitives sit three applications:
//!
//! * [`scan`] — batch verification over random states that the PPT
//!   quantifier equals the negativity, in both its distance and feasibility
//!   formulations, with reproducible seeded streams and CSV reports;
//! * [`dynamics::jc_witness`] — a two-mode Jaynes-Cummings evolution whose
//!   mode-mode negativity certifies that the dynamics cannot be decomposed
//!   into steps touching one mode at a time;
//! * [`dynamics::markov_witness`] — negativity revivals along a trajectory
//!   as a witness of non-Markovianity.

pub mod conic;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod linops;
pub mod measures;
pub mod randstates;
pub mod scan;

pub use error::{Error, Result};
pub use linops::{C64, CMat, CVec, DensityMatrix, PureState, SchmidtForm, Side, SubsystemDims};
pub use measures::{
    CorrSet, Method, QuantifierResult, negativity, pt_distance, q_cc_pure, q_prod_pure,
};
