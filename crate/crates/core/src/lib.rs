//! Semidefinite lifts of convex basic closed semialgebraic sets.
//!
//! Given `S = {x : g_1(x) ≥ 0, …, g_m(x) ≥ 0}` with sos-concave `g_k`, the
//! crate builds the dense moment-matrix lift and the block-sparse lift
//! indexed by Newton-polytope lattice sets, certifies sos-concavity with
//! Gram-matrix SDPs, solves the lifted problems with a small interior-point
//! solver, and checks the lifts against brute-force oracles.

pub mod cli;
pub mod fixtures;
pub mod geometry;
pub mod lift;
pub mod poly;
pub mod sdp;
pub mod sos;
pub mod verify;
