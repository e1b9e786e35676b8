//! Low-temperature series coefficients for classical O(N) spin models on
//! `Z^d`, with lattice Green's functions, Gaussian (Wick) calculus, an exact
//! formal-series algebra, the inductive expansion engine, and a Monte Carlo
//! validator.

pub mod algebra;
pub mod cli;
pub mod engine;
pub mod green;
pub mod wick;
pub mod lattice;
pub mod mc;
pub mod numeric;
