//! Exact, desk-scale simulation of IQP* circuits, their graph-state MBQC
//! implementations, and the dephased zero-discord states that mimic them,
//! together with mechanical checkers for the three criteria that decide
//! whether a set of MBQCs is only superficially measurement-based.
//!
//! The crate is organized around a dense statevector/density-matrix kernel
//! ([`state`]), the commuting-circuit simulator ([`iqp`]), the MBQC engine
//! ([`mbqc`]), dephasing and classical per-bit replacement ([`discord`]),
//! the criteria checkers ([`criteria`]), and a period-finding demo
//! ([`shor`]).
//!
//! # Conventions
//!
//! * Qubits are numbered `1..=r`; qubit `j` occupies integer bit `j - 1`.
//! * Bit strings print most-significant-first (`m_r ... m_1`), so the
//!   printed string is the plain binary literal of the integer encoding.
//! * All floating-point comparisons go through [`tol`]; the global absolute
//!   tolerance is `1e-9`.
//! * Pure states are capped at 24 qubits, dense matrices at 11.

pub mod bits;
pub mod criteria;
pub mod discord;
pub mod dist;
pub mod error;
pub mod format;
pub mod iqp;
pub mod mbqc;
pub mod rng;
pub mod shor;
pub mod state;
pub mod tol;

pub use dist::ClassicalDistribution;
pub use error::{Error, Result};
pub use state::{DensityMatrix, LocalProductBasis, PureState, QubitBasis};
