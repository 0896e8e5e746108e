//! Ground states of the focusing Hartree (Choquard) equation
//!
//! ```text
//! -Δu + V(x)u - a (|x|^{-γ} * |u|²) u = λu      in ℝ^N
//! ```
//!
//! and the behaviour of mass-constrained minimizers as the Riesz exponent
//! γ approaches the mass-critical value 2.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`]: radial and Cartesian grids, quadrature, kinetic energy and
//!   discrete Laplacians.
//! * [`riesz`]: the Riesz potential `|x|^{-γ} * ρ` and the Hartree energy
//!   `D_γ(u,u)` with two independent discretizations.
//! * [`groundstate`]: the radial ground state `Q_γ` of
//!   `-ΔQ + Q - (|x|^{-γ} * Q²) Q = 0`, Pohozaev checks and the sharp
//!   Gagliardo–Nirenberg constant.
//! * [`shooting`]: an independent self-consistent shooting solver used as an
//!   oracle for the ground-state mass.
//! * [`potential`] and [`trapped`]: trapping potentials and the constrained
//!   minimization with a potential.
//! * [`asymptotics`]: closed-form scalings and the concentration report.
//! * [`io`]: CSV and binary checkpoint formats.

pub mod asymptotics;
pub mod error;
pub mod fields;
pub mod groundstate;
pub mod io;
pub mod par;
pub mod potential;
pub mod riesz;
pub mod shooting;
pub mod special;
pub mod trapped;

pub use error::{Error, Result};
pub use fields::{CartesianField, CartesianGrid, DerivativeScheme, RadialField, RadialGrid};



pub use groundstate::{GroundStateSolution, SolverConfig};
pub use potential::PotentialSpec;
pub use trapped::{TrappedConfig, TrappedMinimizer};
