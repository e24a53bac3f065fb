//! Asymptotic-preserving staggered-grid scheme for the 2D linear transport
//! equation in diffusive scaling.
//!
//! The distribution `f(t, x, y, ξ, η)` is split into even (`r`) and scaled
//! odd (`j`) parities over opposite velocity pairs. `r` lives at cell
//! vertices and centers, `j` at face centers, and the time step is an
//! explicit transport step followed by a relaxation step that is implicit in
//! the stiff scattering term but solvable in closed form.
//!
//! Modules:
//! - [`angular`]: Gauss-Legendre directions and the density moment.
//! - [`grid`]: staggered fields and the four half-grid difference operators.
//! - [`solver`]: the time stepper.
//! - [`stability`]: the 1D two-velocity scheme and its growth matrix.
//! - [`diffusion`]: the limiting five-point diffusion solver.
//! - [`scenarios`]: ready-made test problems.
//! - [`harness`]: error norms, convergence tables and limit checks.

pub mod angular;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod harness;
pub mod scenarios;
pub mod solver;
pub mod stability;

pub use angular::DirectionSet;
pub use error::{Error, Result};
pub use grid::{GridGeometry, JField, PlaneKind, RField};
pub use solver::{MaterialField, ParityState, SchemeParams, Solver, SourceTerm};
