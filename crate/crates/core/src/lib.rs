//! Solver library for a one-dimensional aggregation equation with strongly
//! degenerate diffusion,
//!
//!   u_t + ( Φ'(∫_{−∞}^x u dy) · u )_x = A(u)_xx,
//!
//! for a nonnegative density u with compactly supported initial data. The
//! convective drift depends on the total mass to the left of each point;
//! the integrated diffusion A may be constant on whole u-intervals, so
//! solutions develop sharp-edged clumps and genuine discontinuities.
//!
//! The march works on the primitive v(x) = ∫_{−∞}^x u dy, which satisfies
//! the local equation v_t + Φ(v)_x = A(v_x)_x and is advanced by a monotone
//! explicit upwind scheme; the density scheme is its exact divided-
//! difference image. See [`scheme`] for the marching core, [`model`] for
//! problem data and the bundled experiments, [`grid`] for discretization
//! and the prefix-sum transforms, [`diagnostics`] for error norms,
//! convergence tables, jump admissibility and the cell entropy residual,
//! and [`checks`] for the run-level invariant suite.

pub mod checks;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod model;
pub mod scheme;

pub use error::{Result, SolverError};
pub use grid::{discretize_initial, inverse_primitive, primitive, GridSpec, SolverState};
pub use model::{
    preset, DiffusionModel, FluxForm, FluxModel, InitialDatum, Piece, Preset, ProblemSpec,
};
pub use scheme::{
    advance, eo_flux, u_step, v_step, validate_cfl, AcceptedDt, CflPolicy, Hooks, NoHooks,
    StepReport,
};
