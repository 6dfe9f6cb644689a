//! reglab: a numerical laboratory for regularised PDE models.
//!
//! The crate implements, side by side, "simplified" one-dimensional PDE
//! models and their physically motivated regularisations, and verifies the
//! bridges between them numerically:
//!
//!   - [`burgers`]: inviscid Burgers via an exact-Riemann Godunov scheme,
//!     viscous Burgers via IMEX, and the vanishing-viscosity sweep.
//!   - [`bfheat`]: the backward-forward heat equation with a nonmonotone
//!     flux, its biharmonic and pseudo-parabolic regularisations, and
//!     gradient-histogram diagnostics of the developing oscillations.
//!   - [`noise`]: additive space-time white noise for the heat equation and
//!     Stratonovich transport via Monte Carlo characteristics.
//!   - [`greenlink`]: Green's-function kernels linking nonlocal integral
//!     operators to higher-order local operators, with wave-equation solvers
//!     demonstrating the equivalence.
//!   - [`rdnonlocal`]: an activator-inhibitor reaction-diffusion-advection
//!     system, its asymmetric nonlocal reduction, and the fast-inhibitor
//!     limit comparison.
//!   - [`peridyn`]: the linear peridynamic operator, Taylor-expansion local
//!     surrogates, moment tensors and the vanishing-horizon limit.
//!
//! Shared infrastructure (grids, fields, stencils, banded solves, DFT, IMEX
//! stepping, weak-form residuals) lives in the root modules. The `cli`
//! module exposes every experiment as a reproducible command with CSV/SVG
//! output.

pub mod banded;
pub mod bfheat;
pub mod burgers;
pub mod cli;
pub mod dft;
pub mod error;
pub mod field;
pub mod greenlink;
pub mod grid;
pub mod imex;
pub mod kernel;
pub mod noise;
pub mod peridyn;
pub mod rdnonlocal;
pub mod stencil;
pub mod testfn;
pub mod weak;

pub use error::{Error, Result};
pub use field::{Field, Trajectory};
pub use grid::{BcKind, Grid1D, StepControl};
