//! Numerical laboratory for the generalized Monge-Ampère (gMA) equation and
//! the supercritical deformed Hermitian-Yang-Mills (dHYM) equation on flat
//! complex tori.
//!
//! The crate is layered bottom-up:
//!
//! * [`spectra`]: elementary symmetric functions, Hermitian pencils, majorization.
//! * [`gma`]: the operators `P^l`, `Q`, the cones `Γ_{≥0}` / `Γ̄`, `T^p` positivity, mass bounds.
//! * [`dhym`]: Lagrangian phase, truncated phases, slope products and the cones `Γ_{θ,Θ}`.
//! * [`torus`]: grid potentials and (1,1)-form fields, spectral `i∂∂̄`, mollifiers, energies.
//! * [`flows`]: the mixed Hessian flow, its perturbation, the dHYM flow and the boundary sweep.
//! * [`props`]: seeded property campaigns used by the CLI and the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod dhym;
pub mod error;
pub mod flows;
pub mod gma;
pub mod io;
pub mod props;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod spectra;
pub mod torus;

pub use error::{Error, Result};
