//! Desk-scale laboratory for one-dimensional non-local difference-quotient
//! energies: exact evaluation on step functions, singular-kernel quadrature,
//! rearrangement and segmentation calculus, and the simplex minimum problems
//! whose large-n asymptotics produce the limit constants.

pub mod error;
pub mod funcs1d;
pub mod hostility;
pub mod laws;
pub mod nonlocal;
pub mod quad;
pub mod rng;
pub mod shape;

pub use error::{Error, Result};
pub use laws::InteractionLaw;
