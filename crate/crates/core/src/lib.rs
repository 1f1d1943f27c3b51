//! Conformal moduli of curve families in `R^n` and numerical checks of the
//! ring `Q`-homeomorphism inequality.

pub mod curves;
pub mod error;
pub mod geometry;
pub mod grid_modulus;
pub mod mappings;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
