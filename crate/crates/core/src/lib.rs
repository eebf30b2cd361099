// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exponents;
pub mod identities;
pub(crate) mod ode;
pub mod params;
pub mod quadrature;
pub mod radgeom;
pub mod shoot;
pub mod wolff;

pub use error::{Error, Result, Side};
