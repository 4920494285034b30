//! Computation of the provably complete set of S-integral points on
//! elliptic curves `y^2 = x^3 + ax + b` over the rationals.
//!
//! The pipeline combines explicit height bounds, complex and q-adic
//! elliptic logarithms, and iterated LLL (de Weger) reduction, followed
//! by a finite enumeration and a bounded residual search.

pub mod curve;
pub mod ellog;
pub mod heights;
pub mod bounds;
pub mod padic;
pub mod reduction;
pub mod pipeline;
pub mod search;
pub mod error;
pub mod real;

pub use error::{Error, Result};
pub use real::{Cx, Real};
