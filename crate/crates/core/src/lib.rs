//! Exact construction of the canonical Weil representation attached to a
//! finite symplectic module of odd order.

pub mod abgroup;
mod arith;
pub mod canonrep;
pub mod cyclo;
pub mod cycmat;
pub mod error;
pub mod harness;
pub mod heisenberg;
pub mod intertwine;
pub mod reduction;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
