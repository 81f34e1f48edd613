//! Exact spectra of the finite-N Dicke model from its G-function, with an
//! independent diagonalization oracle, eigenstate reconstruction and
//! genuine-multipartite-entanglement dynamics.

#![no_std]
// Float supplies the libm-backed methods in no_std builds; with std linked
// for tests the inherent methods win.
#![allow(unused_imports)]

extern crate alloc;

pub mod analysis;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod gfunction;
mod linalg;
pub mod model;
pub mod oracle;
pub mod recurrence;
mod sdp;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{DickeIndex, ModelParams, Parity};
