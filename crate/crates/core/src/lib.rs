//! Coded compressed sensing for unsourced random access.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the finite-field
//! machinery, the abstract outer channel, closed-form bound evaluators, the
//! two practical outer codes (t-tree and Reed–Solomon with Guruswami–Sudan
//! list recovery), the inner spherical code with OMP slot decoding, and a
//! frame-level Monte Carlo harness. File formats, parallel drivers and the
//! command-line front end live in the companion `ccs` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod achannel;
pub mod bounds;
pub mod gf;
pub mod phy;
pub mod rng;
pub mod rs;
pub mod sim;
pub mod ttree;

pub use error::{Error, Result};
pub use math::binary_entropy;
