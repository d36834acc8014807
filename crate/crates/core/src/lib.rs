//! Finite truncations of spectral triples, states on them, and certified
//! spectral distances computed by semidefinite programming.

pub mod distance;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod oracles;
pub mod random;
pub mod sdp;
pub mod sparse;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
