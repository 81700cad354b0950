//! Simulation toolkit for networked quantum error correction.
//!
//! Builds surface and bivariate bicycle codes, splits BB codes across two
//! nodes by balanced min-cut of the combined Tanner graph, emits noisy
//! syndrome-extraction circuits (GHZ-mediated and teleported-CNOT bridges
//! included), and estimates logical error rates by Monte Carlo sampling with
//! matching and BP-OSD decoding.

pub mod circuit;
pub mod codes;
pub mod decode;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod partition;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
