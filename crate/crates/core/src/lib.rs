//! Computational harmonic analysis on compact Lie groups.
//!
//! Root systems and Weyl groups, alcove geometry, characters, Schrödinger
//! kernels, and the exponential sums used to estimate them.

pub mod error;
pub mod rational;
pub mod rootsys;
pub mod weyl;
pub mod hnf;
pub mod lattice;
pub mod numeric;
pub mod rng;
pub mod alcove;
pub mod charkit;
pub mod specverify;
pub mod arith;
pub mod suite;
pub mod analysis;

pub use error::{Error, Result};
pub use rational::{WeightVector, Q};
pub use rootsys::{CartanType, Family, Parabolic, RootSystem};
