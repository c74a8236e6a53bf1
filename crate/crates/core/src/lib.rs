//! Reed–Muller nesting toolkit.
//!
//! Builds Reed–Muller codes and their projections onto subspace-indexed
//! coordinate sets, evaluates extrinsic decoding metrics over erasure,
//! symmetric and general binary memoryless symmetric channels, runs biased
//! Fourier analysis of decoding functions and evaluates the recursive bounds
//! that tie these objects together.

pub mod bits;
pub mod bounds;
pub mod channels;
pub mod codes;
pub mod decoders;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod mc;
pub mod subspaces;
pub mod verify;

pub use error::{Error, Result};
