//! Exact intersection statistics of affine flats and axis-aligned subcubes
//! of the binary hypercube F_2^n.
//!
//! The crate computes, for a point set A and dimension d, the distribution of
//! |Q ∩ A| over all affine d-flats Q (and its subcube analogue), together
//! with closed-form bounds on the extremal fractions, constructions that
//! attain them, and exhaustive/stochastic searches for extremal sets. All
//! counts are arbitrary-precision integers and all fractions exact rationals.

pub mod blocking;
pub mod bounds;
pub mod constructions;
pub mod error;
pub mod gf2;
pub mod grassmann;
pub mod search;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
