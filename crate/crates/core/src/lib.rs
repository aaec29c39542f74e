//! Exact sequential prediction cost of binary-symmetric-channel outputs given
//! a one-bit Boolean function of the input, under quadratic and logarithmic
//! loss.

pub mod boolfn;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod numerics;
pub mod optdp;

pub use error::{Error, Result};
