//! Simulated MTJ-array random number pipeline: stochastic device array,
//! XOR-3 and Toeplitz conditioning, PRNG baselines, the SP 800-22 test suite,
//! latent-code emission and throughput/energy models.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bits;
pub mod conditioning;
pub mod device;
pub mod error;
pub mod latent;
pub mod nist;
pub mod prng;

pub use bits::{RawBitstream, Source};
pub use error::{Error, Result};
