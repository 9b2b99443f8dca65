//! Numerical toolkit for arbitrarily varying wiretap channels with
//! type-constrained states.
//!
//! All information quantities are in bits. Every stochastic routine takes an
//! explicit seed; see [`rng`] for the generator and seed-splitting rule.

pub mod capacity;
pub mod coupling;
pub mod error;
pub mod info;
pub mod prob;
pub mod rng;
pub mod sim;
pub mod softcover;

pub use error::{Error, Result};
pub use info::JointPmf;
pub use prob::{AtypicalMode, Avwtc, Dmc, Pmf, Sequence, TypicalityParams};
