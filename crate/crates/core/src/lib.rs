//! Perfect privacy and maximal correlation for finite-alphabet joint
//! distributions.
//!
//! The crate computes, for a pair `(X, Y)` with `X` private and `Y` the data
//! to be released:
//!
//! * whether a release `U` exists that is independent of `X` but not of `Y`,
//! * the largest `I(Y;U)` over such releases (`g0`), plus the analogous
//!   minimum mean-square error and minimum error probability, each reduced to
//!   a vertex enumeration followed by a standard-form linear program,
//! * the non-private information `D_X(Y)` and the structural test deciding
//!   whether `g0 = D_X(Y)`,
//! * the generalized observation model `(X, Y) - W - U`,
//! * maximal correlation and the stationary values of KL-divergence ratios,
//!   together with the slope of the utility-privacy curve at zero leakage.
//!
//! Everything is `no_std` with `alloc`. File formats, reports and the command
//! line front-end live in the `perfpriv` crate.
//!
//! All information quantities are in bits.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod correlation;
pub mod error;
pub mod extended;
pub mod lp;
pub mod numerics;
pub mod polytope;
pub mod privacy;
pub mod probability;

mod math;
mod search;

pub use error::{Error, Result};
pub use extended::Extended;
pub use numerics::Matrix;
pub use probability::{Channel, JointPmf, JointPmf3, ProbVector};
