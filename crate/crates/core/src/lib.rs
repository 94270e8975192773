//! Bernoulli percolation on randomly stretched lattices.
//!
//! Columns and rows of `Z^2` carry gap variables `ξ`; an edge crossing column `i` is
//! open with probability `p^(ξ_i + 1)`. The crate samples such environments,
//! computes multiscale defect labels, measures crossing and remainder events, and
//! checks the inequalities that drive the renormalization argument.

pub mod env;
pub mod error;
pub mod estimators;
pub mod fractal;
pub mod oracle;
pub mod oriented;
pub mod par;
pub mod perc;
pub mod renorm;
pub mod rng;
pub mod sites;
pub mod stats;
pub mod suite;

pub use error::{Error, Result};
