//! Precision limits for resolving two point sources whose spatial mode is
//! entangled with, or partially coherent through, their remaining degrees of
//! freedom.
//!
//! - [`state_model`]: Gaussian overlap algebra, concurrence / coherence maps and
//!   the eigen-data of the reduced spatial state.
//! - [`fisher_single`]: closed-form Fisher information for the separation alone.
//! - [`qfim`]: SLD operators, the two-parameter QFIM and nuisance-corrected precisions.
//! - [`oracle`]: grid and Hermite-Gauss brute force that checks all of the above.
//! - [`sweep`]: parameter sweeps, figure presets and CSV / JSON output.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fisher_single;
pub mod oracle;
pub mod qfim;
pub mod state_model;
pub mod sweep;

pub use error::{Error, Result};
pub use state_model::ModelParams;
