//! Set-membership channel estimation for cooperative multi-hop
//! amplify-and-forward sensor networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: complex linear algebra, seeded random streams, special functions.
//! * [`channel`]: block-fading and Clarke-fading channel processes.
//! * [`wsn`]: the m-hop network and its stacked linear model.
//! * [`estimators`]: batch LS/MMSE and streaming NLMS, SM-NLMS, RLS, BEACON.
//! * [`analysis`]: update probability, steady-state excess MSE, complexity.
//! * [`detection`]: QPSK and linear MMSE detection.
//! * [`experiments`]: Monte Carlo scenarios and CSV output.

// `!(x > 0.0)` deliberately rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod detection;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod numerics;
pub mod wsn;

pub use error::{Error, Result};
