//! Robust digital beamforming under unknown, time-varying carrier offsets.
//!
//! The crate synthesizes array snapshots, lifts them onto a Slepian (DPSS)
//! basis, solves the resulting atomic-norm problems (ADMM on the SDP form, or
//! an accelerated proximal-gradient scheme on its dual), reads carrier
//! frequencies off the dual polynomial and turns them into nulling weights.

mod admm;
pub mod anm1d;
pub mod anm2d;
pub mod array_model;
pub mod beamform;
pub mod dpss;
pub mod error;
pub mod ivdst;
pub mod linalg;
pub mod pipeline;
pub mod tensor_ops;

pub use error::{Error, Result};
pub use linalg::C64;
