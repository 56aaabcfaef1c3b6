pub mod algorithms;
pub mod batch;
pub mod diagnostics;
pub mod discrete;
pub mod error;
pub mod harness;
pub mod objective;
pub mod proposals;
pub mod ranking;
pub mod rng;
pub mod weighting;
