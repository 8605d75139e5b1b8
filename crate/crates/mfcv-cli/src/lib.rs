//! Configuration, artifact and plotting layer behind the `mfcv` binary.

pub mod config;
pub mod output;
pub mod plots;
