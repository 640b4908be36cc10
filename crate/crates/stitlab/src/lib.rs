//! Replication harness, statistical verification, configuration and IO for
//! STIT tessellation experiments built on `stitlab-core`.
//!
//! All parallelism is over replications and runs on the global rayon pool;
//! results are gathered in replication order, so every output depends only
//! on the configuration and the master seed.
// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod cli;
pub mod config;
pub mod export;
pub mod report;
pub mod stats;
pub mod suite;
pub mod verify;
