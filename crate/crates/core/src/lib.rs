//! Simulation core for STIT tessellations.
//!
//! Everything in this crate is `no_std` (with `alloc`): convex geometry in the
//! plane and in space, translation-invariant hyperplane measures, the
//! event-driven cell-division engine with its birth-time marked ledger of
//! maximal polytopes, a direct sampler for the typical maximal segment, and
//! quadrature of the internal-vertex laws. IO, configuration and the
//! replication harness live in the `stitlab` crate.
// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature nodes and weights are kept at their published digits
#![allow(clippy::excessive_precision)]
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytics;
pub mod engine;
pub mod geometry;
pub mod measure;
pub mod mecke;
pub mod palm;
pub mod quadrature;
pub mod stream;

