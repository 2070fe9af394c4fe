//! Counting-field Lindbladian spectra of a driven, monitored three-level
//! system: eigenvalue braids, exceptional points, full counting statistics,
//! quantum-jump sampling and eigenvalue retrieval from jump histograms.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod braid;
pub mod ep;
pub mod fcs;
pub mod linalg;
pub mod model;
mod optimize;
pub mod reduce;
pub mod retrieve;
pub mod trajectories;
