#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod descriptor;
pub mod edges;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod raster;
pub mod registration;
pub mod transform;
