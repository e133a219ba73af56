//! Command-line and HTTP front ends for the techdoc pipeline.

pub mod api;
pub mod load;
