//! Measuring-skill tests over units of measurement: exact numbers and units,
//! text normalization and scale indices, dataset generation, and a small
//! frozen-encoder probe.

pub mod cli;
pub mod datagen;
pub mod model;
pub mod measure_text;
pub mod numerics;
pub mod units;
