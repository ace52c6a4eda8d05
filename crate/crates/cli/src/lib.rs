//! Command-line pipeline around the estimation library: corpus import,
//! indexing, path classification, scoring, evaluation, bucketing, budget
//! planning, and a seeded synthetic harness.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod hotpot;
pub mod manifest;
pub mod pipeline;
pub mod synth;
