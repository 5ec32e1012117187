//! Threat-based object labeling for driving scenes.
//!
//! Objects are labeled harmful or harmless by how much of their ground
//! footprint falls inside a danger zone ahead of the ego vehicle. The zone
//! depth follows the ego speed and its heading follows the steering angle,
//! so the label never depends on what the object is. Around that metric the
//! crate provides a seeded scene generator, a dataset format, a noisy
//! stand-in detector, and a center-distance mAP evaluator that splits
//! results into in-distribution and out-of-distribution objects.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classification;
pub mod commands;
pub mod dataset;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod polygon;
pub mod render;
pub mod simulation;

pub use error::{Error, Result};
