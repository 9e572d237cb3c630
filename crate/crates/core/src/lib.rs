//! Synthetic object-detection dataset generation from green-screen captures,
//! plus a small SOM + softmax-perceptron model that learns who wants what.
//!
//! The imaging pipeline runs capture frames through automatic color
//! equalization ([`ace`]), keys out the green backdrop ([`chromakey`]) and
//! pastes the resulting cutouts onto backgrounds at fixed anchors
//! ([`datasetgen`]), emitting darknet-format labels. [`amygdala`] is
//! independent of the imaging side.

pub mod ace;
pub mod amygdala;
pub mod chromakey;
pub mod datasetgen;
mod error;
pub mod imaging;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
