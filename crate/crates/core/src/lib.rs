//! Head pose estimation from 2D facial landmarks, and the machinery built
//! around it: a perspective-n-point solver with flipped-pose detection and
//! correction, pose-difference features, an SMO-trained RBF support vector
//! machine with Platt-scaled probabilities, evaluation metrics, and a
//! deterministic synthetic-scene generator for ground-truth experiments.
//!
//! The crate is `no_std` (with `alloc`); all file and terminal IO lives in
//! the companion `headpose-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod camera;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod face;
pub mod features;
pub mod pnp;
pub mod pose;
pub mod rotation;
pub mod svm;
pub mod synth;

pub use error::Error;
