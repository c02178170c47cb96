//! Residue-level designability preference optimization lab.
//!
//! A self-contained, fully deterministic test bed for preference learning
//! on structure-conditioned sequence design. A synthetic per-residue
//! designability oracle stands in for a structure predictor, and a tiny
//! differentiable policy stands in for a production inverse-folding model,
//! so the entire train/evaluate loop runs in seconds on a laptop while
//! preserving the optimization problem's shape: sequence-level preference
//! pairs, residue-level rewards, and the tension between preference
//! learning and staying close to the pretrained reference.

pub mod domain;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod files;
pub mod gradcheck;
pub mod losses;
pub mod math;
pub mod oracle;
pub mod pairs;
pub mod policy;
pub mod seed;
pub mod synth;
pub mod trainer;

pub mod cli;

pub use error::{Error, Result};
