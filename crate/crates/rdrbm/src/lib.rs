//! Training restricted Boltzmann machines against discrete target energy
//! functions.
//!
//! The crate provides four training objectives (forward KLD via persistent
//! contrastive divergence, reverse KLD, their sum, and ratio divergence), a
//! replica-exchange Monte Carlo pipeline for drawing training data from a
//! target Boltzmann distribution, and an evaluation suite (energy-residual
//! score, 1D Wasserstein distance on energy histograms, Hamming-distance
//! histograms, PCA projections, exact small-system divergences).
//!
//! Bit conventions: visible and hidden units take values in {0, 1}. Target
//! models that are naturally written in spin variables map bits to spins via
//! s = 2x - 1 internally; every public interface speaks bits.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod pt;
pub mod rbm;
pub mod rng;
pub mod target;
pub mod training;

pub use error::{Error, Result};
pub use cli::run;
