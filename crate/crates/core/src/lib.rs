//! Denoising, extension, and spectral analysis of sampled response functions
//! by enforcing positive definiteness of their Gram matrices.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod denoise;
pub mod error;
pub mod extend;
pub mod gram;
pub mod io;
pub mod linalg;
pub mod models;
pub mod poles;
pub mod signal;
pub mod spectrum;

pub use error::{Error, Result};
pub use gram::{build_gramian, psd_tol, HermitianToeplitz};
pub use linalg::{EigenDecomposition, HermitianDense};
pub use poles::{Pole, PoleModel};
pub use signal::SampledSignal;
