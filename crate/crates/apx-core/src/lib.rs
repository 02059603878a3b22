//! Weighted trigonometric approximation toolkit: Fourier/quadrature kernels,
//! Muckenhoupt-style weight classification, weighted norms, averaging
//! operators with dual (multiplier / quadrature) implementations, moduli of
//! smoothness, best approximation, and an inequality-check harness.

pub mod best_approx;
pub mod constants;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod quadrature;
pub mod smoothness;
pub mod testfn;
pub mod norms;
pub mod operators;
pub mod weights;

pub use error::{ApxError, Result};
