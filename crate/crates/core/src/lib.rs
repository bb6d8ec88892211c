//! Airy-corrected saddle-point approximations of `∫ g(z) e^{N f(z, α)} dz` and of
//! `∫ e^{N F(x, α)} dⁿx` near a fold caustic, where the Gaussian prefactor diverges.
//!
//! `no_std` with `alloc`; elementary functions come from `libm`.
#![no_std]
// constants carry their published digits
#![allow(clippy::excessive_precision)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod airy;
pub mod asym1d;
pub mod asymnd;
pub mod error;
pub mod integrand;
pub mod linalg;
pub mod oracle;
pub mod saddle;

pub use error::{CausticaError, Result};
pub use num_complex::Complex64 as ComplexScalar;
