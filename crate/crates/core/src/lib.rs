//! Energy-minimizing rotations of the weighted Cosserat shear-stretch energy
//!
//! ```text
//! W(R; F) = mu * |sym(R^T F - 1)|^2 + mu_c * |skew(R^T F - 1)|^2,   R in SO(n)
//! ```
//!
//! For `mu_c >= mu` the unique minimizer is the polar factor `polar(F)`
//! (Grioli). For `mu > mu_c >= 0` the minimizers ("relaxed polar factors")
//! deviate from `polar(F)` as soon as the two largest singular values of
//! the rescaled gradient `F / lambda` sum to more than 2, and come in pairs.
//!
//! The crate provides closed forms for `n = 2` ([`planar`]), `n = 3`
//! ([`spatial`]) and general `n` ([`ndim`]), and an independent multi-start
//! Riemannian descent on SO(n) ([`oracle`]) that every closed form is
//! checked against.

pub mod cli;
pub mod energy;
pub mod error;
pub mod matcore;
pub mod ndim;
pub mod oracle;
pub mod planar;
pub mod polar;
pub mod spatial;

pub use energy::{CosseratWeights, DeformationGradient, Regime};
pub use error::{Error, Result};
pub use matcore::{Matrix, Rotation, SpectralData};
