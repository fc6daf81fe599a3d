//! Numerical engine for two-dimensional (alpha, beta)-Finsler metrics
//! F = alpha * phi(beta / alpha): sprays, covariant data, curvature, Douglas
//! and projective-flatness tests, deformations and explicit constructions.

pub mod catalog;
pub mod criteria;
pub mod deform;
pub mod curvature;
pub mod error;
pub mod exprlang;
pub mod finsler;
pub mod geometry;
pub mod jets;
pub mod par;
pub mod phi;
pub mod quad;
pub mod sampling;

pub use error::{Error, Result};
