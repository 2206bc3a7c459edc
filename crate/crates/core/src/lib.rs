//! High-order continuous Galerkin / residual distribution solver for the
//! one-dimensional shallow-water equations with well-balanced space
//! discretizations, continuous interior penalty stabilizations and explicit
//! deferred-correction time stepping.

pub mod basis;
pub mod config;
pub mod dec;
pub mod error;
pub mod experiment;
pub mod mesh;
pub mod physics;
pub mod simulation;
pub mod space;
pub mod stabilization;
pub mod steady;

pub use error::{Error, Result};
