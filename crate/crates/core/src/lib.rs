//! Simulation of a two-mode PT-symmetric bosonic system: one damped and one
//! amplified mode coupled by linear exchange and parametric down-conversion,
//! with weak Kerr nonlinearities.
//!
//! The crate propagates the classical amplitudes together with the second
//! moments of the linearized quantum fluctuations (including Langevin noise)
//! and evaluates Gaussian entanglement and nonclassicality quantifiers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod fluctuations;
pub mod linalg;
pub mod lossless;
pub mod model;
pub mod ode;
pub mod quantifiers;
pub mod scenario;
pub mod spectrum;
pub mod sweep;
pub mod table;

pub use error::*;
pub use model::{validate, AmplitudePair, InitialStateSpec, PtClass, Regime, SystemParams};
