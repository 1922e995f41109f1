//! Thermodynamics of a qubit measured by a thermalizing oscillator.
//!
//! The crate provides dense operator utilities, the coupled
//! qubit–oscillator model, open-system dynamics of the meter under a
//! time-dependent coupling, the information and entropy bookkeeping of a
//! measurement cycle, and the classification of measurement-powered
//! engine cycles.

// `!(x > 0.0)` rejects NaN; index loops mirror the matrix notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod mpe;
pub mod numerics;
pub mod operator;
pub mod thermo;

pub use error::{Error, Result};
