//! Numerical building blocks: adaptive ODE integration and quadrature.

pub mod ode;
pub mod quadrature;
