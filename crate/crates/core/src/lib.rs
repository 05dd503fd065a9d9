//! Monotone finite-difference schemes and regularity diagnostics for concave
//! nonlocal parabolic Bellman equations `u_t = inf_a L_a u`.
//!
//! Everything is generic over the scalar type; the aliases at the crate root
//! fix it to `f64`.

pub mod error;
pub mod field;
pub mod harness;
pub mod kernel;
pub mod nonlocal;
pub mod presets;
pub mod quadrature;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid = field::Grid<f64>;
pub type SpaceTimeField = field::SpaceTimeField<f64>;
pub type Exterior = field::Exterior<f64>;
pub type KernelSpec = kernel::KernelSpec<f64>;
pub type Ellipticity = kernel::Ellipticity<f64>;
pub type OperatorFamily = kernel::OperatorFamily<f64>;
pub type QuadratureRule = nonlocal::QuadratureRule<f64>;
pub type QuadratureConfig = nonlocal::QuadratureConfig<f64>;
pub type DiscreteFamily = nonlocal::DiscreteFamily<f64>;
pub type Scheme = solver::Scheme<f64>;
pub type SchemeConfig = solver::SchemeConfig<f64>;
