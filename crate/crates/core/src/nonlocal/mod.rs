//! Discretized nonlocal operators: quadrature rules, pointwise evaluation and
//! structural identities.

mod eval;
mod properties;
mod rule;

pub use eval::{
    bellman, delta_u, delta_u_slice, evaluate_linear, evaluate_linear_slice, pucci_extremal, pucci_extremal_slice,
    Breakdown, DiscreteFamily, Extremal, OperatorEvaluation,
};
#[allow(unused_imports)]
pub(crate) use eval::{linear_probe, pucci_probe, Probe};
pub use properties::{
    adjoint_pair, check_concavity_translation_homogeneity, check_integration_by_parts, check_uniform_ellipticity,
    EllipticityReport, IntegrationByParts, Mollifier, PropertyReport, PROPERTY_SLACK,
};
pub use rule::{LatticePair, QuadratureConfig, QuadratureRule, ShellPair};
