//! Numerical diagnostics for the regularity estimates: the one-sided
//! functionals `P`/`N`, oscillation decay, Hölder fits and the auxiliary
//! bounds they rest on.

mod bounds;
mod cutoff;
mod estimates;
mod pn;
mod report;

pub use bounds::{
    check_bound_l, frac_laplacian, frac_laplacian_holder, holder_fit, normalization_constant, normalized, BoundL,
    FracLaplacian, HolderFit,
};
pub use cutoff::Cutoff;
pub use estimates::{
    ball_nodes, oscillation_lemma_check, point_estimate_check, subsolution_identity_check, time_regularity_check,
    OscillationLemma, PointEstimate, SubsolutionMargin, TimeRegularity,
};
pub use pn::{
    check_comparability, compute_wa, least_squares, oscillation_decay, Comparability, DecayTrace, OscillationParams,
    PnField, PnOperator, PnSlice, Subset,
};
pub use report::{write_decay_svg, RegularityReport, ReportRow};
