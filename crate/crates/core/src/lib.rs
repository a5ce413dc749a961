//! Entropic optimal transport between Gaussian-family measures: closed-form
//! maps, a log-domain Sinkhorn solver with evaluable potentials, gap
//! metrics and rate-sweep tooling.

// `!(x > 0.0)` is used deliberately so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian_ot;
pub mod linalg;
pub mod measures;
pub mod metrics;
pub mod ratelab;
pub mod sinkhorn;

pub use error::{Error, Result};
pub use gaussian_ot::{
    brenier_map_matrix, entropic_map_matrix, half_squared_w2, map_gap, prop11_bound, sup_gap_on_ball, LinearMap,
};
pub use linalg::{loewner_leq, op_norm, sym_sqrt, SymMatrix};
pub use measures::{
    assumption_params, differential_entropy_discrete, discretize_gaussian, AssumptionParams, DiscreteMeasure,
    GaussianSpec, MeasureSpec, TensorGrid,
};
pub use metrics::{caffarelli_bound, chewi_pooladian_bound, l2_mu_gap, sup_gap_on_grid, CompactBallSpec};
pub use ratelab::{
    expansion_check, fit_loglog_slope, run_gaussian_sweep, run_sinkhorn_sweep, verify_envelope, EnvelopeForm, GapField,
    RateFit, SinkhornSweepParams, SweepRecord,
};
pub use sinkhorn::{
    conditional_weights, entropic_hessian_eval, entropic_map_eval, phi_eps_eval, plan_density, schrodinger_residual,
    sinkhorn_solve, DualPotentials, EntropicPotential, SinkhornOptions, SinkhornSolver,
};
