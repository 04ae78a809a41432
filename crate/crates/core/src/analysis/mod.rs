//! Restricted constants, recovery checks and the OMPR progress inequality.

mod brute;
mod constants;
mod progress;
mod recovery;

pub use brute::brute_force_best_sparse;
pub use constants::{
    binomial, brute_force_restricted_constants, brute_force_rho2_plus, logistic_constant_bounds,
    rip_tradeoff_bound, sampled_restricted_constants, ConstantsMethod, RestrictedConstants,
    DEFAULT_THETA, MAX_SUPPORTS,
};
pub use progress::{verify_ompr_progress, ProgressCase, ProgressCheck};
pub use recovery::{
    check_solution_recovery, check_support_recovery, compute_rgoc, solution_recovery_bound,
    RecoveryAssessment, Verdict,
};
