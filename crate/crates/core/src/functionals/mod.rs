//! The Aubin–Yau functional I_k, Donaldson's P̃_k, the Mabuchi K-energy, the
//! geodesic functional f_k on Gram matrices, and evaluators for the chain of
//! inequalities between them.

mod aubin;
mod geodesic;
mod kenergy;
mod lemmas;
mod path;
mod report;

pub use aubin::{
    aubin_yau, aubin_yau_between, l_difference, l_functional, lemma_conv1_check, lemma_conv1_check_with, p_tilde,
    p_tilde_with,
};
pub use geodesic::{
    f_geodesic, f_geodesic_from, f_prime_surrogate, lambda_coefficients, GeodesicProfile, GeodesicSpec,
    LambdaCoefficients, GROUP_ACTION_SIGN,
};
pub use kenergy::k_energy;
pub use lemmas::{
    lemma_step1_gap, lemma_step2, lemma_step3_gap, theorem1_evaluate, theorem1_suite, ChainTolerances, Step2Report,
};
pub use path::{PathKind, PathSpec, DEFAULT_T_ORDER};
pub use report::{FunctionalReport, NamedFit, ReportEntry};
