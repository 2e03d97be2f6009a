//! Split feasibility: find `x ∈ C` with `Ax ∈ Q`, for closed and possibly
//! non-convex `C` and `Q`.
//!
//! The crate provides a catalog of sets with exact projections, the model
//! objectives, seven first-order algorithms plus a multiple-sets CQ variant,
//! and certificates that check the descent inequalities behind their
//! convergence proofs on recorded traces.
//!
//! ```
//! use splitfeas::{generate, run, Algorithm, GeneratorSpec, InitialPoint, SetFamily, SolverConfig};
//!
//! let problem = generate(&GeneratorSpec::new(6, 4, SetFamily::Ball, SetFamily::Box, 7)).unwrap();
//! let config = SolverConfig::defaults(Algorithm::CqSf1p, &problem).unwrap();
//! let init = InitialPoint::default_for(Algorithm::CqSf1p, &problem, vec![0.0; 6]).unwrap();
//! let trace = run(&problem, &config, &init).unwrap();
//! assert!(trace.final_max_residual() <= config.residual_tol);
//! ```

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod linops;
pub mod objectives;
pub mod problems;
pub mod sets;
pub mod solvers;
pub mod vecops;

pub use diagnostics::{
    c2_witness, certify_all, certify_c1, certify_c2, certify_c3, certify_convergence,
    certify_lagrangian_decrease, certify_multiplier_identity, C2Witness, CertificateReport,
    CertificationOutcome, Condition, ConvergenceSummary,
};
pub use error::{Error, Result};
pub use linops::{check_table_requirements, LinearMap, RequirementReport, SpectralSummary};
pub use objectives::{
    eval_augmented_lagrangian, eval_f1_penalized, eval_f2_sf4, eval_sf3, residuals, Model,
    ObjectiveValue, ProblemInstance,
};
pub use problems::{generate, load_problem, save_problem, GeneratorSpec, SetFamily};
pub use sets::SetSpec;
pub use solvers::{
    run, Algorithm, InitialPoint, IterateState, IterateTrace, NMode, SolverConfig, Termination,
    TraceRecord,
};
