//! Update rules and driver loops for the split-feasibility algorithms.

mod config;
mod inner;
mod run;
mod steps;

pub use config::{Algorithm, NMode, ProblemSpectrum, SolverConfig};
pub use run::{
    initial_state, make_record, run, run_with, InitialPoint, IterateTrace, Termination, TraceRecord,
};
pub use steps::{
    step_am_sf1p, step_cq_multiset, step_cq_sf1p, step_padmm_sf1, step_pg_sf1p, step_pg_sf3,
    step_wpadmm_sf4, IterateState, Stepper,
};
