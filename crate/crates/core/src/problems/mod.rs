//! Instance generation and the problem / trace file formats.

mod format;
mod generator;

pub use format::{
    load_problem, load_trace_json, parse_trace_csv, problem_digest, problem_from_json,
    problem_to_json, save_problem, save_trace_json, trace_to_csv, write_trace_csv, CsvRow,
    FORMAT_VERSION, TRACE_CSV_HEADER,
};
pub use generator::{default_spectrum, generate, random_orthogonal, GeneratorSpec, SetFamily};
