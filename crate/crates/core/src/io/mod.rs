//! File formats: MPS input, the perturbation sidecar, and results output.

pub mod mps;
pub mod perturb;
pub mod results;

use thiserror::Error;

pub use mps::{parse_mps, NamedLp};
pub use perturb::{assemble, PerturbationSpec};
pub use results::{emit_results, ResultsDocument};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("names not defined by the LP: {}", .0.join(", "))]
    Assembly(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads an MPS file and its perturbation sidecar into a parametric LP.
pub fn load_problem(
    mps: &std::path::Path,
    perturb: &std::path::Path,
) -> Result<crate::model::ParametricLp, IoError> {
    let lp = parse_mps(&std::fs::read_to_string(mps)?)?;
    let spec = PerturbationSpec::from_json(&std::fs::read_to_string(perturb)?)?;
    assemble(&lp, &spec)
}
