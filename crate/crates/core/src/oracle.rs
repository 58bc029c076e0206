//! Exact diagonalization on a truncated Fock space.
//!
//! Matrix elements come from ladder-operator algebra alone, so the results
//! are an independent check of the perturbative amplitudes.

mod basis;
mod eigen;
mod hamiltonian;
mod measure;
mod validate;

pub use basis::{FockBasis, FockBasisState, TruncationSpec};
pub use eigen::{apply, ground_state, GroundState, DENSE_LIMIT};
pub use hamiltonian::{build_hamiltonian, ExactSystem, DEFAULT_BUDGET};
pub use measure::{measure_correlation, ExactMeasurement};
pub use validate::{run_lambda_ladder, LadderConfig, LadderReport, LadderRow};
