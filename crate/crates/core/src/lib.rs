//! Vacuum correlations of two cavity fields coupled through a movable wall.

pub mod continuum;
pub mod error;
pub mod model;
pub mod oracle;
pub mod perturb;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{Cavity, CouplingModel, ModeSet, ModelConfig, PhaseConvention, PhysicalParams, Units};
pub use perturb::{CorrelationResult, Diagnostics, Method, PerturbativeState};
