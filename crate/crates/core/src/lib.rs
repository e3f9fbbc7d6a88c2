//! Exact state-level simulation of the HHL linear-system algorithm and the
//! quantum resources (entanglement, coherence, success probability) carried by
//! each of its stages, including quenched averages under rotation disorder.

pub mod disorder;
pub mod error;
pub mod hhl;
pub mod resources;
pub mod tensor;

pub use error::{Error, Result};
pub use hhl::{
    condition_number, solution, spectral_decompose, spectral_decompose_analytic, CircuitConstant,
    LinearSystem, Solution, SpectralData, Stage, TripartiteState,
};
pub use resources::{report, ResourceReport};
pub use tensor::{CMatrix, CVector, SubsystemDims};
