//! Random-field Ising model on the square lattice: exact spectra of two
//! annealing drivers, Bethe-cluster mean-field annealing (quantum and
//! thermal), exact classical ground states, and an experiment harness.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod bethe_qa;
pub mod bethe_sa;
pub mod error;
pub mod exact_gs;
pub mod format;
pub mod harness;
pub mod linalg;
pub mod maxflow;
pub mod model;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{
    classical_energy, generate_instance, neighbor_list, Boundary, Instance, KineticKind, Schedule, Scheme,
    SpinConfiguration,
};
pub use scalar::Real;

pub type RfimInstance = Instance<f64>;
pub type HamiltonianOperator = spectral::HamiltonianOperator<f64>;
pub type Eigenpair = spectral::Eigenpair<f64>;
pub type SpectralTrace = spectral::SpectralTrace<f64>;
pub type CharTimeReport = spectral::CharTimeReport<f64>;
pub type MagnetizationField = bethe_qa::MagnetizationField<f64>;
pub type ClusterProblem = bethe_qa::ClusterProblem<f64>;
pub type AnnealResult = bethe_qa::AnnealResult<f64>;
pub type GroundStateResult = exact_gs::GroundStateResult<f64>;

pub type RfimInstance32 = Instance<f32>;
pub type SpectralTrace32 = spectral::SpectralTrace<f32>;
pub type MagnetizationField32 = bethe_qa::MagnetizationField<f32>;
