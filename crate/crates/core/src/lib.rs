#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod models;
pub mod observables;
pub mod pauli;
pub mod rmt;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};
pub use models::{ModelSpec, Variant};
pub use observables::{HamiltonianSource, TrajectoryJob, TrajectoryRecord};
pub use rmt::{Ensemble, EnsembleSpec};
pub use scalar::Real;
pub use states::Bipartition;

pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Hamiltonian = models::OperatorSum<f64>;
pub type State = states::StateVector<f64>;
pub type TimePropagator = evolve::Propagator<f64>;
pub type Complex64 = num_complex::Complex<f64>;
