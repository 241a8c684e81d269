//! Brute-force Lindblad master-equation integrator on the truncated
//! electronic ⊗ vibrational (⊗ cavity) Hilbert space.
//!
//! This module is deliberately independent of the closed-form modules: it
//! only shares the parameter types, and is used to validate them. It works
//! in `f64` throughout.

mod displacement;
mod hilbert;
mod integrate;
mod model;
mod regression;
mod state;
mod steady;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix over the truncated space.
pub type CMatrix = DMatrix<Complex64>;

pub use displacement::{displacement_operator, displacement_overlap_oracle};
pub use hilbert::{HilbertConfig, Operators};
pub use integrate::{integrate, Diagnostics, IntegrationConfig, Method, Observables, Trajectory};
pub use model::{build_hamiltonian, lindblad_rhs, MasterEquation, Probe};
pub use regression::displacement_correlation_oracle;
pub use state::DensityMatrix;
pub use steady::{spectrum_oracle, steady_state, OracleSpectrum, SteadyState};
