//! Absorption spectra, vibronic coherence and cavity-modified sidebands of a
//! molecule whose vibration is driven by an infrared field, in closed form
//! and by brute-force integration of the master equation.
//!
//! The closed-form modules are generic over `f32`/`f64`; the oracle is
//! `f64` only. Aliases for the common `f64` instantiations live at the root.

pub mod cavity;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod oracle;
pub mod params;
pub mod scalar;
pub mod specfun;
pub mod spectra;
pub mod warning;

pub use error::{Error, Result};
pub use scalar::Real;
pub use warning::{Flagged, Warning};

pub type MoleculeParams64 = params::MoleculeParams<f64>;
pub type DriveParams64 = params::DriveParams<f64>;
pub type ProbeParams64 = params::ProbeParams<f64>;
pub type CavityParams64 = params::CavityParams<f64>;
pub type TruncationPolicy64 = params::TruncationPolicy<f64>;
pub type Spectrum64 = spectra::Spectrum<f64>;
pub type SpectrumModel64 = spectra::SpectrumModel<f64>;
pub type CoherenceTrace64 = dynamics::CoherenceTrace<f64>;
