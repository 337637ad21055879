//! Gaussian wave packets and beams reflecting off a potential step.
//!
//! The crate pairs two independent descriptions of the reflected packet:
//! a quadrature synthesis over the spectral distribution ([`synth`]) that
//! uses the exact plane-wave coefficients ([`coeffs`]), and the closed-form
//! first-order shifts ([`analytic`]). The estimators in [`stats`] turn
//! sampled profiles into peak and mean positions, and [`experiments`] runs
//! the parameter sweeps that compare the two.
//!
//! Everything is adimensional: positions in units of the waist `w₀`, wave
//! numbers times `w₀`, time as `τ = ħt/(m w₀²)` and axial distance as
//! `ζ = z/(k w₀²)`. [`params::PhysicalUnits`] is the only place SI units
//! appear.

pub mod analytic;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod experiments;
pub mod params;
pub mod quadrature;
pub mod stats;
pub mod synth;

pub use analytic::{OpticalEquivalent, ShiftKind, ShiftPrediction};
pub use coeffs::{reflection_1d, reflection_3d, transmission_1d, StepCoefficients};
pub use error::{Error, Result};
pub use params::{BeamSpec3D, PacketSpec, PhysicalUnits, Regime};
pub use quadrature::QuadratureRule;
pub use stats::BeamStatistics;
pub use synth::{Beam3d, BeamProfile, FieldSample, Packet1d, QuadSettings, Wave};
