//! Link-level simulator for mmWave air-to-ground downlinks.
//!
//! An airliner or high-altitude platform carries an M x M half-wavelength
//! planar array and serves ground users in a frequency-reuse micro-cell
//! layout. Beamformers are designed from user positions only (no channel
//! state): plain null steering, null steering with derivative constraints,
//! and a minimum-power distortionless design. The library samples Rician
//! channels, evaluates closed-form SINR moments, and reports spectral and
//! area spectral efficiency, with optional Doppler-compensation-error and
//! position-mismatch impairments.
//!
//! Everything is generic over the scalar type ([`scalar::Real`], implemented
//! for `f32` and `f64`); the aliases below fix `f64` for ordinary use.

pub mod array;
pub mod beamform;
pub mod channel;
pub mod config;
pub mod geometry;
pub mod impairments;
pub mod metrics;
pub mod scalar;
pub mod sim;

/// Complex scalar used throughout (`nalgebra`'s re-export of `num_complex`).
pub type Complex<T> = nalgebra::Complex<T>;

pub type C32 = Complex<f32>;
pub type C64 = Complex<f64>;

pub type ArrayGeometry64 = array::ArrayGeometry<f64>;
pub type SteeringBank64 = beamform::SteeringBank<f64>;
pub type LinkBudget64 = channel::LinkBudget<f64>;
pub type Scenario64 = sim::Scenario<f64>;
pub type CapacityReport64 = metrics::CapacityReport<f64>;

/// Speed of light in m/s as used by the link-budget equations.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
