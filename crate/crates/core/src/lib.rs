// SPDX-License-Identifier: Apache-2.0
//! Simulation and analysis of time-frequency super-resolution spectroscopy
//! with a quantum-memory interferometer.
//!
//! Units are normalized to the source bandwidth: `sigma = 1` and the carrier
//! at zero unless stated otherwise. Separations `epsilon` are in units of
//! `sigma`.

pub mod error;
pub mod estimate;
pub mod fft;
pub mod fisher;
pub mod model;
pub mod optimize;
pub mod output;
pub mod phasespace;
pub mod processor;
pub mod signals;
pub mod special;

pub use error::{Error, Result};
pub use estimate::{CountRecord, EstimatorReport};
pub use fisher::{DiNoise, FisherCurve, Port, SpectrometerSpec};
pub use model::{DeviceCalibration, PortProbabilities};
pub use phasespace::{PhaseKind, PhaseProfile, WignerGrid};
pub use processor::{PortAmplitudes, PortCalibration, ProcessorParams};
pub use signals::{
    ApertureSpec, Axis, Domain, GaussianParams, SampledDensity, SampledField, TwoSourceSpec,
};

pub use num_complex::Complex64;
