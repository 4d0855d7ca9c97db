// SPDX-License-Identifier: Apache-2.0
//! Shared inputs for the criterion benchmarks.

use tfsr_core::signals::{default_time_axis, synthesize_two_source};
use tfsr_core::{GaussianParams, SampledField, TwoSourceSpec};

/// Two-source pulse on the default grid.
pub fn two_source_pulse(epsilon: f64, phi: f64) -> SampledField {
    let spec = TwoSourceSpec::new(epsilon, GaussianParams::default())
        .expect("valid separation")
        .with_phi(phi);
    synthesize_two_source(&spec, &default_time_axis()).expect("default grid covers the pulse")
}
