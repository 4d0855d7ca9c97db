// SPDX-License-Identifier: Apache-2.0
//! Closed-form port probabilities of the apertured interferometer for two
//! incoherent Gaussian sources, with imperfect visibilities and a lossy
//! second port.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_unit_interval, Result};
use crate::fft;
use crate::signals::{
    apply_aperture, two_source_components, ApertureSpec, Axis, Domain, GaussianParams,
    SampledDensity, TwoSourceSpec,
};
use crate::special::{erfc, erfc_real};

/// Device imperfections: visibilities of the two ports, transmission of the
/// second port and the aperture half-width in units of `1/sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceCalibration {
    pub v_minus: f64,
    pub v_plus: f64,
    pub eta_plus: f64,
    pub t_a_sigma: f64,
}

impl Default for DeviceCalibration {
    fn default() -> Self {
        DeviceCalibration::experimental()
    }
}

impl DeviceCalibration {
    /// Values characterized on the experimental setup.
    pub fn experimental() -> Self {
        DeviceCalibration {
            v_minus: 0.9751,
            v_plus: 0.764,
            eta_plus: 0.719,
            t_a_sigma: 0.564,
        }
    }

    pub fn ideal() -> Self {
        DeviceCalibration {
            v_minus: 1.0,
            v_plus: 1.0,
            eta_plus: 1.0,
            t_a_sigma: 0.0,
        }
    }

    /// Lossless, unapertured device with equal visibility `v` in both ports.
    pub fn symmetric(v: f64) -> Self {
        DeviceCalibration {
            v_minus: v,
            v_plus: v,
            eta_plus: 1.0,
            t_a_sigma: 0.0,
        }
    }

    pub fn with_aperture(mut self, t_a_sigma: f64) -> Self {
        self.t_a_sigma = t_a_sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_unit_interval("v_minus", self.v_minus)?;
        require_unit_interval("v_plus", self.v_plus)?;
        require_unit_interval("eta_plus", self.eta_plus)?;
        if !(self.t_a_sigma.is_finite() && self.t_a_sigma >= 0.0) {
            return Err(invalid(
                "t_a_sigma",
                format!("must be finite and >= 0, got {}", self.t_a_sigma),
            ));
        }
        Ok(())
    }

    pub fn aperture(&self, sigma: f64) -> ApertureSpec {
        ApertureSpec {
            t_a_sigma: self.t_a_sigma,
            sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortProbabilities {
    pub p_minus: f64,
    pub p_plus: f64,
    /// Everything not detected in either port (aperture, loss, third port).
    pub p_cross: f64,
}

/// `f(a, eps) = [erfc((4a - i eps)/(2 sqrt 2)) + erfc((4a + i eps)/(2 sqrt 2))] / 2`.
pub fn aux_f(t_a_sigma: f64, epsilon: f64) -> f64 {
    let z = Complex64::new(4.0 * t_a_sigma, epsilon) / (2.0 * SQRT_2);
    // The two terms are complex conjugates.
    erfc(z).re
}

/// Fraction of the source flux passing the aperture, `erfc(sqrt 2 a)`.
pub fn aperture_transmission(t_a_sigma: f64) -> f64 {
    erfc_real(SQRT_2 * t_a_sigma)
}

/// Second moment of `psi^2` outside the aperture in units of `1/sigma^2`:
/// `[erfc(sqrt 2 a) + 2 sqrt(2/pi) a exp(-2 a^2)] / 4`.
pub fn aperture_second_moment(t_a_sigma: f64) -> f64 {
    let a = t_a_sigma;
    (aperture_transmission(a) + 2.0 * (2.0 / PI).sqrt() * a * (-2.0 * a * a).exp()) / 4.0
}

/// Overlap `g(eps) = \int_{|t|>a} psi^2 cos(eps t) = exp(-eps^2/8) f(a, eps)`.
pub fn overlap(t_a_sigma: f64, epsilon: f64) -> f64 {
    (-epsilon * epsilon / 8.0).exp() * aux_f(t_a_sigma, epsilon)
}

/// Below this separation `E - g` is taken from its Taylor expansion to avoid
/// cancellation.
const SMALL_EPS: f64 = 1e-4;

/// `E - g(eps)` without cancellation at small `eps`.
pub(crate) fn overlap_deficit(t_a_sigma: f64, epsilon: f64) -> f64 {
    if epsilon.abs() < SMALL_EPS {
        let m2 = aperture_second_moment(t_a_sigma);
        m2 * epsilon * epsilon / 2.0 - epsilon.powi(4) * moment4(t_a_sigma) / 24.0
    } else {
        aperture_transmission(t_a_sigma) - overlap(t_a_sigma, epsilon)
    }
}

fn moment4(t_a_sigma: f64) -> f64 {
    // psi^2 is a centered normal of variance 1/4; u = 2t.
    let b = 2.0 * t_a_sigma;
    let phi = (-b * b / 2.0).exp() / (2.0 * PI).sqrt();
    let tail0 = erfc_real(b / SQRT_2);
    let tail2 = tail0 + 2.0 * b * phi;
    let tail4 = 3.0 * tail2 + 2.0 * b.powi(3) * phi;
    tail4 / 16.0
}

/// `p- = (E - V- g)/2`, `p+ = eta (E + V+ g)/2`, `px = 1 - p- - p+`.
///
/// Calibrations whose detected ports would exceed the input flux at
/// `epsilon` (possible when `eta V+ > V-`) are rejected.
pub fn port_probabilities(epsilon: f64, cal: &DeviceCalibration) -> Result<PortProbabilities> {
    cal.validate()?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid(
            "epsilon",
            format!("must be finite and >= 0, got {epsilon}"),
        ));
    }
    let p = port_probabilities_unchecked(epsilon, cal);
    if p.p_cross < 0.0 {
        return Err(invalid(
            "cal",
            format!(
                "p- + p+ = {} exceeds one at eps = {epsilon}",
                p.p_minus + p.p_plus
            ),
        ));
    }
    Ok(p)
}

pub(crate) fn port_probabilities_unchecked(
    epsilon: f64,
    cal: &DeviceCalibration,
) -> PortProbabilities {
    let a = cal.t_a_sigma;
    let e = aperture_transmission(a);
    let g = overlap(a, epsilon);
    let p_minus = if cal.v_minus == 1.0 {
        0.5 * overlap_deficit(a, epsilon)
    } else {
        0.5 * (e - cal.v_minus * g)
    };
    let p_plus = 0.5 * cal.eta_plus * (e + cal.v_plus * g);
    PortProbabilities {
        p_minus,
        p_plus,
        p_cross: 1.0 - p_minus - p_plus,
    }
}

/// Spectrally resolved port densities `(p-(w), p+(w))`, exactly averaged
/// over the relative source phase. `axis` is the time grid used to build
/// the fields (in units of `1/sigma`); the densities integrate to
/// [`port_probabilities`].
pub fn port_distributions(
    epsilon: f64,
    cal: &DeviceCalibration,
    axis: &Axis,
) -> Result<(SampledDensity, SampledDensity)> {
    cal.validate()?;
    let spec = TwoSourceSpec::new(epsilon, GaussianParams::default())?;
    let comps = two_source_components(&spec, axis)?;
    let aperture = cal.aperture(1.0);
    let conj = axis.conjugate();
    let mut minus = vec![0.0; axis.len];
    let mut plus = vec![0.0; axis.len];
    for c in &comps {
        let direct = fft::forward(&apply_aperture(c, &aperture)?)?;
        let mirrored = fft::forward(&apply_aperture(&c.reflected()?, &aperture)?)?;
        for k in 0..axis.len {
            let (x, y) = (direct.samples[k], mirrored.samples[k]);
            let incoherent = 0.25 * (x.norm_sqr() + y.norm_sqr());
            let cross = 0.5 * (x * y.conj()).re;
            minus[k] += incoherent - cal.v_minus * cross;
            plus[k] += cal.eta_plus * (incoherent + cal.v_plus * cross);
        }
    }
    let wrap = |values| SampledDensity {
        domain: Domain::Frequency,
        start: conj.start,
        step: conj.step,
        values,
    };
    Ok((wrap(minus), wrap(plus)))
}

/// `sqrt(8/pi) exp(-2a^2) sin(a eps) exp(eps^2/8) + eps f(a, eps)`, the
/// bracket whose square (times `exp(-eps^2/4)`) is the squared derivative
/// `(4 dg/deps)^2`.
pub(crate) fn derivative_bracket(t_a_sigma: f64, epsilon: f64) -> f64 {
    let a = t_a_sigma;
    (8.0 / PI).sqrt() * (-2.0 * a * a + epsilon * epsilon / 8.0).exp() * (a * epsilon).sin()
        + epsilon * aux_f(a, epsilon)
}

/// `-dg/deps`.
pub fn overlap_slope(t_a_sigma: f64, epsilon: f64) -> f64 {
    (-epsilon * epsilon / 8.0).exp() * derivative_bracket(t_a_sigma, epsilon) / 4.0
}
