// SPDX-License-Identifier: Apache-2.0
//! Sampled fields, Gaussian source models and the hard time aperture.
//!
//! Units are normalized so that the source bandwidth is `sigma` and the
//! carrier sits at `omega0`. Time-domain envelopes carry the carrier as
//! `exp(i omega0 t)`; spectra are centered on `omega0`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_finite, require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
    Position,
    Wavevector,
}

impl Domain {
    /// Fourier-conjugate domain.
    pub fn conjugate(self) -> Domain {
        match self {
            Domain::Time => Domain::Frequency,
            Domain::Frequency => Domain::Time,
            Domain::Position => Domain::Wavevector,
            Domain::Wavevector => Domain::Position,
        }
    }

    /// Time and wavevector play the role of the "time-like" coordinate of
    /// the processor; frequency and position are "spectral".
    pub fn is_temporal(self) -> bool {
        matches!(self, Domain::Time | Domain::Wavevector)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Domain::Time => "time",
            Domain::Frequency => "frequency",
            Domain::Position => "position",
            Domain::Wavevector => "wavevector",
        };
        f.write_str(s)
    }
}

/// Uniform sampling grid `x_j = start + j * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        require_finite("start", start)?;
        require_positive("step", step)?;
        if len < 2 {
            return Err(Error::Grid(format!("need at least 2 samples, got {len}")));
        }
        Ok(Axis { start, step, len })
    }

    /// `len` points covering `[-half_span, half_span)`.
    pub fn centered(len: usize, half_span: f64) -> Result<Self> {
        require_positive("half_span", half_span)?;
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::Grid(format!(
                "centered grid needs an even length, got {len}"
            )));
        }
        let step = 2.0 * half_span / len as f64;
        Axis::new(-(len as f64 / 2.0) * step, step, len)
    }

    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |j| self.coord(j))
    }

    pub fn span(&self) -> f64 {
        self.step * self.len as f64
    }

    pub fn end(&self) -> f64 {
        self.coord(self.len - 1)
    }

    /// True when `x_j -> -x_j` maps the grid onto itself as `j -> (N - j) mod N`.
    pub fn is_symmetric(&self) -> bool {
        self.len.is_multiple_of(2)
            && (self.start + self.len as f64 / 2.0 * self.step).abs() <= 1e-9 * self.step
    }

    /// Centered grid of the discrete Fourier conjugate variable.
    pub fn conjugate(&self) -> Axis {
        let step = 2.0 * PI / (self.len as f64 * self.step);
        Axis {
            start: -((self.len / 2) as f64) * step,
            step,
            len: self.len,
        }
    }
}

/// Default time grid: 4096 points on `[-8, 8)` in units of `1/sigma`.
pub fn default_time_axis() -> Axis {
    Axis::centered(4096, 8.0).expect("static grid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub domain: Domain,
    pub start: f64,
    pub step: f64,
    pub samples: Vec<Complex64>,
}

impl SampledField {
    pub fn new(domain: Domain, start: f64, step: f64, samples: Vec<Complex64>) -> Result<Self> {
        Axis::new(start, step, samples.len())?;
        Ok(SampledField {
            domain,
            start,
            step,
            samples,
        })
    }

    pub fn from_fn(domain: Domain, axis: Axis, f: impl Fn(f64) -> Complex64) -> Self {
        SampledField {
            domain,
            start: axis.start,
            step: axis.step,
            samples: axis.coords().map(f).collect(),
        }
    }

    pub fn zeros(domain: Domain, axis: Axis) -> Self {
        SampledField {
            domain,
            start: axis.start,
            step: axis.step,
            samples: vec![Complex64::new(0.0, 0.0); axis.len],
        }
    }

    pub fn axis(&self) -> Axis {
        Axis {
            start: self.start,
            step: self.step,
            len: self.samples.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    pub fn coord(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    /// Riemann sum of `|u|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.step
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    /// `<self|other>` as a Riemann sum.
    pub fn inner(&self, other: &SampledField) -> Complex64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.step
    }

    pub fn scaled(mut self, k: Complex64) -> Self {
        for s in &mut self.samples {
            *s *= k;
        }
        self
    }

    /// `u(-x)` on a symmetric grid.
    pub fn reflected(&self) -> Result<SampledField> {
        if !self.axis().is_symmetric() {
            return Err(Error::Grid(
                "reflection needs a grid centered on zero".into(),
            ));
        }
        let n = self.len();
        let samples = (0..n).map(|j| self.samples[(n - j) % n]).collect();
        Ok(SampledField {
            samples,
            ..self.clone()
        })
    }

    pub(crate) fn require_domain(&self, expected: Domain) -> Result<()> {
        if self.domain == expected {
            Ok(())
        } else {
            Err(Error::DomainMismatch {
                expected: domain_name(expected),
                found: self.domain,
            })
        }
    }
}

pub(crate) fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::Time => "time",
        Domain::Frequency => "frequency",
        Domain::Position => "position",
        Domain::Wavevector => "wavevector",
    }
}

/// Real-valued density sampled on a uniform grid (probability or
/// information per unit coordinate).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDensity {
    pub domain: Domain,
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl SampledDensity {
    pub fn axis(&self) -> Axis {
        Axis {
            start: self.start,
            step: self.step,
            len: self.values.len(),
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step
    }

    /// Integral restricted to coordinates where `keep` is true.
    pub fn integral_where(&self, keep: impl Fn(f64) -> bool) -> f64 {
        let axis = self.axis();
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| keep(axis.coord(*j)))
            .map(|(_, v)| v)
            .sum::<f64>()
            * self.step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub sigma: f64,
    pub omega0: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        GaussianParams {
            sigma: 1.0,
            omega0: 0.0,
        }
    }
}

impl GaussianParams {
    pub fn new(sigma: f64, omega0: f64) -> Result<Self> {
        let p = GaussianParams { sigma, omega0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sigma", self.sigma)?;
        require_finite("omega0", self.omega0)
    }

    /// Spectral amplitude, `(sqrt(2 pi) sigma)^(-1/2) exp(-(w - w0)^2 / 4 sigma^2)`.
    pub fn amplitude(&self, omega: f64) -> f64 {
        let x = omega - self.omega0;
        (2.0 * PI).sqrt().recip().sqrt() / self.sigma.sqrt()
            * (-x * x / (4.0 * self.sigma * self.sigma)).exp()
    }

    /// Temporal envelope magnitude, `(2 sigma^2 / pi)^(1/4) exp(-sigma^2 t^2)`.
    pub fn envelope(&self, t: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (2.0 * s2 / PI).powf(0.25) * (-s2 * t * t).exp()
    }
}

fn require_spectral_span(params: &GaussianParams, axis: &Axis) -> Result<()> {
    let lo = params.omega0 - 6.0 * params.sigma;
    let hi = params.omega0 + 6.0 * params.sigma;
    if axis.start > lo || axis.end() < hi {
        return Err(Error::Grid(format!(
            "spectral grid [{}, {}] does not cover omega0 +- 6 sigma",
            axis.start,
            axis.end()
        )));
    }
    Ok(())
}

fn require_temporal_span(params: &GaussianParams, axis: &Axis) -> Result<()> {
    let reach = 3.0 / params.sigma;
    if axis.start > -reach || axis.end() < reach {
        return Err(Error::Grid(format!(
            "time grid [{}, {}] does not cover +- 3 / sigma",
            axis.start,
            axis.end()
        )));
    }
    Ok(())
}

pub fn gaussian_spectrum(params: &GaussianParams, axis: &Axis) -> Result<SampledField> {
    params.validate()?;
    require_spectral_span(params, axis)?;
    Ok(SampledField::from_fn(Domain::Frequency, *axis, |w| {
        Complex64::new(params.amplitude(w), 0.0)
    }))
}

/// First Hermite-Gauss mode, `((w - w0) / sigma) * gaussian`.
pub fn hermite_gauss1_spectrum(params: &GaussianParams, axis: &Axis) -> Result<SampledField> {
    params.validate()?;
    require_spectral_span(params, axis)?;
    Ok(SampledField::from_fn(Domain::Frequency, *axis, |w| {
        Complex64::new(
            (w - params.omega0) / params.sigma * params.amplitude(w),
            0.0,
        )
    }))
}

pub fn gaussian_pulse(params: &GaussianParams, axis: &Axis) -> Result<SampledField> {
    params.validate()?;
    require_temporal_span(params, axis)?;
    Ok(SampledField::from_fn(Domain::Time, *axis, |t| {
        Complex64::from_polar(params.envelope(t), params.omega0 * t)
    }))
}

/// Time-domain counterpart of [`hermite_gauss1_spectrum`]: `2 i sigma t * gaussian`.
pub fn hermite_gauss1_pulse(params: &GaussianParams, axis: &Axis) -> Result<SampledField> {
    params.validate()?;
    require_temporal_span(params, axis)?;
    Ok(SampledField::from_fn(Domain::Time, *axis, |t| {
        Complex64::from_polar(params.envelope(t), params.omega0 * t)
            * Complex64::new(0.0, 2.0 * params.sigma * t)
    }))
}

/// Two equal-brightness incoherent Gaussian sources separated by
/// `epsilon * sigma`, with relative phase `phi` for a single realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSourceSpec {
    pub epsilon: f64,
    pub phi: f64,
    #[serde(flatten)]
    pub gaussian: GaussianParams,
    /// Mean photon number per coherence time, only used for shot sampling.
    pub mean_photons: f64,
}

impl Default for TwoSourceSpec {
    fn default() -> Self {
        TwoSourceSpec {
            epsilon: 0.5,
            phi: 0.0,
            gaussian: GaussianParams::default(),
            mean_photons: 0.69,
        }
    }
}

impl TwoSourceSpec {
    pub fn new(epsilon: f64, gaussian: GaussianParams) -> Result<Self> {
        let s = TwoSourceSpec {
            epsilon,
            gaussian,
            ..Default::default()
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.gaussian.validate()?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(invalid(
                "epsilon",
                format!("must be finite and >= 0, got {}", self.epsilon),
            ));
        }
        require_finite("phi", self.phi)?;
        if !(self.mean_photons.is_finite() && self.mean_photons >= 0.0) {
            return Err(invalid("mean_photons", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn separation(&self) -> f64 {
        self.epsilon * self.gaussian.sigma
    }
}

/// `S_phi(t) = psi(t) sqrt(2) cos((dw t - phi)/2) exp(i phi/2)`, i.e. the
/// coherent sum of the two displaced sources with unit total norm on average.
pub fn synthesize_two_source(spec: &TwoSourceSpec, axis: &Axis) -> Result<SampledField> {
    spec.validate()?;
    require_temporal_span(&spec.gaussian, axis)?;
    let g = spec.gaussian;
    let dw = spec.separation();
    let half_phase = Complex64::from_polar(1.0, spec.phi / 2.0);
    Ok(SampledField::from_fn(Domain::Time, *axis, |t| {
        let env = g.envelope(t) * 2f64.sqrt() * ((dw * t - spec.phi) / 2.0).cos();
        Complex64::from_polar(env, g.omega0 * t) * half_phase
    }))
}

/// The two mutually incoherent components `psi(t) exp(+-i dw t / 2) / sqrt(2)`.
/// Summing any quadratic observable over them gives its exact average over
/// a uniformly distributed relative phase.
pub fn two_source_components(spec: &TwoSourceSpec, axis: &Axis) -> Result<[SampledField; 2]> {
    spec.validate()?;
    require_temporal_span(&spec.gaussian, axis)?;
    let g = spec.gaussian;
    let dw = spec.separation();
    let make = |sign: f64| {
        SampledField::from_fn(Domain::Time, *axis, |t| {
            Complex64::from_polar(
                g.envelope(t) / 2f64.sqrt(),
                g.omega0 * t + sign * dw * t / 2.0,
            )
        })
    };
    Ok([make(1.0), make(-1.0)])
}

/// Equally spaced relative phases `2 pi k / K`.
pub fn phase_samples(k: usize) -> Vec<f64> {
    (0..k).map(|j| 2.0 * PI * j as f64 / k as f64).collect()
}

/// Hard time aperture: blocks `|t| < t_a / sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureSpec {
    /// Half-width of the blocked window in units of `1/sigma`.
    pub t_a_sigma: f64,
    pub sigma: f64,
}

impl Default for ApertureSpec {
    fn default() -> Self {
        ApertureSpec {
            t_a_sigma: 0.564,
            sigma: 1.0,
        }
    }
}

impl ApertureSpec {
    pub fn new(t_a_sigma: f64, sigma: f64) -> Result<Self> {
        let a = ApertureSpec { t_a_sigma, sigma };
        a.validate()?;
        Ok(a)
    }

    pub fn open() -> Self {
        ApertureSpec {
            t_a_sigma: 0.0,
            sigma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sigma", self.sigma)?;
        if !(self.t_a_sigma.is_finite() && self.t_a_sigma >= 0.0) {
            return Err(invalid(
                "t_a_sigma",
                format!("must be finite and >= 0, got {}", self.t_a_sigma),
            ));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        self.t_a_sigma / self.sigma
    }

    #[inline]
    pub fn transmits(&self, t: f64) -> bool {
        t.abs() >= self.half_width()
    }
}

pub fn apply_aperture(field: &SampledField, aperture: &ApertureSpec) -> Result<SampledField> {
    aperture.validate()?;
    field.require_domain(Domain::Time)?;
    let mut out = field.clone();
    for (j, s) in out.samples.iter_mut().enumerate() {
        if !aperture.transmits(field.coord(j)) {
            *s = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}
