// SPDX-License-Identifier: Apache-2.0
//! The time-frequency interferometer (PuDTAI) and the direct-imaging
//! spectrometer built from phase-space optics.
//!
//! Simulated chain, for a time-domain input `S(t)`:
//!
//! 1. hard aperture and dual lens `-alpha t|t|/2`, mapping each half of the
//!    pulse to a linear chirp of opposite sign;
//! 2. storage in the spectral (position) domain and a bidirectional grating
//!    `sq(kappa w^2/2 + zeta1)`; its +-1 orders undo the chirps, so the time
//!    halves are brought to focus and interfere near `t = 0`, the readout band
//!    of the first port;
//! 3. whatever remains outside the band is returned to the storage domain and
//!    hit by a second grating `sq(kappa w^2 + zeta2)`, which focuses the
//!    symmetric combination into the band of the second port.
//!
//! The output time axis of both ports carries the Fourier transform of the
//! input halves, scaled by `alpha`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_finite, require_positive, Error, Result};
use crate::fft;
use crate::phasespace::{apply_phase, coordinate_map, PhaseProfile};
use crate::signals::{
    apply_aperture, gaussian_pulse, hermite_gauss1_pulse, two_source_components, ApertureSpec,
    Axis, Domain, GaussianParams, SampledField, TwoSourceSpec,
};

/// Offset that makes the first port dark for symmetric inputs at `theta = 0`.
/// It absorbs the constant phase that the forward and backward transforms
/// around each grating leave between the two grating orders.
const THETA_OFFSET: f64 = 1.5 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessorParams {
    /// Dual-lens chirp rate.
    pub alpha: f64,
    /// Grating chirp; the interferometer focuses when `kappa * alpha = 1`.
    pub kappa: f64,
    /// Lens strength of the direct-imaging spectrometer.
    pub alpha_di: f64,
    /// Frequency-to-position conversion, `z = w / beta`.
    pub beta: f64,
    /// Interferometer phase between the two time halves.
    pub theta: f64,
    pub aperture: ApertureSpec,
    /// Optical carrier, used only to report focal length and distance.
    pub omega0: f64,
    /// Internal grid refinement for the interferometer simulation.
    pub oversample: usize,
    /// Readout band half-width as a fraction of the full time window.
    pub readout_band: f64,
}

impl Default for ProcessorParams {
    fn default() -> Self {
        ProcessorParams {
            alpha: 800.0,
            kappa: 1.0 / 800.0,
            alpha_di: 5.0,
            beta: 1.0,
            theta: 0.0,
            aperture: ApertureSpec::default(),
            omega0: 0.0,
            oversample: 8,
            readout_band: 0.05,
        }
    }
}

impl ProcessorParams {
    /// Focused interferometer with dual-lens strength `alpha`.
    pub fn focused(alpha: f64, aperture: ApertureSpec) -> Self {
        ProcessorParams {
            alpha,
            kappa: 1.0 / alpha,
            aperture,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("alpha", self.alpha)?;
        require_positive("kappa", self.kappa)?;
        require_finite("alpha_di", self.alpha_di)?;
        if self.alpha_di == 0.0 {
            return Err(invalid("alpha_di", "must be non-zero"));
        }
        require_positive("beta", self.beta)?;
        require_finite("theta", self.theta)?;
        require_finite("omega0", self.omega0)?;
        self.aperture.validate()?;
        if self.oversample == 0 {
            return Err(invalid("oversample", "must be >= 1"));
        }
        if !(self.readout_band > 0.0 && self.readout_band < 0.5) {
            return Err(invalid("readout_band", "must lie in (0, 0.5)"));
        }
        Ok(())
    }

    pub fn validate_interferometer(&self) -> Result<()> {
        self.validate()?;
        if (self.kappa * self.alpha - 1.0).abs() >= 1e-9 {
            return Err(invalid(
                "kappa",
                format!(
                    "focusing needs kappa * alpha = 1, got {}",
                    self.kappa * self.alpha
                ),
            ));
        }
        Ok(())
    }

    /// Temporal focal length `omega0 / alpha`.
    pub fn focal_length(&self) -> f64 {
        self.omega0 / self.alpha
    }

    /// Propagation distance `kappa / (omega0 beta^2)`; infinite at zero carrier.
    pub fn propagation_distance(&self) -> f64 {
        self.kappa / (self.omega0 * self.beta * self.beta)
    }

    fn zeta1(&self) -> f64 {
        (self.theta + THETA_OFFSET) / 2.0
    }

    fn zeta2(&self) -> f64 {
        self.theta + THETA_OFFSET
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortAmplitudes {
    pub minus: SampledField,
    pub plus: SampledField,
}

impl PortAmplitudes {
    /// Integrated power in each port, `(P-, P+)`.
    pub fn powers(&self) -> (f64, f64) {
        (self.minus.norm_sqr(), self.plus.norm_sqr())
    }
}

/// Ideal interferometer: `u+-(t) = (1/2) f_A(t) (S(t) +- S(-t))`.
pub fn pudtai_ports_ideal(
    signal: &SampledField,
    aperture: &ApertureSpec,
) -> Result<PortAmplitudes> {
    signal.require_domain(Domain::Time)?;
    let apertured = apply_aperture(signal, aperture)?;
    let mirrored = apertured.reflected()?;
    let combine = |sign: f64| SampledField {
        samples: apertured
            .samples
            .iter()
            .zip(&mirrored.samples)
            .map(|(a, b)| (a + b * sign) * 0.5)
            .collect(),
        ..apertured.clone()
    };
    Ok(PortAmplitudes {
        minus: combine(-1.0),
        plus: combine(1.0),
    })
}

/// Named intermediate field of the simulated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: &'static str,
    pub field: SampledField,
}

pub fn pudtai_pipeline(signal: &SampledField, params: &ProcessorParams) -> Result<PortAmplitudes> {
    run_pipeline(signal, params, None)
}

/// Same as [`pudtai_pipeline`], also returning every intermediate field.
pub fn pudtai_pipeline_traced(
    signal: &SampledField,
    params: &ProcessorParams,
) -> Result<(PortAmplitudes, Vec<Stage>)> {
    let mut stages = Vec::new();
    let ports = run_pipeline(signal, params, Some(&mut stages))?;
    Ok((ports, stages))
}

fn run_pipeline(
    signal: &SampledField,
    params: &ProcessorParams,
    mut trace: Option<&mut Vec<Stage>>,
) -> Result<PortAmplitudes> {
    params.validate_interferometer()?;
    signal.require_domain(Domain::Time)?;
    if !signal.axis().is_symmetric() {
        return Err(Error::Grid(
            "interferometer input must sit on a grid centered on zero".into(),
        ));
    }
    let mut record = |name: &'static str, f: &SampledField| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(Stage {
                name,
                field: f.clone(),
            });
        }
    };

    let fine = fft::upsample(signal, params.oversample)?;
    record("input", &fine);
    let apertured = apply_aperture(&fine, &params.aperture)?;
    record("aperture", &apertured);
    let lensed = apply_phase(&apertured, &PhaseProfile::dual_lens(params.alpha))?;
    record("dual_lens", &lensed);

    check_resolution(&apertured, params)?;
    let spectrum = fft::forward(&lensed)?;
    let beta = params.beta;
    let kappa_z = params.kappa * beta * beta;

    let stored = coordinate_map(&spectrum, beta)?;
    record("stored", &stored);
    let read1 = read_out(&stored, kappa_z, params.zeta1(), beta)?;
    record("grating1", &coordinate_map(&read1, beta)?);

    let half_band = params.readout_band * read1.axis().span();
    let (minus, rest) = split_band(&read1, half_band);
    record("port_minus", &minus);

    let stored2 = coordinate_map(&fft::forward(&rest)?, beta)?;
    let read2 = read_out(&stored2, 2.0 * kappa_z, params.zeta2(), beta)?;
    record("grating2", &coordinate_map(&read2, beta)?);
    let (plus, _) = split_band(&read2, half_band);
    record("port_plus", &plus);

    Ok(PortAmplitudes { minus, plus })
}

/// Power fraction allowed outside the support used in grid checks.
const SPECTRAL_TAIL: f64 = 1e-10;

// Grating on the stored (position) field, then readout back in time.
fn read_out(stored: &SampledField, strength: f64, offset: f64, beta: f64) -> Result<SampledField> {
    let g = apply_phase(stored, &PhaseProfile::bidirectional(strength, offset))?;
    fft::inverse(&coordinate_map(&g, beta)?)
}

// The dual lens sends time t to frequency alpha |t|, which must stay below
// the grid band limit; the local grating wavevector kappa z (2 kappa z for
// the second grating) must stay below the band limit of the stored grid.
fn check_resolution(input: &SampledField, params: &ProcessorParams) -> Result<()> {
    let t_s = fft::support_extent(input, SPECTRAL_TAIL);
    let nyquist = PI / input.step;
    let w_max = params.alpha * t_s;
    if w_max > 0.95 * nyquist {
        return Err(Error::Grid(format!(
            "dual-lens chirp reaches |w| = {w_max:.4}, beyond the grid band limit {nyquist:.4}; \
             raise oversample or lower alpha"
        )));
    }
    // In frequency units the condition reads 2 kappa w_max < T / 2 for any beta.
    let half_window = input.axis().span() / 2.0;
    let delay = 2.0 * params.kappa * w_max;
    if delay > half_window {
        return Err(Error::Grid(format!(
            "grating delay {delay:.4} exceeds the half time window {half_window:.4}"
        )));
    }
    Ok(())
}

fn split_band(field: &SampledField, half_band: f64) -> (SampledField, SampledField) {
    let mut inside = field.clone();
    let mut outside = field.clone();
    for j in 0..field.len() {
        if field.coord(j).abs() < half_band {
            outside.samples[j] = Complex64::new(0.0, 0.0);
        } else {
            inside.samples[j] = Complex64::new(0.0, 0.0);
        }
    }
    (inside, outside)
}

/// Phase-averaged port powers for two incoherent sources, averaging over
/// `k` equally spaced relative phases.
pub fn phase_averaged_powers<F>(
    spec: &TwoSourceSpec,
    axis: &Axis,
    k: usize,
    ports: F,
) -> Result<(f64, f64)>
where
    F: Fn(&SampledField) -> Result<(f64, f64)> + Sync,
{
    if k == 0 {
        return Err(invalid("k", "need at least one phase sample"));
    }
    let phis = crate::signals::phase_samples(k);
    let results: Vec<(f64, f64)> = phis
        .par_iter()
        .map(|&phi| {
            let s = crate::signals::synthesize_two_source(&spec.with_phi(phi), axis)?;
            ports(&s)
        })
        .collect::<Result<_>>()?;
    let (m, p) = results
        .iter()
        .fold((0.0, 0.0), |acc, r| (acc.0 + r.0, acc.1 + r.1));
    Ok((m / k as f64, p / k as f64))
}

/// Exact phase average via the two incoherent source components.
pub fn incoherent_powers<F>(spec: &TwoSourceSpec, axis: &Axis, ports: F) -> Result<(f64, f64)>
where
    F: Fn(&SampledField) -> Result<(f64, f64)> + Sync,
{
    let comps = two_source_components(spec, axis)?;
    let r: Vec<(f64, f64)> = comps.par_iter().map(&ports).collect::<Result<_>>()?;
    Ok((r[0].0 + r[1].0, r[0].1 + r[1].1))
}

/// Per-port throughput of the simulated chain relative to the ideal one,
/// measured on reference inputs that light only one port: the first
/// Hermite-Gauss mode (antisymmetric) for the first port and the Gaussian
/// (symmetric) for the second. Grating orders beyond +-1 and the readout
/// band make these smaller than one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortCalibration {
    pub minus: f64,
    pub plus: f64,
}

pub fn calibrate_ports(
    params: &ProcessorParams,
    axis: &Axis,
    gaussian: &GaussianParams,
) -> Result<PortCalibration> {
    let hg = hermite_gauss1_pulse(gaussian, axis)?;
    let g = gaussian_pulse(gaussian, axis)?;
    let ideal_minus = pudtai_ports_ideal(&hg, &params.aperture)?.powers().0;
    let ideal_plus = pudtai_ports_ideal(&g, &params.aperture)?.powers().1;
    let sim_minus = pudtai_pipeline(&hg, params)?.powers().0;
    let sim_plus = pudtai_pipeline(&g, params)?.powers().1;
    if ideal_minus <= 0.0 || ideal_plus <= 0.0 {
        return Err(Error::Grid(
            "reference input vanishes behind the aperture".into(),
        ));
    }
    Ok(PortCalibration {
        minus: sim_minus / ideal_minus,
        plus: sim_plus / ideal_plus,
    })
}

/// Interferometer phase that minimizes the antisymmetric-port power for the
/// symmetric Gaussian reference, searched within `+-0.3` rad of `theta`.
/// Finite chirp rates leave a small residual phase between the refocused
/// halves; locking absorbs it the way a real device is locked to its dark
/// fringe.
pub fn lock_dark_fringe(
    params: &ProcessorParams,
    axis: &Axis,
    gaussian: &GaussianParams,
) -> Result<f64> {
    params.validate_interferometer()?;
    let g = gaussian_pulse(gaussian, axis)?;
    let leak = |theta: f64| -> f64 {
        let p = ProcessorParams { theta, ..*params };
        pudtai_pipeline(&g, &p).map_or(f64::INFINITY, |ports| ports.powers().0)
    };
    let theta =
        crate::optimize::golden_max(|t| -leak(t), params.theta - 0.3, params.theta + 0.3, 1e-5);
    if !leak(theta).is_finite() {
        return Err(Error::Grid(
            "reference input rejected by the pipeline".into(),
        ));
    }
    Ok(theta)
}

/// Direct-imaging spectrometer: a temporal lens of strength `-2 alpha_di`
/// followed by the matching spectral phase. The output intensity is
/// `2 alpha_di |S~(2 alpha_di t)|^2`.
pub fn qmti_spectrum(signal: &SampledField, params: &ProcessorParams) -> Result<SampledField> {
    params.validate()?;
    signal.require_domain(Domain::Time)?;
    let a = -2.0 * params.alpha_di;
    let w_max = a.abs() * fft::support_extent(signal, SPECTRAL_TAIL);
    if w_max > 0.95 * PI / signal.step {
        return Err(Error::Grid(format!(
            "lens chirp reaches |w| = {w_max:.4}, beyond the grid band limit"
        )));
    }
    let lensed = apply_phase(signal, &PhaseProfile::lens(a))?;
    let spectrum = fft::forward(&lensed)?;
    let propagated = apply_phase(&spectrum, &PhaseProfile::propagation(1.0 / a))?;
    fft::inverse(&propagated)
}
