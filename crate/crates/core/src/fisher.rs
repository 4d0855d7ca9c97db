// SPDX-License-Identifier: Apache-2.0
//! Fisher information of the separation parameter for the interferometer,
//! for direct imaging (ideal, broadened, band-limited, noisy) and the
//! super-resolution factor `s = lim_{eps->0} F / F_DI`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::model::{
    aperture_second_moment, aperture_transmission, derivative_bracket,
    port_probabilities_unchecked, DeviceCalibration,
};
use crate::output::fmt_f64;
use crate::signals::{Axis, Domain, SampledDensity};
use crate::special::erf_real;

/// Quantum Fisher information per photon for two incoherent Gaussian sources.
pub const QFI: f64 = 0.25;

pub fn qfi() -> f64 {
    QFI
}

/// A family of outcome distributions parametrized by the separation. For
/// continuous outcomes return bin masses (density times bin width).
pub trait ProbabilityFamily: Sync {
    fn probabilities(&self, epsilon: f64) -> Vec<f64>;
}

impl<F> ProbabilityFamily for F
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    fn probabilities(&self, epsilon: f64) -> Vec<f64> {
        self(epsilon)
    }
}

/// Mass below which an outcome is dropped from the numeric Fisher sum.
pub const MIN_BIN_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherEstimate {
    pub information: f64,
    pub excluded_bins: usize,
    /// Information those bins would have contributed (zero-mass bins count
    /// as zero).
    pub excluded_information: f64,
}

/// `sum (dp/deps)^2 / p` with Richardson-extrapolated central differences
/// at steps `d_eps` and `d_eps / 2`.
pub fn fisher_numeric<P: ProbabilityFamily + ?Sized>(
    family: &P,
    epsilon: f64,
    d_eps: f64,
) -> Result<f64> {
    Ok(fisher_numeric_detailed(family, epsilon, d_eps)?.information)
}

pub fn fisher_numeric_detailed<P: ProbabilityFamily + ?Sized>(
    family: &P,
    epsilon: f64,
    d_eps: f64,
) -> Result<FisherEstimate> {
    require_positive("d_eps", d_eps)?;
    if !epsilon.is_finite() {
        return Err(invalid("epsilon", "must be finite"));
    }
    let h = d_eps;
    let p0 = family.probabilities(epsilon);
    let pp = family.probabilities(epsilon + h);
    let pm = family.probabilities(epsilon - h);
    let pp2 = family.probabilities(epsilon + h / 2.0);
    let pm2 = family.probabilities(epsilon - h / 2.0);
    let n = p0.len();
    if [&pp, &pm, &pp2, &pm2].iter().any(|v| v.len() != n) {
        return Err(invalid("prob_family", "outcome count changes with epsilon"));
    }
    let mut est = FisherEstimate {
        information: 0.0,
        excluded_bins: 0,
        excluded_information: 0.0,
    };
    for k in 0..n {
        let d1 = (pp[k] - pm[k]) / (2.0 * h);
        let d2 = (pp2[k] - pm2[k]) / h;
        let d = (4.0 * d2 - d1) / 3.0;
        if p0[k] < MIN_BIN_MASS {
            est.excluded_bins += 1;
            if p0[k] > 0.0 {
                est.excluded_information += d * d / p0[k];
            }
        } else {
            est.information += d * d / p0[k];
        }
    }
    if est.excluded_bins > 0 {
        log::debug!(
            "fisher_numeric: {} bins below {MIN_BIN_MASS:e} excluded, carrying {:e}",
            est.excluded_bins,
            est.excluded_information
        );
    }
    Ok(est)
}

/// Detected outcomes `{p-, p+}` of the interferometer; the undetected
/// remainder is not observed.
#[derive(Debug, Clone, Copy)]
pub struct ObservedPorts(pub DeviceCalibration);

impl ProbabilityFamily for ObservedPorts {
    fn probabilities(&self, epsilon: f64) -> Vec<f64> {
        let p = port_probabilities_unchecked(epsilon.abs(), &self.0);
        vec![p.p_minus, p.p_plus]
    }
}

/// All three outcomes `{p-, p+, px}`.
#[derive(Debug, Clone, Copy)]
pub struct TrinomialPorts(pub DeviceCalibration);

impl ProbabilityFamily for TrinomialPorts {
    fn probabilities(&self, epsilon: f64) -> Vec<f64> {
        let p = port_probabilities_unchecked(epsilon.abs(), &self.0);
        vec![p.p_minus, p.p_plus, p.p_cross]
    }
}

/// Imperfections of a direct-imaging spectrometer, in units of the source
/// bandwidth `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiNoise {
    /// Gaussian resolution limit; broadens `sigma -> sqrt(sigma^2 + sigma_rl^2)`.
    pub sigma_rl: f64,
    /// Full detected bandwidth, centered on the carrier; `None` is unlimited.
    pub sigma_bwl: Option<f64>,
    /// Fraction of detections that are uniformly distributed background.
    pub dark_fraction: f64,
}

impl Default for DiNoise {
    fn default() -> Self {
        DiNoise {
            sigma_rl: 0.0,
            sigma_bwl: None,
            dark_fraction: 0.0,
        }
    }
}

impl DiNoise {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rl.is_finite() && self.sigma_rl >= 0.0) {
            return Err(invalid("sigma_rl", "must be finite and >= 0"));
        }
        if let Some(b) = self.sigma_bwl {
            require_positive("sigma_bwl", b)?;
        }
        if !(0.0..1.0).contains(&self.dark_fraction) {
            return Err(invalid("dark_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }

    fn sigma_eff(&self) -> f64 {
        (1.0 + self.sigma_rl * self.sigma_rl).sqrt()
    }

    /// Detected half-window, defaulting to 12 broadened widths.
    fn half_window(&self, epsilon: f64) -> f64 {
        match self.sigma_bwl {
            Some(b) => b / 2.0,
            None => 12.0 * self.sigma_eff() + epsilon.abs() / 2.0,
        }
    }
}

fn normal_pdf(x: f64, s: f64) -> f64 {
    (-x * x / (2.0 * s * s)).exp() / ((2.0 * PI).sqrt() * s)
}

/// `I(w) = [G(w - eps/2) + G(w + eps/2)] / 2` and `dI/deps`, with `G` a
/// centered normal of width `s`.
fn di_density(w: f64, epsilon: f64, s: f64) -> (f64, f64) {
    let d = epsilon / 2.0;
    let (gm, gp) = (normal_pdf(w - d, s), normal_pdf(w + d, s));
    let value = 0.5 * (gm + gp);
    let slope = 0.25 * ((w - d) * gm - (w + d) * gp) / (s * s);
    (value, slope)
}

const DI_POINTS: usize = 6001;

/// Direct-imaging Fisher information with resolution limit, finite band and
/// a flat background, by quadrature of `(dI/deps)^2 / I` over the band.
pub fn f_di_noisy(epsilon: f64, noise: &DiNoise) -> Result<f64> {
    noise.validate()?;
    let s = noise.sigma_eff();
    let half = noise.half_window(epsilon);
    let step = 2.0 * half / (DI_POINTS - 1) as f64;
    let floor = noise.dark_fraction / (2.0 * half);
    let keep = 1.0 - noise.dark_fraction;
    let mut acc = 0.0;
    for j in 0..DI_POINTS {
        let w = -half + j as f64 * step;
        let (v, dv) = di_density(w, epsilon, s);
        let p = keep * v + floor;
        if p > 0.0 {
            let weight = if j == 0 || j == DI_POINTS - 1 {
                0.5
            } else {
                1.0
            };
            acc += weight * (keep * dv).powi(2) / p;
        }
    }
    Ok(acc * step)
}

/// Ideal direct-imaging Fisher information; `~ eps^2 / 8` at small `eps`.
pub fn f_di(epsilon: f64) -> f64 {
    f_di_noisy(epsilon, &DiNoise::default()).expect("default noise is valid")
}

/// Binned direct-imaging family for [`fisher_numeric`].
#[derive(Debug, Clone, Copy)]
pub struct DirectImagingFamily {
    pub axis: Axis,
    pub noise: DiNoise,
}

impl ProbabilityFamily for DirectImagingFamily {
    fn probabilities(&self, epsilon: f64) -> Vec<f64> {
        let s = self.noise.sigma_eff();
        let half = self.noise.sigma_bwl.map(|b| b / 2.0);
        let width = half.map_or(self.axis.span(), |h| 2.0 * h);
        let floor = self.noise.dark_fraction / width;
        let keep = 1.0 - self.noise.dark_fraction;
        self.axis
            .coords()
            .map(|w| {
                if half.is_some_and(|h| w.abs() > h) {
                    0.0
                } else {
                    (keep * di_density(w, epsilon, s).0 + floor) * self.axis.step
                }
            })
            .collect()
    }
}

/// Ideal single-visibility interferometer (`V- = V+ = v`, lossless, no
/// aperture): `v^2 g'^2 / (1 - v^2 g^2)` with `g = exp(-eps^2/8)`. For
/// `v = 1` this is `~ 1/4 - eps^2/32`.
pub fn f_sliver_visibility(epsilon: f64, v: f64) -> f64 {
    let x = epsilon * epsilon / 8.0;
    let slope = epsilon / 4.0 * (-x).exp();
    let denom = if v == 1.0 {
        -(-2.0 * x).exp_m1()
    } else {
        1.0 - v * v * (-2.0 * x).exp()
    };
    if denom == 0.0 {
        return v * v / 4.0;
    }
    v * v * slope * slope / denom
}

/// Small-separation approximation `1/4 - eps^2/32`.
pub fn f_sliver(epsilon: f64) -> f64 {
    0.25 - epsilon * epsilon / 32.0
}

/// Fisher information of the detected ports,
/// `V-^2 F / (64 p-) + eta^2 V+^2 F / (64 p+)`.
pub fn f_pudtai(epsilon: f64, cal: &DeviceCalibration) -> Result<f64> {
    let (m, p) = f_pudtai_ports(epsilon, cal)?;
    Ok(m + p)
}

/// Per-port contributions `(F-, F+)` of [`f_pudtai`].
pub fn f_pudtai_ports(epsilon: f64, cal: &DeviceCalibration) -> Result<(f64, f64)> {
    cal.validate()?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid(
            "epsilon",
            format!("must be finite and >= 0, got {epsilon}"),
        ));
    }
    let a = cal.t_a_sigma;
    let big_f = (-epsilon * epsilon / 4.0).exp() * derivative_bracket(a, epsilon).powi(2);
    let probs = port_probabilities_unchecked(epsilon, cal);
    let minus = if probs.p_minus > 0.0 {
        cal.v_minus.powi(2) * big_f / (64.0 * probs.p_minus)
    } else if cal.v_minus == 1.0 && epsilon == 0.0 {
        // F ~ eps^2 eta_pm^2 and p- ~ eps^2 M2 / 4 with M2 = eta_pm / 4.
        let m2 = aperture_second_moment(a);
        let eta_pm = 4.0 * m2;
        eta_pm * eta_pm / (16.0 * m2)
    } else {
        0.0
    };
    let plus = if probs.p_plus > 0.0 {
        cal.eta_plus.powi(2) * cal.v_plus.powi(2) * big_f / (64.0 * probs.p_plus)
    } else {
        0.0
    };
    Ok((minus, plus))
}

/// Which interferometer output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Minus,
    Plus,
}

/// Fisher information density `(dp(t)/deps)^2 / p(t)` in the time domain of
/// the source (units of `1/sigma`), with `p-(t) = f_A psi^2 (1 - V- cos eps t)/2`
/// and `p+(t) = eta f_A psi^2 (1 + V+ cos eps t)/2`.
pub fn fi_density(
    port: Port,
    epsilon: f64,
    cal: &DeviceCalibration,
    axis: &Axis,
) -> Result<SampledDensity> {
    cal.validate()?;
    let a = cal.t_a_sigma;
    let values = axis
        .coords()
        .map(|t| {
            if t.abs() < a {
                return 0.0;
            }
            let psi2 = (2.0 / PI).sqrt() * (-2.0 * t * t).exp();
            let x = epsilon * t;
            let (s, c) = (x / 2.0).sin_cos();
            match port {
                Port::Minus => {
                    let v = cal.v_minus;
                    if v == 1.0 {
                        psi2 * t * t * c * c
                    } else {
                        let sin2 = 4.0 * s * s * c * c;
                        v * v * psi2 * t * t * sin2 / (2.0 * ((1.0 - v) + 2.0 * v * s * s))
                    }
                }
                Port::Plus => {
                    let v = cal.v_plus;
                    if v == 0.0 {
                        0.0
                    } else if v == 1.0 {
                        cal.eta_plus * psi2 * t * t * s * s
                    } else {
                        let sin2 = 4.0 * s * s * c * c;
                        cal.eta_plus * v * v * psi2 * t * t * sin2
                            / (2.0 * ((1.0 + v) - 2.0 * v * s * s))
                    }
                }
            }
        })
        .collect();
    Ok(SampledDensity {
        domain: Domain::Time,
        start: axis.start,
        step: axis.step,
        values,
    })
}

/// Aperture flux efficiencies `(eta_p-, eta_p+)`:
/// `erfc(sqrt 2 a) + 2 sqrt(2/pi) a exp(-2a^2)` and `erfc(sqrt 2 a)`.
pub fn aperture_flux_efficiencies(t_a_sigma: f64) -> Result<(f64, f64)> {
    if !(t_a_sigma.is_finite() && t_a_sigma >= 0.0) {
        return Err(invalid("t_a_sigma", "must be finite and >= 0"));
    }
    Ok((
        4.0 * aperture_second_moment(t_a_sigma),
        aperture_transmission(t_a_sigma),
    ))
}

/// Fraction of each port's spectrally resolved information that survives
/// the aperture, `F_A / F_open` from the integrated densities.
pub fn aperture_fisher_efficiency(epsilon: f64, cal: &DeviceCalibration) -> Result<(f64, f64)> {
    let axis = Axis::centered(1 << 15, 8.0)?;
    let open = cal.with_aperture(0.0);
    let ratio = |port| -> Result<f64> {
        let with = fi_density(port, epsilon, cal, &axis)?.integral();
        let without = fi_density(port, epsilon, &open, &axis)?.integral();
        if without <= 0.0 {
            return Err(Error::Grid("no information in the open port".into()));
        }
        Ok(with / without)
    };
    Ok((ratio(Port::Minus)?, ratio(Port::Plus)?))
}

/// Gain of each detected (bucket) port from the aperture,
/// `F+-(cal) / F+-(cal without aperture)`.
pub fn bucket_fisher_improvement(epsilon: f64, cal: &DeviceCalibration) -> Result<(f64, f64)> {
    let (m, p) = f_pudtai_ports(epsilon, cal)?;
    let (m0, p0) = f_pudtai_ports(epsilon, &cal.with_aperture(0.0))?;
    Ok((m / m0, p / p0))
}

/// Evaluation point of the `eps -> 0` limit.
pub const S_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SFactor {
    /// Richardson-extrapolated limit.
    pub value: f64,
    pub at_eps: f64,
    pub at_half_eps: f64,
}

/// `lim F / F_DI` from the ratio at `S_EPS` and `S_EPS / 2`; the ratio is
/// even in `eps`, so the extrapolation removes the `eps^2` term.
pub fn s_factor<F: Fn(f64) -> f64>(fisher: F) -> SFactor {
    let r1 = fisher(S_EPS) / f_di(S_EPS);
    let r2 = fisher(S_EPS / 2.0) / f_di(S_EPS / 2.0);
    SFactor {
        value: (4.0 * r2 - r1) / 3.0,
        at_eps: r1,
        at_half_eps: r2,
    }
}

/// Closed-form super-resolution factor of the interferometer. Infinite for
/// `V- = 1`.
pub fn s_pudtai_closed_form(cal: &DeviceCalibration) -> Result<f64> {
    cal.validate()?;
    let (vm, vp, eta, a) = (cal.v_minus, cal.v_plus, cal.eta_plus, cal.t_a_sigma);
    let erf = erf_real(2f64.sqrt() * a);
    let e2 = (2.0 * a * a).exp();
    let num = (-4.0 * a * a).exp() * (vm * vm * (vp + 1.0) - eta * vm * vp * vp + eta * vp * vp);
    let den = 4.0 * (vm - 1.0) * (vp + 1.0) * (erf - 1.0);
    let tail = -e2 * erf + e2 + 2.0 * (2.0 / PI).sqrt() * a;
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / den * tail * tail)
}

/// Small-separation factor of a single-visibility interferometer,
/// `v^2 / (2 (1 - v^2))`.
pub fn s_sliver(v: f64) -> f64 {
    v * v / (2.0 * (1.0 - v * v))
}

/// Resolution and bandwidth limits of a direct-imaging spectrometer, in
/// absolute frequency units (Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrometerSpec {
    pub sigma_rl: f64,
    pub sigma_bwl: f64,
    pub label: String,
}

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const RB_D1_WAVELENGTH: f64 = 795e-9;

impl SpectrometerSpec {
    pub fn new(sigma_rl: f64, sigma_bwl: f64, label: impl Into<String>) -> Result<Self> {
        let s = SpectrometerSpec {
            sigma_rl,
            sigma_bwl,
            label: label.into(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sigma_rl", self.sigma_rl)?;
        require_positive("sigma_bwl", self.sigma_bwl)?;
        if self.sigma_bwl <= self.sigma_rl {
            return Err(invalid("sigma_bwl", "must exceed sigma_rl"));
        }
        Ok(())
    }

    /// Quantum-memory temporal imaging: 7.2 kHz resolution, 300 kHz band.
    pub fn qmti() -> Self {
        SpectrometerSpec {
            sigma_rl: 7.2e3,
            sigma_bwl: 300e3,
            label: "QMTI".into(),
        }
    }

    /// Grating of `length_cm` with 1200 lines/mm in first order at 795 nm;
    /// band of 1000 resolution elements.
    pub fn grating(length_cm: f64) -> Self {
        let lines = length_cm * 10.0 * 1200.0;
        let rl = SPEED_OF_LIGHT / RB_D1_WAVELENGTH / lines;
        SpectrometerSpec {
            sigma_rl: rl,
            sigma_bwl: 1e3 * rl,
            label: format!("Grating {length_cm} cm"),
        }
    }

    /// High-resolution Fourier-transform spectrometer: 0.001 cm^-1
    /// resolution over 50 000 cm^-1.
    pub fn fourier_transform() -> Self {
        let per_cm = SPEED_OF_LIGHT * 100.0;
        SpectrometerSpec {
            sigma_rl: 1e-3 * per_cm,
            sigma_bwl: 50e3 * per_cm,
            label: "FT".into(),
        }
    }
}

/// Super-resolution factor of a direct-imaging spectrometer for a source of
/// bandwidth `sigma_signal`: the squared separation rescaling
/// `sigma^2 / (sigma^2 + sigma_rl^2)` times the fraction of small-separation
/// information inside the band `|w| < sigma_bwl / 2`. The resolution limit
/// is treated as a smaller effective separation; information about the true
/// separation of the broadened model carries one more such factor (see
/// [`f_di_noisy`]).
pub fn di_spectrometer_s(spec: &SpectrometerSpec, sigma_signal: f64) -> Result<f64> {
    spec.validate()?;
    require_positive("sigma_signal", sigma_signal)?;
    let s2 = sigma_signal * sigma_signal;
    let broadened = (s2 + spec.sigma_rl * spec.sigma_rl).sqrt();
    let rescale = s2 / (broadened * broadened);
    let b = spec.sigma_bwl / 2.0 / broadened;
    Ok(rescale * band_fraction(b))
}

/// Fraction of `\int (u^2 - 1)^2 phi(u) du / 2` inside `|u| < b`.
fn band_fraction(b: f64) -> f64 {
    let phi = (-b * b / 2.0).exp() / (2.0 * PI).sqrt();
    let inside = erf_real(b / 2f64.sqrt());
    (inside - b * phi * (1.0 + b * b)).clamp(0.0, 1.0)
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    require_positive("lo", lo)?;
    require_positive("hi", hi)?;
    if n < 2 || hi <= lo {
        return Err(invalid("n", "need n >= 2 and hi > lo"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect())
}

/// `(sigma, s)` along a log grid of source bandwidths.
pub fn s_curve(spec: &SpectrometerSpec, sigmas: &[f64]) -> Result<Vec<(f64, f64)>> {
    sigmas
        .par_iter()
        .map(|&s| Ok((s, di_spectrometer_s(spec, s)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherCurve {
    pub label: String,
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
}

/// Quantum bound, ideal single-port approximation, direct imaging, the
/// interferometer at `cal` and the noisy direct-imaging model, over `epsilons`.
pub fn fisher_curves(
    epsilons: &[f64],
    cal: &DeviceCalibration,
    noise: &DiNoise,
) -> Result<Vec<FisherCurve>> {
    cal.validate()?;
    noise.validate()?;
    let rows: Vec<[f64; 5]> = epsilons
        .par_iter()
        .map(|&e| {
            Ok([
                qfi(),
                f_sliver(e),
                f_di(e),
                f_pudtai(e, cal)?,
                f_di_noisy(e, noise)?,
            ])
        })
        .collect::<Result<_>>()?;
    let labels = ["F_Q", "F_SLIVER", "F_DI", "F_PuDTAI", "F_QMTI"];
    Ok(labels
        .iter()
        .enumerate()
        .map(|(i, l)| FisherCurve {
            label: (*l).to_string(),
            epsilons: epsilons.to_vec(),
            values: rows.iter().map(|r| r[i]).collect(),
        })
        .collect())
}

/// `epsilon,F_Q,F_SLIVER,F_DI,F_PuDTAI,F_QMTI`.
pub fn write_curves_csv<W: Write>(curves: &[FisherCurve], mut w: W) -> io::Result<()> {
    let header: Vec<&str> = std::iter::once("epsilon")
        .chain(curves.iter().map(|c| c.label.as_str()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let Some(first) = curves.first() else {
        return Ok(());
    };
    for (i, e) in first.epsilons.iter().enumerate() {
        let mut line = fmt_f64(*e);
        for c in curves {
            line.push(',');
            line.push_str(&fmt_f64(c.values[i]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// `instrument,sigma,s`.
pub fn write_s_curves_csv<W: Write>(
    curves: &[(String, Vec<(f64, f64)>)],
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "instrument,sigma,s")?;
    for (label, pts) in curves {
        for (s, v) in pts {
            writeln!(w, "{label},{},{}", fmt_f64(*s), fmt_f64(*v))?;
        }
    }
    Ok(())
}
