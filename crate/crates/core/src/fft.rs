// SPDX-License-Identifier: Apache-2.0
//! Unitary continuous-Fourier-transform approximation on uniform grids.
//!
//! Forward: `F(w) = (2 pi)^(-1/2) \int f(t) exp(-i w t) dt`, inverse with
//! `exp(+i w t)`. Outputs land on the centered conjugate grid of
//! [`Axis::conjugate`]; arbitrary input offsets are handled with phase
//! factors, so the transform is exact for band-limited periodic samples.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signals::{Domain, SampledField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

fn twiddle(n: usize, step: f64, start: f64, sign: f64) -> impl Iterator<Item = Complex64> {
    (0..n).map(move |j| Complex64::from_polar(1.0, sign * start * j as f64 * step))
}

/// Time -> frequency or wavevector -> position.
pub fn forward(field: &SampledField) -> Result<SampledField> {
    let target = match field.domain {
        Domain::Time => Domain::Frequency,
        Domain::Wavevector => Domain::Position,
        other => {
            return Err(Error::DomainMismatch {
                expected: "time or wavevector",
                found: other,
            })
        }
    };
    Ok(transform(field, target, -1.0, None))
}

/// Frequency -> time or position -> wavevector, onto the centered grid.
pub fn inverse(field: &SampledField) -> Result<SampledField> {
    inverse_onto(field, None)
}

/// Inverse transform onto a grid starting at `start` (centered if `None`).
pub fn inverse_onto(field: &SampledField, start: Option<f64>) -> Result<SampledField> {
    let target = match field.domain {
        Domain::Frequency => Domain::Time,
        Domain::Position => Domain::Wavevector,
        other => {
            return Err(Error::DomainMismatch {
                expected: "frequency or position",
                found: other,
            })
        }
    };
    Ok(transform(field, target, 1.0, start))
}

// out_k = (dx / sqrt(2 pi)) sum_j in_j exp(sign i y_k x_j), with x_j = x0 + j dx
// and y_k = y0 + k dy, dx dy = 2 pi / N.
fn transform(
    field: &SampledField,
    target: Domain,
    sign: f64,
    out_start: Option<f64>,
) -> SampledField {
    let n = field.len();
    let conj = field.axis().conjugate();
    let y0 = out_start.unwrap_or(conj.start);
    let dy = conj.step;
    let x0 = field.start;
    let dx = field.step;

    let mut buf: Vec<Complex64> = field
        .samples
        .iter()
        .zip(twiddle(n, dx, y0, sign))
        .map(|(s, w)| s * w)
        .collect();
    let plan = if sign < 0.0 {
        plan_forward(n)
    } else {
        plan_inverse(n)
    };
    plan.process(&mut buf);

    let scale = dx / (2.0 * PI).sqrt();
    let global = Complex64::from_polar(scale, sign * y0 * x0);
    for (b, w) in buf.iter_mut().zip(twiddle(n, dy, x0, sign)) {
        *b *= global * w;
    }
    SampledField {
        domain: target,
        start: y0,
        step: dy,
        samples: buf,
    }
}

/// Band-limited resampling of a time or wavevector field onto a grid that
/// is `factor` times finer over the same window.
pub fn upsample(field: &SampledField, factor: usize) -> Result<SampledField> {
    if factor == 0 {
        return Err(Error::Grid("upsampling factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(field.clone());
    }
    let spec = forward(field)?;
    let n = spec.len();
    let m = n * factor;
    // Zero-pad the centered spectrum; the conjugate grid of the fine axis has
    // the same frequency step.
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let offset = m / 2 - n / 2;
    padded[offset..offset + n].copy_from_slice(&spec.samples);
    let fine = SampledField {
        domain: spec.domain,
        start: -((m / 2) as f64) * spec.step,
        step: spec.step,
        samples: padded,
    };
    inverse_onto(&fine, Some(field.start))
}

/// Smallest `Y` such that the power at `|y| > Y` is at most `tail` times
/// the total.
pub fn support_extent(field: &SampledField, tail: f64) -> f64 {
    let total: f64 = field.samples.iter().map(|s| s.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut order: Vec<(f64, f64)> = field
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| (field.coord(k).abs(), s.norm_sqr()))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut outside = 0.0;
    for (y, p) in order {
        outside += p;
        if outside > tail * total {
            return y;
        }
    }
    0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{default_time_axis, gaussian_pulse, Axis, GaussianParams};

    #[test]
    fn gaussian_transforms_to_gaussian() {
        let g = GaussianParams::default();
        let pulse = gaussian_pulse(&g, &default_time_axis()).unwrap();
        let spec = forward(&pulse).unwrap();
        for (k, s) in spec.samples.iter().enumerate() {
            let w = spec.coord(k);
            assert!(
                (s - Complex64::new(g.amplitude(w), 0.0)).norm() < 1e-12,
                "w={w}"
            );
        }
    }

    #[test]
    fn round_trip() {
        let axis = default_time_axis();
        let pulse = gaussian_pulse(&GaussianParams::new(1.3, 2.0).unwrap(), &axis).unwrap();
        let back = inverse(&forward(&pulse).unwrap()).unwrap();
        assert_eq!(back.domain, Domain::Time);
        for (a, b) in pulse.samples.iter().zip(&back.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn upsample_interpolates() {
        let axis = Axis::centered(512, 8.0).unwrap();
        let g = GaussianParams::default();
        let pulse = gaussian_pulse(&g, &axis).unwrap();
        let fine = upsample(&pulse, 4).unwrap();
        assert_eq!(fine.len(), 2048);
        assert!((fine.start - pulse.start).abs() < 1e-12);
        for (j, s) in fine.samples.iter().enumerate() {
            assert!((s.re - g.envelope(fine.coord(j))).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_domain_is_rejected() {
        let axis = default_time_axis();
        let pulse = gaussian_pulse(&GaussianParams::default(), &axis).unwrap();
        assert!(inverse(&pulse).is_err());
    }
}
