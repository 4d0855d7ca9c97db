// SPDX-License-Identifier: Apache-2.0
//! Phase-space optics: quadratic and piecewise phase profiles, the Wigner
//! function of a sampled field and the shears those profiles induce on it.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_finite, Error, Result};
use crate::fft;
use crate::output::fmt_f64;
use crate::signals::{Axis, Domain, SampledField};

/// `pi ((-1)^floor(xi/pi) + 1) / 2`: equals `pi` on even half-periods and `0`
/// on odd ones, so `exp(i sq(xi))` is a +-1 square wave.
pub fn square_wave(xi: f64) -> f64 {
    if (xi / PI).floor().rem_euclid(2.0) == 0.0 {
        PI
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// `strength * x^2 / 2` on the time-like coordinate.
    Lens,
    /// `strength * x^2 / 2` on the spectral coordinate.
    Propagation,
    /// `-strength * x |x| / 2` on the time-like coordinate.
    DualLens,
    /// `sq(strength * x^2 / 2 + offset)` on the spectral coordinate.
    Bidirectional,
}

/// Where a profile acts: on the time-like coordinate (`t` or `k_z`) or on
/// the spectral one (`w` or `z`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseDomain {
    Temporal,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    pub kind: PhaseKind,
    pub strength: f64,
    /// Constant offset in `[0, 2 pi)`.
    pub offset: f64,
}

impl PhaseProfile {
    pub fn lens(strength: f64) -> Self {
        PhaseProfile {
            kind: PhaseKind::Lens,
            strength,
            offset: 0.0,
        }
    }

    pub fn propagation(strength: f64) -> Self {
        PhaseProfile {
            kind: PhaseKind::Propagation,
            strength,
            offset: 0.0,
        }
    }

    pub fn dual_lens(strength: f64) -> Self {
        PhaseProfile {
            kind: PhaseKind::DualLens,
            strength,
            offset: 0.0,
        }
    }

    /// Square-wave grating; `offset` is wrapped into `[0, 2 pi)`.
    pub fn bidirectional(strength: f64, offset: f64) -> Self {
        PhaseProfile {
            kind: PhaseKind::Bidirectional,
            strength,
            offset: offset.rem_euclid(2.0 * PI),
        }
    }

    pub fn domain(&self) -> PhaseDomain {
        match self.kind {
            PhaseKind::Lens | PhaseKind::DualLens => PhaseDomain::Temporal,
            PhaseKind::Propagation | PhaseKind::Bidirectional => PhaseDomain::Spectral,
        }
    }

    pub fn is_temporal(&self) -> bool {
        self.domain() == PhaseDomain::Temporal
    }

    pub fn phase_at(&self, x: f64) -> f64 {
        match self.kind {
            PhaseKind::Lens | PhaseKind::Propagation => self.strength * x * x / 2.0 + self.offset,
            PhaseKind::DualLens => -self.strength * x * x.abs() / 2.0 + self.offset,
            PhaseKind::Bidirectional => square_wave(self.strength * x * x / 2.0 + self.offset),
        }
    }
}

/// Multiplies the field by `exp(i phase(x))`.
pub fn apply_phase(field: &SampledField, profile: &PhaseProfile) -> Result<SampledField> {
    require_finite("strength", profile.strength)?;
    if !(0.0..2.0 * PI).contains(&profile.offset) {
        return Err(crate::error::invalid(
            "offset",
            format!("must lie in [0, 2 pi), got {}", profile.offset),
        ));
    }
    if profile.is_temporal() != field.domain.is_temporal() {
        return Err(Error::DomainMismatch {
            expected: if profile.is_temporal() {
                "time or wavevector"
            } else {
                "frequency or position"
            },
            found: field.domain,
        });
    }
    let mut out = field.clone();
    for (j, s) in out.samples.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, profile.phase_at(field.coord(j)));
    }
    Ok(out)
}

/// Relabels frequency as position `z = w / beta` or time as wavevector
/// `k = beta t` (and back). Samples are untouched, so norms computed on the
/// new axis pick up the Jacobian: `beta \int |u|^2 dz = \int |u|^2 dw`.
pub fn coordinate_map(field: &SampledField, beta: f64) -> Result<SampledField> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(crate::error::invalid(
            "beta",
            format!("must be finite and non-zero, got {beta}"),
        ));
    }
    let (domain, factor) = match field.domain {
        Domain::Frequency => (Domain::Position, 1.0 / beta),
        Domain::Position => (Domain::Frequency, beta),
        Domain::Time => (Domain::Wavevector, beta),
        Domain::Wavevector => (Domain::Time, 1.0 / beta),
    };
    let (start, step) = if factor > 0.0 {
        (field.start * factor, field.step * factor)
    } else {
        // Negative slope: reverse the samples to keep an increasing axis.
        let end = field.start + (field.len() - 1) as f64 * field.step;
        (end * factor, field.step * factor.abs())
    };
    let samples = if factor > 0.0 {
        field.samples.clone()
    } else {
        field.samples.iter().rev().copied().collect()
    };
    Ok(SampledField {
        domain,
        start,
        step,
        samples,
    })
}

/// Wigner function on a `q x p` grid, stored row-major in `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    /// Domain of the field the grid was computed from; `q` is its coordinate.
    pub domain: Domain,
    pub q: Axis,
    pub p: Axis,
    pub values: Vec<f64>,
}

impl WignerGrid {
    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.p.len + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p.len..(i + 1) * self.p.len]
    }

    /// `\int W dp` at each `q`.
    pub fn q_marginal(&self) -> Vec<f64> {
        (0..self.q.len)
            .map(|i| self.row(i).iter().sum::<f64>() * self.p.step)
            .collect()
    }

    /// `\int W dq` at each `p`.
    pub fn p_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p.len];
        for i in 0..self.q.len {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|v| *v *= self.q.step);
        out
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.q.step * self.p.step
    }

    /// `\int |W - other| dq dp` on a shared grid.
    pub fn l1_distance(&self, other: &WignerGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.q.step
            * self.p.step
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.q.step * self.p.step
    }

    /// Bilinear interpolation, zero outside the grid.
    pub fn sample(&self, q: f64, p: f64) -> f64 {
        let x = (q - self.q.start) / self.q.step;
        let y = (p - self.p.start) / self.p.step;
        if !(x >= 0.0 && y >= 0.0) {
            return 0.0;
        }
        let (i, k) = (x.floor() as usize, y.floor() as usize);
        if i + 1 >= self.q.len || k + 1 >= self.p.len {
            return 0.0;
        }
        let (fx, fy) = (x - i as f64, y - k as f64);
        let v00 = self.get(i, k);
        let v01 = self.get(i, k + 1);
        let v10 = self.get(i + 1, k);
        let v11 = self.get(i + 1, k + 1);
        (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "q,p,w")?;
        for i in 0..self.q.len {
            let q = self.q.coord(i);
            for k in 0..self.p.len {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt_f64(q),
                    fmt_f64(self.p.coord(k)),
                    fmt_f64(self.get(i, k))
                )?;
            }
        }
        Ok(())
    }
}

/// `W(q, p) = (1/2 pi) \int u(q + x/2) u*(q - x/2) exp(-i p x) dx`.
///
/// The field is first resampled on a twice finer grid so that half-lags fall
/// on samples; `p` then spans `2N` points with step `pi / (N dq)`. Memory is
/// `O(2 N^2)`.
pub fn wigner(field: &SampledField) -> Result<WignerGrid> {
    let n = field.len();
    if n < 16 || !n.is_multiple_of(2) {
        return Err(Error::Grid(format!(
            "wigner needs an even grid of at least 16 points, got {n}"
        )));
    }
    let fine = resample_twice(field)?;
    let l = 2 * n;
    let dq = field.step;
    let p_axis = Axis {
        start: -(n as f64) * PI / (n as f64 * dq),
        step: PI / (n as f64 * dq),
        len: l,
    };
    let plan = fft::plan_forward(l);
    let scale = dq / (2.0 * PI);
    let mut values = vec![0.0; n * l];
    values.par_chunks_mut(l).enumerate().for_each(|(i, row)| {
        let c = 2 * i as isize;
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        let max_lag = (n - 1) as isize;
        for m in -max_lag..=max_lag {
            let a = c + m;
            let b = c - m;
            if a < 0 || b < 0 || a >= l as isize || b >= l as isize {
                continue;
            }
            buf[m.rem_euclid(l as isize) as usize] = fine[a as usize] * fine[b as usize].conj();
        }
        plan.process(&mut buf);
        // FFT bin k is p = k dp; shift so that row index k' has p = (k' - n) dp.
        for (k, v) in row.iter_mut().enumerate() {
            *v = scale * buf[(k + n) % l].re;
        }
    });
    Ok(WignerGrid {
        domain: field.domain,
        q: field.axis(),
        p: p_axis,
        values,
    })
}

// Band-limited interpolation onto x_start + j dx/2 using the unshifted DFT.
fn resample_twice(field: &SampledField) -> Result<Vec<Complex64>> {
    let n = field.len();
    let mut spec = field.samples.clone();
    fft::plan_forward(n).process(&mut spec);
    let m = 2 * n;
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let h = n / 2;
    padded[..h].copy_from_slice(&spec[..h]);
    padded[m - h + 1..].copy_from_slice(&spec[h + 1..]);
    padded[h] = spec[h] * 0.5;
    padded[m - h] = spec[h] * 0.5;
    fft::plan_inverse(m).process(&mut padded);
    let norm = 1.0 / n as f64;
    padded.iter_mut().for_each(|v| *v *= norm);
    Ok(padded)
}

/// Predicted Wigner function after `profile`, obtained by shearing `grid`.
///
/// For a time-like `q`: a lens of strength `a` maps `W(q, p) -> W(q, p - a q)`,
/// the dual lens `W(q, p + a |q|)`, a spectral phase `b p^2/2`
/// `W(q + b p, p)`, and the bidirectional grating keeps only its +-1 orders,
/// `(4/pi^2) [W(q + b p, p) + W(q - b p, p)]`. Spectral grids use the same
/// rules with `(q, p) -> (-p, q)`.
pub fn wigner_shear_check(profile: &PhaseProfile, grid: &WignerGrid) -> WignerGrid {
    let temporal_grid = grid.domain.is_temporal();
    let s = profile.strength;
    // Maps a point of the output grid to the time-frequency point (t, w)
    // and back.
    let to_tw = |q: f64, p: f64| if temporal_grid { (q, p) } else { (-p, q) };
    let from_tw = |t: f64, w: f64| if temporal_grid { (t, w) } else { (w, -t) };
    let pre_image = |t: f64, w: f64| -> Vec<(f64, f64, f64)> {
        match profile.kind {
            PhaseKind::Lens => vec![(t, w - s * t, 1.0)],
            PhaseKind::DualLens => vec![(t, w + s * t.abs(), 1.0)],
            PhaseKind::Propagation => vec![(t + s * w, w, 1.0)],
            PhaseKind::Bidirectional => {
                let c = 4.0 / (PI * PI);
                vec![(t + s * w, w, c), (t - s * w, w, c)]
            }
        }
    };
    let mut values = vec![0.0; grid.values.len()];
    values
        .par_chunks_mut(grid.p.len)
        .enumerate()
        .for_each(|(i, row)| {
            let q = grid.q.coord(i);
            for (k, v) in row.iter_mut().enumerate() {
                let (t, w) = to_tw(q, grid.p.coord(k));
                *v = pre_image(t, w)
                    .into_iter()
                    .map(|(t0, w0, c)| {
                        let (q0, p0) = from_tw(t0, w0);
                        c * grid.sample(q0, p0)
                    })
                    .sum();
            }
        });
    WignerGrid {
        values,
        ..grid.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gaussian_pulse, GaussianParams};

    #[test]
    fn square_wave_levels() {
        assert_eq!(square_wave(0.1), PI);
        assert_eq!(square_wave(PI + 0.1), 0.0);
        assert_eq!(square_wave(-0.1), 0.0);
        assert_eq!(square_wave(2.0 * PI + 0.1), PI);
    }

    #[test]
    fn profile_domain_is_checked() {
        let axis = Axis::centered(64, 6.0).unwrap();
        let f = gaussian_pulse(&GaussianParams::default(), &axis).unwrap();
        assert!(apply_phase(&f, &PhaseProfile::propagation(1.0)).is_err());
        assert!(apply_phase(&f, &PhaseProfile::lens(1.0)).is_ok());
    }

    #[test]
    fn coordinate_map_round_trip() {
        let axis = Axis::centered(256, 8.0).unwrap();
        let f = gaussian_pulse(&GaussianParams::default(), &axis).unwrap();
        let k = coordinate_map(&f, 3.0).unwrap();
        assert_eq!(k.domain, Domain::Wavevector);
        assert!((k.norm_sqr() / 3.0 - f.norm_sqr()).abs() < 1e-12);
        let back = coordinate_map(&k, 3.0).unwrap();
        for (a, b) in back.samples.iter().zip(&f.samples) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_wigner_is_positive_gaussian() {
        let axis = Axis::centered(128, 8.0).unwrap();
        let f = gaussian_pulse(&GaussianParams::default(), &axis).unwrap();
        let w = wigner(&f).unwrap();
        // (1/pi) exp(-2 t^2 - w^2/2)
        let i = 64;
        let k = w.p.len / 2;
        assert!((w.get(i, k) - 1.0 / PI).abs() < 1e-10);
    }
}
