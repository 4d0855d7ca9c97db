// SPDX-License-Identifier: Apache-2.0
use std::f64::consts::PI;

use tfsr_core::fft;
use tfsr_core::phasespace::{apply_phase, coordinate_map, square_wave, wigner, wigner_shear_check};
use tfsr_core::signals::{gaussian_pulse, hermite_gauss1_pulse, two_source_components};
use tfsr_core::{
    Axis, Complex64, Domain, GaussianParams, PhaseProfile, SampledField, TwoSourceSpec,
};

fn small_axis() -> Axis {
    Axis::centered(512, 8.0).unwrap()
}

fn gaussian() -> SampledField {
    gaussian_pulse(&GaussianParams::default(), &small_axis()).unwrap()
}

#[test]
fn gaussian_wigner_is_positive_and_centered() {
    let w = wigner(&gaussian()).unwrap();
    let min = w.values.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > -1e-12, "min = {min}");
    let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
    for i in 0..w.q.len {
        for k in 0..w.p.len {
            if w.get(i, k) > best {
                best = w.get(i, k);
                at = (i, k);
            }
        }
    }
    assert!(w.q.coord(at.0).abs() < 1e-12 && w.p.coord(at.1).abs() < 1e-12);
    assert!((w.total() - 1.0).abs() < 1e-9);
}

#[test]
fn hermite_gauss_has_negative_origin() {
    let hg = hermite_gauss1_pulse(&GaussianParams::default(), &small_axis()).unwrap();
    let w = wigner(&hg).unwrap();
    // Direct quadrature of (1/2pi) \int u(x/2) u*(-x/2) dx at the origin.
    let u = |t: f64| Complex64::new(0.0, 2.0 * t) * (2.0 / PI).powf(0.25) * (-t * t).exp();
    let n = 40_000;
    let h = 40.0 / n as f64;
    let direct: f64 = (0..n)
        .map(|k| {
            let x = -20.0 + (k as f64 + 0.5) * h;
            (u(x / 2.0) * u(-x / 2.0).conj()).re
        })
        .sum::<f64>()
        * h
        / (2.0 * PI);
    let at_origin = w.get(w.q.len / 2, w.p.len / 2);
    assert!(at_origin < 0.0);
    assert!((at_origin - direct).abs() < 1e-9, "{at_origin} vs {direct}");
    assert!((direct + 1.0 / PI).abs() < 1e-9);
}

#[test]
fn two_source_mixture_wigner_is_product_form() {
    let eps = 1.5;
    let spec = TwoSourceSpec::new(eps, GaussianParams::default()).unwrap();
    let comps = two_source_components(&spec, &small_axis()).unwrap();
    let w1 = wigner(&comps[0]).unwrap();
    let w2 = wigner(&comps[1]).unwrap();
    let g = GaussianParams::default();
    let mut worst: f64 = 0.0;
    for i in (0..w1.q.len).step_by(7) {
        let t = w1.q.coord(i);
        for k in (0..w1.p.len).step_by(5) {
            let p = w1.p.coord(k);
            let psi2 = g.envelope(t).powi(2);
            let want = 0.5
                * psi2
                * (g.amplitude(p - eps / 2.0).powi(2) + g.amplitude(p + eps / 2.0).powi(2));
            worst = worst.max((w1.get(i, k) + w2.get(i, k) - want).abs());
        }
    }
    assert!(worst < 1e-10, "worst = {worst:e}");
}

#[test]
fn marginals() {
    let f = apply_phase(&gaussian(), &PhaseProfile::lens(0.7)).unwrap();
    let w = wigner(&f).unwrap();
    for (m, s) in w.q_marginal().iter().zip(&f.samples) {
        assert!((m - s.norm_sqr()).abs() < 1e-12);
    }
    // Spectrum on the p grid, which is twice as fine as the FFT grid: zero-pad.
    let mut padded = vec![Complex64::new(0.0, 0.0); 2 * f.len()];
    let off = f.len() / 2;
    padded[off..off + f.len()].copy_from_slice(&f.samples);
    let wide =
        SampledField::new(Domain::Time, f.start - off as f64 * f.step, f.step, padded).unwrap();
    let spec = fft::forward(&wide).unwrap();
    for (k, m) in w.p_marginal().iter().enumerate() {
        assert!((spec.coord(k) - w.p.coord(k)).abs() < 1e-9);
        assert!((m - spec.samples[k].norm_sqr()).abs() < 1e-6, "k={k}");
    }
}

#[test]
fn rejects_short_fields() {
    let axis = Axis::centered(8, 4.0).unwrap();
    let f = SampledField::zeros(Domain::Time, axis);
    assert!(wigner(&f).is_err());
}

#[test]
fn lens_examples() {
    let g = gaussian();
    let same = apply_phase(&g, &PhaseProfile::lens(0.0)).unwrap();
    assert_eq!(same, g);
    let there = apply_phase(&g, &PhaseProfile::lens(2.3)).unwrap();
    let back = apply_phase(&there, &PhaseProfile::lens(-2.3)).unwrap();
    for (a, b) in back.samples.iter().zip(&g.samples) {
        assert!((a - b).norm() < 1e-15);
    }
    for (a, b) in there.samples.iter().zip(&g.samples) {
        assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-15);
    }
}

#[test]
fn lens_shear_matches_wigner_of_lensed_field() {
    let g = gaussian();
    let profile = PhaseProfile::lens(2.0);
    let predicted = wigner_shear_check(&profile, &wigner(&g).unwrap());
    let actual = wigner(&apply_phase(&g, &profile).unwrap()).unwrap();
    let d = predicted.l1_distance(&actual);
    assert!(d < 1e-2, "L1 = {d}");
}

#[test]
fn propagation_shear_matches_and_keeps_p_marginal() {
    let g = gaussian();
    let profile = PhaseProfile::propagation(0.8);
    let before = wigner(&g).unwrap();
    let predicted = wigner_shear_check(&profile, &before);
    let spec = fft::forward(&g).unwrap();
    let moved = fft::inverse(&apply_phase(&spec, &profile).unwrap()).unwrap();
    let actual = wigner(&moved).unwrap();
    assert!(predicted.l1_distance(&actual) < 1e-2);
    let (a, b) = (before.p_marginal(), predicted.p_marginal());
    let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() * before.p.step;
    assert!(diff < 1e-3, "p-marginal change {diff}");
}

#[test]
fn dual_lens_folds_both_halves_onto_one_side() {
    let g = gaussian();
    let alpha = 20.0;
    let profile = PhaseProfile::dual_lens(alpha);
    let lensed = apply_phase(&g, &profile).unwrap();
    let w = wigner(&lensed).unwrap();
    // Both time halves end up at w = -alpha |t|: the frequency marginal is
    // almost entirely negative and the distribution is even in t.
    let pm = w.p_marginal();
    let neg: f64 = pm
        .iter()
        .enumerate()
        .filter(|(k, _)| w.p.coord(*k) < 0.0)
        .map(|(_, v)| v)
        .sum::<f64>();
    let total: f64 = pm.iter().sum();
    assert!(
        neg / total > 0.95,
        "fraction at negative frequency {}",
        neg / total
    );
    let n = w.q.len;
    for i in 1..n / 2 {
        for k in (0..w.p.len).step_by(3) {
            assert!((w.get(i, k) - w.get(n - i, k)).abs() < 1e-10);
        }
    }
    // The two folded branches interfere along t = 0, so only the half-plane
    // budgets are compared with the geometric shear.
    let predicted = wigner_shear_check(&profile, &wigner(&g).unwrap());
    let ppm = predicted.p_marginal();
    let pneg: f64 = ppm
        .iter()
        .enumerate()
        .filter(|(k, _)| w.p.coord(*k) < 0.0)
        .map(|(_, v)| v)
        .sum::<f64>();
    let ptotal: f64 = ppm.iter().sum();
    assert!(
        (pneg / ptotal - neg / total).abs() < 0.02,
        "{} vs {}",
        pneg / ptotal,
        neg / total
    );
}

#[test]
fn bidirectional_shear_keeps_first_order_budget() {
    let grid = wigner(&fft::forward(&gaussian()).unwrap()).unwrap();
    let predicted = wigner_shear_check(&PhaseProfile::bidirectional(0.5, 0.0), &grid);
    let ratio = predicted.total() / grid.total();
    assert!((ratio - 8.0 / (PI * PI)).abs() < 1e-3, "ratio {ratio}");
}

#[test]
fn square_wave_fourier_orders() {
    // Fourier coefficients of exp(i sq(x)) over one period.
    let n = 1 << 20;
    let mut c = [Complex64::new(0.0, 0.0); 3];
    for j in 0..n {
        let x = 2.0 * PI * (j as f64 + 0.5) / n as f64;
        let v = Complex64::from_polar(1.0, square_wave(x));
        for (m, cm) in c.iter_mut().enumerate() {
            let order = m as f64 - 1.0;
            *cm += v * Complex64::from_polar(1.0, -order * x);
        }
    }
    let p: Vec<f64> = c.iter().map(|z| (z / n as f64).norm_sqr()).collect();
    let first = 4.0 / (PI * PI);
    assert!(p[1] < 1e-10);
    assert!((p[0] - first).abs() < 1e-6 && (p[2] - first).abs() < 1e-6);
    assert!((1.0 - p[0] - p[2] - 0.189).abs() < 1e-3);
}

#[test]
fn grating_splits_point_like_packet() {
    // Many grating periods wide, narrow compared with its distance from z = 0.
    let (z0, kappa, width) = (40.0, 1.0, 2.0);
    let axis = Axis::centered(1 << 16, 64.0).unwrap();
    let packet = SampledField::from_fn(Domain::Position, axis, |z| {
        Complex64::new((-(z - z0) * (z - z0) / (2.0 * width * width)).exp(), 0.0)
    });
    let norm = packet.norm_sqr();
    let out = apply_phase(&packet, &PhaseProfile::bidirectional(kappa, 0.4)).unwrap();
    let k_space = fft::inverse(&out).unwrap();
    let band = |centre: f64| -> f64 {
        k_space
            .samples
            .iter()
            .enumerate()
            .filter(|(j, _)| (k_space.coord(*j) - centre).abs() < kappa * z0 / 2.0)
            .map(|(_, s)| s.norm_sqr())
            .sum::<f64>()
            * k_space.step
            / norm
    };
    let first = 4.0 / (PI * PI);
    let (minus, zero, plus) = (band(-kappa * z0), band(0.0), band(kappa * z0));
    assert!(zero < 1e-3, "zero order {zero}");
    assert!(
        (minus - first).abs() < 1e-3 && (plus - first).abs() < 1e-3,
        "{minus} {plus}"
    );
    assert!((1.0 - minus - plus - 0.189).abs() < 2e-3);
}

#[test]
fn coordinate_map_examples() {
    let g = GaussianParams::default();
    let axis = Axis::centered(1024, 16.0).unwrap();
    let spec = fft::forward(&gaussian_pulse(&g, &axis).unwrap()).unwrap();
    let beta = 2.5;
    let z = coordinate_map(&spec, beta).unwrap();
    assert_eq!(z.domain, Domain::Position);
    assert_eq!(z.samples, spec.samples);
    assert!((z.norm_sqr() * beta - spec.norm_sqr()).abs() < 1e-12);
    // |amplitude|^2 has standard deviation sigma in w, sigma/beta in z.
    let var = |f: &SampledField| {
        let n = f.norm_sqr();
        f.samples
            .iter()
            .enumerate()
            .map(|(j, s)| f.coord(j).powi(2) * s.norm_sqr())
            .sum::<f64>()
            * f.step
            / n
    };
    assert!((var(&spec).sqrt() - 1.0).abs() < 1e-9);
    assert!((var(&z).sqrt() - 1.0 / beta).abs() < 1e-9);
    let back = coordinate_map(&z, beta).unwrap();
    assert_eq!(back.domain, Domain::Frequency);
    assert!((back.start - spec.start).abs() < 1e-12 && (back.step - spec.step).abs() < 1e-15);
    assert!(coordinate_map(&spec, 0.0).is_err());
}

#[test]
fn wrong_domain_rejected() {
    let spec = fft::forward(&gaussian()).unwrap();
    assert!(apply_phase(&spec, &PhaseProfile::lens(1.0)).is_err());
    assert!(apply_phase(&gaussian(), &PhaseProfile::bidirectional(1.0, 0.0)).is_err());
}
