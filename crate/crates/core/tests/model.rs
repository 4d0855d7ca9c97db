// SPDX-License-Identifier: Apache-2.0
use std::f64::consts::PI;

use tfsr_core::model::{aux_f, port_distributions, port_probabilities};
use tfsr_core::processor::{incoherent_powers, pudtai_ports_ideal};
use tfsr_core::signals::default_time_axis;
use tfsr_core::special::erfc_real;
use tfsr_core::{ApertureSpec, Axis, DeviceCalibration, GaussianParams, TwoSourceSpec};

// \int_{|t| > a} psi^2(t) cos(eps t) dt by composite Simpson, divided by
// exp(-eps^2/8) to isolate f.
fn f_by_quadrature(a: f64, eps: f64) -> f64 {
    let n = 20_000;
    let hi = 8.0;
    let h = (hi - a) / n as f64;
    let g = |t: f64| (2.0 / PI).sqrt() * (-2.0 * t * t).exp() * (eps * t).cos();
    let mut s = g(a) + g(hi);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + k as f64 * h);
    }
    2.0 * s * h / 3.0 / (-eps * eps / 8.0).exp()
}

#[test]
fn aux_f_matches_overlap_quadrature() {
    for &(a, e) in &[(0.564, 0.5), (0.3, 1.7), (1.0, 0.05), (0.0, 2.5)] {
        let want = f_by_quadrature(a, e);
        assert!((aux_f(a, e) - want).abs() < 1e-10, "a={a} eps={e}");
    }
}

#[test]
fn aux_f_frozen_value() {
    // Fixed by the quadrature oracle above (also reproduced at 40 digits).
    assert!((aux_f(0.564, 0.5) - 0.244_298_428_849_352_5).abs() < 1e-12);
}

#[test]
fn aux_f_limits() {
    for e in [0.0, 0.3, 1.0, 4.0] {
        assert!((aux_f(0.0, e) - 1.0).abs() < 1e-13);
    }
    for a in [0.1, 0.564, 1.2] {
        assert!((aux_f(a, 0.0) - erfc_real(2f64.sqrt() * a)).abs() < 1e-15);
    }
}

#[test]
fn probabilities_examples() {
    let ideal = DeviceCalibration::ideal();
    let p = port_probabilities(0.0, &ideal).unwrap();
    assert_eq!(p.p_minus, 0.0);
    assert!((p.p_plus - 1.0).abs() < 1e-15);
    assert!(p.p_cross.abs() < 1e-15);

    let p = port_probabilities(0.5, &ideal).unwrap();
    let want = 0.5 * (1.0 - (-0.03125f64).exp());
    assert!((p.p_minus - want).abs() < 1e-15);
    assert!((p.p_minus - 0.015384).abs() < 1e-6);
}

#[test]
fn probabilities_match_ideal_port_decomposition() {
    // Phase-averaged |u-|^2 from the field-level decomposition.
    let axis = default_time_axis();
    for &(eps, a) in &[(0.5, 0.0), (1.3, 0.564), (0.2, 0.8)] {
        let spec = TwoSourceSpec::new(eps, GaussianParams::default()).unwrap();
        let ap = ApertureSpec::new(a, 1.0).unwrap();
        let (m, p) =
            incoherent_powers(&spec, &axis, |s| Ok(pudtai_ports_ideal(s, &ap)?.powers())).unwrap();
        let model = port_probabilities(eps, &DeviceCalibration::ideal().with_aperture(a)).unwrap();
        // The hard aperture edge is resolved to one grid step.
        let tol = if a == 0.0 { 1e-12 } else { 2e-3 };
        assert!(
            (m - model.p_minus).abs() < tol,
            "eps={eps} a={a}: {m} vs {}",
            model.p_minus
        );
        assert!(
            (p - model.p_plus).abs() < tol,
            "eps={eps} a={a}: {p} vs {}",
            model.p_plus
        );
    }
}

#[test]
fn invalid_inputs() {
    assert!(port_probabilities(-0.1, &DeviceCalibration::ideal()).is_err());
    assert!(port_probabilities(f64::NAN, &DeviceCalibration::ideal()).is_err());
    let mut c = DeviceCalibration::ideal();
    c.t_a_sigma = -1.0;
    assert!(port_probabilities(0.1, &c).is_err());
}

#[test]
fn distributions_integrate_to_probabilities() {
    let axis = Axis::centered(4096, 16.0).unwrap();
    let cal = DeviceCalibration::experimental();
    for eps in [0.0, 0.3, 1.0] {
        let (m, p) = port_distributions(eps, &cal, &axis).unwrap();
        let model = port_probabilities(eps, &cal).unwrap();
        assert!((m.integral() - model.p_minus).abs() < 2e-3, "eps={eps}");
        assert!((p.integral() - model.p_plus).abs() < 2e-3, "eps={eps}");
    }
}

#[test]
fn distributions_examples() {
    let axis = Axis::centered(4096, 16.0).unwrap();
    let (m, _) = port_distributions(0.0, &DeviceCalibration::ideal(), &axis).unwrap();
    assert!(m.values.iter().all(|v| v.abs() < 1e-14));

    // The aperture edge is quantized to the grid step, so use a fine grid.
    let fine = Axis::centered(16384, 16.0).unwrap();
    let (_, p) =
        port_distributions(0.0, &DeviceCalibration::ideal().with_aperture(0.564), &fine).unwrap();
    assert!((p.integral() - 0.2594).abs() < 1e-3);

    // Antisymmetric port at eps = 0.3 with unit visibility: the density
    // vanishes at w = 0 and peaks in two side lobes.
    let (m, _) =
        port_distributions(0.3, &DeviceCalibration::ideal().with_aperture(0.564), &axis).unwrap();
    let centre = m.values[m.values.len() / 2];
    let peak = m.values.iter().cloned().fold(0.0, f64::max);
    let k_peak = m.values.iter().position(|&v| v == peak).unwrap();
    let w_peak = m.axis().coord(k_peak);
    assert!(centre < 1e-12 * peak);
    assert!(w_peak.abs() > 0.5, "peak at {w_peak}");
}
