// SPDX-License-Identifier: Apache-2.0
//! Photon-counting Monte Carlo, maximum-likelihood separation estimators for
//! the interferometer and for direct imaging, and bootstrap statistics.
//!
//! Every random draw comes from a ChaCha8 generator keyed by `(seed, stream)`,
//! one stream per bootstrap set, so results do not depend on thread count.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::fisher::{f_di_noisy, f_pudtai, DiNoise};
use crate::model::{
    port_probabilities, port_probabilities_unchecked, DeviceCalibration, PortProbabilities,
};
use crate::optimize::{brent_root, golden_max};
use crate::output::fmt_f64;

/// Upper end of the separation search interval.
pub const EPS_MAX: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n_minus: u64,
    pub n_plus: u64,
    pub n_total: u64,
}

impl CountRecord {
    pub fn new(n_minus: u64, n_plus: u64, n_total: u64) -> Result<Self> {
        if n_minus.checked_add(n_plus).is_none_or(|s| s > n_total) {
            return Err(invalid("n_total", "must be at least n_minus + n_plus"));
        }
        Ok(CountRecord {
            n_minus,
            n_plus,
            n_total,
        })
    }

    pub fn n_cross(&self) -> u64 {
        self.n_total - self.n_minus - self.n_plus
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trinomial draw of `n` photons over `(p-, p+, px)`.
pub fn sample_counts_from<R: Rng + ?Sized>(
    probs: &PortProbabilities,
    n: u64,
    rng: &mut R,
) -> CountRecord {
    let p_minus = probs.p_minus.clamp(0.0, 1.0);
    let n_minus = binomial(n, p_minus, rng);
    let rest = 1.0 - p_minus;
    let p_plus = if rest > 0.0 {
        (probs.p_plus / rest).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let n_plus = binomial(n - n_minus, p_plus, rng);
    CountRecord {
        n_minus,
        n_plus,
        n_total: n,
    }
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p == 0.0 {
        return 0;
    }
    Binomial::new(n, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// `n_photons` incident photons at separation `epsilon`, stream 0 of `seed`.
pub fn sample_counts(
    epsilon: f64,
    cal: &DeviceCalibration,
    n_photons: u64,
    seed: u64,
) -> Result<CountRecord> {
    if n_photons == 0 {
        return Err(invalid("n_photons", "must be >= 1"));
    }
    let probs = port_probabilities(epsilon, cal)?;
    Ok(sample_counts_from(
        &probs,
        n_photons,
        &mut stream_rng(seed, 0),
    ))
}

/// Shot mode: `n_shots` pulses with Poisson photon numbers of mean
/// `mean_photons`, then the trinomial split of the total.
pub fn sample_counts_shots<R: Rng + ?Sized>(
    epsilon: f64,
    cal: &DeviceCalibration,
    n_shots: u64,
    mean_photons: f64,
    rng: &mut R,
) -> Result<CountRecord> {
    require_positive("mean_photons", mean_photons)?;
    let probs = port_probabilities(epsilon, cal)?;
    let lambda = mean_photons * n_shots as f64;
    let total = if lambda > 0.0 {
        Poisson::new(lambda)
            .map_err(|e| invalid("mean_photons", e.to_string()))?
            .sample(rng) as u64
    } else {
        0
    };
    Ok(sample_counts_from(&probs, total, rng))
}

/// `p-(eps) / p+(eps)`.
pub fn count_ratio(epsilon: f64, cal: &DeviceCalibration) -> f64 {
    let p = port_probabilities_unchecked(epsilon, cal);
    p.p_minus / p.p_plus
}

/// Separation solving `p-(eps)/p+(eps) = N-/N+` on `[0, EPS_MAX]`.
///
/// The root is searched in `s = eps^2`, where the ratio is linear near zero.
/// Ratios at or below the zero-separation value give 0; ratios above the
/// largest reachable one clamp to the end of the monotone branch.
pub fn mle_pudtai(counts: &CountRecord, cal: &DeviceCalibration) -> Result<f64> {
    cal.validate()?;
    if counts.n_plus == 0 {
        return Err(Error::DegenerateRecord(
            "no counts in the symmetric port".into(),
        ));
    }
    if cal.eta_plus == 0.0 {
        return Err(invalid("eta_plus", "symmetric port must transmit"));
    }
    let observed = counts.n_minus as f64 / counts.n_plus as f64;
    let ratio = |s: f64| count_ratio(s.max(0.0).sqrt(), cal);
    if observed <= ratio(0.0) {
        return Ok(0.0);
    }
    let s_top = monotone_limit(&ratio);
    if observed >= ratio(s_top) {
        log::warn!(
            "count ratio {observed} beyond the estimator range; clamping to eps = {}",
            s_top.sqrt()
        );
        return Ok(s_top.sqrt());
    }
    let s = brent_root(|s| ratio(s) - observed, 0.0, s_top, 1e-15)
        .ok_or_else(|| Error::DegenerateRecord("ratio equation has no bracketed root".into()))?;
    Ok(s.sqrt())
}

// End of the first increasing branch of the ratio on [0, EPS_MAX^2].
fn monotone_limit(ratio: &impl Fn(f64) -> f64) -> f64 {
    let top = EPS_MAX * EPS_MAX;
    let steps = 400;
    let mut prev = ratio(0.0);
    for k in 1..=steps {
        let s = top * k as f64 / steps as f64;
        let r = ratio(s);
        if r < prev {
            let lo = top * (k - 2).max(0) as f64 / steps as f64;
            return golden_max(ratio, lo, s, 1e-12);
        }
        prev = r;
    }
    top
}

/// Trinomial log-likelihood without the multinomial coefficient.
pub fn trinomial_log_likelihood(
    counts: &CountRecord,
    epsilon: f64,
    cal: &DeviceCalibration,
) -> f64 {
    let p = port_probabilities_unchecked(epsilon, cal);
    let term = |n: u64, q: f64| if n == 0 { 0.0 } else { n as f64 * q.ln() };
    term(counts.n_minus, p.p_minus)
        + term(counts.n_plus, p.p_plus)
        + term(counts.n_cross(), p.p_cross)
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Log-likelihood of direct-imaging frequency tags for two Gaussians of
/// width `sigma` at `+- sigma eps / 2`, up to an `eps`-independent constant.
pub fn qmti_log_likelihood(tags: &[f64], sigma: f64, epsilon: f64) -> f64 {
    let d = sigma * epsilon / 2.0;
    let s2 = sigma * sigma;
    let n = tags.len() as f64;
    -n * d * d / (2.0 * s2) + tags.iter().map(|&w| log_cosh(w * d / s2)).sum::<f64>()
}

/// Direct-imaging maximum-likelihood separation on `[0, EPS_MAX]`: coarse
/// scan, golden-section refinement and a final parabolic step.
pub fn mle_qmti(tags: &[f64], sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    if tags.is_empty() {
        return Err(Error::DegenerateRecord("empty tag set".into()));
    }
    if tags.len() < 10 {
        return Err(invalid(
            "tags",
            format!("need at least 10 tags, got {}", tags.len()),
        ));
    }
    if tags.iter().any(|w| !w.is_finite()) {
        return Err(invalid("tags", "non-finite frequency tag"));
    }
    let ll = |e: f64| qmti_log_likelihood(tags, sigma, e);
    let steps: usize = 50;
    let h = EPS_MAX / steps as f64;
    let (best, _) =
        (0..=steps)
            .map(|k| (k, ll(k as f64 * h)))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
            );
    let lo = best.saturating_sub(1) as f64 * h;
    let hi = ((best + 1).min(steps)) as f64 * h;
    let mut x = golden_max(ll, lo, hi, 1e-9);
    let mut fx = ll(x);
    if ll(lo) >= fx {
        x = lo;
        fx = ll(lo);
    }
    let dx = 1e-4;
    if x - dx > 0.0 && x + dx < EPS_MAX {
        let (fl, fr) = (ll(x - dx), ll(x + dx));
        let curv = fl - 2.0 * fx + fr;
        if curv < 0.0 {
            let cand = x - dx * (fr - fl) / (2.0 * curv);
            if (cand - x).abs() < dx && ll(cand) > fx {
                x = cand;
            }
        }
    }
    Ok(x)
}

/// `n` direct-imaging frequency tags at separation `epsilon`.
pub fn sample_qmti_tags<R: Rng + ?Sized>(
    epsilon: f64,
    sigma: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    require_positive("sigma", sigma)?;
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid("sigma", e.to_string()))?;
    let d = sigma * epsilon / 2.0;
    Ok((0..n)
        .map(|_| {
            let centre = if rng.random::<bool>() { d } else { -d };
            centre + normal.sample(rng)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub epsilon_true: f64,
    pub eps_hat_mean: f64,
    pub variance: f64,
    pub bias: f64,
    pub n_boot: usize,
    pub photons_per_set: u64,
}

impl EstimatorReport {
    fn from_estimates(epsilon_true: f64, photons_per_set: u64, est: &[f64]) -> Self {
        let n = est.len() as f64;
        let mean = est.iter().sum::<f64>() / n;
        let variance = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        EstimatorReport {
            epsilon_true,
            eps_hat_mean: mean,
            variance,
            bias: mean - epsilon_true,
            n_boot: est.len(),
            photons_per_set,
        }
    }

    /// Standard error of the mean estimate.
    pub fn sem(&self) -> f64 {
        (self.variance / self.n_boot as f64).sqrt()
    }

    /// Variance rescaled to `k` processed photons, `var * N / k`.
    pub fn variance_per_photons(&self, k: f64) -> f64 {
        self.variance * self.photons_per_set as f64 / k
    }

    /// Approximate standard error of the variance, `var sqrt(2/(n-1))`.
    pub fn variance_se(&self) -> f64 {
        self.variance * (2.0 / (self.n_boot as f64 - 1.0)).sqrt()
    }
}

fn check_boot(n_boot: usize, photons: u64) -> Result<()> {
    if n_boot < 2 {
        return Err(invalid("n_boot", "need at least 2 sets for a variance"));
    }
    if photons == 0 {
        return Err(invalid("photons_per_set", "must be >= 1"));
    }
    Ok(())
}

/// `n_boot` independent sets of `photons_per_set` incident photons, each
/// estimated with [`mle_pudtai`]. Set `k` uses stream `k` of `seed`.
pub fn bootstrap(
    epsilon_true: f64,
    cal: &DeviceCalibration,
    photons_per_set: u64,
    n_boot: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    check_boot(n_boot, photons_per_set)?;
    let probs = port_probabilities(epsilon_true, cal)?;
    let est: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|k| {
            let counts =
                sample_counts_from(&probs, photons_per_set, &mut stream_rng(seed, k as u64));
            mle_pudtai(&counts, cal)
        })
        .collect::<Result<_>>()?;
    Ok(EstimatorReport::from_estimates(
        epsilon_true,
        photons_per_set,
        &est,
    ))
}

/// Direct-imaging counterpart of [`bootstrap`] with ideal Gaussian tags.
pub fn bootstrap_qmti(
    epsilon_true: f64,
    sigma: f64,
    photons_per_set: u64,
    n_boot: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    check_boot(n_boot, photons_per_set)?;
    let est: Vec<f64> = (0..n_boot)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let tags = sample_qmti_tags(epsilon_true, sigma, photons_per_set as usize, &mut rng)?;
            mle_qmti(&tags, sigma)
        })
        .collect::<Result<_>>()?;
    Ok(EstimatorReport::from_estimates(
        epsilon_true,
        photons_per_set,
        &est,
    ))
}

/// Ratio of Cramer-Rao variances, direct imaging over interferometer, at
/// equal photon number.
pub fn improvement_ratio(epsilon: f64, cal: &DeviceCalibration, qmti: &DiNoise) -> Result<f64> {
    Ok(f_pudtai(epsilon, cal)? / f_di_noisy(epsilon, qmti)?)
}

/// Photons the variance is normalized to in reports.
pub const REPORT_PHOTONS: f64 = 10.0;

/// `epsilon_true,eps_hat_mean,variance_per_10_photons,bias,crb_pudtai,crb_qmti`,
/// with both bounds per 10 photons.
pub fn write_report_csv<W: Write>(
    rows: &[(EstimatorReport, f64, f64)],
    mut w: W,
) -> io::Result<()> {
    writeln!(
        w,
        "epsilon_true,eps_hat_mean,variance_per_10_photons,bias,crb_pudtai,crb_qmti"
    )?;
    for (r, f_pud, f_qmti) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.epsilon_true),
            fmt_f64(r.eps_hat_mean),
            fmt_f64(r.variance_per_photons(REPORT_PHOTONS)),
            fmt_f64(r.bias),
            fmt_f64(1.0 / (REPORT_PHOTONS * f_pud)),
            fmt_f64(1.0 / (REPORT_PHOTONS * f_qmti)),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_add_up() {
        let c = sample_counts(0.4, &DeviceCalibration::experimental(), 1000, 7).unwrap();
        assert!(c.n_minus + c.n_plus <= c.n_total);
        assert_eq!(c.n_minus + c.n_plus + c.n_cross(), 1000);
    }

    #[test]
    fn zero_plus_counts_is_degenerate() {
        let c = CountRecord::new(3, 0, 10).unwrap();
        assert!(matches!(
            mle_pudtai(&c, &DeviceCalibration::experimental()),
            Err(Error::DegenerateRecord(_))
        ));
    }

    #[test]
    fn inconsistent_record_rejected() {
        assert!(CountRecord::new(6, 6, 10).is_err());
    }

    #[test]
    fn log_cosh_is_stable() {
        assert!((log_cosh(1000.0) - (1000.0 - std::f64::consts::LN_2)).abs() < 1e-12);
        assert!(log_cosh(0.0).abs() < 1e-16);
    }

    #[test]
    fn one_set_is_rejected() {
        assert!(bootstrap(0.3, &DeviceCalibration::experimental(), 100, 1, 0).is_err());
    }
}
