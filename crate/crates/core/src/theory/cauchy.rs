//! Cauchy fit of a residual histogram.
//!
//! Natural-image residual histograms are well approximated by samples of a
//! centered Cauchy density `f(s; gamma) = (1/pi) gamma / (s^2 + gamma^2)`.
//! The density is concave exactly on `(-gamma/sqrt(3), gamma/sqrt(3))` and
//! convex outside, which is what drives the sign of the expected bin
//! variations under embedding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ResidualHistogram;

/// Maximum-likelihood Cauchy scale fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyFit {
    /// Scale parameter, > 0.
    pub gamma: f64,
    /// Sampling interval between bins (fixed at 1 for integer residuals).
    pub tau: f64,
    /// Log-likelihood of the counts at the fitted scale (natural log).
    pub loglik: f64,
}

impl CauchyFit {
    /// Cauchy density at `s`.
    pub fn density(&self, s: f64) -> f64 {
        cauchy_pdf(s, self.gamma)
    }

    /// Half-width of the concavity interval: the density is strictly concave
    /// for `|s| < gamma / sqrt(3)`.
    pub fn concavity_bound(&self) -> f64 {
        self.gamma / 3f64.sqrt()
    }
}

pub fn cauchy_pdf(s: f64, gamma: f64) -> f64 {
    gamma / (std::f64::consts::PI * (s * s + gamma * gamma))
}

const GAMMA_LO: f64 = 1e-3;
const GAMMA_HI: f64 = 256.0;
const GOLDEN_ITERS: usize = 120;

/// Fit the Cauchy scale to a residual histogram by maximizing
/// `sum_k h_k ln f(k tau; gamma)` with golden-section search over
/// `gamma in (0, 256]`, `tau = 1`.
pub fn fit_cauchy(h: &ResidualHistogram) -> Result<CauchyFit> {
    let total = h.total();
    if total < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 residuals to fit, got {total}"
        )));
    }
    let nonzero = h.counts().iter().filter(|&&c| c > 0).count();
    if nonzero < 2 {
        return Err(Error::Numerical(
            "degenerate histogram: all mass in a single bin".into(),
        ));
    }

    let loglik = |gamma: f64| -> f64 {
        let mut acc = 0.0;
        for (i, &c) in h.counts().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let k = h.min_bin() + i as i32;
            acc += c as f64 * cauchy_pdf(k as f64, gamma).ln();
        }
        acc
    };

    // Golden-section search for the maximizer.
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (GAMMA_LO, GAMMA_HI);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = loglik(c);
    let mut fd = loglik(d);
    for _ in 0..GOLDEN_ITERS {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = loglik(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = loglik(d);
        }
    }
    let gamma = 0.5 * (a + b);
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Numerical("cauchy fit failed".into()));
    }
    Ok(CauchyFit {
        gamma,
        tau: 1.0,
        loglik: loglik(gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::ResidualMatrix;
    use crate::features::{residual, residual_histogram, Predictor};
    use crate::imaging::synth_cover;
    use crate::rng::SeededRng;
    use rand::Rng;

    fn hist_from_values(values: Vec<i16>) -> ResidualHistogram {
        let n = values.len();
        residual_histogram(
            &ResidualMatrix {
                width: n,
                height: 1,
                values,
            },
            None,
        )
    }

    #[test]
    fn recovers_known_scale() {
        // Draw from an exact Cauchy(gamma = 3) via the quantile transform,
        // quantize to bins, and fit. Oracle: the median absolute value of a
        // centered Cauchy equals gamma.
        let gamma_true = 3.0;
        let mut r = SeededRng::new(99).rng();
        let mut values = Vec::with_capacity(100_000);
        let mut abs: Vec<f64> = Vec::with_capacity(100_000);
        for _ in 0..100_000 {
            let u: f64 = r.gen_range(-0.499999..0.499999);
            let s = gamma_true * (std::f64::consts::PI * u).tan();
            abs.push(s.abs());
            values.push(s.round().clamp(-255.0, 255.0) as i16);
        }
        abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median_abs = abs[abs.len() / 2];
        assert!((median_abs - gamma_true).abs() < 0.05, "oracle: {median_abs}");

        let fit = fit_cauchy(&hist_from_values(values)).unwrap();
        assert!((fit.gamma - gamma_true).abs() <= 0.1, "gamma {}", fit.gamma);
        assert!(fit.loglik < 0.0);
    }

    #[test]
    fn inflection_points_at_gamma_over_sqrt3() {
        // Sign of the second central difference flips at |s| = gamma/sqrt(3).
        for gamma in [1.5, 3.0, 8.0] {
            let fit = CauchyFit {
                gamma,
                tau: 1.0,
                loglik: 0.0,
            };
            let bound = fit.concavity_bound();
            let eps = 1e-4;
            let dd = |s: f64| {
                cauchy_pdf(s - eps, gamma) + cauchy_pdf(s + eps, gamma) - 2.0 * cauchy_pdf(s, gamma)
            };
            for f in [0.2, 0.5, 0.9] {
                assert!(dd(f * bound) < 0.0, "concave inside at {}", f * bound);
                assert!(dd(-f * bound) < 0.0);
            }
            for f in [1.1, 2.0, 5.0] {
                assert!(dd(f * bound) > 0.0, "convex outside at {}", f * bound);
                assert!(dd(-f * bound) > 0.0);
            }
        }
    }

    #[test]
    fn discrete_concavity_matches_bound_within_one_bin() {
        for gamma in [2.0f64, 4.0, 9.0] {
            let bound = gamma / 3f64.sqrt();
            for k in -20i32..=20 {
                let s = k as f64;
                let dd = cauchy_pdf(s - 1.0, gamma) + cauchy_pdf(s + 1.0, gamma)
                    - 2.0 * cauchy_pdf(s, gamma);
                if (s.abs() - bound).abs() > 1.0 {
                    // Away from the inflection point the discrete and
                    // continuous signs agree.
                    assert_eq!(dd < 0.0, s.abs() < bound, "gamma {gamma} k {k}");
                }
            }
        }
    }

    #[test]
    fn concavity_predicts_first_order_signs_on_covers() {
        // On a synthetic cover, bins well inside the fitted concavity
        // interval predict Negative and bins well outside predict Positive.
        let img = synth_cover(256, 256, 0.5, SeededRng::new(7)).unwrap();
        let h = residual_histogram(&residual(&img, Predictor::Horizontal).unwrap(), None);
        let fit = fit_cauchy(&h).unwrap();
        let bound = fit.concavity_bound();
        use crate::theory::{predict_sign_first, Sign};
        assert_eq!(predict_sign_first(&h, 0), Sign::Negative);
        // Pick a probe comfortably outside the concave core but still well
        // populated.
        let probe = (2.0 * bound).ceil() as i32 + 2;
        assert_eq!(predict_sign_first(&h, probe), Sign::Positive);
        assert_eq!(predict_sign_first(&h, -probe), Sign::Positive);
    }

    #[test]
    fn degenerate_histograms_rejected() {
        let h = hist_from_values(vec![0; 500]);
        assert!(matches!(fit_cauchy(&h), Err(Error::Numerical(_))));
        let h = hist_from_values(vec![1; 50]);
        assert!(matches!(fit_cauchy(&h), Err(Error::InvalidArgument(_))));
    }
}
