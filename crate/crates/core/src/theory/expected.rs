//! Expected-histogram operators and sign-direction predicates.
//!
//! Embedding moves each residual to a neighboring bin with probabilities
//! fixed by the change rate, so the expected histogram after one embedding is
//! a short symmetric convolution of the original. Three operators are
//! provided: the first-order approximation, the exact four-case expansion for
//! independent changes, and the dependent-change generalization
//! parameterized by the conditional change probability of a neighbor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ResidualHistogram;

/// Real-valued histogram bins, used for expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedHistogram {
    min_bin: i32,
    values: Vec<f64>,
}

impl ExpectedHistogram {
    pub fn new(min_bin: i32, values: Vec<f64>) -> Self {
        Self { min_bin, values }
    }

    pub fn from_counts(h: &ResidualHistogram) -> Self {
        Self {
            min_bin: h.min_bin(),
            values: h.counts().iter().map(|&c| c as f64).collect(),
        }
    }

    pub fn min_bin(&self) -> i32 {
        self.min_bin
    }

    pub fn max_bin(&self) -> i32 {
        self.min_bin + self.values.len() as i32 - 1
    }

    /// Value at bin `k`; out-of-range bins read as zero.
    pub fn bin(&self, k: i32) -> f64 {
        let idx = k - self.min_bin;
        if idx < 0 || idx as usize >= self.values.len() {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Apply the 5-tap expectation kernel `[c2, c1, c0, c1, c2]`, expanding
    /// the bin range so no mass leaves the histogram.
    fn convolve(&self, c0: f64, c1: f64, c2: f64) -> ExpectedHistogram {
        let n = self.values.len();
        let mut out = vec![0.0f64; n + 4];
        for (i, &v) in self.values.iter().enumerate() {
            let j = i + 2;
            out[j] += c0 * v;
            out[j - 1] += c1 * v;
            out[j + 1] += c1 * v;
            out[j - 2] += c2 * v;
            out[j + 2] += c2 * v;
        }
        ExpectedHistogram {
            min_bin: self.min_bin - 2,
            values: out,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in [0,1], got {alpha}"
        )));
    }
    Ok(())
}

/// Dependent-change model: `beta` is the marginal change probability of a
/// pixel, `beta_prime` the probability that a pixel changes given that its
/// neighbor (the prediction pixel) changed. Independence is `beta_prime ==
/// beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveChangeModel {
    pub beta: f64,
    pub beta_prime: f64,
}

impl AdaptiveChangeModel {
    pub fn new(beta: f64, beta_prime: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "beta must be in [0, 1/2], got {beta}"
            )));
        }
        if !(0.0..=1.0).contains(&beta_prime) {
            return Err(Error::InvalidArgument(format!(
                "beta_prime must be in [0, 1], got {beta_prime}"
            )));
        }
        let model = Self { beta, beta_prime };
        let b2 = model.beta_double_prime();
        if !(0.0..=1.0).contains(&b2) {
            return Err(Error::InvalidArgument(format!(
                "derived beta'' = {b2} outside [0, 1]"
            )));
        }
        Ok(model)
    }

    pub fn independent(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new(alpha / 2.0, alpha / 2.0)
    }

    /// Probability that a pixel changes given its neighbor did not:
    /// `beta (1 - beta') / (1 - beta)`.
    pub fn beta_double_prime(&self) -> f64 {
        if self.beta >= 1.0 {
            return 1.0;
        }
        self.beta * (1.0 - self.beta_prime) / (1.0 - self.beta)
    }
}

fn adaptive_kernel(model: &AdaptiveChangeModel) -> (f64, f64, f64) {
    let b = model.beta;
    let bp = model.beta_prime;
    let both = b * bp;
    // Joint cases: none change, exactly one changes (x2), both change.
    let c0 = (1.0 - 2.0 * b + both) + 0.5 * both;
    let c1 = b * (1.0 - bp);
    let c2 = 0.25 * both;
    (c0, c1, c2)
}

/// First-order approximation of the expected histogram after one embedding
/// with selection rate `alpha`:
/// `E[h'_k] = (1 - alpha) h_k + (alpha/2)(h_{k-1} + h_{k+1})`.
pub fn expected_step_approx(h: &ExpectedHistogram, alpha: f64) -> Result<ExpectedHistogram> {
    check_alpha(alpha)?;
    Ok(h.convolve(1.0 - alpha, 0.5 * alpha, 0.0))
}

/// Exact expectation for independent changes (four-case expansion):
/// `E[h'_k] = (1-b)^2 h_k + b(1-b)(h_{k±1}) + (b^2/2) h_k + (b^2/4)(h_{k±2})`
/// with `b = alpha/2`.
pub fn expected_step_exact(h: &ExpectedHistogram, alpha: f64) -> Result<ExpectedHistogram> {
    check_alpha(alpha)?;
    let model = AdaptiveChangeModel::independent(alpha)?;
    Ok(expected_step_adaptive(h, &model))
}

/// Exact expectation under the dependent-change model. Reduces bit-for-bit to
/// [`expected_step_exact`] when `beta_prime == beta`.
pub fn expected_step_adaptive(
    h: &ExpectedHistogram,
    model: &AdaptiveChangeModel,
) -> ExpectedHistogram {
    let (c0, c1, c2) = adaptive_kernel(model);
    h.convolve(c0, c1, c2)
}

/// Sign of an expected per-bin variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Positive,
    Indeterminate,
}

impl Sign {
    pub fn of(x: f64, tolerance: f64) -> Sign {
        if x < -tolerance {
            Sign::Negative
        } else if x > tolerance {
            Sign::Positive
        } else {
            Sign::Indeterminate
        }
    }
}

/// Sign of the expected first-order variation `E[h'_k] - h_k`: negative iff
/// `h_k` lies strictly above the midpoint of its neighbors, positive iff
/// strictly below, indeterminate at equality. Exact integer arithmetic.
pub fn predict_sign_first(h: &ResidualHistogram, k: i32) -> Sign {
    let mid2 = h.bin(k - 1) + h.bin(k + 1);
    let hk2 = 2 * h.bin(k);
    if hk2 > mid2 {
        Sign::Negative
    } else if hk2 < mid2 {
        Sign::Positive
    } else {
        Sign::Indeterminate
    }
}

/// Sufficient-condition sign of the expected second-order variation
/// `E[h''_k] - E[h'_k]` for selection rates `alpha <= 1/2`: negative when
/// `h_k` lies strictly above both the `h_{k±1}` midpoint and the `h_{k±2}`
/// midpoint, positive when strictly below both, otherwise indeterminate
/// (the conditions are sufficient, not necessary).
pub fn predict_sign_second(h: &ResidualHistogram, k: i32, alpha: f64) -> Result<Sign> {
    if alpha <= 0.0 || alpha > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0,1], got {alpha}"
        )));
    }
    if alpha > 0.5 {
        return Err(Error::AssumptionViolated(format!(
            "second-order sign prediction requires alpha <= 1/2, got {alpha}"
        )));
    }
    let hk2 = 2 * h.bin(k);
    let near = h.bin(k - 1) + h.bin(k + 1);
    let far = h.bin(k - 2) + h.bin(k + 2);
    Ok(if hk2 > near && hk2 > far {
        Sign::Negative
    } else if hk2 < near && hk2 < far {
        Sign::Positive
    } else {
        Sign::Indeterminate
    })
}
