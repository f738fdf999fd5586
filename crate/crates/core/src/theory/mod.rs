//! Numerical engine for the expected residual-histogram dynamics under
//! repeated embedding: the smoothing operators, sign-direction predicates,
//! Cauchy histogram fits, Monte-Carlo validation and directionality
//! experiments.

mod cauchy;
mod expected;
mod experiments;

pub use cauchy::{fit_cauchy, CauchyFit};
pub use expected::{
    expected_step_adaptive, expected_step_approx, expected_step_exact, predict_sign_first,
    predict_sign_second, AdaptiveChangeModel, ExpectedHistogram, Sign,
};
pub use experiments::{
    ablation_classify, apply_ablation, directionality_scan, estimate_beta_prime,
    monte_carlo_deltas, preservation_count, AblationMode, AblationOutcome,
    DirectionalityReport, MonteCarloDeltas,
};
