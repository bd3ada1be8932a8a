//! Closed-form regret bounds for corrupt bandits.
//!
//! Everything is driven by the divergence `D_a = d(lambda_a, g_a(mu*))`
//! between an arm's feedback mean and the feedback mean that arm would show
//! if its reward mean were optimal. `D_a = 0` means the arm cannot be told
//! apart from the optimal one through its feedback.

use std::f64::consts::{E, PI};

use crate::environment::CorruptBanditModel;
use crate::error::{Error, Result};
use crate::klmath::{kl, kl_derivative};

/// Divergences below this are reported as unidentifiable.
pub const IDENTIFIABILITY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Coefficient of `log T` contributed by each arm (0 for optimal arms).
    pub per_arm_terms: Vec<f64>,
    /// Sum of `per_arm_terms`.
    pub total_coefficient: f64,
    /// `T`-independent part; zero for lower bounds.
    pub constant_terms: f64,
    /// Suboptimal arms with zero divergence.
    pub unidentifiable_arms: Vec<usize>,
}

impl BoundReport {
    /// `total_coefficient * ln T + constant_terms`, with `ln 1 = 0`
    /// contributing nothing even for an infinite coefficient.
    pub fn value_at(&self, horizon: u64) -> f64 {
        let log_t = (horizon.max(1) as f64).ln();
        let lead = if log_t == 0.0 {
            0.0
        } else {
            self.total_coefficient * log_t
        };
        lead + self.constant_terms
    }
}

/// `d(lambda_a, g_a(mu*))` for every arm (0 for arms with zero gap).
pub fn arm_divergences(model: &CorruptBanditModel) -> Vec<f64> {
    let best = model.optimal_mean();
    model
        .feedback_means()
        .iter()
        .zip(model.schemes())
        .zip(model.gaps())
        .map(|((&lambda, scheme), gap)| {
            if gap > 0.0 {
                kl(lambda, scheme.feedback_mean(best))
            } else {
                0.0
            }
        })
        .collect()
}

/// Lower-bound coefficient `sum_a Delta_a / D_a` over suboptimal arms.
pub fn lower_bound(model: &CorruptBanditModel) -> BoundReport {
    let gaps = model.gaps();
    let divergences = arm_divergences(model);
    let mut unidentifiable_arms = Vec::new();
    let per_arm_terms: Vec<f64> = gaps
        .iter()
        .zip(&divergences)
        .enumerate()
        .map(|(arm, (&gap, &d))| {
            if gap <= 0.0 {
                0.0
            } else if d == 0.0 {
                unidentifiable_arms.push(arm);
                f64::INFINITY
            } else {
                gap / d
            }
        })
        .collect();
    BoundReport {
        total_coefficient: per_arm_terms.iter().sum(),
        per_arm_terms,
        constant_terms: 0.0,
        unidentifiable_arms,
    }
}

/// Asymptotic lower bound on the regret at horizon `T`:
/// `ln T * sum_a Delta_a / D_a`. Infinite when some suboptimal arm is
/// unidentifiable.
pub fn lower_bound_curve(model: &CorruptBanditModel, horizon: u64) -> f64 {
    lower_bound(model).value_at(horizon)
}

/// Finite-time upper bound on the regret of kl-UCB-CF with
/// `f(t) = ln t + 3 ln ln t`:
///
/// ```text
/// sum_a Delta_a [ ln T / D + sqrt(2 pi) sqrt(D'^2 / D^3) sqrt(ln T + 3 ln ln T)
///                 + (4e + 3 / D) ln ln T + 2 (D' / D)^2 + 4 ]
/// ```
///
/// with `D = d(lambda_a, g_a(mu*))` and `D'` its derivative in the first
/// argument.
pub fn finite_time_ub_klucb(model: &CorruptBanditModel, horizon: u64) -> Result<f64> {
    if horizon < 3 {
        return Err(Error::domain("horizon", horizon as f64));
    }
    let log_t = (horizon as f64).ln();
    let log_log_t = log_t.ln();
    let best = model.optimal_mean();
    let mut total = 0.0;
    for (arm, ((&gap, &lambda), scheme)) in model
        .gaps()
        .iter()
        .zip(model.feedback_means())
        .zip(model.schemes())
        .enumerate()
    {
        if gap <= 0.0 {
            continue;
        }
        let target = scheme.feedback_mean(best);
        let d = kl(lambda, target);
        if d == 0.0 {
            return Err(Error::UnidentifiableModel { arm });
        }
        let d_prime = kl_derivative(lambda, target);
        let ratio = d_prime / d;
        let per_arm = log_t / d
            + (2.0 * PI).sqrt() * (d_prime * d_prime / (d * d * d)).sqrt() * (log_t + 3.0 * log_log_t).sqrt()
            + (4.0 * E + 3.0 / d) * log_log_t
            + 2.0 * ratio * ratio
            + 4.0;
        total += gap * per_arm;
    }
    Ok(total)
}

/// `((e^eps - 1) / (e^eps + 1))^2 = tanh(eps / 2)^2`, the squared slope of
/// the `eps`-LDP scheme's mean function.
pub fn ldp_factor(epsilon: f64) -> f64 {
    (0.5 * epsilon).tanh().powi(2)
}

/// Leading `ln T` term of the regret upper bound under `eps`-LDP randomized
/// response: `sum_a 2 ln T / (Delta_a ((e^eps - 1)/(e^eps + 1))^2)`.
///
/// Arms with zero gap are treated as optimal and contribute nothing.
pub fn ldp_ub_curve(gaps: &[f64], epsilon: f64, horizon: u64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::domain("epsilon", epsilon));
    }
    if let Some(&bad) = gaps.iter().find(|g| g.is_nan() || **g < 0.0) {
        return Err(Error::domain("gap", bad));
    }
    let log_t = (horizon.max(1) as f64).ln();
    let factor = ldp_factor(epsilon);
    Ok(gaps
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| 2.0 * log_t / (g * factor))
        .sum())
}

/// Leading term of the randomized-response bound,
/// `sum_a 2 ln T / (Delta_a (p00(a) + p11(a) - 1)^2)`.
pub fn randomized_response_ub(model: &CorruptBanditModel, horizon: u64) -> f64 {
    let log_t = (horizon.max(1) as f64).ln();
    model
        .gaps()
        .iter()
        .zip(model.schemes())
        .filter(|(&g, _)| g > 0.0)
        .map(|(&g, s)| 2.0 * log_t / (g * s.slope() * s.slope()))
        .sum()
}

/// Suboptimal arms whose divergence is below
/// [`IDENTIFIABILITY_THRESHOLD`], with that divergence.
pub fn identifiability_check(model: &CorruptBanditModel) -> Vec<(usize, f64)> {
    let gaps = model.gaps();
    arm_divergences(model)
        .into_iter()
        .enumerate()
        .filter(|&(arm, d)| gaps[arm] > 0.0 && d < IDENTIFIABILITY_THRESHOLD)
        .collect()
}
