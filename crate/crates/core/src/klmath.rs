//! Bernoulli Kullback-Leibler divergence and the confidence-bound inversions
//! used by every KL-based index and bound in the crate.
//!
//! All divergences are in nats. Boundary conventions: `0 * ln 0 = 0`, and
//! `d(x, 0) = d(x, 1) = +inf` whenever `x` differs from the boundary value.

use crate::error::{Error, Result};

/// Absolute tolerance of the bisection in [`kl_upper_inverse`] and
/// [`kl_lower_inverse`].
pub const INVERSION_TOLERANCE: f64 = 1e-9;

/// Iteration cap for the bisection.
pub const INVERSION_MAX_ITERATIONS: usize = 100;

/// A KL confidence-bound query: the empirical mean, the number of samples it
/// was computed from, and the divergence budget (exploration level) in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlBudget {
    mean_hat: f64,
    count: u64,
    budget: f64,
}

impl KlBudget {
    pub fn new(mean_hat: f64, count: u64, budget: f64) -> Result<Self> {
        check_probability("mean_hat", mean_hat)?;
        if count == 0 {
            return Err(Error::domain("count", 0.0));
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::domain("budget", budget));
        }
        Ok(Self {
            mean_hat,
            count,
            budget,
        })
    }

    pub fn mean_hat(&self) -> f64 {
        self.mean_hat
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }
}

fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(what, p))
    }
}

/// `d(x, y)`, the KL divergence from Bernoulli(x) to Bernoulli(y).
pub fn bernoulli_kl(x: f64, y: f64) -> Result<f64> {
    check_probability("x", x)?;
    check_probability("y", y)?;
    Ok(kl(x, y))
}

/// Unchecked kernel of [`bernoulli_kl`]; callers guarantee `x, y` in `[0, 1]`.
#[inline]
pub(crate) fn kl(x: f64, y: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    let mut d = 0.0;
    if x > 0.0 {
        if y == 0.0 {
            return f64::INFINITY;
        }
        d += x * (x / y).ln();
    }
    if x < 1.0 {
        if y == 1.0 {
            return f64::INFINITY;
        }
        d += (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln();
    }
    // Rounding can push the sum a hair below zero when x and y are close.
    d.max(0.0)
}

/// Partial derivative of `d(x, y)` with respect to `x`:
/// `ln(x / y) - ln((1 - x) / (1 - y))`.
pub fn bernoulli_kl_derivative(x: f64, y: f64) -> Result<f64> {
    check_probability("x", x)?;
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::domain("y", y));
    }
    Ok(kl_derivative(x, y))
}

#[inline]
pub(crate) fn kl_derivative(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 1.0 {
        return f64::INFINITY;
    }
    (x / y).ln() - ((1.0 - x) / (1.0 - y)).ln()
}

/// Largest `q` in `[mean_hat, 1]` with `count * d(mean_hat, q) <= budget`.
pub fn kl_upper_inverse(b: &KlBudget) -> f64 {
    upper_inverse(b.mean_hat, b.count as f64, b.budget)
}

/// Smallest `q` in `[0, mean_hat]` with `count * d(mean_hat, q) <= budget`.
///
/// Computed through the reflection `l(x) = 1 - u(1 - x)`, which holds because
/// `d(x, y) = d(1 - x, 1 - y)`.
pub fn kl_lower_inverse(b: &KlBudget) -> f64 {
    lower_inverse(b.mean_hat, b.count as f64, b.budget)
}

/// Right end of the bisection bracket. Pinsker's inequality
/// `d(x, q) >= 2 (q - x)^2` puts the solution at or below this point.
#[inline]
pub(crate) fn upper_bracket(x: f64, count: f64, budget: f64) -> f64 {
    (x + (budget / (2.0 * count)).sqrt()).min(1.0)
}

/// Cheap upper bound on [`upper_inverse`], never looser than the bracket.
/// Uses `d(x, q) >= (q - x)^2 / (2 v)` with `v` the largest `y (1 - y)` on
/// `[x, hi]`, padded by the inversion tolerance.
pub(crate) fn upper_inverse_ceiling(x: f64, count: f64, budget: f64) -> f64 {
    let hi = upper_bracket(x, count, budget);
    if hi <= x {
        return hi;
    }
    let v = if x <= 0.5 && 0.5 <= hi {
        0.25
    } else {
        (x * (1.0 - x)).max(hi * (1.0 - hi))
    };
    (x + (2.0 * v * budget / count).sqrt() + INVERSION_TOLERANCE).min(hi)
}

pub(crate) fn upper_inverse(x: f64, count: f64, budget: f64) -> f64 {
    let mut b = UpperInverse::new(x, count, budget);
    while !b.step() {}
    b.lo
}

/// The bisection behind [`upper_inverse`], advanced one iteration at a time.
/// At every stage the final result lies in [`UpperInverse::bounds`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct UpperInverse {
    x: f64,
    count: f64,
    budget: f64,
    lo: f64,
    hi: f64,
    ceiling: f64,
    iterations: usize,
    done: bool,
}

impl UpperInverse {
    pub(crate) fn new(x: f64, count: f64, budget: f64) -> Self {
        let hi = upper_bracket(x, count, budget);
        let mut b = UpperInverse {
            x,
            count,
            budget,
            lo: x,
            hi,
            ceiling: hi,
            iterations: 0,
            done: false,
        };
        if hi <= x {
            b.done = true;
        } else if count * kl(x, hi) <= budget {
            b.lo = hi;
            b.done = true;
        } else {
            b.ceiling = upper_inverse_ceiling(x, count, budget);
        }
        b
    }

    pub(crate) fn is_done(&self) -> bool {
        self.done || self.hi - self.lo <= INVERSION_TOLERANCE || self.iterations >= INVERSION_MAX_ITERATIONS
    }

    /// Runs one iteration unless finished; returns whether it is finished.
    pub(crate) fn step(&mut self) -> bool {
        if self.is_done() {
            self.done = true;
            return true;
        }
        let mid = 0.5 * (self.lo + self.hi);
        if self.count * kl(self.x, mid) <= self.budget {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
        self.iterations += 1;
        false
    }

    /// `(lower, upper)` bounds on the final result; equal once finished.
    pub(crate) fn bounds(&self) -> (f64, f64) {
        if self.is_done() {
            (self.lo, self.lo)
        } else {
            (self.lo, self.hi.min(self.ceiling))
        }
    }
}

#[inline]
pub(crate) fn lower_inverse(x: f64, count: f64, budget: f64) -> f64 {
    1.0 - upper_inverse(1.0 - x, count, budget)
}

/// Exploration level `f(t) = ln t + 3 ln ln t`, with both logarithms clamped
/// at zero so that it is finite and nonnegative for every `t >= 1`.
pub fn exploration_function(t: u64) -> f64 {
    let log_t = (t.max(1) as f64).ln().max(0.0);
    log_t + 3.0 * log_t.max(1.0).ln().max(0.0)
}
