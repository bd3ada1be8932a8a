//! Corruption schemes and corruption functions.
//!
//! A [`RandomizedResponseScheme`] is the stochastic channel that turns a
//! reward bit into a feedback bit. Its mean map `x -> (1 - p00) + (p00 + p11 - 1) x`
//! is a linear [`CorruptionFunction`], the object the learning algorithms
//! consume. Environments sample through schemes; policies only see functions.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step of the grid used to probe custom functions for monotonicity.
pub const MONOTONICITY_PROBE_STEP: f64 = 1e-3;

const INVERSE_TOLERANCE: f64 = 1e-9;

/// Binary randomized response: `p00 = P(F = 0 | R = 0)`, `p11 = P(F = 1 | R = 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedResponseScheme {
    p00: f64,
    p11: f64,
}

impl RandomizedResponseScheme {
    pub fn new(p00: f64, p11: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p00) {
            return Err(Error::domain("p00", p00));
        }
        if !(0.0..=1.0).contains(&p11) {
            return Err(Error::domain("p11", p11));
        }
        Ok(Self { p00, p11 })
    }

    /// The channel that reports the reward unchanged.
    pub fn identity() -> Self {
        Self { p00: 1.0, p11: 1.0 }
    }

    /// Symmetric scheme with `p00 = p11 = p`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn p00(&self) -> f64 {
        self.p00
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    /// `p00 + p11 - 1`, the slope of the mean map.
    pub fn slope(&self) -> f64 {
        self.p00 + self.p11 - 1.0
    }

    pub fn is_invertible(&self) -> bool {
        self.slope() != 0.0
    }

    /// Feedback mean for a reward mean `mu`. Defined for every scheme,
    /// including non-invertible ones.
    pub fn feedback_mean(&self, mu: f64) -> f64 {
        (1.0 - self.p00) + self.slope() * mu
    }

    /// Column-stochastic matrix `M[y][x] = P(F = y | R = x)`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.p00, 1.0 - self.p11], [1.0 - self.p00, self.p11]]
    }

    /// Passes a reward bit through the channel. Consumes exactly one uniform
    /// draw from `rng`.
    pub fn apply<R: Rng + ?Sized>(&self, reward: bool, rng: &mut R) -> bool {
        let u: f64 = rng.random();
        if reward {
            u < self.p11
        } else {
            u >= self.p00
        }
    }
}

/// Returns the linear corruption function of a scheme.
pub fn mean_function_of(s: &RandomizedResponseScheme) -> Result<CorruptionFunction> {
    if !s.is_invertible() {
        return Err(Error::NonInvertibleScheme { arm: 0 });
    }
    CorruptionFunction::linear(1.0 - s.p00, s.slope())
}

/// The scheme `p00 = p11 = e^eps / (1 + e^eps)`, the randomized response that
/// is exactly `eps`-locally differentially private.
pub fn ldp_scheme(epsilon: f64) -> Result<RandomizedResponseScheme> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::domain("epsilon", epsilon));
    }
    // e^eps / (1 + e^eps) written as a logistic to stay finite for large eps.
    let p = 1.0 / (1.0 + (-epsilon).exp());
    Ok(RandomizedResponseScheme { p00: p, p11: p })
}

/// Smallest `eps` for which the scheme is `eps`-LDP: the log of the largest
/// likelihood ratio between the two reward values, in both directions.
/// Infinite when a channel entry is zero.
pub fn ldp_level(s: &RandomizedResponseScheme) -> f64 {
    let (p00, p11) = (s.p00, s.p11);
    let (q01, q10) = (1.0 - p11, 1.0 - p00);
    // Feedback 0: P(F=0|R=0) = p00 against P(F=0|R=1) = 1 - p11.
    // Feedback 1: P(F=1|R=1) = p11 against P(F=1|R=0) = 1 - p00.
    let log_ratio = |a: f64, b: f64| -> f64 {
        if a == b {
            0.0
        } else if a == 0.0 || b == 0.0 {
            f64::INFINITY
        } else {
            (a.ln() - b.ln()).abs()
        }
    };
    log_ratio(p00, q01).max(log_ratio(p11, q10))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        }
    }
}

type ForwardMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly monotone map from reward means to feedback means.
#[derive(Clone)]
pub enum CorruptionFunction {
    /// `g(x) = intercept + slope * x`.
    Linear { intercept: f64, slope: f64 },
    /// An arbitrary map checked for monotonicity and range at construction.
    Custom { map: ForwardMap, direction: Direction },
}

impl fmt::Debug for CorruptionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorruptionFunction::Linear { intercept, slope } => f
                .debug_struct("Linear")
                .field("intercept", intercept)
                .field("slope", slope)
                .finish(),
            CorruptionFunction::Custom { direction, .. } => f
                .debug_struct("Custom")
                .field("direction", direction)
                .finish_non_exhaustive(),
        }
    }
}

impl CorruptionFunction {
    pub fn identity() -> Self {
        CorruptionFunction::Linear {
            intercept: 0.0,
            slope: 1.0,
        }
    }

    pub fn linear(intercept: f64, slope: f64) -> Result<Self> {
        if slope == 0.0 {
            return Err(Error::NonInvertibleScheme { arm: 0 });
        }
        if !intercept.is_finite() || !slope.is_finite() {
            return Err(Error::domain(
                "linear coefficient",
                if slope.is_finite() { intercept } else { slope },
            ));
        }
        let g = CorruptionFunction::Linear { intercept, slope };
        for x in [0.0, 1.0] {
            let y = g.eval(x);
            // Tolerate rounding in intercept + slope.
            if !(-1e-12..=1.0 + 1e-12).contains(&y) {
                return Err(Error::OutOfUnitRange { x, y });
            }
        }
        Ok(g)
    }

    /// Wraps an arbitrary map, probing it on a grid of step
    /// [`MONOTONICITY_PROBE_STEP`] for strict monotonicity in `direction` and
    /// for staying inside `[0, 1]`.
    pub fn custom<F>(map: F, direction: Direction) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let steps = (1.0 / MONOTONICITY_PROBE_STEP).round() as usize;
        let mut prev: Option<f64> = None;
        for i in 0..=steps {
            let x = i as f64 / steps as f64;
            let y = map(x);
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::OutOfUnitRange { x, y });
            }
            if let Some(p) = prev {
                let ok = match direction {
                    Direction::Increasing => y > p,
                    Direction::Decreasing => y < p,
                };
                if !ok {
                    return Err(Error::NotMonotone {
                        direction: direction.as_str(),
                        at: x,
                    });
                }
            }
            prev = Some(y);
        }
        Ok(CorruptionFunction::Custom {
            map: Arc::new(map),
            direction,
        })
    }

    pub fn direction(&self) -> Direction {
        match self {
            CorruptionFunction::Linear { slope, .. } if *slope > 0.0 => Direction::Increasing,
            CorruptionFunction::Linear { .. } => Direction::Decreasing,
            CorruptionFunction::Custom { direction, .. } => *direction,
        }
    }

    pub fn is_increasing(&self) -> bool {
        self.direction() == Direction::Increasing
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, CorruptionFunction::Linear { intercept, slope } if *intercept == 0.0 && *slope == 1.0)
    }

    /// `g(x)` for `x` in `[0, 1]`.
    pub fn forward(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain("x", x));
        }
        Ok(self.eval(x))
    }

    /// `g^{-1}(y)`.
    ///
    /// Linear functions invert exactly and without clamping, so values of `y`
    /// outside `g([0, 1])` map outside `[0, 1]`. Custom functions are inverted
    /// by bisection and saturate at the endpoint whose image is nearer to `y`.
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            CorruptionFunction::Linear { intercept, slope } => (y - intercept) / slope,
            CorruptionFunction::Custom { map, direction } => invert_monotone(map.as_ref(), *direction, y),
        }
    }

    /// Whether [`inverse`](Self::inverse) is exact and unclamped.
    pub fn is_linear(&self) -> bool {
        matches!(self, CorruptionFunction::Linear { .. })
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            CorruptionFunction::Linear { intercept, slope } => intercept + slope * x,
            CorruptionFunction::Custom { map, .. } => map(x),
        }
    }
}

fn invert_monotone(map: &(dyn Fn(f64) -> f64 + Send + Sync), direction: Direction, y: f64) -> f64 {
    // Work with an increasing view of the map.
    let sign = match direction {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };
    let target = sign * y;
    if target <= sign * map(0.0) {
        return 0.0;
    }
    if target >= sign * map(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > INVERSE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if sign * map(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
