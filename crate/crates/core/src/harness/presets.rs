//! Built-in scenarios.
//!
//! `main` is the 10-armed problem with means (0.9, 0.8 x 9). `scenario1` to
//! `scenario4` are the additional reward-mean profiles. Every preset corrupts
//! the optimal arm with `p00 = p11 = 0.6` and every other arm with
//! `p00 = p11 = 0.9`.

use crate::corruption::RandomizedResponseScheme;
use crate::error::{Error, Result};
use crate::policies::{Classical, PolicyKind};

use super::config::Scenario;

pub const PRESET_NAMES: [&str; 5] = ["main", "scenario1", "scenario2", "scenario3", "scenario4"];

const OPTIMAL_ARM_FLIP: f64 = 0.6;
const OTHER_ARM_FLIP: f64 = 0.9;
const DEFAULT_HORIZON: u64 = 100_000;

/// A preset scenario with the policy set and horizon it is usually run with.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub scenario: Scenario,
    pub policies: Vec<PolicyKind>,
    pub horizon: u64,
}

/// The full comparison: both corruption-aware algorithms, the classical
/// policies on raw feedback, and two Wrapper instances.
pub fn comparison_policies() -> Vec<PolicyKind> {
    vec![
        PolicyKind::KlUcbCf,
        PolicyKind::TsCf,
        PolicyKind::Baseline(Classical::KlUcb),
        PolicyKind::Baseline(Classical::Ucb1),
        PolicyKind::Baseline(Classical::Ts),
        PolicyKind::Wrapper(Classical::KlUcb),
        PolicyKind::Wrapper(Classical::Ts),
    ]
}

fn reward_means(name: &str) -> Option<Vec<f64>> {
    let mut means = vec![0.9];
    match name {
        "main" => means.extend([0.8; 9]),
        "scenario1" => means.push(0.6),
        "scenario2" => means.push(0.8),
        "scenario3" => means.extend([0.8, 0.8, 0.8, 0.7, 0.7, 0.7, 0.6, 0.6, 0.6]),
        "scenario4" => means.extend([0.6; 9]),
        _ => return None,
    }
    Some(means)
}

pub fn preset(name: &str) -> Result<Preset> {
    let reward_means = reward_means(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    let schemes = (0..reward_means.len())
        .map(|arm| {
            let p = if arm == 0 { OPTIMAL_ARM_FLIP } else { OTHER_ARM_FLIP };
            RandomizedResponseScheme::symmetric(p).expect("valid probability")
        })
        .collect();
    Ok(Preset {
        scenario: Scenario {
            name: name.to_string(),
            reward_means,
            schemes,
        },
        policies: comparison_policies(),
        horizon: DEFAULT_HORIZON,
    })
}
