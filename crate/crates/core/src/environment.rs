//! The corrupt bandit model: Bernoulli arms whose rewards reach the learner
//! only through a per-arm randomized-response channel.

use rand::Rng;

use crate::corruption::{mean_function_of, CorruptionFunction, RandomizedResponseScheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PullOutcome {
    pub reward: bool,
    pub feedback: bool,
}

/// Arms are indexed from 0. The optimal arm is the lowest index among those
/// with the largest reward mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptBanditModel {
    reward_means: Vec<f64>,
    schemes: Vec<RandomizedResponseScheme>,
    feedback_means: Vec<f64>,
    optimal_arm: usize,
}

impl CorruptBanditModel {
    pub fn new(reward_means: Vec<f64>, schemes: Vec<RandomizedResponseScheme>) -> Result<Self> {
        if reward_means.is_empty() {
            return Err(Error::Config("a model needs at least one arm".into()));
        }
        if reward_means.len() != schemes.len() {
            return Err(Error::Config(format!(
                "{} reward means but {} corruption schemes",
                reward_means.len(),
                schemes.len()
            )));
        }
        for &mu in &reward_means {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::domain("reward mean", mu));
            }
        }
        let feedback_means = reward_means
            .iter()
            .zip(&schemes)
            .map(|(&mu, s)| s.feedback_mean(mu))
            .collect();
        let optimal_arm = reward_means
            .iter()
            .enumerate()
            .fold(0, |best, (a, &mu)| if mu > reward_means[best] { a } else { best });
        Ok(Self {
            reward_means,
            schemes,
            feedback_means,
            optimal_arm,
        })
    }

    /// Every arm shares one scheme.
    pub fn uniform(reward_means: Vec<f64>, scheme: RandomizedResponseScheme) -> Result<Self> {
        let schemes = vec![scheme; reward_means.len()];
        Self::new(reward_means, schemes)
    }

    /// Uncorrupted feedback: the classical bandit.
    pub fn uncorrupted(reward_means: Vec<f64>) -> Result<Self> {
        Self::uniform(reward_means, RandomizedResponseScheme::identity())
    }

    pub fn arm_count(&self) -> usize {
        self.reward_means.len()
    }

    pub fn reward_means(&self) -> &[f64] {
        &self.reward_means
    }

    pub fn schemes(&self) -> &[RandomizedResponseScheme] {
        &self.schemes
    }

    pub fn feedback_means(&self) -> &[f64] {
        &self.feedback_means
    }

    pub fn optimal_arm(&self) -> usize {
        self.optimal_arm
    }

    pub fn optimal_mean(&self) -> f64 {
        self.reward_means[self.optimal_arm]
    }

    /// `mu* - mu_a` for every arm.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.optimal_mean();
        self.reward_means.iter().map(|&mu| best - mu).collect()
    }

    /// The corruption functions the learner is given. Fails on the first arm
    /// whose scheme carries no information about the reward.
    pub fn corruption_functions(&self) -> Result<Vec<CorruptionFunction>> {
        self.schemes
            .iter()
            .enumerate()
            .map(|(arm, s)| mean_function_of(s).map_err(|_| Error::NonInvertibleScheme { arm }))
            .collect()
    }

    /// Draws a reward (one uniform) and passes it through the arm's channel
    /// (one more uniform).
    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<PullOutcome> {
        if arm >= self.arm_count() {
            return Err(Error::ArmOutOfRange {
                arm,
                arm_count: self.arm_count(),
            });
        }
        Ok(self.pull_unchecked(arm, rng))
    }

    #[inline]
    pub(crate) fn pull_unchecked<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> PullOutcome {
        let u: f64 = rng.random();
        let reward = u < self.reward_means[arm];
        let feedback = self.schemes[arm].apply(reward, rng);
        PullOutcome { reward, feedback }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scheme(p: f64) -> RandomizedResponseScheme {
        RandomizedResponseScheme::symmetric(p).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(CorruptBanditModel::uncorrupted(vec![]).is_err());
        assert!(CorruptBanditModel::uncorrupted(vec![0.5, 1.2]).is_err());
        assert!(CorruptBanditModel::new(vec![0.5, 0.4], vec![scheme(0.9)]).is_err());
        let m = CorruptBanditModel::new(vec![0.9, 0.8], vec![scheme(0.6), scheme(0.9)]).unwrap();
        assert_abs_diff_eq!(m.feedback_means()[0], 0.58, epsilon = 1e-15);
        assert_abs_diff_eq!(m.feedback_means()[1], 0.74, epsilon = 1e-15);
    }

    #[test]
    fn gaps_and_optimal_arm() {
        let mut means = vec![0.9];
        means.extend([0.8; 9]);
        let m = CorruptBanditModel::uncorrupted(means).unwrap();
        let gaps = m.gaps();
        assert_eq!(gaps[0], 0.0);
        for g in &gaps[1..] {
            assert_abs_diff_eq!(*g, 0.1, epsilon = 1e-15);
        }

        let m = CorruptBanditModel::uncorrupted(vec![0.9, 0.6]).unwrap();
        assert_eq!(m.gaps()[0], 0.0);
        assert_abs_diff_eq!(m.gaps()[1], 0.3, epsilon = 1e-15);

        let m = CorruptBanditModel::uncorrupted(vec![0.4, 0.7, 0.7]).unwrap();
        assert_eq!(m.optimal_arm(), 1);
        assert_eq!(m.gaps(), vec![0.7 - 0.4, 0.0, 0.0]);

        let m = CorruptBanditModel::uncorrupted(vec![0.5; 4]).unwrap();
        assert_eq!(m.optimal_arm(), 0);
        assert!(m.gaps().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn pull_out_of_range() {
        let m = CorruptBanditModel::uncorrupted(vec![0.5, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            m.pull(2, &mut rng),
            Err(Error::ArmOutOfRange { arm: 2, arm_count: 2 })
        ));
    }

    #[test]
    fn certain_reward_identity_channel() {
        let m = CorruptBanditModel::uncorrupted(vec![1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            assert_eq!(
                m.pull(0, &mut rng).unwrap(),
                PullOutcome {
                    reward: true,
                    feedback: true
                }
            );
            assert_eq!(
                m.pull(1, &mut rng).unwrap(),
                PullOutcome {
                    reward: false,
                    feedback: false
                }
            );
        }
    }

    #[test]
    fn feedback_means_match_mean_link() {
        let m = CorruptBanditModel::new(vec![0.9, 0.8], vec![scheme(0.6), scheme(0.9)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 1_000_000;
        for (arm, target) in [(0, 0.58), (1, 0.74)] {
            let ones = (0..n).filter(|_| m.pull(arm, &mut rng).unwrap().feedback).count();
            assert_abs_diff_eq!(ones as f64 / n as f64, target, epsilon = 0.0015);
        }
    }

    #[test]
    fn same_seed_same_outcomes() {
        let m = CorruptBanditModel::new(vec![0.3, 0.6], vec![scheme(0.7), scheme(0.8)]).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..500).map(|i| m.pull(i % 2, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    #[test]
    fn non_invertible_schemes_reported_per_arm() {
        let m = CorruptBanditModel::new(vec![0.9, 0.8], vec![scheme(0.9), scheme(0.5)]).unwrap();
        assert!(matches!(
            m.corruption_functions(),
            Err(Error::NonInvertibleScheme { arm: 1 })
        ));
    }
}
