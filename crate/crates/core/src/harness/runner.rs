//! Replication runner and regret aggregation.

use rand::RngCore;
use rayon::prelude::*;

use crate::bounds::{ldp_ub_curve, lower_bound_curve};
use crate::corruption::ldp_scheme;
use crate::environment::{CorruptBanditModel, PullOutcome};
use crate::error::{Error, Result};
use crate::policies::{BanditPolicy, Policy, PolicyKind};
use crate::rng::{stream, Purpose};

use super::config::ExperimentConfig;

/// Tag of the lower-bound curve in outputs.
pub const LOWER_BOUND_TAG: &str = "LB";
/// Tag of the leading-order LDP upper-bound curve in outputs.
pub const LDP_UPPER_BOUND_TAG: &str = "UB-ldp";

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "CORRUPT_BANDITS_THREADS";

/// Mean cumulative pseudo-regret of one policy (or one bound curve) at each
/// checkpoint. Bound curves have zero stderr and zero replications.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub policy: String,
    pub checkpoints: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replications: u64,
}

impl RegretTrace {
    /// Averages per-replication regret vectors, in the order given.
    /// `stderr` is the sample standard deviation over `sqrt(n)` (0 for n = 1).
    pub fn aggregate(policy: &str, checkpoints: &[u64], runs: &[Vec<f64>]) -> Self {
        let n = runs.len();
        let mut mean_regret = Vec::with_capacity(checkpoints.len());
        let mut stderr = Vec::with_capacity(checkpoints.len());
        for c in 0..checkpoints.len() {
            let mean = runs.iter().map(|r| r[c]).sum::<f64>() / n as f64;
            let se = if n > 1 {
                let var = runs.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            mean_regret.push(mean);
            stderr.push(se);
        }
        Self {
            policy: policy.to_string(),
            checkpoints: checkpoints.to_vec(),
            mean_regret,
            stderr,
            replications: n as u64,
        }
    }

    /// An analytic curve evaluated at every checkpoint.
    pub fn curve(tag: &str, checkpoints: &[u64], value: impl Fn(u64) -> f64) -> Self {
        Self {
            policy: tag.to_string(),
            checkpoints: checkpoints.to_vec(),
            mean_regret: checkpoints.iter().map(|&t| value(t)).collect(),
            stderr: vec![0.0; checkpoints.len()],
            replications: 0,
        }
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean_regret.last().expect("nonempty trace")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().expect("nonempty trace")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// One trace per policy, in config order, followed by bound curves.
    pub traces: Vec<RegretTrace>,
    /// Human-readable remarks for the output metadata.
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn trace(&self, tag: &str) -> Option<&RegretTrace> {
        self.traces.iter().find(|t| t.policy == tag)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl RunOptions {
    /// Reads the thread count from [`THREADS_ENV`], if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => {
                let n: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count")))?;
                if n == 0 {
                    return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
                }
                Ok(Self { threads: Some(n) })
            }
            Err(_) => Ok(Self::default()),
        }
    }

    fn install<T: Send>(&self, work: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(work()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
                Ok(pool.install(work))
            }
        }
    }
}

/// Runs `horizon` rounds of select, pull, update. The policy only ever sees
/// feedback; `observe` receives the round number (1-based), the arm and the
/// full outcome.
pub fn simulate<P: BanditPolicy + ?Sized>(
    model: &CorruptBanditModel,
    policy: &mut P,
    horizon: u64,
    env_rng: &mut dyn RngCore,
    policy_rng: &mut dyn RngCore,
    mut observe: impl FnMut(u64, usize, PullOutcome),
) {
    for t in 1..=horizon {
        let arm = policy.select(policy_rng);
        let outcome = model.pull_unchecked(arm, env_rng);
        policy.update(arm, outcome.feedback, policy_rng);
        observe(t, arm, outcome);
    }
}

/// Cumulative pseudo-regret `sum_t Delta_{a_t}` recorded after each
/// checkpoint round.
pub fn regret_at_checkpoints<P: BanditPolicy + ?Sized>(
    model: &CorruptBanditModel,
    policy: &mut P,
    checkpoints: &[u64],
    env_rng: &mut dyn RngCore,
    policy_rng: &mut dyn RngCore,
) -> Vec<f64> {
    let gaps = model.gaps();
    let horizon = checkpoints.last().copied().unwrap_or(0);
    let mut regret = 0.0;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    simulate(model, policy, horizon, env_rng, policy_rng, |t, arm, _| {
        regret += gaps[arm];
        if next.peek() == Some(&&t) {
            out.push(regret);
            next.next();
        }
    });
    out
}

fn replication_regret(
    model: &CorruptBanditModel,
    kind: PolicyKind,
    checkpoints: &[u64],
    master_seed: u64,
    replication: u64,
) -> Result<Vec<f64>> {
    let mut policy = Policy::for_model(kind, model)?;
    let mut env_rng = stream(master_seed, Purpose::Environment, replication);
    let mut policy_rng = stream(master_seed, Purpose::Policy(kind.tag()), replication);
    Ok(regret_at_checkpoints(
        model,
        &mut policy,
        checkpoints,
        &mut env_rng,
        &mut policy_rng,
    ))
}

/// One replication of one policy on the config's scenario.
pub fn run_replication(config: &ExperimentConfig, kind: PolicyKind, replication: u64) -> Result<Vec<f64>> {
    let model = config.scenario.model()?;
    replication_regret(&model, kind, &config.checkpoints, config.master_seed, replication)
}

fn run_model(config: &ExperimentConfig, model: &CorruptBanditModel, options: &RunOptions) -> Result<Vec<RegretTrace>> {
    // Fail before spending any time on simulation.
    for &kind in &config.policies {
        Policy::for_model(kind, model)?;
    }
    let mut traces = Vec::with_capacity(config.policies.len() + 1);
    for &kind in &config.policies {
        let runs: Vec<Vec<f64>> = options.install(|| {
            (0..config.replications)
                .into_par_iter()
                .map(|rep| replication_regret(model, kind, &config.checkpoints, config.master_seed, rep))
                .collect::<Result<Vec<_>>>()
        })??;
        traces.push(RegretTrace::aggregate(kind.tag(), &config.checkpoints, &runs));
    }
    Ok(traces)
}

/// Every policy for `replications` runs, averaged at the checkpoints, plus
/// the lower-bound curve. The output depends only on the config.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentResult> {
    config.validate()?;
    let model = config.scenario.model()?;
    let mut traces = run_model(config, &model, options)?;
    traces.push(RegretTrace::curve(LOWER_BOUND_TAG, &config.checkpoints, |t| {
        lower_bound_curve(&model, t)
    }));
    Ok(ExperimentResult {
        traces,
        notes: vec![format!(
            "{LOWER_BOUND_TAG}: asymptotic lower bound ln(t) * sum_a gap_a / d(lambda_a, g_a(mu*))"
        )],
    })
}

/// Runs the config once per privacy level, with the `eps`-LDP randomized
/// response applied to every arm. Each result carries the lower bound and
/// the leading-order LDP upper bound for its level.
pub fn run_epsilon_sweep(
    config: &ExperimentConfig,
    epsilons: &[f64],
    options: &RunOptions,
) -> Result<Vec<(f64, ExperimentResult)>> {
    config.validate()?;
    if epsilons.is_empty() {
        return Err(Error::Config("epsilon sweep is empty".into()));
    }
    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::domain("epsilon", eps));
        }
        let scheme = ldp_scheme(eps)?;
        let scenario = config.scenario.with_uniform_scheme(scheme);
        let model = scenario.model()?;
        let gaps = model.gaps();
        let mut traces = run_model(config, &model, options)?;
        traces.push(RegretTrace::curve(LOWER_BOUND_TAG, &config.checkpoints, |t| {
            lower_bound_curve(&model, t)
        }));
        let ub: Vec<f64> = config
            .checkpoints
            .iter()
            .map(|&t| ldp_ub_curve(&gaps, eps, t))
            .collect::<Result<_>>()?;
        traces.push(RegretTrace {
            policy: LDP_UPPER_BOUND_TAG.to_string(),
            checkpoints: config.checkpoints.clone(),
            mean_regret: ub,
            stderr: vec![0.0; config.checkpoints.len()],
            replications: 0,
        });
        let notes = vec![
            format!("epsilon = {eps}: p00 = p11 = {} applied to every arm", scheme.p00()),
            format!("{LDP_UPPER_BOUND_TAG}: leading-order upper bound, O(sqrt(log t)) terms omitted"),
            format!("{LOWER_BOUND_TAG}: asymptotic lower bound for this privacy level"),
        ];
        out.push((eps, ExperimentResult { traces, notes }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruption::RandomizedResponseScheme;
    use crate::harness::config::Scenario;
    use crate::policies::Classical;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct FixedAfterInit {
        arms: usize,
        fixed: usize,
        step: usize,
    }

    impl BanditPolicy for FixedAfterInit {
        fn arm_count(&self) -> usize {
            self.arms
        }
        fn select(&mut self, _: &mut dyn RngCore) -> usize {
            if self.step < self.arms {
                self.step
            } else {
                self.fixed
            }
        }
        fn update(&mut self, _: usize, _: bool, _: &mut dyn RngCore) {
            self.step += 1;
        }
    }

    fn scenario(means: Vec<f64>) -> Scenario {
        let n = means.len();
        Scenario {
            name: "test".into(),
            reward_means: means,
            schemes: vec![RandomizedResponseScheme::symmetric(0.9).unwrap(); n],
        }
    }

    #[test]
    fn single_arm_has_no_regret() {
        let config =
            ExperimentConfig::new(scenario(vec![0.4]), vec![PolicyKind::KlUcbCf, PolicyKind::TsCf], 500).unwrap();
        for kind in config.policies.clone() {
            assert!(run_replication(&config, kind, 0).unwrap().iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn oracle_and_fixed_arm_regret() {
        let model = CorruptBanditModel::uncorrupted(vec![0.9, 0.8]).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let mut r2 = ChaCha8Rng::seed_from_u64(2);
        let mut oracle = FixedAfterInit {
            arms: 0,
            fixed: 0,
            step: 0,
        };
        let regret = regret_at_checkpoints(&model, &mut oracle, &[10, 1000], &mut r1, &mut r2);
        assert_eq!(regret, vec![0.0, 0.0]);

        let mut fixed = FixedAfterInit {
            arms: 2,
            fixed: 1,
            step: 0,
        };
        let regret = regret_at_checkpoints(&model, &mut fixed, &[1, 2, 1000], &mut r1, &mut r2);
        assert_eq!(regret[0], 0.0);
        assert_abs_diff_eq!(regret[1], 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(regret[2], 0.1 * 999.0, epsilon = 1e-9);
    }

    #[test]
    fn single_replication_trace_equals_run() {
        let mut config = ExperimentConfig::new(scenario(vec![0.7, 0.5, 0.3]), vec![PolicyKind::UcbCf], 2000).unwrap();
        config.replications = 1;
        let run = run_replication(&config, PolicyKind::UcbCf, 0).unwrap();
        let result = run_experiment(&config, &RunOptions::default()).unwrap();
        let trace = result.trace("ucb-cf").unwrap();
        assert_eq!(trace.mean_regret, run);
        assert!(trace.stderr.iter().all(|&s| s == 0.0));
        assert_eq!(result.traces.last().unwrap().policy, LOWER_BOUND_TAG);
    }

    #[test]
    fn regret_is_nondecreasing() {
        let mut config = ExperimentConfig::new(
            scenario(vec![0.9, 0.8, 0.5]),
            vec![PolicyKind::KlUcbCf, PolicyKind::Wrapper(Classical::Ts)],
            3000,
        )
        .unwrap();
        config.replications = 4;
        for kind in config.policies.clone() {
            for rep in 0..4 {
                let r = run_replication(&config, kind, rep).unwrap();
                assert!(r.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn aggregate_statistics() {
        let runs = vec![vec![1.0, 2.0], vec![3.0, 6.0]];
        let t = RegretTrace::aggregate("x", &[1, 2], &runs);
        assert_eq!(t.mean_regret, vec![2.0, 4.0]);
        assert_abs_diff_eq!(t.stderr[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.stderr[1], 2.0, epsilon = 1e-15);
        assert_eq!(t.replications, 2);
    }

    #[test]
    fn non_invertible_scheme_propagates() {
        let bad = Scenario {
            name: "flat".into(),
            reward_means: vec![0.9, 0.2],
            schemes: vec![RandomizedResponseScheme::symmetric(0.5).unwrap(); 2],
        };
        let config = ExperimentConfig::new(bad, vec![PolicyKind::TsCf], 100).unwrap();
        assert!(matches!(
            run_experiment(&config, &RunOptions::default()),
            Err(Error::NonInvertibleScheme { .. })
        ));
    }

    #[test]
    fn sweep_attaches_bound_curves() {
        let mut config = ExperimentConfig::new(scenario(vec![0.9, 0.8]), vec![PolicyKind::TsCf], 500).unwrap();
        config.replications = 2;
        let results = run_epsilon_sweep(&config, &[0.5, 4.0], &RunOptions::default()).unwrap();
        assert_eq!(results.len(), 2);
        for (eps, r) in &results {
            let ub = r.trace(LDP_UPPER_BOUND_TAG).unwrap();
            let expected = ldp_ub_curve(&[0.0, 0.1], *eps, 500).unwrap();
            assert_abs_diff_eq!(ub.final_mean(), expected, epsilon = 1e-9);
            assert!(r.trace(LOWER_BOUND_TAG).is_some());
        }
        assert!(run_epsilon_sweep(&config, &[], &RunOptions::default()).is_err());
        assert!(run_epsilon_sweep(&config, &[0.0], &RunOptions::default()).is_err());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut config = ExperimentConfig::new(
            scenario(vec![0.9, 0.8, 0.8]),
            vec![PolicyKind::KlUcbCf, PolicyKind::TsCf],
            1500,
        )
        .unwrap();
        config.replications = 6;
        let a = run_experiment(&config, &RunOptions { threads: Some(1) }).unwrap();
        let b = run_experiment(&config, &RunOptions { threads: Some(3) }).unwrap();
        assert_eq!(a, b);
    }
}
