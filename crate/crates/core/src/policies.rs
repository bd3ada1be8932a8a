//! Arm-selection policies.
//!
//! Corruption-aware: kl-UCB-CF, TS-CF and UCB-CF. Classical baselines that
//! treat feedback as reward: kl-UCB, UCB1 and TS. And the Wrapper baseline,
//! which feeds inverted feedback to a classical policy.
//!
//! All index policies pull each arm once, then maximize their index with the
//! exploration level `f(t)` of [`exploration_function`]. Exact ties among
//! index maximizers are broken uniformly at random with one draw from the
//! policy's stream; Thompson variants break ties by lowest index.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};

use crate::corruption::CorruptionFunction;
use crate::environment::CorruptBanditModel;
use crate::error::{Error, Result};
use crate::klmath::{exploration_function, upper_inverse, UpperInverse};

/// Classical policy run on raw feedback, or as the Wrapper's black box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classical {
    KlUcb,
    Ucb1,
    Ts,
}

impl Classical {
    pub fn tag(self) -> &'static str {
        match self {
            Classical::KlUcb => "klucb",
            Classical::Ucb1 => "ucb1",
            Classical::Ts => "ts",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    KlUcbCf,
    TsCf,
    UcbCf,
    Baseline(Classical),
    Wrapper(Classical),
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 9] = [
        PolicyKind::KlUcbCf,
        PolicyKind::TsCf,
        PolicyKind::UcbCf,
        PolicyKind::Baseline(Classical::KlUcb),
        PolicyKind::Baseline(Classical::Ucb1),
        PolicyKind::Baseline(Classical::Ts),
        PolicyKind::Wrapper(Classical::KlUcb),
        PolicyKind::Wrapper(Classical::Ts),
        PolicyKind::Wrapper(Classical::Ucb1),
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            PolicyKind::KlUcbCf => "klucb-cf",
            PolicyKind::TsCf => "ts-cf",
            PolicyKind::UcbCf => "ucb-cf",
            PolicyKind::Baseline(c) => c.tag(),
            PolicyKind::Wrapper(Classical::KlUcb) => "wrapper:klucb",
            PolicyKind::Wrapper(Classical::Ucb1) => "wrapper:ucb1",
            PolicyKind::Wrapper(Classical::Ts) => "wrapper:ts",
        }
    }

    /// Whether the policy needs the (invertible) corruption functions.
    pub fn uses_corruption(&self) -> bool {
        !matches!(self, PolicyKind::Baseline(_))
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::UnknownPolicy(s.to_string()))
    }
}

/// Per-arm sufficient statistics shared by every policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyState {
    pull_counts: Vec<u64>,
    feedback_sums: Vec<u64>,
    successes: Vec<u64>,
    failures: Vec<u64>,
    step: u64,
}

impl PolicyState {
    pub fn new(arm_count: usize) -> Self {
        Self {
            pull_counts: vec![0; arm_count],
            feedback_sums: vec![0; arm_count],
            successes: vec![0; arm_count],
            failures: vec![0; arm_count],
            step: 0,
        }
    }

    pub fn arm_count(&self) -> usize {
        self.pull_counts.len()
    }

    pub fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }

    pub fn feedback_sums(&self) -> &[u64] {
        &self.feedback_sums
    }

    pub fn successes(&self) -> &[u64] {
        &self.successes
    }

    pub fn failures(&self) -> &[u64] {
        &self.failures
    }

    /// Number of completed pulls.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Empirical feedback mean of an arm that has been pulled.
    pub fn feedback_mean(&self, arm: usize) -> f64 {
        self.feedback_sums[arm] as f64 / self.pull_counts[arm] as f64
    }

    pub fn update(&mut self, arm: usize, feedback: bool) {
        self.pull_counts[arm] += 1;
        if feedback {
            self.feedback_sums[arm] += 1;
            self.successes[arm] += 1;
        } else {
            self.failures[arm] += 1;
        }
        self.step += 1;
    }
}

/// Statistics the Wrapper keeps on top of [`PolicyState`]: sums of inverted
/// feedback, and the Bernoulli-converted counters used by an inner TS.
#[derive(Debug, Clone, PartialEq)]
pub struct WrapperState {
    pseudo_sums: Vec<f64>,
    successes: Vec<u64>,
    failures: Vec<u64>,
}

impl WrapperState {
    pub fn new(arm_count: usize) -> Self {
        Self {
            pseudo_sums: vec![0.0; arm_count],
            successes: vec![0; arm_count],
            failures: vec![0; arm_count],
        }
    }

    pub fn pseudo_sums(&self) -> &[f64] {
        &self.pseudo_sums
    }

    /// Unclamped mean of the inverted feedback.
    pub fn pseudo_mean(&self, state: &PolicyState, arm: usize) -> f64 {
        self.pseudo_sums[arm] / state.pull_counts[arm] as f64
    }

    /// Records one inverted feedback value. An inner TS sees a Bernoulli
    /// success with probability `clamp(pseudo_reward, 0, 1)`; a draw is only
    /// taken when that probability is strictly between 0 and 1.
    pub fn record(&mut self, arm: usize, pseudo_reward: f64, rng: &mut dyn RngCore) {
        self.pseudo_sums[arm] += pseudo_reward;
        let success = if pseudo_reward >= 1.0 {
            true
        } else if pseudo_reward <= 0.0 {
            false
        } else {
            rng.random::<f64>() < pseudo_reward
        };
        if success {
            self.successes[arm] += 1;
        } else {
            self.failures[arm] += 1;
        }
    }
}

/// Uniform choice among the arms attaining the maximal value.
fn argmax_random_ties(values: impl Iterator<Item = f64>, rng: &mut dyn RngCore) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut maximizers: Vec<usize> = Vec::new();
    for (arm, v) in values.enumerate() {
        if v > best {
            best = v;
            maximizers.clear();
            maximizers.push(arm);
        } else if v == best {
            maximizers.push(arm);
        }
    }
    pick(&maximizers, rng)
}

fn pick(maximizers: &[usize], rng: &mut dyn RngCore) -> usize {
    match maximizers.len() {
        0 => 0,
        1 => maximizers[0],
        n => maximizers[rng.random_range(0..n)],
    }
}

/// Argmax, with uniform tie-breaking, of indices defined as
/// `index_of(arm, u)` for `u` the result of a KL bisection and `index_of`
/// nondecreasing in `u`. All bisections advance in lockstep; an arm drops out
/// once its index is certainly below another arm's, and the scan ends when a
/// single arm is left or every survivor has its exact index. The outcome is
/// that of evaluating every index in full.
fn argmax_by_bisection(
    mut live: Vec<(usize, UpperInverse)>,
    index_of: impl Fn(usize, f64) -> f64,
    rng: &mut dyn RngCore,
) -> usize {
    let mut bounds = Vec::with_capacity(live.len());
    loop {
        bounds.clear();
        bounds.extend(live.iter().map(|(arm, search)| {
            let (lo, hi) = search.bounds();
            (index_of(*arm, lo), index_of(*arm, hi))
        }));
        let floor = bounds.iter().fold(f64::NEG_INFINITY, |m, b| m.max(b.0));
        let mut i = 0;
        live.retain(|_| {
            i += 1;
            bounds[i - 1].1 >= floor
        });
        if live.len() == 1 {
            return live[0].0;
        }
        if live.iter().all(|(_, search)| search.is_done()) {
            // Survivors hold exactly the maximal index, in arm order.
            let maximizers: Vec<usize> = live.iter().map(|(arm, _)| *arm).collect();
            return pick(&maximizers, rng);
        }
        for (_, search) in live.iter_mut() {
            search.step();
        }
    }
}

fn initialization_arm(state: &PolicyState) -> Option<usize> {
    let t = state.step as usize;
    (t < state.arm_count()).then_some(t)
}

/// kl-UCB-CF index of one arm: the largest `q` with
/// `N_a d(lambda_hat_a, g_a(q)) <= f`, that is `g_a^{-1}` of the upper
/// (increasing `g_a`) or lower (decreasing `g_a`) KL confidence bound.
pub fn klucb_cf_index(mean_hat: f64, count: u64, budget: f64, g: &CorruptionFunction) -> f64 {
    klucb_cf_map(g, upper_inverse(klucb_cf_argument(mean_hat, g), count as f64, budget))
}

/// Lower confidence bounds come from the upper one by reflection,
/// `l(x) = 1 - u(1 - x)`.
fn klucb_cf_argument(mean_hat: f64, g: &CorruptionFunction) -> f64 {
    if g.is_increasing() {
        mean_hat
    } else {
        1.0 - mean_hat
    }
}

fn klucb_cf_map(g: &CorruptionFunction, u: f64) -> f64 {
    if g.is_increasing() {
        g.inverse(u)
    } else {
        g.inverse(1.0 - u)
    }
}

/// UCB-CF index: `g^{-1}(lambda_hat +- sqrt(f / 2N))`, with the sign following
/// the direction of `g`. The argument is clamped to `[0, 1]` only for custom
/// functions; linear functions invert it as is.
pub fn ucb_cf_index(mean_hat: f64, count: u64, budget: f64, g: &CorruptionFunction) -> f64 {
    let width = (budget / (2.0 * count as f64)).sqrt();
    let arg = if g.is_increasing() {
        mean_hat + width
    } else {
        mean_hat - width
    };
    if g.is_linear() {
        g.inverse(arg)
    } else {
        g.inverse(arg.clamp(0.0, 1.0))
    }
}

pub fn select_klucb_cf(state: &PolicyState, g: &[CorruptionFunction], rng: &mut dyn RngCore) -> usize {
    if let Some(arm) = initialization_arm(state) {
        return arm;
    }
    let f = exploration_function(state.step);
    let searches = (0..state.arm_count())
        .map(|a| {
            let x = klucb_cf_argument(state.feedback_mean(a), &g[a]);
            (a, UpperInverse::new(x, state.pull_counts[a] as f64, f))
        })
        .collect();
    argmax_by_bisection(searches, |a, u| klucb_cf_map(&g[a], u), rng)
}

pub fn select_ucb_cf(state: &PolicyState, g: &[CorruptionFunction], rng: &mut dyn RngCore) -> usize {
    if let Some(arm) = initialization_arm(state) {
        return arm;
    }
    let f = exploration_function(state.step);
    argmax_random_ties(
        (0..state.arm_count()).map(|a| ucb_cf_index(state.feedback_mean(a), state.pull_counts[a], f, &g[a])),
        rng,
    )
}

/// One draw from Beta(alpha, beta) as `X / (X + Y)` with `X ~ Gamma(alpha, 1)`
/// and `Y ~ Gamma(beta, 1)`, sampled in that order (`rand_distr::Gamma`:
/// Marsaglia-Tsang for shape > 1, exponential for shape 1).
pub fn sample_beta(alpha: f64, beta: f64, rng: &mut dyn RngCore) -> f64 {
    let x = Gamma::new(alpha, 1.0).expect("positive shape").sample(rng);
    let y = Gamma::new(beta, 1.0).expect("positive shape").sample(rng);
    x / (x + y)
}

fn posterior_samples<'a>(
    successes: &'a [u64],
    failures: &'a [u64],
    rng: &'a mut dyn RngCore,
) -> impl Iterator<Item = f64> + 'a {
    successes
        .iter()
        .zip(failures)
        .map(move |(&s, &f)| sample_beta(s as f64 + 1.0, f as f64 + 1.0, &mut *rng))
}

fn argmax_lowest(values: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut best_arm = 0;
    for (arm, v) in values.enumerate() {
        if v > best {
            best = v;
            best_arm = arm;
        }
    }
    best_arm
}

pub fn select_ts_cf(state: &PolicyState, g: &[CorruptionFunction], rng: &mut dyn RngCore) -> usize {
    argmax_lowest(
        posterior_samples(&state.successes, &state.failures, rng)
            .zip(g)
            .map(|(theta, g)| g.inverse(theta)),
    )
}

pub fn select_baseline(state: &PolicyState, kind: Classical, rng: &mut dyn RngCore) -> usize {
    match kind {
        Classical::Ts => argmax_lowest(posterior_samples(&state.successes, &state.failures, rng)),
        Classical::KlUcb => {
            let means: Vec<f64> = (0..state.arm_count()).map(|a| state.feedback_mean_or_zero(a)).collect();
            classical_index_select(state, Classical::KlUcb, &means, rng)
        }
        Classical::Ucb1 => {
            let means: Vec<f64> = (0..state.arm_count()).map(|a| state.feedback_mean_or_zero(a)).collect();
            classical_index_select(state, Classical::Ucb1, &means, rng)
        }
    }
}

pub fn select_wrapper(state: &PolicyState, wrapper: &WrapperState, inner: Classical, rng: &mut dyn RngCore) -> usize {
    match inner {
        Classical::Ts => argmax_lowest(posterior_samples(&wrapper.successes, &wrapper.failures, rng)),
        _ => {
            let means: Vec<f64> = (0..state.arm_count())
                .map(|a| {
                    if state.pull_counts[a] == 0 {
                        0.0
                    } else {
                        wrapper.pseudo_mean(state, a).clamp(0.0, 1.0)
                    }
                })
                .collect();
            classical_index_select(state, inner, &means, rng)
        }
    }
}

impl PolicyState {
    fn feedback_mean_or_zero(&self, arm: usize) -> f64 {
        if self.pull_counts[arm] == 0 {
            0.0
        } else {
            self.feedback_mean(arm)
        }
    }
}

/// kl-UCB or UCB1 on the given `[0, 1]` means.
fn classical_index_select(state: &PolicyState, kind: Classical, means: &[f64], rng: &mut dyn RngCore) -> usize {
    if let Some(arm) = initialization_arm(state) {
        return arm;
    }
    let f = exploration_function(state.step);
    let n = |a: usize| state.pull_counts[a] as f64;
    match kind {
        Classical::KlUcb => argmax_by_bisection(
            (0..state.arm_count())
                .map(|a| (a, UpperInverse::new(means[a], n(a), f)))
                .collect(),
            |_, u| u,
            rng,
        ),
        Classical::Ucb1 => argmax_random_ties(
            (0..state.arm_count()).map(|a| means[a] + (f / (2.0 * n(a))).sqrt()),
            rng,
        ),
        Classical::Ts => unreachable!("TS has no index"),
    }
}

/// The interface the simulator drives: strictly alternating `select` and
/// `update` calls within one run.
pub trait BanditPolicy {
    fn arm_count(&self) -> usize;
    fn select(&mut self, rng: &mut dyn RngCore) -> usize;
    fn update(&mut self, arm: usize, feedback: bool, rng: &mut dyn RngCore);
}

/// Any [`PolicyKind`] together with its state.
#[derive(Debug, Clone)]
pub struct Policy {
    kind: PolicyKind,
    functions: Vec<CorruptionFunction>,
    state: PolicyState,
    wrapper: Option<WrapperState>,
}

impl Policy {
    /// `functions` holds one corruption function per arm. Baselines only use
    /// its length.
    pub fn new(kind: PolicyKind, functions: Vec<CorruptionFunction>) -> Result<Self> {
        let k = functions.len();
        if k == 0 {
            return Err(Error::Config("a policy needs at least one arm".into()));
        }
        Ok(Self {
            kind,
            functions,
            state: PolicyState::new(k),
            wrapper: matches!(kind, PolicyKind::Wrapper(_)).then(|| WrapperState::new(k)),
        })
    }

    /// Builds the policy with the corruption functions the model gives the
    /// learner. Corruption-aware policies fail on non-invertible schemes.
    pub fn for_model(kind: PolicyKind, model: &CorruptBanditModel) -> Result<Self> {
        let functions = if kind.uses_corruption() {
            model.corruption_functions()?
        } else {
            vec![CorruptionFunction::identity(); model.arm_count()]
        };
        Self::new(kind, functions)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn wrapper_state(&self) -> Option<&WrapperState> {
        self.wrapper.as_ref()
    }

    pub fn corruption_functions(&self) -> &[CorruptionFunction] {
        &self.functions
    }
}

impl BanditPolicy for Policy {
    fn arm_count(&self) -> usize {
        self.state.arm_count()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> usize {
        match self.kind {
            PolicyKind::KlUcbCf => select_klucb_cf(&self.state, &self.functions, rng),
            PolicyKind::TsCf => select_ts_cf(&self.state, &self.functions, rng),
            PolicyKind::UcbCf => select_ucb_cf(&self.state, &self.functions, rng),
            PolicyKind::Baseline(c) => select_baseline(&self.state, c, rng),
            PolicyKind::Wrapper(inner) => {
                let wrapper = self.wrapper.as_ref().expect("wrapper state");
                select_wrapper(&self.state, wrapper, inner, rng)
            }
        }
    }

    fn update(&mut self, arm: usize, feedback: bool, rng: &mut dyn RngCore) {
        self.state.update(arm, feedback);
        if let Some(w) = self.wrapper.as_mut() {
            let pseudo = self.functions[arm].inverse(if feedback { 1.0 } else { 0.0 });
            w.record(arm, pseudo, rng);
        }
    }
}
