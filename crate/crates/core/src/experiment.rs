//! Monte Carlo sweeps: sample i.i.d. profiles from `π`, solve the resulting
//! vote-operation problems for growing `n`, and summarize how the solution
//! scales.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gsr::{
    Alternative, GammaGoal, GammaMajorityRule, GammaOps, GsRule, GsrError, Profile,
};
use crate::vo_solver::{
    predict_category, solve_vo, Category, CategoryPrediction, Method, SolveOptions, VoError,
    VoInstance, VoSolution, VoValue,
};
use crate::vote_ops::{
    ops_bribery, ops_bribery_bounded, ops_cav, ops_cdv, ops_cdv_bounded, ops_mmcs_bounded,
    ops_uco, Behavior, BehaviorGoal, OperationSet, VoteDistribution, VoteOpsError,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("n_values must be strictly increasing and hold at least two sizes")]
    NValues,
    #[error("trials must be at least 1")]
    Trials,
    #[error("behavior {0} needs a target alternative")]
    MissingTarget(Behavior),
    #[error("behavior {behavior} is not available for {rule}")]
    Unsupported { behavior: Behavior, rule: String },
    #[error("distribution is over {dist} alternatives, rule over {rule}")]
    Dimension { dist: usize, rule: usize },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Ops(#[from] VoteOpsError),
    #[error(transparent)]
    Vo(#[from] VoError),
    #[error(transparent)]
    Gsr(#[from] GsrError),
}

/// Deterministic generator for one trial, independent of how many trials run
/// or in which order.
pub fn trial_rng(seed: u64, n: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((n << 32) ^ trial);
    rng
}

/// `n` votes drawn i.i.d. from `pi`.
pub fn sample_profile(pi: &VoteDistribution, n: usize, rng: &mut ChaCha8Rng) -> Profile {
    let (weights, _) = pi.integer_weights();
    let dist = WeightedIndex::new(weights.iter().map(|&(_, w)| w))
        .expect("a distribution has positive total weight");
    let support = pi.support();
    let votes = (0..n)
        .map(|_| support[dist.sample(rng)].0.clone())
        .collect();
    Profile::new(pi.alternatives().clone(), votes).expect("sampled votes match the alternatives")
}

/// The operation sets and goals that make up one behavior on one profile.
/// Most behaviors give a single instance; MMCS gives one per challenger and
/// its value is the minimum over them.
pub fn behavior_instances(
    rule: &GsRule,
    behavior: Behavior,
    profile: &Profile,
    pi_prime: &VoteDistribution,
    target: Option<Alternative>,
) -> Result<Vec<(OperationSet, BehaviorGoal)>, ExperimentError> {
    use Behavior::*;
    let goal = || {
        behavior
            .goal(target)
            .ok_or(ExperimentError::MissingTarget(behavior))
    };
    Ok(match behavior {
        UcoConstructive | UcoDestructive => vec![(ops_uco(rule), goal()?)],
        BriberyConstructive | BriberyDestructive | MarginOfVictory => {
            vec![(ops_bribery_bounded(rule, profile)?, goal()?)]
        }
        CavConstructive | CavDestructive => vec![(ops_cav(rule, pi_prime)?, goal()?)],
        CdvConstructive | CdvDestructive => vec![(ops_cdv_bounded(rule, profile)?, goal()?)],
        Mmcs => {
            let winner = rule.winner(profile)?;
            let mut out = Vec::new();
            for c in rule.alternatives().iter().filter(|&c| c != winner) {
                match ops_mmcs_bounded(rule, profile, winner, c) {
                    Ok(ops) => out.push((ops, BehaviorGoal::Cvo(c))),
                    // nobody prefers c to the winner
                    Err(VoteOpsError::EmptyOperationSet) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            out
        }
    })
}

#[derive(Debug, Clone)]
pub struct BehaviorOutcome {
    pub value: VoValue,
    /// The instance attaining a finite value, with its solution.
    pub best: Option<(OperationSet, BehaviorGoal, VoSolution)>,
}

pub fn solve_behavior(
    rule: &GsRule,
    behavior: Behavior,
    profile: &Profile,
    pi_prime: &VoteDistribution,
    target: Option<Alternative>,
    method: Method,
    opts: &SolveOptions,
) -> Result<BehaviorOutcome, ExperimentError> {
    let mut best: Option<(OperationSet, BehaviorGoal, VoSolution)> = None;
    let mut unknown: Option<u64> = None;
    for (ops, goal) in behavior_instances(rule, behavior, profile, pi_prime, target)? {
        let inst = VoInstance::new(rule, profile, &ops, goal)?;
        let sol = solve_vo(&inst, method, opts)?;
        match sol.value {
            VoValue::Finite(k) => {
                if best
                    .as_ref()
                    .is_none_or(|(_, _, b)| matches!(b.value, VoValue::Finite(bk) if k < bk))
                {
                    best = Some((ops, goal, sol));
                }
            }
            VoValue::UnknownAtCap(cap) => {
                unknown = Some(unknown.map_or(cap, |u| u.min(cap)));
            }
            VoValue::Infinite => {}
        }
    }
    let value = match (&best, unknown) {
        (Some((_, _, s)), Some(cap)) if !matches!(s.value, VoValue::Finite(k) if k <= cap) => {
            VoValue::UnknownAtCap(cap)
        }
        (Some((_, _, s)), _) => s.value,
        (None, Some(cap)) => VoValue::UnknownAtCap(cap),
        (None, None) => VoValue::Infinite,
    };
    Ok(BehaviorOutcome { value, best })
}

/// The rule a sweep runs under.
#[derive(Debug, Clone)]
pub enum SweepRule {
    Gsr(GsRule),
    /// Not a generalized scoring rule; a negative control.
    GammaMajority(GammaMajorityRule),
}

impl SweepRule {
    pub fn name(&self) -> String {
        match self {
            SweepRule::Gsr(r) => r.name().to_string(),
            SweepRule::GammaMajority(g) => g.name(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            SweepRule::Gsr(r) => r.m(),
            SweepRule::GammaMajority(_) => 2,
        }
    }
}

/// Slope windows for the two growing categories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub sqrt_n: (f64, f64),
    pub linear_n: (f64, f64),
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            sqrt_n: (0.4, 0.6),
            linear_n: (0.9, 1.1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub rule: SweepRule,
    pub behavior: Behavior,
    pub pi: VoteDistribution,
    /// Pool distribution for CAV; defaults to `pi`.
    pub pi_prime: Option<VoteDistribution>,
    pub target: Option<Alternative>,
    pub n_values: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub method: Method,
    pub solve: SolveOptions,
    pub thresholds: Thresholds,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl SweepConfig {
    pub fn new(
        rule: SweepRule,
        behavior: Behavior,
        pi: VoteDistribution,
        n_values: Vec<u64>,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            rule,
            behavior,
            pi,
            pi_prime: None,
            target: None,
            n_values,
            trials,
            seed,
            method: Method::Auto,
            solve: SolveOptions::default(),
            thresholds: Thresholds::default(),
            jobs: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_values.len() < 2
            || self.n_values[0] == 0
            || self.n_values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ExperimentError::NValues);
        }
        if self.trials == 0 {
            return Err(ExperimentError::Trials);
        }
        for d in std::iter::once(&self.pi).chain(&self.pi_prime) {
            if d.m() != self.rule.m() {
                return Err(ExperimentError::Dimension {
                    dist: d.m(),
                    rule: self.rule.m(),
                });
            }
        }
        if self.behavior.needs_target() && self.target.is_none() {
            return Err(ExperimentError::MissingTarget(self.behavior));
        }
        if let SweepRule::GammaMajority(_) = self.rule {
            gamma_setup(self.behavior, self.target).ok_or_else(|| {
                ExperimentError::Unsupported {
                    behavior: self.behavior,
                    rule: self.rule.name(),
                }
            })?;
        }
        Ok(())
    }

    fn pool(&self) -> &VoteDistribution {
        self.pi_prime.as_ref().unwrap_or(&self.pi)
    }
}

fn gamma_setup(behavior: Behavior, target: Option<Alternative>) -> Option<(GammaOps, GammaGoal)> {
    use Behavior::*;
    let ops = match behavior {
        UcoConstructive | UcoDestructive => GammaOps::Addition,
        BriberyConstructive | BriberyDestructive | MarginOfVictory => GammaOps::Bribery,
        _ => return None,
    };
    let goal = match behavior {
        UcoConstructive | BriberyConstructive => GammaGoal::MakeWin(target?),
        UcoDestructive | BriberyDestructive => GammaGoal::MakeLose(target?),
        _ => GammaGoal::ChangeWinner,
    };
    Some((ops, goal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Zero,
    Finite,
    Infinite,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub rule: String,
    pub behavior: Behavior,
    pub n: u64,
    pub trial: u64,
    pub seed: u64,
    pub status: TrialStatus,
    pub value: Option<u64>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerN {
    pub n: u64,
    pub zero: u64,
    /// Finite and positive.
    pub finite: u64,
    pub infinite: u64,
    pub unknown: u64,
    /// Quantiles of the positive finite values.
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
}

impl PerN {
    pub fn trials(&self) -> u64 {
        self.zero + self.finite + self.infinite + self.unknown
    }

    pub fn zero_frac(&self) -> f64 {
        self.zero as f64 / self.trials() as f64
    }

    pub fn inf_frac(&self) -> f64 {
        self.infinite as f64 / self.trials() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingCategory {
    Zero,
    SqrtN,
    LinearN,
    Infinite,
    Mixed(Option<f64>),
}

impl std::fmt::Display for ScalingCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalingCategory::Zero => f.write_str("zero"),
            ScalingCategory::SqrtN => f.write_str("sqrt-n"),
            ScalingCategory::LinearN => f.write_str("linear-n"),
            ScalingCategory::Infinite => f.write_str("infinite"),
            ScalingCategory::Mixed(Some(s)) => write!(f, "mixed({s:.3})"),
            ScalingCategory::Mixed(None) => f.write_str("mixed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rule: String,
    pub behavior: Behavior,
    pub per_n: Vec<PerN>,
    /// Least-squares slope of `ln median` against `ln n`.
    pub slope: Option<f64>,
    pub category: ScalingCategory,
    /// Largest ratio between a median and its predicted scale.
    pub beta_star_estimate: Option<f64>,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: ScalingReport,
    pub trials: Vec<TrialRecord>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[u64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64))
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

impl ScalingReport {
    pub fn from_trials(
        rule: &str,
        behavior: Behavior,
        n_values: &[u64],
        records: &[TrialRecord],
        thresholds: Thresholds,
    ) -> Self {
        let per_n: Vec<PerN> = n_values
            .iter()
            .map(|&n| {
                let rs = records.iter().filter(|r| r.n == n);
                let mut p = PerN {
                    n,
                    zero: 0,
                    finite: 0,
                    infinite: 0,
                    unknown: 0,
                    median: None,
                    q25: None,
                    q75: None,
                };
                let mut values = Vec::new();
                for r in rs {
                    match r.status {
                        TrialStatus::Zero => p.zero += 1,
                        TrialStatus::Finite => {
                            p.finite += 1;
                            values.push(r.value.expect("finite trials carry a value"));
                        }
                        TrialStatus::Infinite => p.infinite += 1,
                        TrialStatus::Unknown => p.unknown += 1,
                    }
                }
                values.sort_unstable();
                p.median = quantile(&values, 0.5);
                p.q25 = quantile(&values, 0.25);
                p.q75 = quantile(&values, 0.75);
                p
            })
            .collect();
        let points: Vec<(f64, f64)> = per_n
            .iter()
            .filter_map(|p| p.median.map(|m| ((p.n as f64).ln(), m.ln())))
            .collect();
        let slope = ls_slope(&points);
        let all = |f: fn(&PerN) -> u64| per_n.iter().all(|p| f(p) == p.trials());
        let within = |s: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&s);
        let category = if all(|p| p.zero) {
            ScalingCategory::Zero
        } else if all(|p| p.infinite) {
            ScalingCategory::Infinite
        } else {
            match slope {
                Some(s) if within(s, thresholds.sqrt_n) => ScalingCategory::SqrtN,
                Some(s) if within(s, thresholds.linear_n) => ScalingCategory::LinearN,
                s => ScalingCategory::Mixed(s),
            }
        };
        let scale = match category {
            ScalingCategory::SqrtN => Some(Scale::SqrtN),
            ScalingCategory::LinearN => Some(Scale::LinearN),
            _ => None,
        };
        let beta_star_estimate = scale.and_then(|sc| {
            per_n
                .iter()
                .filter_map(|p| {
                    let r = p.median? / sc.of(p.n);
                    Some(r.max(1.0 / r))
                })
                .reduce(f64::max)
        });
        Self {
            rule: rule.to_string(),
            behavior,
            per_n,
            slope,
            category,
            beta_star_estimate,
            thresholds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    SqrtN,
    LinearN,
}

impl Scale {
    pub fn of(self, n: u64) -> f64 {
        match self {
            Scale::SqrtN => (n as f64).sqrt(),
            Scale::LinearN => n as f64,
        }
    }
}

fn run_parallel<T: Send>(
    jobs: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, ExperimentError> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome, ExperimentError> {
    cfg.validate()?;
    let name = cfg.rule.name();
    let work: Vec<(u64, u64)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let trials = run_parallel(cfg.jobs, || {
        work.par_iter()
            .map(|&(n, t)| run_trial(cfg, &name, n, t))
            .collect::<Vec<_>>()
    })?;
    let report =
        ScalingReport::from_trials(&name, cfg.behavior, &cfg.n_values, &trials, cfg.thresholds);
    Ok(SweepOutcome { report, trials })
}

fn status_of(value: VoValue) -> (TrialStatus, Option<u64>) {
    match value {
        VoValue::Finite(0) => (TrialStatus::Zero, Some(0)),
        VoValue::Finite(k) => (TrialStatus::Finite, Some(k)),
        VoValue::Infinite => (TrialStatus::Infinite, None),
        VoValue::UnknownAtCap(_) => (TrialStatus::Unknown, None),
    }
}

fn run_trial(cfg: &SweepConfig, name: &str, n: u64, trial: u64) -> TrialRecord {
    let start = Instant::now();
    let mut rng = trial_rng(cfg.seed, n, trial);
    let profile = sample_profile(&cfg.pi, n as usize, &mut rng);
    let value = match &cfg.rule {
        SweepRule::Gsr(rule) => solve_behavior(
            rule,
            cfg.behavior,
            &profile,
            cfg.pool(),
            cfg.target,
            cfg.method,
            &cfg.solve,
        )
        .map(|o| o.value)
        // refusals count as unknown
        .unwrap_or(VoValue::UnknownAtCap(0)),
        SweepRule::GammaMajority(g) => {
            let (ops, goal) = gamma_setup(cfg.behavior, cfg.target).expect("validated");
            let n_b = profile.votes().iter().filter(|v| v.top().0 == 1).count() as u64;
            let n_a = n - n_b;
            let cap = 4 * n + 16;
            match g.min_operations(n_a, n_b, ops, goal, cap) {
                Some(k) => VoValue::Finite(k),
                None if ops == GammaOps::Bribery => VoValue::Infinite,
                None => VoValue::UnknownAtCap(cap),
            }
        }
    };
    let (status, value) = status_of(value);
    TrialRecord {
        rule: name.to_string(),
        behavior: cfg.behavior,
        n,
        trial,
        seed: cfg.seed,
        status,
        value,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Trials at the largest `n` that fall outside all four categories, with
/// `β*` calibrated on the smaller sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourCategoryCheck {
    pub n: u64,
    pub scale: Scale,
    pub beta_star: f64,
    pub outside: u64,
    pub total: u64,
}

impl FourCategoryCheck {
    pub fn outside_fraction(&self) -> f64 {
        self.outside as f64 / self.total as f64
    }
}

/// `β*` is the smallest value whose window `(x/β*, β*·x)` holds the central
/// `1 - ε/2` of the positive values seen at the smaller sizes, normalized by
/// the scale `x` of the sweep's category. The windows are then checked on
/// the largest size, which took no part in choosing `β*`.
pub fn four_category_check(
    report: &ScalingReport,
    trials: &[TrialRecord],
    eps: f64,
) -> Option<FourCategoryCheck> {
    let largest = report.per_n.last()?.n;
    let scales: Vec<Scale> = match report.category {
        ScalingCategory::SqrtN => vec![Scale::SqrtN],
        ScalingCategory::LinearN => vec![Scale::LinearN],
        _ => vec![Scale::SqrtN, Scale::LinearN],
    };
    let calibrate = |sc: Scale| -> f64 {
        let mut xs: Vec<f64> = trials
            .iter()
            .filter(|r| r.n < largest && r.status == TrialStatus::Finite)
            .filter_map(|r| Some(r.value? as f64 / sc.of(r.n)))
            .collect();
        if xs.is_empty() {
            return 1.0;
        }
        xs.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = (xs.len() - 1) as f64 * p;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
        };
        // open windows: nudge past the calibration quantiles
        (1.0 / q(eps / 4.0)).max(q(1.0 - eps / 4.0)).max(1.0) * (1.0 + 1e-9)
    };
    let (scale, beta_star) = scales
        .into_iter()
        .map(|sc| (sc, calibrate(sc)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let at_largest: Vec<&TrialRecord> = trials.iter().filter(|r| r.n == largest).collect();
    let outside = at_largest
        .iter()
        .filter(|r| match r.status {
            TrialStatus::Zero | TrialStatus::Infinite => false,
            TrialStatus::Unknown => true,
            TrialStatus::Finite => {
                let v = r.value.unwrap_or(0) as f64;
                let x = scale.of(r.n);
                !(v > x / beta_star && v < x * beta_star)
            }
        })
        .count() as u64;
    Some(FourCategoryCheck {
        n: largest,
        scale,
        beta_star,
        outside,
        total: at_largest.len() as u64,
    })
}

/// The category predicted from `π` alone for a sweep, when the behavior has
/// a `π`-level operation set.
pub fn predict_for_config(cfg: &SweepConfig) -> Result<Option<CategoryPrediction>, ExperimentError> {
    use Behavior::*;
    let SweepRule::Gsr(rule) = &cfg.rule else {
        return Ok(None);
    };
    let ops = match cfg.behavior {
        UcoConstructive | UcoDestructive => ops_uco(rule),
        BriberyConstructive | BriberyDestructive | MarginOfVictory => ops_bribery(rule, &cfg.pi)?,
        CavConstructive | CavDestructive => ops_cav(rule, cfg.pool())?,
        CdvConstructive | CdvDestructive => ops_cdv(rule, &cfg.pi)?,
        Mmcs => return Ok(None),
    };
    let goal = cfg
        .behavior
        .goal(cfg.target)
        .ok_or(ExperimentError::MissingTarget(cfg.behavior))?;
    Ok(Some(predict_category(rule, &cfg.pi, &ops, goal)?))
}

/// Whether an empirical category agrees with a prediction. Only the two
/// growing categories are compared.
pub fn agrees(predicted: Category, observed: ScalingCategory) -> Option<bool> {
    match predicted {
        Category::SqrtN => Some(observed == ScalingCategory::SqrtN),
        Category::LinearN => Some(observed == ScalingCategory::LinearN),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub rule: String,
    pub behavior: Behavior,
    pub n: u64,
    pub trials: u64,
    pub zero_frac: f64,
    pub inf_frac: f64,
    pub unknown_frac: f64,
}

/// Fractions of trials whose solution is 0 and ∞ under the uniform
/// distribution. All behaviors of one rule are solved on the same profiles.
#[allow(clippy::too_many_arguments)]
pub fn run_zero_inf_table(
    rules: &[GsRule],
    behaviors: &[Behavior],
    target: Alternative,
    n: u64,
    trials: u64,
    seed: u64,
    opts: &SolveOptions,
    jobs: usize,
) -> Result<Vec<TableRow>, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Trials);
    }
    let mut rows = Vec::new();
    for rule in rules {
        let pi = VoteDistribution::uniform(rule.alternatives().clone());
        let statuses: Vec<Vec<TrialStatus>> = run_parallel(jobs, || {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, n, t);
                    let profile = sample_profile(&pi, n as usize, &mut rng);
                    behaviors
                        .iter()
                        .map(|&b| {
                            let v = solve_behavior(
                                rule,
                                b,
                                &profile,
                                &pi,
                                Some(target),
                                Method::Auto,
                                opts,
                            )
                            .map(|o| o.value)
                            .unwrap_or(VoValue::UnknownAtCap(0));
                            status_of(v).0
                        })
                        .collect()
                })
                .collect()
        })?;
        for (bi, &b) in behaviors.iter().enumerate() {
            let count = |s: TrialStatus| {
                statuses.iter().filter(|row| row[bi] == s).count() as f64 / trials as f64
            };
            rows.push(TableRow {
                rule: rule.name().to_string(),
                behavior: b,
                n,
                trials,
                zero_frac: count(TrialStatus::Zero),
                inf_frac: count(TrialStatus::Infinite),
                unknown_frac: count(TrialStatus::Unknown),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    pub n: u64,
    pub inside: u64,
    pub trials: u64,
}

impl ConcentrationPoint {
    pub fn fraction(&self) -> f64 {
        self.inside as f64 / self.trials as f64
    }

    /// Binomial standard error of [`Self::fraction`].
    pub fn std_err(&self) -> f64 {
        let p = self.fraction();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    #[serde(serialize_with = "serialize_display")]
    pub beta: BigRational,
    pub per_n: Vec<ConcentrationPoint>,
}

fn serialize_display<S: serde::Serializer, T: std::fmt::Display>(
    v: &T,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl ConcentrationReport {
    /// Whether no fraction drops below its predecessor by more than
    /// `sigmas` combined standard errors.
    pub fn non_decreasing_within(&self, sigmas: f64) -> bool {
        self.per_n.windows(2).all(|w| {
            let se = (w[0].std_err().powi(2) + w[1].std_err().powi(2)).sqrt();
            w[1].fraction() >= w[0].fraction() - sigmas * se
        })
    }
}

/// Whether a total score lies in the concentration set: pairs tied in
/// `f(P_π)` differ by strictly between `√n/β` and `β√n`, all other pairs by
/// strictly between `n/β` and `βn`.
pub fn in_concentration_set(
    expected: &[BigRational],
    score: &[BigInt],
    beta: &BigRational,
    n: u64,
) -> bool {
    let p = beta.numer();
    let q = beta.denom();
    let n = BigInt::from(n);
    let k = score.len();
    (0..k).all(|i| {
        (i + 1..k).all(|j| {
            let d = (&score[i] - &score[j]).abs();
            if expected[i] == expected[j] {
                // squared forms of √n/β < d < β√n
                let d2 = &d * &d;
                &d2 * p * p > &n * q * q && &d2 * q * q < &n * p * p
            } else {
                &d * p > &n * q && &d * q < &n * p
            }
        })
    })
}

pub fn run_concentration(
    rule: &GsRule,
    pi: &VoteDistribution,
    beta: &BigRational,
    n_values: &[u64],
    trials: u64,
    seed: u64,
    jobs: usize,
) -> Result<ConcentrationReport, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Trials);
    }
    let expected = pi.expected_score(rule)?;
    let per_n = n_values
        .iter()
        .map(|&n| {
            let inside = run_parallel(jobs, || {
                (0..trials)
                    .into_par_iter()
                    .filter(|&t| {
                        let mut rng = trial_rng(seed, n, t);
                        let profile = sample_profile(pi, n as usize, &mut rng);
                        let score = rule.total_from_counts(&profile.order_counts());
                        in_concentration_set(&expected, &score.0, beta, n)
                    })
                    .count() as u64
            })?;
            Ok(ConcentrationPoint { n, inside, trials })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(ConcentrationReport {
        beta: beta.clone(),
        per_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsr::{rule_by_name, Alternatives};

    fn maj() -> GsRule {
        rule_by_name("plurality", 2).unwrap()
    }

    #[test]
    fn point_mass_profile_repeats_one_vote() {
        let a = Alternatives::new(3).unwrap();
        let o = a.parse_order("b>c>a").unwrap();
        let pi = VoteDistribution::point_mass(a, o.clone());
        let p = sample_profile(&pi, 5, &mut trial_rng(1, 5, 0));
        assert_eq!(p.n(), 5);
        assert!(p.votes().iter().all(|v| *v == o));
    }

    #[test]
    fn sampling_is_deterministic() {
        let pi = VoteDistribution::uniform(Alternatives::new(3).unwrap());
        let a = sample_profile(&pi, 50, &mut trial_rng(9, 50, 3));
        let b = sample_profile(&pi, 50, &mut trial_rng(9, 50, 3));
        let c = sample_profile(&pi, 50, &mut trial_rng(9, 50, 4));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn quantiles_interpolate() {
        assert_eq!(quantile(&[], 0.5), None);
        assert_eq!(quantile(&[1, 2, 3, 4], 0.5), Some(2.5));
        assert_eq!(quantile(&[1, 2, 3, 4], 0.0), Some(1.0));
        assert_eq!(quantile(&[7], 0.75), Some(7.0));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0f64, 100.0, 1000.0]
            .iter()
            .map(|&n| (n.ln(), (3.0 * n.powf(0.7)).ln()))
            .collect();
        assert!((ls_slope(&pts).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(ls_slope(&pts[..1]), None);
    }

    #[test]
    fn config_validation() {
        let pi = VoteDistribution::uniform(Alternatives::new(2).unwrap());
        let mut cfg = SweepConfig::new(
            SweepRule::Gsr(maj()),
            Behavior::UcoConstructive,
            pi,
            vec![10, 20],
            3,
            0,
        );
        assert!(matches!(cfg.validate(), Err(ExperimentError::MissingTarget(_))));
        cfg.target = Some(Alternative(1));
        assert!(cfg.validate().is_ok());
        cfg.n_values = vec![20, 10];
        assert!(matches!(cfg.validate(), Err(ExperimentError::NValues)));
        cfg.n_values = vec![10];
        assert!(matches!(cfg.validate(), Err(ExperimentError::NValues)));
        cfg.n_values = vec![10, 20];
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(ExperimentError::Trials)));
        cfg.trials = 1;
        cfg.rule = SweepRule::GammaMajority(GammaMajorityRule::new(3, 4).unwrap());
        cfg.behavior = Behavior::Mmcs;
        assert!(matches!(cfg.validate(), Err(ExperimentError::Unsupported { .. })));
    }

    #[test]
    fn small_sweep_counts_add_up_and_reproduce() {
        let pi = VoteDistribution::uniform(Alternatives::new(2).unwrap());
        let mut cfg = SweepConfig::new(
            SweepRule::Gsr(maj()),
            Behavior::MarginOfVictory,
            pi,
            vec![20, 80],
            30,
            7,
        );
        cfg.jobs = 1;
        let a = run_sweep(&cfg).unwrap();
        cfg.jobs = 3;
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a.report, b.report);
        for p in &a.report.per_n {
            assert_eq!(p.trials(), 30);
            // MoV is never 0 or ∞
            assert_eq!(p.zero + p.infinite + p.unknown, 0);
        }
        let strip = |v: &[TrialRecord]| v.iter().map(|r| (r.n, r.trial, r.value)).collect::<Vec<_>>();
        assert_eq!(strip(&a.trials), strip(&b.trials));
    }

    #[test]
    fn mmcs_minimizes_over_challengers() {
        let rule = rule_by_name("plurality", 3).unwrap();
        // a: 2, b: 1, c: 2; a wins the tie with c
        let p = Profile::parse(3, &["a>b>c", "a>b>c", "b>a>c", "c>b>a", "c>b>a"]).unwrap();
        let pi = VoteDistribution::uniform(rule.alternatives().clone());
        let o = solve_behavior(&rule, Behavior::Mmcs, &p, &pi, None, Method::Auto, &SolveOptions::default())
            .unwrap();
        let brute = brute_mmcs(&rule, &p);
        assert_eq!(o.value, brute);
        // two c>b>a voters switch to b
        assert_eq!(o.value, VoValue::Finite(2));
    }

    /// Exhaustive MMCS over all ways to rewrite eligible voters, up to three.
    fn brute_mmcs(rule: &GsRule, p: &Profile) -> VoValue {
        use crate::LinearOrder;
        let w = rule.winner(p).unwrap();
        let all = LinearOrder::all(3);
        let mut best = VoValue::Infinite;
        for c in rule.alternatives().iter().filter(|&c| c != w) {
            let eligible: Vec<usize> = (0..p.n())
                .filter(|&i| p.votes()[i].prefers(c.0, w.0))
                .collect();
            for mask in 0u32..(1 << eligible.len()) {
                let chosen: Vec<usize> = eligible
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                let k = chosen.len() as u64;
                if matches!(best, VoValue::Finite(b) if b <= k) {
                    continue;
                }
                let mut choice = vec![0usize; chosen.len()];
                loop {
                    let mut votes = p.votes().to_vec();
                    for (slot, &i) in chosen.iter().enumerate() {
                        votes[i] = all[choice[slot]].clone();
                    }
                    if rule.winner(&p.with_votes(votes).unwrap()).unwrap() == c {
                        best = VoValue::Finite(k);
                        break;
                    }
                    let mut d = 0;
                    while d < choice.len() && choice[d] == all.len() - 1 {
                        choice[d] = 0;
                        d += 1;
                    }
                    if d == choice.len() {
                        break;
                    }
                    choice[d] += 1;
                }
            }
        }
        best
    }

    #[test]
    fn gamma_sweep_runs() {
        let pi = VoteDistribution::uniform(Alternatives::new(2).unwrap());
        let cfg = SweepConfig::new(
            SweepRule::GammaMajority(GammaMajorityRule::new(3, 4).unwrap()),
            Behavior::MarginOfVictory,
            pi,
            vec![16, 64],
            20,
            1,
        );
        let out = run_sweep(&cfg).unwrap();
        for r in &out.trials {
            assert!(matches!(r.status, TrialStatus::Finite | TrialStatus::Zero));
        }
    }

    #[test]
    fn concentration_extremes() {
        let rule = maj();
        let pi = VoteDistribution::uniform(rule.alternatives().clone());
        let huge = BigRational::from_integer(1_000_000.into());
        let r = run_concentration(&rule, &pi, &huge, &[400, 1600], 50, 3, 0).unwrap();
        // only an exact tie escapes the window
        assert!(r.per_n.iter().all(|p| p.fraction() > 0.9));
        let one = BigRational::from_integer(1.into());
        let r = run_concentration(&rule, &pi, &one, &[400, 1600], 50, 3, 0).unwrap();
        assert!(r.per_n.iter().all(|p| p.inside == 0));
    }

    #[test]
    fn concentration_membership_exact() {
        let beta = BigRational::new(2.into(), 1.into());
        let tied = [BigRational::from_integer(1.into()), BigRational::from_integer(1.into())];
        let s = |a: i64, b: i64| [BigInt::from(a), BigInt::from(b)];
        // n = 100: window (5, 20)
        assert!(!in_concentration_set(&tied, &s(5, 0), &beta, 100));
        assert!(in_concentration_set(&tied, &s(6, 0), &beta, 100));
        assert!(in_concentration_set(&tied, &s(0, 19), &beta, 100));
        assert!(!in_concentration_set(&tied, &s(20, 0), &beta, 100));
        let apart = [BigRational::from_integer(1.into()), BigRational::from_integer(0.into())];
        // window (50, 200)
        assert!(!in_concentration_set(&apart, &s(50, 0), &beta, 100));
        assert!(in_concentration_set(&apart, &s(51, 0), &beta, 100));
    }
}
