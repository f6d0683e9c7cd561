//! Monte-Carlo study runner: repeated trials, per-run estimates at every
//! follow-up policy, and bias summaries against the Aalen-Johansen estimator.
//!
//! Probability means are taken on the logit scale and back-transformed;
//! relative biases are exp(mean log ratio) − 1. Runs whose value would enter
//! a logit or log at 0 or 1 are excluded from that transformed mean and
//! counted per cell. Per-run work is keyed by (seed, run index), so the
//! summary does not depend on thread count.

use alloc::string::String;
use alloc::vec::Vec;

use crate::compare::VarianceSource;
use crate::estimators::{evaluate, EstimatorKind};
use crate::math;
use crate::model::{follow_up_times, Cohort, FollowUpPolicy, Group};
use crate::variance::{
    derive_seed, model_variance, replicate_rng, sample_variance, BootstrapConfig, VarianceError,
};

use super::{generate_trial, true_cif, ScenarioSpec, SimulateError};

const ESTIMATORS: [EstimatorKind; 5] = EstimatorKind::ALL;
const AJ: usize = 3;

/// One summarized series: the true value or one estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Series {
    True,
    Estimator(EstimatorKind),
}

impl Series {
    pub fn label(self) -> &'static str {
        match self {
            Series::True => "true",
            Series::Estimator(kind) => kind.label(),
        }
    }
}

/// Logit-scale mean and AJ biases for one (policy, group, series) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityCell {
    pub policy: FollowUpPolicy,
    pub group: Group,
    pub series: Series,
    /// Mean of logit-transformed per-run values, back-transformed; `None`
    /// when every run was degenerate.
    pub mean: Option<f64>,
    pub mean_excluded: u32,
    /// Arithmetic mean of (estimate − AJ) over all runs; absent for the true
    /// and AJ series.
    pub abs_bias_vs_aj: Option<f64>,
    /// exp(mean ln(estimate/AJ)) − 1; absent for the true and AJ series.
    pub rel_bias_vs_aj: Option<f64>,
    pub rel_bias_excluded: u32,
}

/// Geometric-mean relative risk and its bias against the AJ-based relative
/// risk for one (policy, series) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeRiskCell {
    pub policy: FollowUpPolicy,
    pub series: Series,
    /// exp(mean ln RR) over runs where the ratio is defined and positive.
    pub mean_rr: Option<f64>,
    pub mean_excluded: u32,
    /// exp(mean ln(RR/RR_AJ)) − 1; absent for the true and AJ series.
    pub rel_bias_vs_aj: Option<f64>,
    pub rel_bias_excluded: u32,
}

/// Box-plot summary: Tukey whiskers and quartiles (type-7 interpolation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub lower_whisker: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub upper_whisker: f64,
}

/// Distribution of a variance estimator across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSpreadCell {
    pub policy: FollowUpPolicy,
    pub group: Group,
    pub estimator: EstimatorKind,
    pub source: VarianceSource,
    pub spread: FiveNumber,
    pub runs: u32,
}

/// Aggregated output of [`run_study`].
#[derive(Debug, Clone, PartialEq)]
pub struct StudySummary {
    pub scenario: String,
    pub n_runs: u32,
    pub bootstrap_replicates: Option<u32>,
    pub probabilities: Vec<ProbabilityCell>,
    pub relative_risks: Vec<RelativeRiskCell>,
    pub variance_spreads: Vec<VarianceSpreadCell>,
}

#[derive(Debug, Clone, Copy)]
struct GroupRun {
    true_value: f64,
    values: [f64; 5],
    var_model: [f64; 5],
    var_boot: Option<[f64; 5]>,
}

#[derive(Debug, Clone, Copy)]
struct PolicyRun {
    a: GroupRun,
    b: GroupRun,
}

impl PolicyRun {
    fn group(&self, group: Group) -> &GroupRun {
        match group {
            Group::A => &self.a,
            Group::B => &self.b,
        }
    }
}

struct RunOutcome {
    policies: [PolicyRun; 4],
}

/// Simulates `n_runs` trials of the scenario and aggregates estimator and
/// relative-risk biases plus variance distributions. Missing censoring
/// bounds are calibrated once up front. Deterministic given the seed,
/// independent of worker count.
pub fn run_study(
    scenario: &ScenarioSpec,
    n_runs: u32,
    bootstrap: Option<&BootstrapConfig>,
    seed: u64,
) -> Result<StudySummary, SimulateError> {
    if n_runs < 2 {
        return Err(SimulateError::TooFewRuns);
    }
    let mut scenario = scenario.clone();
    scenario.calibrate()?;

    let run_one = |run: u32| one_run(&scenario, bootstrap, derive_seed(seed, u64::from(run)));

    #[cfg(feature = "parallel")]
    let runs: Vec<RunOutcome> = {
        use rayon::prelude::*;
        (0..n_runs).into_par_iter().map(run_one).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<RunOutcome> = (0..n_runs).map(run_one).collect::<Result<_, _>>()?;

    Ok(aggregate(&scenario, n_runs, bootstrap, &runs))
}

fn one_run(
    scenario: &ScenarioSpec,
    bootstrap: Option<&BootstrapConfig>,
    trial_seed: u64,
) -> Result<RunOutcome, SimulateError> {
    let (cohort_a, cohort_b) = generate_trial(scenario, trial_seed)?;
    let taus = follow_up_times(&cohort_a, &cohort_b);

    let group_taus = |group: Group| {
        let mut out = [0.0; 4];
        for (i, policy) in FollowUpPolicy::ALL.into_iter().enumerate() {
            let (ta, tb) = taus.at(policy);
            out[i] = match group {
                Group::A => ta,
                Group::B => tb,
            };
        }
        out
    };
    let taus_a = group_taus(Group::A);
    let taus_b = group_taus(Group::B);

    let boot_a = match bootstrap {
        Some(config) => {
            Some(group_bootstrap(&cohort_a, &taus_a, config, derive_seed(trial_seed, 0xA))?)
        }
        None => None,
    };
    let boot_b = match bootstrap {
        Some(config) => {
            Some(group_bootstrap(&cohort_b, &taus_b, config, derive_seed(trial_seed, 0xB))?)
        }
        None => None,
    };

    let group_run = |cohort: &Cohort,
                     group: Group,
                     tau: f64,
                     boot: Option<[f64; 5]>|
     -> Result<GroupRun, SimulateError> {
        let mut values = [0.0; 5];
        let mut var_model = [0.0; 5];
        for (k, kind) in ESTIMATORS.into_iter().enumerate() {
            values[k] = evaluate(cohort, tau, kind).map_err(VarianceError::from)?.value;
            var_model[k] = model_variance(cohort, tau, kind).map_err(VarianceError::from)?;
        }
        Ok(GroupRun { true_value: true_cif(scenario, group, tau)?, values, var_model, var_boot: boot })
    };

    let mut policies = Vec::with_capacity(4);
    for (i, _) in FollowUpPolicy::ALL.into_iter().enumerate() {
        policies.push(PolicyRun {
            a: group_run(&cohort_a, Group::A, taus_a[i], boot_a.map(|m| m[i]))?,
            b: group_run(&cohort_b, Group::B, taus_b[i], boot_b.map(|m| m[i]))?,
        });
    }
    let policies: [PolicyRun; 4] =
        [policies[0], policies[1], policies[2], policies[3]];
    Ok(RunOutcome { policies })
}

/// Bootstrap variances for every (policy τ, estimator) cell of one cohort.
/// Each replicate resamples once and is evaluated at all policy times, from
/// a dedicated stream per replicate.
fn group_bootstrap(
    cohort: &Cohort,
    taus: &[f64; 4],
    config: &BootstrapConfig,
    seed: u64,
) -> Result<[[f64; 5]; 4], SimulateError> {
    let replicates = config.replicates() as usize;
    let mut per_cell: [[Vec<f64>; 5]; 4] = core::array::from_fn(|_| {
        core::array::from_fn(|_| Vec::with_capacity(replicates))
    });
    for i in 0..replicates as u64 {
        let mut rng = replicate_rng(seed, i);
        let sample = cohort.resample(&mut rng);
        for (p, &tau) in taus.iter().enumerate() {
            for (k, kind) in ESTIMATORS.into_iter().enumerate() {
                let value =
                    evaluate(&sample, tau, kind).map_err(VarianceError::from)?.value;
                per_cell[p][k].push(value);
            }
        }
    }
    let mut out = [[0.0; 5]; 4];
    for p in 0..4 {
        for k in 0..5 {
            out[p][k] = sample_variance(&per_cell[p][k]);
        }
    }
    Ok(out)
}

fn aggregate(
    scenario: &ScenarioSpec,
    n_runs: u32,
    bootstrap: Option<&BootstrapConfig>,
    runs: &[RunOutcome],
) -> StudySummary {
    let mut probabilities = Vec::new();
    let mut relative_risks = Vec::new();
    let mut variance_spreads = Vec::new();

    for (p, policy) in FollowUpPolicy::ALL.into_iter().enumerate() {
        for group in [Group::A, Group::B] {
            let of = |f: &dyn Fn(&GroupRun) -> f64| -> Vec<f64> {
                runs.iter().map(|r| f(r.policies[p].group(group))).collect()
            };

            let (mean, mean_excluded) = logit_mean(&of(&|g| g.true_value));
            probabilities.push(ProbabilityCell {
                policy,
                group,
                series: Series::True,
                mean,
                mean_excluded,
                abs_bias_vs_aj: None,
                rel_bias_vs_aj: None,
                rel_bias_excluded: 0,
            });

            let aj_values = of(&|g| g.values[AJ]);
            for (k, kind) in ESTIMATORS.into_iter().enumerate() {
                let values = of(&|g| g.values[k]);
                let (mean, mean_excluded) = logit_mean(&values);
                let (abs_bias, rel_bias, rel_excluded) = if k == AJ {
                    (None, None, 0)
                } else {
                    let abs = values.iter().zip(&aj_values).map(|(v, a)| v - a).sum::<f64>()
                        / values.len() as f64;
                    let (rel, excl) = log_ratio_mean(values.iter().copied().zip(aj_values.iter().copied()));
                    (Some(abs), rel, excl)
                };
                probabilities.push(ProbabilityCell {
                    policy,
                    group,
                    series: Series::Estimator(kind),
                    mean,
                    mean_excluded,
                    abs_bias_vs_aj: abs_bias,
                    rel_bias_vs_aj: rel_bias,
                    rel_bias_excluded: rel_excluded,
                });
            }
        }

        // Relative risks: A over B at the policy's evaluation times.
        let rr_of = |va: f64, vb: f64| if vb > 0.0 { Some(va / vb) } else { None };
        let rr_series = |f: &dyn Fn(&PolicyRun) -> (f64, f64)| -> Vec<Option<f64>> {
            runs.iter()
                .map(|r| {
                    let (va, vb) = f(&r.policies[p]);
                    rr_of(va, vb)
                })
                .collect()
        };

        let true_rr = rr_series(&|pr| (pr.a.true_value, pr.b.true_value));
        let (mean_rr, mean_excluded) = geometric_mean(&true_rr);
        relative_risks.push(RelativeRiskCell {
            policy,
            series: Series::True,
            mean_rr,
            mean_excluded,
            rel_bias_vs_aj: None,
            rel_bias_excluded: 0,
        });

        let aj_rr = rr_series(&|pr| (pr.a.values[AJ], pr.b.values[AJ]));
        for (k, kind) in ESTIMATORS.into_iter().enumerate() {
            let est_rr = rr_series(&|pr| (pr.a.values[k], pr.b.values[k]));
            let (mean_rr, mean_excluded) = geometric_mean(&est_rr);
            let (rel_bias, rel_excluded) = if k == AJ {
                (None, 0)
            } else {
                let pairs = est_rr
                    .iter()
                    .zip(&aj_rr)
                    .filter_map(|(e, a)| Some((((*e)?), ((*a)?))));
                let mut included = 0u32;
                let mut sum = 0.0;
                let mut excluded = 0u32;
                let mut seen = 0u32;
                for (e, a) in pairs {
                    seen += 1;
                    if e > 0.0 && a > 0.0 {
                        sum += math::ln(e / a);
                        included += 1;
                    } else {
                        excluded += 1;
                    }
                }
                // Pairs dropped because either ratio was undefined also count
                // as exclusions.
                excluded += runs.len() as u32 - seen;
                let bias = (included > 0).then(|| math::exp(sum / f64::from(included)) - 1.0);
                (bias, excluded)
            };
            relative_risks.push(RelativeRiskCell {
                policy,
                series: Series::Estimator(kind),
                mean_rr,
                mean_excluded,
                rel_bias_vs_aj: rel_bias,
                rel_bias_excluded: rel_excluded,
            });
        }

        // Variance distributions.
        for group in [Group::A, Group::B] {
            for (k, kind) in ESTIMATORS.into_iter().enumerate() {
                let mut model: Vec<f64> = runs
                    .iter()
                    .map(|r| r.policies[p].group(group).var_model[k])
                    .collect();
                variance_spreads.push(VarianceSpreadCell {
                    policy,
                    group,
                    estimator: kind,
                    source: VarianceSource::ModelBased,
                    spread: five_number(&mut model),
                    runs: n_runs,
                });
                if bootstrap.is_some() {
                    let mut boot: Vec<f64> = runs
                        .iter()
                        .filter_map(|r| r.policies[p].group(group).var_boot.map(|v| v[k]))
                        .collect();
                    variance_spreads.push(VarianceSpreadCell {
                        policy,
                        group,
                        estimator: kind,
                        source: VarianceSource::Bootstrap,
                        spread: five_number(&mut boot),
                        runs: n_runs,
                    });
                }
            }
        }
    }

    StudySummary {
        scenario: scenario.id.clone(),
        n_runs,
        bootstrap_replicates: bootstrap.map(|b| b.replicates()),
        probabilities,
        relative_risks,
        variance_spreads,
    }
}

/// Mean on the logit scale, back-transformed; values at 0 or 1 are excluded
/// and counted.
fn logit_mean(values: &[f64]) -> (Option<f64>, u32) {
    let mut sum = 0.0;
    let mut included = 0u32;
    let mut excluded = 0u32;
    for &x in values {
        if x > 0.0 && x < 1.0 {
            sum += math::logit(x);
            included += 1;
        } else {
            excluded += 1;
        }
    }
    ((included > 0).then(|| math::expit(sum / f64::from(included))), excluded)
}

/// exp(mean ln(x/y)) − 1 over pairs with both entries positive.
fn log_ratio_mean(pairs: impl Iterator<Item = (f64, f64)>) -> (Option<f64>, u32) {
    let mut sum = 0.0;
    let mut included = 0u32;
    let mut excluded = 0u32;
    for (x, y) in pairs {
        if x > 0.0 && y > 0.0 {
            sum += math::ln(x / y);
            included += 1;
        } else {
            excluded += 1;
        }
    }
    ((included > 0).then(|| math::exp(sum / f64::from(included)) - 1.0), excluded)
}

/// exp(mean ln r) over defined, positive ratios.
fn geometric_mean(ratios: &[Option<f64>]) -> (Option<f64>, u32) {
    let mut sum = 0.0;
    let mut included = 0u32;
    let mut excluded = 0u32;
    for r in ratios {
        match r {
            Some(x) if *x > 0.0 => {
                sum += math::ln(*x);
                included += 1;
            }
            _ => excluded += 1,
        }
    }
    ((included > 0).then(|| math::exp(sum / f64::from(included))), excluded)
}

fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Tukey box-plot summary: quartiles plus whiskers at the most extreme
/// observations within 1.5·IQR of the quartiles.
fn five_number(values: &mut [f64]) -> FiveNumber {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
    let q1 = quantile_type7(values, 0.25);
    let median = quantile_type7(values, 0.5);
    let q3 = quantile_type7(values, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let lower_whisker = *values.iter().find(|&&x| x >= lo_fence).unwrap_or(&values[0]);
    let upper_whisker = *values
        .iter()
        .rev()
        .find(|&&x| x <= hi_fence)
        .unwrap_or(values.last().expect("nonempty"));
    FiveNumber { lower_whisker, q1, median, q3, upper_whisker }
}
