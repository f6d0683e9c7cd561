//! The `estimate`, `compare` and `simulate` subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use aeprob_core::simulate::{
    builtin_scenario, parse_catalog, run_study, ScenarioSpec, Series, StudySummary,
};
use aeprob_core::variance::DEFAULT_REPLICATES;
use aeprob_core::{
    bootstrap_variance, compare_at_tauset, evaluate, follow_up_times, model_variance,
    BootstrapConfig, CompareError, EstimatorKind, FollowUpPolicy, VarianceSource,
};

use crate::error::CliError;
use crate::input::read_subjects;
use crate::report::{format_number, format_optional, Report};

/// Adverse-event probability estimation under competing risks: point
/// estimators, variances, group comparisons and simulation studies.
#[derive(Debug, Parser)]
#[command(name = "aeprob", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate AE probabilities per group and follow-up time policy.
    Estimate(EstimateArgs),
    /// Compare the groups by relative risk with log-transform intervals.
    Compare(CompareArgs),
    /// Run a Monte-Carlo simulation study for a catalog or custom scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input CSV with header `id,group,time,status`.
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated estimators: ip,ptid,km,aj,ptidce.
    #[arg(long, default_value = "ip,ptid,km,aj,ptidce")]
    pub estimators: String,
    /// Comma-separated variance sources: model,bootstrap.
    #[arg(long, default_value = "model")]
    pub variance: String,
    /// Bootstrap replicates (default 1000 when bootstrap is requested).
    #[arg(long)]
    pub bootstrap: Option<u32>,
    /// RNG seed; required whenever bootstrap variances are requested.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full-precision numbers instead of 6 significant digits.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Input CSV with header `id,group,time,status`.
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated estimators: ip,ptid,km,aj,ptidce.
    #[arg(long, default_value = "ip,ptid,km,aj,ptidce")]
    pub estimators: String,
    /// Comma-separated variance sources for the intervals: model,bootstrap.
    #[arg(long, default_value = "model")]
    pub variance: String,
    /// Bootstrap replicates (default 1000 when bootstrap is requested).
    #[arg(long)]
    pub bootstrap: Option<u32>,
    /// RNG seed; required whenever bootstrap variances are requested.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence level of the intervals.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full-precision numbers instead of 6 significant digits.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Catalog scenario id (S1..S10) or path to a scenario file.
    #[arg(long)]
    pub scenario: String,
    /// Number of simulated trials (at least 2).
    #[arg(long)]
    pub runs: u32,
    /// RNG seed driving trial generation and bootstrap resampling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated variance sources to evaluate per run: model,bootstrap.
    #[arg(long, default_value = "model")]
    pub variance: String,
    /// Bootstrap replicates per run (default 1000 when bootstrap is requested).
    #[arg(long)]
    pub bootstrap: Option<u32>,
    /// Output prefix: writes <out>_probability.csv, <out>_rr.csv and
    /// <out>_variance.csv (a trailing .csv on the prefix is dropped).
    #[arg(long)]
    pub out: PathBuf,
    /// Full-precision numbers instead of 6 significant digits.
    #[arg(long)]
    pub raw: bool,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn parse_estimators(spec: &str) -> Result<Vec<EstimatorKind>, CliError> {
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind = EstimatorKind::ALL
            .into_iter()
            .find(|k| k.label() == name)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown estimator `{name}` (expected ip, ptid, km, aj, ptidce)"
                ))
            })?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no estimators requested".into()));
    }
    Ok(out)
}

fn parse_sources(spec: &str) -> Result<Vec<VarianceSource>, CliError> {
    let mut out = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let source = match name {
            "model" => VarianceSource::ModelBased,
            "bootstrap" => VarianceSource::Bootstrap,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown variance source `{other}` (expected model, bootstrap)"
                )))
            }
        };
        if !out.contains(&source) {
            out.push(source);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no variance sources requested".into()));
    }
    Ok(out)
}

/// Builds the bootstrap configuration when the bootstrap source is active;
/// random work without an explicit seed is a usage error, never a silent
/// nondeterministic run.
fn bootstrap_config(
    sources: &[VarianceSource],
    replicates: Option<u32>,
    seed: Option<u64>,
) -> Result<Option<BootstrapConfig>, CliError> {
    if !sources.contains(&VarianceSource::Bootstrap) {
        return Ok(None);
    }
    let seed = seed.ok_or_else(|| {
        CliError::Usage("--seed is required when bootstrap variances are requested".into())
    })?;
    let config = BootstrapConfig::new(replicates.unwrap_or(DEFAULT_REPLICATES), seed)?;
    Ok(Some(config))
}

fn check_level(level: f64) -> Result<(), CliError> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--level must lie in (0, 1), got {level}")))
    }
}

const ESTIMATE_HEADER: &str = "group,policy,tau,estimator,value,variance_model,variance_bootstrap";

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let estimators = parse_estimators(&args.estimators)?;
    let sources = parse_sources(&args.variance)?;
    let config = bootstrap_config(&sources, args.bootstrap, args.seed)?;
    let (cohort_a, cohort_b) = read_subjects(&args.input)?;
    let taus = follow_up_times(&cohort_a, &cohort_b);

    let mut report = Report::new(ESTIMATE_HEADER);
    for policy in FollowUpPolicy::ALL {
        let (tau_a, tau_b) = taus.at(policy);
        for (cohort, tau) in [(&cohort_a, tau_a), (&cohort_b, tau_b)] {
            for &kind in &estimators {
                let value = evaluate(cohort, tau, kind)?.value;
                let model = if sources.contains(&VarianceSource::ModelBased) {
                    Some(model_variance(cohort, tau, kind)?)
                } else {
                    None
                };
                let boot = match &config {
                    Some(config) => Some(bootstrap_variance(cohort, tau, kind, config)?),
                    None => None,
                };
                report.push_row(&[
                    cohort.group().label().to_string(),
                    policy.label().to_string(),
                    format_number(tau, args.raw),
                    kind.label().to_string(),
                    format_number(value, args.raw),
                    format_optional(model, args.raw),
                    format_optional(boot, args.raw),
                ]);
            }
        }
    }
    report.write(args.out.as_deref())
}

const COMPARE_HEADER: &str = "policy,estimator,tau_a,tau_b,rr,model_lower,model_upper,\
bootstrap_lower,bootstrap_upper,ci_length_ratio,status";

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    check_level(args.level)?;
    let estimators = parse_estimators(&args.estimators)?;
    let sources = parse_sources(&args.variance)?;
    let config = bootstrap_config(&sources, args.bootstrap, args.seed)?;
    let (cohort_a, cohort_b) = read_subjects(&args.input)?;
    let taus = follow_up_times(&cohort_a, &cohort_b);

    let per_source = |source: VarianceSource| -> Result<_, CliError> {
        Ok(compare_at_tauset(
            &cohort_a,
            &cohort_b,
            &taus,
            &estimators,
            args.level,
            source,
            config.as_ref(),
        )?)
    };
    let model_rows = if sources.contains(&VarianceSource::ModelBased) {
        Some(per_source(VarianceSource::ModelBased)?)
    } else {
        None
    };
    let boot_rows = if sources.contains(&VarianceSource::Bootstrap) {
        Some(per_source(VarianceSource::Bootstrap)?)
    } else {
        None
    };
    let n_rows = model_rows
        .as_ref()
        .or(boot_rows.as_ref())
        .map(Vec::len)
        .expect("at least one source");

    let mut report = Report::new(COMPARE_HEADER);
    for i in 0..n_rows {
        let template = model_rows
            .as_ref()
            .map(|rows| &rows[i])
            .or_else(|| boot_rows.as_ref().map(|rows| &rows[i]))
            .expect("row present");
        let interval = |rows: &Option<Vec<aeprob_core::ComparisonRow>>| {
            rows.as_ref().and_then(|rows| rows[i].result.as_ref().ok().copied())
        };
        let model = interval(&model_rows);
        let boot = interval(&boot_rows);
        let rr = model.or(boot).map(|r| r.rr);
        let status = match &template.result {
            Ok(_) => "ok",
            Err(CompareError::ZeroDenominator) => "zero_denominator",
            Err(CompareError::ZeroValue) => "zero_value",
            Err(CompareError::EstimatorMismatch) => "estimator_mismatch",
            Err(CompareError::MissingVariance(_)) => "missing_variance",
        };
        let ratio = match (&model, &boot) {
            (Some(m), Some(b)) if b.ci_upper > b.ci_lower => {
                Some((m.ci_upper - m.ci_lower) / (b.ci_upper - b.ci_lower))
            }
            _ => None,
        };
        report.push_row(&[
            template.policy.label().to_string(),
            template.estimator.label().to_string(),
            format_number(template.tau_a, args.raw),
            format_number(template.tau_b, args.raw),
            format_optional(rr, args.raw),
            format_optional(model.map(|r| r.ci_lower), args.raw),
            format_optional(model.map(|r| r.ci_upper), args.raw),
            format_optional(boot.map(|r| r.ci_lower), args.raw),
            format_optional(boot.map(|r| r.ci_upper), args.raw),
            format_optional(ratio, args.raw),
            status.to_string(),
        ]);
    }
    report.write(args.out.as_deref())
}

fn resolve_scenario(spec: &str) -> Result<ScenarioSpec, CliError> {
    if let Some(scenario) = builtin_scenario(spec) {
        return Ok(scenario);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::Data(format!(
            "unknown scenario `{spec}`: not a catalog id (S1..S10) and no such file"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{spec}: {e}")))?;
    let mut scenarios = parse_catalog(&text)?;
    if scenarios.len() != 1 {
        return Err(CliError::Data(format!(
            "{spec}: custom scenario files must contain exactly one scenario, found {}",
            scenarios.len()
        )));
    }
    Ok(scenarios.remove(0))
}

pub const SIM_PROBABILITY_HEADER: &str =
    "scenario,policy,group,series,mean,excluded_mean,abs_bias_vs_aj,rel_bias_vs_aj,excluded_rel_bias";
pub const SIM_RR_HEADER: &str =
    "scenario,policy,series,mean_rr,excluded_mean,rel_bias_vs_aj,excluded_rel_bias";
pub const SIM_VARIANCE_HEADER: &str =
    "scenario,policy,group,estimator,source,whisker_low,q1,median,q3,whisker_high,runs";

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let sources = parse_sources(&args.variance)?;
    let seed = args
        .seed
        .ok_or_else(|| CliError::Usage("--seed is required for simulation studies".into()))?;
    let config = bootstrap_config(&sources, args.bootstrap, args.seed)?;
    let scenario = resolve_scenario(&args.scenario)?;
    let summary = run_study(&scenario, args.runs, config.as_ref(), seed)?;
    write_summary(&summary, &args.out, args.raw)
}

fn series_label(series: Series) -> String {
    series.label().to_string()
}

/// Emits the three study tables next to the output prefix.
pub fn write_summary(summary: &StudySummary, out: &Path, raw: bool) -> Result<(), CliError> {
    let stem = out
        .to_str()
        .map(|s| s.strip_suffix(".csv").unwrap_or(s).to_string())
        .ok_or_else(|| CliError::Usage("output path must be valid UTF-8".into()))?;

    let mut probability = Report::new(SIM_PROBABILITY_HEADER);
    for cell in &summary.probabilities {
        probability.push_row(&[
            summary.scenario.clone(),
            cell.policy.label().to_string(),
            cell.group.label().to_string(),
            series_label(cell.series),
            format_optional(cell.mean, raw),
            cell.mean_excluded.to_string(),
            format_optional(cell.abs_bias_vs_aj, raw),
            format_optional(cell.rel_bias_vs_aj, raw),
            cell.rel_bias_excluded.to_string(),
        ]);
    }
    probability.write(Some(Path::new(&format!("{stem}_probability.csv"))))?;

    let mut rr = Report::new(SIM_RR_HEADER);
    for cell in &summary.relative_risks {
        rr.push_row(&[
            summary.scenario.clone(),
            cell.policy.label().to_string(),
            series_label(cell.series),
            format_optional(cell.mean_rr, raw),
            cell.mean_excluded.to_string(),
            format_optional(cell.rel_bias_vs_aj, raw),
            cell.rel_bias_excluded.to_string(),
        ]);
    }
    rr.write(Some(Path::new(&format!("{stem}_rr.csv"))))?;

    let mut variance = Report::new(SIM_VARIANCE_HEADER);
    for cell in &summary.variance_spreads {
        variance.push_row(&[
            summary.scenario.clone(),
            cell.policy.label().to_string(),
            cell.group.label().to_string(),
            cell.estimator.label().to_string(),
            cell.source.label().to_string(),
            format_number(cell.spread.lower_whisker, raw),
            format_number(cell.spread.q1, raw),
            format_number(cell.spread.median, raw),
            format_number(cell.spread.q3, raw),
            format_number(cell.spread.upper_whisker, raw),
            cell.runs.to_string(),
        ]);
    }
    variance.write(Some(Path::new(&format!("{stem}_variance.csv"))))?;
    Ok(())
}
