//! Two-group comparison: relative risk and its log-transform confidence
//! interval, including the group-specific-τ variant.

use alloc::vec::Vec;
use core::fmt;

use crate::estimators::{evaluate, Estimate, EstimatorKind};
use crate::math;
use crate::model::{Cohort, FollowUpPolicy, TauSet};
use crate::variance::{bootstrap_variance, model_variance, BootstrapConfig, VarianceError};

/// Which variance estimate feeds a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarianceSource {
    ModelBased,
    Bootstrap,
}

impl VarianceSource {
    pub fn label(self) -> &'static str {
        match self {
            VarianceSource::ModelBased => "model",
            VarianceSource::Bootstrap => "bootstrap",
        }
    }
}

impl fmt::Display for VarianceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A relative risk with its log-transformed confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeRisk {
    pub estimator: EstimatorKind,
    pub tau_a: f64,
    pub tau_b: f64,
    pub rr: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub variance_source: VarianceSource,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareError {
    /// The group-B estimate is zero; the ratio is undefined.
    ZeroDenominator,
    /// The group-A estimate is zero; the log interval is undefined.
    ZeroValue,
    /// The two estimates come from different estimators.
    EstimatorMismatch,
    /// The requested variance is missing on one of the estimates.
    MissingVariance(VarianceSource),
}

impl fmt::Display for CompareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareError::ZeroDenominator => f.write_str("denominator estimate is zero"),
            CompareError::ZeroValue => f.write_str("numerator estimate is zero"),
            CompareError::EstimatorMismatch => {
                f.write_str("estimates come from different estimators")
            }
            CompareError::MissingVariance(source) => {
                write!(f, "{source} variance missing on an estimate")
            }
        }
    }
}

impl core::error::Error for CompareError {}

/// Point relative risk est_a.value / est_b.value.
pub fn relative_risk(est_a: &Estimate, est_b: &Estimate) -> Result<f64, CompareError> {
    if est_a.estimator != est_b.estimator {
        return Err(CompareError::EstimatorMismatch);
    }
    if est_b.value <= 0.0 {
        return Err(CompareError::ZeroDenominator);
    }
    Ok(est_a.value / est_b.value)
}

/// Relative risk with the log-transform interval:
/// var(log RR) = s_A²/p_A² + s_B²/p_B², CI = exp(log RR ± z·√var).
pub fn log_rr_interval(
    est_a: &Estimate,
    est_b: &Estimate,
    level: f64,
    variance_source: VarianceSource,
) -> Result<RelativeRisk, CompareError> {
    assert!(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
    let rr = relative_risk(est_a, est_b)?;
    if est_a.value <= 0.0 {
        return Err(CompareError::ZeroValue);
    }
    let pick = |e: &Estimate| match variance_source {
        VarianceSource::ModelBased => e.variance_model,
        VarianceSource::Bootstrap => e.variance_bootstrap,
    };
    let s2_a = pick(est_a).ok_or(CompareError::MissingVariance(variance_source))?;
    let s2_b = pick(est_b).ok_or(CompareError::MissingVariance(variance_source))?;
    let var_log = s2_a / (est_a.value * est_a.value) + s2_b / (est_b.value * est_b.value);
    let z = normal_quantile((1.0 + level) / 2.0);
    let half = z * math::sqrt(var_log);
    let log_rr = math::ln(rr);
    Ok(RelativeRisk {
        estimator: est_a.estimator,
        tau_a: est_a.tau,
        tau_b: est_b.tau,
        rr,
        ci_lower: math::exp(log_rr - half),
        ci_upper: math::exp(log_rr + half),
        variance_source,
        level,
    })
}

/// One comparison cell: a follow-up policy and estimator, with the relative
/// risk or the reason it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: FollowUpPolicy,
    pub estimator: EstimatorKind,
    pub tau_a: f64,
    pub tau_b: f64,
    pub result: Result<RelativeRisk, CompareError>,
}

/// Relative risks for every (follow-up policy, estimator) pair.
///
/// Under the group-specific-maximum policy group A is evaluated at τ_max^(A)
/// and group B at τ_max^(B); the other policies use one common τ. Rows with
/// an undefined ratio carry the error instead of aborting the table.
pub fn compare_at_tauset(
    cohort_a: &Cohort,
    cohort_b: &Cohort,
    taus: &TauSet,
    estimators: &[EstimatorKind],
    level: f64,
    variance_source: VarianceSource,
    bootstrap: Option<&BootstrapConfig>,
) -> Result<Vec<ComparisonRow>, VarianceError> {
    let mut rows = Vec::with_capacity(4 * estimators.len());
    for policy in FollowUpPolicy::ALL {
        let (tau_a, tau_b) = taus.at(policy);
        for &estimator in estimators {
            let mut est_a = evaluate(cohort_a, tau_a, estimator)?;
            let mut est_b = evaluate(cohort_b, tau_b, estimator)?;
            match variance_source {
                VarianceSource::ModelBased => {
                    est_a.variance_model = Some(model_variance(cohort_a, tau_a, estimator)?);
                    est_b.variance_model = Some(model_variance(cohort_b, tau_b, estimator)?);
                }
                VarianceSource::Bootstrap => {
                    let config = bootstrap.ok_or(VarianceError::MissingBootstrapConfig)?;
                    est_a.variance_bootstrap =
                        Some(bootstrap_variance(cohort_a, tau_a, estimator, config)?);
                    est_b.variance_bootstrap =
                        Some(bootstrap_variance(cohort_b, tau_b, estimator, config)?);
                }
            }
            rows.push(ComparisonRow {
                policy,
                estimator,
                tau_a,
                tau_b,
                result: log_rr_interval(&est_a, &est_b, level, variance_source),
            });
        }
    }
    Ok(rows)
}

/// Standard normal quantile by Wichura's AS 241 (PPND16) rational
/// approximation; absolute error below 1e-15 on (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0, 1)");
    let q = p - 0.5;
    if math::abs(q) <= 0.425 {
        let r = 0.180625 - q * q;
        return q * rational(r, &INNER_NUM, &INNER_DEN);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = math::sqrt(-math::ln(r));
    let value = if r <= 5.0 {
        rational(r - 1.6, &MID_NUM, &MID_DEN)
    } else {
        rational(r - 5.0, &TAIL_NUM, &TAIL_DEN)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

fn rational(x: f64, num: &[f64; 8], den: &[f64; 8]) -> f64 {
    let horner = |c: &[f64; 8]| {
        let mut acc = c[7];
        for k in (0..7).rev() {
            acc = acc * x + c[k];
        }
        acc
    };
    horner(num) / horner(den)
}

const INNER_NUM: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const INNER_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const MID_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const MID_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const TAIL_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const TAIL_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-6,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];
