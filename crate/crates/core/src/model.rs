//! Domain types, input validation and follow-up-time (τ) policies.
//!
//! Observed data are subject records `(time, status)` per treatment group,
//! where `time` is the first-event or censoring time and `status` records
//! what happened at that time. A validated [`Cohort`] aggregates tied times
//! into unique rows with per-time AE/CE/censoring counts and the at-risk set,
//! which is all the estimators need.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Treatment arm label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Group {
    A,
    B,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// What was observed at a subject's recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    /// Observation ended without an event (code 0).
    Censored,
    /// The adverse event of interest (code 1).
    AdverseEvent,
    /// A competing event precluding the AE (code 2).
    CompetingEvent,
}

impl Status {
    pub fn from_code(code: u8) -> Option<Status> {
        match code {
            0 => Some(Status::Censored),
            1 => Some(Status::AdverseEvent),
            2 => Some(Status::CompetingEvent),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Status::Censored => 0,
            Status::AdverseEvent => 1,
            Status::CompetingEvent => 2,
        }
    }
}

/// One subject's observed data.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub id: String,
    pub group: Group,
    /// Positive, finite time of the first event or of censoring.
    pub time: f64,
    pub status: Status,
}

impl SubjectRecord {
    pub fn new(id: impl Into<String>, group: Group, time: f64, status: Status) -> Self {
        SubjectRecord { id: id.into(), group, time, status }
    }

    /// Builds a record from a raw status code, rejecting codes outside
    /// {0, 1, 2} and non-positive or non-finite times.
    pub fn from_coded(
        id: impl Into<String>,
        group: Group,
        time: f64,
        code: u8,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        let status = Status::from_code(code).ok_or_else(|| ModelError::UnknownStatus {
            id: id.clone(),
            code,
        })?;
        if !(time.is_finite() && time > 0.0) {
            return Err(ModelError::NonPositiveTime { id });
        }
        Ok(SubjectRecord { id, group, time, status })
    }
}

/// Aggregated counts at one unique observed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRow {
    pub time: f64,
    /// Observed AEs at this time, d(u).
    pub ae: u32,
    /// Observed CEs at this time, d̄(u).
    pub ce: u32,
    /// Censorings at this time, c(u).
    pub censored: u32,
    /// Subjects with observed time ≥ u, regardless of status.
    pub at_risk: u32,
}

/// A validated single-group collection of records, sorted by time, with
/// per-unique-time event counts and risk sets precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    group: Group,
    records: Vec<SubjectRecord>,
    rows: Vec<TimeRow>,
}

impl Cohort {
    pub fn group(&self) -> Group {
        self.group
    }

    pub fn n(&self) -> u32 {
        self.records.len() as u32
    }

    /// Records sorted ascending by time (ties keep input order).
    pub fn records(&self) -> &[SubjectRecord] {
        &self.records
    }

    /// Unique observed times with aggregated counts, ascending.
    pub fn rows(&self) -> &[TimeRow] {
        &self.rows
    }

    /// Largest observed time. Cohorts are never empty.
    pub fn max_time(&self) -> f64 {
        self.records.last().map(|r| r.time).unwrap_or(0.0)
    }

    /// Σ_i min(t_i, τ): population time at risk restricted by τ, counting
    /// censored subjects' observed time as well.
    pub fn person_time(&self, tau: f64) -> f64 {
        let mut total = 0.0;
        for r in &self.records {
            total += if r.time < tau { r.time } else { tau };
        }
        total
    }

    /// Number of events of the given kind observed at times ≤ τ.
    pub fn event_count(&self, event: crate::estimators::EventKind, tau: f64) -> u32 {
        let mut count = 0;
        for row in &self.rows {
            if row.time > tau {
                break;
            }
            count += match event {
                crate::estimators::EventKind::Ae => row.ae,
                crate::estimators::EventKind::Ce => row.ce,
            };
        }
        count
    }

    /// Resamples `n` subjects with replacement. The result is a valid cohort
    /// of the same group.
    pub fn resample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Cohort {
        let n = self.records.len();
        let mut picked: Vec<SubjectRecord> = Vec::with_capacity(n);
        for _ in 0..n {
            picked.push(self.records[rng.random_range(0..n)].clone());
        }
        validate_cohort(picked, self.group).expect("resample of a valid cohort is valid")
    }
}

/// Validation and input errors for the domain types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// A cohort must contain at least one record.
    EmptyCohort { group: Group },
    /// Times must be finite and strictly positive.
    NonPositiveTime { id: String },
    /// Status codes must be 0 (censored), 1 (AE) or 2 (CE).
    UnknownStatus { id: String, code: u8 },
    /// A record's group label differs from the cohort being built.
    GroupMismatch { id: String },
    /// Quantiles of an empty sequence are undefined.
    EmptyInput,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyCohort { group } => write!(f, "group {group} has no records"),
            ModelError::NonPositiveTime { id } => {
                write!(f, "subject {id}: time must be finite and > 0")
            }
            ModelError::UnknownStatus { id, code } => {
                write!(f, "subject {id}: unknown status code {code} (expected 0, 1 or 2)")
            }
            ModelError::GroupMismatch { id } => {
                write!(f, "subject {id}: group label differs from the cohort group")
            }
            ModelError::EmptyInput => f.write_str("empty input"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Validates records into a [`Cohort`]: checks times and group labels, sorts
/// ascending by time and aggregates ties into unique [`TimeRow`]s.
pub fn validate_cohort(
    records: impl IntoIterator<Item = SubjectRecord>,
    group: Group,
) -> Result<Cohort, ModelError> {
    let mut records: Vec<SubjectRecord> = records.into_iter().collect();
    if records.is_empty() {
        return Err(ModelError::EmptyCohort { group });
    }
    for r in &records {
        if !(r.time.is_finite() && r.time > 0.0) {
            return Err(ModelError::NonPositiveTime { id: r.id.clone() });
        }
        if r.group != group {
            return Err(ModelError::GroupMismatch { id: r.id.clone() });
        }
    }
    // Stable sort keeps tie order, so re-validating a cohort's records
    // reproduces it exactly.
    records.sort_by(|a, b| a.time.total_cmp(&b.time));

    let n = records.len() as u32;
    let mut rows: Vec<TimeRow> = Vec::new();
    let mut seen: u32 = 0;
    let mut i = 0;
    while i < records.len() {
        let time = records[i].time;
        let mut ae = 0;
        let mut ce = 0;
        let mut censored = 0;
        let mut j = i;
        while j < records.len() && records[j].time == time {
            match records[j].status {
                Status::AdverseEvent => ae += 1,
                Status::CompetingEvent => ce += 1,
                Status::Censored => censored += 1,
            }
            j += 1;
        }
        rows.push(TimeRow { time, ae, ce, censored, at_risk: n - seen });
        seen += (j - i) as u32;
        i = j;
    }

    Ok(Cohort { group, records, rows })
}

/// The ⌈p·n⌉-th order statistic of a sorted sequence (lower empirical
/// quantile), so the result is always an observed time.
pub fn empirical_quantile(times: &[f64], p: f64) -> Result<f64, ModelError> {
    if times.is_empty() {
        return Err(ModelError::EmptyInput);
    }
    assert!(p > 0.0 && p <= 1.0, "quantile level must lie in (0, 1]");
    debug_assert!(times.windows(2).all(|w| w[0] <= w[1]), "input must be sorted");
    let x = p * times.len() as f64;
    let mut k = x as usize;
    // Integer ceil with a guard against float noise like 0.9 * 10 = 9.000…2.
    if x - k as f64 > 1e-9 {
        k += 1;
    }
    k = k.clamp(1, times.len());
    Ok(times[k - 1])
}

/// The five analysis times of a two-group dataset.
///
/// `tau_max_a` / `tau_max_b` are the within-group maximum follow-up times;
/// `tau_max` is their minimum; `tau_p90` / `tau_p60` are the minima across
/// groups of the per-group empirical 90% / 60% quantiles of the observed
/// times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauSet {
    pub tau_max_a: f64,
    pub tau_max_b: f64,
    pub tau_max: f64,
    pub tau_p90: f64,
    pub tau_p60: f64,
}

impl TauSet {
    /// Evaluation times `(τ_A, τ_B)` under a follow-up policy. Only the
    /// group-specific-maximum policy uses different times per group.
    pub fn at(&self, policy: FollowUpPolicy) -> (f64, f64) {
        match policy {
            FollowUpPolicy::GroupMax => (self.tau_max_a, self.tau_max_b),
            FollowUpPolicy::CommonMax => (self.tau_max, self.tau_max),
            FollowUpPolicy::P90 => (self.tau_p90, self.tau_p90),
            FollowUpPolicy::P60 => (self.tau_p60, self.tau_p60),
        }
    }
}

/// Which follow-up time a comparison is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FollowUpPolicy {
    /// τ_max^(A) in group A, τ_max^(B) in group B.
    GroupMax,
    /// τ_max = min(τ_max^(A), τ_max^(B)) in both groups.
    CommonMax,
    /// τ_P90 in both groups.
    P90,
    /// τ_P60 in both groups.
    P60,
}

impl FollowUpPolicy {
    pub const ALL: [FollowUpPolicy; 4] = [
        FollowUpPolicy::GroupMax,
        FollowUpPolicy::CommonMax,
        FollowUpPolicy::P90,
        FollowUpPolicy::P60,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FollowUpPolicy::GroupMax => "tau_max_group",
            FollowUpPolicy::CommonMax => "tau_max",
            FollowUpPolicy::P90 => "tau_p90",
            FollowUpPolicy::P60 => "tau_p60",
        }
    }
}

impl fmt::Display for FollowUpPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Computes the five analysis times for a two-group dataset.
pub fn follow_up_times(cohort_a: &Cohort, cohort_b: &Cohort) -> TauSet {
    let times_a: Vec<f64> = cohort_a.records().iter().map(|r| r.time).collect();
    let times_b: Vec<f64> = cohort_b.records().iter().map(|r| r.time).collect();
    let tau_max_a = cohort_a.max_time();
    let tau_max_b = cohort_b.max_time();
    let q = |times: &[f64], p: f64| empirical_quantile(times, p).expect("cohort is nonempty");
    TauSet {
        tau_max_a,
        tau_max_b,
        tau_max: tau_max_a.min(tau_max_b),
        tau_p90: q(&times_a, 0.9).min(q(&times_b, 0.9)),
        tau_p60: q(&times_a, 0.6).min(q(&times_b, 0.6)),
    }
}
