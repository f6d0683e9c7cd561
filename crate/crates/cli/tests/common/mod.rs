//! Shared fixtures and helpers for the CLI integration and acceptance tests.
// Each test target compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use std::path::Path;
use std::process::Output;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aeprob_core::{validate_cohort, Cohort, Group, Status, SubjectRecord};

/// Synthetic dataset with the published trial counts: group A n=96 with
/// 35 AEs, 56 CEs, 5 censored and maximum follow-up 802; group B n=104 with
/// 32 AEs, 69 CEs, 3 censored, maximum follow-up 980 with the last
/// observation censored. Times are synthetic; only counts and maxima matter.
pub fn decider_counts_csv() -> String {
    let mut out = String::from("id,group,time,status\n");
    let mut push = |id: String, group: &str, time: f64, status: u8| {
        out.push_str(&format!("{id},{group},{time},{status}\n"));
    };
    // Group A: 35 AEs at 2,4,...,70.
    for i in 0..35 {
        push(format!("a-ae-{i}"), "A", 2.0 * (i + 1) as f64, 1);
    }
    // 55 CEs at 71..125 and one final CE at 802.
    for i in 0..55 {
        push(format!("a-ce-{i}"), "A", 71.0 + i as f64, 2);
    }
    push("a-ce-last".into(), "A", 802.0, 2);
    // 5 censored.
    for i in 0..5 {
        push(format!("a-cens-{i}"), "A", 130.0 + 10.0 * i as f64, 0);
    }
    // Group B: 32 AEs at 3,6,...,96.
    for i in 0..32 {
        push(format!("b-ae-{i}"), "B", 3.0 * (i + 1) as f64, 1);
    }
    // 69 CEs at 100..168.
    for i in 0..69 {
        push(format!("b-ce-{i}"), "B", 100.0 + i as f64, 2);
    }
    // 3 censored, the last observation of the group among them.
    push("b-cens-0".into(), "B", 200.0, 0);
    push("b-cens-1".into(), "B", 300.0, 0);
    push("b-cens-last".into(), "B", 980.0, 0);
    out
}

/// Random cohort on a coarse time grid (ties likely) with weighted statuses
/// (censored, AE, CE).
pub fn random_cohort(
    rng: &mut ChaCha8Rng,
    group: Group,
    n: usize,
    weights: (u32, u32, u32),
) -> Cohort {
    let (wc, wa, we) = weights;
    let total = wc + wa + we;
    let records: Vec<SubjectRecord> = (0..n)
        .map(|i| {
            let time = f64::from(rng.random_range(1..=40u32)) / 2.0;
            let pick = rng.random_range(0..total);
            let status = if pick < wc {
                Status::Censored
            } else if pick < wc + wa {
                Status::AdverseEvent
            } else {
                Status::CompetingEvent
            };
            SubjectRecord::new(format!("{group}{i}"), group, time, status)
        })
        .collect();
    validate_cohort(records, group).unwrap()
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs the installed binary with the given arguments.
pub fn run_aeprob(args: &[&str]) -> Output {
    run_aeprob_env(args, &[])
}

pub fn run_aeprob_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_aeprob"));
    cmd.args(args);
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

/// Parses a delimited report into (header, rows).
pub fn read_report(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    parse_report(&text)
}

pub fn parse_report(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|line| line.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

/// Returns the `column` value of the first row matching all (column, value)
/// filters.
pub fn lookup<'a>(
    header: &[String],
    rows: &'a [Vec<String>],
    filters: &[(&str, &str)],
    column: &str,
) -> &'a str {
    let idx = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {header:?}"))
    };
    let target = idx(column);
    let filter_idx: Vec<(usize, &str)> =
        filters.iter().map(|(name, value)| (idx(name), *value)).collect();
    rows.iter()
        .find(|row| filter_idx.iter().all(|(i, value)| row[*i] == *value))
        .map(|row| row[target].as_str())
        .unwrap_or_else(|| panic!("no row matching {filters:?}"))
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}
