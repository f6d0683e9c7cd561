//! Acceptance suite: one test per release gate, each ending in a printed
//! pass line (visible with `--nocapture`). Run with
//! `cargo test -p aeprob-cli --test acceptance`.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;

use aeprob_core::simulate::{
    builtin_scenario, generate_trial, run_study, sample_event, Series, StudySummary,
};
use aeprob_core::{
    aalen_johansen, bootstrap_variance, incidence_density, incidence_proportion, one_minus_km,
    pt_incidence_density, pt_incidence_density_ce, var_aj, var_id, var_ip, var_pt_id_ce,
    BootstrapConfig, EstimatorKind, EventKind, FollowUpPolicy, Group, Status,
};

use common::{
    decider_counts_csv, lookup, random_cohort, read_report, round4, run_aeprob, run_aeprob_env,
    seeded_rng,
};

fn assert_within(value: f64, target: f64, tol: f64, what: &str) {
    assert!(
        (value - target).abs() <= tol,
        "{what}: {value} not within {tol} of {target}"
    );
}

fn budget(elapsed: Duration, limit_s: u64, what: &str) {
    assert!(
        elapsed <= Duration::from_secs(limit_s),
        "{what} took {elapsed:?}, budget {limit_s}s"
    );
}

#[test]
fn criterion_1_decider_count_reproduction() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("decider.csv");
    std::fs::write(&input, decider_counts_csv()).unwrap();
    let input = input.to_str().unwrap();

    let est_path = dir.path().join("estimate.csv");
    let out = run_aeprob(&["estimate", "--input", input, "--out", est_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_report(&est_path);
    let get = |group: &str, est: &str, col: &str| -> f64 {
        lookup(
            &header,
            &rows,
            &[("group", group), ("policy", "tau_max_group"), ("estimator", est)],
            col,
        )
        .parse()
        .unwrap()
    };
    assert_eq!(round4(get("A", "ip", "value")), 0.3646);
    assert_eq!(round4(get("B", "ip", "value")), 0.3077);
    assert_eq!(round4(get("A", "ip", "variance_model")), 0.0024);
    assert_eq!(get("A", "ip", "tau"), 802.0);
    assert_eq!(get("B", "ip", "tau"), 980.0);

    let cmp_path = dir.path().join("compare.csv");
    let out = run_aeprob(&["compare", "--input", input, "--out", cmp_path.to_str().unwrap()]);
    assert!(out.status.success());
    let (header, rows) = read_report(&cmp_path);
    let get = |col: &str| -> f64 {
        lookup(
            &header,
            &rows,
            &[("policy", "tau_max_group"), ("estimator", "ip")],
            col,
        )
        .parse()
        .unwrap()
    };
    assert_eq!(round4(get("rr")), 1.1849);
    assert_within(get("model_lower"), 0.8015, 0.01, "model CI lower");
    assert_within(get("model_upper"), 1.7517, 0.01, "model CI upper");

    budget(start.elapsed(), 1, "criterion 1");
    println!("[criterion 1] count-pinned trial reproduction: PASS");
}

#[test]
fn criterion_2_hand_oracle_suite() {
    let start = Instant::now();
    let records = vec![
        aeprob_core::SubjectRecord::new("1", Group::A, 1.0, Status::AdverseEvent),
        aeprob_core::SubjectRecord::new("2", Group::A, 2.0, Status::CompetingEvent),
        aeprob_core::SubjectRecord::new("3", Group::A, 3.0, Status::Censored),
        aeprob_core::SubjectRecord::new("4", Group::A, 4.0, Status::AdverseEvent),
    ];
    let cohort = aeprob_core::validate_cohort(records, Group::A).unwrap();
    let tau = 4.0;
    assert_within(aalen_johansen(&cohort, tau).value, 0.75, 1e-6, "AJ");
    assert_within(one_minus_km(&cohort, tau).value, 1.0, 1e-6, "1-KM");
    assert_within(incidence_proportion(&cohort, tau).value, 0.5, 1e-6, "IP");
    assert_within(
        incidence_density(&cohort, tau, EventKind::Ae).unwrap(),
        0.2,
        1e-6,
        "ID",
    );
    assert_within(
        pt_incidence_density(&cohort, tau).unwrap().value,
        1.0 - (-0.8f64).exp(),
        1e-6,
        "PT-ID",
    );
    assert_within(
        pt_incidence_density_ce(&cohort, tau).unwrap().value,
        2.0 / 3.0 * (1.0 - (-1.2f64).exp()),
        1e-6,
        "PT-ID-CE",
    );
    budget(start.elapsed(), 1, "criterion 2");
    println!("[criterion 2] hand-oracle estimator suite: PASS");
}

#[test]
fn criterion_3_km_dominates_aj_over_100k_cohorts() {
    let start = Instant::now();
    let mut rng = seeded_rng(314159);
    for _ in 0..100_000 {
        let n = rng.random_range(1..=50usize);
        let cohort = random_cohort(&mut rng, Group::A, n, (1, 2, 2));
        for _ in 0..5 {
            let tau = rng.random_range(0.2..25.0f64);
            let km = one_minus_km(&cohort, tau).value;
            let aj = aalen_johansen(&cohort, tau).value;
            assert!(km >= aj, "violation: km={km:?} aj={aj:?}");
            let ce_before = cohort.rows().iter().any(|r| r.time <= tau && r.ce > 0);
            if !ce_before {
                assert!(
                    km == aj,
                    "equality violation without CEs before tau: km={km:?} aj={aj:?}"
                );
            }
        }
    }
    budget(start.elapsed(), 30, "criterion 3");
    println!("[criterion 3] 1-KM >= AJ over 100k cohorts, equality without CEs: PASS");
}

#[test]
fn criterion_4_no_censoring_identity_over_10k_cohorts() {
    let mut rng = seeded_rng(271828);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=100usize);
        let cohort = random_cohort(&mut rng, Group::A, n, (0, 1, 1));
        let tau = cohort.max_time();
        let ip = incidence_proportion(&cohort, tau).value;
        let aj = aalen_johansen(&cohort, tau).value;
        assert!(ip == aj, "IP {ip:?} != AJ {aj:?} on a censoring-free cohort");
    }
    println!("[criterion 4] IP == AJ exactly on 10k censoring-free cohorts: PASS");
}

fn probability_cell<'a>(
    summary: &'a StudySummary,
    policy: FollowUpPolicy,
    group: Group,
    series: Series,
) -> &'a aeprob_core::simulate::ProbabilityCell {
    summary
        .probabilities
        .iter()
        .find(|c| c.policy == policy && c.group == group && c.series == series)
        .unwrap()
}

fn rr_cell<'a>(
    summary: &'a StudySummary,
    policy: FollowUpPolicy,
    series: Series,
) -> &'a aeprob_core::simulate::RelativeRiskCell {
    summary
        .relative_risks
        .iter()
        .find(|c| c.policy == policy && c.series == series)
        .unwrap()
}

#[test]
fn criterion_5_s2_probability_bias_table() {
    let start = Instant::now();
    let scenario = builtin_scenario("S2").unwrap();
    let summary = run_study(&scenario, 1000, None, 20250812).unwrap();

    let ip = Series::Estimator(EstimatorKind::IncidenceProportion);
    let ptid = Series::Estimator(EstimatorKind::PtIncidenceDensity);
    let ptidce = Series::Estimator(EstimatorKind::PtIncidenceDensityCe);
    let aj = Series::Estimator(EstimatorKind::AalenJohansen);

    for policy in FollowUpPolicy::ALL {
        for group in [Group::A, Group::B] {
            let cell = probability_cell(&summary, policy, group, ip);
            assert_eq!(
                cell.rel_bias_vs_aj,
                Some(0.0),
                "IP relative bias must vanish identically at {policy}/{group}"
            );
            let ce_bias = probability_cell(&summary, policy, group, ptidce)
                .rel_bias_vs_aj
                .unwrap();
            assert_within(ce_bias, 0.0, 0.01, &format!("PT-ID-CE bias {policy}/{group}"));
            let aj_mean = probability_cell(&summary, policy, group, aj).mean.unwrap();
            let true_mean = probability_cell(&summary, policy, group, Series::True)
                .mean
                .unwrap();
            assert_within(aj_mean, true_mean, 0.01, &format!("AJ vs true {policy}/{group}"));
        }
    }

    let ptid_bias = probability_cell(&summary, FollowUpPolicy::GroupMax, Group::A, ptid)
        .rel_bias_vs_aj
        .unwrap();
    assert_within(ptid_bias, 1.3654, 0.10, "PT-ID relative bias, group A at tau_max_group");

    let aj_mean = probability_cell(&summary, FollowUpPolicy::GroupMax, Group::A, aj)
        .mean
        .unwrap();
    let true_mean = probability_cell(&summary, FollowUpPolicy::GroupMax, Group::A, Series::True)
        .mean
        .unwrap();
    assert_within(aj_mean, 0.3857, 0.01, "mean AJ, group A at tau_max_group");
    assert_within(true_mean, 0.3837, 0.01, "mean true value, group A at tau_max_group");

    budget(start.elapsed(), 120, "criterion 5");
    println!("[criterion 5] S2 probability bias table (N=1000): PASS");
}

#[test]
fn criterion_6_s5_relative_risk_bias_table() {
    let start = Instant::now();
    let scenario = builtin_scenario("S5").unwrap();
    let summary = run_study(&scenario, 1000, None, 20250812).unwrap();

    let ptidce_bias = rr_cell(
        &summary,
        FollowUpPolicy::GroupMax,
        Series::Estimator(EstimatorKind::PtIncidenceDensityCe),
    )
    .rel_bias_vs_aj
    .unwrap();
    assert!(ptidce_bias < 0.0, "PT-ID-CE RR bias should be negative, got {ptidce_bias}");
    assert_within(ptidce_bias, -0.1258, 0.08, "PT-ID-CE RR bias at tau_max_group");
    println!("[criterion 6] S5 RR(PT-ID-CE) bias {ptidce_bias:.4}: in band");

    let km_bias = rr_cell(
        &summary,
        FollowUpPolicy::GroupMax,
        Series::Estimator(EstimatorKind::OneMinusKaplanMeier),
    )
    .rel_bias_vs_aj
    .unwrap();
    budget(start.elapsed(), 180, "criterion 6");
    assert!(
        km_bias > 2.0,
        "RR(1-KM) relative bias at tau_max_group must exceed 2.0, measured {km_bias:.4} \
         (uniform censoring calibrated to the published 14%/10% fractions caps the \
         realized group-A maximum follow-up near 2.8, where the AJ estimate is ~0.29 \
         rather than the published ~0.13, so the attainable ratio tops out near 1.9)"
    );
    println!("[criterion 6] S5 RR bias table (N=1000): PASS");
}

#[test]
fn criterion_7_variance_cross_validation() {
    let start = Instant::now();
    // (a) Greenwood-type AJ variance against a 10^4-replicate bootstrap on
    // S2 trials.
    let s2 = builtin_scenario("S2").unwrap();
    for seed in 0..5u64 {
        let (a, b) = generate_trial(&s2, 9000 + seed).unwrap();
        for cohort in [&a, &b] {
            let tau = cohort.max_time();
            let config = BootstrapConfig::new(10_000, 77 + seed).unwrap();
            let boot =
                bootstrap_variance(cohort, tau, EstimatorKind::AalenJohansen, &config).unwrap();
            let model = var_aj(cohort, tau);
            let rel = (model - boot).abs() / boot;
            assert!(
                rel <= 0.15,
                "AJ variance mismatch: model {model}, bootstrap {boot}, rel {rel}"
            );
        }
    }
    println!("[criterion 7a] AJ variance within 15% of a 10^4-replicate bootstrap: PASS");

    // (b) PT-ID-CE delta-method variance against a central finite-difference
    // oracle on random cohorts with both event types.
    let mut rng = seeded_rng(5150);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(10..=60usize);
        let cohort = random_cohort(&mut rng, Group::A, n, (1, 2, 2));
        let tau = cohort.max_time() * 0.9;
        let id_ae = incidence_density(&cohort, tau, EventKind::Ae).unwrap();
        let id_ce = incidence_density(&cohort, tau, EventKind::Ce).unwrap();
        if id_ae == 0.0 || id_ce == 0.0 {
            continue;
        }
        let v_ae = var_id(&cohort, tau, EventKind::Ae).unwrap();
        let v_ce = var_id(&cohort, tau, EventKind::Ce).unwrap();
        let phi = |x: f64, y: f64| x / (x + y) * (1.0 - (-tau * (x + y)).exp());
        let h_ae = 1e-6 * id_ae;
        let h_ce = 1e-6 * id_ce;
        let g_ae = (phi(id_ae + h_ae, id_ce) - phi(id_ae - h_ae, id_ce)) / (2.0 * h_ae);
        let g_ce = (phi(id_ae, id_ce + h_ce) - phi(id_ae, id_ce - h_ce)) / (2.0 * h_ce);
        let oracle = g_ae * g_ae * v_ae + g_ce * g_ce * v_ce;
        let model = var_pt_id_ce(&cohort, tau).unwrap();
        let rel = (model - oracle).abs() / oracle;
        assert!(rel < 1e-4, "delta-method mismatch: {model} vs oracle {oracle}");
        checked += 1;
    }

    // (c) Model misspecification: under S5 group A the bootstrap PT-ID
    // variance dominates the model-based one.
    let s5 = builtin_scenario("S5").unwrap();
    let mut model_vars = Vec::new();
    let mut boot_vars = Vec::new();
    for seed in 0..100u64 {
        let (a, _) = generate_trial(&s5, 40_000 + seed).unwrap();
        let tau = a.max_time();
        model_vars.push(aeprob_core::var_pt_id(&a, tau).unwrap());
        let config = BootstrapConfig::new(500, seed).unwrap();
        boot_vars.push(
            bootstrap_variance(&a, tau, EstimatorKind::PtIncidenceDensity, &config).unwrap(),
        );
    }
    let median = |xs: &mut Vec<f64>| {
        xs.sort_unstable_by(|a, b| a.total_cmp(b));
        xs[xs.len() / 2]
    };
    let model_median = median(&mut model_vars);
    let boot_median = median(&mut boot_vars);
    assert!(
        boot_median > model_median,
        "bootstrap median {boot_median} should exceed model median {model_median}"
    );

    budget(start.elapsed(), 180, "criterion 7");
    println!("[criterion 7] variance cross-validation: PASS");
}

#[test]
fn criterion_8_sampler_correctness() {
    // (a) Constant-hazard event times against the exponential CDF.
    let s2 = builtin_scenario("S2").unwrap();
    let mut rng = seeded_rng(161803);
    let n = 10_000usize;
    let rate = 0.00265 + 0.00424;
    let mut times = Vec::with_capacity(n);
    let mut ae_count = 0u32;
    for _ in 0..n {
        let (t, status) = sample_event(&s2, Group::A, &mut rng).unwrap();
        times.push(t);
        if status == Status::AdverseEvent {
            ae_count += 1;
        }
    }
    times.sort_unstable_by(|a, b| a.total_cmp(b));
    let mut ks = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        let cdf = 1.0 - (-rate * t).exp();
        let hi = (i + 1) as f64 / n as f64 - cdf;
        let lo = cdf - i as f64 / n as f64;
        ks = ks.max(hi.abs()).max(lo.abs());
    }
    assert!(ks < 0.02, "KS statistic {ks} vs exponential CDF");

    // (b) Event-type split against the hazard share.
    let ae_fraction = f64::from(ae_count) / n as f64;
    assert_within(ae_fraction, 0.00265 / rate, 0.01, "AE fraction");

    // (c) Calibrated censoring hits the catalog targets.
    for id in ["S3", "S5", "S6", "S10"] {
        let mut scenario = builtin_scenario(id).unwrap();
        scenario.n_per_group = 10_000;
        let (a, b) = generate_trial(&scenario, 55_000).unwrap();
        for (cohort, spec) in [(&a, scenario.censoring_a), (&b, scenario.censoring_b)] {
            let target = spec.unwrap().target;
            let censored = cohort
                .records()
                .iter()
                .filter(|r| r.status == Status::Censored)
                .count() as f64
                / 10_000.0;
            assert_within(censored, target, 0.02, &format!("{id} censored fraction"));
            if id == "S10" {
                assert_within(censored, target, 0.005, "S10 censored fraction (tight)");
            }
        }
    }
    println!("[criterion 8] sampler correctness (KS, type split, censoring): PASS");
}

#[test]
fn criterion_9_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, env: &[(&str, &str)]| -> Vec<Vec<u8>> {
        let prefix = dir.path().join(name);
        let out = run_aeprob_env(
            &[
                "simulate",
                "--scenario",
                "S2",
                "--runs",
                "40",
                "--seed",
                "7",
                "--out",
                prefix.to_str().unwrap(),
            ],
            env,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        ["probability", "rr", "variance"]
            .iter()
            .map(|table| {
                std::fs::read(dir.path().join(format!("{name}_{table}.csv"))).unwrap()
            })
            .collect()
    };

    let first = run("a", &[]);
    let second = run("b", &[]);
    assert_eq!(first, second, "same seed must reproduce identical reports");

    let single = run("t1", &[("RAYON_NUM_THREADS", "1")]);
    let multi = run("t4", &[("RAYON_NUM_THREADS", "4")]);
    assert_eq!(single, multi, "thread count must not change reports");
    println!("[criterion 9] byte-identical reports across runs and thread counts: PASS");
}
