// probe: CI width ratios when both groups have decreasing AE hazards
use aeprob_core::simulate::{generate_trial, CensoringSpec, HazardSpec, ScenarioSpec};
use aeprob_core::{
    compare_at_tauset, follow_up_times, BootstrapConfig, EstimatorKind, VarianceSource,
};

fn main() {
    let mut scenario = ScenarioSpec {
        id: "decr".into(),
        hazard_ae_a: HazardSpec::Reciprocal { scale: 1.8, shift: 0.5 },
        hazard_ce_a: HazardSpec::Linear(8.0 / 9.0),
        hazard_ae_b: HazardSpec::Reciprocal { scale: 1.44, shift: 0.5 },
        hazard_ce_b: HazardSpec::Linear(8.0 / 9.0),
        n_per_group: 400,
        censoring_a: Some(CensoringSpec { target: 0.14, bound: None }),
        censoring_b: Some(CensoringSpec { target: 0.10, bound: None }),
    };
    scenario.calibrate().unwrap();
    let mut ratios = vec![vec![]; 4];
    for seed in 0..40u64 {
        let (a, b) = generate_trial(&scenario, 70_000 + seed).unwrap();
        let taus = follow_up_times(&a, &b);
        let config = BootstrapConfig::new(400, seed).unwrap();
        let kinds = [EstimatorKind::PtIncidenceDensity];
        let model = compare_at_tauset(&a, &b, &taus, &kinds, 0.95, VarianceSource::ModelBased, None).unwrap();
        let boot = compare_at_tauset(&a, &b, &taus, &kinds, 0.95, VarianceSource::Bootstrap, Some(&config)).unwrap();
        for (i, (m, bt)) in model.iter().zip(&boot).enumerate() {
            if let (Ok(m), Ok(bt)) = (&m.result, &bt.result) {
                ratios[i].push((bt.ci_upper - bt.ci_lower) / (m.ci_upper - m.ci_lower));
            }
        }
    }
    for (i, policy) in aeprob_core::FollowUpPolicy::ALL.into_iter().enumerate() {
        ratios[i].sort_unstable_by(|a, b| a.total_cmp(b));
        println!(
            "{policy}: median boot/model CI width = {:.3} (n={})",
            ratios[i][ratios[i].len() / 2],
            ratios[i].len()
        );
    }
}
