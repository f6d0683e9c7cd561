//! Shared fixtures and generators for unit tests.

use alloc::format;
use alloc::vec::Vec;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{validate_cohort, Cohort, Group, Status, SubjectRecord};

/// The 4-subject dataset {1:AE, 2:CE, 3:Censored, 4:AE} behind most of the
/// hand-computed oracles.
pub(crate) fn hand_cohort() -> Cohort {
    let records = alloc::vec![
        SubjectRecord::new("1", Group::A, 1.0, Status::AdverseEvent),
        SubjectRecord::new("2", Group::A, 2.0, Status::CompetingEvent),
        SubjectRecord::new("3", Group::A, 3.0, Status::Censored),
        SubjectRecord::new("4", Group::A, 4.0, Status::AdverseEvent),
    ];
    validate_cohort(records, Group::A).unwrap()
}

/// A random cohort with `n` subjects, times on a small grid (so ties occur)
/// and the given status mix weights (censored, AE, CE).
pub(crate) fn random_cohort(
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

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
