//! Event-time sampling by inverting the all-cause cumulative hazard,
//! censoring calibration, trial generation and true CIF values.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::{HazardSpec, ScenarioSpec, SimulateError};
use crate::math;
use crate::model::{validate_cohort, Cohort, Group, Status, SubjectRecord};
use crate::variance::replicate_rng;

/// Absolute bisection tolerance for event times.
const TIME_TOL: f64 = 1e-10;
/// Bracket growth cap; hazards whose integral stays below the sampled level
/// out to here are treated as unbracketable.
const BRACKET_CAP: f64 = 1e30;

fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            return u;
        }
    }
}

/// Draws one event time and type for the given group:
/// solves Λ_AE(T) + Λ_CE(T) = −ln U by bisection, then assigns the type AE
/// with probability λ_AE(T)/(λ_AE(T) + λ_CE(T)).
pub fn sample_event<R: Rng + ?Sized>(
    scenario: &ScenarioSpec,
    group: Group,
    rng: &mut R,
) -> Result<(f64, Status), SimulateError> {
    let (ae, ce) = scenario.hazards(group);
    let target = -math::ln(uniform_open01(rng));
    let time = solve_event_time(ae, ce, target)?;
    let lambda_ae = ae.value(time);
    let lambda_ce = ce.value(time);
    let total = lambda_ae + lambda_ce;
    let p_ae = if total > 0.0 && total.is_finite() { lambda_ae / total } else { 1.0 };
    let status = if rng.random::<f64>() < p_ae {
        Status::AdverseEvent
    } else {
        Status::CompetingEvent
    };
    Ok((time, status))
}

fn solve_event_time(
    ae: &HazardSpec,
    ce: &HazardSpec,
    target: f64,
) -> Result<f64, SimulateError> {
    let total = |t: f64| -> Result<f64, SimulateError> {
        Ok(ae.cumulative(t)? + ce.cumulative(t)?)
    };
    let mut hi = 1.0_f64;
    while total(hi)? < target {
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(SimulateError::RootNotBracketed);
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Adaptive Simpson quadrature with an absolute tolerance.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    if depth == 0 || math::abs(refined - whole) <= 15.0 * tol {
        return refined + (refined - whole) / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// True cumulative incidence of the AE:
/// P(T ≤ τ, ε = AE) = ∫₀^τ exp(−Λ_AE(u) − Λ_CE(u))·λ_AE(u) du.
///
/// Closed form under constant hazards, adaptive quadrature (absolute
/// tolerance 1e-8) otherwise.
pub fn true_cif(scenario: &ScenarioSpec, group: Group, tau: f64) -> Result<f64, SimulateError> {
    let (ae, ce) = scenario.hazards(group);
    if tau <= 0.0 {
        return Ok(0.0);
    }
    if let (Some(l_ae), Some(l_ce)) = (ae.as_constant(), ce.as_constant()) {
        let total = l_ae + l_ce;
        if total == 0.0 {
            return Ok(0.0);
        }
        return Ok(l_ae / total * (1.0 - math::exp(-(total * tau))));
    }
    cif_quadrature(ae, ce, tau, 1e-8)
}

/// Quadrature route for the CIF, shared with the constant-hazard cross-check.
pub(crate) fn cif_quadrature(
    ae: &HazardSpec,
    ce: &HazardSpec,
    tau: f64,
    tol: f64,
) -> Result<f64, SimulateError> {
    // Surface unintegrable forms before entering the closure.
    ae.cumulative(tau)?;
    ce.cumulative(tau)?;
    let integrand = |u: f64| {
        let cum = ae.cumulative(u).expect("validated form") + ce.cumulative(u).expect("validated form");
        math::exp(-cum) * ae.value(u)
    };
    // A power AE hazard with negative exponent is singular (integrably) at 0:
    // cover [0, ε] by Λ_AE(ε), since the survival factor there is 1 − O(Λ•(ε)).
    let (start, head) = match *ae {
        HazardSpec::Power { exponent, .. } if exponent < 0.0 => {
            let eps = tau * 1e-12;
            (eps, ae.cumulative(eps)?)
        }
        _ => (0.0, 0.0),
    };
    let value = head + adaptive_simpson(&integrand, start, tau, tol);
    Ok(value.clamp(0.0, 1.0))
}

/// Calibrates the uniform censoring bound: finds c such that
/// P(C < T) = target for C ~ U(0, c) and T following the group's all-cause
/// event-time distribution. P(C < T) = (1/c)·∫₀^c S(u) du is decreasing in c,
/// so bisection applies.
pub fn calibrate_censoring(
    scenario: &ScenarioSpec,
    group: Group,
    target: f64,
) -> Result<f64, SimulateError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(SimulateError::TargetUnreachable);
    }
    let (ae, ce) = scenario.hazards(group);
    ae.cumulative(1.0)?;
    ce.cumulative(1.0)?;
    let survival = |u: f64| {
        let cum =
            ae.cumulative(u).expect("validated form") + ce.cumulative(u).expect("validated form");
        math::exp(-cum)
    };
    let prob = |c: f64| adaptive_simpson(&survival, 0.0, c, 1e-7 * c) / c;

    let mut hi = 1.0_f64;
    while prob(hi) > target {
        hi *= 2.0;
        if hi > BRACKET_CAP {
            return Err(SimulateError::TargetUnreachable);
        }
    }
    let mut lo = 0.0_f64;
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if prob(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generates one trial: `n_per_group` independent subjects per group, with
/// observed time min(T, C) and the status seen at that time. Group A draws
/// from stream 0 of the seed, group B from stream 1; fixed seeds reproduce
/// identical cohorts.
pub fn generate_trial(
    scenario: &ScenarioSpec,
    seed: u64,
) -> Result<(Cohort, Cohort), SimulateError> {
    scenario.validate()?;
    let mut cohorts = Vec::with_capacity(2);
    for (stream, group) in [(0u64, Group::A), (1u64, Group::B)] {
        let bound = match scenario.censoring(group) {
            Some(c) => Some(c.bound.ok_or(SimulateError::CensoringNotCalibrated { group })?),
            None => None,
        };
        let mut rng = replicate_rng(seed, stream);
        let mut records = Vec::with_capacity(scenario.n_per_group as usize);
        for i in 0..scenario.n_per_group {
            let (event_time, status) = sample_event(scenario, group, &mut rng)?;
            let (time, status) = match bound {
                Some(c) => {
                    let censor_time = c * uniform_open01(&mut rng);
                    if censor_time < event_time {
                        (censor_time, Status::Censored)
                    } else {
                        (event_time, status)
                    }
                }
                None => (event_time, status),
            };
            records.push(SubjectRecord::new(format!("{group}{}", i + 1), group, time, status));
        }
        let cohort = validate_cohort(records, group)
            .expect("generated records are positive-time and single-group");
        cohorts.push(cohort);
    }
    let b = cohorts.pop().expect("two cohorts");
    let a = cohorts.pop().expect("two cohorts");
    Ok((a, b))
}
