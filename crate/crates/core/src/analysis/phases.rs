//! Two-regime scenario: exponential improvement by human engineers until
//! the machine reaches their level, then self-improvement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::GrowthLaw;
use crate::model::{self, ScenarioParams};
use crate::ode::{self, BlowUpSearch, IntegrationOptions, TrajectoryEnd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOptions {
    /// Level at which the second regime takes over; defaults to `I`.
    pub switch_level: Option<f64>,
    /// Samples of the closed-form first phase, including both ends.
    pub phase1_samples: usize,
    /// How long to follow the second phase after the switch.
    pub phase2_horizon: f64,
    pub integration: IntegrationOptions,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self {
            switch_level: None,
            phase1_samples: 101,
            phase2_horizon: 1e4,
            integration: IntegrationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub growth_factor: f64,
    pub intelligence: f64,
    pub k: f64,
    pub switch_level: f64,
    /// `t1`, when the first phase reaches the switch level.
    pub switch_time: f64,
    pub phase2_law: String,
    /// Blow-up search of the second phase, in time since the switch.
    pub phase2: BlowUpSearch,
    /// `t1 + t2` when the second phase blows up.
    pub total_blowup_time: Option<f64>,
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    /// 1 or 2 per sample; the switch sample belongs to phase 1.
    pub phase: Vec<u8>,
}

pub fn compose_phases(
    growth_factor: f64,
    intelligence: f64,
    phase2_law: &GrowthLaw,
    opts: &PhaseOptions,
) -> Result<PhasePlan> {
    if !(growth_factor > 1.0) || !(intelligence >= 1.0) {
        return Err(Error::domain(format!(
            "need R > 1 and I >= 1, got R = {growth_factor}, I = {intelligence}"
        )));
    }
    let switch_level = opts.switch_level.unwrap_or(intelligence);
    if !(switch_level >= 1.0 && switch_level.is_finite()) {
        return Err(Error::domain(format!(
            "switch level must be at least A0 = 1, got {switch_level}"
        )));
    }
    if opts.phase1_samples < 2 {
        return Err(Error::domain("phase 1 needs at least 2 samples"));
    }
    let at_switch = phase2_law.rate(switch_level)?;
    if !(at_switch > 0.0) {
        return Err(Error::domain(format!(
            "phase-2 law must be positive at A = {switch_level}, got {at_switch}"
        )));
    }

    let params = ScenarioParams {
        growth_factor,
        intelligence,
        a0: 1.0,
        ..Default::default()
    }
    .calibrated()?;
    let rate = params.k * intelligence;
    let switch_time = switch_level.ln() / rate;

    let mut times = Vec::new();
    let mut levels = Vec::new();
    if switch_time > 0.0 {
        let n = opts.phase1_samples;
        for i in 0..n - 1 {
            let t = switch_time * i as f64 / (n - 1) as f64;
            times.push(t);
            levels.push(model::exp_phase_solution(&params, t)?);
        }
    }
    times.push(switch_time);
    levels.push(switch_level);
    let mut phase = vec![1u8; times.len()];

    let traj = ode::integrate(phase2_law, &[switch_level], opts.phase2_horizon, &opts.integration)?;
    for (t, s) in traj.times.iter().zip(&traj.states).skip(1) {
        times.push(switch_time + t);
        levels.push(s[0]);
        phase.push(2);
    }
    let phase2 = match traj.end {
        TrajectoryEnd::BlowUp(ev) => BlowUpSearch::Found(ev),
        TrajectoryEnd::Horizon => BlowUpSearch::NotFound {
            reason: ode::NoBlowUp::HorizonReached,
            t_reached: opts.phase2_horizon,
        },
        TrajectoryEnd::Escaped { t_cross, reason } => BlowUpSearch::NotFound {
            reason,
            t_reached: t_cross,
        },
    };
    let total_blowup_time = phase2.estimate().map(|t2| switch_time + t2);

    Ok(PhasePlan {
        growth_factor,
        intelligence,
        k: params.k,
        switch_level,
        switch_time,
        phase2_law: phase2_law.label().to_string(),
        phase2,
        total_blowup_time,
        times,
        levels,
        phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperbolic_second_phase_gives_the_headline_total() {
        let k = model::calibrate_k(1.5872, 100.0).unwrap();
        let plan = compose_phases(1.5872, 100.0, &GrowthLaw::power(k, 2.0), &PhaseOptions::default()).unwrap();
        assert!((plan.switch_time - 9.968).abs() < 0.01, "{}", plan.switch_time);
        let ts = plan.total_blowup_time.unwrap();
        assert!((ts - 12.13).abs() < 0.02, "{ts}");
        let oracle = model::total_singularity_time(1.5872, 100.0).unwrap();
        assert!((ts - oracle).abs() < 1e-3 * oracle);
    }

    #[test]
    fn log_law_second_phase_never_blows_up() {
        let k = model::calibrate_k(1.5872, 100.0).unwrap();
        let plan = compose_phases(1.5872, 100.0, &GrowthLaw::log_law(k), &PhaseOptions::default()).unwrap();
        assert!(plan.total_blowup_time.is_none(), "{:?}", plan.phase2);
    }

    #[test]
    fn trivial_first_phase() {
        let plan = compose_phases(
            std::f64::consts::E,
            1.0,
            &GrowthLaw::power(1.0, 2.0),
            &PhaseOptions::default(),
        )
        .unwrap();
        assert_eq!(plan.switch_time, 0.0);
        assert_eq!(plan.k, 1.0);
        assert!((plan.total_blowup_time.unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn trajectory_is_continuous_at_the_switch() {
        let k = model::calibrate_k(1.5872, 100.0).unwrap();
        let plan = compose_phases(1.5872, 100.0, &GrowthLaw::power(k, 2.0), &PhaseOptions::default()).unwrap();
        let last1 = plan.phase.iter().rposition(|&p| p == 1).unwrap();
        assert_eq!(plan.times[last1], plan.switch_time);
        assert_eq!(plan.levels[last1], 100.0);
        assert_eq!(plan.phase[last1 + 1], 2);
        assert!(plan.times.windows(2).all(|w| w[1] > w[0]));
        assert!(plan.levels.windows(2).all(|w| w[1] >= w[0]));
        // Just after the switch the level is close to I.
        assert!((plan.levels[last1 + 1] - 100.0) / 100.0 < 0.1);
    }

    #[test]
    fn switch_level_override() {
        let k = model::calibrate_k(1.5872, 100.0).unwrap();
        let opts = PhaseOptions {
            switch_level: Some(50.0),
            ..Default::default()
        };
        let plan = compose_phases(1.5872, 100.0, &GrowthLaw::power(k, 2.0), &opts).unwrap();
        assert!((plan.switch_time - 50f64.ln() / 1.5872f64.ln()).abs() < 1e-12);
        let t2 = 1.0 / (k * 50.0);
        assert!((plan.total_blowup_time.unwrap() - plan.switch_time - t2).abs() < 1e-3 * t2);
    }

    #[test]
    fn invalid_plans() {
        let law = GrowthLaw::power(1.0, 2.0);
        assert!(compose_phases(1.0, 100.0, &law, &PhaseOptions::default()).is_err());
        assert!(compose_phases(2.0, 0.5, &law, &PhaseOptions::default()).is_err());
        assert!(compose_phases(2.0, 10.0, &GrowthLaw::new("0", |_| 0.0), &PhaseOptions::default()).is_err());
    }
}
