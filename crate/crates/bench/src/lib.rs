//! Fixed inputs shared by the benchmarks.

use b3m_core::charging::{build_charging_program, noncollab_point, ChargingInstance};
use b3m_core::frontier::ParticipationPoint;
use b3m_core::scenario::{generate_scenario, PriceSeries, ScenarioConfig};
use b3m_core::{BiObjectiveProgram, CriterionPoint, SolverConfig};

pub fn desk_instance(seed: u64, n_evs: usize, n_chargers: usize) -> ChargingInstance {
    generate_scenario(&ScenarioConfig::desk(seed, n_evs, n_chargers), &PriceSeries::default()).expect("desk instance")
}

/// Program and participation point of a desk instance.
pub fn desk_program(seed: u64, n_evs: usize, n_chargers: usize) -> (BiObjectiveProgram, ParticipationPoint) {
    let inst = desk_instance(seed, n_evs, n_chargers);
    let non = noncollab_point(&inst, &SolverConfig::default()).expect("stand-alone solve");
    (build_charging_program(&inst).expect("model").into_program(), non)
}

/// A convex-ish staircase of `n` non-dominated points.
pub fn staircase(n: i64) -> Vec<CriterionPoint> {
    (0..n)
        .map(|i| CriterionPoint::new(i * 10 + (i * i) % 7, (n - i) * 10 + (i * 3) % 5))
        .collect()
}
