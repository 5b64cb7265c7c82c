#![allow(dead_code)]

use b3m_core::charging::ChargingInstance;
use b3m_core::scenario::{generate_scenario, ChargerLayout, EvDistribution, PriceSeries, ScenarioConfig};

pub const SUITE_SIZE: u64 = 50;

/// Seeded desk instances: at most 4 EVs, 2 chargers, 6 intervals.
pub fn desk_config(seed: u64) -> ScenarioConfig {
    let n_evs = 2 + (seed % 3) as usize;
    let n_chargers = 1 + ((seed / 3) % 2) as usize;
    let mut cfg = ScenarioConfig::desk(seed, n_evs, n_chargers);
    cfg.ev_distribution = if seed.is_multiple_of(2) {
        EvDistribution::Uniform
    } else {
        EvDistribution::Clustered
    };
    cfg.charger_layout = if (seed / 2).is_multiple_of(2) {
        ChargerLayout::Uniform
    } else {
        ChargerLayout::Centralized
    };
    cfg
}

pub fn desk_suite() -> Vec<ChargingInstance> {
    (0..SUITE_SIZE)
        .map(|seed| generate_scenario(&desk_config(seed), &PriceSeries::default()).expect("desk instance generates"))
        .collect()
}
