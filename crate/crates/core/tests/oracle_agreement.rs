mod common;

use std::time::Instant;

use b3m_core::charging::{build_charging_program, noncollab_point};
use b3m_core::frontier::{run_method, Method, Tolerance};
use b3m_core::oracle::{charging_frontier, charging_noncollab, OracleBudget};
use b3m_core::SolverConfig;

#[test]
fn bbox_matches_oracle_on_desk_suite() {
    let config = SolverConfig::default();
    for (seed, inst) in common::desk_suite().iter().enumerate() {
        let started = Instant::now();
        let non = charging_noncollab(inst, OracleBudget::default()).unwrap();
        assert_eq!(noncollab_point(inst, &config).unwrap(), non, "seed {seed}");
        let truth = charging_frontier(inst, Some(non), OracleBudget::default()).unwrap();
        let t_oracle = started.elapsed();
        let program = build_charging_program(inst).unwrap().into_program();
        let result = run_method(&program, non, Method::Bbox, Tolerance::ZERO, &config).unwrap();
        eprintln!(
            "seed {seed} {} evs={} ch={} ndp={} calls={} nodes={} oracle={:?} total={:?}",
            inst.name,
            inst.evs.len(),
            inst.chargers.len(),
            result.ndp(),
            result.solver_calls,
            result.nodes_explored,
            t_oracle,
            started.elapsed()
        );
        assert_eq!(result.criterion_points(), truth.criterion_points(), "seed {seed}");
    }
}
