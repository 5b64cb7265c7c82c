mod common;

use b3m_core::charging::{build_charging_program, noncollab_point, validate_schedule, ChargingModel, Company};
use b3m_core::frontier::{run_method, strictly_close, FrontierResult, Method, Tolerance};
use b3m_core::{Assignment, ChargingInstance, SolverConfig};

fn runs(inst: &ChargingInstance, model: &ChargingModel) -> Vec<FrontierResult> {
    let config = SolverConfig::default();
    let non = noncollab_point(inst, &config).unwrap();
    let mut out = Vec::new();
    for m in Method::ALL {
        for e in [0, 1, 5, 25] {
            out.push(run_method(model.program(), non, m, Tolerance::from_percent(e), &config).unwrap());
        }
    }
    out
}

fn value(a: &Assignment, v: b3m_core::VarId) -> i64 {
    a.get(v).unwrap_or(0)
}

#[test]
fn link_variables_are_products() {
    for inst in common::desk_suite() {
        let model = build_charging_program(&inst).unwrap();
        for r in runs(&inst, &model) {
            for p in &r.points {
                for i in 0..inst.evs.len() {
                    for j in 0..inst.chargers.len() {
                        for t in 0..inst.horizon as usize {
                            let x = value(&p.assignment, model.charge_var(i, j, t));
                            for k in Company::ALL {
                                let y = value(&p.assignment, model.rental_var(j, k));
                                let u = value(&p.assignment, model.link_var(i, j, t, k));
                                assert_eq!(u, x * y, "{} ev {i} charger {j} t {t} company {k}", inst.name);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn sessions_are_one_contiguous_block() {
    for inst in common::desk_suite() {
        let model = build_charging_program(&inst).unwrap();
        for r in runs(&inst, &model) {
            for p in &r.points {
                let schedule = model.decode(&p.assignment, &inst).unwrap();
                assert!(validate_schedule(&schedule, &inst).is_empty());
                for s in &schedule.sessions {
                    for j in 0..inst.chargers.len() {
                        for t in 0..inst.horizon {
                            let on = value(&p.assignment, model.charge_var(s.ev, j, t as usize)) == 1;
                            let expected = j == s.charger && t >= s.start && t < s.end;
                            assert_eq!(on, expected, "{} ev {} charger {j} t {t}", inst.name, s.ev);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn repeated_runs_return_identical_assignments() {
    for inst in common::desk_suite().into_iter().step_by(7) {
        let model = build_charging_program(&inst).unwrap();
        let a = runs(&inst, &model);
        let b = runs(&inst, &model);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.points, y.points);
            assert_eq!(x.discarded, y.discarded);
            assert_eq!(x.solver_calls, y.solver_calls);
        }
    }
}

#[test]
fn b3m1_discards_are_strictly_close_to_retained_points() {
    for inst in common::desk_suite() {
        let model = build_charging_program(&inst).unwrap();
        for r in runs(&inst, &model).iter().filter(|r| r.method == Method::B3m1) {
            let kept = r.criterion_points();
            for d in &r.discarded {
                assert!(strictly_close(*d, &kept, &r.margins), "{} discarded {d}", inst.name);
            }
        }
    }
}
