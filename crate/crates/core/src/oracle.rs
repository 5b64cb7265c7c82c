//! Brute-force ground truth for desk-scale problems. Nothing here calls
//! the branch-and-bound solver or the frontier search.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::charging::{build_charging_program, ChargingError, ChargingInstance, Company, Schedule, Session};
use crate::frontier::ParticipationPoint;
use crate::model::{pareto_filter, Assignment, BiObjectiveProgram, CriterionPoint, Sense};

pub const DEFAULT_BUDGET: u64 = 1 << 25;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("refusing to enumerate {candidates} candidates (budget {budget})")]
    BudgetExceeded { candidates: u128, budget: u64 },
    #[error("oracle budget must be positive")]
    ZeroBudget,
    #[error(transparent)]
    Charging(#[from] ChargingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_candidates: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_candidates: DEFAULT_BUDGET,
        }
    }
}

impl OracleBudget {
    fn check(self, candidates: u128) -> Result<(), OracleError> {
        if self.max_candidates == 0 {
            return Err(OracleError::ZeroBudget);
        }
        if candidates > self.max_candidates as u128 {
            return Err(OracleError::BudgetExceeded {
                candidates,
                budget: self.max_candidates,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OracleFrontier {
    /// Non-dominated points inside the participation region, sorted by `z1`,
    /// each with the first assignment found for it.
    pub points: Vec<(CriterionPoint, Assignment)>,
    /// Per-objective minima over the whole feasible set.
    pub ideal: Option<CriterionPoint>,
    pub candidates: u128,
    pub feasible: u64,
}

impl OracleFrontier {
    pub fn criterion_points(&self) -> Vec<CriterionPoint> {
        self.points.iter().map(|(p, _)| *p).collect()
    }
}

/// Keeps, per `z1` value, the smallest `z2` and its witness.
struct Collector<W> {
    region: Option<ParticipationPoint>,
    best: BTreeMap<i64, (i64, W)>,
    ideal: Option<CriterionPoint>,
    feasible: u64,
}

impl<W: Clone> Collector<W> {
    fn new(region: Option<ParticipationPoint>) -> Self {
        Self {
            region,
            best: BTreeMap::new(),
            ideal: None,
            feasible: 0,
        }
    }

    fn offer(&mut self, p: CriterionPoint, witness: impl FnOnce() -> W) {
        self.feasible += 1;
        self.ideal = Some(match self.ideal {
            None => p,
            Some(i) => CriterionPoint::new(i.z1.min(p.z1), i.z2.min(p.z2)),
        });
        if let Some(r) = self.region {
            if p.z1 > r.z1_non || p.z2 > r.z2_non {
                return;
            }
        }
        match self.best.get(&p.z1) {
            Some(&(z2, _)) if z2 <= p.z2 => {}
            _ => {
                self.best.insert(p.z1, (p.z2, witness()));
            }
        }
    }

    fn finish(self) -> (Vec<(CriterionPoint, W)>, Option<CriterionPoint>, u64) {
        let pts: Vec<CriterionPoint> = self
            .best
            .iter()
            .map(|(&z1, &(z2, _))| CriterionPoint::new(z1, z2))
            .collect();
        let front = pareto_filter(&pts);
        let mut best = self.best;
        let out = front
            .into_iter()
            .map(|p| (p, best.remove(&p.z1).expect("front point came from the map").1))
            .collect();
        (out, self.ideal, self.feasible)
    }
}

/// Dense `(variable index, coefficient)` terms of one row.
type Terms = Vec<(usize, i64)>;

fn row_value(terms: &[(usize, i64)], constant: i64, values: &[i64]) -> i128 {
    terms.iter().map(|&(v, c)| c as i128 * values[v] as i128).sum::<i128>() + constant as i128
}

/// Root-level interval tightening, one row at a time, to a fixpoint.
fn tighten(program: &BiObjectiveProgram, lb: &mut [i64], ub: &mut [i64]) -> bool {
    let rows: Vec<(Terms, i128, i128)> = program
        .constraints()
        .iter()
        .map(|c| {
            let terms: Vec<(usize, i64)> = c.expression.terms().iter().map(|&(v, k)| (v.0, k)).collect();
            let rhs = c.rhs as i128 - c.expression.constant_term() as i128;
            let (lo, hi) = match c.sense {
                Sense::Le => (i128::MIN, rhs),
                Sense::Ge => (rhs, i128::MAX),
                Sense::Eq => (rhs, rhs),
            };
            (terms, lo, hi)
        })
        .collect();
    for _ in 0..100 {
        let mut changed = false;
        for (terms, lo, hi) in &rows {
            let min_act: i128 = terms
                .iter()
                .map(|&(v, c)| {
                    if c > 0 {
                        c as i128 * lb[v] as i128
                    } else {
                        c as i128 * ub[v] as i128
                    }
                })
                .sum();
            let max_act: i128 = terms
                .iter()
                .map(|&(v, c)| {
                    if c > 0 {
                        c as i128 * ub[v] as i128
                    } else {
                        c as i128 * lb[v] as i128
                    }
                })
                .sum();
            if min_act > *hi || max_act < *lo {
                return false;
            }
            for &(v, c) in terms {
                let c = c as i128;
                let (own_min, own_max) = if c > 0 {
                    (c * lb[v] as i128, c * ub[v] as i128)
                } else {
                    (c * ub[v] as i128, c * lb[v] as i128)
                };
                let rest_min = min_act - own_min;
                let rest_max = max_act - own_max;
                // lo - rest_max <= c x <= hi - rest_min
                let upper = if *hi == i128::MAX { None } else { Some(*hi - rest_min) };
                let lower = if *lo == i128::MIN { None } else { Some(*lo - rest_max) };
                let (mut new_lb, mut new_ub) = (lb[v] as i128, ub[v] as i128);
                if c > 0 {
                    if let Some(u) = upper {
                        new_ub = new_ub.min(u.div_euclid(c));
                    }
                    if let Some(l) = lower {
                        new_lb = new_lb.max(-((-l).div_euclid(c)));
                    }
                } else {
                    let a = -c;
                    // c x <= u  <=>  x >= -u / a
                    if let Some(u) = upper {
                        new_lb = new_lb.max(-(u.div_euclid(a)));
                    }
                    if let Some(l) = lower {
                        new_ub = new_ub.min((-l).div_euclid(a));
                    }
                }
                if new_lb > new_ub {
                    return false;
                }
                if new_lb as i64 != lb[v] || new_ub as i64 != ub[v] {
                    lb[v] = new_lb as i64;
                    ub[v] = new_ub as i64;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    true
}

/// Enumerates every assignment within (root-tightened) bounds. Refuses
/// rather than truncates when the candidate count exceeds the budget.
pub fn brute_force_frontier(
    program: &BiObjectiveProgram,
    participation: Option<ParticipationPoint>,
    budget: OracleBudget,
) -> Result<OracleFrontier, OracleError> {
    let n = program.num_variables();
    let mut lb: Vec<i64> = program.variables().iter().map(|v| v.lower).collect();
    let mut ub: Vec<i64> = program.variables().iter().map(|v| v.upper).collect();
    if !tighten(program, &mut lb, &mut ub) {
        budget.check(0)?;
        return Ok(OracleFrontier {
            points: Vec::new(),
            ideal: None,
            candidates: 0,
            feasible: 0,
        });
    }
    let candidates = lb
        .iter()
        .zip(&ub)
        .try_fold(1u128, |acc, (&l, &u)| acc.checked_mul((u - l + 1) as u128))
        .unwrap_or(u128::MAX);
    budget.check(candidates)?;

    let rows: Vec<(Terms, i64, Sense, i64)> = program
        .constraints()
        .iter()
        .map(|c| {
            (
                c.expression.terms().iter().map(|&(v, k)| (v.0, k)).collect(),
                c.expression.constant_term(),
                c.sense,
                c.rhs,
            )
        })
        .collect();
    let objective = |o: crate::model::Objective| {
        let e = program.objective(o);
        (
            e.terms().iter().map(|&(v, k)| (v.0, k)).collect::<Vec<_>>(),
            e.constant_term(),
        )
    };
    let (o1, o2) = (
        objective(crate::model::Objective::Z1),
        objective(crate::model::Objective::Z2),
    );

    let mut collector: Collector<Vec<i64>> = Collector::new(participation);
    let mut values = lb.clone();
    'outer: loop {
        let ok = rows.iter().all(|(terms, constant, sense, rhs)| {
            let lhs = row_value(terms, *constant, &values);
            let rhs = *rhs as i128;
            match sense {
                Sense::Le => lhs <= rhs,
                Sense::Eq => lhs == rhs,
                Sense::Ge => lhs >= rhs,
            }
        });
        if ok {
            let p = CriterionPoint::new(
                row_value(&o1.0, o1.1, &values) as i64,
                row_value(&o2.0, o2.1, &values) as i64,
            );
            collector.offer(p, || values.clone());
        }
        for v in (0..n).rev() {
            if values[v] < ub[v] {
                values[v] += 1;
                continue 'outer;
            }
            values[v] = lb[v];
        }
        break;
    }
    let (points, ideal, feasible) = collector.finish();
    Ok(OracleFrontier {
        points: points
            .into_iter()
            .map(|(p, v)| (p, Assignment::from_dense(&v)))
            .collect(),
        ideal,
        candidates,
        feasible,
    })
}

/// Possible sessions of one EV: `(charger, start, end)` inside its window
/// with delivered energy inside its demand bounds.
fn session_options(instance: &ChargingInstance, i: usize) -> Vec<(usize, i64, i64)> {
    let ev = &instance.evs[i];
    let mut out = Vec::new();
    for j in 0..instance.chargers.len() {
        let rate = instance.charge_rate[i][j];
        for start in ev.earliest..ev.latest {
            for end in start + 1..=ev.latest {
                let energy = rate * (end - start);
                if energy >= ev.demand_min && energy <= ev.demand_max {
                    out.push((j, start, end));
                }
            }
        }
    }
    out
}

/// Cost of one company under a rental pattern and session choice,
/// evaluated straight from the cost definition.
fn pattern_cost(
    instance: &ChargingInstance,
    renters: &[Option<Company>],
    sessions: &[(usize, i64, i64)],
    company: Company,
) -> i64 {
    let mut cost = 0;
    for (j, r) in renters.iter().enumerate() {
        if *r == Some(company) {
            cost += instance.chargers[j].rental_fee[company.index()];
        }
    }
    for (i, &(j, start, end)) in sessions.iter().enumerate() {
        let ev = &instance.evs[i];
        if ev.company != company {
            continue;
        }
        let table = if renters[j] == Some(company) {
            &instance.own_energy_fee
        } else {
            &instance.collab_energy_fee
        };
        for tau in start + 1..=end {
            cost += table[j][(tau - 1) as usize] * instance.charge_rate[i][j];
        }
        cost += instance.travel_cost[i][j];
        cost += ev.value_of_time * (start - ev.earliest);
    }
    cost
}

struct Enumerator<'a> {
    instance: &'a ChargingInstance,
    options: Vec<Vec<(usize, i64, i64)>>,
    allowed: [bool; 2],
}

impl Enumerator<'_> {
    /// Visits every rental pattern × feasible session combination.
    fn run(&self, mut visit: impl FnMut(&[Option<Company>], &[(usize, i64, i64)])) {
        let nj = self.instance.chargers.len();
        let choices: Vec<Option<Company>> = std::iter::once(None)
            .chain(Company::ALL.into_iter().filter(|k| self.allowed[k.index()]).map(Some))
            .collect();
        let mut pattern = vec![0usize; nj];
        loop {
            let renters: Vec<Option<Company>> = pattern.iter().map(|&c| choices[c]).collect();
            let mut busy = vec![0u64; nj];
            let mut picked = Vec::with_capacity(self.options.len());
            self.sessions(0, &renters, &mut busy, &mut picked, &mut visit);
            let mut k = 0;
            loop {
                if k == nj {
                    return;
                }
                pattern[k] += 1;
                if pattern[k] < choices.len() {
                    break;
                }
                pattern[k] = 0;
                k += 1;
            }
        }
    }

    fn sessions(
        &self,
        i: usize,
        renters: &[Option<Company>],
        busy: &mut [u64],
        picked: &mut Vec<(usize, i64, i64)>,
        visit: &mut impl FnMut(&[Option<Company>], &[(usize, i64, i64)]),
    ) {
        if i == self.options.len() {
            visit(renters, picked);
            return;
        }
        for &(j, start, end) in &self.options[i] {
            if renters[j].is_none() {
                continue;
            }
            let mask = ((1u64 << (end - start)) - 1) << start;
            if busy[j] & mask != 0 {
                continue;
            }
            busy[j] |= mask;
            picked.push((j, start, end));
            self.sessions(i + 1, renters, busy, picked, visit);
            picked.pop();
            busy[j] &= !mask;
        }
    }
}

fn structural_candidates(instance: &ChargingInstance, options: &[Vec<(usize, i64, i64)>], patterns: u128) -> u128 {
    let _ = instance;
    options
        .iter()
        .try_fold(patterns, |acc, o| acc.checked_mul(o.len() as u128))
        .unwrap_or(u128::MAX)
}

fn schedule_of(instance: &ChargingInstance, renters: &[Option<Company>], sessions: &[(usize, i64, i64)]) -> Schedule {
    Schedule {
        rentals: renters
            .iter()
            .enumerate()
            .filter_map(|(j, r)| r.map(|k| (j, k)))
            .collect(),
        sessions: sessions
            .iter()
            .enumerate()
            .map(|(i, &(j, start, end))| Session {
                ev: i,
                charger: j,
                start,
                end,
                energy: instance.charge_rate[i][j] * (end - start),
            })
            .collect(),
    }
}

fn check_instance(instance: &ChargingInstance) -> Result<(), OracleError> {
    instance.validate()?;
    if instance.horizon > 63 {
        return Err(ChargingError::InvalidInstance("oracle supports at most 63 intervals".into()).into());
    }
    Ok(())
}

/// Exact frontier of a charging instance by enumerating rental patterns
/// and per-EV sessions. Assignments are encoded from the winning schedules.
pub fn charging_frontier(
    instance: &ChargingInstance,
    participation: Option<ParticipationPoint>,
    budget: OracleBudget,
) -> Result<OracleFrontier, OracleError> {
    check_instance(instance)?;
    let options: Vec<_> = (0..instance.evs.len()).map(|i| session_options(instance, i)).collect();
    let patterns = 3u128.checked_pow(instance.chargers.len() as u32).unwrap_or(u128::MAX);
    let candidates = structural_candidates(instance, &options, patterns);
    budget.check(candidates)?;
    let e = Enumerator {
        instance,
        options,
        allowed: [true, true],
    };
    let mut collector: Collector<Schedule> = Collector::new(participation);
    e.run(|renters, sessions| {
        let p = CriterionPoint::new(
            pattern_cost(instance, renters, sessions, Company::One),
            pattern_cost(instance, renters, sessions, Company::Two),
        );
        collector.offer(p, || schedule_of(instance, renters, sessions));
    });
    let (points, ideal, feasible) = collector.finish();
    let model = build_charging_program(instance)?;
    Ok(OracleFrontier {
        points: points.into_iter().map(|(p, s)| (p, model.encode(&s))).collect(),
        ideal,
        candidates,
        feasible,
    })
}

/// Both company costs of a schedule, evaluated from the cost definition
/// without the program or `company_cost`.
pub fn schedule_point(instance: &ChargingInstance, schedule: &Schedule) -> Result<CriterionPoint, OracleError> {
    check_instance(instance)?;
    let mut renters = vec![None; instance.chargers.len()];
    for &(j, k) in &schedule.rentals {
        renters[j] = Some(k);
    }
    let mut sessions = vec![None; instance.evs.len()];
    for s in &schedule.sessions {
        sessions[s.ev] = Some((s.charger, s.start, s.end));
    }
    let sessions: Vec<_> = sessions
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| ChargingError::InvalidSchedule(format!("{} has no session", instance.evs[i].id))))
        .collect::<Result<_, _>>()?;
    Ok(CriterionPoint::new(
        pattern_cost(instance, &renters, &sessions, Company::One),
        pattern_cost(instance, &renters, &sessions, Company::Two),
    ))
}

/// Stand-alone optimum of each company by enumeration: own EVs only, own
/// rentals only. A company without EVs costs nothing.
pub fn charging_noncollab(
    instance: &ChargingInstance,
    budget: OracleBudget,
) -> Result<ParticipationPoint, OracleError> {
    check_instance(instance)?;
    let mut costs = [0i64; 2];
    for k in Company::ALL {
        let sub = instance.restricted_to(k);
        if sub.evs.is_empty() {
            continue;
        }
        let options: Vec<_> = (0..sub.evs.len()).map(|i| session_options(&sub, i)).collect();
        let patterns = 2u128.checked_pow(sub.chargers.len() as u32).unwrap_or(u128::MAX);
        budget.check(structural_candidates(&sub, &options, patterns))?;
        let mut allowed = [false, false];
        allowed[k.index()] = true;
        let e = Enumerator {
            instance: &sub,
            options,
            allowed,
        };
        let mut best: Option<i64> = None;
        e.run(|renters, sessions| {
            let c = pattern_cost(&sub, renters, sessions, k);
            best = Some(best.map_or(c, |b| b.min(c)));
        });
        costs[k.index()] = best.ok_or_else(|| ChargingError::StandaloneInfeasible {
            company: k,
            evs: sub.evs.iter().map(|e| e.id.clone()).collect(),
        })?;
    }
    Ok(ParticipationPoint {
        z1_non: costs[0],
        z2_non: costs[1],
    })
}
