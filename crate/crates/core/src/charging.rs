//! Two-fleet shared charging: instance data, the bi-objective program
//! built from it, schedule decoding, validation and per-company costs.
//!
//! Intervals are numbered `1..=horizon`. Interval `τ` spans the time
//! `[τ-1, τ]`, so a session occupying intervals `a..=b` has start time
//! `a-1` and end time `b`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontier::ParticipationPoint;
use crate::model::{
    Assignment, BiObjectiveProgram, Constraint, LinearExpression, ModelError, Objective, Sense, VarId, Variable,
};
use crate::solver::{solve_min, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum ChargingError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("company {company}: standalone problem is infeasible (check EVs {evs:?})")]
    StandaloneInfeasible { company: Company, evs: Vec<String> },
    #[error("company {0}: standalone solve hit the node limit")]
    NodeLimit(Company),
    #[error("schedule invalid: {0}")]
    InvalidSchedule(String),
    #[error("assignment violates: {}", .0.join("; "))]
    Decode(Vec<String>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One of the two collaborating fleet operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Company {
    One,
    Two,
}

impl Company {
    pub const ALL: [Company; 2] = [Company::One, Company::Two];

    pub fn index(self) -> usize {
        match self {
            Company::One => 0,
            Company::Two => 1,
        }
    }

    pub fn other(self) -> Company {
        match self {
            Company::One => Company::Two,
            Company::Two => Company::One,
        }
    }

    pub fn objective(self) -> Objective {
        match self {
            Company::One => Objective::Z1,
            Company::Two => Objective::Z2,
        }
    }
}

impl TryFrom<u8> for Company {
    type Error = String;
    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Company::One),
            2 => Ok(Company::Two),
            other => Err(format!("company must be 1 or 2, got {other}")),
        }
    }
}

impl From<Company> for u8 {
    fn from(c: Company) -> u8 {
        c.index() as u8 + 1
    }
}

impl fmt::Display for Company {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ev {
    pub id: String,
    pub company: Company,
    /// Earliest start time `e_i`.
    pub earliest: i64,
    /// Latest end time `l_i`.
    pub latest: i64,
    /// `[L_i, H_i]` in energy units.
    pub demand_min: i64,
    pub demand_max: i64,
    /// Waiting cost per interval, minor units.
    pub value_of_time: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Charger {
    pub id: String,
    /// Daily rental fee for company 1 and company 2, minor units.
    pub rental_fee: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<[f64; 2]>,
}

/// All scheduling data. Tables are indexed `[charger][interval-1]` for
/// fees and `[ev][charger]` for rates and travel costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingInstance {
    pub name: String,
    /// Minor units per major currency unit (100: amounts are in öre).
    pub minor_per_major: i64,
    /// Number of intervals `𝒯`.
    pub horizon: i64,
    pub evs: Vec<Ev>,
    pub chargers: Vec<Charger>,
    /// Fee per energy unit when charging at a charger the EV's own company rents.
    pub own_energy_fee: Vec<Vec<i64>>,
    /// Fee per energy unit when charging at a charger the other company rents.
    pub collab_energy_fee: Vec<Vec<i64>>,
    /// Energy units delivered per interval.
    pub charge_rate: Vec<Vec<i64>>,
    /// Travel energy cost, minor units, charged once per session.
    pub travel_cost: Vec<Vec<i64>>,
}

fn lp_safe(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ChargingInstance {
    pub fn validate(&self) -> Result<(), ChargingError> {
        let bad = |msg: String| Err(ChargingError::InvalidInstance(msg));
        if self.horizon < 1 {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.minor_per_major < 1 {
            return bad("minor_per_major must be positive".into());
        }
        let (ni, nj, nt) = (self.evs.len(), self.chargers.len(), self.horizon as usize);
        let mut seen = HashSet::new();
        for id in self
            .evs
            .iter()
            .map(|e| &e.id)
            .chain(self.chargers.iter().map(|c| &c.id))
        {
            if !lp_safe(id) {
                return bad(format!("id `{id}` must be non-empty ASCII alphanumeric or `_`"));
            }
            if !seen.insert(id.as_str()) {
                return bad(format!("duplicate id `{id}`"));
            }
        }
        for ev in &self.evs {
            if !(0 <= ev.earliest && ev.earliest <= ev.latest && ev.latest <= self.horizon) {
                return bad(format!(
                    "EV {}: window [{}, {}] outside [0, {}]",
                    ev.id, ev.earliest, ev.latest, self.horizon
                ));
            }
            if ev.demand_min < 1 || ev.demand_min > ev.demand_max {
                return bad(format!(
                    "EV {}: demand bounds [{}, {}] must satisfy 1 <= L <= H",
                    ev.id, ev.demand_min, ev.demand_max
                ));
            }
            if ev.value_of_time < 0 {
                return bad(format!("EV {}: negative value of time", ev.id));
            }
        }
        for ch in &self.chargers {
            if ch.rental_fee.iter().any(|&f| f < 0) {
                return bad(format!("charger {}: negative rental fee", ch.id));
            }
        }
        let check_table = |name: &str, table: &Vec<Vec<i64>>, rows: usize, cols: usize| -> Result<(), ChargingError> {
            if table.len() != rows || table.iter().any(|r| r.len() != cols) {
                return Err(ChargingError::InvalidInstance(format!("{name} must be {rows}x{cols}")));
            }
            if table.iter().flatten().any(|&v| v < 0) {
                return Err(ChargingError::InvalidInstance(format!("{name} has negative entries")));
            }
            Ok(())
        };
        check_table("own_energy_fee", &self.own_energy_fee, nj, nt)?;
        check_table("collab_energy_fee", &self.collab_energy_fee, nj, nt)?;
        check_table("charge_rate", &self.charge_rate, ni, nj)?;
        check_table("travel_cost", &self.travel_cost, ni, nj)?;
        Ok(())
    }

    pub fn fleet(&self, company: Company) -> impl Iterator<Item = usize> + '_ {
        self.evs
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.company == company)
            .map(|(i, _)| i)
    }

    /// Copy restricted to one company's EVs.
    pub fn restricted_to(&self, company: Company) -> ChargingInstance {
        let keep: Vec<usize> = self.fleet(company).collect();
        ChargingInstance {
            name: format!("{}-company{}", self.name, company),
            evs: keep.iter().map(|&i| self.evs[i].clone()).collect(),
            charge_rate: keep.iter().map(|&i| self.charge_rate[i].clone()).collect(),
            travel_cost: keep.iter().map(|&i| self.travel_cost[i].clone()).collect(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ChargingError> {
        let inst: ChargingInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Variable handles of a built charging program.
#[derive(Debug, Clone)]
struct VarMap {
    ni: usize,
    nj: usize,
    nt: usize,
    y: Vec<VarId>,
    x: Vec<VarId>,
    start: Vec<VarId>,
    end: Vec<VarId>,
    ts: Vec<VarId>,
    tf: Vec<VarId>,
    u: Vec<VarId>,
}

impl VarMap {
    fn y(&self, j: usize, k: Company) -> VarId {
        self.y[j * 2 + k.index()]
    }
    fn ijt(&self, i: usize, j: usize, t: usize) -> usize {
        (i * self.nj + j) * self.nt + t
    }
    fn x(&self, i: usize, j: usize, t: usize) -> VarId {
        self.x[self.ijt(i, j, t)]
    }
    fn start(&self, i: usize, j: usize, t: usize) -> VarId {
        self.start[self.ijt(i, j, t)]
    }
    fn end(&self, i: usize, j: usize, t: usize) -> VarId {
        self.end[self.ijt(i, j, t)]
    }
    fn u(&self, i: usize, j: usize, t: usize, k: Company) -> VarId {
        self.u[self.ijt(i, j, t) * 2 + k.index()]
    }
}

/// The bi-objective program of an instance plus the handles needed to
/// decode its assignments. `t` arguments are zero-based interval offsets.
#[derive(Debug, Clone)]
pub struct ChargingModel {
    program: BiObjectiveProgram,
    vars: VarMap,
}

/// Variable counts per family of a built model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableCounts {
    pub x: usize,
    pub start: usize,
    pub end: usize,
    pub y: usize,
    pub u: usize,
    pub times: usize,
}

impl ChargingModel {
    pub fn program(&self) -> &BiObjectiveProgram {
        &self.program
    }

    pub fn into_program(self) -> BiObjectiveProgram {
        self.program
    }

    pub fn variable_counts(&self) -> VariableCounts {
        VariableCounts {
            x: self.vars.x.len(),
            start: self.vars.start.len(),
            end: self.vars.end.len(),
            y: self.vars.y.len(),
            u: self.vars.u.len(),
            times: self.vars.ts.len() + self.vars.tf.len(),
        }
    }

    pub fn rental_var(&self, charger: usize, company: Company) -> VarId {
        self.vars.y(charger, company)
    }

    pub fn charge_var(&self, ev: usize, charger: usize, t: usize) -> VarId {
        self.vars.x(ev, charger, t)
    }

    pub fn link_var(&self, ev: usize, charger: usize, t: usize, company: Company) -> VarId {
        self.vars.u(ev, charger, t, company)
    }

    /// Rows pinning every rental of `company` to zero.
    pub fn forbid_rentals(&self, company: Company) -> Vec<Constraint> {
        (0..self.vars.nj)
            .map(|j| {
                Constraint::new(
                    format!("no_rent_{}_{}", j, company),
                    LinearExpression::new().with_term(self.vars.y(j, company), 1),
                    Sense::Eq,
                    0,
                )
            })
            .collect()
    }

    /// Encodes a schedule as a full assignment of the program. The schedule
    /// must name one session per EV and one renter per rented charger.
    pub fn encode(&self, schedule: &Schedule) -> Assignment {
        let v = &self.vars;
        let mut values = vec![0i64; self.program.num_variables()];
        let mut renter: Vec<Option<Company>> = vec![None; v.nj];
        for &(j, k) in &schedule.rentals {
            renter[j] = Some(k);
            values[v.y(j, k).0] = 1;
        }
        for s in &schedule.sessions {
            let (i, j) = (s.ev, s.charger);
            for t in s.start as usize..s.end as usize {
                values[v.x(i, j, t).0] = 1;
                if let Some(k) = renter[j] {
                    values[v.u(i, j, t, k).0] = 1;
                }
            }
            values[v.start(i, j, s.start as usize).0] = 1;
            values[v.end(i, j, s.end as usize - 1).0] = 1;
            values[v.ts[i].0] = s.start;
            values[v.tf[i].0] = s.end;
        }
        Assignment::from_dense(&values)
    }

    /// Checks every constraint family on `assignment` and extracts the
    /// schedule. Errors list each violated family with the offending entity.
    pub fn decode(&self, assignment: &Assignment, instance: &ChargingInstance) -> Result<Schedule, ChargingError> {
        let v = &self.vars;
        let value = |var: VarId| -> Result<i64, ChargingError> {
            assignment
                .get(var)
                .ok_or_else(|| ModelError::UnassignedVariable(self.program.variable(var).name.clone()).into())
        };
        self.program.check_bounds(assignment)?;

        let mut violations: Vec<String> = Vec::new();
        for c in self.program.constraints() {
            if !c
                .is_satisfied(assignment)
                .map_err(|_| ChargingError::Decode(vec![format!("incomplete assignment for row {}", c.name)]))?
            {
                let family = c.name.split('[').next().unwrap_or(&c.name);
                let entity = c.name.get(family.len()..).unwrap_or("");
                violations.push(format!("{family}: {entity}"));
            }
        }
        if !violations.is_empty() {
            return Err(ChargingError::Decode(violations));
        }

        let mut rentals = Vec::new();
        for j in 0..v.nj {
            for k in Company::ALL {
                if value(v.y(j, k))? == 1 {
                    rentals.push((j, k));
                }
            }
        }
        let mut sessions = Vec::with_capacity(v.ni);
        for i in 0..v.ni {
            let mut charger = None;
            for j in 0..v.nj {
                for t in 0..v.nt {
                    if value(v.start(i, j, t))? == 1 {
                        charger = Some(j);
                    }
                }
            }
            let j = charger
                .ok_or_else(|| ChargingError::Decode(vec![format!("single-session: {}", instance.evs[i].id)]))?;
            let start = value(v.ts[i])?;
            let end = value(v.tf[i])?;
            let energy = (start..end).map(|_| instance.charge_rate[i][j]).sum();
            sessions.push(Session {
                ev: i,
                charger: j,
                start,
                end,
                energy,
            });
        }
        Ok(Schedule { rentals, sessions })
    }
}

/// Builds the linearized bi-objective program of `instance`.
///
/// Declaration order is rentals first, then per EV the charging, start,
/// end and timing variables, then the linearization products. The search
/// branches in this order.
pub fn build_charging_program(instance: &ChargingInstance) -> Result<ChargingModel, ChargingError> {
    instance.validate()?;
    let (ni, nj, nt) = (instance.evs.len(), instance.chargers.len(), instance.horizon as usize);
    let horizon = instance.horizon;
    let mut vars: Vec<Variable> = Vec::new();
    let mut declare = |v: Variable| {
        vars.push(v);
        VarId(vars.len() - 1)
    };

    let mut y = Vec::with_capacity(nj * 2);
    for ch in &instance.chargers {
        for k in Company::ALL {
            y.push(declare(Variable::binary(format!("y_{}_{}", ch.id, k))));
        }
    }
    let mut x = vec![VarId(0); ni * nj * nt];
    let mut start = x.clone();
    let mut end = x.clone();
    let mut ts = Vec::with_capacity(ni);
    let mut tf = Vec::with_capacity(ni);
    let idx = |i: usize, j: usize, t: usize| (i * nj + j) * nt + t;
    for (i, ev) in instance.evs.iter().enumerate() {
        for (j, ch) in instance.chargers.iter().enumerate() {
            for t in 0..nt {
                x[idx(i, j, t)] = declare(Variable::binary(format!("x_{}_{}_{}", ev.id, ch.id, t + 1)));
            }
        }
        for (j, ch) in instance.chargers.iter().enumerate() {
            for t in 0..nt {
                start[idx(i, j, t)] = declare(Variable::binary(format!("xs_{}_{}_{}", ev.id, ch.id, t + 1)));
            }
        }
        for (j, ch) in instance.chargers.iter().enumerate() {
            for t in 0..nt {
                end[idx(i, j, t)] = declare(Variable::binary(format!("xe_{}_{}_{}", ev.id, ch.id, t + 1)));
            }
        }
        ts.push(declare(Variable::integer(format!("ts_{}", ev.id), 0, horizon - 1)));
        tf.push(declare(Variable::integer(format!("tf_{}", ev.id), 1, horizon)));
    }
    let mut u = Vec::with_capacity(ni * nj * nt * 2);
    for ev in &instance.evs {
        for ch in &instance.chargers {
            for t in 0..nt {
                for k in Company::ALL {
                    u.push(declare(Variable::binary(format!(
                        "u_{}_{}_{}_{}",
                        ev.id,
                        ch.id,
                        t + 1,
                        k
                    ))));
                }
            }
        }
    }
    let map = VarMap {
        ni,
        nj,
        nt,
        y,
        x,
        start,
        end,
        ts,
        tf,
        u,
    };

    let mut rows: Vec<Constraint> = Vec::new();
    let mut row = |name: String, expr: LinearExpression, sense: Sense, rhs: i64| {
        rows.push(Constraint::new(name, expr, sense, rhs));
    };
    let e = |terms: &[(VarId, i64)]| LinearExpression::from_terms(terms.iter().copied());

    for (i, ev) in instance.evs.iter().enumerate() {
        let id = &ev.id;
        for (j, ch) in instance.chargers.iter().enumerate() {
            for t in 0..nt {
                let tag = format!("[{id},{},{}]", ch.id, t + 1);
                // start indicator: xs^t >= x^t - x^{t-1}
                let mut s = e(&[(map.start(i, j, t), 1), (map.x(i, j, t), -1)]);
                if t > 0 {
                    s.add_term(map.x(i, j, t - 1), 1);
                }
                row(format!("continuity-start{tag}"), s, Sense::Ge, 0);
                // end indicator: xe^t >= x^t - x^{t+1}
                let mut f = e(&[(map.end(i, j, t), 1), (map.x(i, j, t), -1)]);
                if t + 1 < nt {
                    f.add_term(map.x(i, j, t + 1), 1);
                }
                row(format!("continuity-end{tag}"), f, Sense::Ge, 0);
            }
        }
        let all = |family: &[VarId]| -> LinearExpression {
            LinearExpression::from_terms(
                (0..nj)
                    .flat_map(|j| (0..nt).map(move |t| (j, t)))
                    .map(|(j, t)| (family[idx(i, j, t)], 1)),
            )
        };
        row(format!("single-session-start[{id}]"), all(&map.start), Sense::Eq, 1);
        row(format!("single-session-end[{id}]"), all(&map.end), Sense::Eq, 1);
        for (j, ch) in instance.chargers.iter().enumerate() {
            let mut same = LinearExpression::new();
            for t in 0..nt {
                same.add_term(map.start(i, j, t), 1);
                same.add_term(map.end(i, j, t), -1);
            }
            row(format!("single-session-charger[{id},{}]", ch.id), same, Sense::Eq, 0);
        }
        // t^s = Σ xs (τ-1), t^f = Σ xe τ
        let mut ts_def = e(&[(map.ts[i], 1)]);
        let mut tf_def = e(&[(map.tf[i], 1)]);
        let mut duration = e(&[(map.tf[i], -1), (map.ts[i], 1)]);
        let mut energy = LinearExpression::new();
        for j in 0..nj {
            for t in 0..nt {
                ts_def.add_term(map.start(i, j, t), -(t as i64));
                tf_def.add_term(map.end(i, j, t), -(t as i64 + 1));
                duration.add_term(map.x(i, j, t), 1);
                energy.add_term(map.x(i, j, t), instance.charge_rate[i][j]);
            }
        }
        row(format!("time-linkage-start[{id}]"), ts_def, Sense::Eq, 0);
        row(format!("time-linkage-end[{id}]"), tf_def, Sense::Eq, 0);
        row(format!("time-linkage-duration[{id}]"), duration, Sense::Eq, 0);
        row(
            format!("time-window-earliest[{id}]"),
            e(&[(map.ts[i], 1)]),
            Sense::Ge,
            ev.earliest,
        );
        row(
            format!("time-window-order[{id}]"),
            e(&[(map.ts[i], 1), (map.tf[i], -1)]),
            Sense::Le,
            0,
        );
        row(
            format!("time-window-latest[{id}]"),
            e(&[(map.tf[i], 1)]),
            Sense::Le,
            ev.latest,
        );
        row(format!("demand-min[{id}]"), energy.clone(), Sense::Ge, ev.demand_min);
        row(format!("demand-max[{id}]"), energy, Sense::Le, ev.demand_max);
    }
    for (j, ch) in instance.chargers.iter().enumerate() {
        for t in 0..nt {
            let occupancy = LinearExpression::from_terms((0..ni).map(|i| (map.x(i, j, t), 1)));
            if ni > 0 {
                row(
                    format!("charger-capacity[{},{}]", ch.id, t + 1),
                    occupancy,
                    Sense::Le,
                    1,
                );
            }
        }
        row(
            format!("rental-exclusivity[{}]", ch.id),
            e(&[(map.y(j, Company::One), 1), (map.y(j, Company::Two), 1)]),
            Sense::Le,
            1,
        );
    }
    for (i, ev) in instance.evs.iter().enumerate() {
        for (j, ch) in instance.chargers.iter().enumerate() {
            for t in 0..nt {
                let tag = format!("[{},{},{}]", ev.id, ch.id, t + 1);
                row(
                    format!("rented-only{tag}"),
                    e(&[
                        (map.x(i, j, t), 1),
                        (map.y(j, Company::One), -1),
                        (map.y(j, Company::Two), -1),
                    ]),
                    Sense::Le,
                    0,
                );
                for k in Company::ALL {
                    let (uu, xx, yy) = (map.u(i, j, t, k), map.x(i, j, t), map.y(j, k));
                    row(
                        format!("linearization-x{tag}{k}"),
                        e(&[(uu, 1), (xx, -1)]),
                        Sense::Le,
                        0,
                    );
                    row(
                        format!("linearization-y{tag}{k}"),
                        e(&[(uu, 1), (yy, -1)]),
                        Sense::Le,
                        0,
                    );
                    row(
                        format!("linearization-xy{tag}{k}"),
                        e(&[(uu, 1), (xx, -1), (yy, -1)]),
                        Sense::Ge,
                        -1,
                    );
                }
            }
        }
    }

    let objective = |k: Company| -> LinearExpression {
        let mut z = LinearExpression::new();
        for (j, ch) in instance.chargers.iter().enumerate() {
            z.add_term(map.y(j, k), ch.rental_fee[k.index()]);
        }
        for i in instance.fleet(k) {
            let ev = &instance.evs[i];
            for j in 0..nj {
                let rate = instance.charge_rate[i][j];
                for t in 0..nt {
                    z.add_term(map.u(i, j, t, k), instance.own_energy_fee[j][t] * rate);
                    z.add_term(map.u(i, j, t, k.other()), instance.collab_energy_fee[j][t] * rate);
                    z.add_term(map.start(i, j, t), instance.travel_cost[i][j]);
                }
            }
            z.add_term(map.ts[i], ev.value_of_time);
            z.add_constant(-ev.value_of_time * ev.earliest);
        }
        z
    };
    let (z1, z2) = (objective(Company::One), objective(Company::Two));
    let program = BiObjectiveProgram::new(vars, rows, z1, z2)?;
    Ok(ChargingModel { program, vars: map })
}

/// One EV's charging session; active intervals are `start+1 ..= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Session {
    pub ev: usize,
    pub charger: usize,
    pub start: i64,
    pub end: i64,
    /// Energy delivered, recomputed from the rate table.
    pub energy: i64,
}

impl Session {
    pub fn intervals(&self) -> impl Iterator<Item = i64> {
        self.start + 1..=self.end
    }
}

/// Rentals as `(charger, company)` pairs plus one session per EV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub rentals: Vec<(usize, Company)>,
    pub sessions: Vec<Session>,
}

/// A failed check on a decoded schedule, e.g. `time-window: v1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub family: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.family, self.detail)
    }
}

impl Schedule {
    pub fn renter(&self, charger: usize) -> Option<Company> {
        self.rentals.iter().find(|(j, _)| *j == charger).map(|&(_, k)| k)
    }

    /// `[charger][interval-1]` → EVs charging there.
    pub fn occupancy(&self, instance: &ChargingInstance) -> Vec<Vec<Vec<usize>>> {
        let nt = instance.horizon.max(0) as usize;
        let mut occ = vec![vec![Vec::new(); nt]; instance.chargers.len()];
        for s in &self.sessions {
            for tau in s.intervals() {
                if let Some(cell) = occ.get_mut(s.charger).and_then(|row| row.get_mut(tau as usize - 1)) {
                    cell.push(s.ev);
                }
            }
        }
        occ
    }

    pub fn to_json(&self, instance: &ChargingInstance) -> String {
        let doc = ScheduleDoc {
            instance: instance.name.clone(),
            rentals: self
                .rentals
                .iter()
                .map(|&(j, k)| RentalDoc {
                    charger: instance.chargers[j].id.clone(),
                    company: k,
                })
                .collect(),
            sessions: self
                .sessions
                .iter()
                .map(|s| SessionDoc {
                    ev: instance.evs[s.ev].id.clone(),
                    charger: instance.chargers[s.charger].id.clone(),
                    start: s.start,
                    end: s.end,
                    energy: s.energy,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("schedule serializes")
    }

    pub fn from_json(text: &str, instance: &ChargingInstance) -> Result<Self, ChargingError> {
        let doc: ScheduleDoc = serde_json::from_str(text)?;
        let evs: HashMap<&str, usize> = instance
            .evs
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let chargers: HashMap<&str, usize> = instance
            .chargers
            .iter()
            .enumerate()
            .map(|(j, c)| (c.id.as_str(), j))
            .collect();
        let charger = |id: &str| {
            chargers
                .get(id)
                .copied()
                .ok_or_else(|| ChargingError::InvalidSchedule(format!("unknown charger `{id}`")))
        };
        let rentals = doc
            .rentals
            .iter()
            .map(|r| Ok((charger(&r.charger)?, r.company)))
            .collect::<Result<Vec<_>, ChargingError>>()?;
        let sessions = doc
            .sessions
            .iter()
            .map(|s| {
                let ev = *evs
                    .get(s.ev.as_str())
                    .ok_or_else(|| ChargingError::InvalidSchedule(format!("unknown EV `{}`", s.ev)))?;
                Ok(Session {
                    ev,
                    charger: charger(&s.charger)?,
                    start: s.start,
                    end: s.end,
                    energy: s.energy,
                })
            })
            .collect::<Result<Vec<_>, ChargingError>>()?;
        Ok(Schedule { rentals, sessions })
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    instance: String,
    rentals: Vec<RentalDoc>,
    sessions: Vec<SessionDoc>,
}

#[derive(Serialize, Deserialize)]
struct RentalDoc {
    charger: String,
    company: Company,
}

#[derive(Serialize, Deserialize)]
struct SessionDoc {
    ev: String,
    charger: String,
    start: i64,
    end: i64,
    energy: i64,
}

/// Re-checks a schedule against the model's rules. An empty list means
/// the schedule is valid.
pub fn validate_schedule(schedule: &Schedule, instance: &ChargingInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |family: &'static str, detail: String| out.push(Violation { family, detail });
    let nj = instance.chargers.len();
    let charger_id = |j: usize| instance.chargers.get(j).map_or("?", |c| c.id.as_str());

    let mut per_ev = vec![0usize; instance.evs.len()];
    for s in &schedule.sessions {
        if let Some(n) = per_ev.get_mut(s.ev) {
            *n += 1;
        }
    }
    for (i, &n) in per_ev.iter().enumerate() {
        if n != 1 {
            push("single-session", instance.evs[i].id.clone());
        }
    }

    let mut renters: Vec<Vec<Company>> = vec![Vec::new(); nj];
    for &(j, k) in &schedule.rentals {
        if let Some(list) = renters.get_mut(j) {
            list.push(k);
        }
    }
    for (j, list) in renters.iter().enumerate() {
        if list.len() > 1 {
            push("rental-exclusivity", format!("charger {}", charger_id(j)));
        }
    }

    for s in &schedule.sessions {
        let Some(ev) = instance.evs.get(s.ev) else {
            continue;
        };
        if s.charger >= nj || s.end <= s.start || s.start < 0 || s.end > instance.horizon {
            push("continuity", ev.id.clone());
            continue;
        }
        if s.start < ev.earliest || s.end > ev.latest {
            push("time-window", ev.id.clone());
        }
        let energy = instance.charge_rate[s.ev][s.charger] * (s.end - s.start);
        if energy < ev.demand_min || energy > ev.demand_max {
            push("demand", ev.id.clone());
        }
        if renters[s.charger].is_empty() {
            push("rented-only", format!("{} at charger {}", ev.id, charger_id(s.charger)));
        }
    }

    for (j, row) in schedule.occupancy(instance).iter().enumerate() {
        for (t, evs) in row.iter().enumerate() {
            if evs.len() > 1 {
                push(
                    "charger-capacity",
                    format!("charger {}, interval {}", charger_id(j), t + 1),
                );
            }
        }
    }
    out
}

/// Cost of `company` under `schedule`: rentals, energy at own or
/// collaborative rates, one travel cost per session and waiting time.
pub fn company_cost(schedule: &Schedule, instance: &ChargingInstance, company: Company) -> Result<i64, ChargingError> {
    let mut cost: i64 = schedule
        .rentals
        .iter()
        .filter(|(_, k)| *k == company)
        .map(|&(j, _)| instance.chargers[j].rental_fee[company.index()])
        .sum();
    for s in schedule
        .sessions
        .iter()
        .filter(|s| instance.evs[s.ev].company == company)
    {
        let ev = &instance.evs[s.ev];
        let renter = schedule.renter(s.charger).ok_or_else(|| {
            ChargingError::InvalidSchedule(format!(
                "EV {} charges at unrented charger {}",
                ev.id, instance.chargers[s.charger].id
            ))
        })?;
        let fees = if renter == company {
            &instance.own_energy_fee[s.charger]
        } else {
            &instance.collab_energy_fee[s.charger]
        };
        let rate = instance.charge_rate[s.ev][s.charger];
        cost += s.intervals().map(|tau| fees[tau as usize - 1] * rate).sum::<i64>();
        cost += instance.travel_cost[s.ev][s.charger];
        cost += ev.value_of_time * (s.start - ev.earliest);
    }
    Ok(cost)
}

pub fn decode_schedule(assignment: &Assignment, instance: &ChargingInstance) -> Result<Schedule, ChargingError> {
    build_charging_program(instance)?.decode(assignment, instance)
}

/// Each company's optimal cost operating alone: only its own EVs, only
/// its own rentals, no access to the other fleet's chargers.
pub fn noncollab_point(
    instance: &ChargingInstance,
    config: &SolverConfig,
) -> Result<ParticipationPoint, ChargingError> {
    let mut costs = [0i64; 2];
    for k in Company::ALL {
        let sub = instance.restricted_to(k);
        if sub.evs.is_empty() {
            continue;
        }
        let model = build_charging_program(&sub)?;
        let extra = model.forbid_rentals(k.other());
        let out = solve_min(model.program(), k.objective(), &extra, config)?;
        costs[k.index()] = match out.status {
            SolveStatus::Optimal => out.value.expect("optimal outcome carries a value"),
            SolveStatus::Infeasible => {
                return Err(ChargingError::StandaloneInfeasible {
                    company: k,
                    evs: sub.evs.iter().map(|e| e.id.clone()).collect(),
                })
            }
            SolveStatus::NodeLimit => return Err(ChargingError::NodeLimit(k)),
        };
    }
    Ok(ParticipationPoint {
        z1_non: costs[0],
        z2_non: costs[1],
    })
}
