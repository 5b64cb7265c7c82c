//! Exact single-objective minimization by depth-first branch and bound.
//!
//! The search branches on variables in declaration order, smallest value
//! first, and prunes with interval bound propagation over every linear row.
//! The objective enters as one more row, `objective <= incumbent - 1`, so
//! the fixed-part plus best-case free-part lower bound falls out of the
//! same propagation step.

use thiserror::Error;

use crate::model::{
    Assignment, BiObjectiveProgram, Constraint, CriterionPoint, LinearExpression, ModelError, Objective, ObjectiveBox,
    Sense,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("malformed constraint `{name}`: {source}")]
    Structural { name: String, source: ModelError },
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Offset used to emulate strict inequalities on objective values.
    pub zeta: i64,
    /// Maximum search nodes per single-objective solve.
    pub node_limit: Option<u64>,
    /// Branch on the first unfixed variable in declaration order. When off,
    /// the unfixed variable with the smallest domain goes first (ties by
    /// declaration order).
    pub declaration_order: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            zeta: 1,
            node_limit: None,
            declaration_order: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.zeta < 1 {
            return Err(SolverError::Config(format!("zeta must be >= 1, got {}", self.zeta)));
        }
        if self.node_limit == Some(0) {
            return Err(SolverError::Config("node limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub assignment: Option<Assignment>,
    pub value: Option<i64>,
    pub nodes_explored: u64,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

const NO_LO: i128 = i128::MIN;
const NO_HI: i128 = i128::MAX;

/// `lo <= Σ coef · x <= hi`, with the expression constant already folded.
#[derive(Debug, Clone)]
struct Row {
    terms: Vec<(u32, i64)>,
    lo: i128,
    hi: i128,
}

impl Row {
    fn from_constraint(c: &Constraint) -> Self {
        let rhs = c.rhs as i128 - c.expression.constant_term() as i128;
        let (lo, hi) = match c.sense {
            Sense::Le => (NO_LO, rhs),
            Sense::Ge => (rhs, NO_HI),
            Sense::Eq => (rhs, rhs),
        };
        Self {
            terms: c.expression.terms().iter().map(|&(v, a)| (v.0 as u32, a)).collect(),
            lo,
            hi,
        }
    }
}

fn floor_div(n: i128, d: i128) -> i128 {
    let q = n / d;
    if (n % d != 0) && ((n < 0) != (d < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -floor_div(-n, d)
}

struct Search<'a> {
    rows: Vec<Row>,
    var_rows: Vec<Vec<u32>>,
    lb: Vec<i64>,
    ub: Vec<i64>,
    trail: Vec<(u32, i64, i64)>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    objective_row: usize,
    config: &'a SolverConfig,
}

impl<'a> Search<'a> {
    fn new(
        program: &BiObjectiveProgram,
        objective: &LinearExpression,
        extra: &[Constraint],
        config: &'a SolverConfig,
    ) -> Self {
        let n = program.num_variables();
        let mut rows: Vec<Row> = program
            .constraints()
            .iter()
            .chain(extra.iter())
            .map(Row::from_constraint)
            .collect();
        let objective_row = rows.len();
        rows.push(Row {
            terms: objective.terms().iter().map(|&(v, a)| (v.0 as u32, a)).collect(),
            lo: NO_LO,
            hi: NO_HI,
        });
        let mut var_rows = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &(v, _) in &row.terms {
                var_rows[v as usize].push(r as u32);
            }
        }
        let queued = vec![false; rows.len()];
        Self {
            rows,
            var_rows,
            lb: program.variables().iter().map(|v| v.lower).collect(),
            ub: program.variables().iter().map(|v| v.upper).collect(),
            trail: Vec::new(),
            queue: Vec::new(),
            queued,
            objective_row,
            config,
        }
    }

    fn enqueue(&mut self, r: u32) {
        if !self.queued[r as usize] {
            self.queued[r as usize] = true;
            self.queue.push(r);
        }
    }

    fn enqueue_var(&mut self, v: u32) {
        for i in 0..self.var_rows[v as usize].len() {
            let r = self.var_rows[v as usize][i];
            self.enqueue(r);
        }
    }

    fn clear_queue(&mut self) {
        for r in self.queue.drain(..) {
            self.queued[r as usize] = false;
        }
    }

    fn set_bounds(&mut self, v: u32, lo: i64, hi: i64) -> bool {
        let i = v as usize;
        if lo == self.lb[i] && hi == self.ub[i] {
            return true;
        }
        self.trail.push((v, self.lb[i], self.ub[i]));
        self.lb[i] = lo;
        self.ub[i] = hi;
        if lo > hi {
            return false;
        }
        self.enqueue_var(v);
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, lo, hi) = self.trail.pop().expect("trail above mark");
            self.lb[v as usize] = lo;
            self.ub[v as usize] = hi;
        }
    }

    /// Runs bound propagation to a fixpoint. `false` on a proven conflict.
    fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            self.queued[r as usize] = false;
            if !self.propagate_row(r as usize) {
                self.clear_queue();
                return false;
            }
        }
        true
    }

    fn propagate_row(&mut self, r: usize) -> bool {
        let (lo, hi) = (self.rows[r].lo, self.rows[r].hi);
        let mut min_act: i128 = 0;
        let mut max_act: i128 = 0;
        let mut max_span: i128 = 0;
        for &(v, a) in &self.rows[r].terms {
            let (l, u) = (self.lb[v as usize] as i128, self.ub[v as usize] as i128);
            let a = a as i128;
            if a > 0 {
                min_act += a * l;
                max_act += a * u;
            } else {
                min_act += a * u;
                max_act += a * l;
            }
            max_span = max_span.max(a.abs() * (u - l));
        }
        if min_act > hi || max_act < lo {
            return false;
        }
        let slack_hi = if hi == NO_HI { None } else { Some(hi - min_act) };
        let slack_lo = if lo == NO_LO { None } else { Some(max_act - lo) };
        // nothing to tighten when no single term can exceed either slack
        if slack_hi.is_none_or(|s| s >= max_span) && slack_lo.is_none_or(|s| s >= max_span) {
            return true;
        }
        for t in 0..self.rows[r].terms.len() {
            let (v, a) = self.rows[r].terms[t];
            let i = v as usize;
            let (l, u) = (self.lb[i] as i128, self.ub[i] as i128);
            let a128 = a as i128;
            let mut new_l = l;
            let mut new_u = u;
            if a > 0 {
                if let Some(s) = slack_hi {
                    // a·x <= s + a·l
                    new_u = new_u.min(floor_div(s + a128 * l, a128));
                }
                if let Some(s) = slack_lo {
                    // a·x >= a·u - s
                    new_l = new_l.max(ceil_div(a128 * u - s, a128));
                }
            } else {
                if let Some(s) = slack_hi {
                    // a·x <= s + a·u, dividing by a < 0 flips the inequality
                    new_l = new_l.max(ceil_div(s + a128 * u, a128));
                }
                if let Some(s) = slack_lo {
                    // a·x >= a·l - s
                    new_u = new_u.min(floor_div(a128 * l - s, a128));
                }
            }
            if new_l != l || new_u != u {
                let nl = new_l.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
                let nu = new_u.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
                if !self.set_bounds(v, nl, nu) {
                    return false;
                }
            }
        }
        true
    }

    fn pick_branch_var(&self, from: usize) -> Option<usize> {
        if self.config.declaration_order {
            (from..self.lb.len()).find(|&i| self.lb[i] < self.ub[i])
        } else {
            (0..self.lb.len())
                .filter(|&i| self.lb[i] < self.ub[i])
                .min_by_key(|&i| (self.ub[i] - self.lb[i], i))
        }
    }

    fn objective_value(&self) -> i128 {
        self.rows[self.objective_row]
            .terms
            .iter()
            .map(|&(v, a)| a as i128 * self.lb[v as usize] as i128)
            .sum()
    }
}

#[derive(Debug)]
struct Frame {
    mark: usize,
    var: usize,
    value: i64,
    scan_from: usize,
    tried_upper: bool,
}

/// Minimizes `objective` over the program's constraints plus `extra`.
///
/// Status `Optimal` is a proof of global optimality; a run that hits the
/// node limit reports `NodeLimit` and no assignment.
pub fn solve_min(
    program: &BiObjectiveProgram,
    objective: Objective,
    extra: &[Constraint],
    config: &SolverConfig,
) -> Result<SolveOutcome, SolverError> {
    solve_expression(program, program.objective(objective), extra, config)
}

/// [`solve_min`] over an arbitrary linear objective on the program's variables.
pub fn solve_expression(
    program: &BiObjectiveProgram,
    objective: &LinearExpression,
    extra: &[Constraint],
    config: &SolverConfig,
) -> Result<SolveOutcome, SolverError> {
    config.validate()?;
    for c in extra {
        program
            .check_expression(&c.expression)
            .map_err(|source| SolverError::Structural {
                name: c.name.clone(),
                source,
            })?;
    }
    program
        .check_expression(objective)
        .map_err(|source| SolverError::Structural {
            name: "objective".into(),
            source,
        })?;

    let mut search = Search::new(program, objective, extra, config);
    let mut nodes: u64 = 1;
    let mut best: Option<(i128, Vec<i64>)> = None;

    for r in 0..search.rows.len() {
        search.enqueue(r as u32);
    }
    let mut stack: Vec<Frame> = Vec::new();
    let mut consistent = search.propagate();
    let mut scan_from = 0usize;

    loop {
        if consistent {
            match search.pick_branch_var(scan_from) {
                None => {
                    let value = search.objective_value();
                    best = Some((value, search.lb.clone()));
                    // require strict improvement from now on
                    search.rows[search.objective_row].hi = value - 1;
                }
                Some(var) => {
                    if config.node_limit.is_some_and(|limit| nodes >= limit) {
                        return Ok(SolveOutcome {
                            status: SolveStatus::NodeLimit,
                            assignment: None,
                            value: None,
                            nodes_explored: nodes,
                        });
                    }
                    nodes += 1;
                    let value = search.lb[var];
                    stack.push(Frame {
                        mark: search.trail.len(),
                        var,
                        value,
                        scan_from: var,
                        tried_upper: false,
                    });
                    let ok = search.set_bounds(var as u32, value, value);
                    search.enqueue(search.objective_row as u32);
                    consistent = ok && search.propagate();
                    if !ok {
                        search.clear_queue();
                    }
                    scan_from = var;
                    continue;
                }
            }
        }

        // backtrack to the deepest frame with an untried alternative
        loop {
            let Some(frame) = stack.last_mut() else {
                let nodes_explored = nodes;
                return Ok(match best {
                    Some((value, values)) => {
                        let assignment = Assignment::from_dense(&values);
                        let value = value + objective.constant_term() as i128;
                        SolveOutcome {
                            status: SolveStatus::Optimal,
                            assignment: Some(assignment),
                            value: Some(value as i64),
                            nodes_explored,
                        }
                    }
                    None => SolveOutcome {
                        status: SolveStatus::Infeasible,
                        assignment: None,
                        value: None,
                        nodes_explored,
                    },
                });
            };
            if frame.tried_upper {
                let mark = frame.mark;
                stack.pop();
                search.undo_to(mark);
                continue;
            }
            frame.tried_upper = true;
            let (mark, var, value, from) = (frame.mark, frame.var, frame.value, frame.scan_from);
            search.undo_to(mark);
            if config.node_limit.is_some_and(|limit| nodes >= limit) {
                return Ok(SolveOutcome {
                    status: SolveStatus::NodeLimit,
                    assignment: None,
                    value: None,
                    nodes_explored: nodes,
                });
            }
            nodes += 1;
            let ub = search.ub[var];
            let ok = search.set_bounds(var as u32, value + 1, ub);
            search.enqueue(search.objective_row as u32);
            consistent = ok && search.propagate();
            if !ok {
                search.clear_queue();
            }
            scan_from = from;
            break;
        }
    }
}

/// Result of a two-stage lexicographic minimization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexOutcome {
    pub status: SolveStatus,
    pub point: Option<CriterionPoint>,
    pub assignment: Option<Assignment>,
    pub nodes_explored: u64,
    pub solver_calls: u32,
}

/// Rows bounding both objective expressions to `region`.
pub fn region_constraints(program: &BiObjectiveProgram, region: &ObjectiveBox) -> Vec<Constraint> {
    let mut rows = Vec::with_capacity(4);
    for objective in [Objective::Z1, Objective::Z2] {
        let expr = program.objective(objective);
        let tag = objective.index();
        if let Some(min) = region.min(objective) {
            rows.push(Constraint::new(format!("z{tag}_min"), expr.clone(), Sense::Ge, min));
        }
        if let Some(max) = region.max(objective) {
            rows.push(Constraint::new(format!("z{tag}_max"), expr.clone(), Sense::Le, max));
        }
    }
    rows
}

/// Minimizes `first`, then the other objective with `first` held at its
/// optimum by an equality row, both inside `region`.
pub fn lexmin(
    program: &BiObjectiveProgram,
    first: Objective,
    region: &ObjectiveBox,
    config: &SolverConfig,
) -> Result<LexOutcome, SolverError> {
    let mut extra = region_constraints(program, region);
    let stage_one = solve_min(program, first, &extra, config)?;
    let mut nodes = stage_one.nodes_explored;
    let Some(best_first) = stage_one.value.filter(|_| stage_one.is_optimal()) else {
        return Ok(LexOutcome {
            status: stage_one.status,
            point: None,
            assignment: None,
            nodes_explored: nodes,
            solver_calls: 1,
        });
    };
    extra.push(Constraint::new(
        format!("z{}_fixed", first.index()),
        program.objective(first).clone(),
        Sense::Eq,
        best_first,
    ));
    let stage_two = solve_min(program, first.other(), &extra, config)?;
    nodes += stage_two.nodes_explored;
    let outcome = match stage_two.status {
        SolveStatus::Optimal => {
            let assignment = stage_two.assignment.expect("optimal outcome carries an assignment");
            let point = program.point(&assignment).expect("solver assignments are complete");
            LexOutcome {
                status: SolveStatus::Optimal,
                point: Some(point),
                assignment: Some(assignment),
                nodes_explored: nodes,
                solver_calls: 2,
            }
        }
        status => LexOutcome {
            status,
            point: None,
            assignment: None,
            nodes_explored: nodes,
            solver_calls: 2,
        },
    };
    Ok(outcome)
}
