//! Criterion space search over the participation region: the balanced box
//! method and its two bounding variants, plus the NDP/Gap/CTS metrics and
//! frontier CSV files.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Assignment, BiObjectiveProgram, CriterionPoint, Objective, ObjectiveBox, Rectangle};
use crate::solver::{self, region_constraints, solve_expression, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum FrontierError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("cannot normalize: {0}")]
    Normalization(String),
    #[error("solver hit the node limit after {calls} calls; raise --node-limit or shrink the instance")]
    NodeLimit { calls: u64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("frontier csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("frontier csv: {0}")]
    Format(String),
}

/// A tolerance range in hundredths of a percent: `"3"` is 3% and is
/// stored as 300.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tolerance(u32);

impl Tolerance {
    pub const ZERO: Tolerance = Tolerance(0);

    pub const fn from_hundredths(h: u32) -> Self {
        Tolerance(h)
    }

    pub const fn from_percent(p: u32) -> Self {
        Tolerance(p * 100)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn fraction(self) -> f64 {
        self.0 as f64 / 10_000.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl FromStr for Tolerance {
    type Err = FrontierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_end_matches('%');
        let bad = || {
            FrontierError::Parameter(format!(
                "epsilon `{s}` must be a non-negative percentage with at most two decimals"
            ))
        };
        if t.starts_with('-') {
            return Err(FrontierError::Parameter(format!(
                "epsilon must be non-negative, got {s}"
            )));
        }
        let (whole, frac) = t.split_once('.').unwrap_or((t, ""));
        if whole.is_empty() && frac.is_empty() || frac.len() > 2 {
            return Err(bad());
        }
        let digits = |d: &str| d.is_empty() || d.bytes().all(|b| b.is_ascii_digit());
        if !digits(whole) || !digits(frac) {
            return Err(bad());
        }
        let whole: u32 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let frac: u32 = format!("{frac:0<2}").parse().map_err(|_| bad())?;
        whole
            .checked_mul(100)
            .and_then(|w| w.checked_add(frac))
            .map(Tolerance)
            .ok_or_else(bad)
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (whole, frac) = (self.0 / 100, self.0 % 100);
        match frac {
            0 => write!(f, "{whole}"),
            n if n % 10 == 0 => write!(f, "{whole}.{}", n / 10),
            n => write!(f, "{whole}.{n:02}"),
        }
    }
}

impl TryFrom<String> for Tolerance {
    type Error = FrontierError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Tolerance> for String {
    fn from(t: Tolerance) -> String {
        t.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bbox,
    B3m1,
    B3m2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Bbox, Method::B3m1, Method::B3m2];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bbox => "bbox",
            Method::B3m1 => "b3m1",
            Method::B3m2 => "b3m2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = FrontierError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bbox" => Ok(Method::Bbox),
            "b3m1" => Ok(Method::B3m1),
            "b3m2" => Ok(Method::B3m2),
            other => Err(FrontierError::Parameter(format!(
                "unknown method `{other}` (bbox, b3m1, b3m2)"
            ))),
        }
    }
}

/// Per-objective closeness margins in minor units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosenessMargins {
    pub sigma1: i64,
    pub sigma2: i64,
    pub epsilon: Tolerance,
}

/// Each company's stand-alone cost; collaborative points must not exceed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationPoint {
    pub z1_non: i64,
    pub z2_non: i64,
}

impl ParticipationPoint {
    pub fn region(self) -> ObjectiveBox {
        ObjectiveBox::upper(self.z1_non, self.z2_non)
    }

    pub fn as_point(self) -> CriterionPoint {
        CriterionPoint::new(self.z1_non, self.z2_non)
    }
}

fn scale_rounded(value: i64, eps: Tolerance) -> i64 {
    // half away from zero on |value| * eps
    let num = (value as i128).abs() * eps.0 as i128;
    ((num * 2 + 10_000) / 20_000) as i64
}

/// `σ1 = ε·z1^T`, `σ2 = ε·z2^B`, rounded to the nearest minor unit.
/// Magnitudes are used so margins stay non-negative on programs with
/// negative objective values.
pub fn compute_margins(epsilon: Tolerance, z_top: CriterionPoint, z_bottom: CriterionPoint) -> ClosenessMargins {
    ClosenessMargins {
        sigma1: scale_rounded(z_top.z1, epsilon),
        sigma2: scale_rounded(z_bottom.z2, epsilon),
        epsilon,
    }
}

pub fn strictly_close(zn: CriterionPoint, existing: &[CriterionPoint], m: &ClosenessMargins) -> bool {
    existing
        .iter()
        .any(|e| (zn.z1 - e.z1).abs() <= m.sigma1 && (zn.z2 - e.z2).abs() <= m.sigma2)
}

pub fn relaxed_close(zn: CriterionPoint, existing: &[CriterionPoint], m: &ClosenessMargins) -> bool {
    existing
        .iter()
        .any(|e| (zn.z1 - e.z1).abs() <= m.sigma1 || (zn.z2 - e.z2).abs() <= m.sigma2)
}

/// Horizontal split at `mid = floor((z2^T + z2^B) / 2)` into the top and
/// bottom halves. `None` for a degenerate rectangle.
pub fn split_rectangle(r: Rectangle) -> Option<(Rectangle, Rectangle)> {
    if r.is_degenerate() {
        return None;
    }
    let (t, b) = (r.top_left(), r.bottom_right());
    let mid = midline(t, b);
    let top = Rectangle::new(t, CriterionPoint::new(b.z1, mid))?;
    let bottom = Rectangle::new(CriterionPoint::new(t.z1, mid), b)?;
    Some((top, bottom))
}

fn midline(t: CriterionPoint, b: CriterionPoint) -> i64 {
    (t.z2 + b.z2).div_euclid(2)
}

/// Moves both corners inward by the margins. `None` when the margins cover
/// the whole rectangle.
pub fn shrink_rectangle(r: Rectangle, m: &ClosenessMargins) -> Option<Rectangle> {
    let (t, b) = (r.top_left(), r.bottom_right());
    Rectangle::new(
        CriterionPoint::new(t.z1 + m.sigma1, t.z2 - m.sigma2),
        CriterionPoint::new(b.z1 - m.sigma1, b.z2 + m.sigma2),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontierStatus {
    Complete,
    /// The participation region is empty: no point makes both companies
    /// at least as well off as operating alone.
    NoMutuallyBeneficialCollaboration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierPoint {
    pub point: CriterionPoint,
    pub assignment: Assignment,
}

#[derive(Debug, Clone)]
pub struct FrontierResult {
    pub method: Method,
    pub epsilon: Tolerance,
    pub status: FrontierStatus,
    /// Sorted by `z1` ascending.
    pub points: Vec<FrontierPoint>,
    pub margins: ClosenessMargins,
    /// Points generated by the search and then dropped as close.
    pub discarded: Vec<CriterionPoint>,
    /// Single-objective solves; a lexmin counts as up to two.
    pub solver_calls: u64,
    pub nodes_explored: u64,
    pub rectangles_processed: u64,
    pub wall_time: Duration,
}

impl FrontierResult {
    pub fn criterion_points(&self) -> Vec<CriterionPoint> {
        self.points.iter().map(|p| p.point).collect()
    }

    pub fn ndp(&self) -> usize {
        self.points.len()
    }

    pub fn endpoints(&self) -> Option<(CriterionPoint, CriterionPoint)> {
        Some((self.points.first()?.point, self.points.last()?.point))
    }
}

/// Strictly increasing `z1` and strictly decreasing `z2`.
pub fn is_ordered_frontier(points: &[CriterionPoint]) -> bool {
    points.windows(2).all(|w| w[0].z1 < w[1].z1 && w[0].z2 > w[1].z2)
}

/// Frontier endpoints inside the participation region.
#[derive(Debug, Clone)]
pub struct InitialBox {
    pub top: FrontierPoint,
    pub bottom: FrontierPoint,
    pub solver_calls: u64,
}

/// Counts solver work and turns non-optimal statuses into options or errors.
struct Explorer<'a> {
    program: &'a BiObjectiveProgram,
    config: &'a SolverConfig,
    calls: u64,
    nodes: u64,
}

impl<'a> Explorer<'a> {
    fn new(program: &'a BiObjectiveProgram, config: &'a SolverConfig) -> Result<Self, FrontierError> {
        config.validate()?;
        Ok(Self {
            program,
            config,
            calls: 0,
            nodes: 0,
        })
    }

    fn lexmin(&mut self, first: Objective, region: &ObjectiveBox) -> Result<Option<FrontierPoint>, FrontierError> {
        let out = solver::lexmin(self.program, first, region, self.config)?;
        self.calls += u64::from(out.solver_calls);
        self.nodes += out.nodes_explored;
        match out.status {
            SolveStatus::Optimal => Ok(Some(FrontierPoint {
                point: out.point.expect("optimal lexmin has a point"),
                assignment: out.assignment.expect("optimal lexmin has an assignment"),
            })),
            SolveStatus::Infeasible => Ok(None),
            SolveStatus::NodeLimit => Err(FrontierError::NodeLimit { calls: self.calls }),
        }
    }

    fn in_rect(&mut self, first: Objective, r: Rectangle) -> Result<Option<FrontierPoint>, FrontierError> {
        self.lexmin(first, &ObjectiveBox::from(r))
    }

    /// A feasible point dominating `p`, if any.
    fn dominator(&mut self, p: CriterionPoint) -> Result<Option<CriterionPoint>, FrontierError> {
        let sum = self.program.objective(Objective::Z1).clone();
        let mut sum = sum;
        for &(v, c) in self.program.objective(Objective::Z2).terms() {
            sum.add_term(v, c);
        }
        sum.add_constant(self.program.objective(Objective::Z2).constant_term());
        let rows = region_constraints(self.program, &ObjectiveBox::upper(p.z1, p.z2));
        let out = solve_expression(self.program, &sum, &rows, self.config)?;
        self.calls += 1;
        self.nodes += out.nodes_explored;
        match out.status {
            SolveStatus::Optimal => {
                let d = self
                    .program
                    .point(out.assignment.as_ref().expect("optimal outcome has an assignment"))?;
                Ok((d != p && d.z1 + d.z2 < p.z1 + p.z2).then_some(d))
            }
            SolveStatus::Infeasible => Ok(None),
            SolveStatus::NodeLimit => Err(FrontierError::NodeLimit { calls: self.calls }),
        }
    }

    /// Lexmin inside a box that may leave out parts of the region between
    /// the rectangle's corners. A lexmin there can be dominated by a point in
    /// the excluded bands; such results are rejected and the box is cut
    /// below the dominator until a non-dominated point or nothing is left.
    fn guarded_lexmin(&mut self, first: Objective, r: Rectangle) -> Result<Option<FrontierPoint>, FrontierError> {
        let (f, o) = (first, first.other());
        let mut region = ObjectiveBox::from(r);
        loop {
            let Some(found) = self.lexmin(f, &region)? else {
                return Ok(None);
            };
            let Some(d) = self.dominator(found.point)? else {
                return Ok(Some(found));
            };
            if region.min(o).is_some_and(|lo| d.get(o) < lo) {
                // everything left has o > d_o and f >= found_f >= d_f
                return Ok(None);
            }
            let cut = d.get(o) - 1;
            match o {
                Objective::Z1 => region.z1_max = Some(cut),
                Objective::Z2 => region.z2_max = Some(cut),
            }
            if region.min(o).is_some_and(|lo| lo > cut) {
                return Ok(None);
            }
        }
    }
}

impl From<crate::model::ModelError> for FrontierError {
    fn from(e: crate::model::ModelError) -> Self {
        FrontierError::Solver(SolverError::Structural {
            name: "objective".into(),
            source: e,
        })
    }
}

/// `zT = lexmin(z1, z2)` and `zB = lexmin(z2, z1)` within the participation
/// region. `None` when the region holds no feasible point.
pub fn initial_box(
    program: &BiObjectiveProgram,
    participation: ParticipationPoint,
    config: &SolverConfig,
) -> Result<Option<InitialBox>, FrontierError> {
    let mut ex = Explorer::new(program, config)?;
    Ok(
        initial_box_with(&mut ex, participation)?.map(|(top, bottom)| InitialBox {
            top,
            bottom,
            solver_calls: ex.calls,
        }),
    )
}

fn initial_box_with(
    ex: &mut Explorer<'_>,
    participation: ParticipationPoint,
) -> Result<Option<(FrontierPoint, FrontierPoint)>, FrontierError> {
    let region = participation.region();
    let Some(top) = ex.lexmin(Objective::Z1, &region)? else {
        return Ok(None);
    };
    let bottom = ex
        .lexmin(Objective::Z2, &region)?
        .expect("region with a z1-optimum also has a z2-optimum");
    Ok(Some((top, bottom)))
}

struct Run<'a, 'b> {
    ex: &'b mut Explorer<'a>,
    zeta: i64,
    margins: ClosenessMargins,
    found: BTreeMap<CriterionPoint, Assignment>,
    discarded: Vec<CriterionPoint>,
    queue: VecDeque<Rectangle>,
}

impl Run<'_, '_> {
    fn record(&mut self, p: FrontierPoint) {
        self.found.insert(p.point, p.assignment);
    }

    fn enqueue(&mut self, t: CriterionPoint, b: CriterionPoint) {
        if let Some(r) = Rectangle::new(t, b) {
            self.queue.push_back(r);
        }
    }

    fn bbox(&mut self, r: Rectangle) -> Result<(), FrontierError> {
        let Some((_, bottom)) = split_rectangle(r) else {
            return Ok(());
        };
        let (zt, zb) = (r.top_left(), r.bottom_right());
        let mid = midline(zt, zb);
        let mut corner = CriterionPoint::new(zb.z1, mid);
        if let Some(p) = self.ex.in_rect(Objective::Z1, bottom)? {
            corner = CriterionPoint::new(p.point.z1 - self.zeta, mid);
            if p.point != zb {
                let z = p.point;
                self.record(p);
                self.enqueue(z, zb);
            }
        }
        if let Some(top) = Rectangle::new(zt, corner) {
            if let Some(q) = self.ex.in_rect(Objective::Z2, top)? {
                if q.point != zt {
                    let z = q.point;
                    self.record(q);
                    self.enqueue(zt, z);
                }
            }
        }
        Ok(())
    }

    fn b3m1(&mut self, r: Rectangle) -> Result<(), FrontierError> {
        let Some((_, bottom)) = split_rectangle(r) else {
            return Ok(());
        };
        let (zt, zb) = (r.top_left(), r.bottom_right());
        let mid = midline(zt, zb);
        let mut corner = CriterionPoint::new(zb.z1, mid);
        let mut zn1 = None;
        if let Some(p) = self.ex.in_rect(Objective::Z1, bottom)? {
            corner = CriterionPoint::new(p.point.z1 - self.zeta, mid);
            if p.point != zb {
                if strictly_close(p.point, &[zb], &self.margins) {
                    self.discarded.push(p.point);
                } else {
                    let z = p.point;
                    zn1 = Some(z);
                    self.record(p);
                    self.enqueue(z, zb);
                }
            }
        }
        let Some(top) = Rectangle::new(zt, corner) else {
            return Ok(());
        };
        let Some(q) = self.ex.in_rect(Objective::Z2, top)? else {
            return Ok(());
        };
        if q.point == zt {
            return Ok(());
        }
        if strictly_close(q.point, &[zt], &self.margins) {
            self.discarded.push(q.point);
        } else if strictly_close(q.point, &[zn1.unwrap_or(zb)], &self.margins) {
            self.discarded.push(q.point);
            if let Some(z) = zn1 {
                // keep zn1 and reopen everything between it and zT
                self.enqueue(zt, z);
            }
        } else {
            let z = q.point;
            self.record(q);
            self.enqueue(zt, z);
        }
        Ok(())
    }

    fn b3m2(&mut self, r: Rectangle) -> Result<(), FrontierError> {
        let (zt, zb) = (r.top_left(), r.bottom_right());
        let (s1, s2) = (self.margins.sigma1 + self.zeta, self.margins.sigma2 + self.zeta);
        let strict = ClosenessMargins {
            sigma1: s1,
            sigma2: s2,
            epsilon: self.margins.epsilon,
        };
        let Some(inner) = shrink_rectangle(r, &strict) else {
            return Ok(());
        };
        let (it, ib) = (inner.top_left(), inner.bottom_right());
        let mid = midline(it, ib);
        let mut corner = CriterionPoint::new(ib.z1, mid);
        if let Some(bottom) = Rectangle::new(CriterionPoint::new(it.z1, mid), ib) {
            if let Some(p) = self.ex.guarded_lexmin(Objective::Z1, bottom)? {
                let z = p.point;
                corner = CriterionPoint::new(z.z1 - s1, (z.z2 + s2).max(mid));
                self.record(p);
                self.enqueue(z, zb);
            }
        }
        if let Some(top) = Rectangle::new(it, corner) {
            if let Some(q) = self.ex.guarded_lexmin(Objective::Z2, top)? {
                let z = q.point;
                self.record(q);
                self.enqueue(zt, z);
            }
        }
        Ok(())
    }
}

/// Runs one frontier method over the participation region. `epsilon` is
/// ignored for the balanced box baseline.
pub fn run_method(
    program: &BiObjectiveProgram,
    participation: ParticipationPoint,
    method: Method,
    epsilon: Tolerance,
    config: &SolverConfig,
) -> Result<FrontierResult, FrontierError> {
    let started = Instant::now();
    let epsilon = if method == Method::Bbox {
        Tolerance::ZERO
    } else {
        epsilon
    };
    let mut ex = Explorer::new(program, config)?;
    let Some((top, bottom)) = initial_box_with(&mut ex, participation)? else {
        return Ok(FrontierResult {
            method,
            epsilon,
            status: FrontierStatus::NoMutuallyBeneficialCollaboration,
            points: Vec::new(),
            margins: ClosenessMargins {
                epsilon,
                ..Default::default()
            },
            discarded: Vec::new(),
            solver_calls: ex.calls,
            nodes_explored: ex.nodes,
            rectangles_processed: 0,
            wall_time: started.elapsed(),
        });
    };
    let margins = compute_margins(epsilon, top.point, bottom.point);
    let (zt, zb) = (top.point, bottom.point);
    let mut run = Run {
        ex: &mut ex,
        zeta: config.zeta,
        margins,
        found: BTreeMap::new(),
        discarded: Vec::new(),
        queue: VecDeque::new(),
    };
    run.record(top);
    run.record(bottom);
    run.enqueue(zt, zb);
    let mut rectangles = 0u64;
    while let Some(r) = run.queue.pop_front() {
        if r.is_degenerate() {
            continue;
        }
        rectangles += 1;
        match method {
            Method::Bbox => run.bbox(r)?,
            Method::B3m1 => run.b3m1(r)?,
            Method::B3m2 => run.b3m2(r)?,
        }
    }
    let discarded = std::mem::take(&mut run.discarded);
    let points: Vec<FrontierPoint> = std::mem::take(&mut run.found)
        .into_iter()
        .map(|(point, assignment)| FrontierPoint { point, assignment })
        .collect();
    debug_assert!(is_ordered_frontier(&points.iter().map(|p| p.point).collect::<Vec<_>>()));
    Ok(FrontierResult {
        method,
        epsilon,
        status: FrontierStatus::Complete,
        points,
        margins,
        discarded,
        solver_calls: ex.calls,
        nodes_explored: ex.nodes,
        rectangles_processed: rectangles,
        wall_time: started.elapsed(),
    })
}

/// Mean over ignored exact points of the normalized distance to the
/// nearest retained point, as a percentage.
pub fn gap_metric(
    exact: &[CriterionPoint],
    reduced: &[CriterionPoint],
    z_top: CriterionPoint,
    z_bottom: CriterionPoint,
) -> Result<f64, FrontierError> {
    if exact.is_empty() {
        return Err(FrontierError::Parameter("exact frontier is empty".into()));
    }
    if z_top.z1 == 0 || z_bottom.z2 == 0 {
        return Err(FrontierError::Normalization(format!(
            "endpoint optima must be non-zero, got z1^T={} z2^B={}",
            z_top.z1, z_bottom.z2
        )));
    }
    if let Some(p) = reduced.iter().find(|p| !exact.contains(p)) {
        return Err(FrontierError::Parameter(format!(
            "reduced point {p} is not in the exact frontier"
        )));
    }
    let ignored: Vec<&CriterionPoint> = exact.iter().filter(|p| !reduced.contains(p)).collect();
    if ignored.is_empty() {
        return Ok(0.0);
    }
    if reduced.is_empty() {
        return Err(FrontierError::Parameter("reduced frontier is empty".into()));
    }
    let (n1, n2) = (z_top.z1 as f64, z_bottom.z2 as f64);
    let total: f64 = ignored
        .iter()
        .map(|p| {
            reduced
                .iter()
                .map(|r| {
                    let d1 = (p.z1 - r.z1) as f64 / n1;
                    let d2 = (p.z2 - r.z2) as f64 / n2;
                    d1.hypot(d2) / std::f64::consts::SQRT_2
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / ignored.len() as f64 * 100.0)
}

/// Percentage CPU time saved relative to the baseline; negative when slower.
pub fn cts_metric(cpu_base: Duration, cpu_method: Duration) -> Result<f64, FrontierError> {
    if cpu_base.is_zero() {
        return Err(FrontierError::Parameter("baseline CPU time is zero".into()));
    }
    let base = cpu_base.as_secs_f64();
    Ok((base - cpu_method.as_secs_f64()) / base * 100.0)
}

/// One line of a frontier CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub method: Method,
    pub epsilon: Tolerance,
    pub index: usize,
    pub z1: i64,
    pub z2: i64,
    pub assignment_ref: String,
}

impl FrontierRow {
    pub fn point(&self) -> CriterionPoint {
        CriterionPoint::new(self.z1, self.z2)
    }
}

pub fn assignment_ref(method: Method, epsilon: Tolerance, index: usize) -> String {
    format!("{method}:{epsilon}:{index}")
}

pub fn frontier_rows(result: &FrontierResult) -> Vec<FrontierRow> {
    result
        .points
        .iter()
        .enumerate()
        .map(|(index, p)| FrontierRow {
            method: result.method,
            epsilon: result.epsilon,
            index,
            z1: p.point.z1,
            z2: p.point.z2,
            assignment_ref: assignment_ref(result.method, result.epsilon, index),
        })
        .collect()
}

pub fn write_frontier_csv<W: Write>(rows: &[FrontierRow], out: W) -> Result<(), FrontierError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["method", "epsilon", "index", "z1", "z2", "assignment_ref"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a frontier CSV and checks the ordering invariant within each
/// `(method, epsilon)` run.
pub fn read_frontier_csv<R: Read>(input: R) -> Result<Vec<FrontierRow>, FrontierError> {
    let mut rows: Vec<FrontierRow> = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize() {
        rows.push(row?);
    }
    let mut runs: BTreeMap<(Method, Tolerance), Vec<&FrontierRow>> = BTreeMap::new();
    for row in &rows {
        runs.entry((row.method, row.epsilon)).or_default().push(row);
    }
    for ((method, eps), run) in &runs {
        let pts: Vec<CriterionPoint> = run.iter().map(|r| r.point()).collect();
        if !is_ordered_frontier(&pts) {
            return Err(FrontierError::Format(format!(
                "{method} at epsilon {eps}: points are not sorted by z1 ascending with z2 strictly decreasing"
            )));
        }
        if run.iter().enumerate().any(|(i, r)| r.index != i) {
            return Err(FrontierError::Format(format!(
                "{method} at epsilon {eps}: indices are not 0..n"
            )));
        }
    }
    Ok(rows)
}

/// One line of a stats CSV. Gap and CTS are empty for the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub method: Method,
    pub epsilon: Tolerance,
    pub ndp: usize,
    pub solver_calls: u64,
    pub wall_ms: f64,
    pub gap_pct: Option<f64>,
    pub cts_pct: Option<f64>,
}

pub fn write_stats_csv<W: Write>(rows: &[StatsRow], out: W) -> Result<(), FrontierError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record([
            "method",
            "epsilon",
            "ndp",
            "solver_calls",
            "wall_ms",
            "gap_pct",
            "cts_pct",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(input: R) -> Result<Vec<StatsRow>, FrontierError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(FrontierError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pareto_filter, Constraint, LinearExpression, Sense, VarId, Variable};
    use proptest::prelude::*;

    fn pt(z1: i64, z2: i64) -> CriterionPoint {
        CriterionPoint::new(z1, z2)
    }

    fn rect(t: (i64, i64), b: (i64, i64)) -> Rectangle {
        Rectangle::new(pt(t.0, t.1), pt(b.0, b.1)).unwrap()
    }

    fn margins(s1: i64, s2: i64) -> ClosenessMargins {
        ClosenessMargins {
            sigma1: s1,
            sigma2: s2,
            epsilon: Tolerance::ZERO,
        }
    }

    /// One binary per listed point, exactly one chosen; objectives read the
    /// point off the choice.
    fn pick_one(points: &[(i64, i64)]) -> BiObjectiveProgram {
        let vars = (0..points.len()).map(|i| Variable::binary(format!("p{i}"))).collect();
        let one = LinearExpression::from_terms((0..points.len()).map(|i| (VarId(i), 1)));
        let z1 = LinearExpression::from_terms(points.iter().enumerate().map(|(i, p)| (VarId(i), p.0)));
        let z2 = LinearExpression::from_terms(points.iter().enumerate().map(|(i, p)| (VarId(i), p.1)));
        BiObjectiveProgram::new(vars, vec![Constraint::new("one", one, Sense::Eq, 1)], z1, z2).unwrap()
    }

    #[test]
    fn tolerance_parsing() {
        assert_eq!("3".parse::<Tolerance>().unwrap().hundredths(), 300);
        assert_eq!("2.5".parse::<Tolerance>().unwrap().hundredths(), 250);
        assert_eq!("0.25%".parse::<Tolerance>().unwrap().hundredths(), 25);
        assert!("-1".parse::<Tolerance>().is_err());
        assert!("1.234".parse::<Tolerance>().is_err());
        assert!("x".parse::<Tolerance>().is_err());
        assert_eq!(Tolerance::from_hundredths(250).to_string(), "2.5");
        assert_eq!(Tolerance::from_hundredths(205).to_string(), "2.05");
        assert_eq!(Tolerance::from_percent(3).to_string(), "3");
    }

    #[test]
    fn margin_examples() {
        let m = compute_margins(Tolerance::from_percent(3), pt(10_000, 50_000), pt(40_000, 5_000));
        assert_eq!((m.sigma1, m.sigma2), (300, 150));
        let m = compute_margins(Tolerance::ZERO, pt(10_000, 50_000), pt(40_000, 5_000));
        assert_eq!((m.sigma1, m.sigma2), (0, 0));
        let m = compute_margins(Tolerance::from_percent(5), pt(20_000, 90_000), pt(60_000, 4_000));
        assert_eq!((m.sigma1, m.sigma2), (1_000, 200));
        // 3% of 50 = 1.5 rounds half away from zero
        let m = compute_margins(Tolerance::from_percent(3), pt(50, 0), pt(0, 50));
        assert_eq!((m.sigma1, m.sigma2), (2, 2));
    }

    #[test]
    fn closeness_examples() {
        let m = margins(5, 10);
        let e = [pt(100, 200)];
        assert!(strictly_close(pt(103, 195), &e, &m));
        assert!(!strictly_close(pt(103, 215), &e, &m));
        assert!(!strictly_close(pt(103, 195), &[], &m));
        assert!(relaxed_close(pt(103, 215), &e, &m));
        assert!(!relaxed_close(pt(110, 215), &e, &m));
        assert!(relaxed_close(pt(100, 200), &e, &m));
    }

    #[test]
    fn split_examples() {
        let (t, b) = split_rectangle(rect((10, 100), (90, 20))).unwrap();
        assert_eq!(t, rect((10, 100), (90, 60)));
        assert_eq!(b, rect((10, 60), (90, 20)));
        let (t, _) = split_rectangle(rect((0, 5), (4, 0))).unwrap();
        assert_eq!(t.bottom_right().z2, 2);
        assert!(split_rectangle(rect((1, 3), (1, 3))).is_none());
    }

    #[test]
    fn shrink_examples() {
        let r = rect((1_000, 10_000), (9_000, 2_000));
        assert_eq!(
            shrink_rectangle(r, &margins(300, 150)),
            Some(rect((1_300, 9_850), (8_700, 2_150)))
        );
        assert_eq!(shrink_rectangle(r, &margins(0, 0)), Some(r));
        assert_eq!(shrink_rectangle(rect((10, 30), (12, 28)), &margins(3, 3)), None);
    }

    #[test]
    fn initial_box_lexicographic() {
        let p = pick_one(&[(2, 9), (5, 5), (9, 2), (2, 12), (12, 2)]);
        let b = initial_box(
            &p,
            ParticipationPoint { z1_non: 20, z2_non: 20 },
            &SolverConfig::default(),
        )
        .unwrap()
        .unwrap();
        assert_eq!((b.top.point, b.bottom.point), (pt(2, 9), pt(9, 2)));
        assert_eq!(b.solver_calls, 4);
    }

    #[test]
    fn empty_participation_region() {
        let p = pick_one(&[(5, 5)]);
        let r = run_method(
            &p,
            ParticipationPoint { z1_non: 4, z2_non: 9 },
            Method::Bbox,
            Tolerance::ZERO,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.status, FrontierStatus::NoMutuallyBeneficialCollaboration);
        assert!(r.points.is_empty());
    }

    #[test]
    fn singleton_frontier() {
        let p = pick_one(&[(5, 5), (6, 7)]);
        for method in Method::ALL {
            let r = run_method(
                &p,
                ParticipationPoint { z1_non: 9, z2_non: 9 },
                method,
                Tolerance::from_percent(3),
                &SolverConfig::default(),
            )
            .unwrap();
            assert_eq!(r.criterion_points(), vec![pt(5, 5)]);
        }
    }

    #[test]
    fn bbox_finds_staircase() {
        let pts = [
            (1, 20),
            (2, 15),
            (4, 14),
            (5, 9),
            (7, 8),
            (9, 4),
            (12, 1),
            (6, 10),
            (8, 9),
        ];
        let p = pick_one(&pts);
        let r = run_method(
            &p,
            ParticipationPoint {
                z1_non: 100,
                z2_non: 100,
            },
            Method::Bbox,
            Tolerance::ZERO,
            &SolverConfig::default(),
        )
        .unwrap();
        let all: Vec<_> = pts.iter().map(|&(a, b)| pt(a, b)).collect();
        assert_eq!(r.criterion_points(), crate::model::pareto_filter(&all));
    }

    #[test]
    fn b3m2_large_margins_keep_only_endpoints() {
        let pts = [(100, 2000), (200, 1500), (400, 1400), (500, 900), (1200, 100)];
        let p = pick_one(&pts);
        let r = run_method(
            &p,
            ParticipationPoint {
                z1_non: 10_000,
                z2_non: 10_000,
            },
            Method::B3m2,
            Tolerance::from_percent(2000),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.criterion_points(), vec![pt(100, 2000), pt(1200, 100)]);
    }

    #[test]
    fn b3m2_rejects_points_dominated_from_the_bands() {
        // (1010, 5000) is relaxed-close to zT and dominates (1050, 5100),
        // which sits inside the shrunk box
        let pts = [(1000, 9000), (1010, 5000), (1050, 5100), (3000, 1000)];
        let p = pick_one(&pts);
        let r = run_method(
            &p,
            ParticipationPoint {
                z1_non: 10_000,
                z2_non: 10_000,
            },
            Method::B3m2,
            Tolerance::from_percent(3),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(r.criterion_points(), vec![pt(1000, 9000), pt(3000, 1000)]);
    }

    #[test]
    fn gap_examples() {
        let exact = [pt(10, 100), pt(50, 50), pt(90, 20)];
        let reduced = [pt(10, 100), pt(90, 20)];
        let g = gap_metric(&exact, &reduced, pt(10, 100), pt(90, 20)).unwrap();
        assert!((g - 302.08).abs() < 0.05, "{g}");
        assert_eq!(gap_metric(&exact, &exact, pt(10, 100), pt(90, 20)).unwrap(), 0.0);
        assert!(gap_metric(&exact, &reduced, pt(0, 100), pt(90, 20)).is_err());
    }

    #[test]
    fn gap_within_margins_is_at_most_epsilon() {
        let (zt, zb) = (pt(10_000, 90_000), pt(80_000, 20_000));
        let m = compute_margins(Tolerance::from_percent(3), zt, zb);
        let kept = pt(40_000, 50_000);
        let near = pt(40_000 + m.sigma1, 50_000 - m.sigma2);
        let g = gap_metric(&[zt, kept, near, zb], &[zt, kept, zb], zt, zb).unwrap();
        assert!(g <= 3.0 + 1e-9, "{g}");
    }

    #[test]
    fn cts_examples() {
        let s = Duration::from_secs_f64;
        assert_eq!(cts_metric(s(10.0), s(10.0)).unwrap(), 0.0);
        assert!((cts_metric(s(1137.8), s(1169.6)).unwrap() + 2.795).abs() < 1e-3);
        assert!(cts_metric(Duration::ZERO, s(1.0)).is_err());
    }

    #[test]
    fn frontier_csv_round_trip() {
        let p = pick_one(&[(1, 9), (3, 4), (8, 1)]);
        let r = run_method(
            &p,
            ParticipationPoint { z1_non: 9, z2_non: 9 },
            Method::B3m1,
            Tolerance::from_hundredths(250),
            &SolverConfig::default(),
        )
        .unwrap();
        let rows = frontier_rows(&r);
        let mut buf = Vec::new();
        write_frontier_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("method,epsilon,index,z1,z2,assignment_ref\nb3m1,2.5,0,1,9,b3m1:2.5:0\n"),
            "{text}"
        );
        assert_eq!(read_frontier_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn frontier_csv_rejects_disorder() {
        let text = "method,epsilon,index,z1,z2,assignment_ref\nbbox,0,0,5,5,a\nbbox,0,1,3,9,b\n";
        assert!(matches!(
            read_frontier_csv(text.as_bytes()),
            Err(FrontierError::Format(_))
        ));
    }

    #[test]
    fn stats_csv_empty_cells() {
        let rows = vec![StatsRow {
            method: Method::Bbox,
            epsilon: Tolerance::ZERO,
            ndp: 3,
            solver_calls: 10,
            wall_ms: 1.5,
            gap_pct: None,
            cts_pct: None,
        }];
        let mut buf = Vec::new();
        write_stats_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "method,epsilon,ndp,solver_calls,wall_ms,gap_pct,cts_pct\nbbox,0,3,10,1.5,,\n"
        );
        assert_eq!(read_stats_csv(text.as_bytes()).unwrap(), rows);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn methods_on_random_point_sets(
            pts in prop::collection::vec((1i64..400, 1i64..400), 1..40),
            eps in 0u32..800,
        ) {
            let p = pick_one(&pts);
            let region = ParticipationPoint { z1_non: 350, z2_non: 350 };
            let config = SolverConfig::default();
            let all: Vec<_> = pts.iter().map(|&(a, b)| pt(a, b)).filter(|q| q.z1 <= 350 && q.z2 <= 350).collect();
            let exact = pareto_filter(&all);
            let bbox = run_method(&p, region, Method::Bbox, Tolerance::ZERO, &config).unwrap();
            prop_assert_eq!(bbox.criterion_points(), exact.clone());
            let eps = Tolerance::from_hundredths(eps);
            for method in [Method::B3m1, Method::B3m2] {
                let r = run_method(&p, region, method, eps, &config).unwrap();
                let got = r.criterion_points();
                prop_assert!(is_ordered_frontier(&got));
                prop_assert!(got.iter().all(|q| exact.contains(q)), "{method}: {got:?} vs {exact:?}");
                prop_assert_eq!(got.first(), exact.first());
                prop_assert_eq!(got.last(), exact.last());
                if method == Method::B3m1 {
                    for d in &r.discarded {
                        prop_assert!(strictly_close(*d, &got, &r.margins));
                    }
                }
                let zero = run_method(&p, region, method, Tolerance::ZERO, &config).unwrap();
                prop_assert_eq!(zero.criterion_points(), exact.clone());
            }
        }
    }
}
