//! Picking one agreement point from a finite frontier: generalized Nash
//! bargaining and normalized α-norm distance to the ideal point.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontier::ParticipationPoint;
use crate::model::{BiObjectiveProgram, CriterionPoint, Objective};
use crate::solver::{solve_min, SolveStatus, SolverConfig, SolverError};

/// Scores closer than this (relative) are ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum BargainError {
    #[error("no points to select from")]
    Empty,
    #[error("invalid bargaining parameter: {0}")]
    Parameter(String),
    #[error("cannot normalize: {0}")]
    Normalization(String),
    #[error("point {point} is worse than the disagreement point {disagreement}")]
    OutsideDisagreement {
        point: CriterionPoint,
        disagreement: CriterionPoint,
    },
    #[error("program is infeasible; no ideal point")]
    Infeasible,
    #[error("solver hit the node limit while computing the ideal point")]
    NodeLimit,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferencePoints {
    pub ideal: CriterionPoint,
    pub disagreement: CriterionPoint,
}

impl ReferencePoints {
    pub fn new(ideal: CriterionPoint, disagreement: CriterionPoint) -> Result<Self, BargainError> {
        if ideal.z1 > disagreement.z1 || ideal.z2 > disagreement.z2 {
            return Err(BargainError::Parameter(format!(
                "ideal {ideal} exceeds disagreement {disagreement}"
            )));
        }
        Ok(Self { ideal, disagreement })
    }
}

/// `α` of the distance function; `Infinity` is the min-max rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinity,
}

impl FromStr for Alpha {
    type Err = BargainError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Alpha::Infinity),
            t => {
                let a: f64 = t
                    .parse()
                    .map_err(|_| BargainError::Parameter(format!("alpha `{s}` is neither a number nor `inf`")))?;
                if !(a.is_finite() && a > 0.0) {
                    return Err(BargainError::Parameter(format!("alpha must be positive, got {s}")));
                }
                Ok(Alpha::Finite(a))
            }
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BargainConfig {
    Gnb { pi: f64 },
    Dist { alpha: Alpha },
}

impl BargainConfig {
    pub fn validate(&self) -> Result<(), BargainError> {
        match *self {
            BargainConfig::Gnb { pi } if !(pi > 0.0 && pi < 1.0) => Err(BargainError::Parameter(format!(
                "pi must lie strictly inside (0, 1), got {pi}"
            ))),
            BargainConfig::Dist {
                alpha: Alpha::Finite(a),
            } if !(a.is_finite() && a > 0.0) => {
                Err(BargainError::Parameter(format!("alpha must be positive, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Candidates in tie-break order: smallest `z1`, then smallest `z2`.
fn ordered(points: &[CriterionPoint]) -> Result<Vec<CriterionPoint>, BargainError> {
    if points.is_empty() {
        return Err(BargainError::Empty);
    }
    let mut v = points.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Argmax of `(d1 - z1)^π (d2 - z2)^(1-π)`, in log space. Points with a
/// zero gain rank below every point with two positive gains.
pub fn gnb_select(
    points: &[CriterionPoint],
    disagreement: CriterionPoint,
    pi: f64,
) -> Result<CriterionPoint, BargainError> {
    BargainConfig::Gnb { pi }.validate()?;
    let candidates = ordered(points)?;
    let mut best: Option<(CriterionPoint, Option<f64>)> = None;
    for p in candidates {
        let (g1, g2) = (disagreement.z1 - p.z1, disagreement.z2 - p.z2);
        if g1 < 0 || g2 < 0 {
            return Err(BargainError::OutsideDisagreement { point: p, disagreement });
        }
        let score = (g1 > 0 && g2 > 0).then(|| pi * (g1 as f64).ln() + (1.0 - pi) * (g2 as f64).ln());
        let better = match (&best, score) {
            (None, _) => true,
            (Some((_, None)), Some(_)) => true,
            (Some((_, Some(b))), Some(s)) => s > *b && !ties(s, *b),
            _ => false,
        };
        if better {
            best = Some((p, score));
        }
    }
    Ok(best.expect("non-empty candidates").0)
}

/// `(Σ f_i^α)^(1/α)`, or `max f_i` for the infinity norm. Computed as
/// `m · (Σ (f_i/m)^α)^(1/α)` with `m = max f_i`, which keeps large α from
/// overflowing and keeps `max ≤ ‖f‖ ≤ n^(1/α)·max` exact in floating point.
pub fn alpha_norm(f: &[f64], alpha: Alpha) -> f64 {
    let m = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    match alpha {
        Alpha::Infinity => m,
        Alpha::Finite(_) if m == 0.0 => 0.0,
        Alpha::Finite(a) => {
            let s: f64 = f.iter().map(|v| (v.abs() / m).powf(a)).sum();
            m * s.powf(1.0 / a)
        }
    }
}

/// Argmin of the α-norm of the min-max normalized point
/// `(z - ideal) / (disagreement - ideal)`.
pub fn distance_select(
    points: &[CriterionPoint],
    refs: &ReferencePoints,
    alpha: Alpha,
) -> Result<CriterionPoint, BargainError> {
    BargainConfig::Dist { alpha }.validate()?;
    let (lo, hi) = (refs.ideal, refs.disagreement);
    let (d1, d2) = (hi.z1 - lo.z1, hi.z2 - lo.z2);
    if d1 <= 0 || d2 <= 0 {
        return Err(BargainError::Normalization(format!(
            "disagreement {hi} must exceed ideal {lo} in both objectives"
        )));
    }
    let mut best: Option<(CriterionPoint, f64)> = None;
    for p in ordered(points)? {
        let f = [(p.z1 - lo.z1) as f64 / d1 as f64, (p.z2 - lo.z2) as f64 / d2 as f64];
        let score = alpha_norm(&f, alpha);
        if best.is_none_or(|(_, b)| score < b && !ties(score, b)) {
            best = Some((p, score));
        }
    }
    Ok(best.expect("non-empty candidates").0)
}

pub fn select(
    points: &[CriterionPoint],
    refs: &ReferencePoints,
    config: &BargainConfig,
) -> Result<CriterionPoint, BargainError> {
    match *config {
        BargainConfig::Gnb { pi } => gnb_select(points, refs.disagreement, pi),
        BargainConfig::Dist { alpha } => distance_select(points, refs, alpha),
    }
}

/// Ideal point from two independent single-objective solves; the
/// disagreement point is the participation point as given.
pub fn reference_points(
    program: &BiObjectiveProgram,
    participation: ParticipationPoint,
    config: &SolverConfig,
) -> Result<ReferencePoints, BargainError> {
    let mut ideal = [0i64; 2];
    for obj in [Objective::Z1, Objective::Z2] {
        let out = solve_min(program, obj, &[], config)?;
        ideal[obj.index() - 1] = match out.status {
            SolveStatus::Optimal => out.value.expect("optimal outcome has a value"),
            SolveStatus::Infeasible => return Err(BargainError::Infeasible),
            SolveStatus::NodeLimit => return Err(BargainError::NodeLimit),
        };
    }
    Ok(ReferencePoints {
        ideal: CriterionPoint::new(ideal[0], ideal[1]),
        disagreement: participation.as_point(),
    })
}
