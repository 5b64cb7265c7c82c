//! Exact and reduced efficient frontiers for bi-objective integer programs,
//! cooperative bargaining over the result, and a two-fleet shared EV
//! charging model that exercises both.

pub mod bargaining;
pub mod charging;
pub mod frontier;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod solver;

pub use bargaining::{alpha_norm, distance_select, gnb_select, Alpha, BargainConfig, BargainError, ReferencePoints};
pub use charging::{build_charging_program, ChargingInstance, ChargingModel, Company, Schedule};
pub use frontier::{run_method, FrontierError, FrontierResult, Method, ParticipationPoint, Tolerance};
pub use model::{
    dominates, pareto_filter, Assignment, BiObjectiveProgram, Constraint, CriterionPoint, LinearExpression, ModelError,
    Objective, ObjectiveBox, Rectangle, Sense, VarId, VarKind, Variable,
};
pub use solver::{lexmin, solve_min, LexOutcome, SolveOutcome, SolveStatus, SolverConfig, SolverError};
