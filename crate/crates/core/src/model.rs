//! Bi-objective integer linear programs over bounded integer variables.
//!
//! Every coefficient, constant and right-hand side is an exact fixed-point
//! integer (minor money units). Nothing in this module touches floating
//! point, so objective values and rectangle bounds compare exactly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable `{0}` is not assigned")]
    UnassignedVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{name}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: i64, upper: i64 },
    #[error("variable `{name}` value {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: i64,
        lower: i64,
        upper: i64,
    },
    #[error("arithmetic overflow while evaluating an expression")]
    Overflow,
    #[error("malformed program json: {0}")]
    Json(String),
}

/// Index of a variable inside its [`BiObjectiveProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: i64,
    pub upper: i64,
}

impl Variable {
    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Binary,
            lower: 0,
            upper: 1,
        }
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Integer,
            lower,
            upper,
        }
    }

    fn check(&self) -> Result<(), ModelError> {
        let ok = match self.kind {
            VarKind::Binary => self.lower == 0 && self.upper == 1,
            VarKind::Integer => self.lower <= self.upper,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidBounds {
                name: self.name.clone(),
                lower: self.lower,
                upper: self.upper,
            })
        }
    }
}

/// `constant + Σ coefficient · variable`, with at most one term per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearExpression {
    terms: Vec<(VarId, i64)>,
    constant: i64,
}

impl LinearExpression {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: i64) -> Self {
        Self {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, i64)>) -> Self {
        let mut expr = Self::new();
        for (var, coef) in terms {
            expr.add_term(var, coef);
        }
        expr
    }

    /// Adds `coef · var`, merging with an existing term for the same variable.
    /// Terms whose coefficient cancels to zero are dropped.
    pub fn add_term(&mut self, var: VarId, coef: i64) {
        match self.terms.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(pos) => {
                self.terms[pos].1 += coef;
                if self.terms[pos].1 == 0 {
                    self.terms.remove(pos);
                }
            }
            Err(pos) if coef != 0 => self.terms.insert(pos, (var, coef)),
            Err(_) => {}
        }
    }

    pub fn add_constant(&mut self, value: i64) {
        self.constant += value;
    }

    pub fn with_term(mut self, var: VarId, coef: i64) -> Self {
        self.add_term(var, coef);
        self
    }

    /// Terms sorted by variable index.
    pub fn terms(&self) -> &[(VarId, i64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> i64 {
        self.constant
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.constant == 0
    }

    pub fn scaled(&self, factor: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|_| factor != 0)
                .map(|&(v, c)| (v, c * factor))
                .collect(),
            constant: self.constant * factor,
        }
    }

    /// Exact value under `assignment`. Errors name the first unassigned
    /// variable by index; use [`BiObjectiveProgram::evaluate`] for names.
    pub fn evaluate(&self, assignment: &Assignment) -> Result<i64, ModelError> {
        let mut total = self.constant as i128;
        for &(var, coef) in &self.terms {
            let value = assignment
                .get(var)
                .ok_or_else(|| ModelError::UnassignedVariable(format!("#{}", var.0)))?;
            total += coef as i128 * value as i128;
        }
        i64::try_from(total).map_err(|_| ModelError::Overflow)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Sense {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Eq => lhs == rhs,
            Sense::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// `expression  sense  rhs`. The expression's constant is folded into the
/// comparison, so `x + 1 <= 3` is the same row as `x <= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub expression: LinearExpression,
    pub sense: Sense,
    pub rhs: i64,
}

impl Constraint {
    pub fn new(name: impl Into<String>, expression: LinearExpression, sense: Sense, rhs: i64) -> Self {
        Self {
            name: name.into(),
            expression,
            sense,
            rhs,
        }
    }

    pub fn is_satisfied(&self, assignment: &Assignment) -> Result<bool, ModelError> {
        let lhs = self.expression.evaluate(assignment)?;
        Ok(self.sense.holds(lhs, self.rhs))
    }
}

/// Variable id → value. Ordering is lexicographic over `(id, value)` pairs,
/// which for complete assignments is the lexicographic order of the value
/// vector in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    values: BTreeMap<VarId, i64>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_dense(values: &[i64]) -> Self {
        Self {
            values: values.iter().enumerate().map(|(i, &v)| (VarId(i), v)).collect(),
        }
    }

    pub fn get(&self, var: VarId) -> Option<i64> {
        self.values.get(&var).copied()
    }

    pub fn set(&mut self, var: VarId, value: i64) {
        self.values.insert(var, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, i64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(VarId, i64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, i64)>>(iter: I) -> Self {
        Self {
            values: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Objective {
    Z1,
    Z2,
}

impl Objective {
    pub fn other(self) -> Self {
        match self {
            Objective::Z1 => Objective::Z2,
            Objective::Z2 => Objective::Z1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Objective::Z1 => 1,
            Objective::Z2 => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            1 => Some(Objective::Z1),
            2 => Some(Objective::Z2),
            _ => None,
        }
    }
}

/// A point `(z1, z2)` in objective space, in minor units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CriterionPoint {
    pub z1: i64,
    pub z2: i64,
}

impl CriterionPoint {
    pub const fn new(z1: i64, z2: i64) -> Self {
        Self { z1, z2 }
    }

    pub fn get(self, objective: Objective) -> i64 {
        match objective {
            Objective::Z1 => self.z1,
            Objective::Z2 => self.z2,
        }
    }
}

impl fmt::Display for CriterionPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.z1, self.z2)
    }
}

/// Axis-aligned box in objective space given by its top-left corner
/// (smallest `z1`, largest `z2`) and bottom-right corner (largest `z1`,
/// smallest `z2`). Bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rectangle {
    top_left: CriterionPoint,
    bottom_right: CriterionPoint,
}

impl Rectangle {
    /// `None` when the corners are inverted in either coordinate.
    pub fn new(top_left: CriterionPoint, bottom_right: CriterionPoint) -> Option<Self> {
        (top_left.z1 <= bottom_right.z1 && top_left.z2 >= bottom_right.z2).then_some(Self { top_left, bottom_right })
    }

    pub fn top_left(&self) -> CriterionPoint {
        self.top_left
    }

    pub fn bottom_right(&self) -> CriterionPoint {
        self.bottom_right
    }

    pub fn is_degenerate(&self) -> bool {
        self.top_left == self.bottom_right
    }

    pub fn contains(&self, p: CriterionPoint) -> bool {
        self.top_left.z1 <= p.z1
            && p.z1 <= self.bottom_right.z1
            && self.bottom_right.z2 <= p.z2
            && p.z2 <= self.top_left.z2
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R({}, {})", self.top_left, self.bottom_right)
    }
}

/// Optional inclusive bounds on both objective values. A [`Rectangle`]
/// bounds all four sides; the participation region bounds only the maxima.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ObjectiveBox {
    pub z1_min: Option<i64>,
    pub z1_max: Option<i64>,
    pub z2_min: Option<i64>,
    pub z2_max: Option<i64>,
}

impl ObjectiveBox {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn upper(z1_max: i64, z2_max: i64) -> Self {
        Self {
            z1_max: Some(z1_max),
            z2_max: Some(z2_max),
            ..Self::default()
        }
    }

    pub fn contains(&self, p: CriterionPoint) -> bool {
        self.z1_min.is_none_or(|b| p.z1 >= b)
            && self.z1_max.is_none_or(|b| p.z1 <= b)
            && self.z2_min.is_none_or(|b| p.z2 >= b)
            && self.z2_max.is_none_or(|b| p.z2 <= b)
    }

    pub fn min(&self, objective: Objective) -> Option<i64> {
        match objective {
            Objective::Z1 => self.z1_min,
            Objective::Z2 => self.z2_min,
        }
    }

    pub fn max(&self, objective: Objective) -> Option<i64> {
        match objective {
            Objective::Z1 => self.z1_max,
            Objective::Z2 => self.z2_max,
        }
    }
}

impl From<Rectangle> for ObjectiveBox {
    fn from(r: Rectangle) -> Self {
        Self {
            z1_min: Some(r.top_left.z1),
            z1_max: Some(r.bottom_right.z1),
            z2_min: Some(r.bottom_right.z2),
            z2_max: Some(r.top_left.z2),
        }
    }
}

/// Minimization dominance: `p` is no worse in both objectives and differs.
#[inline]
pub fn dominates(p: CriterionPoint, q: CriterionPoint) -> bool {
    p.z1 <= q.z1 && p.z2 <= q.z2 && p != q
}

/// Non-dominated subset of `points`, deduplicated and sorted by `z1`.
pub fn pareto_filter(points: &[CriterionPoint]) -> Vec<CriterionPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut front: Vec<CriterionPoint> = Vec::with_capacity(sorted.len());
    for p in sorted {
        // sorted by (z1, z2): p survives iff its z2 beats everything before it
        if front.last().is_none_or(|last| p.z2 < last.z2) {
            front.push(p);
        }
    }
    front
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiObjectiveProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objectives: [LinearExpression; 2],
    index: HashMap<String, VarId>,
}

impl BiObjectiveProgram {
    pub fn new(
        variables: Vec<Variable>,
        constraints: Vec<Constraint>,
        objective1: LinearExpression,
        objective2: LinearExpression,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, var) in variables.iter().enumerate() {
            var.check()?;
            if index.insert(var.name.clone(), VarId(i)).is_some() {
                return Err(ModelError::DuplicateVariable(var.name.clone()));
            }
        }
        let program = Self {
            variables,
            constraints,
            objectives: [objective1, objective2],
            index,
        };
        for c in &program.constraints {
            program.check_expression(&c.expression)?;
        }
        for o in &program.objectives {
            program.check_expression(o)?;
        }
        Ok(program)
    }

    pub fn check_expression(&self, expr: &LinearExpression) -> Result<(), ModelError> {
        match expr.terms().iter().find(|(v, _)| v.0 >= self.variables.len()) {
            Some((v, _)) => Err(ModelError::UnknownVariable(format!("#{}", v.0))),
            None => Ok(()),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self, objective: Objective) -> &LinearExpression {
        match objective {
            Objective::Z1 => &self.objectives[0],
            Objective::Z2 => &self.objectives[1],
        }
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Like [`LinearExpression::evaluate`] but reports variables by name.
    pub fn evaluate(&self, expr: &LinearExpression, assignment: &Assignment) -> Result<i64, ModelError> {
        expr.evaluate(assignment).map_err(|e| self.rename(e))
    }

    pub fn point(&self, assignment: &Assignment) -> Result<CriterionPoint, ModelError> {
        Ok(CriterionPoint::new(
            self.evaluate(self.objective(Objective::Z1), assignment)?,
            self.evaluate(self.objective(Objective::Z2), assignment)?,
        ))
    }

    /// Bounds and every constraint hold.
    pub fn is_feasible(&self, assignment: &Assignment) -> Result<bool, ModelError> {
        self.check_bounds(assignment)?;
        for c in &self.constraints {
            if !c.is_satisfied(assignment).map_err(|e| self.rename(e))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn check_bounds(&self, assignment: &Assignment) -> Result<(), ModelError> {
        for (var, value) in assignment.iter() {
            let decl = self
                .variables
                .get(var.0)
                .ok_or_else(|| ModelError::UnknownVariable(format!("#{}", var.0)))?;
            if value < decl.lower || value > decl.upper {
                return Err(ModelError::OutOfBounds {
                    name: decl.name.clone(),
                    value,
                    lower: decl.lower,
                    upper: decl.upper,
                });
            }
        }
        Ok(())
    }

    fn rename(&self, err: ModelError) -> ModelError {
        match err {
            ModelError::UnassignedVariable(tag) => {
                let name = tag
                    .strip_prefix('#')
                    .and_then(|i| i.parse::<usize>().ok())
                    .and_then(|i| self.variables.get(i))
                    .map(|v| v.name.clone())
                    .unwrap_or(tag);
                ModelError::UnassignedVariable(name)
            }
            other => other,
        }
    }

    /// Variables as `name value` lines, declaration order.
    pub fn render_assignment(&self, assignment: &Assignment) -> String {
        let mut out = String::new();
        for (var, value) in assignment.iter() {
            if let Some(decl) = self.variables.get(var.0) {
                out.push_str(&decl.name);
                out.push(' ');
                out.push_str(&value.to_string());
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = ProgramDoc {
            variables: self
                .variables
                .iter()
                .map(|v| VariableDoc {
                    id: v.name.clone(),
                    kind: v.kind,
                    lower: v.lower,
                    upper: v.upper,
                })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintDoc {
                    name: c.name.clone(),
                    terms: self.term_docs(&c.expression),
                    constant: c.expression.constant_term(),
                    sense: c.sense,
                    rhs: c.rhs,
                })
                .collect(),
            objective1: self.expr_doc(&self.objectives[0]),
            objective2: self.expr_doc(&self.objectives[1]),
        };
        serde_json::to_string_pretty(&doc).expect("program document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ProgramDoc = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        let variables: Vec<Variable> = doc
            .variables
            .into_iter()
            .map(|v| Variable {
                name: v.id,
                kind: v.kind,
                lower: v.lower,
                upper: v.upper,
            })
            .collect();
        let names: HashMap<&str, VarId> = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), VarId(i)))
            .collect();
        let expr = |terms: &[TermDoc], constant: i64| -> Result<LinearExpression, ModelError> {
            let mut e = LinearExpression::constant(constant);
            for t in terms {
                let var = names
                    .get(t.var.as_str())
                    .ok_or_else(|| ModelError::UnknownVariable(t.var.clone()))?;
                e.add_term(*var, t.coef);
            }
            Ok(e)
        };
        let constraints = doc
            .constraints
            .iter()
            .map(|c| {
                Ok(Constraint::new(
                    c.name.clone(),
                    expr(&c.terms, c.constant)?,
                    c.sense,
                    c.rhs,
                ))
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let o1 = expr(&doc.objective1.terms, doc.objective1.constant)?;
        let o2 = expr(&doc.objective2.terms, doc.objective2.constant)?;
        Self::new(variables, constraints, o1, o2)
    }

    fn term_docs(&self, expr: &LinearExpression) -> Vec<TermDoc> {
        expr.terms()
            .iter()
            .map(|&(v, coef)| TermDoc {
                var: self.variables[v.0].name.clone(),
                coef,
            })
            .collect()
    }

    fn expr_doc(&self, expr: &LinearExpression) -> ExpressionDoc {
        ExpressionDoc {
            terms: self.term_docs(expr),
            constant: expr.constant_term(),
        }
    }
}

// JSON document shapes; field order here is the serialized order.

#[derive(Serialize, Deserialize)]
struct ProgramDoc {
    variables: Vec<VariableDoc>,
    constraints: Vec<ConstraintDoc>,
    objective1: ExpressionDoc,
    objective2: ExpressionDoc,
}

#[derive(Serialize, Deserialize)]
struct VariableDoc {
    id: String,
    kind: VarKind,
    lower: i64,
    upper: i64,
}

#[derive(Serialize, Deserialize)]
struct ConstraintDoc {
    name: String,
    terms: Vec<TermDoc>,
    #[serde(default)]
    constant: i64,
    sense: Sense,
    rhs: i64,
}

#[derive(Serialize, Deserialize)]
struct ExpressionDoc {
    terms: Vec<TermDoc>,
    #[serde(default)]
    constant: i64,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    var: String,
    coef: i64,
}

/// Renders minor units as a major-unit decimal, e.g. `2100` → `21.00`
/// at a scale of 100.
pub fn format_minor(value: i64, minor_per_major: i64) -> String {
    if minor_per_major <= 1 {
        return value.to_string();
    }
    let digits = (minor_per_major as f64).log10().round() as usize;
    let sign = if value < 0 { "-" } else { "" };
    let abs = value.unsigned_abs();
    let scale = minor_per_major as u64;
    format!("{sign}{}.{:0digits$}", abs / scale, abs % scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(z1: i64, z2: i64) -> CriterionPoint {
        CriterionPoint::new(z1, z2)
    }

    #[test]
    fn evaluate_examples() {
        let (a, b) = (VarId(0), VarId(1));
        let expr = LinearExpression::constant(1).with_term(a, 3).with_term(b, 2);
        let asg = Assignment::from_dense(&[1, 0]);
        assert_eq!(expr.evaluate(&asg).unwrap(), 4);

        assert_eq!(LinearExpression::new().evaluate(&asg).unwrap(), 0);

        let neg = LinearExpression::new().with_term(a, -5);
        assert_eq!(neg.evaluate(&Assignment::from_dense(&[2])).unwrap(), -10);
    }

    #[test]
    fn evaluate_names_the_unassigned_variable() {
        let program = BiObjectiveProgram::new(
            vec![Variable::binary("a"), Variable::binary("b")],
            vec![],
            LinearExpression::new().with_term(VarId(1), 1),
            LinearExpression::new(),
        )
        .unwrap();
        let asg = Assignment::from_dense(&[1]);
        let err = program.evaluate(program.objective(Objective::Z1), &asg).unwrap_err();
        assert_eq!(err, ModelError::UnassignedVariable("b".into()));
    }

    #[test]
    fn add_term_merges_and_cancels() {
        let mut e = LinearExpression::new();
        e.add_term(VarId(2), 3);
        e.add_term(VarId(0), 1);
        e.add_term(VarId(2), -3);
        assert_eq!(e.terms(), &[(VarId(0), 1)]);
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(p(1, 2), p(2, 2)));
        assert!(!dominates(p(3, 3), p(3, 3)));
        assert!(!dominates(p(1, 5), p(2, 4)));
    }

    #[test]
    fn pareto_filter_examples() {
        assert_eq!(
            pareto_filter(&[p(1, 3), p(2, 2), p(3, 1), p(3, 3)]),
            vec![p(1, 3), p(2, 2), p(3, 1)]
        );
        assert!(pareto_filter(&[]).is_empty());
        assert_eq!(pareto_filter(&[p(5, 5)]), vec![p(5, 5)]);
    }

    #[test]
    fn binary_bounds_are_enforced() {
        let bad = Variable {
            name: "x".into(),
            kind: VarKind::Binary,
            lower: 0,
            upper: 2,
        };
        assert!(BiObjectiveProgram::new(vec![bad], vec![], LinearExpression::new(), LinearExpression::new()).is_err());
        let dup = vec![Variable::binary("x"), Variable::binary("x")];
        assert_eq!(
            BiObjectiveProgram::new(dup, vec![], LinearExpression::new(), LinearExpression::new()).unwrap_err(),
            ModelError::DuplicateVariable("x".into())
        );
    }

    #[test]
    fn undeclared_reference_is_rejected() {
        let err = BiObjectiveProgram::new(
            vec![Variable::binary("x")],
            vec![],
            LinearExpression::new().with_term(VarId(4), 1),
            LinearExpression::new(),
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownVariable(_)));
    }

    #[test]
    fn program_json_golden() {
        let x = VarId(0);
        let t = VarId(1);
        let program = BiObjectiveProgram::new(
            vec![Variable::binary("x"), Variable::integer("t", 0, 3)],
            vec![Constraint::new(
                "link",
                LinearExpression::new().with_term(x, 2).with_term(t, -1),
                Sense::Le,
                0,
            )],
            LinearExpression::new().with_term(x, 5),
            LinearExpression::constant(7).with_term(t, 1),
        )
        .unwrap();
        let json = program.to_json();
        let expected = r#"{
  "variables": [
    {
      "id": "x",
      "kind": "binary",
      "lower": 0,
      "upper": 1
    },
    {
      "id": "t",
      "kind": "integer",
      "lower": 0,
      "upper": 3
    }
  ],
  "constraints": [
    {
      "name": "link",
      "terms": [
        {
          "var": "x",
          "coef": 2
        },
        {
          "var": "t",
          "coef": -1
        }
      ],
      "constant": 0,
      "sense": "<=",
      "rhs": 0
    }
  ],
  "objective1": {
    "terms": [
      {
        "var": "x",
        "coef": 5
      }
    ],
    "constant": 0
  },
  "objective2": {
    "terms": [
      {
        "var": "t",
        "coef": 1
      }
    ],
    "constant": 7
  }
}"#;
        assert_eq!(json, expected);
        assert_eq!(BiObjectiveProgram::from_json(&json).unwrap(), program);
    }

    #[test]
    fn format_minor_units() {
        assert_eq!(format_minor(2100, 100), "21.00");
        assert_eq!(format_minor(-5, 100), "-0.05");
        assert_eq!(format_minor(7, 1), "7");
    }

    fn arb_points() -> impl Strategy<Value = Vec<CriterionPoint>> {
        prop::collection::vec((0i64..30, 0i64..30).prop_map(|(a, b)| p(a, b)), 0..40)
    }

    proptest! {
        #[test]
        fn pareto_filter_is_exact_and_idempotent(points in arb_points()) {
            let front = pareto_filter(&points);
            for a in &front {
                for b in &front {
                    prop_assert!(!dominates(*a, *b));
                }
            }
            // every input point is either kept or dominated by a kept one
            for q in &points {
                prop_assert!(front.contains(q) || front.iter().any(|f| dominates(*f, *q)));
            }
            prop_assert_eq!(pareto_filter(&front), front);
        }

        #[test]
        fn dominance_is_transitive(a in (0i64..5, 0i64..5), b in (0i64..5, 0i64..5), c in (0i64..5, 0i64..5)) {
            let (a, b, c) = (p(a.0, a.1), p(b.0, b.1), p(c.0, c.1));
            prop_assert!(!dominates(a, a));
            if dominates(a, b) && dominates(b, c) {
                prop_assert!(dominates(a, c));
            }
        }

        #[test]
        fn evaluate_is_homogeneous(coefs in prop::collection::vec(-50i64..50, 1..6), vals in prop::collection::vec(-20i64..20, 6)) {
            let expr = LinearExpression::from_terms(coefs.iter().enumerate().map(|(i, &c)| (VarId(i), c)));
            let asg = Assignment::from_dense(&vals);
            let doubled: Vec<i64> = vals.iter().map(|v| v * 2).collect();
            let base = expr.evaluate(&asg).unwrap();
            let scaled = expr.scaled(2).evaluate(&Assignment::from_dense(&doubled)).unwrap();
            prop_assert_eq!(scaled, 4 * base);
        }
    }
}
