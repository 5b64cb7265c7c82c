//! CPLEX-style LP text export and external solution import.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Assignment, BiObjectiveProgram, Constraint, LinearExpression, Objective, VarId, VarKind};

/// Values further than this from an integer are rejected on import.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

const LINE_WIDTH: usize = 78;

#[derive(Debug, Error, PartialEq)]
pub enum SolutionParseError {
    #[error("line {line}: expected `name value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: `{value}` is not a number")]
    NotNumeric { line: usize, value: String },
    #[error("line {line}: value {value} of `{name}` is not within {INTEGRALITY_TOLERANCE} of an integer")]
    NotIntegral { line: usize, name: String, value: f64 },
    #[error("variable `{name}` value {value} outside [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: i64,
        lower: i64,
        upper: i64,
    },
    #[error("variable `{0}` missing from the listing and 0 is outside its bounds")]
    Missing(String),
}

fn push_terms(
    out: &mut String,
    line: &mut String,
    program: &BiObjectiveProgram,
    expr: &LinearExpression,
    constant: Option<i64>,
) {
    let mut first = true;
    let mut pieces: Vec<String> = Vec::new();
    for &(var, coef) in expr.terms() {
        let name = &program.variable(var).name;
        let mag = coef.unsigned_abs();
        let body = if mag == 1 {
            name.clone()
        } else {
            format!("{mag} {name}")
        };
        pieces.push(match (first, coef < 0) {
            (true, false) => body,
            (true, true) => format!("- {body}"),
            (false, false) => format!("+ {body}"),
            (false, true) => format!("- {body}"),
        });
        first = false;
    }
    if let Some(c) = constant.filter(|&c| c != 0) {
        let sign = if c < 0 {
            "-"
        } else if first {
            ""
        } else {
            "+"
        };
        pieces.push(format!("{sign} {}", c.unsigned_abs()).trim_start().to_string());
        first = false;
    }
    if first {
        // LP rows need at least one variable
        if let Some(v) = program.variables().first() {
            pieces.push(format!("0 {}", v.name));
        }
    }
    for piece in pieces {
        if line.len() + piece.len() + 1 > LINE_WIDTH {
            out.push_str(line.trim_end());
            out.push('\n');
            line.clear();
            line.push_str("   ");
        }
        line.push(' ');
        line.push_str(&piece);
    }
}

/// Renders the single-objective ILP `min objective s.t. program + extra`
/// in LP format. Expression constants in rows are folded into the rhs; the
/// objective constant is written as a constant term.
pub fn export_lp(program: &BiObjectiveProgram, objective: Objective, extra: &[Constraint]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ single-objective program: minimize z{}", objective.index());
    out.push_str("Minimize\n");
    let mut line = String::from(" obj:");
    let obj = program.objective(objective);
    push_terms(&mut out, &mut line, program, obj, Some(obj.constant_term()));
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for (i, c) in program.constraints().iter().chain(extra.iter()).enumerate() {
        let mut line = format!(" c{}:", i + 1);
        push_terms(&mut out, &mut line, program, &c.expression, None);
        let rhs = c.rhs - c.expression.constant_term();
        let _ = write!(line, " {} {}", c.sense.symbol(), rhs);
        out.push_str(&line);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for v in program.variables().iter().filter(|v| v.kind == VarKind::Integer) {
        let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
    }

    for (header, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        out.push_str(header);
        out.push('\n');
        let mut line = String::new();
        for v in program.variables().iter().filter(|v| v.kind == kind) {
            if line.len() + v.name.len() + 1 > LINE_WIDTH {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            line.push(' ');
            line.push_str(&v.name);
        }
        if !line.is_empty() {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

/// Parses a `name value` listing as written by external solvers.
///
/// Blank lines and lines starting with `#` are skipped. Variables absent
/// from the listing take value 0 (solvers commonly print non-zeros only).
pub fn parse_external_solution(text: &str, program: &BiObjectiveProgram) -> Result<Assignment, SolutionParseError> {
    let mut assignment = Assignment::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(name), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(SolutionParseError::Malformed { line });
        };
        let var = program
            .var_id(name)
            .ok_or_else(|| SolutionParseError::UnknownVariable {
                line,
                name: name.to_string(),
            })?;
        let parsed: f64 = value.parse().map_err(|_| SolutionParseError::NotNumeric {
            line,
            value: value.to_string(),
        })?;
        let rounded = parsed.round();
        if !parsed.is_finite() || (parsed - rounded).abs() > INTEGRALITY_TOLERANCE {
            return Err(SolutionParseError::NotIntegral {
                line,
                name: name.to_string(),
                value: parsed,
            });
        }
        assignment.set(var, rounded as i64);
    }
    for (i, decl) in program.variables().iter().enumerate() {
        let var = VarId(i);
        let value = match assignment.get(var) {
            Some(v) => v,
            None if decl.lower <= 0 && 0 <= decl.upper => {
                assignment.set(var, 0);
                0
            }
            None => return Err(SolutionParseError::Missing(decl.name.clone())),
        };
        if value < decl.lower || value > decl.upper {
            return Err(SolutionParseError::OutOfBounds {
                name: decl.name.clone(),
                value,
                lower: decl.lower,
                upper: decl.upper,
            });
        }
    }
    Ok(assignment)
}

/// Counts of rows and declared variables per section of an LP document.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LpSectionCounts {
    pub constraints: usize,
    pub bounds: usize,
    pub binaries: usize,
    pub generals: usize,
}

/// Section sizes of a document produced by [`export_lp`].
pub fn lp_section_counts(text: &str) -> LpSectionCounts {
    let mut counts = LpSectionCounts::default();
    let mut section = "";
    for line in text.lines() {
        match line.trim() {
            "Minimize" | "Subject To" | "Bounds" | "Binaries" | "Generals" | "End" => {
                section = line.trim();
                continue;
            }
            _ => {}
        }
        match section {
            "Subject To" if line.starts_with(" c") && line.contains(':') => counts.constraints += 1,
            "Bounds" => counts.bounds += 1,
            "Binaries" => counts.binaries += line.split_whitespace().count(),
            "Generals" => counts.generals += line.split_whitespace().count(),
            _ => {}
        }
    }
    counts
}
