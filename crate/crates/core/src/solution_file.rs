//! Solution files and their independent verification.
//!
//! ```text
//! radius 6
//! guess 2
//! open f1 f3
//! covered c1 c2 c4
//! ```
//!
//! Optional lines: `rho <r>` lowers the coverage requirement to
//! `ceil(r * m)`; `budget-factor <t>` checks knapsacks against `t` times
//! their budgets.

use std::collections::HashMap;
use std::fmt::{self, Write};

use thiserror::Error;

use crate::instance::{ParseError, RobustInstance};
use crate::partition::with_tolerance;
use crate::solve::{Solution, SolutionMode};

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub radius: f64,
    pub guess: Option<f64>,
    pub open: Vec<String>,
    pub covered: Vec<String>,
    pub rho: Option<f64>,
    pub budget_factor: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("unknown facility `{0}`")]
    UnknownFacility(String),
    #[error("unknown customer `{0}`")]
    UnknownCustomer(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailKind {
    Membership,
    Coverage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { kind: FailKind, detail: String },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail { kind, detail } => {
                let kind = match kind {
                    FailKind::Membership => "membership",
                    FailKind::Coverage => "coverage",
                };
                write!(f, "FAIL({kind}): {detail}")
            }
        }
    }
}

impl SolutionFile {
    pub fn from_solution(
        inst: &RobustInstance,
        sol: &Solution,
        budget_factor: Option<f64>,
    ) -> Self {
        let space = &inst.space;
        Self {
            radius: sol.radius,
            guess: Some(sol.guess),
            open: sol
                .open_facilities
                .iter()
                .map(|&f| space.facility_ids()[f].clone())
                .collect(),
            covered: sol
                .covered
                .iter()
                .map(|&c| space.customer_ids()[c].clone())
                .collect(),
            rho: match sol.mode {
                SolutionMode::Bicriteria { rho } => Some(rho),
                _ => None,
            },
            budget_factor,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let err = |line: usize, message: String| Err(ParseError { line, message });
        let mut radius = None;
        let mut guess = None;
        let mut open = None;
        let mut covered = None;
        let mut rho = None;
        let mut budget_factor = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            let mut words = content.split_whitespace();
            let Some(key) = words.next() else { continue };
            let rest: Vec<&str> = words.collect();
            let number = |name: &str| -> Result<f64, ParseError> {
                match rest.as_slice() {
                    [v] => match v.parse::<f64>() {
                        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
                        _ => Err(ParseError {
                            line,
                            message: format!("`{name}` needs a nonnegative number, got `{v}`"),
                        }),
                    },
                    _ => Err(ParseError {
                        line,
                        message: format!("`{name}` takes exactly one value"),
                    }),
                }
            };
            let slot_taken = match key {
                "radius" => radius.replace(number(key)?).is_some(),
                "guess" => guess.replace(number(key)?).is_some(),
                "rho" => rho.replace(number(key)?).is_some(),
                "budget-factor" => budget_factor.replace(number(key)?).is_some(),
                "open" => open
                    .replace(rest.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                    .is_some(),
                "covered" => covered
                    .replace(rest.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                    .is_some(),
                other => return err(line, format!("unknown key `{other}`")),
            };
            if slot_taken {
                return err(line, format!("`{key}` given twice"));
            }
        }
        let Some(radius) = radius else {
            return err(0, "missing `radius`".into());
        };
        Ok(Self {
            radius,
            guess,
            open: open.unwrap_or_default(),
            covered: covered.unwrap_or_default(),
            rho,
            budget_factor,
        })
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SolutionFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "radius {}", self.radius)?;
        if let Some(g) = self.guess {
            writeln!(out, "guess {g}")?;
        }
        if let Some(rho) = self.rho {
            writeln!(out, "rho {rho}")?;
        }
        if let Some(t) = self.budget_factor {
            writeln!(out, "budget-factor {t}")?;
        }
        writeln!(out, "open {}", self.open.join(" "))?;
        writeln!(out, "covered {}", self.covered.join(" "))?;
        f.write_str(&out)
    }
}

/// Checks membership (with knapsack budgets scaled by the budget factor),
/// that every listed customer lies within the radius, and that enough
/// distinct customers are listed.
pub fn verify_solution(inst: &RobustInstance, file: &SolutionFile) -> Result<Verdict, VerifyError> {
    let space = &inst.space;
    let facility_index: HashMap<&str, usize> = space
        .facility_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let customer_index: HashMap<&str, usize> = space
        .customer_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut open = Vec::new();
    for id in &file.open {
        let &f = facility_index
            .get(id.as_str())
            .ok_or_else(|| VerifyError::UnknownFacility(id.clone()))?;
        open.push(f);
    }
    let mut covered = Vec::new();
    for id in &file.covered {
        let &c = customer_index
            .get(id.as_str())
            .ok_or_else(|| VerifyError::UnknownCustomer(id.clone()))?;
        covered.push(c);
    }
    let fail = |kind, detail: String| Ok(Verdict::Fail { kind, detail });

    let mut distinct = open.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != open.len() {
        return fail(FailKind::Membership, "a facility is opened twice".into());
    }
    let factor = file.budget_factor.unwrap_or(1.0);
    for (dim, (weights, budget)) in inst.constraint.knapsacks().into_iter().enumerate() {
        let used: u128 = open.iter().map(|&f| weights[f] as u128).sum();
        if used as f64 > factor * budget as f64 {
            return fail(
                FailKind::Membership,
                format!("knapsack {dim} uses {used} > {factor} x {budget}"),
            );
        }
    }
    if let Some(m) = inst.constraint.matroid() {
        if !crate::matroid::Matroid::is_independent(m, &open) {
            return fail(
                FailKind::Membership,
                "open set is dependent in the matroid".into(),
            );
        }
    }

    let bound = with_tolerance(file.radius);
    for &c in &covered {
        let d = space.customer_to_set(c, &open);
        if !(d <= bound) {
            return fail(
                FailKind::Coverage,
                format!(
                    "customer {} is at distance {d} > {}",
                    space.customer_ids()[c],
                    file.radius
                ),
            );
        }
    }
    let mut distinct = covered.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let required = match file.rho {
        Some(rho) => ((rho * inst.m as f64) - 1e-9).ceil().max(0.0) as usize,
        None => inst.m,
    };
    if distinct.len() < required {
        return fail(
            FailKind::Coverage,
            format!(
                "{} distinct customers covered, {required} required",
                distinct.len()
            ),
        );
    }
    Ok(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::ConstraintSpec;
    use crate::partition::tests::line_instance;

    fn file(open: &[&str], covered: &[&str], radius: f64) -> SolutionFile {
        SolutionFile {
            radius,
            guess: None,
            open: open.iter().map(|s| s.to_string()).collect(),
            covered: covered.iter().map(|s| s.to_string()).collect(),
            rho: None,
            budget_factor: None,
        }
    }

    fn knapsack() -> ConstraintSpec {
        ConstraintSpec::Knapsack {
            weights: vec![1, 1],
            budget: 1,
        }
    }

    #[test]
    fn round_trip() {
        let f = SolutionFile {
            guess: Some(1.0),
            rho: Some(0.5),
            budget_factor: Some(1.1),
            ..file(&["f1"], &["c1", "c2"], 3.0)
        };
        assert_eq!(SolutionFile::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn verdicts() {
        let inst = line_instance(2, knapsack());
        assert_eq!(
            verify_solution(&inst, &file(&["f1"], &["c1", "c2"], 1.0)).unwrap(),
            Verdict::Pass
        );
        let missing = verify_solution(&inst, &file(&[], &["c1", "c2"], 1.0)).unwrap();
        assert!(matches!(
            missing,
            Verdict::Fail {
                kind: FailKind::Coverage,
                ..
            }
        ));
        let too_many = verify_solution(&inst, &file(&["f1", "f2"], &["c1", "c2"], 1.0)).unwrap();
        assert!(matches!(
            too_many,
            Verdict::Fail {
                kind: FailKind::Membership,
                ..
            }
        ));
        let relaxed = SolutionFile {
            budget_factor: Some(2.0),
            ..file(&["f1", "f2"], &["c1", "c2"], 1.0)
        };
        assert_eq!(verify_solution(&inst, &relaxed).unwrap(), Verdict::Pass);
        let short = verify_solution(&inst, &file(&["f1"], &["c1"], 1.0)).unwrap();
        assert!(matches!(
            short,
            Verdict::Fail {
                kind: FailKind::Coverage,
                ..
            }
        ));
        assert!(verify_solution(&inst, &file(&["zz"], &[], 1.0)).is_err());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = SolutionFile::parse("radius 1\nopen f1\nbogus 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(SolutionFile::parse("open f1\n").unwrap_err().line, 0);
        assert_eq!(SolutionFile::parse("radius -1\n").unwrap_err().line, 1);
        assert_eq!(
            SolutionFile::parse("radius 1\nradius 2\n")
                .unwrap_err()
                .line,
            2
        );
    }
}
