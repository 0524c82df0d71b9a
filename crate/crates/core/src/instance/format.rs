//! Line-oriented instance files.
//!
//! ```text
//! # comment
//! facilities f1 f2
//! customers c1 c2
//! m 1
//! constraint knapsack 1
//! weight f1 1
//! weight f2 1
//! metric explicit
//! f1 0 1 0.5 1
//! f2 1 0 1 0.5
//! c1 0.5 1 0 1
//! c2 1 0.5 1 0
//! ```
//!
//! Header lines may come in any order; `metric` must be last and is followed
//! by one row per point. Explicit rows list distances to all points in
//! declaration order (facilities, then customers); `inf` marks unreachable
//! pairs. Euclidean rows list coordinates.
//!
//! Constraint forms:
//!
//! * `constraint knapsack <k>`
//! * `constraint multiknapsack <k1> .. <kd>`
//! * `constraint matroid <matroid>`
//! * `constraint knapsack-matroid <k> <matroid>`
//!
//! Knapsack forms need one `weight <facility> <w1> .. <wd>` line per facility.
//! Matroids are `free`, `uniform <r>`, `partition [f1,f2]:1 [f3]:2 ..`
//! (unlisted facilities are unconstrained), `graphic f1=0-1 f2=1-2 ..` (every
//! facility is an edge between integer-labelled vertices) or
//! `linear f1=(1,0) f2=(1/2,3) ..` (every facility is a rational column).

use std::collections::HashMap;
use std::fmt::{self, Write};
use std::str::FromStr;

use num::BigRational;
use thiserror::Error;

use super::{ConstraintSpec, InstanceError, MetricSpace, RobustInstance, INFINITE_DISTANCE};
use crate::matroid::{
    GraphicMatroid, LinearMatroid, MatroidKind, MatroidOracle, PartitionMatroid, UniformMatroid,
};

/// A syntax or reference error. Line `0` refers to the file as a whole.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSource {
    /// Row-major `|X| x |X|` matrix in declaration order.
    Explicit(Vec<f64>),
    /// One coordinate vector per point in declaration order.
    Euclidean(Vec<Vec<f64>>),
}

/// The contents of an instance file, before metric validation.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub facilities: Vec<String>,
    pub customers: Vec<String>,
    pub m: usize,
    pub constraint: ConstraintSpec,
    pub metric: MetricSource,
}

#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: RobustInstance,
    /// Advisory findings, such as a triangle violation in non-strict mode.
    pub warnings: Vec<String>,
}

/// Parses and validates an instance. With `strict_metric`, a triangle
/// violation is an error; otherwise it is reported as a warning.
pub fn load_instance(text: &str, strict_metric: bool) -> Result<LoadedInstance, InstanceError> {
    InstanceFile::parse(text)?.into_instance(strict_metric)
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Parser::default().run(text)
    }

    pub fn into_instance(self, strict_metric: bool) -> Result<LoadedInstance, InstanceError> {
        let space = match self.metric {
            MetricSource::Explicit(dist) => {
                MetricSpace::new(self.facilities, self.customers, dist)?
            }
            MetricSource::Euclidean(points) => {
                let nf = self.facilities.len();
                let mut points = points.into_iter();
                let facilities = self
                    .facilities
                    .into_iter()
                    .zip(points.by_ref().take(nf))
                    .collect();
                let customers = self.customers.into_iter().zip(points).collect();
                MetricSpace::euclidean(facilities, customers)?
            }
        };
        let mut warnings = Vec::new();
        if let Some(violation) = space.triangle_violation() {
            if strict_metric {
                return Err(violation);
            }
            warnings.push(violation.to_string());
        }
        let instance = RobustInstance::new(space, self.m, self.constraint)?;
        Ok(LoadedInstance { instance, warnings })
    }

    /// Serializes an instance with an explicit distance matrix.
    pub fn from_instance(inst: &RobustInstance) -> Self {
        let space = &inst.space;
        let n = space.num_points();
        let dist = (0..n * n)
            .map(|i| space.point_distance(i / n, i % n))
            .collect();
        Self {
            facilities: space.facility_ids().to_vec(),
            customers: space.customer_ids().to_vec(),
            m: inst.m,
            constraint: inst.constraint.clone(),
            metric: MetricSource::Explicit(dist),
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for InstanceFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "facilities {}", self.facilities.join(" "))?;
        writeln!(f, "customers {}", self.customers.join(" "))?;
        writeln!(f, "m {}", self.m)?;
        let ids = &self.facilities;
        match &self.constraint {
            ConstraintSpec::Knapsack { budget, .. } => writeln!(f, "constraint knapsack {budget}")?,
            ConstraintSpec::MultiKnapsack { budgets, .. } => {
                writeln!(f, "constraint multiknapsack {}", join_numbers(budgets))?
            }
            ConstraintSpec::Matroid(m) => {
                writeln!(f, "constraint matroid {}", matroid_text(m, ids))?
            }
            ConstraintSpec::KnapsackAndMatroid {
                budget, matroid, ..
            } => writeln!(
                f,
                "constraint knapsack-matroid {budget} {}",
                matroid_text(matroid, ids)
            )?,
        }
        let knapsacks = self.constraint.knapsacks();
        if !knapsacks.is_empty() {
            for (i, id) in ids.iter().enumerate() {
                let row: Vec<u64> = knapsacks
                    .iter()
                    .map(|(w, _)| w.get(i).copied().unwrap_or(0))
                    .collect();
                writeln!(f, "weight {id} {}", join_numbers(&row))?;
            }
        }
        let points: Vec<&String> = self.facilities.iter().chain(&self.customers).collect();
        match &self.metric {
            MetricSource::Explicit(dist) => {
                writeln!(f, "metric explicit")?;
                let n = points.len();
                for (a, id) in points.iter().enumerate() {
                    let mut line = (*id).clone();
                    for b in 0..n {
                        let d = dist.get(a * n + b).copied().unwrap_or(0.0);
                        line.push(' ');
                        line.push_str(&distance_text(d));
                    }
                    writeln!(f, "{line}")?;
                }
            }
            MetricSource::Euclidean(coords) => {
                writeln!(f, "metric euclidean")?;
                for (id, p) in points.iter().zip(coords) {
                    let mut line = (*id).clone();
                    for x in p {
                        let _ = write!(line, " {x}");
                    }
                    writeln!(f, "{line}")?;
                }
            }
        }
        Ok(())
    }
}

fn join_numbers(values: &[u64]) -> String {
    values
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn distance_text(d: f64) -> String {
    if d >= INFINITE_DISTANCE {
        "inf".to_string()
    } else {
        d.to_string()
    }
}

fn matroid_text(m: &MatroidOracle, ids: &[String]) -> String {
    let name = |e: usize| ids.get(e).cloned().unwrap_or_else(|| e.to_string());
    match m.kind() {
        MatroidKind::Uniform(u) => format!("uniform {}", u.rank),
        MatroidKind::Partition(p) => {
            let groups: Vec<String> = p
                .groups()
                .iter()
                .zip(p.capacities())
                .map(|(g, cap)| {
                    let members: Vec<String> = g.iter().map(|&e| name(e)).collect();
                    format!("[{}]:{cap}", members.join(","))
                })
                .collect();
            format!("partition {}", groups.join(" "))
                .trim_end()
                .to_string()
        }
        MatroidKind::Graphic(g) => {
            let edges: Vec<String> = g
                .edges
                .iter()
                .enumerate()
                .map(|(e, (u, v))| format!("{}={u}-{v}", name(e)))
                .collect();
            format!("graphic {}", edges.join(" "))
                .trim_end()
                .to_string()
        }
        MatroidKind::Linear(l) => {
            let cols: Vec<String> = l
                .columns
                .iter()
                .enumerate()
                .map(|(e, col)| {
                    let entries: Vec<String> = col.iter().map(ToString::to_string).collect();
                    format!("{}=({})", name(e), entries.join(","))
                })
                .collect();
            format!("linear {}", cols.join(" ")).trim_end().to_string()
        }
    }
}

#[derive(Default)]
struct Parser {
    facilities: Option<(usize, Vec<String>)>,
    customers: Option<(usize, Vec<String>)>,
    m: Option<usize>,
    constraint: Option<(usize, Vec<String>)>,
    weights: Vec<(usize, String, Vec<u64>)>,
    metric: Option<(usize, String)>,
    rows: Vec<(usize, String, Vec<String>)>,
}

enum Shape {
    Knapsack(u64),
    Multi(Vec<u64>),
    Matroid(MatroidOracle),
    Both(u64, MatroidOracle),
}

impl Parser {
    fn run(mut self, text: &str) -> Result<InstanceFile, ParseError> {
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = content.split_whitespace();
            let Some(head) = tokens.next() else { continue };
            let rest: Vec<String> = tokens.map(str::to_string).collect();
            if self.metric.is_some() {
                self.rows.push((line, head.to_string(), rest));
                continue;
            }
            match head {
                "facilities" => set_once(&mut self.facilities, line, "facilities", (line, rest))?,
                "customers" => set_once(&mut self.customers, line, "customers", (line, rest))?,
                "m" => {
                    let [value] = rest.as_slice() else {
                        return err(line, "expected `m <integer>`");
                    };
                    let m = parse_int::<usize>(line, value, "coverage demand")?;
                    set_once(&mut self.m, line, "m", m)?;
                }
                "constraint" => set_once(&mut self.constraint, line, "constraint", (line, rest))?,
                "weight" => {
                    let Some((id, values)) = rest.split_first() else {
                        return err(line, "expected `weight <facility> <w1> ..`");
                    };
                    let values = values
                        .iter()
                        .map(|v| parse_int::<u64>(line, v, "weight"))
                        .collect::<Result<Vec<_>, _>>()?;
                    self.weights.push((line, id.clone(), values));
                }
                "metric" => {
                    let [kind] = rest.as_slice() else {
                        return err(line, "expected `metric explicit` or `metric euclidean`");
                    };
                    if kind != "explicit" && kind != "euclidean" {
                        return err(line, format!("unknown metric kind `{kind}`"));
                    }
                    self.metric = Some((line, kind.clone()));
                }
                other => return err(line, format!("unknown field `{other}`")),
            }
        }
        self.finish()
    }

    fn finish(self) -> Result<InstanceFile, ParseError> {
        let Some((_, facilities)) = self.facilities else {
            return err(0, "missing `facilities` line");
        };
        let Some((_, customers)) = self.customers else {
            return err(0, "missing `customers` line");
        };
        let Some(m) = self.m else {
            return err(0, "missing `m` line");
        };
        let Some((constraint_line, constraint_tokens)) = self.constraint else {
            return err(0, "missing `constraint` line");
        };
        let Some((metric_line, metric_kind)) = self.metric else {
            return err(0, "missing `metric` section");
        };

        let mut point_index: HashMap<&str, usize> = HashMap::new();
        for (i, id) in facilities.iter().chain(&customers).enumerate() {
            if point_index.insert(id.as_str(), i).is_some() {
                return err(0, format!("duplicate point id `{id}`"));
            }
        }
        let facility_index: HashMap<&str, usize> = facilities
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();

        let shape = parse_constraint(
            constraint_line,
            &constraint_tokens,
            &facility_index,
            facilities.len(),
        )?;
        let dims = match &shape {
            Shape::Knapsack(_) | Shape::Both(..) => 1,
            Shape::Multi(budgets) => budgets.len(),
            Shape::Matroid(_) => 0,
        };
        let mut weights: Vec<Option<Vec<u64>>> = vec![None; facilities.len()];
        for (line, id, values) in &self.weights {
            if dims == 0 {
                return err(*line, "weights given for a matroid constraint");
            }
            let Some(&f) = facility_index.get(id.as_str()) else {
                return err(*line, format!("unknown facility `{id}`"));
            };
            if values.len() != dims {
                return err(
                    *line,
                    format!("expected {dims} weight(s), got {}", values.len()),
                );
            }
            if weights[f].replace(values.clone()).is_some() {
                return err(*line, format!("duplicate weight for `{id}`"));
            }
        }
        let columns = |dim: usize| -> Result<Vec<u64>, ParseError> {
            weights
                .iter()
                .zip(&facilities)
                .map(|(w, id)| match w {
                    Some(w) => Ok(w[dim]),
                    None => err(
                        constraint_line,
                        format!("missing weight for facility `{id}`"),
                    ),
                })
                .collect()
        };
        let constraint = match shape {
            Shape::Knapsack(budget) => ConstraintSpec::Knapsack {
                weights: columns(0)?,
                budget,
            },
            Shape::Multi(budgets) => ConstraintSpec::MultiKnapsack {
                weights: (0..budgets.len()).map(columns).collect::<Result<_, _>>()?,
                budgets,
            },
            Shape::Matroid(m) => ConstraintSpec::Matroid(m),
            Shape::Both(budget, matroid) => ConstraintSpec::KnapsackAndMatroid {
                weights: columns(0)?,
                budget,
                matroid,
            },
        };

        let n = point_index.len();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
        for (line, id, values) in &self.rows {
            let Some(&p) = point_index.get(id.as_str()) else {
                return err(*line, format!("unknown point `{id}`"));
            };
            let parsed = values
                .iter()
                .map(|v| parse_number(*line, v, metric_kind == "explicit"))
                .collect::<Result<Vec<_>, _>>()?;
            if metric_kind == "explicit" && parsed.len() != n {
                return err(
                    *line,
                    format!("expected {n} distances, got {}", parsed.len()),
                );
            }
            if rows[p].replace(parsed).is_some() {
                return err(*line, format!("duplicate row for `{id}`"));
            }
        }
        let mut complete = Vec::with_capacity(n);
        for (row, id) in rows.into_iter().zip(facilities.iter().chain(&customers)) {
            match row {
                Some(r) => complete.push(r),
                None => return err(metric_line, format!("missing metric row for `{id}`")),
            }
        }
        let metric = if metric_kind == "explicit" {
            MetricSource::Explicit(complete.into_iter().flatten().collect())
        } else {
            if let Some(first) = complete.first() {
                if complete.iter().any(|p| p.len() != first.len()) {
                    return err(metric_line, "euclidean points have different dimensions");
                }
            }
            MetricSource::Euclidean(complete)
        };
        Ok(InstanceFile {
            facilities,
            customers,
            m,
            constraint,
            metric,
        })
    }
}

fn set_once<T>(slot: &mut Option<T>, line: usize, name: &str, value: T) -> Result<(), ParseError> {
    if slot.is_some() {
        return err(line, format!("duplicate `{name}` line"));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_int<T: FromStr>(line: usize, token: &str, what: &str) -> Result<T, ParseError> {
    token
        .parse()
        .or_else(|_| err(line, format!("invalid {what} `{token}`")))
}

fn parse_number(line: usize, token: &str, allow_inf: bool) -> Result<f64, ParseError> {
    if allow_inf && (token.eq_ignore_ascii_case("inf") || token.eq_ignore_ascii_case("infinity")) {
        return Ok(INFINITE_DISTANCE);
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(if allow_inf {
            v.min(INFINITE_DISTANCE)
        } else {
            v
        }),
        _ => err(line, format!("invalid number `{token}`")),
    }
}

fn parse_constraint(
    line: usize,
    tokens: &[String],
    facilities: &HashMap<&str, usize>,
    nf: usize,
) -> Result<Shape, ParseError> {
    let Some((kind, rest)) = tokens.split_first() else {
        return err(line, "empty constraint");
    };
    match kind.as_str() {
        "knapsack" => {
            let [k] = rest else {
                return err(line, "expected `constraint knapsack <budget>`");
            };
            Ok(Shape::Knapsack(parse_int(line, k, "budget")?))
        }
        "multiknapsack" => {
            if rest.is_empty() {
                return err(line, "multiknapsack needs at least one budget");
            }
            let budgets = rest
                .iter()
                .map(|k| parse_int(line, k, "budget"))
                .collect::<Result<_, _>>()?;
            Ok(Shape::Multi(budgets))
        }
        "matroid" => Ok(Shape::Matroid(parse_matroid(line, rest, facilities, nf)?)),
        "knapsack-matroid" => {
            let Some((k, desc)) = rest.split_first() else {
                return err(
                    line,
                    "expected `constraint knapsack-matroid <budget> <matroid>`",
                );
            };
            Ok(Shape::Both(
                parse_int(line, k, "budget")?,
                parse_matroid(line, desc, facilities, nf)?,
            ))
        }
        other => err(line, format!("unknown constraint `{other}`")),
    }
}

fn parse_matroid(
    line: usize,
    tokens: &[String],
    facilities: &HashMap<&str, usize>,
    nf: usize,
) -> Result<MatroidOracle, ParseError> {
    let Some((kind, rest)) = tokens.split_first() else {
        return err(line, "missing matroid description");
    };
    let lookup = |id: &str| -> Result<usize, ParseError> {
        facilities
            .get(id)
            .copied()
            .map_or_else(|| err(line, format!("unknown facility `{id}`")), Ok)
    };
    let kind = match kind.as_str() {
        "free" if rest.is_empty() => MatroidKind::Uniform(UniformMatroid { size: nf, rank: nf }),
        "uniform" => {
            let [r] = rest else {
                return err(line, "expected `uniform <rank>`");
            };
            MatroidKind::Uniform(UniformMatroid {
                size: nf,
                rank: parse_int(line, r, "rank")?,
            })
        }
        "partition" => {
            let mut groups = Vec::new();
            let mut caps = Vec::new();
            for token in rest {
                let Some((members, cap)) = token.rsplit_once(':') else {
                    return err(line, format!("expected `[ids]:cap`, got `{token}`"));
                };
                let Some(inner) = members.strip_prefix('[').and_then(|s| s.strip_suffix(']'))
                else {
                    return err(line, format!("expected `[ids]:cap`, got `{token}`"));
                };
                let group = inner
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(lookup)
                    .collect::<Result<Vec<_>, _>>()?;
                groups.push(group);
                caps.push(parse_int(line, cap, "capacity")?);
            }
            let p = PartitionMatroid::new(nf, &groups, caps).or_else(|e| err(line, e))?;
            MatroidKind::Partition(p)
        }
        "graphic" => {
            let mut edges: Vec<Option<(u64, u64)>> = vec![None; nf];
            for token in rest {
                let Some((id, ends)) = token.split_once('=') else {
                    return err(line, format!("expected `facility=u-v`, got `{token}`"));
                };
                let Some((u, v)) = ends.split_once('-') else {
                    return err(line, format!("expected `facility=u-v`, got `{token}`"));
                };
                let e = lookup(id)?;
                let edge = (parse_int(line, u, "vertex")?, parse_int(line, v, "vertex")?);
                if edges[e].replace(edge).is_some() {
                    return err(line, format!("duplicate edge for `{id}`"));
                }
            }
            let mut labels: HashMap<u64, usize> = HashMap::new();
            let mut relabel = |x: u64| {
                let next = labels.len();
                *labels.entry(x).or_insert(next)
            };
            let mut resolved = Vec::with_capacity(nf);
            for (e, edge) in edges.into_iter().enumerate() {
                let Some((u, v)) = edge else {
                    return err(line, format!("missing edge for facility #{}", e + 1));
                };
                resolved.push((relabel(u), relabel(v)));
            }
            MatroidKind::Graphic(GraphicMatroid {
                num_vertices: labels.len(),
                edges: resolved,
            })
        }
        "linear" => {
            let mut columns: Vec<Option<Vec<BigRational>>> = vec![None; nf];
            for token in rest {
                let Some((id, body)) = token.split_once('=') else {
                    return err(line, format!("expected `facility=(q,..)`, got `{token}`"));
                };
                let Some(inner) = body.strip_prefix('(').and_then(|s| s.strip_suffix(')')) else {
                    return err(line, format!("expected `facility=(q,..)`, got `{token}`"));
                };
                let e = lookup(id)?;
                let column = inner
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|q| {
                        BigRational::from_str(q)
                            .or_else(|_| err(line, format!("invalid rational `{q}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if columns[e].replace(column).is_some() {
                    return err(line, format!("duplicate column for `{id}`"));
                }
            }
            let mut resolved = Vec::with_capacity(nf);
            for (e, column) in columns.into_iter().enumerate() {
                let Some(column) = column else {
                    return err(line, format!("missing column for facility #{}", e + 1));
                };
                resolved.push(column);
            }
            if let Some(first) = resolved.first() {
                if resolved.iter().any(|c| c.len() != first.len()) {
                    return err(line, "linear matroid columns have different lengths");
                }
            }
            MatroidKind::Linear(LinearMatroid { columns: resolved })
        }
        other => return err(line, format!("unknown matroid `{other}`")),
    };
    Ok(MatroidOracle::new(kind))
}
