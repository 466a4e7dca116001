//! Case files: an instance and its communication graph in one text file.
//!
//! ```text
//! # comments and blank lines are ignored
//! 3                      # number of agents
//! 0.5 0 0  0 4  2.0      # a b c p_lo p_hi load, one line per agent
//! 1.0 0 0  0 4  1.0
//! 2.0 0 0  0 4  1.5
//! 3 3 directed           # graph header: n m mode
//! 0 1                    # one edge per line, 0-based
//! 1 2
//! 2 0
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::network::{column_of, parse_field, NominalGraph};
use crate::problem::{CostModel, ProblemInstance};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone)]
pub struct Case<T> {
    pub instance: ProblemInstance<T>,
    pub graph: NominalGraph,
}

pub fn load_case<T: Scalar>(path: impl AsRef<Path>) -> Result<Case<T>> {
    parse_case(&fs::read_to_string(path)?)
}

pub fn parse_case<T: Scalar>(text: &str) -> Result<Case<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    let (nno, nline) = next_content(&mut lines).ok_or_else(|| Error::Parse {
        line: 0,
        column: 0,
        message: "empty case file".into(),
    })?;
    let n: usize = parse_field(nline, nno, nline, "agent count")?;
    if n == 0 {
        return Err(Error::Parse {
            line: nno,
            column: 1,
            message: "agent count must be positive".into(),
        });
    }
    let mut cols: [Vec<T>; 6] = Default::default();
    for agent in 0..n {
        let (no, line) = next_content(&mut lines).ok_or_else(|| Error::Parse {
            line: nno,
            column: 1,
            message: format!("expected {n} agent lines, found {agent}"),
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Parse {
                line: no,
                column: 1,
                message: format!(
                    "agent line needs 6 fields `a b c p_lo p_hi load`, found {}",
                    fields.len()
                ),
            });
        }
        let names = ["a", "b", "c", "p_lo", "p_hi", "load"];
        let mut values = [0.0f64; 6];
        for (slot, (field, name)) in values.iter_mut().zip(fields.iter().zip(names)) {
            *slot = parse_field(field, no, line, name)?;
            if !slot.is_finite() {
                return Err(Error::Parse {
                    line: no,
                    column: column_of(line, field),
                    message: format!("{name} must be finite"),
                });
            }
        }
        if values[3] > values[4] {
            return Err(Error::InvalidInstance(format!(
                "line {no}: agent {agent} has p_lo = {} > p_hi = {}",
                values[3], values[4]
            )));
        }
        if !(values[0] > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "line {no}: agent {agent} has non-positive quadratic coefficient a = {}",
                values[0]
            )));
        }
        for (col, v) in cols.iter_mut().zip(values) {
            col.push(lit(v));
        }
    }
    while lines.next_if(|(_, raw)| content(raw).is_empty()).is_some() {}
    let gline = lines.peek().map_or(0, |&(no, _)| no);
    let graph = NominalGraph::parse_lines(&mut lines)?;
    if graph.n() != n {
        return Err(Error::Parse {
            line: gline,
            column: 1,
            message: format!("graph has {} nodes but the case has {n} agents", graph.n()),
        });
    }
    let [a, b, c, lower, upper, loads] = cols;
    let instance = ProblemInstance::new(loads, lower, upper, CostModel::quadratic(a, b, c))?;
    Ok(Case { instance, graph })
}

fn content(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

fn next_content<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Option<(usize, &'a str)> {
    lines.find_map(|(no, raw)| {
        let line = content(raw);
        (!line.is_empty()).then_some((no, line))
    })
}

/// Serializes quadratic-cost instances. Values use the shortest decimal
/// form that parses back to the same float.
pub fn write_case<T: Scalar>(inst: &ProblemInstance<T>, graph: &NominalGraph) -> Result<String> {
    let CostModel::Quadratic { a, b, c } = inst.cost() else {
        return Err(Error::Config(
            "only quadratic costs can be written to a case file".into(),
        ));
    };
    if graph.n() != inst.n() {
        return Err(Error::DimensionMismatch {
            what: "graph nodes",
            expected: inst.n(),
            actual: graph.n(),
        });
    }
    let mut out = format!("{}\n", inst.n());
    for i in 0..inst.n() {
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            a[i],
            b[i],
            c[i],
            inst.lower()[i],
            inst.upper()[i],
            inst.loads()[i]
        ));
    }
    out.push_str(&graph.to_text());
    Ok(out)
}
