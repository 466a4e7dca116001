use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Undirected,
    Directed,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Undirected => "undirected",
            Mode::Directed => "directed",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "undirected" | "u" => Ok(Mode::Undirected),
            "directed" | "d" => Ok(Mode::Directed),
            other => Err(format!("unknown graph mode '{other}' (expected undirected|directed)")),
        }
    }
}

/// The nominal communication graph. Edge order is significant: it fixes the
/// per-edge random stream used for failures and the virtual-node numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominalGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    mode: Mode,
}

impl NominalGraph {
    /// Validates node range, self-loops, duplicates and (strong) connectivity.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, mode: Mode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (e, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {e} = ({i}, {j}) references a node >= n = {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("edge {e} is a self-loop at node {i}")));
            }
            let key = match mode {
                Mode::Undirected => (i.min(j), i.max(j)),
                Mode::Directed => (i, j),
            };
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!("edge {e} = ({i}, {j}) is a duplicate")));
            }
        }
        let all = vec![true; edges.len()];
        if !is_connected(n, &edges, &all, mode) {
            return Err(Error::InvalidGraph(match mode {
                Mode::Undirected => "nominal graph is not connected".to_string(),
                Mode::Directed => "nominal graph is not strongly connected".to_string(),
            }));
        }
        Ok(Self { n, edges, mode })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Nominal degree `|N_i| + 1` (undirected) or out-degree `|N_i^+| + 1`
    /// (directed), counting the node itself.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![1usize; self.n];
        for &(i, j) in &self.edges {
            d[i] += 1;
            if self.mode == Mode::Undirected {
                d[j] += 1;
            }
        }
        d
    }

    /// For each node, the `(edge index, source)` of its nominal in-arcs.
    pub fn in_arcs(&self) -> Vec<Vec<(usize, usize)>> {
        let mut ins = vec![Vec::new(); self.n];
        for (e, &(j, i)) in self.edges.iter().enumerate() {
            ins[i].push((e, j));
            if self.mode == Mode::Undirected {
                ins[j].push((e, i));
            }
        }
        ins
    }

    /// Relabels nodes; edge order is preserved.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let edges = self.edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        Self::new(self.n, edges, self.mode)
    }

    /// Parses the text format `n m mode` followed by `m` lines `i j`.
    /// Blank lines and `#` comments are skipped. Lines arrive numbered so
    /// errors point into the enclosing file when the graph is embedded.
    pub fn parse_lines<'a, I>(lines: &mut I) -> Result<Self>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let mut next = || {
            lines.find_map(|(no, raw)| {
                let line = raw.split('#').next().unwrap_or("").trim();
                (!line.is_empty()).then_some((no, line))
            })
        };
        let (hno, header) = next().ok_or_else(|| Error::Parse {
            line: 0,
            column: 0,
            message: "missing graph header `n m mode`".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: hno,
                column: 1,
                message: format!("graph header needs 3 fields `n m mode`, found {}", fields.len()),
            });
        }
        let n: usize = parse_field(fields[0], hno, header, "node count")?;
        let m: usize = parse_field(fields[1], hno, header, "edge count")?;
        let mode: Mode = fields[2].parse().map_err(|message| Error::Parse {
            line: hno,
            column: column_of(header, fields[2]),
            message,
        })?;
        let mut edges = Vec::with_capacity(m);
        for e in 0..m {
            let (no, line) = next().ok_or_else(|| Error::Parse {
                line: hno,
                column: 1,
                message: format!("expected {m} edges, found {e}"),
            })?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::Parse {
                    line: no,
                    column: 1,
                    message: format!("edge line needs 2 fields `i j`, found {}", f.len()),
                });
            }
            let i: usize = parse_field(f[0], no, line, "edge endpoint")?;
            let j: usize = parse_field(f[1], no, line, "edge endpoint")?;
            edges.push((i, j));
        }
        Self::new(n, edges, mode).map_err(|e| Error::Parse {
            line: hno,
            column: 1,
            message: e.to_string(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.edges.len(), self.mode);
        for &(i, j) in &self.edges {
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

impl FromStr for NominalGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().map(|(i, l)| (i + 1, l));
        Self::parse_lines(&mut lines)
    }
}

pub(crate) fn column_of(line: &str, field: &str) -> usize {
    let base = line.as_ptr() as usize;
    let at = field.as_ptr() as usize;
    if at >= base && at <= base + line.len() {
        at - base + 1
    } else {
        1
    }
}

pub(crate) fn parse_field<F: FromStr>(field: &str, line_no: usize, line: &str, what: &str) -> Result<F>
where
    F::Err: fmt::Display,
{
    field.parse().map_err(|e: F::Err| Error::Parse {
        line: line_no,
        column: column_of(line, field),
        message: format!("invalid {what} '{field}': {e}"),
    })
}

/// Connectivity of the subgraph made of the edges flagged in `up`:
/// plain connectivity for undirected graphs, strong connectivity for
/// directed ones.
pub fn is_connected(n: usize, edges: &[(usize, usize)], up: &[bool], mode: Mode) -> bool {
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for (&(i, j), &on) in edges.iter().zip(up) {
        if !on {
            continue;
        }
        fwd[i].push(j);
        bwd[j].push(i);
        if mode == Mode::Undirected {
            fwd[j].push(i);
            bwd[i].push(j);
        }
    }
    let reach_all = |adj: &[Vec<usize>]| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    };
    reach_all(&fwd) && (mode == Mode::Undirected || reach_all(&bwd))
}
