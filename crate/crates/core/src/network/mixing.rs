//! Per-step mixing matrices.
//!
//! Metropolis weights use nominal degrees `d_i = |N_i| + 1`, so for any
//! active set `sum_{j != i} w_ij <= (d_i - 1) / d_i` and the self-weight is
//! at least `1 / d_i >= 1 / max_i d_i`. That lower bound is the constant
//! `eta` the undirected analysis asks for; it never has to be chosen.

use std::collections::HashMap;

use super::graph::{Mode, NominalGraph};
use super::schedule::ActiveLinks;
use crate::scalar::{from_usize, sum, Compensated, Scalar};

/// Column-compressed square-or-rectangular matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    rows: usize,
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.insert(i, i, T::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    /// Adds `value` to entry `(i, j)`.
    pub fn insert(&mut self, i: usize, j: usize, value: T) {
        let col = &mut self.cols[j];
        match col.iter_mut().find(|(r, _)| *r == i) {
            Some((_, v)) => *v = *v + value,
            None => col.push((i, value)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.cols[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map_or(T::zero(), |&(_, v)| v)
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.cols[j]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            for &(i, w) in col {
                y[i] = y[i] + w * xj;
            }
        }
        y
    }

    /// Mass-preserving product for column-stochastic matrices: each column
    /// sends its off-diagonal shares `w_ij x_j` and its diagonal keeps the
    /// remainder, so the rounding of the weights themselves cannot bias the
    /// total. Columns without a diagonal entry fall back to plain products.
    pub fn mix(&self, x: &[T]) -> Vec<T> {
        let mut acc = vec![Compensated::zero(); self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if !col.iter().any(|&(i, _)| i == j) {
                for &(i, w) in col {
                    acc[i].add(w * xj);
                }
                continue;
            }
            let mut kept = Compensated::zero();
            kept.add(xj);
            for &(i, w) in col {
                if i != j {
                    let share = w * xj;
                    acc[i].add(share);
                    kept.add(-share);
                }
            }
            acc[j].add(kept.value());
        }
        acc.iter().map(Compensated::value).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.cols.len()]; self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, w) in col {
                d[i][j] = d[i][j] + w;
            }
        }
        d
    }

    pub fn column_sums(&self) -> Vec<T> {
        self.cols
            .iter()
            .map(|c| sum(&c.iter().map(|&(_, w)| w).collect::<Vec<_>>()))
            .collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        let mut per_row = vec![Vec::new(); self.rows];
        for col in &self.cols {
            for &(i, w) in col {
                per_row[i].push(w);
            }
        }
        per_row.iter().map(|r| sum(r)).collect()
    }

    pub fn min_entry(&self) -> T {
        self.cols.iter().flatten().fold(T::infinity(), |m, &(_, w)| m.min(w))
    }

    /// Smallest strictly positive entry.
    pub fn min_positive_entry(&self) -> T {
        self.cols
            .iter()
            .flatten()
            .filter(|(_, w)| *w > T::zero())
            .fold(T::infinity(), |m, &(_, w)| m.min(w))
    }

    pub fn min_diagonal(&self) -> T {
        (0..self.rows.min(self.cols.len()))
            .map(|i| self.get(i, i))
            .fold(T::infinity(), |m, w| m.min(w))
    }

    pub fn is_column_stochastic(&self, tol: T) -> bool {
        self.min_entry() >= T::zero() && self.column_sums().iter().all(|&s| (s - T::one()).abs() <= tol)
    }

    pub fn is_row_stochastic(&self, tol: T) -> bool {
        self.min_entry() >= T::zero() && self.row_sums().iter().all(|&s| (s - T::one()).abs() <= tol)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.cols
            .iter()
            .enumerate()
            .all(|(j, col)| col.iter().all(|&(i, w)| (w - self.get(j, i)).abs() <= tol))
    }
}

/// Metropolis weights `w_ij = 1 / max(d_i, d_j)` on active undirected edges,
/// with the remaining mass on the diagonal.
pub fn metropolis_weights<T: Scalar>(graph: &NominalGraph, active: &ActiveLinks) -> SparseMatrix<T> {
    debug_assert_eq!(graph.mode(), Mode::Undirected);
    let n = graph.n();
    let d = graph.degrees();
    let mut w = SparseMatrix::zeros(n, n);
    let mut off: Vec<Vec<T>> = vec![Vec::new(); n];
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        if !active.is_up(e) {
            continue;
        }
        let wij = T::one() / from_usize::<T>(d[i].max(d[j]));
        w.insert(i, j, wij);
        w.insert(j, i, wij);
        off[i].push(wij);
        off[j].push(wij);
    }
    for (i, o) in off.iter().enumerate() {
        w.insert(i, i, T::one() - sum(o));
    }
    w
}

/// Push-sum matrix `P_ij = 1 / D_j^+[k]` for active arcs `(j, i)` and
/// `i = j`, where `D_j^+[k]` is the instantaneous out-degree including `j`.
pub fn push_matrix<T: Scalar>(graph: &NominalGraph, active: &ActiveLinks) -> SparseMatrix<T> {
    debug_assert_eq!(graph.mode(), Mode::Directed);
    let n = graph.n();
    let mut out_deg = vec![1usize; n];
    for (e, &(j, _)) in graph.edges().iter().enumerate() {
        if active.is_up(e) {
            out_deg[j] += 1;
        }
    }
    let mut p = SparseMatrix::zeros(n, n);
    for j in 0..n {
        p.insert(j, j, T::one() / from_usize::<T>(out_deg[j]));
    }
    for (e, &(j, i)) in graph.edges().iter().enumerate() {
        if active.is_up(e) {
            p.insert(i, j, T::one() / from_usize::<T>(out_deg[j]));
        }
    }
    p
}

/// One virtual node per nominal arc: arc `e = (j, i)` maps to index `n + e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualIndexMap {
    n: usize,
    arcs: Vec<(usize, usize)>,
    lookup: HashMap<(usize, usize), usize>,
}

impl VirtualIndexMap {
    pub fn new(graph: &NominalGraph) -> Self {
        let arcs = graph.edges().to_vec();
        let lookup = arcs.iter().enumerate().map(|(e, &a)| (a, graph.n() + e)).collect();
        Self {
            n: graph.n(),
            arcs,
            lookup,
        }
    }

    pub fn real(&self) -> usize {
        self.n
    }

    /// Size of the augmented system, `n + |E|`.
    pub fn total(&self) -> usize {
        self.n + self.arcs.len()
    }

    pub fn index(&self, from: usize, to: usize) -> Option<usize> {
        self.lookup.get(&(from, to)).copied()
    }

    pub fn arc(&self, virtual_index: usize) -> Option<(usize, usize)> {
        virtual_index
            .checked_sub(self.n)
            .and_then(|e| self.arcs.get(e).copied())
    }
}

/// Entry floor `min(gamma, 1 - gamma) / n` of the augmented matrix.
pub fn augmented_entry_floor<T: Scalar>(gamma: T, n: usize) -> T {
    gamma.min(T::one() - gamma) / from_usize(n)
}

/// Column-stochastic `N x N` matrix over real and virtual nodes, built from
/// nominal out-degrees only.
///
/// Column `j` (real): self-weight `1/d_j`; for every nominal out-arc
/// `(j, i)` with virtual node `l`, either `gamma/d_j` to `i` and
/// `(1-gamma)/d_j` to `l` (arc delivered) or `1/d_j` to `l` (arc lost).
/// Column `l` (virtual): `gamma` to `i` and `1-gamma` kept when the arc
/// delivered, everything kept otherwise.
pub fn augmented_push_matrix<T: Scalar>(
    graph: &NominalGraph,
    active: &ActiveLinks,
    gamma: T,
    map: &VirtualIndexMap,
) -> SparseMatrix<T> {
    debug_assert_eq!(graph.mode(), Mode::Directed);
    let n = graph.n();
    let size = map.total();
    let d = graph.degrees();
    let mut p = SparseMatrix::zeros(size, size);
    for j in 0..n {
        p.insert(j, j, T::one() / from_usize::<T>(d[j]));
    }
    for (e, &(j, i)) in graph.edges().iter().enumerate() {
        let l = n + e;
        let dj = from_usize::<T>(d[j]);
        if active.is_up(e) {
            p.insert(i, j, gamma / dj);
            p.insert(l, j, (T::one() - gamma) / dj);
            p.insert(i, l, gamma);
            p.insert(l, l, T::one() - gamma);
        } else {
            p.insert(l, j, T::one() / dj);
            p.insert(l, l, T::one());
        }
    }
    p
}
