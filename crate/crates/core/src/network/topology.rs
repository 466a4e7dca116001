//! Graph generators: the 39-bus transmission topology, rings and random
//! (strongly) connected graphs for tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graph::{is_connected, Mode, NominalGraph};

/// Branches of the New England 39-bus system, 1-based bus numbers.
#[rustfmt::skip]
const IEEE39_LINES: [(usize, usize); 46] = [
    (1, 2), (1, 39), (2, 3), (2, 25), (2, 30), (3, 4), (3, 18), (4, 5),
    (4, 14), (5, 6), (5, 8), (6, 7), (6, 11), (6, 31), (7, 8), (8, 9),
    (9, 39), (10, 11), (10, 13), (10, 32), (12, 11), (12, 13), (13, 14), (14, 15),
    (15, 16), (16, 17), (16, 19), (16, 21), (16, 24), (17, 18), (17, 27), (19, 20),
    (19, 33), (20, 34), (21, 22), (22, 23), (22, 35), (23, 24), (23, 36), (25, 26),
    (25, 37), (26, 27), (26, 28), (26, 29), (28, 29), (29, 38),
];

/// One communication link per electrical line of the 39-bus system.
pub fn ieee39_undirected() -> NominalGraph {
    let edges = IEEE39_LINES.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    NominalGraph::new(39, edges, Mode::Undirected).expect("39-bus topology is connected")
}

/// Each line becomes one or two opposite arcs. Starting from both arcs per
/// line, one direction is dropped (alternating which one) whenever the
/// remaining graph stays strongly connected; bridges keep both arcs.
pub fn ieee39_directed() -> NominalGraph {
    let lines: Vec<(usize, usize)> = IEEE39_LINES.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    orient_strongly_connected(39, &lines)
}

/// Greedy orientation of an undirected connected graph, as used for
/// [`ieee39_directed`].
pub fn orient_strongly_connected(n: usize, lines: &[(usize, usize)]) -> NominalGraph {
    let mut arcs: Vec<(usize, usize)> = lines.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    let mut keep = vec![true; arcs.len()];
    for (e, _) in lines.iter().enumerate() {
        let drop = if e % 2 == 0 { 2 * e + 1 } else { 2 * e };
        keep[drop] = false;
        if !is_connected(n, &arcs, &keep, Mode::Directed) {
            keep[drop] = true;
        }
    }
    let mut kept = keep.iter();
    arcs.retain(|_| *kept.next().unwrap());
    NominalGraph::new(n, arcs, Mode::Directed).expect("orientation preserves strong connectivity")
}

pub fn ring(n: usize) -> NominalGraph {
    let edges = if n == 2 {
        vec![(0, 1)]
    } else {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    };
    NominalGraph::new(n, if n == 1 { vec![] } else { edges }, Mode::Undirected).expect("ring is connected")
}

pub fn directed_ring(n: usize) -> NominalGraph {
    let edges = if n == 1 {
        vec![]
    } else {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    };
    NominalGraph::new(n, edges, Mode::Directed).expect("ring is strongly connected")
}

pub fn complete(n: usize, mode: Mode) -> NominalGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let wanted = match mode {
                Mode::Undirected => i < j,
                Mode::Directed => i != j,
            };
            if wanted {
                edges.push((i, j));
            }
        }
    }
    NominalGraph::new(n, edges, mode).expect("complete graph is connected")
}

/// Random spanning tree plus `extra` distinct chords (undirected), or a
/// shuffled Hamiltonian cycle plus `extra` distinct arcs (directed).
pub fn random_connected(n: usize, extra: usize, mode: Mode, seed: u64) -> NominalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(usize, usize)> = match mode {
        Mode::Undirected => (1..n).map(|t| (order[rng.gen_range(0..t)], order[t])).collect(),
        Mode::Directed if n > 1 => (0..n).map(|t| (order[t], order[(t + 1) % n])).collect(),
        Mode::Directed => Vec::new(),
    };
    let capacity = match mode {
        Mode::Undirected => n * (n - 1) / 2,
        Mode::Directed => n * (n - 1),
    };
    let target = (edges.len() + extra).min(capacity);
    let present = |edges: &[(usize, usize)], a: usize, b: usize| {
        edges
            .iter()
            .any(|&(i, j)| (i, j) == (a, b) || (mode == Mode::Undirected && (j, i) == (a, b)))
    };
    while edges.len() < target {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !present(&edges, a, b) {
            edges.push((a, b));
        }
    }
    NominalGraph::new(n, edges, mode).expect("generator output is connected")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ieee39_shapes() {
        let g = ieee39_undirected();
        assert_eq!((g.n(), g.num_edges()), (39, 46));
        let d = ieee39_directed();
        assert_eq!(d.n(), 39);
        assert!(d.num_edges() > 46 && d.num_edges() < 92);
        // Mixed single and double links.
        let doubled = d.edges().iter().filter(|&&(i, j)| d.edges().contains(&(j, i))).count();
        assert!(doubled > 0 && doubled < d.num_edges());
    }

    #[test]
    fn random_generators_are_deterministic() {
        for mode in [Mode::Undirected, Mode::Directed] {
            let a = random_connected(10, 5, mode, 3);
            assert_eq!(a, random_connected(10, 5, mode, 3));
            assert_eq!(a.num_edges(), if mode == Mode::Undirected { 14 } else { 15 });
        }
        assert_eq!(random_connected(1, 3, Mode::Directed, 0).num_edges(), 0);
        assert_eq!(complete(3, Mode::Directed).num_edges(), 6);
    }
}
