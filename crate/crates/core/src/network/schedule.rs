//! Random link failures.
//!
//! Sampling is counter based: the state of every nominal edge at step `k` is
//! a pure function of `(seed, k, edge index)`. Step `k` uses the ChaCha8
//! stream number `k` of the generator keyed by `seed`; edge `e` consumes the
//! `e`-th 64-bit draw of that stream. No step depends on any other step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::graph::{is_connected, Mode, NominalGraph};
use crate::error::{Error, Result};

/// Identifies the sampling contract above. Bump when it changes.
pub const SCHEDULE_PRNG: &str = "chacha8-stream-per-step/v1";

/// Which nominal edges (or arcs) delivered at one step, indexed like
/// [`NominalGraph::edges`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActiveLinks {
    up: Vec<bool>,
}

impl ActiveLinks {
    pub fn all(m: usize) -> Self {
        Self { up: vec![true; m] }
    }

    pub fn none(m: usize) -> Self {
        Self { up: vec![false; m] }
    }

    pub fn from_flags(up: Vec<bool>) -> Self {
        Self { up }
    }

    pub fn is_up(&self, e: usize) -> bool {
        self.up[e]
    }

    pub fn flags(&self) -> &[bool] {
        &self.up
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    pub fn count(&self) -> usize {
        self.up.iter().filter(|&&u| u).count()
    }
}

/// Nominal graph plus an i.i.d. erasure model for its links.
#[derive(Debug, Clone)]
pub struct GraphSchedule {
    nominal: NominalGraph,
    q: f64,
    seed: u64,
    horizon: usize,
    forced_down: Vec<usize>,
}

impl GraphSchedule {
    pub fn new(nominal: NominalGraph, q: f64, seed: u64, horizon: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::Config(format!("failure probability q = {q} must lie in [0, 1)")));
        }
        Ok(Self {
            nominal,
            q,
            seed,
            horizon,
            forced_down: Vec::new(),
        })
    }

    /// A schedule with no failures.
    pub fn reliable(nominal: NominalGraph, horizon: usize) -> Self {
        Self::new(nominal, 0.0, 0, horizon).expect("q = 0 is valid")
    }

    /// Keeps the listed edges down at every step, on top of random failures.
    pub fn with_forced_down(mut self, edges: Vec<usize>) -> Self {
        self.forced_down = edges;
        self
    }

    pub fn nominal(&self) -> &NominalGraph {
        &self.nominal
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Active links at step `k`. Undirected edges fail as a unit; directed
    /// arcs fail independently of each other, including opposite arcs.
    pub fn sample_active(&self, k: usize) -> ActiveLinks {
        let m = self.nominal.num_edges();
        let mut up = vec![true; m];
        if self.q > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(k as u64);
            for flag in up.iter_mut() {
                let u: f64 = rng.gen();
                *flag = u >= self.q;
            }
        }
        for &e in &self.forced_down {
            if e < m {
                up[e] = false;
            }
        }
        ActiveLinks { up }
    }

    /// For each complete window `[wB, (w+1)B - 1]` inside the horizon,
    /// whether the union of active links is (strongly) connected.
    pub fn check_b_connectivity(&self, b: usize) -> Vec<bool> {
        if b == 0 {
            return Vec::new();
        }
        let (n, m, mode) = (self.nominal.n(), self.nominal.num_edges(), self.nominal.mode());
        (0..self.horizon / b)
            .map(|w| {
                let mut union = vec![false; m];
                for k in w * b..(w + 1) * b {
                    for (u, &a) in union.iter_mut().zip(self.sample_active(k).flags()) {
                        *u |= a;
                    }
                }
                is_connected(n, self.nominal.edges(), &union, mode)
            })
            .collect()
    }

    /// Smallest `B` such that every complete window of length `B` within the
    /// horizon has a connected union, or `None` if even a single window over
    /// the whole horizon is disconnected.
    pub fn measured_b(&self) -> Option<usize> {
        (1..=self.horizon.max(1)).find(|&b| {
            let verdicts = self.check_b_connectivity(b);
            !verdicts.is_empty() && verdicts.iter().all(|&ok| ok)
        })
    }

    /// Hex digest of everything that determines the sampled schedule.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(SCHEDULE_PRNG.as_bytes());
        h.update(self.seed.to_le_bytes());
        h.update(self.q.to_bits().to_le_bytes());
        h.update((self.nominal.n() as u64).to_le_bytes());
        h.update([match self.nominal.mode() {
            Mode::Undirected => 0u8,
            Mode::Directed => 1u8,
        }]);
        for &(i, j) in self.nominal.edges() {
            h.update((i as u64).to_le_bytes());
            h.update((j as u64).to_le_bytes());
        }
        for &e in &self.forced_down {
            h.update((e as u64).to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
