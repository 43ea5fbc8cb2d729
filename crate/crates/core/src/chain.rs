//! Transition kernels assembled from a graph plus holding probabilities,
//! their stationary distributions, time reversal and additive
//! reversibilization, exact distribution evolution and path sampling.
//!
//! For a vertex `v` with holding probability `a(v)` the kernel is
//! `P(v, v) = a(v)` and `P(v, w) = (1 - a(v)) mult(v, w) / outdeg(v)`, and on
//! a connected Eulerian graph the stationary distribution has the closed
//! form `pi(v) ∝ outdeg(v) / (1 - a(v))`, which is computed directly and
//! then verified by residual instead of solved for.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EulerianMultigraph, VertexId};
use crate::rng::replica_rng;

/// Row-sum and stationarity residuals are required to sit below this.
pub const KERNEL_TOL: f64 = 1e-12;

/// Mass renormalization period during long evolutions.
const RENORM_INTERVAL: u64 = 10_000;

/// Holding probabilities for a chain: one value everywhere or per vertex.
#[derive(Debug, Clone)]
pub enum Holding {
    Constant(f64),
    PerVertex(Vec<f64>),
}

impl Holding {
    fn resolve(&self, n: usize) -> Result<Vec<f64>> {
        let values = match self {
            Holding::Constant(a) => vec![*a; n],
            Holding::PerVertex(v) => {
                if v.len() != n {
                    return Err(Error::ChainConstruction(format!(
                        "holding map has length {} for {} vertices",
                        v.len(),
                        n
                    )));
                }
                v.clone()
            }
        };
        for (v, &a) in values.iter().enumerate() {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::ChainConstruction(format!(
                    "holding probability {a} at vertex {v} outside [0, 1)"
                )));
            }
        }
        Ok(values)
    }
}

/// Probability mass over the vertices; sums to one within [`KERNEL_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector(Vec<f64>);

impl DistributionVector {
    pub fn point_mass(n: usize, v: VertexId) -> Self {
        let mut masses = vec![0.0; n];
        masses[v] = 1.0;
        DistributionVector(masses)
    }

    pub fn uniform(n: usize) -> Self {
        DistributionVector(vec![1.0 / n as f64; n])
    }

    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "distribution entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > KERNEL_TOL {
            return Err(Error::InvalidParameter(format!(
                "distribution mass {total} differs from 1"
            )));
        }
        Ok(DistributionVector(masses))
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A sampled trajectory together with the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkPath {
    pub states: Vec<VertexId>,
    pub seed: u64,
}

/// Lazy walk kernel on a connected Eulerian multigraph.
///
/// Immutable and cheap to clone (the graph is shared). The sparse rows
/// include the diagonal and are sorted by target.
#[derive(Debug, Clone)]
pub struct LazyChain {
    graph: Arc<EulerianMultigraph>,
    holding: Vec<f64>,
    rows: Vec<Vec<(u32, f64)>>,
    pi: Vec<f64>,
    delta: f64,
}

impl LazyChain {
    /// Assemble the kernel for `graph` under `holding`.
    pub fn from_graph(graph: &EulerianMultigraph, holding: Holding) -> Result<Self> {
        let n = graph.vertex_count();
        let a = holding.resolve(n)?;
        if !graph.is_eulerian() {
            return Err(Error::ChainConstruction(
                "graph is not Eulerian (outdeg != indeg somewhere)".into(),
            ));
        }
        if !graph.is_connected() {
            return Err(Error::ChainConstruction("graph is not connected".into()));
        }

        let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
        for (v, &hold) in a.iter().enumerate() {
            let d = graph.out_degree(v) as f64;
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(graph.out_edges(v).len() + 1);
            let mut diag = hold;
            for &(w, mult) in graph.out_edges(v) {
                let p = (1.0 - hold) * f64::from(mult) / d;
                if w == v {
                    diag += p;
                } else {
                    row.push((w as u32, p));
                }
            }
            row.push((v as u32, diag));
            row.sort_unstable_by_key(|&(w, _)| w);
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > KERNEL_TOL {
                return Err(Error::ChainConstruction(format!(
                    "row {v} sums to {sum}"
                )));
            }
            rows.push(row);
        }

        // pi(v) ∝ outdeg(v) / (1 - a(v)), then a residual check.
        let mut pi: Vec<f64> = (0..n)
            .map(|v| graph.out_degree(v) as f64 / (1.0 - a[v]))
            .collect();
        let total: f64 = pi.iter().sum();
        for x in &mut pi {
            *x /= total;
        }

        let chain = Self {
            graph: Arc::new(graph.clone()),
            holding: a,
            rows,
            pi,
            delta: 0.0,
        };
        let residual = chain.stationarity_residual(&chain.pi);
        if residual > KERNEL_TOL {
            return Err(Error::ChainConstruction(format!(
                "closed-form stationary vector has residual {residual:.3e}"
            )));
        }
        let delta = (0..n)
            .map(|v| chain.prob(v, v))
            .fold(f64::INFINITY, f64::min);
        Ok(Self { delta, ..chain })
    }

    fn from_rows(
        graph: Arc<EulerianMultigraph>,
        holding: Vec<f64>,
        mut rows: Vec<Vec<(u32, f64)>>,
        pi: Vec<f64>,
    ) -> Self {
        for row in &mut rows {
            row.retain(|&(_, p)| p != 0.0);
            row.sort_unstable_by_key(|&(w, _)| w);
        }
        let n = rows.len();
        let mut chain = Self {
            graph,
            holding,
            rows,
            pi,
            delta: 0.0,
        };
        chain.delta = (0..n)
            .map(|v| chain.prob(v, v))
            .fold(f64::INFINITY, f64::min);
        chain
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn graph(&self) -> &EulerianMultigraph {
        &self.graph
    }

    pub fn holding(&self) -> &[f64] {
        &self.holding
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn min_stationary(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Minimum diagonal entry of the kernel.
    pub fn min_diagonal(&self) -> f64 {
        self.delta
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    /// Kernel entry `P(u, v)`; zero when no transition exists.
    pub fn prob(&self, u: VertexId, v: VertexId) -> f64 {
        self.rows[u]
            .binary_search_by_key(&(v as u32), |&(w, _)| w)
            .map(|idx| self.rows[u][idx].1)
            .unwrap_or(0.0)
    }

    /// Max over rows of `|sum(pi(x) P(x, y)) - pi(y)|`.
    pub fn stationarity_residual(&self, pi: &[f64]) -> f64 {
        let n = self.rows.len();
        let mut out = vec![0.0; n];
        for (row, &mass) in self.rows.iter().zip(pi) {
            for &(y, p) in row {
                out[y as usize] += mass * p;
            }
        }
        (0..n)
            .map(|y| (out[y] - pi[y]).abs())
            .fold(0.0, f64::max)
    }

    /// Time reversal: the kernel with `pi(v) Prev(v, u) = pi(u) P(u, v)`.
    /// Shares the stationary distribution; on a chain built from an Eulerian
    /// graph it equals the chain built on the reversed graph with the same
    /// holding map.
    pub fn time_reversal(&self) -> Self {
        let n = self.rows.len();
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for u in 0..n {
            for &(v, p) in &self.rows[u] {
                rows[v as usize].push((u as u32, self.pi[u] * p / self.pi[v as usize]));
            }
        }
        Self::from_rows(
            Arc::new(self.graph.reverse()),
            self.holding.clone(),
            rows,
            self.pi.clone(),
        )
    }

    /// Additive reversibilization `(P + Prev) / 2`: reversible with respect
    /// to the same stationary distribution, same diagonal.
    pub fn additive_reversibilization(&self) -> Self {
        let rev = self.time_reversal();
        let n = self.rows.len();
        let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);
        for v in 0..n {
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(self.rows[v].len() + 2);
            merged.extend(self.rows[v].iter().map(|&(w, p)| (w, 0.5 * p)));
            for &(w, p) in &rev.rows[v] {
                match merged.binary_search_by_key(&w, |&(t, _)| t) {
                    Ok(idx) => merged[idx].1 += 0.5 * p,
                    Err(idx) => merged.insert(idx, (w, 0.5 * p)),
                }
            }
            rows.push(merged);
        }
        Self::from_rows(
            Arc::clone(&self.graph),
            self.holding.clone(),
            rows,
            self.pi.clone(),
        )
    }

    /// Worst-pair detailed-balance residual `|pi(x)P(x,y) - pi(y)P(y,x)|`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let n = self.rows.len();
        let mut worst = 0.0f64;
        for x in 0..n {
            for &(y, p) in &self.rows[x] {
                let r = (self.pi[x] * p - self.pi[y as usize] * self.prob(y as usize, x)).abs();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// `mu0 * P^t` by `t` sparse row multiplications.
    pub fn evolve(&self, mu0: &DistributionVector, t: u64) -> DistributionVector {
        self.evolve_tracked(mu0, t).0
    }

    /// Like [`evolve`](Self::evolve) but also reports the largest mass
    /// drift `|sum - 1|` seen at any renormalization point.
    pub fn evolve_tracked(&self, mu0: &DistributionVector, t: u64) -> (DistributionVector, f64) {
        assert_eq!(mu0.len(), self.rows.len(), "distribution length mismatch");
        let mut cur = mu0.0.clone();
        let mut next = vec![0.0; cur.len()];
        let mut max_drift = 0.0f64;
        for step in 1..=t {
            self.step_distribution(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if step % RENORM_INTERVAL == 0 {
                let total: f64 = cur.iter().sum();
                max_drift = max_drift.max((total - 1.0).abs());
                for x in &mut cur {
                    *x /= total;
                }
            }
        }
        (DistributionVector(cur), max_drift)
    }

    /// One evolution step `next = cur * P`. `next` is overwritten.
    pub fn step_distribution(&self, cur: &[f64], next: &mut [f64]) {
        next.fill(0.0);
        for (z, &w) in cur.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(tgt, p) in &self.rows[z] {
                next[tgt as usize] += w * p;
            }
        }
    }

    /// Sample one kernel step out of `v`.
    pub fn step(&self, v: VertexId, rng: &mut impl Rng) -> VertexId {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        let row = &self.rows[v];
        for &(w, p) in row {
            acc += p;
            if r < acc {
                return w as usize;
            }
        }
        // Row sums to 1 within rounding; fall back to the last entry.
        row[row.len() - 1].0 as usize
    }

    /// Length `t + 1` path from `start`, deterministic in `seed`.
    pub fn sample_path(&self, start: VertexId, t: u64, seed: u64) -> WalkPath {
        let mut rng = replica_rng(seed, 0);
        let mut states = Vec::with_capacity(t as usize + 1);
        let mut v = start;
        states.push(v);
        for _ in 0..t {
            v = self.step(v, &mut rng);
            states.push(v);
        }
        WalkPath { states, seed }
    }
}
