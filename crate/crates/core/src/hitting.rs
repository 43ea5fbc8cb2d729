//! Exact hitting, commute and exit times via linear solves, Monte Carlo
//! cover/visit/collision estimators, and the audits of the universal bounds
//! that hold on Eulerian digraphs: commute within `m * distance`, cover
//! within `16 m n / d_min`, exit from a set `A` within `10 |A|^2` on regular
//! graphs, visit counts within `8 sqrt(t)`, and `12 |W|^2` for partition
//! hitting times.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::LazyChain;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::linalg;
use crate::report::AuditVerdict;
use crate::rng::{replica_rng, SampleStats};

/// Matrix of expected hitting times, `entry(u, v) = E_u[first visit to v]`,
/// zero on the diagonal.
#[derive(Debug, Clone)]
pub struct HittingMatrix {
    n: usize,
    data: Vec<f64>,
}

impl HittingMatrix {
    pub fn entry(&self, u: VertexId, v: VertexId) -> f64 {
        self.data[u * self.n + v]
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn commute(&self, u: VertexId, v: VertexId) -> f64 {
        self.entry(u, v) + self.entry(v, u)
    }

    /// Largest first-step residual `|H(u,v) - 1 - sum_w P(u,w) H(w,v)|`
    /// over `u != v`.
    pub fn first_step_residual(&self, c: &LazyChain) -> f64 {
        let mut worst = 0.0f64;
        for v in 0..self.n {
            for u in 0..self.n {
                if u == v {
                    continue;
                }
                let mut rhs = 1.0;
                for &(w, p) in &c.rows()[u] {
                    rhs += p * self.entry(w as usize, v);
                }
                worst = worst.max((self.entry(u, v) - rhs).abs());
            }
        }
        worst
    }
}

/// Expected hitting times for every (start, target) pair: one linear solve
/// per target, solved in parallel.
pub fn hitting_times(c: &LazyChain) -> Result<HittingMatrix> {
    let n = c.state_count();
    let columns: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|target| linalg::hitting_times_to(c, target))
        .collect();
    let mut data = vec![0.0; n * n];
    for (target, col) in columns.into_iter().enumerate() {
        let col = col?;
        for u in 0..n {
            data[u * n + target] = col[u];
        }
    }
    Ok(HittingMatrix { n, data })
}

/// `H(u, v) + H(v, u)` by two targeted solves.
pub fn commute_time(c: &LazyChain, u: VertexId, v: VertexId) -> Result<f64> {
    if u == v {
        return Err(Error::InvalidParameter(
            "commute time needs two distinct vertices".into(),
        ));
    }
    let to_v = linalg::hitting_times_to(c, v)?;
    let to_u = linalg::hitting_times_to(c, u)?;
    Ok(to_v[u] + to_u[v])
}

/// Expected first time outside `subset` starting from `start in subset`.
pub fn exit_time(c: &LazyChain, subset: &[VertexId], start: VertexId) -> Result<f64> {
    if subset.len() >= c.state_count() {
        return Err(Error::InvalidParameter(
            "exit set must be a proper subset".into(),
        ));
    }
    let idx = subset
        .iter()
        .position(|&v| v == start)
        .ok_or_else(|| Error::InvalidParameter("start must lie inside the subset".into()))?;
    Ok(linalg::exit_times(c, subset)?[idx])
}

// ---- moving targets ----------------------------------------------------------

/// Deterministic moving target: a map from time to vertex.
#[derive(Debug, Clone)]
pub enum Trajectory {
    /// Fixed vertex.
    Static(VertexId),
    /// Cycles through `order`, one move per step.
    Sweep(Vec<VertexId>),
}

impl Trajectory {
    pub fn at(&self, t: u64) -> VertexId {
        match self {
            Trajectory::Static(v) => *v,
            Trajectory::Sweep(order) => order[(t % order.len() as u64) as usize],
        }
    }

    /// Adversarial sweep for collision experiments: visits vertices in order
    /// of decreasing undirected distance from `start`, so the target starts
    /// at an antipode and keeps moving.
    pub fn antipodal_sweep(c: &LazyChain, start: VertexId) -> Self {
        let dist = c.graph().undirected_distances_from(start);
        let mut order: Vec<VertexId> = (0..c.state_count()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(dist[v].unwrap_or(0)), v));
        Trajectory::Sweep(order)
    }
}

/// Monte Carlo collision-time estimate against a moving target.
#[derive(Debug, Clone, Serialize)]
pub struct CollisionEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Fraction of replicas that never collided within the horizon; those
    /// contribute the horizon itself to the mean.
    pub truncated_fraction: f64,
    /// Set when more than 10% of replicas were truncated.
    pub flagged: bool,
    /// Mean of the accumulated occupation score
    /// `sum_(s=1..tau) 1(X_s = u_s) / pi(u_s)` at collision, a diagnostic
    /// for the second-moment argument behind the collision bound.
    pub mean_occupation_score: f64,
}

/// First time `X_t = u_t` (including `t = 0`), truncated at `horizon`.
pub fn moving_target_collision(
    c: &LazyChain,
    start: VertexId,
    traj: &Trajectory,
    replicas: usize,
    horizon: u64,
    seed: u64,
) -> Result<CollisionEstimate> {
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    let pi = c.stationary();
    let outcomes: Vec<(f64, bool, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut x = start;
            let mut score = 0.0;
            if x == traj.at(0) {
                return (0.0, false, score);
            }
            for t in 1..=horizon {
                x = c.step(x, &mut rng);
                let u = traj.at(t);
                if x == u {
                    score += 1.0 / pi[u];
                    return (t as f64, false, score);
                }
            }
            (horizon as f64, true, score)
        })
        .collect();
    let samples: Vec<f64> = outcomes.iter().map(|&(t, _, _)| t).collect();
    let truncated = outcomes.iter().filter(|&&(_, trunc, _)| trunc).count();
    let stats = SampleStats::from_samples(&samples);
    let truncated_fraction = truncated as f64 / replicas as f64;
    Ok(CollisionEstimate {
        mean: stats.mean,
        stderr: stats.stderr,
        replicas,
        seed,
        truncated_fraction,
        flagged: truncated_fraction > 0.10,
        mean_occupation_score: outcomes.iter().map(|&(_, _, s)| s).sum::<f64>()
            / replicas as f64,
    })
}

// ---- visit counts and cover times --------------------------------------------

/// Monte Carlo estimate of `E_v[#{s < t : X_s = v}]`; `s = 0` counts, so
/// the value is at least 1.
pub fn visit_count(
    c: &LazyChain,
    v: VertexId,
    t: u64,
    replicas: usize,
    seed: u64,
) -> Result<SampleStats> {
    if t < 1 {
        return Err(Error::InvalidParameter("visit count needs t >= 1".into()));
    }
    let samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut x = v;
            let mut visits = 1u64;
            for _ in 1..t {
                x = c.step(x, &mut rng);
                if x == v {
                    visits += 1;
                }
            }
            visits as f64
        })
        .collect();
    Ok(SampleStats::from_samples(&samples))
}

/// Monte Carlo estimate of `E_v[visits to v strictly before hitting the
/// complement of subset]`, starting from `v` inside `subset`.
pub fn visits_before_exit(
    c: &LazyChain,
    subset: &[VertexId],
    v: VertexId,
    replicas: usize,
    seed: u64,
) -> Result<SampleStats> {
    let mut inside = vec![false; c.state_count()];
    for &s in subset {
        inside[s] = true;
    }
    if !inside[v] {
        return Err(Error::InvalidParameter("start must lie inside the subset".into()));
    }
    if subset.len() >= c.state_count() {
        return Err(Error::InvalidParameter("exit set must be a proper subset".into()));
    }
    let samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut x = v;
            let mut visits = 1u64;
            loop {
                x = c.step(x, &mut rng);
                if !inside[x] {
                    return visits as f64;
                }
                if x == v {
                    visits += 1;
                }
            }
        })
        .collect();
    Ok(SampleStats::from_samples(&samples))
}

/// Monte Carlo estimate of the cover time from `start`.
pub fn cover_time(
    c: &LazyChain,
    start: VertexId,
    replicas: usize,
    seed: u64,
) -> Result<SampleStats> {
    let n = c.state_count();
    let samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut remaining = n - 1;
            let mut x = start;
            let mut t = 0u64;
            while remaining > 0 {
                x = c.step(x, &mut rng);
                t += 1;
                if !seen[x] {
                    seen[x] = true;
                    remaining -= 1;
                }
            }
            t as f64
        })
        .collect();
    Ok(SampleStats::from_samples(&samples))
}

// ---- bound audits -------------------------------------------------------------

/// Outcome of the exact structural audits for one chain.
#[derive(Debug, Clone, Serialize)]
pub struct BoundAuditReport {
    pub verdicts: Vec<AuditVerdict>,
}

impl BoundAuditReport {
    pub fn clean(&self) -> bool {
        self.verdicts.iter().all(|v| v.violations == 0)
    }
}

/// Exact audits on one chain:
/// commute within `m * undirected distance` for every pair; short paths out
/// of dense sets, `d(v, A^c) <= 3|A|/d_min + 1`; and partition hitting
/// times `H(s, Z) <= 12 |W|^2` for `s in W` adjacent to `Z`. Configurations
/// are exhaustive below 8 vertices and sampled (up to `max_configs` per
/// family) above.
pub fn bound_audit(c: &LazyChain, max_configs: usize, seed: u64) -> Result<BoundAuditReport> {
    let g = c.graph();
    let n = c.state_count();
    let m = g.edge_count() as f64;
    let mut verdicts = Vec::new();

    // Commute-distance bound, all ordered pairs.
    let hitting = hitting_times(c)?;
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut first = None;
    for u in 0..n {
        let dist = g.undirected_distances_from(u);
        for (v, hop) in dist.iter().enumerate().skip(u + 1) {
            let d = hop.ok_or(Error::Unreachable(v))? as f64;
            checked += 1;
            if hitting.commute(u, v) > m * d + 1e-9 {
                violations += 1;
                first.get_or_insert_with(|| {
                    format!("commute({u},{v}) = {} > m*d = {}", hitting.commute(u, v), m * d)
                });
            }
        }
    }
    verdicts.push(AuditVerdict {
        bound: "commute <= m * distance".into(),
        checked,
        violations,
        first_violation: first,
    });

    // Escape distance out of dense sets on the undirected view.
    let adj = g.undirected_adjacency();
    let d_min = adj.iter().map(Vec::len).min().unwrap_or(0) as f64;
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut first = None;
    for (subset, _) in subset_start_configs(n, max_configs, seed) {
        let mut inside = vec![false; n];
        for &v in &subset {
            inside[v] = true;
        }
        for &v in &subset {
            let dists = g.undirected_distances_from(v);
            let nearest_outside = (0..n)
                .filter(|&w| !inside[w])
                .filter_map(|w| dists[w])
                .min();
            let Some(steps) = nearest_outside else {
                continue;
            };
            checked += 1;
            if steps as f64 > 3.0 * subset.len() as f64 / d_min + 1.0 + 1e-9 {
                violations += 1;
                first.get_or_insert_with(|| {
                    format!("d({v}, complement of |A| = {}) = {steps}", subset.len())
                });
            }
        }
    }
    verdicts.push(AuditVerdict {
        bound: "escape distance <= 3|A|/d_min + 1".into(),
        checked,
        violations,
        first_violation: first,
    });

    // Partition bound: exit from W starting at a boundary vertex.
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut first = None;
    for (w_side, _) in subset_start_configs(n, max_configs, seed.wrapping_add(1)) {
        let mut in_w = vec![false; n];
        for &v in &w_side {
            in_w[v] = true;
        }
        // Boundary starts: vertices of W with an undirected neighbour in Z.
        let exits = linalg::exit_times(c, &w_side)?;
        for (idx, &s) in w_side.iter().enumerate() {
            if !adj[s].iter().any(|&z| !in_w[z]) {
                continue;
            }
            checked += 1;
            let bound = 12.0 * (w_side.len() as f64).powi(2);
            if exits[idx] > bound + 1e-9 {
                violations += 1;
                first.get_or_insert_with(|| {
                    format!("H({s}, Z) = {} > 12|W|^2 = {bound}", exits[idx])
                });
            }
        }
    }
    verdicts.push(AuditVerdict {
        bound: "H(s, Z) <= 12|W|^2".into(),
        checked,
        violations,
        first_violation: first,
    });

    Ok(BoundAuditReport { verdicts })
}

/// Proper nonempty subsets to audit: all of them below 8 vertices,
/// otherwise `max_configs` sampled uniformly by size.
fn subset_start_configs(
    n: usize,
    max_configs: usize,
    seed: u64,
) -> Vec<(Vec<VertexId>, VertexId)> {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut configs = Vec::new();
    if n < 8 {
        for mask in 1u32..(1 << n) - 1 {
            let subset: Vec<VertexId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let start = subset[0];
            configs.push((subset, start));
        }
    } else {
        let mut rng = replica_rng(seed, 0);
        let mut scratch: Vec<VertexId> = (0..n).collect();
        for _ in 0..max_configs {
            let size = rng.random_range(1..n);
            scratch.shuffle(&mut rng);
            let mut subset: Vec<VertexId> = scratch[..size].to_vec();
            subset.sort_unstable();
            let start = subset[rng.random_range(0..size)];
            configs.push((subset, start));
        }
    }
    configs
}
