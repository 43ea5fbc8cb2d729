//! Directed multigraph model, Eulerian validation, and the generators for
//! every graph family used by the experiments.
//!
//! Bias is represented by integer edge multiplicities rather than edge
//! weights, so a biased cycle walk is literally a simple random walk on a
//! multigraph and degree bookkeeping stays integral. Laziness does not live
//! here: holding probabilities belong to the chain layer, and no generator
//! emits self-loops.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense, contiguous vertex numbering `0..n`.
pub type VertexId = usize;

/// Directed multigraph with cached degree bookkeeping.
///
/// Immutable after construction; cheap to share read-only across workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerianMultigraph {
    n: usize,
    /// Per-vertex outgoing `(target, multiplicity)` pairs, sorted by target,
    /// multiplicities >= 1, duplicates merged.
    out_adj: Vec<Vec<(VertexId, u32)>>,
    out_deg: Vec<u64>,
    in_deg: Vec<u64>,
    /// Total directed edge count with multiplicity.
    m: u64,
}

/// Result of [`EulerianMultigraph::validate`]: pure classification flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphClass {
    /// Out-degree equals in-degree at every vertex.
    pub eulerian: bool,
    /// Every vertex reachable from every other, ignoring orientation.
    pub connected: bool,
    /// Set iff all in- and out-degrees share one common value.
    pub regular_degree: Option<u64>,
}

impl EulerianMultigraph {
    /// Build from a list of `(source, target, multiplicity)` edge groups.
    /// Duplicate `(source, target)` groups are merged by summing.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("vertex count must be positive".into()));
        }
        let mut merged: BTreeMap<(VertexId, VertexId), u64> = BTreeMap::new();
        for &(u, v, mult) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if mult == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has zero multiplicity"
                )));
            }
            *merged.entry((u, v)).or_insert(0) += u64::from(mult);
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut out_deg = vec![0u64; n];
        let mut in_deg = vec![0u64; n];
        let mut m = 0u64;
        for (&(u, v), &mult) in &merged {
            let mult32 = u32::try_from(mult).map_err(|_| {
                Error::InvalidGraph(format!("multiplicity overflow on edge ({u}, {v})"))
            })?;
            out_adj[u].push((v, mult32));
            out_deg[u] += mult;
            in_deg[v] += mult;
            m += mult;
        }
        Ok(Self {
            n,
            out_adj,
            out_deg,
            in_deg,
            m,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Total directed edge count, with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.m
    }

    pub fn out_degree(&self, v: VertexId) -> u64 {
        self.out_deg[v]
    }

    pub fn in_degree(&self, v: VertexId) -> u64 {
        self.in_deg[v]
    }

    /// Outgoing `(target, multiplicity)` pairs of `v`, sorted by target.
    pub fn out_edges(&self, v: VertexId) -> &[(VertexId, u32)] {
        &self.out_adj[v]
    }

    pub fn is_eulerian(&self) -> bool {
        (0..self.n).all(|v| self.out_deg[v] == self.in_deg[v])
    }

    /// Connectivity of the undirected view. For Eulerian graphs this agrees
    /// with strong connectivity.
    pub fn is_connected(&self) -> bool {
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    /// Strong connectivity of the directed graph, checked directly
    /// (forward and backward reachability from vertex 0).
    pub fn is_strongly_connected(&self) -> bool {
        let forward = self.reach_count(|v| self.out_adj[v].iter().map(|&(w, _)| w).collect());
        let rev = self.reverse();
        let backward = rev.reach_count(|v| rev.out_adj[v].iter().map(|&(w, _)| w).collect());
        forward == self.n && backward == self.n
    }

    fn reach_count(&self, succ: impl Fn(VertexId) -> Vec<VertexId>) -> usize {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for w in succ(u) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count
    }

    /// Degree-equality, connectivity and regularity flags.
    pub fn validate(&self) -> GraphClass {
        let eulerian = self.is_eulerian();
        let connected = self.is_connected();
        let d = self.out_deg[0];
        let regular = (0..self.n).all(|v| self.out_deg[v] == d && self.in_deg[v] == d);
        GraphClass {
            eulerian,
            connected,
            regular_degree: regular.then_some(d),
        }
    }

    /// Minimum out-degree over all vertices.
    pub fn min_degree(&self) -> u64 {
        self.out_deg.iter().copied().min().unwrap_or(0)
    }

    /// Every edge `(u, v, mult)` becomes `(v, u, mult)`; an involution that
    /// preserves `m` and swaps the degree roles.
    pub fn reverse(&self) -> Self {
        let mut out_adj = vec![Vec::new(); self.n];
        for u in 0..self.n {
            for &(v, mult) in &self.out_adj[u] {
                out_adj[v].push((u, mult));
            }
        }
        for row in &mut out_adj {
            row.sort_unstable_by_key(|&(v, _)| v);
        }
        Self {
            n: self.n,
            out_adj,
            out_deg: self.in_deg.clone(),
            in_deg: self.out_deg.clone(),
            m: self.m,
        }
    }

    /// Distinct neighbours of every vertex, ignoring orientation and
    /// multiplicity. Self-loops are dropped.
    pub fn undirected_adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut sets = vec![BTreeMap::new(); self.n];
        for u in 0..self.n {
            for &(v, _) in &self.out_adj[u] {
                if u != v {
                    sets[u].insert(v, ());
                    sets[v].insert(u, ());
                }
            }
        }
        sets.into_iter()
            .map(|s| s.into_keys().collect())
            .collect()
    }

    /// BFS distance in the undirected view.
    pub fn undirected_distance(&self, u: VertexId, v: VertexId) -> Result<usize> {
        let dist = self.undirected_distances_from(u);
        match dist[v] {
            Some(d) => Ok(d),
            None => Err(Error::Unreachable(v)),
        }
    }

    /// All BFS distances in the undirected view from one source.
    pub fn undirected_distances_from(&self, u: VertexId) -> Vec<Option<usize>> {
        let adj = self.undirected_adjacency();
        bfs_distances(&adj, u)
    }

    // ---- generators ------------------------------------------------------

    /// Directed cycle `Z_n` with `forward_mult` copies of every edge
    /// `i -> i+1` and `backward_mult` copies of `i -> i-1` (mod n).
    pub fn biased_cycle(n: usize, forward_mult: u32, backward_mult: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "biased cycle needs n >= 3, got {n}"
            )));
        }
        if forward_mult == 0 || backward_mult == 0 {
            return Err(Error::InvalidParameter(
                "cycle multiplicities must be >= 1".into(),
            ));
        }
        let mut edges = Vec::with_capacity(2 * n);
        for i in 0..n {
            edges.push((i, (i + 1) % n, forward_mult));
            edges.push((i, (i + n - 1) % n, backward_mult));
        }
        Self::from_edges(n, &edges)
    }

    /// Connected Eulerian digraph built by superposing random directed
    /// cycles until at least `target_m` edges are present. The first cycle
    /// spans all vertices, so connectivity holds by construction; the graph
    /// is deterministic in `seed`.
    pub fn random_eulerian(n: usize, target_m: u64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(
                "random Eulerian graph needs n >= 2".into(),
            ));
        }
        if target_m < n as u64 {
            return Err(Error::InvalidParameter(format!(
                "target_m = {target_m} below the spanning cycle size {n}"
            )));
        }
        const RETRIES: usize = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RETRIES {
            let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();
            let mut m = 0u64;
            let mut order: Vec<VertexId> = (0..n).collect();
            order.shuffle(&mut rng);
            push_cycle(&mut edges, &order);
            m += n as u64;
            let mut scratch: Vec<VertexId> = (0..n).collect();
            while m < target_m {
                let len = rng.random_range(2..=n);
                scratch.shuffle(&mut rng);
                push_cycle(&mut edges, &scratch[..len]);
                m += len as u64;
            }
            let g = Self::from_edges(n, &edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::ConnectivityRetries(RETRIES))
    }

    /// Regular Eulerian digraph: superposition of `d` independent spanning
    /// directed cycles. Every vertex gets out-degree = in-degree = `d`.
    pub fn random_regular_eulerian(n: usize, d: u32, seed: u64) -> Result<Self> {
        if n < 3 || d == 0 {
            return Err(Error::InvalidParameter(
                "regular generator needs n >= 3 and d >= 1".into(),
            ));
        }
        const RETRIES: usize = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RETRIES {
            let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();
            for _ in 0..d {
                let mut order: Vec<VertexId> = (0..n).collect();
                order.shuffle(&mut rng);
                push_cycle(&mut edges, &order);
            }
            let g = Self::from_edges(n, &edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(Error::ConnectivityRetries(RETRIES))
    }
}

fn push_cycle(edges: &mut Vec<(VertexId, VertexId, u32)>, order: &[VertexId]) {
    for i in 0..order.len() {
        edges.push((order[i], order[(i + 1) % order.len()], 1));
    }
}

fn bfs_distances(adj: &[Vec<VertexId>], source: VertexId) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

// ---- two-cycle gadget ------------------------------------------------------

/// Parameters of the two-cycle gadget: two biased cycles of length `n`
/// glued at vertex 0, with holding probability `alpha` on the left-cycle
/// sites at cycle distance in `[n/4, 3n/4]` from 0 and 1/2 everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetSpec {
    /// Cycle length; must be divisible by 4.
    pub n: usize,
    /// Holding probability on the marked left-cycle sites, in `[0, 1)`.
    pub alpha: f64,
}

/// Named vertices of the gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetLandmarks {
    /// The shared vertex of the two cycles.
    pub zero: VertexId,
    /// Antipode of 0 on the left cycle.
    pub left_antipode: VertexId,
    /// Antipode of 0 on the right cycle.
    pub right_antipode: VertexId,
}

/// The gadget graph together with its per-vertex holding probabilities.
#[derive(Debug, Clone)]
pub struct TwoCycleGadget {
    pub spec: GadgetSpec,
    pub graph: EulerianMultigraph,
    /// Holding probability per vertex.
    pub holding: Vec<f64>,
    pub landmarks: GadgetLandmarks,
}

impl GadgetSpec {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < 4 || n % 4 != 0 {
            return Err(Error::InvalidParameter(format!(
                "gadget cycle length must be divisible by 4, got {n}"
            )));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "holding probability must lie in [0, 1), got {alpha}"
            )));
        }
        Ok(Self { n, alpha })
    }

    /// Build the gadget: `2n - 1` vertices, clockwise bias 2/3 encoded as
    /// multiplicity 2 forward / 1 backward, vertex 0 with three edges into
    /// each cycle.
    pub fn build(self) -> TwoCycleGadget {
        let n = self.n;
        let mut edges = Vec::with_capacity(6 * n);
        // Both cycles use position coordinates 0..n with 0 shared; clockwise
        // means increasing position.
        for cycle in [Cycle::Left, Cycle::Right] {
            for pos in 0..n {
                let here = gadget_vertex(n, cycle, pos);
                let next = gadget_vertex(n, cycle, (pos + 1) % n);
                let prev = gadget_vertex(n, cycle, (pos + n - 1) % n);
                edges.push((here, next, 2));
                edges.push((here, prev, 1));
            }
        }
        let graph = EulerianMultigraph::from_edges(2 * n - 1, &edges)
            .expect("gadget edges are in range by construction");

        let mut holding = vec![0.5; 2 * n - 1];
        // Half-open arc (n/4, 3n/4]: exactly n/2 marked sites, so every
        // antipodal site pair holds one marked and one unmarked site. The
        // commute-moment identity (2 + 1/(1 - alpha)) f(n) needs that
        // balance exactly; a closed arc would double-mark one pair and
        // shift the mean by a constant.
        for pos in (n / 4 + 1)..=(3 * n / 4) {
            let v = gadget_vertex(n, Cycle::Left, pos);
            holding[v] = self.alpha;
        }
        let landmarks = GadgetLandmarks {
            zero: 0,
            left_antipode: gadget_vertex(n, Cycle::Left, n / 2),
            right_antipode: gadget_vertex(n, Cycle::Right, n / 2),
        };
        TwoCycleGadget {
            spec: self,
            graph,
            holding,
            landmarks,
        }
    }
}

/// Which cycle of the gadget a position coordinate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cycle {
    Left,
    Right,
}

/// Vertex numbering: 0 shared, left positions `1..n` map to ids `1..n`,
/// right positions `1..n` map to ids `n..2n-1`.
pub fn gadget_vertex(n: usize, cycle: Cycle, pos: usize) -> VertexId {
    debug_assert!(pos < n);
    if pos == 0 {
        0
    } else {
        match cycle {
            Cycle::Left => pos,
            Cycle::Right => n - 1 + pos,
        }
    }
}

impl TwoCycleGadget {
    /// The cycle-swap automorphism: fixes 0, exchanges matching left/right
    /// positions. The kernel built from this gadget commutes with it.
    pub fn mirror(&self, v: VertexId) -> VertexId {
        let n = self.spec.n;
        if v == 0 {
            0
        } else if v < n {
            n - 1 + v
        } else {
            v - (n - 1)
        }
    }

    /// One representative per mirror-symmetry orbit: vertex 0 and the left
    /// cycle. Worst-case distances over all starts equal worst-case over
    /// these.
    pub fn representative_starts(&self) -> Vec<VertexId> {
        (0..self.spec.n).collect()
    }
}

// ---- text format -----------------------------------------------------------

/// Serialize in the line-oriented text format:
/// header `eul <n> <m>`, one `<u> <v> <mult>` line per edge group, then an
/// optional `holding` section with `<v> <a>` lines. Writing then parsing is
/// the identity, and parsing then writing reproduces the input byte-for-byte
/// modulo comments and blank lines.
pub fn write_graph(g: &EulerianMultigraph, holding: Option<&[f64]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eul {} {}", g.vertex_count(), g.edge_count());
    for u in 0..g.vertex_count() {
        for &(v, mult) in g.out_edges(u) {
            let _ = writeln!(out, "{u} {v} {mult}");
        }
    }
    if let Some(h) = holding {
        let _ = writeln!(out, "holding");
        for (v, a) in h.iter().enumerate() {
            let _ = writeln!(out, "{v} {a}");
        }
    }
    out
}

/// Parse the text format written by [`write_graph`]. `#` starts a comment;
/// blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<(EulerianMultigraph, Option<Vec<f64>>)> {
    let mut n: Option<usize> = None;
    let mut declared_m = 0u64;
    let mut edges: Vec<(VertexId, VertexId, u32)> = Vec::new();
    let mut holding: Option<Vec<(VertexId, f64)>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            line: line_no,
            msg,
        };
        if n.is_none() {
            let mut parts = line.split_whitespace();
            if parts.next() != Some("eul") {
                return Err(parse_err("expected header `eul <n> <m>`".into()));
            }
            let nv: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad vertex count".into()))?;
            declared_m = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad edge count".into()))?;
            if parts.next().is_some() {
                return Err(parse_err("trailing tokens after header".into()));
            }
            n = Some(nv);
            continue;
        }
        if line == "holding" {
            if holding.is_some() {
                return Err(parse_err("duplicate holding section".into()));
            }
            holding = Some(Vec::new());
            continue;
        }
        if let Some(h) = holding.as_mut() {
            let mut parts = line.split_whitespace();
            let v: VertexId = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad holding vertex".into()))?;
            let a: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad holding value".into()))?;
            if parts.next().is_some() {
                return Err(parse_err("trailing tokens in holding line".into()));
            }
            if !(0.0..1.0).contains(&a) {
                return Err(parse_err(format!("holding value {a} outside [0, 1)")));
            }
            h.push((v, a));
        } else {
            let mut parts = line.split_whitespace();
            let mut next = |what: &str| {
                parts
                    .next()
                    .and_then(|s| s.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        msg: format!("bad {what}"),
                    })
            };
            let u = next("edge source")? as VertexId;
            let v = next("edge target")? as VertexId;
            let mult = u32::try_from(next("edge multiplicity")?)
                .map_err(|_| parse_err("multiplicity overflow".into()))?;
            edges.push((u, v, mult));
        }
    }

    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let g = EulerianMultigraph::from_edges(n, &edges)?;
    if g.edge_count() != declared_m {
        return Err(Error::InvalidGraph(format!(
            "header declares m = {declared_m} but edges sum to {}",
            g.edge_count()
        )));
    }
    let holding = match holding {
        None => None,
        Some(pairs) => {
            let mut h = vec![0.5; n];
            for (v, a) in pairs {
                if v >= n {
                    return Err(Error::InvalidGraph(format!(
                        "holding vertex {v} out of range"
                    )));
                }
                h[v] = a;
            }
            Some(h)
        }
    };
    Ok((g, holding))
}
