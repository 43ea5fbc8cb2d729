//! Bundled, seeded graph corpora shared by the audit suites and the CLI.
//!
//! Everything here is deterministic: the corpus a test sees is the corpus
//! `audit-all` sees. Sizes are chosen so that exact enumeration (subset
//! spectra, full hitting matrices) stays cheap on the small families while
//! the medium families still exercise the Monte Carlo estimators.

use crate::chain::{Holding, LazyChain};
use crate::error::Result;
use crate::graph::EulerianMultigraph;

/// A named corpus graph.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: EulerianMultigraph,
}

fn entry(name: impl Into<String>, graph: EulerianMultigraph) -> CorpusEntry {
    CorpusEntry {
        name: name.into(),
        graph,
    }
}

/// Random connected Eulerian digraphs with 5..=12 vertices and edge counts
/// from sparse to a few multiples of `n`.
pub fn random_eulerian_small() -> Vec<CorpusEntry> {
    let params: &[(usize, u64, u64)] = &[
        (5, 10, 101),
        (6, 14, 102),
        (8, 20, 103),
        (10, 26, 104),
        (12, 30, 105),
        (12, 48, 106),
    ];
    params
        .iter()
        .map(|&(n, m, seed)| {
            entry(
                format!("rand-n{n}-m{m}"),
                EulerianMultigraph::random_eulerian(n, m, seed)
                    .expect("bundled corpus parameters are feasible"),
            )
        })
        .collect()
}

/// Small regular graphs: biased cycles plus random regular superpositions.
pub fn regular_small() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for n in [8usize, 12, 16] {
        out.push(entry(
            format!("biased-cycle-{n}"),
            EulerianMultigraph::biased_cycle(n, 2, 1).expect("n >= 3"),
        ));
    }
    for &(n, d, seed) in &[(8usize, 2u32, 201u64), (10, 3, 202), (12, 3, 203)] {
        out.push(entry(
            format!("reg-n{n}-d{d}"),
            EulerianMultigraph::random_regular_eulerian(n, d, seed).expect("feasible"),
        ));
    }
    out
}

/// Regular graphs up to 64 vertices for the exploration-time audits.
pub fn regular_medium() -> Vec<CorpusEntry> {
    vec![
        entry(
            "biased-cycle-32",
            EulerianMultigraph::biased_cycle(32, 2, 1).expect("n >= 3"),
        ),
        entry(
            "reg-n32-d3",
            EulerianMultigraph::random_regular_eulerian(32, 3, 301).expect("feasible"),
        ),
        entry(
            "reg-n64-d3",
            EulerianMultigraph::random_regular_eulerian(64, 3, 302).expect("feasible"),
        ),
        entry(
            "biased-cycle-64",
            EulerianMultigraph::biased_cycle(64, 2, 1).expect("n >= 3"),
        ),
    ]
}

/// General (non-regular) Eulerian graphs up to 64 vertices.
pub fn general_medium() -> Vec<CorpusEntry> {
    vec![
        entry(
            "rand-n32-m80",
            EulerianMultigraph::random_eulerian(32, 80, 401).expect("feasible"),
        ),
        entry(
            "rand-n48-m100",
            EulerianMultigraph::random_eulerian(48, 100, 402).expect("feasible"),
        ),
        entry(
            "rand-n64-m160",
            EulerianMultigraph::random_eulerian(64, 160, 403).expect("feasible"),
        ),
    ]
}

/// Regular families across a size grid, for scaling stability checks.
pub fn regular_scaling(sizes: &[usize]) -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for &n in sizes {
        out.push(entry(
            format!("biased-cycle-{n}"),
            EulerianMultigraph::biased_cycle(n, 2, 1).expect("n >= 3"),
        ));
        out.push(entry(
            format!("reg-n{n}-d3"),
            EulerianMultigraph::random_regular_eulerian(n, 3, 500 + n as u64)
                .expect("feasible"),
        ));
    }
    out
}

/// Lazy walk with uniform holding 1/2.
pub fn lazy_chain(g: &EulerianMultigraph) -> Result<LazyChain> {
    LazyChain::from_graph(g, Holding::Constant(0.5))
}

/// Simple (non-lazy) walk.
pub fn nonlazy_chain(g: &EulerianMultigraph) -> Result<LazyChain> {
    LazyChain::from_graph(g, Holding::Constant(0.0))
}
