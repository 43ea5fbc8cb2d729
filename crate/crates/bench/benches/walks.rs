//! Throughput benchmarks for the hot paths: distribution evolution, kernel
//! power assembly with threshold search, path sampling, and the subset
//! spectrum sweep.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use eulerwalk::chain::{DistributionVector, Holding, LazyChain};
use eulerwalk::graph::{EulerianMultigraph, GadgetSpec};
use eulerwalk::mixing::{self, Metric};
use eulerwalk::sensitivity;
use eulerwalk::spectral::{self, SubsetMode};

fn gadget_chain(n: usize) -> LazyChain {
    let gadget = GadgetSpec::new(n, sensitivity::golden_ratio_conjugate())
        .unwrap()
        .build();
    LazyChain::from_graph(&gadget.graph, Holding::PerVertex(gadget.holding.clone())).unwrap()
}

fn bench_evolve(c: &mut Criterion) {
    let chain = gadget_chain(64);
    let start = DistributionVector::point_mass(chain.state_count(), 0);
    c.bench_function("evolve_gadget64_1000_steps", |b| {
        b.iter(|| black_box(chain.evolve(&start, 1000)))
    });
}

fn bench_threshold(c: &mut Criterion) {
    let chain = gadget_chain(32);
    c.bench_function("threshold_gadget32_tv", |b| {
        b.iter(|| mixing::threshold_time(black_box(&chain), Metric::Tv, 0.25).unwrap())
    });
}

fn bench_sample_path(c: &mut Criterion) {
    let g = EulerianMultigraph::biased_cycle(64, 2, 1).unwrap();
    let chain = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
    c.bench_function("sample_path_cycle64_10k_steps", |b| {
        let mut seed = 0u64;
        b.iter_batched(
            || {
                seed += 1;
                seed
            },
            |s| black_box(chain.sample_path(0, 10_000, s)),
            BatchSize::SmallInput,
        )
    });
}

fn bench_spectral_profile(c: &mut Criterion) {
    let g = EulerianMultigraph::random_eulerian(10, 26, 104).unwrap();
    let chain = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
    c.bench_function("spectral_profile_n10_connected", |b| {
        b.iter(|| spectral::spectral_profile(black_box(&chain), SubsetMode::ConnectedOnly).unwrap())
    });
}

criterion_group!(
    benches,
    bench_evolve,
    bench_threshold,
    bench_sample_path,
    bench_spectral_profile
);
criterion_main!(benches);
