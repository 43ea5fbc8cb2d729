//! Cross-module invariants that need more machinery than module unit tests:
//! distributional agreement between the full gadget walk and the
//! independent-round sampler, geometric decay of early returns, worst-pair
//! return-probability stability, the visits-before-exit bound, consistency
//! of exact evolution with Monte Carlo frequencies, and the stability of the
//! short-time deviation constant across gadget sizes.

use eulerwalk::chain::{DistributionVector, Holding, LazyChain};
use eulerwalk::corpus;
use eulerwalk::explore::least_squares_slope;
use eulerwalk::graph::GadgetSpec;
use eulerwalk::hitting;
use eulerwalk::mixing;
use eulerwalk::sensitivity::{self, ProfileMode};
use eulerwalk::spectral;

const SEED: u64 = 77;

fn gadget_chain(n: usize, alpha: f64) -> LazyChain {
    let gadget = GadgetSpec::new(n, alpha).unwrap().build();
    LazyChain::from_graph(&gadget.graph, Holding::PerVertex(gadget.holding.clone())).unwrap()
}

/// The time of the fourth completed round of the full gadget walk matches
/// the independent-round sampler in distribution (Kolmogorov-Smirnov
/// distance within 0.05 at 10^4 replicas): the coupling between the two
/// processes fails only with probability exponentially small in n.
#[test]
fn round_times_match_independent_sampler() {
    let spec = GadgetSpec::new(64, sensitivity::golden_ratio_conjugate()).unwrap();
    let rho = 4;
    let replicas = 10_000;
    let full = sensitivity::gadget_round_completion_times(spec, rho, replicas, SEED).unwrap();
    let independent: Vec<f64> = (0..replicas as u64)
        .map(|r| {
            let (_, sums) = sensitivity::sample_rounds(spec, rho, SEED + 1000 + r).unwrap();
            sums[rho - 1] as f64
        })
        .collect();
    let ks = sensitivity::ks_distance(&full, &independent);
    assert!(ks <= 0.05, "KS distance {ks}");
}

/// Returns to the origin without having visited either antipode die off at
/// least geometrically: the log-frequency profile has negative slope.
#[test]
fn early_returns_decay_geometrically() {
    let spec = GadgetSpec::new(32, sensitivity::golden_ratio_conjugate()).unwrap();
    let freq =
        sensitivity::zero_return_before_antipode_profile(spec, 20 * 32, 40_000, SEED).unwrap();
    let points: Vec<(f64, f64)> = freq
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &f)| f > 0.0)
        .map(|(s, &f)| (s as f64, f.ln()))
        .collect();
    assert!(points.len() > 50, "profile too sparse: {} points", points.len());
    let slope = least_squares_slope(&points);
    assert!(slope < 0.0, "slope {slope}");
}

/// At t = n^(3/2) every pair (x, y) has `n P^t(x, y)` within a bounded
/// ratio, and the ratio is stable (within a factor 3) across sizes.
#[test]
fn worst_pair_return_ratio_is_stable() {
    let mut ratios = Vec::new();
    for n in [32usize, 64] {
        let chain = gadget_chain(n, sensitivity::golden_ratio_conjugate());
        let states = chain.state_count();
        let t = (n as f64).powf(1.5) as u64;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for v in 0..states {
            let row = chain.evolve(&DistributionVector::point_mass(states, v), t);
            for &p in row.masses() {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        assert!(lo > 0.0, "zero entry at n = {n}");
        ratios.push(hi / lo);
    }
    let spread = ratios.iter().copied().fold(0.0f64, f64::max)
        / ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread <= 3.0, "ratios {ratios:?}");
}

/// Empirical round-sum hit frequency sits at the 1/(mean round) scale over
/// the renewal window: about 0.15/n per time slot, well inside [0.05/n, 5/n]
/// on window average.
#[test]
fn round_sum_profile_has_renewal_density() {
    let n = 32;
    let spec = GadgetSpec::new(n, sensitivity::golden_ratio_conjugate()).unwrap();
    let t_lo = (n as f64).powf(1.5) as usize;
    let t_hi = 5 * t_lo;
    let freq = sensitivity::round_sum_profile(spec, t_hi as u64, 20_000, SEED).unwrap();
    let window = &freq[t_lo..=t_hi];
    let avg = window.iter().sum::<f64>() / window.len() as f64;
    let scaled = avg * n as f64;
    assert!(
        (0.05..=5.0).contains(&scaled),
        "window-average n * frequency = {scaled}"
    );
}

/// Visits to the start before leaving a set stay within 10 |A| on regular
/// graphs (three standard errors of Monte Carlo slack).
#[test]
fn visits_before_exit_bound() {
    for entry in corpus::regular_small() {
        let chain = corpus::nonlazy_chain(&entry.graph).unwrap();
        let n = entry.graph.vertex_count();
        // A handful of nested subsets around vertex 0.
        for size in [1usize, n / 3, n / 2, n - 1] {
            let size = size.max(1);
            let subset: Vec<usize> = (0..size).collect();
            let est = hitting::visits_before_exit(&chain, &subset, 0, 4000, SEED).unwrap();
            assert!(
                est.mean <= 10.0 * size as f64 + 3.0 * est.stderr,
                "{}: {} visits from |A| = {size}",
                entry.name,
                est.mean
            );
        }
    }
}

/// Exact evolution agrees with Monte Carlo frequency where both are cheap:
/// the origin mass of the gadget at t = 512.
#[test]
fn exact_evolution_matches_monte_carlo_frequency() {
    let spec = GadgetSpec::new(64, sensitivity::golden_ratio_conjugate()).unwrap();
    let times = [512u64];
    let exact = sensitivity::return_probability_profile(spec, &times, ProfileMode::Exact).unwrap();
    let replicas = 40_000;
    let mc = sensitivity::return_probability_profile(
        spec,
        &times,
        ProfileMode::MonteCarlo {
            replicas,
            seed: SEED,
        },
    )
    .unwrap();
    let p = exact[0].1;
    let sigma = (p * (1.0 - p) / replicas as f64).sqrt();
    assert!(
        (p - mc[0].1).abs() <= 3.0 * sigma,
        "exact {p} vs Monte Carlo {}",
        mc[0].1
    );
}

/// The smallest constant making the short-time deviation bound dominate the
/// measured relative deviations stays stable across gadget sizes.
#[test]
fn short_time_constant_is_stable_across_sizes() {
    let mut constants = Vec::new();
    for n in [16usize, 32, 64] {
        let chain = gadget_chain(n, sensitivity::golden_ratio_conjugate());
        let states = chain.state_count();
        let m = chain.graph().edge_count();
        let pi = chain.stationary().to_vec();
        let horizon = 10 * (states * states) as u64;
        // Evolve every row in lockstep, tracking the worst ratio of
        // measured deviation to the bound shape at each time.
        let mut rows: Vec<Vec<f64>> = (0..states)
            .map(|v| {
                DistributionVector::point_mass(states, v)
                    .masses()
                    .to_vec()
            })
            .collect();
        let mut next = vec![0.0; states];
        let mut c_min = 0.0f64;
        for t in 1..=horizon {
            let mut dinf = 0.0f64;
            for row in rows.iter_mut() {
                chain.step_distribution(row, &mut next);
                row.copy_from_slice(&next);
            }
            for row in &rows {
                for (p, q) in row.iter().zip(&pi) {
                    dinf = dinf.max((p / q - 1.0).abs());
                }
            }
            let shape = spectral::short_time_bound(states, m, t, false, 1.0);
            c_min = c_min.max(dinf / shape);
        }
        constants.push(c_min);
    }
    let spread = constants.iter().copied().fold(0.0f64, f64::max)
        / constants.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread <= 5.0, "constants {constants:?}");
}

/// The pair-of-starts distance is submultiplicative on every corpus chain.
#[test]
fn pair_distance_submultiplicative_on_corpus() {
    for entry in corpus::random_eulerian_small() {
        let chain = corpus::lazy_chain(&entry.graph).unwrap();
        for (s, t) in [(1u64, 2u64), (3, 5), (8, 8), (0, 6)] {
            let check = mixing::dbar_submultiplicativity(&chain, s, t).unwrap();
            assert!(check.holds, "{}: ({s}, {t})", entry.name);
        }
    }
}

/// Submultiplicativity holds on the gadget at the mixing scale itself:
/// s = t = n^(3/2) / 2.
#[test]
fn submultiplicativity_at_the_gadget_mixing_scale() {
    let chain = gadget_chain(32, sensitivity::golden_ratio_conjugate());
    let half_window = (32f64.powf(1.5) / 2.0) as u64;
    let check = mixing::submultiplicativity_audit(&chain, half_window, half_window).unwrap();
    assert!(check.holds, "{check:?}");
}

/// On biased lazy cycles the uniform-mixing time scales as n^2 (ratios
/// stable within a factor 2 across sizes) while the worst hitting time
/// scales linearly.
#[test]
fn biased_cycle_mixing_quadratic_but_hitting_linear() {
    let mut unif_ratios = Vec::new();
    let mut hit_ratios = Vec::new();
    for n in [16usize, 32, 64] {
        let g = eulerwalk::graph::EulerianMultigraph::biased_cycle(n, 2, 1).unwrap();
        let chain = corpus::lazy_chain(&g).unwrap();
        let t_unif = mixing::threshold_time(&chain, mixing::Metric::LInf, 0.25)
            .unwrap()
            .steps()
            .unwrap();
        unif_ratios.push(t_unif as f64 / (n * n) as f64);
        let worst_hit = hitting::hitting_times(&chain).unwrap().max_entry();
        hit_ratios.push(worst_hit / n as f64);
    }
    let spread = |xs: &[f64]| {
        xs.iter().copied().fold(0.0f64, f64::max) / xs.iter().copied().fold(f64::INFINITY, f64::min)
    };
    assert!(
        spread(&unif_ratios) <= 2.0,
        "t_unif/n^2 ratios {unif_ratios:?}"
    );
    assert!(
        spread(&hit_ratios) <= 2.0,
        "max hitting / n ratios {hit_ratios:?}"
    );
}
