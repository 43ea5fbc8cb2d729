//! The laziness-sensitivity laboratory: diophantine utilities, the
//! two-cycle gadget's round decomposition and closed-form commute moments,
//! return-probability profiles, a line-walk concentration check, and the
//! headline scaling experiment.
//!
//! The driving mechanism: a walk on the glued cycles alternates left and
//! right tours whose mean durations have ratio `2 + 1/(1 - alpha)` to 4.
//! With `alpha = (sqrt(5) - 1) / 2` the induced winding ratio is a badly
//! approximable irrational, round-count fluctuations spread return times
//! over a window of width order `n` after about `sqrt(n)` rounds, and the
//! chain mixes in order `n^(3/2)` steps instead of the `n^2` needed under
//! uniform laziness.

use rand::Rng;
use serde::Serialize;

use crate::chain::{DistributionVector, Holding, LazyChain};
use crate::error::{Error, Result};
use crate::graph::{Cycle, EulerianMultigraph, GadgetSpec, VertexId};
use crate::mixing::{threshold_report_with_cap, ThresholdReport};
use crate::rng::replica_rng;

/// `(sqrt 5 - 1) / 2`, the holding probability of the sensitive gadget.
pub fn golden_ratio_conjugate() -> f64 {
    let value = (5f64.sqrt() - 1.0) / 2.0;
    // Same constant by the reciprocal route; equality to the last bit is a
    // startup sanity check on the arithmetic.
    debug_assert!((value - 2.0 / (5f64.sqrt() + 1.0)).abs() < 1e-15);
    value
}

// ---- continued fractions -----------------------------------------------------

/// Simple continued fraction of a number in (0, 1) with its convergents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuedFraction {
    /// `a_0 = 0` followed by the partial quotients `a_1, a_2, ..`.
    pub coefficients: Vec<u64>,
    /// Convergent numerators `p_i`, aligned with `coefficients`.
    pub numerators: Vec<u64>,
    /// Convergent denominators `q_i`; `q_(i+1) = a_(i+1) q_i + q_(i-1)`.
    pub denominators: Vec<u64>,
}

/// Floating-point expansions are unreliable past a few dozen quotients.
pub const CF_DEPTH_LIMIT: usize = 40;

/// Expand `x in (0, 1)` to at most `depth` partial quotients; rational
/// inputs terminate early. Reconstructing the final convergent reproduces
/// `x` within 1e-9.
pub fn cf_expand(x: f64, depth: usize) -> Result<ContinuedFraction> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "continued fraction input must lie in (0, 1), got {x}"
        )));
    }
    if depth == 0 || depth > CF_DEPTH_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "depth must lie in 1..={CF_DEPTH_LIMIT}"
        )));
    }
    let mut coefficients = vec![0u64];
    let mut numerators = vec![0u64];
    let mut denominators = vec![1u64];
    let (mut p_prev, mut q_prev) = (1u64, 0u64);
    let mut frac = x;
    for _ in 0..depth {
        // Terminate once the remainder is indistinguishable from rational.
        if frac.abs() < 1e-12 {
            break;
        }
        let recip = 1.0 / frac;
        let a = recip.floor() as u64;
        frac = recip - recip.floor();
        let p = a * numerators.last().unwrap() + p_prev;
        let q = a * denominators.last().unwrap() + q_prev;
        p_prev = *numerators.last().unwrap();
        q_prev = *denominators.last().unwrap();
        coefficients.push(a);
        numerators.push(p);
        denominators.push(q);
    }
    Ok(ContinuedFraction {
        coefficients,
        numerators,
        denominators,
    })
}

impl ContinuedFraction {
    /// Value of the deepest convergent.
    pub fn reconstruct(&self) -> f64 {
        let p = *self.numerators.last().unwrap() as f64;
        let q = *self.denominators.last().unwrap() as f64;
        if q == 0.0 {
            0.0
        } else {
            p / q
        }
    }

    /// Largest partial quotient past `a_0`.
    pub fn max_coefficient(&self) -> u64 {
        self.coefficients.iter().skip(1).copied().max().unwrap_or(0)
    }
}

/// Gap and worst-window occupancy of `{ k xi mod 1 : k <= n }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    /// Largest cyclic spacing between adjacent sorted points.
    pub gap: f64,
    /// Most points falling in any interval of length `1/n`.
    pub max_interval_count: usize,
}

/// Sort the orbit points and measure the extreme spacing and the fullest
/// `1/n`-window. For an irrational with partial quotients below `B` the gap
/// stays within `2B/n` and no window holds more than `B + 2` points.
pub fn sequence_gap(xi: f64, n: usize) -> Result<GapReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    let mut points: Vec<f64> = (1..=n).map(|k| (k as f64 * xi).fract()).collect();
    points.sort_by(f64::total_cmp);
    let mut gap: f64 = 1.0 - points[n - 1] + points[0];
    for w in points.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    let window = 1.0 / n as f64;
    let mut max_count = 0usize;
    let mut j = 0usize;
    for i in 0..n {
        if j < i {
            j = i;
        }
        // Walk j forward while points (cyclically unwrapped) stay inside
        // the closed window starting at points[i].
        while j + 1 < i + n {
            let next = points[(j + 1) % n] + if j + 1 >= n { 1.0 } else { 0.0 };
            if next <= points[i] + window {
                j += 1;
            } else {
                break;
            }
        }
        max_count = max_count.max(j - i + 1);
    }
    Ok(GapReport {
        gap,
        max_interval_count: max_count,
    })
}

// ---- gadget moments and rounds -------------------------------------------------

/// Closed-form commute moments of the gadget's two cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GadgetMoments {
    /// Expected hitting time of the antipode for the non-lazy biased walk
    /// on a single cycle; the unit everything else is measured in.
    pub nonlazy_antipode_hit: f64,
    /// Mean commute 0 -> antipode -> 0 on the left (alpha-marked) cycle.
    pub mean_left_commute: f64,
    /// Mean commute on the right (uniformly lazy) cycle; always 4x the
    /// base unit.
    pub mean_right_commute: f64,
    /// `mean_left_commute / nonlazy_antipode_hit = 2 + 1/(1 - alpha)`.
    pub left_commute_factor: f64,
    /// `2 (beta - 4) / (beta + 4)` where beta is the left factor: the
    /// rotation number whose diophantine quality controls mixing.
    pub winding_ratio: f64,
}

/// Evaluate the closed forms. The base unit is
/// `f(n) = 3n/2 - 3n 2^(-n/2) (2^(n/2) - 1) / (2^(n/2) - 2^(-n/2))`,
/// cross-checked against a linear-solve oracle in the tests.
pub fn gadget_moments(n: usize, alpha: f64) -> Result<GadgetMoments> {
    if n % 4 != 0 || n < 4 {
        return Err(Error::InvalidParameter(
            "gadget moments need n divisible by 4".into(),
        ));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter("alpha must lie in [0, 1)".into()));
    }
    let nf = n as f64;
    let half_pow = 2f64.powf(nf / 2.0);
    let f_n = 1.5 * nf - 3.0 * nf / half_pow * (half_pow - 1.0) / (half_pow - 1.0 / half_pow);
    let beta = 2.0 + 1.0 / (1.0 - alpha);
    Ok(GadgetMoments {
        nonlazy_antipode_hit: f_n,
        mean_left_commute: beta * f_n,
        mean_right_commute: 4.0 * f_n,
        left_commute_factor: beta,
        winding_ratio: 2.0 * (beta - 4.0) / (beta + 4.0),
    })
}

/// Single-cycle chain used by the round decomposition: the biased cycle
/// with the gadget's own holding profile on the marked arc (`Cycle::Left`)
/// or uniform 1/2 laziness (`Cycle::Right`).
pub fn single_cycle_chain(n: usize, alpha: f64, cycle: Cycle) -> Result<LazyChain> {
    let g = EulerianMultigraph::biased_cycle(n, 2, 1)?;
    let holding = match cycle {
        Cycle::Left => {
            // Same half-open arc (n/4, 3n/4] as the gadget's left cycle.
            let mut h = vec![0.5; n];
            for (pos, slot) in h.iter_mut().enumerate() {
                if pos > n / 4 && pos <= 3 * n / 4 {
                    *slot = alpha;
                }
            }
            Holding::PerVertex(h)
        }
        Cycle::Right => Holding::Constant(0.5),
    };
    LazyChain::from_graph(&g, holding)
}

/// One independent tour: a fair coin picks the cycle, then the walk runs
/// from 0 to the antipode and back on that cycle alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundSample {
    pub cycle_choice: Cycle,
    pub duration: u64,
}

impl Cycle {
    fn label(self) -> &'static str {
        match self {
            Cycle::Left => "left",
            Cycle::Right => "right",
        }
    }
}

impl Serialize for Cycle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

/// Sample `k` independent rounds and the partial sums of their durations.
/// Durations are at least `n` (the walk must reach the antipode and come
/// back).
pub fn sample_rounds(
    spec: GadgetSpec,
    k: usize,
    seed: u64,
) -> Result<(Vec<RoundSample>, Vec<u64>)> {
    let left = single_cycle_chain(spec.n, spec.alpha, Cycle::Left)?;
    let right = single_cycle_chain(spec.n, spec.alpha, Cycle::Right)?;
    let antipode = spec.n / 2;
    let mut rng = replica_rng(seed, 0);
    let mut rounds = Vec::with_capacity(k);
    let mut sums = Vec::with_capacity(k);
    let mut total = 0u64;
    for _ in 0..k {
        let cycle_choice = if rng.random::<bool>() {
            Cycle::Left
        } else {
            Cycle::Right
        };
        let chain = match cycle_choice {
            Cycle::Left => &left,
            Cycle::Right => &right,
        };
        let duration = commute_duration(chain, 0, antipode, &mut rng);
        debug_assert!(duration >= spec.n as u64);
        rounds.push(RoundSample {
            cycle_choice,
            duration,
        });
        total += duration;
        sums.push(total);
    }
    Ok((rounds, sums))
}

fn commute_duration(
    chain: &LazyChain,
    home: VertexId,
    antipode: VertexId,
    rng: &mut impl Rng,
) -> u64 {
    let mut x = home;
    let mut t = 0u64;
    while x != antipode {
        x = chain.step(x, rng);
        t += 1;
    }
    while x != home {
        x = chain.step(x, rng);
        t += 1;
    }
    t
}

/// Observed times of the `rho`-th completed round of the full gadget walk
/// started at 0, one value per replica. A round completes on the first
/// return to 0 after visiting either antipode. Distributionally these match
/// the independent-round sampler: the coupling between the two is exact up
/// to events of probability exponentially small in `n`.
pub fn gadget_round_completion_times(
    spec: GadgetSpec,
    rho: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let gadget = spec.build();
    let chain = LazyChain::from_graph(&gadget.graph, Holding::PerVertex(gadget.holding.clone()))?;
    let zero = gadget.landmarks.zero;
    let left = gadget.landmarks.left_antipode;
    let right = gadget.landmarks.right_antipode;
    Ok((0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut x = zero;
            let mut t = 0u64;
            let mut completed = 0usize;
            let mut seen_antipode = false;
            loop {
                x = chain.step(x, &mut rng);
                t += 1;
                if x == left || x == right {
                    seen_antipode = true;
                } else if x == zero && seen_antipode {
                    completed += 1;
                    seen_antipode = false;
                    if completed == rho {
                        return t as f64;
                    }
                }
            }
        })
        .collect())
}

/// Empirical frequency of `X_s = 0` without either antipode having been
/// visited, for `s = 0..=s_max`; decays at least geometrically in `s`.
pub fn zero_return_before_antipode_profile(
    spec: GadgetSpec,
    s_max: usize,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let gadget = spec.build();
    let chain = LazyChain::from_graph(&gadget.graph, Holding::PerVertex(gadget.holding.clone()))?;
    let left = gadget.landmarks.left_antipode;
    let right = gadget.landmarks.right_antipode;
    let counts: Vec<Vec<u64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut hits = vec![0u64; s_max + 1];
            let mut x = 0;
            hits[0] = 1;
            for slot in hits.iter_mut().skip(1) {
                x = chain.step(x, &mut rng);
                if x == left || x == right {
                    break;
                }
                if x == 0 {
                    *slot = 1;
                }
            }
            hits
        })
        .collect();
    let mut freq = vec![0.0; s_max + 1];
    for hits in counts {
        for (f, h) in freq.iter_mut().zip(hits) {
            *f += h as f64;
        }
    }
    for f in &mut freq {
        *f /= replicas as f64;
    }
    Ok(freq)
}

// ---- return probability profile ------------------------------------------------

/// How to measure the return probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileMode {
    /// Exact distribution evolution.
    Exact,
    /// Monte Carlo frequency estimate with this many replicas.
    MonteCarlo { replicas: usize, seed: u64 },
}

/// `P_0(X_t = 0)` on the full gadget at each requested time (strictly
/// increasing).
pub fn return_probability_profile(
    spec: GadgetSpec,
    times: &[u64],
    mode: ProfileMode,
) -> Result<Vec<(u64, f64)>> {
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "profile times must be strictly increasing".into(),
        ));
    }
    let gadget = spec.build();
    let chain = LazyChain::from_graph(&gadget.graph, Holding::PerVertex(gadget.holding.clone()))?;
    match mode {
        ProfileMode::Exact => {
            let n_states = chain.state_count();
            let mut out = Vec::with_capacity(times.len());
            let mut current = DistributionVector::point_mass(n_states, 0);
            let mut at = 0u64;
            for &t in times {
                current = chain.evolve(&current, t - at);
                at = t;
                out.push((t, current.masses()[0]));
            }
            Ok(out)
        }
        ProfileMode::MonteCarlo { replicas, seed } => {
            use rayon::prelude::*;
            let t_max = *times.last().unwrap();
            let time_index: std::collections::HashMap<u64, usize> =
                times.iter().enumerate().map(|(i, &t)| (t, i)).collect();
            let counts: Vec<Vec<u64>> = (0..replicas)
                .into_par_iter()
                .map(|r| {
                    let mut rng = replica_rng(seed, r as u64);
                    let mut hits = vec![0u64; times.len()];
                    let mut x = 0;
                    if let Some(&i) = time_index.get(&0) {
                        hits[i] = 1;
                    }
                    for t in 1..=t_max {
                        x = chain.step(x, &mut rng);
                        if x == 0 {
                            if let Some(&i) = time_index.get(&t) {
                                hits[i] = 1;
                            }
                        }
                    }
                    hits
                })
                .collect();
            let mut freq = vec![0.0; times.len()];
            for hits in counts {
                for (f, h) in freq.iter_mut().zip(hits) {
                    *f += h as f64;
                }
            }
            Ok(times
                .iter()
                .zip(freq)
                .map(|(&t, f)| (t, f / replicas as f64))
                .collect())
        }
    }
}

/// Empirical round-sum hit profile: the frequency with which any partial
/// sum `S_k` lands exactly on `t`, for `t = 0..=t_max`.
pub fn round_sum_profile(
    spec: GadgetSpec,
    t_max: u64,
    replicas: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let left = single_cycle_chain(spec.n, spec.alpha, Cycle::Left)?;
    let right = single_cycle_chain(spec.n, spec.alpha, Cycle::Right)?;
    let antipode = spec.n / 2;
    let counts: Vec<Vec<u64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut hits = vec![0u64; t_max as usize + 1];
            let mut total = 0u64;
            while total <= t_max {
                let chain = if rng.random::<bool>() { &left } else { &right };
                total += commute_duration(chain, 0, antipode, &mut rng);
                if total <= t_max {
                    hits[total as usize] = 1;
                }
            }
            hits
        })
        .collect();
    let mut freq = vec![0.0; t_max as usize + 1];
    for hits in counts {
        for (f, h) in freq.iter_mut().zip(hits) {
            *f += h as f64;
        }
    }
    for f in &mut freq {
        *f /= replicas as f64;
    }
    Ok(freq)
}

// ---- line-walk concentration ----------------------------------------------------

/// Concentration check for the drifted lazy walk on the integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineWalkReport {
    /// Position whose expected first-passage time best undershoots `t`.
    pub center: i64,
    /// Interval half-width used, in units of `sqrt(t)`.
    pub width_factor: f64,
    /// Monte Carlo probability of landing inside the interval at time `t`.
    pub coverage: f64,
}

/// First-passage mean and variance per unit displacement for the
/// birth-death chain with holding `1 - delta`, up `2 delta / 3`, down
/// `delta / 3`.
pub fn line_first_passage_moments(delta: f64) -> (f64, f64) {
    let a = 1.0 - delta;
    let q = delta / 3.0;
    let drift = delta / 3.0;
    let mean = 1.0 / drift;
    // Second moment from the one-step recursion conditioned on hold, up,
    // or down (down costs two independent unit passages).
    let m2 = (1.0 + 2.0 * mean * (a + 2.0 * q) + 2.0 * q * mean * mean) / drift;
    (mean, m2 - mean * mean)
}

/// Pick the interval center by the first-passage recursion, size the
/// interval by Chebyshev for 0.9 coverage, and measure actual coverage by
/// Monte Carlo.
pub fn line_walk_concentration(
    delta: f64,
    t: u64,
    replicas: usize,
    seed: u64,
) -> Result<LineWalkReport> {
    use rayon::prelude::*;
    if !(0.0 < delta && delta <= 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0, 1]".into()));
    }
    if t < 1 {
        return Err(Error::InvalidParameter("need t >= 1".into()));
    }
    let (mean, var) = line_first_passage_moments(delta);
    // Largest k with t - E[tau_k] > 0.
    let center = ((t as f64 - 1e-9) / mean).floor().max(0.0) as i64;
    // Chebyshev at 5% per tail, with the one-step slack of the mean added.
    let tail_budget = 0.05;
    let spread = (center as f64 * var / tail_budget).sqrt() + mean;
    let width_factor = (spread / (t as f64).sqrt()).max(1.0);
    let radius = width_factor * (t as f64).sqrt();

    let hold = 1.0 - delta;
    let up = 2.0 * delta / 3.0;
    let inside: usize = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r as u64);
            let mut pos = 0i64;
            for _ in 0..t {
                let u: f64 = rng.random();
                if u < hold {
                } else if u < hold + up {
                    pos += 1;
                } else {
                    pos -= 1;
                }
            }
            usize::from((pos as f64 - center as f64).abs() <= radius)
        })
        .sum();
    Ok(LineWalkReport {
        center,
        width_factor,
        coverage: inside as f64 / replicas as f64,
    })
}

// ---- headline experiment ----------------------------------------------------------

/// One grid point of the scaling experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityRow {
    pub n: usize,
    pub alpha: f64,
    pub thresholds: ThresholdReport,
}

/// Exact threshold times on the gadget across a grid of sizes and alphas,
/// with per-alpha log-log fitted exponents.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub rows: Vec<SensitivityRow>,
    /// `(alpha, fitted exponent of t_mix in n)` per alpha.
    pub fitted: Vec<(f64, f64)>,
}

/// Run the experiment: every `(n, alpha)` uses exact evolution, epsilon is
/// the usual 1/4 unless overridden, and a cap propagates as an error since
/// the fit needs every point.
pub fn sensitivity_experiment(
    n_grid: &[usize],
    alphas: &[f64],
    epsilon: f64,
    cap: u64,
) -> Result<SensitivityReport> {
    let mut rows = Vec::new();
    let mut fitted = Vec::new();
    for &alpha in alphas {
        let mut points = Vec::new();
        for &n in n_grid {
            let gadget = GadgetSpec::new(n, alpha)?.build();
            let chain =
                LazyChain::from_graph(&gadget.graph, Holding::PerVertex(gadget.holding.clone()))?;
            let thresholds = threshold_report_with_cap(&chain, epsilon, cap)?;
            let t_mix = thresholds
                .t_mix
                .steps()
                .ok_or(Error::ThresholdNotReached { cap })?;
            thresholds
                .t_unif
                .steps()
                .ok_or(Error::ThresholdNotReached { cap })?;
            points.push(((n as f64).ln(), (t_mix as f64).ln()));
            rows.push(SensitivityRow {
                n,
                alpha,
                thresholds,
            });
        }
        fitted.push((alpha, crate::explore::least_squares_slope(&points)));
    }
    Ok(SensitivityReport { rows, fitted })
}

/// Kolmogorov-Smirnov distance between two empirical samples. Ties advance
/// both pointers together so identical samples score zero.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        let fa = i as f64 / xs.len() as f64;
        let fb = j as f64 / ys.len() as f64;
        worst = worst.max((fa - fb).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use crate::rng::SampleStats;

    #[test]
    fn golden_cf_is_all_ones() {
        let cf = cf_expand(golden_ratio_conjugate(), 30).unwrap();
        assert!(cf.coefficients[1..].iter().all(|&a| a == 1));
        assert_eq!(cf.coefficients.len(), 31);
        // Denominators follow the Fibonacci recursion.
        assert_eq!(&cf.denominators[..6], &[1, 1, 2, 3, 5, 8]);
        assert!((cf.reconstruct() - golden_ratio_conjugate()).abs() < 1e-9);
    }

    #[test]
    fn rational_cf_terminates() {
        let cf = cf_expand(1.0 / 3.0, 20).unwrap();
        assert_eq!(cf.coefficients, vec![0, 3]);
        assert!((cf.reconstruct() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cf_rejects_bad_inputs() {
        assert!(cf_expand(1.5, 10).is_err());
        assert!(cf_expand(0.5, 0).is_err());
        assert!(cf_expand(0.5, 99).is_err());
    }

    #[test]
    fn winding_ratio_closed_form() {
        // For the golden alpha: beta = (7 + sqrt 5)/2 and the winding ratio
        // is (8 sqrt 5 - 10)/55, with bounded partial quotients at the
        // depths we trust.
        let m = gadget_moments(64, golden_ratio_conjugate()).unwrap();
        let beta_expect = (7.0 + 5f64.sqrt()) / 2.0;
        assert!((m.left_commute_factor - beta_expect).abs() < 1e-12);
        let ratio_expect = (8.0 * 5f64.sqrt() - 10.0) / 55.0;
        assert!((m.winding_ratio - ratio_expect).abs() < 1e-12);
        // Quadratic irrational: the expansion is eventually periodic with
        // quotients (1, 34, 1, 7) after the leading 6, so it is bounded.
        let cf = cf_expand(m.winding_ratio, 12).unwrap();
        assert!((cf.reconstruct() - m.winding_ratio).abs() < 1e-9);
        assert_eq!(&cf.coefficients[1..6], &[6, 1, 34, 1, 7]);
        assert!(cf.max_coefficient() <= 34, "{:?}", cf.coefficients);
    }

    #[test]
    fn gap_of_half_at_two_points() {
        let report = sequence_gap(0.5, 2).unwrap();
        assert!((report.gap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn golden_orbit_gap_and_occupancy() {
        for n in [100usize, 10_000] {
            let report = sequence_gap(golden_ratio_conjugate(), n).unwrap();
            assert!(report.gap <= 2.0 / n as f64 + 1e-12, "n = {n}: {report:?}");
            assert!(report.max_interval_count <= 3, "n = {n}: {report:?}");
        }
    }

    #[test]
    fn base_unit_matches_linear_solve_oracle() {
        // f(4) = 3.6 against the first-step solve on the non-lazy biased
        // cycle, and again at larger sizes.
        for n in [4usize, 8, 16, 32] {
            let moments = gadget_moments(n, 0.5).unwrap();
            let g = EulerianMultigraph::biased_cycle(n, 2, 1).unwrap();
            let nonlazy = LazyChain::from_graph(&g, Holding::Constant(0.0)).unwrap();
            let oracle = linalg::hitting_times_to(&nonlazy, n / 2).unwrap()[0];
            assert!(
                (moments.nonlazy_antipode_hit - oracle).abs() < 1e-9,
                "n = {n}: formula {} vs solve {oracle}",
                moments.nonlazy_antipode_hit
            );
        }
        assert!((gadget_moments(4, 0.5).unwrap().nonlazy_antipode_hit - 3.6).abs() < 1e-12);
    }

    #[test]
    fn symmetric_alpha_collapses_the_two_cycles() {
        let m = gadget_moments(16, 0.5).unwrap();
        assert!((m.mean_left_commute - m.mean_right_commute).abs() < 1e-12);
        assert!((m.mean_left_commute - 4.0 * m.nonlazy_antipode_hit).abs() < 1e-12);
    }

    #[test]
    fn sampled_left_commute_matches_closed_form() {
        let n = 32;
        let alpha = golden_ratio_conjugate();
        let spec = GadgetSpec::new(n, alpha).unwrap();
        let (rounds, sums) = sample_rounds(spec, 4000, 11).unwrap();
        assert!(sums.windows(2).all(|w| w[1] > w[0]));
        let lefts: Vec<f64> = rounds
            .iter()
            .filter(|r| r.cycle_choice == Cycle::Left)
            .map(|r| r.duration as f64)
            .collect();
        assert!(rounds.iter().all(|r| r.duration >= n as u64));
        let stats = SampleStats::from_samples(&lefts);
        let expect = gadget_moments(n, alpha).unwrap().mean_left_commute;
        assert!(
            (stats.mean - expect).abs() < 3.0 * stats.stderr,
            "sampled {} vs closed form {expect}",
            stats.mean
        );
    }

    #[test]
    fn return_profile_boundary_and_modes_agree() {
        let spec = GadgetSpec::new(8, golden_ratio_conjugate()).unwrap();
        let exact = return_probability_profile(spec, &[0, 1, 40], ProfileMode::Exact).unwrap();
        assert_eq!(exact[0], (0, 1.0));
        assert!((exact[1].1 - 0.5).abs() < 1e-12);
        let mc = return_probability_profile(
            spec,
            &[0, 1, 40],
            ProfileMode::MonteCarlo {
                replicas: 20_000,
                seed: 5,
            },
        )
        .unwrap();
        for (e, m) in exact.iter().zip(&mc) {
            let sigma = (e.1 * (1.0 - e.1) / 20_000.0).sqrt();
            assert!(
                (e.1 - m.1).abs() <= 4.0 * sigma + 1e-9,
                "t = {}: exact {} vs mc {}",
                e.0,
                e.1,
                m.1
            );
        }
    }

    #[test]
    fn line_walk_center_and_coverage() {
        // delta = 1/2 gives per-step drift 1/6, so E[tau_k] = 6k and the
        // best center for t = 3600 is 599.
        let report = line_walk_concentration(0.5, 3600, 4000, 3).unwrap();
        assert!((report.center - 599).abs() <= 2, "center {}", report.center);
        assert!(report.coverage >= 0.9, "coverage {}", report.coverage);
        let (mean, var) = line_first_passage_moments(0.5);
        assert!((mean - 6.0).abs() < 1e-12);
        assert!((var - 102.0).abs() < 1e-9);
    }

    #[test]
    fn line_walk_tiny_time() {
        let report = line_walk_concentration(0.5, 1, 500, 9).unwrap();
        assert_eq!(report.center, 0);
        assert!(report.width_factor >= 1.0);
        assert_eq!(report.coverage, 1.0);
    }

    #[test]
    fn ks_distance_of_identical_samples_is_zero() {
        let xs = [1.0, 2.0, 5.0, 9.0];
        assert_eq!(ks_distance(&xs, &xs), 0.0);
        let ys = [100.0, 200.0];
        assert_eq!(ks_distance(&xs, &ys), 1.0);
    }
}
