//! Distance-to-stationarity profiles and threshold times.
//!
//! All quantities are exact matrix computations, no spectral shortcuts: the
//! chains of interest are non-reversible, so the worst-start distances are
//! read off the full `t`-step kernel. Powers are built by repeated squaring
//! with per-row renormalization, and thresholds are located by a doubling
//! table plus a greedy binary descent; both `d1` (worst-start total
//! variation) and `dinf` (worst-pair relative deviation) are nonincreasing
//! in `t`, which makes first-crossing searches well defined.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{DistributionVector, LazyChain};
use crate::error::{Error, Result};

/// Which distance drives a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Worst-start total variation distance to stationarity.
    Tv,
    /// Worst-pair relative L-infinity deviation `|P^t(x,y)/pi(y) - 1|`.
    LInf,
}

/// Result of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdOutcome {
    Reached(u64),
    NotReached { cap: u64 },
}

impl ThresholdOutcome {
    pub fn steps(self) -> Option<u64> {
        match self {
            ThresholdOutcome::Reached(t) => Some(t),
            ThresholdOutcome::NotReached { .. } => None,
        }
    }
}

/// Threshold times for both metrics at one epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub epsilon: f64,
    pub t_mix: ThresholdOutcome,
    pub t_unif: ThresholdOutcome,
}

/// Exact distances evaluated on a grid of times.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub times: Vec<u64>,
    /// Worst-start total variation.
    pub d1: Vec<f64>,
    /// Worst-pair relative L-infinity deviation.
    pub dinf: Vec<f64>,
    /// Worst pair-of-starts total variation between rows.
    pub dbar: Vec<f64>,
}

/// Both sides of the submultiplicativity inequality
/// `dinf(s + t) <= dinf(s) * l1(t)`, where `l1` is the worst-start L1
/// distance to stationarity (twice the total variation). The L1 form is the
/// one the operator-norm duality `|P^{s+t}|_{1->inf} <=
/// |P^s|_{1->inf} |P^t|_{inf->inf}` actually provides; with plain total
/// variation on the right the inequality fails by a factor up to 2 (the
/// lazy directed 3-cycle is a counterexample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmultiplicativityCheck {
    pub s: u64,
    pub t: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Total variation distance `(1/2) sum |mu - nu|`.
pub fn tv_distance(mu: &DistributionVector, nu: &DistributionVector) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            mu.len(),
            nu.len()
        )));
    }
    Ok(tv_slices(mu.masses(), nu.masses()))
}

pub(crate) fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

// ---- dense kernel powers ----------------------------------------------------

/// Dense row-stochastic matrix holding `P^t` for some `t`.
#[derive(Clone)]
struct KernelPower {
    n: usize,
    data: Vec<f64>,
}

impl KernelPower {
    fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    fn from_chain(c: &LazyChain) -> Self {
        let n = c.state_count();
        let mut data = vec![0.0; n * n];
        for (v, row) in c.rows().iter().enumerate() {
            for &(w, p) in row {
                data[v * n + w as usize] = p;
            }
        }
        Self { n, data }
    }

    /// `self * other`, rows renormalized to unit mass to stop drift from
    /// compounding across squarings.
    fn multiply(&self, other: &Self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, out_row)| {
            let a_row = &self.data[i * n..(i + 1) * n];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
            let total: f64 = out_row.iter().sum();
            if total > 0.0 {
                let inv = 1.0 / total;
                for o in out_row.iter_mut() {
                    *o *= inv;
                }
            }
        });
        Self { n, data }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn worst_tv(&self, pi: &[f64]) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| tv_slices(self.row(i), pi))
            .reduce(|| 0.0, f64::max)
    }

    /// Worst-start L1 distance to stationarity (twice the total variation).
    fn worst_l1(&self, pi: &[f64]) -> f64 {
        2.0 * self.worst_tv(pi)
    }

    fn worst_relative(&self, pi: &[f64]) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(pi)
                    .map(|(&p, &q)| (p / q - 1.0).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    fn worst_pair_tv(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                (i + 1..self.n)
                    .map(|j| tv_slices(self.row(i), self.row(j)))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    fn eval(&self, metric: Metric, pi: &[f64]) -> f64 {
        match metric {
            Metric::Tv => self.worst_tv(pi),
            Metric::LInf => self.worst_relative(pi),
        }
    }
}

/// Doubling table of kernel powers `P^(2^k)`, grown on demand.
struct PowerTable<'a> {
    chain: &'a LazyChain,
    powers: Vec<KernelPower>,
}

impl<'a> PowerTable<'a> {
    fn new(chain: &'a LazyChain) -> Self {
        Self {
            chain,
            powers: vec![KernelPower::from_chain(chain)],
        }
    }

    /// `P^(2^k)`.
    fn squared(&mut self, k: usize) -> &KernelPower {
        while self.powers.len() <= k {
            let last = self.powers.last().unwrap();
            let next = last.multiply(last);
            self.powers.push(next);
        }
        &self.powers[k]
    }

    /// `P^t` by binary composition.
    fn power(&mut self, t: u64) -> KernelPower {
        let n = self.chain.state_count();
        let mut acc = KernelPower::identity(n);
        let mut bit = 0usize;
        let mut rest = t;
        while rest > 0 {
            if rest & 1 == 1 {
                acc = acc.multiply(self.squared(bit));
            }
            rest >>= 1;
            bit += 1;
        }
        acc
    }
}

/// Default search cap: `64 n^3` steps.
pub fn default_step_cap(n: usize) -> u64 {
    64u64.saturating_mul((n as u64).saturating_pow(3))
}

/// Minimal `t` with the metric at or below `epsilon`, searched by doubling
/// plus greedy binary descent. Exceeding `cap` yields an explicit
/// `NotReached` rather than an error.
pub fn threshold_time(c: &LazyChain, metric: Metric, epsilon: f64) -> Result<ThresholdOutcome> {
    threshold_time_with_cap(c, metric, epsilon, default_step_cap(c.state_count()))
}

pub fn threshold_time_with_cap(
    c: &LazyChain,
    metric: Metric,
    epsilon: f64,
    cap: u64,
) -> Result<ThresholdOutcome> {
    check_epsilon(epsilon)?;
    let mut table = PowerTable::new(c);
    Ok(search_threshold(c, &mut table, metric, epsilon, cap))
}

/// Threshold times for both metrics at one epsilon, sharing the doubling
/// table. `t_mix <= t_unif` whenever both are reached, since the relative
/// deviation dominates twice the total variation.
pub fn threshold_report(c: &LazyChain, epsilon: f64) -> Result<ThresholdReport> {
    threshold_report_with_cap(c, epsilon, default_step_cap(c.state_count()))
}

pub fn threshold_report_with_cap(
    c: &LazyChain,
    epsilon: f64,
    cap: u64,
) -> Result<ThresholdReport> {
    check_epsilon(epsilon)?;
    let mut table = PowerTable::new(c);
    let t_mix = search_threshold(c, &mut table, Metric::Tv, epsilon, cap);
    let t_unif = search_threshold(c, &mut table, Metric::LInf, epsilon, cap);
    Ok(ThresholdReport {
        epsilon,
        t_mix,
        t_unif,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

fn search_threshold(
    c: &LazyChain,
    table: &mut PowerTable,
    metric: Metric,
    epsilon: f64,
    cap: u64,
) -> ThresholdOutcome {
    let pi = c.stationary().to_vec();
    let n = c.state_count();
    if KernelPower::identity(n).eval(metric, &pi) <= epsilon {
        return ThresholdOutcome::Reached(0);
    }
    // Doubling phase: first k with d(2^k) <= epsilon.
    let mut k = 0usize;
    loop {
        if (1u64 << k) > cap {
            // Check at the cap itself before giving up.
            let at_cap = table.power(cap);
            if at_cap.eval(metric, &pi) > epsilon {
                return ThresholdOutcome::NotReached { cap };
            }
            break;
        }
        if table.squared(k).eval(metric, &pi) <= epsilon {
            break;
        }
        k += 1;
    }
    if k == 0 {
        return ThresholdOutcome::Reached(1);
    }
    // Greedy descent: grow t_lo keeping d(t_lo) > epsilon; the threshold is
    // t_lo + 1. Monotonicity of both metrics makes this exact.
    let mut t_lo = 1u64 << (k - 1);
    let mut m_lo = table.squared(k - 1).clone();
    let hi = (1u64 << k).min(cap);
    for bit in (0..k.saturating_sub(1)).rev() {
        let step = 1u64 << bit;
        if t_lo + step >= hi {
            continue;
        }
        let trial = m_lo.multiply(table.squared(bit));
        if trial.eval(metric, &pi) > epsilon {
            m_lo = trial;
            t_lo += step;
        }
    }
    ThresholdOutcome::Reached(t_lo + 1)
}

/// Exact `d1`, `dinf` and `dbar` on an increasing grid of times.
pub fn distance_profile(c: &LazyChain, times: &[u64]) -> Result<DistanceProfile> {
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "profile times must be strictly increasing".into(),
        ));
    }
    let pi = c.stationary().to_vec();
    let mut table = PowerTable::new(c);
    let mut profile = DistanceProfile {
        times: times.to_vec(),
        d1: Vec::with_capacity(times.len()),
        dinf: Vec::with_capacity(times.len()),
        dbar: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let m = table.power(t);
        profile.d1.push(m.worst_tv(&pi));
        profile.dinf.push(m.worst_relative(&pi));
        profile.dbar.push(m.worst_pair_tv());
    }
    Ok(profile)
}

/// Exact check of `dinf(s + t) <= dinf(s) * l1(t)` (see
/// [`SubmultiplicativityCheck`] for why the right side uses the L1
/// distance).
pub fn submultiplicativity_audit(
    c: &LazyChain,
    s: u64,
    t: u64,
) -> Result<SubmultiplicativityCheck> {
    let pi = c.stationary().to_vec();
    let mut table = PowerTable::new(c);
    let lhs = table.power(s + t).worst_relative(&pi);
    let rhs = table.power(s).worst_relative(&pi) * table.power(t).worst_l1(&pi);
    Ok(SubmultiplicativityCheck {
        s,
        t,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Worst-pair submultiplicativity `dbar(s + t) <= dbar(s) dbar(t)`, exact.
pub fn dbar_submultiplicativity(c: &LazyChain, s: u64, t: u64) -> Result<SubmultiplicativityCheck> {
    let mut table = PowerTable::new(c);
    let lhs = table.power(s + t).worst_pair_tv();
    let rhs = table.power(s).worst_pair_tv() * table.power(t).worst_pair_tv();
    Ok(SubmultiplicativityCheck {
        s,
        t,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Holding;
    use crate::graph::EulerianMultigraph;

    fn lazy_cycle(n: usize) -> LazyChain {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        let g = EulerianMultigraph::from_edges(n, &edges).unwrap();
        LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap()
    }

    #[test]
    fn tv_basics() {
        let n = 8;
        let point = DistributionVector::point_mass(n, 0);
        let uniform = DistributionVector::uniform(n);
        assert_eq!(tv_distance(&point, &point).unwrap(), 0.0);
        let d = tv_distance(&point, &uniform).unwrap();
        assert!((d - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
        let other = DistributionVector::point_mass(n, 3);
        assert!((tv_distance(&point, &other).unwrap() - 1.0).abs() < 1e-15);
        let short = DistributionVector::uniform(4);
        assert!(tv_distance(&point, &short).is_err());
    }

    #[test]
    fn zero_time_distance_is_one_minus_min_pi() {
        let g = EulerianMultigraph::random_eulerian(6, 15, 1).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        let profile = distance_profile(&c, &[0, 1]).unwrap();
        let expected = 1.0 - c.min_stationary();
        assert!((profile.d1[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn lazy_three_cycle_exact_distances() {
        let c = lazy_cycle(3);
        let profile = distance_profile(&c, &[1, 2, 3, 4, 8]).unwrap();
        // Closed form for this chain: d1(t) = 2^(1-t)/3, dinf(t) = 2^(1-t).
        for (idx, &t) in profile.times.iter().enumerate() {
            let expect = 2f64.powi(1 - t as i32);
            assert!((profile.dinf[idx] - expect).abs() < 1e-12, "t = {t}");
            assert!((profile.d1[idx] - expect / 3.0).abs() < 1e-12, "t = {t}");
        }
        // d1 nonincreasing, sandwiched by dbar <= 2 d1.
        for w in profile.d1.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        for i in 0..profile.times.len() {
            assert!(profile.d1[i] <= profile.dbar[i] + 1e-12);
            assert!(profile.dbar[i] <= 2.0 * profile.d1[i] + 1e-12);
        }
    }

    #[test]
    fn lazy_three_cycle_thresholds() {
        let c = lazy_cycle(3);
        let report = threshold_report(&c, 0.25).unwrap();
        assert_eq!(report.t_mix, ThresholdOutcome::Reached(2));
        assert_eq!(report.t_unif, ThresholdOutcome::Reached(3));
    }

    #[test]
    fn two_state_doubly_stochastic_mixes_in_one_step() {
        let g = EulerianMultigraph::from_edges(2, &[(0, 1, 1), (1, 0, 1)]).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        assert_eq!(
            threshold_time(&c, Metric::Tv, 0.25).unwrap(),
            ThresholdOutcome::Reached(1)
        );
    }

    #[test]
    fn one_state_chain_is_already_mixed() {
        let g = EulerianMultigraph::from_edges(1, &[(0, 0, 1)]).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        assert_eq!(
            threshold_time(&c, Metric::Tv, 0.25).unwrap(),
            ThresholdOutcome::Reached(0)
        );
    }

    #[test]
    fn cap_yields_not_reached() {
        let g = EulerianMultigraph::biased_cycle(12, 2, 1).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        let out = threshold_time_with_cap(&c, Metric::LInf, 0.25, 3).unwrap();
        assert_eq!(out, ThresholdOutcome::NotReached { cap: 3 });
    }

    #[test]
    fn rejects_bad_epsilon() {
        let c = lazy_cycle(3);
        assert!(threshold_time(&c, Metric::Tv, 2.0).is_err());
        assert!(threshold_time(&c, Metric::Tv, 0.0).is_err());
    }

    #[test]
    fn threshold_matches_linear_scan() {
        // Cross-check the doubling search against a brute-force scan on a
        // chain with a nontrivial threshold.
        let g = EulerianMultigraph::biased_cycle(9, 2, 1).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        for (metric, eps) in [(Metric::Tv, 0.25), (Metric::LInf, 0.25), (Metric::Tv, 0.05)] {
            let fast = threshold_time(&c, metric, eps).unwrap().steps().unwrap();
            let times: Vec<u64> = (0..=200).collect();
            let profile = distance_profile(&c, &times).unwrap();
            let series = match metric {
                Metric::Tv => &profile.d1,
                Metric::LInf => &profile.dinf,
            };
            let slow = times[series.iter().position(|&d| d <= eps).unwrap()];
            assert_eq!(fast, slow, "metric {metric:?} eps {eps}");
        }
    }

    #[test]
    fn tv_threshold_never_exceeds_linf_threshold() {
        for seed in [3, 7] {
            let g = EulerianMultigraph::random_eulerian(7, 18, seed).unwrap();
            let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
            let report = threshold_report(&c, 0.25).unwrap();
            assert!(report.t_mix.steps().unwrap() <= report.t_unif.steps().unwrap());
        }
    }

    #[test]
    fn submultiplicativity_on_the_lazy_three_cycle() {
        let c = lazy_cycle(3);
        // Exact values: lhs = 2^(1-s-t), rhs = 2^(1-s} * 2^(2-t)/3.
        let check = submultiplicativity_audit(&c, 2, 3).unwrap();
        assert!(check.holds);
        assert!((check.lhs - 2f64.powi(-4)).abs() < 1e-12);
        // rhs = dinf(2) * l1(3) = (1/2) * (2 * 1/12) = 1/12.
        assert!((check.rhs - 1.0 / 12.0).abs() < 1e-12);
        // With plain TV on the right the same pair violates: documents why
        // the audit uses the L1 distance.
        let tv_rhs = check.rhs / 2.0;
        assert!(check.lhs > tv_rhs);
    }

    #[test]
    fn dbar_is_submultiplicative_on_random_chains() {
        let g = EulerianMultigraph::random_eulerian(6, 16, 5).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        for (s, t) in [(1, 1), (2, 3), (5, 8), (0, 4)] {
            assert!(dbar_submultiplicativity(&c, s, t).unwrap().holds);
        }
    }
}
