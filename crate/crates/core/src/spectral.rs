//! Dirichlet forms, set spectra, the spectral profile, and the integral
//! uniform-mixing bound driven by it.
//!
//! The per-set quantity is `lambda(S) = 1 - rho(S)`, where `rho(S)` is the
//! Perron value of the additive reversibilization restricted to `S`. Two
//! independent routes compute it: the eigenvalue route (power iteration on
//! the symmetrized block) and the exit-time route (starting from the
//! quasi-stationary distribution, the exit time from `S` is geometric with
//! mean `1/(1 - rho)`). Their agreement is an audited invariant, as is the
//! dominance of the integral bound over exactly measured uniform-mixing
//! times.

use serde::Serialize;

use crate::chain::LazyChain;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::linalg;

/// Subset spectrum of one vertex set under the reversibilized kernel.
#[derive(Debug, Clone)]
pub struct SetSpectrum {
    pub subset: Vec<VertexId>,
    /// `1 - perron_rho`.
    pub lambda: f64,
    /// Perron value of the restriction of the reversibilized kernel.
    pub perron_rho: f64,
    /// Quasi-stationary distribution, full length, supported on the subset
    /// (on the dominant connected component when the subset is
    /// disconnected).
    pub quasi_stationary: Vec<f64>,
    /// Exit time from the subset started from `quasi_stationary`, by an
    /// independent linear solve.
    pub mean_exit_time: f64,
    /// `max_{v in S} E_v[exit]`, which dominates `1 / lambda`.
    pub worst_start_exit: f64,
}

/// One step of the lower envelope `r -> Lambda(r)`.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileBreakpoint {
    /// Stationary mass of the witness set.
    pub mass: f64,
    pub lambda: f64,
    pub witness: Vec<VertexId>,
}

/// The map `r -> Lambda(r) = inf { lambda(S) : pi_* <= pi(S) <= r }` as a
/// right-continuous step function, with the witnessing sets.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralProfile {
    pub breakpoints: Vec<ProfileBreakpoint>,
    pub pi_star: f64,
}

/// Subset families considered by [`spectral_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetMode {
    /// Every nonempty proper subset.
    Exact,
    /// Only subsets connected under the reversibilized kernel. Safe
    /// pruning: a disconnected set scores the minimum of its components,
    /// and each component is itself a candidate with no larger mass, so the
    /// envelope is unchanged.
    ConnectedOnly,
}

/// Largest state count enumerable by bitmask.
pub const EXACT_ENUMERATION_LIMIT: usize = 20;

/// Dirichlet energy `(1/2) sum_(v,w) (f(v) - f(w))^2 pi(v) P(v, w)`.
/// Invariant under time reversal and additive reversibilization.
pub fn dirichlet_energy(c: &LazyChain, f: &[f64]) -> f64 {
    assert_eq!(f.len(), c.state_count());
    let pi = c.stationary();
    let mut total = 0.0;
    for (v, row) in c.rows().iter().enumerate() {
        for &(w, p) in row {
            let diff = f[v] - f[w as usize];
            total += diff * diff * pi[v] * p;
        }
    }
    0.5 * total
}

/// Mean of `f` under the stationary distribution.
pub fn stationary_mean(c: &LazyChain, f: &[f64]) -> f64 {
    c.stationary().iter().zip(f).map(|(p, x)| p * x).sum()
}

/// `E_pi[f^2]`.
pub fn stationary_second_moment(c: &LazyChain, f: &[f64]) -> f64 {
    c.stationary().iter().zip(f).map(|(p, x)| p * x * x).sum()
}

/// `Var_pi(f)`.
pub fn stationary_variance(c: &LazyChain, f: &[f64]) -> f64 {
    let mean = stationary_mean(c, f);
    c.stationary()
        .iter()
        .zip(f)
        .map(|(p, x)| p * (x - mean) * (x - mean))
        .sum()
}

/// Set spectrum of `subset` under the reversibilization of `c`.
///
/// Disconnected subsets decompose: the Perron value is the maximum over the
/// components of the restriction, so `lambda` is the minimum over parts.
pub fn lambda_of_set(c: &LazyChain, subset: &[VertexId]) -> Result<SetSpectrum> {
    let q = c.additive_reversibilization();
    lambda_of_set_reversible(&q, subset)
}

/// Same as [`lambda_of_set`] but takes the already-reversibilized kernel;
/// callers that sweep many subsets build it once.
pub fn lambda_of_set_reversible(q: &LazyChain, subset: &[VertexId]) -> Result<SetSpectrum> {
    let n = q.state_count();
    if subset.is_empty() || subset.len() >= n {
        return Err(Error::InvalidParameter(
            "subset must be nonempty and proper".into(),
        ));
    }
    let pi = q.stationary();

    let mut best: Option<(f64, Vec<VertexId>, Vec<f64>)> = None;
    for comp in kernel_components(q, subset) {
        let k = comp.len();
        let mut block = vec![0.0; k * k];
        for (i, &x) in comp.iter().enumerate() {
            for (j, &y) in comp.iter().enumerate() {
                block[i * k + j] = q.prob(x, y) * (pi[x] / pi[y]).sqrt();
            }
        }
        // Exact symmetry for the power iteration.
        for i in 0..k {
            for j in (i + 1)..k {
                let avg = 0.5 * (block[i * k + j] + block[j * k + i]);
                block[i * k + j] = avg;
                block[j * k + i] = avg;
            }
        }
        let (rho, vec) = linalg::perron_symmetric(&block, k)?;
        if best.as_ref().is_none_or(|(r, _, _)| rho > *r) {
            best = Some((rho, comp, vec));
        }
    }
    let (rho, comp, vec) = best.expect("nonempty subset has at least one component");

    // Quasi-stationary measure: nu(x) ∝ sqrt(pi(x)) * v(x) on the winning
    // component.
    let mut nu = vec![0.0; n];
    for (i, &x) in comp.iter().enumerate() {
        nu[x] = pi[x].sqrt() * vec[i].abs();
    }
    let total: f64 = nu.iter().sum();
    for x in &mut nu {
        *x /= total;
    }

    // Independent exit-time route.
    let exits = linalg::exit_times(q, subset)?;
    let mean_exit_time: f64 = subset
        .iter()
        .zip(&exits)
        .map(|(&v, &h)| nu[v] * h)
        .sum();
    let worst_start_exit = exits.iter().copied().fold(0.0, f64::max);

    Ok(SetSpectrum {
        subset: subset.to_vec(),
        lambda: 1.0 - rho,
        perron_rho: rho,
        quasi_stationary: nu,
        mean_exit_time,
        worst_start_exit,
    })
}

/// Connected components of `subset` under positive off-diagonal kernel
/// entries.
fn kernel_components(q: &LazyChain, subset: &[VertexId]) -> Vec<Vec<VertexId>> {
    let n = q.state_count();
    let mut in_subset = vec![false; n];
    for &v in subset {
        in_subset[v] = true;
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for &start in subset {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            comp.push(x);
            for &(y, p) in &q.rows()[x] {
                let y = y as usize;
                if p > 0.0 && y != x && in_subset[y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

impl SpectralProfile {
    /// `Lambda(r)`: minimum lambda over breakpoints of mass at most `r`,
    /// extended constantly past the largest proper-subset breakpoint. The
    /// extension is conservative for the integral bound, which audits as an
    /// upper bound regardless.
    pub fn lambda_at(&self, r: f64) -> f64 {
        let mut value = self.breakpoints[0].lambda;
        for bp in &self.breakpoints {
            if bp.mass <= r {
                value = bp.lambda;
            } else {
                break;
            }
        }
        value
    }
}

/// Lower envelope of `lambda(S)` against stationary mass over the chosen
/// subset family. Needs `n <= 20`.
pub fn spectral_profile(c: &LazyChain, mode: SubsetMode) -> Result<SpectralProfile> {
    let n = c.state_count();
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(Error::TooLargeForExact {
            n,
            limit: EXACT_ENUMERATION_LIMIT,
        });
    }
    let q = c.additive_reversibilization();
    let pi = q.stationary().to_vec();
    let pi_star = pi.iter().copied().fold(f64::INFINITY, f64::min);

    let mut scored: Vec<(f64, f64, Vec<VertexId>)> = Vec::new();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for mask in 1..full {
        let subset: Vec<VertexId> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if mode == SubsetMode::ConnectedOnly && kernel_components(&q, &subset).len() > 1 {
            continue;
        }
        let spectrum = lambda_of_set_reversible(&q, &subset)?;
        let mass: f64 = subset.iter().map(|&v| pi[v]).sum();
        scored.push((mass, spectrum.lambda, subset));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut breakpoints: Vec<ProfileBreakpoint> = Vec::new();
    let mut current = f64::INFINITY;
    for (mass, lambda, witness) in scored {
        if lambda < current - 1e-15 {
            current = lambda;
            breakpoints.push(ProfileBreakpoint {
                mass,
                lambda,
                witness,
            });
        }
    }
    Ok(SpectralProfile {
        breakpoints,
        pi_star,
    })
}

/// One interval of the integral evaluation, for inspection.
#[derive(Debug, Clone, Serialize)]
pub struct IntegrandSegment {
    pub r_lo: f64,
    pub r_hi: f64,
    pub lambda: f64,
    pub contribution: f64,
}

/// Integral uniform-mixing bound evaluated from a spectral profile.
#[derive(Debug, Clone, Serialize)]
pub struct GmtBound {
    pub bound_steps: u64,
    pub delta: f64,
    pub integral: f64,
    pub integrand_trace: Vec<IntegrandSegment>,
}

/// Evaluate `2 * ceil( integral_(4 pi_*)^(4/a) dr / (delta r Lambda(r)) )`
/// with the profile as a step function; the sum over steps is exact, no
/// quadrature error.
pub fn gmt_bound(c: &LazyChain, a: f64) -> Result<GmtBound> {
    let delta = c.min_diagonal();
    if delta <= 0.0 {
        return Err(Error::ZeroDiagonal);
    }
    let profile = spectral_profile(c, SubsetMode::ConnectedOnly)?;
    let lo = 4.0 * profile.pi_star;
    let hi = 4.0 / a;
    if a <= 0.0 || lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "need a > 0 with 4 pi_* < 4/a; got a = {a}, pi_* = {}",
            profile.pi_star
        )));
    }
    let (integral, integrand_trace) = gmt_integral(&profile, delta, lo, hi);
    Ok(GmtBound {
        bound_steps: 2 * integral.ceil() as u64,
        delta,
        integral,
        integrand_trace,
    })
}

/// The raw integral over `[lo, hi]`, exposed so that linearity in
/// `1/delta` can be checked against a fixed profile.
pub fn gmt_integral(
    profile: &SpectralProfile,
    delta: f64,
    lo: f64,
    hi: f64,
) -> (f64, Vec<IntegrandSegment>) {
    // Cut points where Lambda changes value, clipped to [lo, hi].
    let mut cuts: Vec<f64> = vec![lo];
    for bp in &profile.breakpoints {
        if bp.mass > lo && bp.mass < hi {
            cuts.push(bp.mass);
        }
    }
    cuts.push(hi);
    let mut total = 0.0;
    let mut trace = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        let (r_lo, r_hi) = (w[0], w[1]);
        if r_hi <= r_lo {
            continue;
        }
        let lambda = profile.lambda_at(r_lo);
        let contribution = (r_hi / r_lo).ln() / (delta * lambda);
        total += contribution;
        trace.push(IntegrandSegment {
            r_lo,
            r_hi,
            lambda,
            contribution,
        });
    }
    (total, trace)
}

/// Piecewise short-time deviation bound on `|P^t(u,v)/pi(v) - 1|`:
/// `C m / sqrt(t)` for `t <= n^2` and `C m n / t` beyond; for regular
/// graphs `C n / sqrt(t)` at all `t`. Both branches agree at `t = n^2`.
pub fn short_time_bound(n: usize, m: u64, t: u64, regular: bool, c_const: f64) -> f64 {
    assert!(t >= 1, "short-time bound needs t >= 1");
    let (nf, mf, tf) = (n as f64, m as f64, t as f64);
    if regular {
        c_const * nf / tf.sqrt()
    } else if tf <= nf * nf {
        c_const * mf / tf.sqrt()
    } else {
        c_const * mf * nf / tf
    }
}
