//! Small dense numeric kernels: LU solves for hitting/exit-time systems,
//! a stationary-vector solve used to audit the closed form, and a shifted
//! power iteration for Perron values of reversible substochastic blocks.
//!
//! Chains in this crate stay small enough (hundreds of states) that dense
//! factorizations are the simplest correct tool; evolution is the only hot
//! path and lives in the chain module on sparse rows.

use crate::chain::LazyChain;
use crate::error::{Error, Result};
use crate::graph::VertexId;

/// Solve `A x = b` for dense row-major `a` (consumed) by LU with partial
/// pivoting.
pub fn solve_dense(mut a: Vec<f64>, n: usize, mut b: Vec<f64>, what: &'static str) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        // Pivot.
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularSystem(what));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            a[row * n + col] = 0.0;
            for k in (col + 1)..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    // Back substitution.
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Stationary vector by a dense solve of `x (P - I) = 0`, `sum x = 1`.
/// Exists as an audit oracle for the closed form used by chain assembly.
pub fn stationary_dense(c: &LazyChain) -> Result<Vec<f64>> {
    let n = c.state_count();
    // Transposed balance equations; the last is replaced by normalization.
    let mut a = vec![0.0; n * n];
    for x in 0..n {
        for &(y, p) in &c.rows()[x] {
            a[(y as usize) * n + x] += p;
        }
        a[x * n + x] -= 1.0;
    }
    for x in 0..n {
        a[(n - 1) * n + x] = 1.0;
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    solve_dense(a, n, b, "stationary vector")
}

/// Expected exit times from `subset` under the chain's kernel: solves
/// `(I - P_SS) h = 1`. Returned values align with `subset`.
pub fn exit_times(c: &LazyChain, subset: &[VertexId]) -> Result<Vec<f64>> {
    let k = subset.len();
    let mut index = vec![usize::MAX; c.state_count()];
    for (i, &v) in subset.iter().enumerate() {
        index[v] = i;
    }
    let mut a = vec![0.0; k * k];
    for (i, &v) in subset.iter().enumerate() {
        a[i * k + i] += 1.0;
        for &(w, p) in &c.rows()[v] {
            let j = index[w as usize];
            if j != usize::MAX {
                a[i * k + j] -= p;
            }
        }
    }
    solve_dense(a, k, vec![1.0; k], "exit times")
}

/// Expected hitting times of `target` from every state; entry `target` is 0.
pub fn hitting_times_to(c: &LazyChain, target: VertexId) -> Result<Vec<f64>> {
    let others: Vec<VertexId> = (0..c.state_count()).filter(|&v| v != target).collect();
    let sol = exit_times_to_set(c, &others)?;
    let mut h = vec![0.0; c.state_count()];
    for (i, &v) in others.iter().enumerate() {
        h[v] = sol[i];
    }
    Ok(h)
}

/// Expected hitting times of the complement of `inside`: identical system to
/// [`exit_times`], kept as a named alias for call sites that think in terms
/// of absorption.
pub fn exit_times_to_set(c: &LazyChain, inside: &[VertexId]) -> Result<Vec<f64>> {
    exit_times(c, inside)
}

/// Largest eigenvalue and eigenvector of a small symmetric matrix with
/// spectrum in `[-1, 1]`, by power iteration on `M + I` with a Rayleigh
/// quotient. The start vector is the uniform vector, deterministically.
pub fn perron_symmetric(m: &[f64], k: usize) -> Result<(f64, Vec<f64>)> {
    const TOL: f64 = 1e-13;
    const BUDGET: usize = 1_000_000;
    assert_eq!(m.len(), k * k);
    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    let mut mv = vec![0.0; k];
    let mut rho_shifted = 1.0;
    let mut residual = f64::INFINITY;
    for iter in 0..BUDGET {
        // mv = (M + I) v
        for i in 0..k {
            let mut acc = v[i];
            let row = &m[i * k..(i + 1) * k];
            for (j, &mij) in row.iter().enumerate() {
                acc += mij * v[j];
            }
            mv[i] = acc;
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let vmv: f64 = v.iter().zip(&mv).map(|(a, b)| a * b).sum();
        rho_shifted = vmv / vv;
        residual = (0..k)
            .map(|i| (mv[i] - rho_shifted * v[i]).abs())
            .fold(0.0, f64::max);
        let norm = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            // M = -I edge case: every vector is an eigenvector.
            return Ok((-1.0, v));
        }
        for (dst, src) in v.iter_mut().zip(&mv) {
            *dst = src / norm;
        }
        if residual <= TOL && iter >= 2 {
            return Ok((rho_shifted - 1.0, v));
        }
    }
    Err(Error::NoConvergence {
        iterations: BUDGET,
        residual: (rho_shifted - 1.0).max(residual),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Holding;
    use crate::graph::EulerianMultigraph;

    #[test]
    fn solves_a_known_system() {
        // [2 1; 1 3] x = [3; 5] -> x = [4/5, 7/5]
        let x = solve_dense(vec![2.0, 1.0, 1.0, 3.0], 2, vec![3.0, 5.0], "test").unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn rejects_singular_systems() {
        let r = solve_dense(vec![1.0, 2.0, 2.0, 4.0], 2, vec![1.0, 2.0], "test");
        assert!(r.is_err());
    }

    #[test]
    fn exit_time_of_single_lazy_state() {
        let g = EulerianMultigraph::biased_cycle(4, 1, 1).unwrap();
        let c = LazyChain::from_graph(&g, Holding::Constant(0.5)).unwrap();
        // Exit from {v} is geometric with success probability 1/2.
        let h = exit_times(&c, &[1]).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn perron_of_diagonal_block() {
        let (rho, _) = perron_symmetric(&[0.5], 1).unwrap();
        assert!((rho - 0.5).abs() < 1e-12);
    }

    #[test]
    fn perron_of_two_by_two() {
        // [[1/2, 1/4], [1/4, 1/2]] has eigenvalues 3/4 and 1/4.
        let (rho, v) = perron_symmetric(&[0.5, 0.25, 0.25, 0.5], 2).unwrap();
        assert!((rho - 0.75).abs() < 1e-12);
        assert!((v[0] - v[1]).abs() < 1e-6);
    }

    #[test]
    fn perron_handles_sign_symmetric_spectrum() {
        // [[0, 1], [1, 0]] has eigenvalues +1 and -1; the shift must still
        // find +1 rather than oscillate.
        let (rho, _) = perron_symmetric(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }
}
