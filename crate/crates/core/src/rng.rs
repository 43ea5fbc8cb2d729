//! Deterministic RNG streams for reproducible Monte Carlo runs.
//!
//! Replica `i` of a run with master seed `s` always draws from the stream
//! `(s, i)`, independently of how replicas are scheduled across workers, so
//! aggregate results cannot depend on thread count or ordering.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for a master seed.
pub fn master_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for one replica of a seeded experiment, derived
/// counter-style as `(seed, replica)`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Mean, standard error and replica count of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
}

impl SampleStats {
    /// Plain sample statistics; `stderr` is the sample standard deviation
    /// divided by sqrt(replicas).
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "empty sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
        } else {
            0.0
        };
        SampleStats {
            mean,
            stderr: (var / n as f64).sqrt(),
            replicas: n,
        }
    }
}
