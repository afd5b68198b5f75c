//! Proposal samplers for the volume estimator.
//!
//! Both samplers emit independent unit-mean exponential coordinates on
//! (0, inf)^n through the inverse CDF. The pseudo-random path derives one
//! counter-based stream per work chunk so results are independent of
//! scheduling; the low-discrepancy path is a digit-scrambled Halton
//! sequence whose scramble is re-randomized per replication to admit an
//! honest error estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First 64 primes, one Halton base per dimension.
const PRIMES: [u64; 64] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283,
    293, 307, 311,
];

pub const MAX_QMC_DIMENSIONS: usize = PRIMES.len();

/// Stream-seeded generator for one chunk of pseudo-random proposals.
pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// QMC scrambles live on streams disjoint from the chunk streams.
fn scramble_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1 << 63) | replication);
    rng
}

#[inline]
pub(crate) fn exponential_from_uniform(u: f64) -> f64 {
    // u in [0,1): 1-u in (0,1], so the log is finite
    -(1.0 - u).ln()
}

pub(crate) fn fill_exponential(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = exponential_from_uniform(rng.random::<f64>());
    }
}

/// Halton sequence with per-position digit permutations in every dimension.
///
/// The permutation tables extend past the digits of any reachable index, so
/// the scrambled images of trailing zero digits contribute too; this keeps
/// each coordinate uniformly distributed over [0, 1) under the random
/// scramble.
pub(crate) struct ScrambledHalton {
    dims: Vec<HaltonDim>,
}

struct HaltonDim {
    base: u64,
    /// perms[position][digit]
    perms: Vec<Vec<u8>>,
}

impl ScrambledHalton {
    /// `None` when more dimensions are requested than there are prepared
    /// prime bases.
    pub fn new(dimensions: usize, seed: u64, replication: u64) -> Option<Self> {
        if dimensions > MAX_QMC_DIMENSIONS {
            return None;
        }
        let mut rng = scramble_rng(seed, replication);
        let dims = PRIMES[..dimensions]
            .iter()
            .map(|&base| {
                // enough digit positions to exhaust f64 resolution
                let mut positions = 0u32;
                let mut reach = 1f64;
                while reach < 2f64.powi(53) {
                    reach *= base as f64;
                    positions += 1;
                }
                let perms = (0..positions)
                    .map(|_| {
                        let mut p: Vec<u8> = (0..base as u8).collect();
                        for i in (1..p.len()).rev() {
                            let j = rng.random_range(0..=i);
                            p.swap(i, j);
                        }
                        p
                    })
                    .collect();
                HaltonDim { base, perms }
            })
            .collect();
        Some(ScrambledHalton { dims })
    }

    /// Scrambled radical-inverse coordinates of `index` (use indices >= 1;
    /// index 0 maps every unscrambled digit to zero).
    pub fn point(&self, index: u64, out: &mut [f64]) {
        for (dim, slot) in self.dims.iter().zip(out.iter_mut()) {
            let b = dim.base;
            let bf = b as f64;
            let mut i = index;
            let mut denom = 1.0;
            let mut x = 0.0;
            for perm in &dim.perms {
                let digit = (i % b) as usize;
                i /= b;
                denom *= bf;
                x += perm[digit] as f64 / denom;
            }
            *slot = x;
        }
    }

    pub fn dimensions(&self) -> usize {
        self.dims.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_streams_are_deterministic_and_distinct() {
        let mut a = chunk_rng(42, 0);
        let mut b = chunk_rng(42, 0);
        let mut c = chunk_rng(42, 1);
        let xa: Vec<f64> = (0..8).map(|_| a.random()).collect();
        let xb: Vec<f64> = (0..8).map(|_| b.random()).collect();
        let xc: Vec<f64> = (0..8).map(|_| c.random()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn exponential_sample_mean_is_one() {
        let mut rng = chunk_rng(7, 0);
        let mut buf = [0.0f64; 4];
        let mut sum = 0.0;
        let reps = 50_000;
        for _ in 0..reps {
            fill_exponential(&mut rng, &mut buf);
            sum += buf.iter().sum::<f64>();
        }
        let mean = sum / (4.0 * reps as f64);
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn halton_points_land_in_unit_cube() {
        let h = ScrambledHalton::new(6, 11, 0).unwrap();
        let mut p = [0.0f64; 6];
        for idx in 1..2000 {
            h.point(idx, &mut p);
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)), "{p:?}");
        }
    }

    #[test]
    fn scrambled_halton_estimates_exponential_mean() {
        let h = ScrambledHalton::new(2, 3, 1).unwrap();
        let mut p = [0.0f64; 2];
        let m = 20_000;
        let mut sum = 0.0;
        for idx in 1..=m {
            h.point(idx, &mut p);
            sum += exponential_from_uniform(p[0]) + exponential_from_uniform(p[1]);
        }
        let mean = sum / (2.0 * m as f64);
        assert!((mean - 1.0).abs() < 5e-3, "mean {mean}");
    }

    #[test]
    fn replications_differ_but_are_reproducible() {
        let a = ScrambledHalton::new(3, 5, 0).unwrap();
        let a2 = ScrambledHalton::new(3, 5, 0).unwrap();
        let b = ScrambledHalton::new(3, 5, 1).unwrap();
        let mut pa = [0.0; 3];
        let mut pa2 = [0.0; 3];
        let mut pb = [0.0; 3];
        a.point(17, &mut pa);
        a2.point(17, &mut pa2);
        b.point(17, &mut pb);
        assert_eq!(pa, pa2);
        assert_ne!(pa, pb);
    }

    #[test]
    fn dimension_bound() {
        assert!(ScrambledHalton::new(64, 1, 0).is_some());
        assert!(ScrambledHalton::new(65, 1, 0).is_none());
    }
}
