//! Block-parallel seeded sampling.
//!
//! Work is cut into fixed-size blocks. Block `b` draws from ChaCha8 seeded with
//! the user seed and switched to stream `b`, and block results are reduced in
//! block order, so output depends only on `(n, seed)` and never on the number
//! of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geom::Vec3;

/// Samples per block.
pub const BLOCK_SIZE: u64 = 1 << 14;

/// Recorded in outputs so runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = block index";

pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Runs `f(rng, block_len)` for every block of `n` samples in parallel and
/// returns the results in block order.
pub fn par_blocks<T, F>(n: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let blocks = n.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            f(&mut block_rng(seed, b), len)
        })
        .collect()
}

/// Uniform point in the box `[lo, hi)`.
#[inline]
pub fn uniform_in_box<R: rand::Rng>(rng: &mut R, lo: &Vec3, hi: &Vec3) -> Vec3 {
    Vec3::new(
        lo.x + (hi.x - lo.x) * rng.random::<f64>(),
        lo.y + (hi.y - lo.y) * rng.random::<f64>(),
        lo.z + (hi.z - lo.z) * rng.random::<f64>(),
    )
}

/// Uniform direction on the unit sphere from a normalised Gaussian triple.
#[inline]
pub fn uniform_direction<R: rand::Rng>(rng: &mut R) -> Vec3 {
    use rand_distr::StandardNormal;
    loop {
        let g = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn blocks_cover_n_exactly() {
        let lens = par_blocks(3 * BLOCK_SIZE + 5, 1, |_, len| len);
        assert_eq!(lens, vec![BLOCK_SIZE, BLOCK_SIZE, BLOCK_SIZE, 5]);
    }

    #[test]
    fn independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| par_blocks(5 * BLOCK_SIZE, 9, |rng, len| (0..len).map(|_| rng.random::<f64>()).sum::<f64>()))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = block_rng(3, 0).random();
        let b: u64 = block_rng(3, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn directions_are_unit() {
        let mut rng = block_rng(0, 0);
        for _ in 0..100 {
            assert!((uniform_direction(&mut rng).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
