//! Deterministic starting points: digitally shifted Sobol points and a
//! seeded ChaCha stream.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// `(degree, coefficient bits, initial direction numbers)` for dimensions
/// 2 to 10 of the Joe-Kuo table; dimension 1 is the van der Corput sequence.
const DIRECTIONS: [(u32, u32, &[u32]); 9] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

const BITS: usize = 32;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (31 - k);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[dim - 1];
    let s = s as usize;
    for k in 0..BITS {
        v[k] = if k < s {
            m[k] << (31 - k)
        } else {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for l in 1..s {
                if (a >> (s - 1 - l)) & 1 == 1 {
                    x ^= v[k - l];
                }
            }
            x
        };
    }
    v
}

/// Uniform numbers from a ChaCha8 stream.
pub(crate) struct Stream(ChaCha8Rng);

impl Stream {
    pub(crate) fn new(seed: u64) -> Self {
        Stream(ChaCha8Rng::seed_from_u64(seed))
    }

    pub(crate) fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    /// Uniform in `[0, 1)`.
    pub(crate) fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub(crate) fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
    }

    /// Uniform point in the Euclidean ball of the given radius.
    pub(crate) fn in_ball(&mut self, dim: usize, radius: f64) -> Vec<f64> {
        let g: Vec<f64> = (0..dim).map(|_| self.normal()).collect();
        let n = crate::linalg::norm(&g);
        let r = radius * self.uniform().powf(1.0 / dim as f64);
        if n == 0.0 {
            return vec![0.0; dim];
        }
        g.iter().map(|x| x * r / n).collect()
    }
}

/// `count` points of the unit cube `[0, 1)^dim`.
///
/// Up to ten dimensions these are Sobol points (skipping the origin) with a
/// digital shift drawn from `seed`; beyond that they are plain ChaCha
/// uniforms.
pub(crate) fn sobol_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut stream = Stream::new(seed);
    if dim > DIRECTIONS.len() + 1 {
        return (0..count)
            .map(|_| (0..dim).map(|_| stream.uniform()).collect())
            .collect();
    }
    let dirs: Vec<[u32; BITS]> = (0..dim).map(direction_numbers).collect();
    let shift: Vec<u32> = (0..dim).map(|_| stream.next_u32()).collect();
    let scale = 1.0 / 4_294_967_296.0;
    (1..=count as u64)
        .map(|i| {
            let gray = i ^ (i >> 1);
            (0..dim)
                .map(|j| {
                    let mut x = 0u32;
                    for (b, &v) in dirs[j].iter().enumerate() {
                        if (gray >> b) & 1 == 1 {
                            x ^= v;
                        }
                    }
                    f64::from(x ^ shift[j]) * scale
                })
                .collect()
        })
        .collect()
}
