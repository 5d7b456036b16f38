//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha` 0.3).
//! A stream is identified by `(seed, domain, index)`: the seed and index are
//! folded through SplitMix64 into the ChaCha key and the domain selects the
//! ChaCha stream number. Matrix entries, trial signals and probe vectors
//! therefore never share a keystream, and the draw for one trial does not
//! depend on how many other trials ran before it.
//!
//! Gaussian variates use Box–Muller on 53-bit uniforms so the sequence only
//! depends on this module and the ChaCha keystream.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Prng = ChaCha8Rng;

/// Identifier recorded alongside experiment outputs.
pub const PRNG_NAME: &str = "chacha8-rand_chacha-0.3/splitmix64-key/box-muller";

/// Independent stream families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Matrix = 1,
    Signal = 2,
    Probe = 3,
    Concentration = 4,
    Support = 5,
    Test = 15,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a list of indices into a seed.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> Prng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[index]));
    rng.set_stream(domain as u64);
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals.
pub fn standard_normal_pair<R: RngCore>(rng: &mut R) -> (f64, f64) {
    // u1 in (0, 1] keeps the logarithm finite.
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    let radius = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (radius * theta.cos(), radius * theta.sin())
}

pub fn fill_standard_normal<R: RngCore>(rng: &mut R, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = standard_normal_pair(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = standard_normal_pair(rng).0;
    }
}

/// Uniform point on the unit sphere in `R^len` (normalized Gaussian draw).
pub fn unit_vector<R: RngCore>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    loop {
        fill_standard_normal(rng, &mut v);
        let n = crate::linalg::norm2(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// `k` distinct indices from `0..n`, sorted (partial Fisher–Yates).
pub fn sample_indices<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot sample {k} of {n}");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut out = pool[..k].to_vec();
    out.sort_unstable();
    out
}

/// Fair ±1.
pub fn sign<R: RngCore>(rng: &mut R) -> f64 {
    if rng.next_u32() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4)
            .map(|_| stream(7, Domain::Matrix, 0).next_u64())
            .collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut m = stream(7, Domain::Matrix, 0);
        let mut s = stream(7, Domain::Signal, 0);
        let mut i = stream(7, Domain::Matrix, 1);
        let x = m.next_u64();
        assert_ne!(x, s.next_u64());
        assert_ne!(x, i.next_u64());
    }

    #[test]
    fn normal_moments() {
        let mut r = stream(1, Domain::Test, 0);
        let mut v = vec![0.0; 200_001];
        fill_standard_normal(&mut r, &mut v);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn sampled_indices_are_sorted_distinct() {
        let mut r = stream(3, Domain::Test, 0);
        for _ in 0..100 {
            let s = sample_indices(&mut r, 20, 5);
            assert_eq!(s.len(), 5);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&i| i < 20));
        }
        assert_eq!(sample_indices(&mut r, 4, 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn unit_vector_has_unit_norm() {
        let mut r = stream(5, Domain::Test, 0);
        let u = unit_vector(&mut r, 9);
        assert!((crate::linalg::norm2(&u) - 1.0).abs() < 1e-14);
    }
}
