//! Counter-based Gaussian streams.
//!
//! Every random value in this crate is a pure function of a key
//! `(seed, domain, channel, mode, step)`. There is no generator state: evaluation order,
//! thread count, and restarts cannot change a draw. That is what makes a time shift of the
//! driving path plain index arithmetic and ensemble runs byte-reproducible.
//!
//! The mixer is the splitmix64 finalizer applied to each key word in turn; each stage is a
//! full-avalanche bijection on 64 bits. Normals come from Box-Muller on two derived words.
//! Adjacent modes (2i, 2i+1) share one Box-Muller evaluation: the pair (r cos, r sin) is two
//! independent standard normals, and halving the transcendental count matters in the OU
//! substep loops.

#[allow(unused_imports)] // f64 inherent methods shadow these under std; no_std needs the trait
use num_traits::Float;

/// Key domain tags. Distinct domains never collide even for equal channel/mode/step.
pub mod domain {
    /// Per-step Wiener increments.
    pub const INCREMENT: u64 = 0x01;
    /// Stationary initialization draws.
    pub const INIT: u64 = 0x02;
    /// Initial-set samplers (spheres in the product space).
    pub const SAMPLER: u64 = 0x03;
}

const GOLDEN: u64 = 0x9e3779b9_7f4a7c15;
const WORD_A: u64 = 0x243f6a88_85a308d3;
const WORD_B: u64 = 0x13198a2e_03707344;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58476d_1ce4e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d049bb_133111eb);
    z ^= z >> 31;
    z
}

/// Derives the i-th ensemble seed from a master seed. Documented splitting rule:
/// `mix64(master ^ (i+1) * GOLDEN)`.
#[inline]
pub fn split_seed(master: u64, i: u64) -> u64 {
    mix64(master ^ (i.wrapping_add(1)).wrapping_mul(GOLDEN))
}

#[inline]
fn zigzag(j: i64) -> u64 {
    ((j << 1) ^ (j >> 63)) as u64
}

#[inline]
fn stream(seed: u64, dom: u64, channel: u64, mode: u64, step: i64) -> u64 {
    let mut s = mix64(seed ^ dom.wrapping_mul(GOLDEN));
    s = mix64(s ^ channel);
    s = mix64(s ^ mode);
    mix64(s ^ zigzag(step))
}

#[inline]
fn to_unit_open(x: u64) -> f64 {
    // (0, 1]: never 0, so the log below is finite.
    ((x >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
}

#[inline]
fn to_unit_half_open(x: u64) -> f64 {
    // [0, 1)
    (x >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Two independent standard normals for a pair key.
#[inline]
pub fn gauss_pair(seed: u64, dom: u64, channel: u64, pair: u64, step: i64) -> (f64, f64) {
    let s = stream(seed, dom, channel, pair, step);
    let u1 = to_unit_open(mix64(s ^ WORD_A));
    let u2 = to_unit_half_open(mix64(s ^ WORD_B));
    let r = (-2.0 * u1.ln()).sqrt();
    let th = core::f64::consts::TAU * u2;
    (r * th.cos(), r * th.sin())
}

/// Standard normal for a full key. Modes `2i` and `2i+1` are the two components of one
/// Box-Muller pair; the value is still a pure function of the key.
#[inline]
pub fn gauss(seed: u64, dom: u64, channel: u64, mode: u64, step: i64) -> f64 {
    let (a, b) = gauss_pair(seed, dom, channel, mode >> 1, step);
    if mode & 1 == 0 {
        a
    } else {
        b
    }
}

/// Uniform in [0, 1) for a full key.
#[inline]
pub fn uniform(seed: u64, dom: u64, channel: u64, mode: u64, step: i64) -> f64 {
    to_unit_half_open(mix64(stream(seed, dom, channel, mode, step) ^ WORD_A))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn draws_are_order_independent() {
        let fwd: Vec<f64> = (0..1000).map(|j| gauss(7, domain::INCREMENT, 1, 3, j)).collect();
        let rev: Vec<f64> = (0..1000).rev().map(|j| gauss(7, domain::INCREMENT, 1, 3, j)).collect();
        for (a, b) in fwd.iter().zip(rev.iter().rev()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn moments_match_standard_normal() {
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for j in 0..n {
            let x = gauss(42, domain::INCREMENT, 1, j as u64 % 64, j / 64);
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // 5 sigma bands for the estimators at this sample size.
        assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "mean = {mean}");
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt(), "var = {var}");
    }

    #[test]
    fn paired_modes_are_uncorrelated() {
        let n = 100_000;
        let mut dot = 0.0;
        for j in 0..n {
            let (a, b) = gauss_pair(9, domain::INCREMENT, 2, 5, j);
            dot += a * b;
        }
        let corr = dot / n as f64;
        assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn split_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| split_seed(1234, i)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
    }

    #[test]
    fn negative_steps_are_distinct_streams() {
        assert_ne!(
            gauss(5, domain::INCREMENT, 1, 0, -3).to_bits(),
            gauss(5, domain::INCREMENT, 1, 0, 3).to_bits()
        );
    }
}
