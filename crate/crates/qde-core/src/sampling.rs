//! Deterministic sampling: splittable seeds, Haar-random unitaries, and
//! Fubini–Study random pure states.
//!
//! Every draw is a pure function of a [`Seed`]. Ensembles derive one child
//! seed per sample, so parallel and serial sweeps see identical bits.

use crate::mat::CMat;
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::PI;

/// Reproducible RNG root. `child` derives statistically independent seeds for
/// sub-tasks; the same `(seed, tag)` pair always yields the same child.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(u64);

impl Seed {
    pub fn new(value: u64) -> Self {
        Self(value)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn child(self, tag: u64) -> Self {
        Self(splitmix64(
            self.0.wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        ))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// Distinct stream ids keep draws of different kinds independent even under
// the same seed.
const STREAM_HAAR: u64 = 1;
const STREAM_STATE: u64 = 2;
pub(crate) const STREAM_CLASSICAL_BASE: u64 = 1 << 32;

pub(crate) fn rng_for(seed: Seed, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    rng.set_stream(stream);
    rng
}

/// Uniform on (0, 1]: 53-bit mantissa, never exactly zero (safe under `ln`).
pub(crate) fn uniform_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
}

/// One Box–Muller pair of independent standard normals.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1 = uniform_open_closed(rng);
    let u2 = uniform_open_closed(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Standard complex normal: E|z|² = 1.
fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    let (a, b) = normal_pair(rng);
    C64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary on U(d): a Ginibre draw orthonormalized by
/// modified Gram–Schmidt (two passes), which fixes the QR phase gauge so the
/// triangular factor has a real positive diagonal.
pub fn haar_unitary(d: usize, seed: Seed) -> CMat {
    assert!(d >= 1, "haar_unitary needs d >= 1");
    let mut rng = rng_for(seed, STREAM_HAAR);
    let g = CMat::from_fn(d, d, |_, _| complex_normal(&mut rng));

    let mut columns: Vec<Vec<C64>> = (0..d)
        .map(|j| (0..d).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..d {
        let (done, rest) = columns.split_at_mut(j);
        let v = &mut rest[0];
        // Re-orthogonalize once: plain MGS loses orthogonality for large d.
        for _pass in 0..2 {
            for q in done.iter() {
                let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "Ginibre draw was singular");
        for vi in v.iter_mut() {
            *vi /= norm;
        }
    }
    CMat::from_fn(d, d, |i, j| columns[j][i])
}

/// Random pure state, uniform on the unit sphere of C^d (d×1 column).
pub fn random_pure_state(d: usize, seed: Seed) -> CMat {
    assert!(d >= 1, "random_pure_state needs d >= 1");
    let mut rng = rng_for(seed, STREAM_STATE);
    let raw: Vec<C64> = (0..d).map(|_| complex_normal(&mut rng)).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 0.0, "Gaussian draw was zero");
    CMat::from_fn(d, 1, |i, _| raw[i] / norm)
}
