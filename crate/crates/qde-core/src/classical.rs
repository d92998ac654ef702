//! The classical baker transformation on the unit square and the Monte Carlo
//! estimate of its symbol-sequence entropy, used as the ergodic-theory
//! baseline for the quantum entropy traces.

use crate::entropy::EntropyTrace;
use crate::mat::kahan_sum;
use crate::sampling::{rng_for, uniform_open_closed, Seed, STREAM_CLASSICAL_BASE};
use rayon::prelude::*;

/// A point on the unit-square phase space; coordinates are reduced mod 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self {
            q: q.rem_euclid(1.0),
            p: p.rem_euclid(1.0),
        }
    }
}

/// One application of the baker map: stretch in position, stack in momentum.
pub fn classical_baker_step(pt: PhasePoint) -> PhasePoint {
    let b = (2.0 * pt.q).floor();
    PhasePoint {
        q: 2.0 * pt.q - b,
        p: (pt.p + b) / 2.0,
    }
}

/// Inverse of [`classical_baker_step`].
pub fn classical_baker_inverse(pt: PhasePoint) -> PhasePoint {
    let b = (2.0 * pt.p).floor();
    PhasePoint {
        q: (pt.q + b) / 2.0,
        p: 2.0 * pt.p - b,
    }
}

const CHUNK: usize = 65_536;

/// Monte Carlo estimate of the Shannon entropy of length-`t` symbol words,
/// reading the `k`-cell momentum symbol before each of `t_max` map
/// applications (each `substeps` baker steps). Returns one trace point per
/// word length, Miller–Madow corrected, with a delta-method standard error.
///
/// Uniform phase-space samples are drawn in fixed-size chunks, one RNG
/// stream per chunk, so the estimate is independent of thread count.
pub fn classical_symbol_entropy(
    k: usize,
    t_max: usize,
    n_samples: usize,
    seed: Seed,
    substeps: usize,
) -> EntropyTrace {
    assert!(k >= 2, "need at least two symbols");
    assert!(t_max >= 1);
    assert!(substeps >= 1);
    let words = k
        .checked_pow(t_max as u32)
        .expect("word count overflows usize");
    assert!(
        words <= n_samples / 100,
        "undersampled histogram: {words} words for {n_samples} samples"
    );

    let n_chunks = n_samples.div_ceil(CHUNK);
    let hists: Vec<Vec<u64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk_idx| {
            let mut rng = rng_for(seed, STREAM_CLASSICAL_BASE + chunk_idx as u64);
            let lo = chunk_idx * CHUNK;
            let hi = (lo + CHUNK).min(n_samples);
            let mut hist = vec![0u64; words];
            for _ in lo..hi {
                let q = uniform_open_closed(&mut rng);
                let p = uniform_open_closed(&mut rng);
                let mut pt = PhasePoint::new(q, p);
                let mut w = 0usize;
                let mut place = 1usize;
                for _ in 0..t_max {
                    let s = ((pt.p * k as f64).floor() as usize).min(k - 1);
                    w += s * place;
                    place *= k;
                    for _ in 0..substeps {
                        pt = classical_baker_step(pt);
                    }
                }
                hist[w] += 1;
            }
            hist
        })
        .collect();

    let mut hist = vec![0u64; words];
    for local in &hists {
        for (acc, c) in hist.iter_mut().zip(local) {
            *acc += c;
        }
    }

    let n = n_samples as f64;
    let points = (1..=t_max)
        .map(|t| {
            let cells = k.pow(t as u32);
            let mut counts = vec![0u64; cells];
            for (w, c) in hist.iter().enumerate() {
                counts[w % cells] += c;
            }
            let occupied = counts.iter().filter(|&&c| c > 0).count();
            let h_plug = -kahan_sum(counts.iter().filter(|&&c| c > 0).map(|&c| {
                let p = c as f64 / n;
                p * p.ln()
            }));
            let second = kahan_sum(counts.iter().filter(|&&c| c > 0).map(|&c| {
                let p = c as f64 / n;
                p * p.ln() * p.ln()
            }));
            let value = h_plug + (occupied as f64 - 1.0) / (2.0 * n);
            let stderr = ((second - h_plug * h_plug).max(0.0) / n).sqrt();
            (t, value, stderr)
        })
        .collect();
    EntropyTrace::from_points(points)
}
