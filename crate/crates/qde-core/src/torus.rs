//! Quantization on the unit-square torus phase space: translation operators,
//! the discrete Fourier transform, the baker unitary, observable
//! quantization, and coherent states for Husimi phase-space pictures.
//!
//! Conventions. Position basis vectors `e_j` sit at `q = j/d`; momentum
//! eigenvectors have components `(φ_m)_j = e^{+2πi m j/d}/√d`, localized at
//! `p ≈ m/d`. The cyclic shift `U` moves position by one site, the diagonal
//! `V` shifts momentum, and `U V = V U · e^{2πi/d}`.

use crate::mat::CMat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("the baker construction needs an even dimension, got {d}")]
    OddDimension { d: usize },
}

/// Hilbert-space dimension plus the two Floquet phases picked up on winding
/// around the torus in position and momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusQuantization {
    d: usize,
    chi_q: f64,
    chi_p: f64,
}

impl TorusQuantization {
    pub fn new(d: usize) -> Self {
        Self::with_phases(d, 0.0, 0.0)
    }

    pub fn with_phases(d: usize, chi_q: f64, chi_p: f64) -> Self {
        assert!(d >= 2, "torus quantization needs d >= 2");
        Self {
            d,
            chi_q: chi_q.rem_euclid(1.0),
            chi_p: chi_p.rem_euclid(1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn phases(&self) -> (f64, f64) {
        (self.chi_q, self.chi_p)
    }
}

/// The cyclic position shift `U` (with the momentum Floquet phase on the
/// wrap-around entry) and the diagonal momentum shift `V`.
pub fn translation_operators(tq: &TorusQuantization) -> (CMat, CMat) {
    let d = tq.d;
    let mut u = CMat::zeros(d, d);
    for j in 0..d - 1 {
        u[(j + 1, j)] = C64::new(1.0, 0.0);
    }
    u[(0, d - 1)] = C64::from_polar(1.0, 2.0 * PI * tq.chi_p);

    let mut v = CMat::zeros(d, d);
    for j in 0..d {
        v[(j, j)] = C64::from_polar(1.0, -2.0 * PI * (j as f64 + tq.chi_q) / d as f64);
    }
    (u, v)
}

fn phased_dft(d: usize, chi_q: f64, chi_p: f64) -> CMat {
    let scale = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, d, |k, j| {
        let ang = -2.0 * PI * (k as f64 + chi_p) * (j as f64 + chi_q) / d as f64;
        C64::from_polar(scale, ang)
    })
}

/// Unitary DFT, `F_{kj} = e^{−2πi k j/d}/√d`.
pub fn dft_matrix(d: usize) -> CMat {
    assert!(d >= 1);
    phased_dft(d, 0.0, 0.0)
}

/// The quantized baker map: a half-size DFT on each position half, undone by
/// a full-size inverse DFT. Requires even dimension.
pub fn baker_unitary(tq: &TorusQuantization) -> Result<CMat, TorusError> {
    let d = tq.d;
    if !d.is_multiple_of(2) {
        return Err(TorusError::OddDimension { d });
    }
    let h = d / 2;
    let f_half = phased_dft(h, tq.chi_q, tq.chi_p);
    let mut inner = CMat::zeros(d, d);
    for b in 0..2 {
        for r in 0..h {
            for c in 0..h {
                inner[(b * h + r, b * h + c)] = f_half[(r, c)];
            }
        }
    }
    Ok(phased_dft(d, tq.chi_q, tq.chi_p).dagger().mul(&inner))
}

/// Finite Fourier sum of translation monomials: Σ a·V^j·U^k for terms
/// `(j, k, a)`, with V applied after U.
pub fn quantize_observable(terms: &[(usize, usize, C64)], tq: &TorusQuantization) -> CMat {
    let d = tq.d;
    let (u, v) = translation_operators(tq);
    let mut out = CMat::zeros(d, d);
    for &(j, k, a) in terms {
        let mut mono = CMat::identity(d);
        for _ in 0..k {
            mono = u.mul(&mono);
        }
        for _ in 0..j {
            mono = v.mul(&mono);
        }
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] += a * mono[(r, c)];
            }
        }
    }
    out
}

/// Width and truncation of the periodized Gaussian wave packet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentStateParams {
    /// Ratio of position width to momentum width; 1 is the symmetric packet.
    pub squeeze: f64,
    /// Number of windings summed on each side; 3 already reaches machine
    /// precision at squeeze 1, the default leaves margin for squeezed packets.
    pub winding_cut: u32,
}

impl Default for CoherentStateParams {
    fn default() -> Self {
        Self {
            squeeze: 1.0,
            winding_cut: 5,
        }
    }
}

/// Normalized coherent state centred at `(q, p)` on the torus: a periodized
/// Gaussian; amplitudes `c_j ∝ Σ_w exp(−(πd/2)·squeeze·(j/d − q − w)²
/// + 2πi·d·p·(j/d − w))`.
pub fn coherent_state(q: f64, p: f64, d: usize, params: &CoherentStateParams) -> CMat {
    assert!(params.squeeze > 0.0, "squeeze must be positive");
    assert!(params.winding_cut >= 3, "winding_cut below convergence");
    let df = d as f64;
    let cut = params.winding_cut as i64;
    let mut amp = vec![C64::new(0.0, 0.0); d];
    for (j, a) in amp.iter_mut().enumerate() {
        let x = j as f64 / df;
        for w in -cut..=cut {
            let dx = x - q - w as f64;
            let gauss = (-(PI * df / 2.0) * params.squeeze * dx * dx).exp();
            let ang = 2.0 * PI * df * p * (x - w as f64);
            *a += C64::from_polar(gauss, ang);
        }
    }
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 0.0, "coherent state underflowed to zero");
    CMat::from_fn(d, 1, |i, _| amp[i] / norm)
}

/// Husimi grid of an operator: `⟨q_a, p_b|X†X|q_a, p_b⟩ = ‖X c‖²` sampled at
/// cell centres `q_a = (a+1/2)/n`, `p_b = (b+1/2)/n`.
#[derive(Clone, Debug)]
pub struct HusimiGrid {
    n: usize,
    values: Vec<f64>, // indexed a·n + b
}

pub fn husimi_of_operator(x: &CMat, grid_n: usize, params: &CoherentStateParams) -> HusimiGrid {
    assert_eq!(x.rows(), x.cols(), "husimi needs a square operator");
    assert!(grid_n >= 1);
    let d = x.rows();
    let n = grid_n;
    let cell = |a: usize, b: usize| -> f64 {
        let q = (a as f64 + 0.5) / n as f64;
        let p = (b as f64 + 0.5) / n as f64;
        let c = coherent_state(q, p, d, params);
        let xc = x.mul(&c);
        (0..d).map(|i| xc[(i, 0)].norm_sqr()).sum()
    };
    let values: Vec<f64> = if n * n >= 256 {
        (0..n * n)
            .into_par_iter()
            .map(|idx| cell(idx / n, idx % n))
            .collect()
    } else {
        (0..n * n).map(|idx| cell(idx / n, idx % n)).collect()
    };
    HusimiGrid { n, values }
}

impl HusimiGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at position index `a`, momentum index `b`.
    pub fn at(&self, a: usize, b: usize) -> f64 {
        assert!(a < self.n && b < self.n);
        self.values[a * self.n + b]
    }

    /// Binary 8-bit PGM, 255 at the grid maximum. Image rows run from high
    /// momentum (top) to low; columns from position 0 (left) to 1. Returns
    /// the maximum so callers can record the intensity scale.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<f64> {
        let max = self.values.iter().copied().fold(0.0f64, f64::max);
        write!(w, "P5\n{} {}\n255\n", self.n, self.n)?;
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        let mut payload = Vec::with_capacity(self.n * self.n);
        for row in 0..self.n {
            let b = self.n - 1 - row; // top row = highest momentum
            for a in 0..self.n {
                let v = (self.at(a, b) * scale).round().clamp(0.0, 255.0);
                payload.push(v as u8);
            }
        }
        w.write_all(&payload)?;
        Ok(max)
    }

    /// CSV rows `q,p,value` at cell centres, position-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "q,p,value")?;
        for a in 0..self.n {
            for b in 0..self.n {
                let q = (a as f64 + 0.5) / self.n as f64;
                let p = (b as f64 + 0.5) / self.n as f64;
                writeln!(w, "{q},{p},{}", self.at(a, b))?;
            }
        }
        Ok(())
    }
}
