//! Entropy of repeated measurement records.
//!
//! For a partition `{X_j}` and a unitary `u`, the length-`t` words
//! `K_i = u·X_{i_t} ⋯ u·X_{i_1}` (index `i = Σ_s i_s·k^{s−1}`, first symbol
//! least significant) carry everything the measurement record can know about
//! the dynamics. Two Gram matrices organize them:
//!
//! * the **tracial** Gram `σ_{i;j} = tr(K_j†K_i)/d` — dynamics alone, and
//! * the **state** Gram `σ^α_{i;j} = ⟨K_jα, K_iα⟩` — dynamics seen from one
//!   initial vector `α`.
//!
//! Their von Neumann entropies are the partial entropy `S_t` and the
//! decoherence entropy `E_t = S((Φ∘𝒰)^{t−1}Φ(αα†))`; the equality of the
//! state-Gram and channel routes to `E_t` is an exact identity, checked in
//! the integration tests. When `k^t` outgrows the Gram budget but the
//! dimension is small, the same spectra come from iterating the lifted
//! channel on a purification of the maximally mixed state ([`omega_state`]).

use crate::mat::{
    hermitian_spectrum, hs_norm, kahan_sum, spectrum_entropy, trace_norm, CMat, DensityMatrix,
    MatError,
};
use crate::partition::{
    apply_channel, measured_step, PartitionError, PartitionKind, PartitionOfUnity,
};
use crate::sampling::{random_pure_state, Seed};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::io::{self, Write};
use thiserror::Error;

const UNITARY_TOL: f64 = 1e-10;
const STATE_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("word family needs {needed} rows, over the Gram cap {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error("doubled-space iteration at dimension {d} exceeds the budget {max_d}")]
    MemoryBudget { d: usize, max_d: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("trace has no point at t={t}")]
    MissingPoint { t: usize },
    #[error("dynamics deviates from unitarity by {deviation:.3e}")]
    NotUnitary { deviation: f64 },
    #[error("invalid input: {reason}")]
    InvalidInput { reason: String },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

fn check_dynamics(p: &PartitionOfUnity, u: &CMat) -> Result<(), EntropyError> {
    if u.rows() != u.cols() || u.rows() != p.dim() {
        return Err(EntropyError::DimensionMismatch {
            left: p.dim(),
            right: u.rows(),
        });
    }
    let dev = u.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(EntropyError::NotUnitary { deviation: dev });
    }
    Ok(())
}

fn word_count(k: usize, t: usize, cap: usize) -> Result<usize, EntropyError> {
    match k.checked_pow(t as u32) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(EntropyError::CapExceeded { needed: n, cap }),
        None => Err(EntropyError::CapExceeded {
            needed: usize::MAX,
            cap,
        }),
    }
}

fn normalized_state(alpha: &CMat, d: usize) -> Result<CMat, EntropyError> {
    if alpha.cols() != 1 || alpha.rows() != d {
        return Err(EntropyError::DimensionMismatch {
            left: d,
            right: alpha.rows(),
        });
    }
    let norm = alpha.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
        return Err(EntropyError::InvalidInput {
            reason: format!("state norm {norm} is not 1"),
        });
    }
    Ok(alpha.scaled(C64::new(1.0 / norm, 0.0)))
}

// ---------------------------------------------------------------------------
// Correlation matrices
// ---------------------------------------------------------------------------

/// Hermitian, trace-one Gram matrix of a word family; its von Neumann entropy
/// is the entropy of the measurement record.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    mat: CMat,
}

impl CorrelationMatrix {
    pub(crate) fn new(m: CMat) -> Result<Self, EntropyError> {
        if m.rows() != m.cols() {
            return Err(EntropyError::InvalidInput {
                reason: format!("correlation matrix is {}x{}", m.rows(), m.cols()),
            });
        }
        if !m.is_finite() {
            return Err(EntropyError::InvalidInput {
                reason: "non-finite correlation entry".into(),
            });
        }
        let herm = m.hermiticity_deviation();
        if herm > 1e-8 {
            return Err(EntropyError::InvalidInput {
                reason: format!("correlation matrix off Hermitian by {herm:.3e}"),
            });
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > 1e-9 {
            return Err(EntropyError::InvalidInput {
                reason: format!("correlation trace {tr} is not 1"),
            });
        }
        Ok(Self {
            mat: m.symmetrized(),
        })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn entropy(&self) -> Result<f64, EntropyError> {
        let spec = hermitian_spectrum(&self.mat)?;
        Ok(spectrum_entropy(spec.values())?)
    }
}

/// Gram matrix `G_{ij} = ⟨row_j, row_i⟩` of `n` packed rows of length `len`,
/// lower triangle in parallel, mirrored exactly.
fn gram_of_rows(rows: &[C64], n: usize, len: usize) -> CMat {
    debug_assert_eq!(rows.len(), n * len);
    let lower: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ri = &rows[i * len..(i + 1) * len];
            (0..=i)
                .map(|j| {
                    let rj = &rows[j * len..(j + 1) * len];
                    let mut acc = C64::new(0.0, 0.0);
                    for v in 0..len {
                        acc += ri[v] * rj[v].conj();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut sigma = CMat::zeros(n, n);
    for (i, row) in lower.iter().enumerate() {
        for (j, &z) in row.iter().enumerate() {
            sigma[(i, j)] = z;
            if i != j {
                sigma[(j, i)] = z.conj();
            }
        }
    }
    sigma
}

/// Depth-first word expansion, most significant symbol fixed by the caller:
/// descending a level appends the next-lower symbol on the right, so leaves
/// land in ascending word-index order within `out`.
fn fill_word_rows(ws: &[CMat], prefix: &CMat, depth: usize, out: &mut [C64], scale: f64) {
    if depth == 0 {
        for (dst, src) in out.iter_mut().zip(prefix.data()) {
            *dst = src * scale;
        }
        return;
    }
    let sub = out.len() / ws.len();
    for (c, chunk) in out.chunks_mut(sub).enumerate() {
        let next = prefix.mul(&ws[c]);
        fill_word_rows(ws, &next, depth - 1, chunk, scale);
    }
}

/// Tracial correlation matrix of the length-`t` words: `σ_{i;j} =
/// tr(K_j†K_i)/d`. Fails with [`EntropyError::CapExceeded`] when `k^t > cap`.
pub fn tracial_correlation(
    p: &PartitionOfUnity,
    u: &CMat,
    t: usize,
    cap: usize,
) -> Result<CorrelationMatrix, EntropyError> {
    check_dynamics(p, u)?;
    if t == 0 {
        return Err(EntropyError::InvalidInput {
            reason: "word length t must be at least 1".into(),
        });
    }
    let k = p.len();
    let d = p.dim();
    let n = word_count(k, t, cap)?;
    let ws: Vec<CMat> = (0..k).map(|c| u.mul(p.op(c))).collect();
    let d2 = d * d;
    let scale = 1.0 / (d as f64).sqrt();

    let mut rows = vec![C64::new(0.0, 0.0); n * d2];
    let block = (n / k) * d2;
    rows.par_chunks_mut(block)
        .enumerate()
        .for_each(|(c, chunk)| fill_word_rows(&ws, &ws[c], t - 1, chunk, scale));

    CorrelationMatrix::new(gram_of_rows(&rows, n, d2))
}

/// Depth-first expansion of the word vectors `K_i·α`, first symbol outermost;
/// each leaf is written at its word index (first symbol least significant).
fn fill_state_rows(
    ws: &[CMat],
    v: &CMat,
    depth_left: usize,
    place: usize,
    idx: usize,
    out: &mut [C64],
    d: usize,
) {
    if depth_left == 0 {
        for r in 0..d {
            out[idx * d + r] = v[(r, 0)];
        }
        return;
    }
    for (c, w) in ws.iter().enumerate() {
        let next = w.mul(v);
        fill_state_rows(ws, &next, depth_left - 1, place * ws.len(), idx + c * place, out, d);
    }
}

/// State correlation matrix `σ^α_{i;j} = ⟨K_jα, K_iα⟩` for a normalized
/// initial vector `α` (renormalized if within 1e−8 of unit length).
pub fn state_correlation(
    p: &PartitionOfUnity,
    u: &CMat,
    t: usize,
    alpha: &CMat,
    cap: usize,
) -> Result<CorrelationMatrix, EntropyError> {
    check_dynamics(p, u)?;
    if t == 0 {
        return Err(EntropyError::InvalidInput {
            reason: "word length t must be at least 1".into(),
        });
    }
    let k = p.len();
    let d = p.dim();
    let n = word_count(k, t, cap)?;
    let alpha = normalized_state(alpha, d)?;
    let ws: Vec<CMat> = (0..k).map(|c| u.mul(p.op(c))).collect();

    let mut rows = vec![C64::new(0.0, 0.0); n * d];
    fill_state_rows(&ws, &alpha, t, 1, 0, &mut rows, d);

    CorrelationMatrix::new(gram_of_rows(&rows, n, d))
}

// ---------------------------------------------------------------------------
// Doubled-space route
// ---------------------------------------------------------------------------

/// Purification of the maximally mixed state: `(1/√d)·Σ_m e_m⊗e_m` on the
/// doubled space, first factor the system (component `m·d + n`).
pub fn purification(d: usize) -> CMat {
    assert!(d >= 1);
    let amp = 1.0 / (d as f64).sqrt();
    let mut psi = CMat::zeros(d * d, 1);
    for m in 0..d {
        psi[(m * d + m, 0)] = C64::new(amp, 0.0);
    }
    psi
}

/// Traces out the left factor of a `d_left·d_right`-dimensional operator.
pub fn partial_trace_left(m: &CMat, d_left: usize, d_right: usize) -> CMat {
    assert_eq!(m.rows(), d_left * d_right);
    assert_eq!(m.cols(), d_left * d_right);
    CMat::from_fn(d_right, d_right, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..d_left {
            acc += m[(s * d_right + i, s * d_right + j)];
        }
        acc
    })
}

/// Traces out the right factor of a `d_left·d_right`-dimensional operator.
pub fn partial_trace_right(m: &CMat, d_left: usize, d_right: usize) -> CMat {
    assert_eq!(m.rows(), d_left * d_right);
    assert_eq!(m.cols(), d_left * d_right);
    CMat::from_fn(d_left, d_left, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..d_right {
            acc += m[(i * d_right + s, j * d_right + s)];
        }
        acc
    })
}

fn lifted_kraus(p: &PartitionOfUnity, u: &CMat) -> Vec<CMat> {
    let eye = CMat::identity(p.dim());
    (0..p.len()).map(|c| u.mul(p.op(c)).kron(&eye)).collect()
}

fn lifted_step(lifted: &[CMat], rho: &CMat) -> CMat {
    let mut next = CMat::zeros(rho.rows(), rho.cols());
    for l in lifted {
        next = next.add(&l.mul(rho).mul(&l.dagger()));
    }
    next
}

/// The doubled-space state after `t` measured steps from the purification of
/// the maximally mixed state: its nonzero spectrum equals the tracial Gram's,
/// at memory cost `d⁴` instead of `k^t·d²`. Refused above `max_d`.
pub fn omega_state(
    p: &PartitionOfUnity,
    u: &CMat,
    t: usize,
    max_d: usize,
) -> Result<DensityMatrix, EntropyError> {
    check_dynamics(p, u)?;
    let d = p.dim();
    if d > max_d {
        return Err(EntropyError::MemoryBudget { d, max_d });
    }
    let psi = purification(d);
    let mut rho = psi.mul(&psi.dagger());
    let lifted = lifted_kraus(p, u);
    for _ in 0..t {
        rho = lifted_step(&lifted, &rho);
    }
    Ok(DensityMatrix::new(rho)?)
}

// ---------------------------------------------------------------------------
// Entropy traces
// ---------------------------------------------------------------------------

/// A sequence of `(t, value, stderr)` points, one per word length.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyTrace {
    points: Vec<(usize, f64, f64)>,
}

impl EntropyTrace {
    pub fn from_points(points: Vec<(usize, f64, f64)>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[(usize, f64, f64)] {
        &self.points
    }

    pub fn value_at(&self, t: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.1)
    }

    pub fn stderr_at(&self, t: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.2)
    }

    /// Least-squares slope of value against t over `t_lo ..= t_hi`; `None`
    /// with fewer than two points in range.
    pub fn fit_slope(&self, t_lo: usize, t_hi: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.0 >= t_lo && p.0 <= t_hi)
            .map(|p| (p.0 as f64, p.1))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let tbar = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let vbar = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - tbar) * (p.1 - vbar)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - tbar) * (p.0 - tbar)).sum();
        if den == 0.0 {
            return None;
        }
        Some(num / den)
    }

    /// CSV rows `t,value,stderr`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,value,stderr")?;
        for &(t, value, stderr) in &self.points {
            writeln!(w, "{t},{value},{stderr}")?;
        }
        Ok(())
    }
}

/// How large a Gram matrix the word path may build, and up to which dimension
/// the doubled-space path may take over beyond that.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathBudget {
    pub gram_cap: usize,
    pub omega_dim: usize,
}

impl Default for PathBudget {
    fn default() -> Self {
        Self {
            gram_cap: 4096,
            omega_dim: 16,
        }
    }
}

/// Partial entropies `S_t` of the word Grams for `t = 1..=t_max`.
///
/// Routes each trace through whichever representation is affordable: the
/// `k^t`-row Gram while it fits the budget (and is not plainly wasteful), the
/// `d²`-dimensional doubled-space iteration when the dimension allows, and an
/// error when neither does.
pub fn alf_partial_entropy(
    p: &PartitionOfUnity,
    u: &CMat,
    t_max: usize,
    budget: &PathBudget,
) -> Result<EntropyTrace, EntropyError> {
    check_dynamics(p, u)?;
    if t_max == 0 {
        return Err(EntropyError::InvalidInput {
            reason: "t_max must be at least 1".into(),
        });
    }
    let k = p.len();
    let d = p.dim();
    let needed = k.checked_pow(t_max as u32);
    let gram_ok = needed.is_some_and(|n| n <= budget.gram_cap);
    let omega_ok = d <= budget.omega_dim;
    let omega_cheaper = needed.is_none_or(|n| d * d < n);

    if omega_ok && (!gram_ok || omega_cheaper) {
        let psi = purification(d);
        let mut rho = psi.mul(&psi.dagger());
        let lifted = lifted_kraus(p, u);
        let mut points = Vec::with_capacity(t_max);
        for t in 1..=t_max {
            rho = lifted_step(&lifted, &rho);
            let spec = hermitian_spectrum(&rho)?;
            points.push((t, spectrum_entropy(spec.values())?, 0.0));
        }
        return Ok(EntropyTrace::from_points(points));
    }
    if !gram_ok {
        return Err(EntropyError::CapExceeded {
            needed: needed.unwrap_or(usize::MAX),
            cap: budget.gram_cap,
        });
    }
    let mut points = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let sigma = tracial_correlation(p, u, t, budget.gram_cap)?;
        points.push((t, sigma.entropy()?, 0.0));
    }
    Ok(EntropyTrace::from_points(points))
}

/// Decoherence entropies `E_t = S((Φ∘𝒰)^{t−1}Φ(αα†))` for `t = 1..=t_max`:
/// the state is measured first, then alternately evolved and measured.
pub fn decoherence_entropy(
    p: &PartitionOfUnity,
    u: &CMat,
    t_max: usize,
    alpha: &CMat,
) -> Result<EntropyTrace, EntropyError> {
    check_dynamics(p, u)?;
    if t_max == 0 {
        return Err(EntropyError::InvalidInput {
            reason: "t_max must be at least 1".into(),
        });
    }
    let alpha = normalized_state(alpha, p.dim())?;
    let mut rho = apply_channel(p, &DensityMatrix::pure(&alpha)?)?;
    let mut points = Vec::with_capacity(t_max);
    points.push((1, rho.entropy()?, 0.0));
    for t in 2..=t_max {
        rho = measured_step(u, p, &rho)?;
        points.push((t, rho.entropy()?, 0.0));
    }
    Ok(EntropyTrace::from_points(points))
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = kahan_sum(xs.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Ensemble mean of [`decoherence_entropy`] over `n_samples` Haar-random
/// initial vectors (children of `seed`), with the standard error of the mean
/// at each `t`. The sample reduction is ordered, so results are independent
/// of the parallel schedule.
pub fn mean_decoherence_entropy(
    p: &PartitionOfUnity,
    u: &CMat,
    t_max: usize,
    n_samples: usize,
    seed: Seed,
) -> Result<EntropyTrace, EntropyError> {
    check_dynamics(p, u)?;
    if n_samples == 0 {
        return Err(EntropyError::InvalidInput {
            reason: "need at least one sample".into(),
        });
    }
    let d = p.dim();
    let traces: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>, EntropyError> {
            let alpha = random_pure_state(d, seed.child(i as u64));
            let trace = decoherence_entropy(p, u, t_max, &alpha)?;
            Ok(trace.points().iter().map(|p| p.1).collect())
        })
        .collect::<Result<_, _>>()?;
    let points = (1..=t_max)
        .map(|t| {
            let samples: Vec<f64> = traces.iter().map(|tr| tr[t - 1]).collect();
            let (mean, stderr) = mean_and_stderr(&samples);
            (t, mean, stderr)
        })
        .collect();
    Ok(EntropyTrace::from_points(points))
}

/// First differences `(S_2 − S_1, E_2 − E_1)`: the per-step entropy
/// production rates of the two traces.
pub fn production_rates(
    s: &EntropyTrace,
    e: &EntropyTrace,
) -> Result<(f64, f64), EntropyError> {
    let grab = |tr: &EntropyTrace, t: usize| {
        tr.value_at(t).ok_or(EntropyError::MissingPoint { t })
    };
    let ds = grab(s, 2)? - grab(s, 1)?;
    let de = grab(e, 2)? - grab(e, 1)?;
    Ok((ds, de))
}

// ---------------------------------------------------------------------------
// Entropy gap bounds
// ---------------------------------------------------------------------------

/// Monte Carlo sandwich around the entropy gap `S(σ) − E_α S(σ^α)` of a word
/// family: `upper_a ≥ gap ≥ lower_b` up to sampling error.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub upper_a: f64,
    pub upper_stderr: f64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub lower_b: f64,
    pub lower_stderr: f64,
    pub n_samples: usize,
}

impl BoundsReport {
    /// Do the three estimates order correctly within three standard errors?
    pub fn sandwich_holds(&self) -> bool {
        self.upper_a + 3.0 * (self.upper_stderr + self.gap_stderr) >= self.gap
            && self.gap + 3.0 * (self.gap_stderr + self.lower_stderr) >= self.lower_b
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "upper_A,gap,lower_B,n_samples")?;
        writeln!(
            w,
            "{},{},{},{}",
            self.upper_a, self.gap, self.lower_b, self.n_samples
        )
    }
}

fn eta(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Monte Carlo bounds on the gap between the tracial entropy `S(σ)` and the
/// mean state entropy `E_α S(σ^α)` of a word family `{Y_j}`:
///
/// * upper: mean of `‖σ − σ^α‖₁·ln k + η(‖σ − σ^α‖₁)`,
/// * lower: half the larger of mean `‖σ − σ^α‖₁²` and mean `‖σ − σ^α‖₂²`.
///
/// Needs at least 16 samples for the standard errors to mean anything.
pub fn entropy_gap_bounds(
    y: &PartitionOfUnity,
    n_samples: usize,
    seed: Seed,
) -> Result<BoundsReport, EntropyError> {
    assert!(n_samples >= 16, "gap bounds need at least 16 samples");
    let d = y.dim();
    let k = y.len();
    let d2 = d * d;
    let scale = 1.0 / (d as f64).sqrt();

    let mut rows = vec![C64::new(0.0, 0.0); k * d2];
    for (j, chunk) in rows.chunks_mut(d2).enumerate() {
        for (dst, src) in chunk.iter_mut().zip(y.op(j).data()) {
            *dst = src * scale;
        }
    }
    let sigma = gram_of_rows(&rows, k, d2);
    let s_sigma = spectrum_entropy(hermitian_spectrum(&sigma)?.values())?;

    let per_sample: Vec<(f64, f64, f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, f64, f64), EntropyError> {
            let alpha = random_pure_state(d, seed.child(i as u64));
            let mut srows = vec![C64::new(0.0, 0.0); k * d];
            for (j, chunk) in srows.chunks_mut(d).enumerate() {
                let v = y.op(j).mul(&alpha);
                chunk.copy_from_slice(v.data());
            }
            let sigma_alpha = gram_of_rows(&srows, k, d);
            let s_alpha = spectrum_entropy(hermitian_spectrum(&sigma_alpha)?.values())?;
            let diff = sigma.sub(&sigma_alpha);
            let t1 = trace_norm(&diff)?;
            let a = t1 * (k as f64).ln() + eta(t1);
            Ok((a, s_alpha, t1 * t1, hs_norm(&diff).powi(2)))
        })
        .collect::<Result<_, _>>()?;

    let col = |f: fn(&(f64, f64, f64, f64)) -> f64| -> Vec<f64> {
        per_sample.iter().map(f).collect()
    };
    let (upper_a, upper_stderr) = mean_and_stderr(&col(|x| x.0));
    let (mean_s_alpha, gap_stderr) = mean_and_stderr(&col(|x| x.1));
    let (b1, b1_err) = mean_and_stderr(&col(|x| x.2));
    let (b2, b2_err) = mean_and_stderr(&col(|x| x.3));
    let (lower_b, lower_stderr) = if b1 >= b2 {
        (b1 / 2.0, b1_err / 2.0)
    } else {
        (b2 / 2.0, b2_err / 2.0)
    };

    Ok(BoundsReport {
        upper_a,
        upper_stderr,
        gap: s_sigma - mean_s_alpha,
        gap_stderr,
        lower_b,
        lower_stderr,
        n_samples,
    })
}

// ---------------------------------------------------------------------------
// Free-independence probe
// ---------------------------------------------------------------------------

/// Deviation of a word Gram from the free-independence prediction `δ_ij/k^t`,
/// with the low unitary moments `|tr uⁿ|/d` that control it.
#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub t: usize,
    pub max_dev: f64,
    pub unitary_moments: Vec<f64>,
}

impl ProbeReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t,max_dev")?;
        for n in 1..=self.unitary_moments.len() {
            write!(w, ",moment_{n}")?;
        }
        writeln!(w)?;
        write!(w, "{},{}", self.t, self.max_dev)?;
        for m in &self.unitary_moments {
            write!(w, ",{m}")?;
        }
        writeln!(w)
    }
}

/// Largest entrywise deviation of the word Gram (tracial, or the state Gram
/// when `alpha` is given) from `δ_ij/k^t`, plus `|tr uⁿ|/d` for `n = 1..=t`.
/// Only projective partitions admit the prediction, others are rejected.
pub fn free_independence_probe(
    p: &PartitionOfUnity,
    u: &CMat,
    t: usize,
    alpha: Option<&CMat>,
    cap: usize,
) -> Result<ProbeReport, EntropyError> {
    if p.kind() != PartitionKind::Projective {
        return Err(EntropyError::InvalidInput {
            reason: "free-independence prediction needs a projective partition".into(),
        });
    }
    let sigma = match alpha {
        Some(a) => state_correlation(p, u, t, a, cap)?,
        None => tracial_correlation(p, u, t, cap)?,
    };
    let n = sigma.dim();
    let flat = 1.0 / n as f64;
    let mut max_dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j {
                C64::new(flat, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            max_dev = max_dev.max((sigma.mat()[(i, j)] - want).norm());
        }
    }
    let d = p.dim() as f64;
    let mut power = CMat::identity(p.dim());
    let mut unitary_moments = Vec::with_capacity(t);
    for _ in 1..=t {
        power = power.mul(u);
        unitary_moments.push(power.trace().norm() / d);
    }
    Ok(ProbeReport {
        t,
        max_dev,
        unitary_moments,
    })
}
