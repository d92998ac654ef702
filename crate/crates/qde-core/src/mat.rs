//! Dense complex matrices and the Hermitian spectral toolbox.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::borrow::Borrow;
use std::ops::{Index, IndexMut};
use thiserror::Error;

/// Errors from the linear-algebra layer.
#[derive(Debug, Error)]
pub enum MatError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("Hermiticity deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("not a density matrix: {reason}")]
    InvalidDensity { reason: String },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("eigenvalue iteration failed to converge")]
    EigenFailed,
}

/// Parallelize row-wise work only when the matrix is large enough for the
/// fork/join overhead to pay for itself.
pub(crate) const PAR_ROWS_MIN: usize = 64;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for CMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            write!(f, " ")?;
            for c in 0..self.cols.min(8) {
                let z = self[(r, c)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { " …" } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  …")?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub(crate) fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn trace(&self) -> C64 {
        assert_eq!(self.rows, self.cols, "trace needs a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn scaled(&self, z: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= z;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(&other.data) {
            *v -= w;
        }
        out
    }

    /// Matrix product. Row blocks are evaluated in parallel for large
    /// operands; each output row is accumulated serially, so the result does
    /// not depend on the thread schedule.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "product of {}x{} by {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, inner, m) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, m);
        let fill_row = |r: usize, row_out: &mut [C64]| {
            let lhs = self.row(r);
            for (k, &a) in lhs.iter().enumerate() {
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs = other.row(k);
                for (o, &b) in row_out.iter_mut().zip(rhs) {
                    *o += a * b;
                }
            }
        };
        if n >= PAR_ROWS_MIN && inner * m >= 4096 {
            out.data
                .par_chunks_mut(m)
                .enumerate()
                .for_each(|(r, row_out)| fill_row(r, row_out));
        } else {
            for (r, row_out) in out.data.chunks_mut(m).enumerate() {
                fill_row(r, row_out);
            }
        }
        out
    }

    /// Kronecker (tensor) product, `self` as the left factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (ar, ac) = (self.rows, self.cols);
        let (br, bc) = (other.rows, other.cols);
        let mut out = Self::zeros(ar * br, ac * bc);
        for i in 0..ar {
            for j in 0..ac {
                let a = self[(i, j)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..br {
                    for q in 0..bc {
                        out[(i * br + p, j * bc + q)] = a * other[(p, q)];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise deviation from Hermiticity, max |m_ij − conj(m_ji)|.
    pub(crate) fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (M + M†)/2; callers must have checked the deviation first.
    pub(crate) fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// Largest entrywise deviation of `self†·self` from the identity.
    /// Infinite for non-square matrices.
    pub fn unitarity_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let gram = self.dagger().mul(self);
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                dev = dev.max((gram[(i, j)] - want).norm());
            }
        }
        dev
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub(crate) fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

const HERMITICITY_TOL: f64 = 1e-8;

fn require_square(m: &CMat) -> Result<usize, MatError> {
    if m.rows() != m.cols() {
        return Err(MatError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}

fn require_hermitian(m: &CMat, tolerance: f64) -> Result<CMat, MatError> {
    if !m.is_finite() {
        return Err(MatError::NonFinite);
    }
    let deviation = m.hermiticity_deviation();
    if deviation > tolerance {
        return Err(MatError::NotHermitian { deviation, tolerance });
    }
    Ok(m.symmetrized())
}

/// All eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_spectrum(m: &CMat) -> Result<Spectrum, MatError> {
    require_square(m)?;
    let h = require_hermitian(m, HERMITICITY_TOL)?;
    let (mut values, _) = crate::eig::solve(&h, false)?;
    values.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
    Ok(Spectrum::new(values))
}

/// Eigenvalues (descending) and matching eigenvectors as the columns of the
/// returned matrix.
pub fn hermitian_eigen(m: &CMat) -> Result<(Spectrum, CMat), MatError> {
    let n = require_square(m)?;
    let h = require_hermitian(m, HERMITICITY_TOL)?;
    let (values, vectors) = crate::eig::solve(&h, true)?;
    let q = vectors.expect("eigenvectors requested");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite"));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut sorted_q = CMat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            sorted_q[(r, new_col)] = q[(r, old_col)];
        }
    }
    Ok((Spectrum::new(sorted_values), sorted_q))
}

/// Entropy of a nonnegative spectrum with the shared clipping rule: values in
/// [−1e−8, 1e−12] count as zero, anything below −1e−8 is a positivity
/// violation.
pub(crate) fn spectrum_entropy(values: &[f64]) -> Result<f64, MatError> {
    const NEGATIVE_TOL: f64 = -1e-8;
    const CLIP: f64 = 1e-12;
    let mut s = 0.0f64;
    for &l in values {
        if l < NEGATIVE_TOL {
            return Err(MatError::InvalidDensity {
                reason: format!("eigenvalue {l:.3e} below {NEGATIVE_TOL:.0e}"),
            });
        }
        if l > CLIP {
            s -= l * l.ln();
        }
    }
    Ok(s.max(0.0))
}

/// Density matrix: Hermitian, unit trace; positivity is enforced where it is
/// consumed (entropies), so near-zero negative round-off never blocks channel
/// iteration.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    const TOL: f64 = 1e-10;

    /// Accepts `CMat` or `&CMat`.
    pub fn new(m: impl Borrow<CMat>) -> Result<Self, MatError> {
        let m = m.borrow();
        require_square(m)?;
        if !m.is_finite() {
            return Err(MatError::NonFinite);
        }
        let deviation = m.hermiticity_deviation();
        if deviation > Self::TOL {
            return Err(MatError::InvalidDensity {
                reason: format!("Hermiticity deviation {deviation:.3e}"),
            });
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TOL {
            return Err(MatError::InvalidDensity {
                reason: format!("trace {tr} is not 1"),
            });
        }
        Ok(Self { mat: m.symmetrized() })
    }

    /// Projector onto a pure state (d×1 column, unit norm to 1e−8).
    pub fn pure(psi: &CMat) -> Result<Self, MatError> {
        if psi.cols() != 1 {
            return Err(MatError::DimensionMismatch {
                left_rows: psi.rows(),
                left_cols: psi.cols(),
                right_rows: psi.rows(),
                right_cols: 1,
            });
        }
        if !psi.is_finite() {
            return Err(MatError::NonFinite);
        }
        let d = psi.rows();
        let norm_sqr: f64 = (0..d).map(|j| psi[(j, 0)].norm_sqr()).sum();
        let norm = norm_sqr.sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(MatError::InvalidDensity {
                reason: format!("state norm {norm} is not 1"),
            });
        }
        let mut mat = CMat::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = psi[(i, 0)] * psi[(j, 0)].conj() / norm_sqr;
            }
        }
        Ok(Self { mat })
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn entropy(&self) -> Result<f64, MatError> {
        von_neumann_entropy(self)
    }
}

/// Von Neumann entropy S(ρ) = −Σ λ ln λ in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, MatError> {
    let spectrum = hermitian_spectrum(rho.mat())?;
    spectrum_entropy(spectrum.values())
}

/// Trace norm ‖A‖₁ = Σ singular values, via the spectrum of AA†.
pub fn trace_norm(a: &CMat) -> Result<f64, MatError> {
    require_square(a)?;
    if !a.is_finite() {
        return Err(MatError::NonFinite);
    }
    let gram = a.mul(&a.dagger());
    let spectrum = hermitian_spectrum(&gram)?;
    Ok(spectrum.values().iter().map(|l| l.max(0.0).sqrt()).sum())
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMat) -> f64 {
    a.data().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Compensated (Kahan) sum, for reductions whose result must not depend on
/// how work was chunked.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
