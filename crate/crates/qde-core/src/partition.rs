//! Partitions of unity: finite operator families `{X_j}` with
//! `Σ X_j†X_j = I`, the measurement channels they generate, and a small
//! binary container for shipping them between runs.
//!
//! The kind tag records how much structure survived construction:
//! `Projective` families are orthogonal Hermitian projectors, `Bistochastic`
//! ones also satisfy `Σ X_j X_j† = I` (so the channel is unital), `General`
//! only resolves the identity.

use crate::mat::{hs_norm, CMat, DensityMatrix, MatError};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::io::{self, Read, Write};
use thiserror::Error;

const RESOLUTION_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("partition rank {k} does not divide dimension {d}")]
    NotDivisible { d: usize, k: usize },
    #[error("rotation matrix deviates from unitarity by {deviation:.3e}")]
    NotUnitary { deviation: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operators do not resolve the identity (deviation {deviation:.3e})")]
    IdentityResolution { deviation: f64 },
    #[error("operators do not satisfy the declared kind (deviation {deviation:.3e})")]
    KindViolation { deviation: f64 },
    #[error("malformed partition data: {reason}")]
    Malformed { reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Mat(#[from] MatError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionKind {
    Projective,
    Bistochastic,
    General,
}

/// A finite family of same-dimension operators resolving the identity.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    ops: Vec<CMat>,
    kind: PartitionKind,
}

impl PartitionOfUnity {
    /// Validates the resolution of the identity and whatever extra structure
    /// `kind` claims, then stores the family.
    pub fn new(ops: Vec<CMat>, kind: PartitionKind) -> Result<Self, PartitionError> {
        let first = ops.first().ok_or_else(|| PartitionError::Malformed {
            reason: "empty operator family".into(),
        })?;
        let d = first.rows();
        for op in &ops {
            if op.rows() != op.cols() {
                return Err(PartitionError::Malformed {
                    reason: format!("non-square operator {}x{}", op.rows(), op.cols()),
                });
            }
            if op.rows() != d {
                return Err(PartitionError::DimensionMismatch {
                    left: d,
                    right: op.rows(),
                });
            }
            if !op.is_finite() {
                return Err(PartitionError::Malformed {
                    reason: "non-finite operator entry".into(),
                });
            }
        }

        let mut sum = CMat::zeros(d, d);
        for op in &ops {
            sum = sum.add(&op.dagger().mul(op));
        }
        let dev = hs_norm(&sum.sub(&CMat::identity(d)));
        if dev > RESOLUTION_TOL {
            return Err(PartitionError::IdentityResolution { deviation: dev });
        }

        match kind {
            PartitionKind::Projective => {
                for (i, op) in ops.iter().enumerate() {
                    let herm = hs_norm(&op.sub(&op.dagger()));
                    let idem = hs_norm(&op.mul(op).sub(op));
                    if herm > RESOLUTION_TOL || idem > RESOLUTION_TOL {
                        return Err(PartitionError::KindViolation {
                            deviation: herm.max(idem),
                        });
                    }
                    for other in ops.iter().skip(i + 1) {
                        let cross = hs_norm(&op.mul(other));
                        if cross > RESOLUTION_TOL {
                            return Err(PartitionError::KindViolation { deviation: cross });
                        }
                    }
                }
            }
            PartitionKind::Bistochastic => {
                let mut out = CMat::zeros(d, d);
                for op in &ops {
                    out = out.add(&op.mul(&op.dagger()));
                }
                let dev = hs_norm(&out.sub(&CMat::identity(d)));
                if dev > RESOLUTION_TOL {
                    return Err(PartitionError::KindViolation { deviation: dev });
                }
            }
            PartitionKind::General => {}
        }

        Ok(Self { ops, kind })
    }

    /// The trivial partition `{I}`.
    pub fn identity(d: usize) -> Self {
        assert!(d >= 1);
        Self {
            ops: vec![CMat::identity(d)],
            kind: PartitionKind::Projective,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].rows()
    }

    pub fn op(&self, j: usize) -> &CMat {
        &self.ops[j]
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    fn is_singleton_identity(&self) -> bool {
        self.len() == 1 && hs_norm(&self.ops[0].sub(&CMat::identity(self.dim()))) <= RESOLUTION_TOL
    }
}

/// Spectral projectors of momentum onto `k` equal blocks: block `b` spans
/// momentum indices `m ∈ [b·d/k, (b+1)·d/k)`.
pub fn momentum_partition(d: usize, k: usize) -> Result<PartitionOfUnity, PartitionError> {
    if k == 0 || !d.is_multiple_of(k) {
        return Err(PartitionError::NotDivisible { d, k });
    }
    let block = d / k;
    let ops = (0..k)
        .map(|b| {
            CMat::from_fn(d, d, |i, j| {
                let mut acc = C64::new(0.0, 0.0);
                for m in b * block..(b + 1) * block {
                    let ang = 2.0 * PI * m as f64 * (i as f64 - j as f64) / d as f64;
                    acc += C64::from_polar(1.0, ang);
                }
                acc / d as f64
            })
        })
        .collect();
    PartitionOfUnity::new(ops, PartitionKind::Projective)
}

/// Conjugates every operator by a unitary; the kind is preserved.
pub fn rotate_partition(
    p: &PartitionOfUnity,
    v: &CMat,
) -> Result<PartitionOfUnity, PartitionError> {
    if v.rows() != v.cols() || v.rows() != p.dim() {
        return Err(PartitionError::DimensionMismatch {
            left: p.dim(),
            right: v.rows(),
        });
    }
    let dev = v.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(PartitionError::NotUnitary { deviation: dev });
    }
    let vd = v.dagger();
    let ops = p.ops.iter().map(|x| v.mul(x).mul(&vd)).collect();
    PartitionOfUnity::new(ops, p.kind)
}

/// Common refinement with operators `x_j·y_m`, `j` slow index. Refining two
/// projective families generally only yields a bistochastic one; refining
/// with the trivial partition keeps the other side's kind.
pub fn refine(
    x: &PartitionOfUnity,
    y: &PartitionOfUnity,
) -> Result<PartitionOfUnity, PartitionError> {
    if x.dim() != y.dim() {
        return Err(PartitionError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    let kind = if x.is_singleton_identity() {
        y.kind
    } else if y.is_singleton_identity() {
        x.kind
    } else {
        match (x.kind, y.kind) {
            (
                PartitionKind::Projective | PartitionKind::Bistochastic,
                PartitionKind::Projective | PartitionKind::Bistochastic,
            ) => PartitionKind::Bistochastic,
            _ => PartitionKind::General,
        }
    };
    let mut ops = Vec::with_capacity(x.len() * y.len());
    for xj in &x.ops {
        for ym in &y.ops {
            ops.push(xj.mul(ym));
        }
    }
    PartitionOfUnity::new(ops, kind)
}

/// Words of the measured evolution: operator `X_{i_s}·U·⋯·U·X_{i_1}` at index
/// `i = Σ i_s·k^{s−1}`, one per length-`steps` outcome word.
pub fn measured_refinement(
    p: &PartitionOfUnity,
    u: &CMat,
    steps: usize,
) -> Result<PartitionOfUnity, PartitionError> {
    assert!(steps >= 1, "measured refinement needs at least one step");
    if u.rows() != u.cols() || u.rows() != p.dim() {
        return Err(PartitionError::DimensionMismatch {
            left: p.dim(),
            right: u.rows(),
        });
    }
    let dev = u.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(PartitionError::NotUnitary { deviation: dev });
    }
    let k = p.len();
    let total = k
        .checked_pow(steps as u32)
        .expect("word count overflows usize");
    let mut ops = vec![CMat::zeros(0, 0); total];
    for (i, op) in ops.iter_mut().enumerate() {
        let mut digits = i;
        let mut m = p.ops[digits % k].clone();
        digits /= k;
        for _ in 1..steps {
            m = p.ops[digits % k].mul(&u.mul(&m));
            digits /= k;
        }
        *op = m;
    }
    let kind = if steps == 1 {
        p.kind
    } else {
        match p.kind {
            PartitionKind::Projective | PartitionKind::Bistochastic => PartitionKind::Bistochastic,
            PartitionKind::General => PartitionKind::General,
        }
    };
    PartitionOfUnity::new(ops, kind)
}

/// The measurement channel `ρ ↦ Σ_j X_j ρ X_j†`.
pub fn apply_channel(
    p: &PartitionOfUnity,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, PartitionError> {
    if p.dim() != rho.dim() {
        return Err(PartitionError::DimensionMismatch {
            left: p.dim(),
            right: rho.dim(),
        });
    }
    let mut out = CMat::zeros(p.dim(), p.dim());
    for x in &p.ops {
        out = out.add(&x.mul(rho.mat()).mul(&x.dagger()));
    }
    Ok(DensityMatrix::new(out)?)
}

/// One step of measured dynamics: unitary evolution followed by the channel.
pub fn measured_step(
    u: &CMat,
    p: &PartitionOfUnity,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, PartitionError> {
    if u.rows() != u.cols() || u.rows() != rho.dim() {
        return Err(PartitionError::DimensionMismatch {
            left: rho.dim(),
            right: u.rows(),
        });
    }
    let evolved = u.mul(rho.mat()).mul(&u.dagger());
    let mut out = CMat::zeros(p.dim(), p.dim());
    for x in &p.ops {
        out = out.add(&x.mul(&evolved).mul(&x.dagger()));
    }
    Ok(DensityMatrix::new(out)?)
}

const KIND_PROJECTIVE: u8 = 0;
const KIND_BISTOCHASTIC: u8 = 1;
const KIND_GENERAL: u8 = 2;

/// Serializes as `u32 d, u32 k, u8 kind`, then each operator row-major as
/// little-endian f64 (re, im) pairs.
pub fn write_partition<W: Write>(p: &PartitionOfUnity, mut w: W) -> io::Result<()> {
    w.write_all(&(p.dim() as u32).to_le_bytes())?;
    w.write_all(&(p.len() as u32).to_le_bytes())?;
    let kind = match p.kind {
        PartitionKind::Projective => KIND_PROJECTIVE,
        PartitionKind::Bistochastic => KIND_BISTOCHASTIC,
        PartitionKind::General => KIND_GENERAL,
    };
    w.write_all(&[kind])?;
    for op in &p.ops {
        for r in 0..p.dim() {
            for c in 0..p.dim() {
                let z = op[(r, c)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

/// Reads the `write_partition` format and revalidates the family, so corrupt
/// or truncated data is rejected rather than trusted.
pub fn read_partition<R: Read>(mut r: R) -> Result<PartitionOfUnity, PartitionError> {
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let d = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let k = u32::from_le_bytes(u32buf) as usize;
    let mut kind_byte = [0u8; 1];
    r.read_exact(&mut kind_byte)?;
    let kind = match kind_byte[0] {
        KIND_PROJECTIVE => PartitionKind::Projective,
        KIND_BISTOCHASTIC => PartitionKind::Bistochastic,
        KIND_GENERAL => PartitionKind::General,
        other => {
            return Err(PartitionError::Malformed {
                reason: format!("unknown kind byte {other}"),
            })
        }
    };
    if d == 0 || k == 0 {
        return Err(PartitionError::Malformed {
            reason: format!("degenerate sizes d={d}, k={k}"),
        });
    }
    if d > 1 << 16 || k > 1 << 24 || d.saturating_mul(d).saturating_mul(k) > 1 << 28 {
        return Err(PartitionError::Malformed {
            reason: format!("implausible sizes d={d}, k={k}"),
        });
    }
    let mut f64buf = [0u8; 8];
    let mut ops = Vec::with_capacity(k);
    for _ in 0..k {
        let mut data = Vec::with_capacity(d * d);
        for _ in 0..d * d {
            r.read_exact(&mut f64buf)?;
            let re = f64::from_le_bytes(f64buf);
            r.read_exact(&mut f64buf)?;
            let im = f64::from_le_bytes(f64buf);
            data.push(C64::new(re, im));
        }
        ops.push(CMat::from_fn(d, d, |i, j| data[i * d + j]));
    }
    PartitionOfUnity::new(ops, kind)
}
