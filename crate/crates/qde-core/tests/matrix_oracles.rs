//! Independent oracles for the dense linear-algebra kernels.
//!
//! The production eigensolver reduces to tridiagonal form and runs implicit
//! QL; the oracles here deliberately take different routes (characteristic
//! polynomial roots, bidiagonal SVD) so a shared bug cannot hide.

use num_complex::Complex64 as C;
use qde_core::{hermitian_eigen, hermitian_spectrum, hs_norm, trace_norm, CMat, MatError, Seed};

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}

/// Characteristic polynomial coefficients by the Faddeev–LeVerrier recursion.
/// Returns c so that p(x) = x^n + c[0] x^(n-1) + ... + c[n-1].
fn char_poly(m: &CMat) -> Vec<C> {
    let n = m.rows();
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = m.clone();
    for k in 1..=n {
        let ck = -mk.trace() / (k as f64);
        coeffs.push(ck);
        if k < n {
            let mut shifted = mk.clone();
            for i in 0..n {
                shifted[(i, i)] += ck;
            }
            mk = m.mul(&shifted);
        }
    }
    coeffs
}

fn poly_eval(coeffs: &[C], x: C) -> C {
    let mut acc = C::new(1.0, 0.0);
    for c in coeffs {
        acc = acc * x + c;
    }
    acc
}

/// All roots of a monic polynomial by Durand–Kerner simultaneous iteration.
fn poly_roots(coeffs: &[C]) -> Vec<C> {
    let n = coeffs.len();
    let seed = C::new(0.4, 0.9);
    let mut z: Vec<C> = (0..n).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..2000 {
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let delta = poly_eval(coeffs, z[i]) / denom;
            z[i] -= delta;
            worst = worst.max(delta.norm());
        }
        if worst < 1e-14 {
            break;
        }
    }
    z
}

fn seeded_hermitian(n: usize, seed: u64) -> CMat {
    // Entries from a splitmix-style generator: good enough spread for an
    // oracle input, and reproducible without pulling the RNG stack in.
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = state;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = C::new(next(), next());
        }
    }
    // Hermitize: (G + G†)/2.
    let g = m.dagger();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = (m[(i, j)] + g[(i, j)]) * 0.5;
        }
    }
    m
}

#[test]
fn spectrum_matches_char_poly_roots_8x8() {
    let m = seeded_hermitian(8, 20260815);
    let spec = hermitian_spectrum(&m).unwrap();

    let coeffs = char_poly(&m);
    let mut roots: Vec<f64> = poly_roots(&coeffs)
        .into_iter()
        .map(|z| {
            assert!(z.im.abs() < 1e-9, "Hermitian char-poly root drifted complex: {z}");
            z.re
        })
        .collect();
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());

    assert_eq!(spec.values().len(), 8);
    for (lambda, root) in spec.values().iter().zip(&roots) {
        assert_close(*lambda, *root, 1e-8, "eigenvalue vs char-poly root");
    }
}

#[test]
fn spectrum_of_diagonal_is_sorted_input() {
    let m = CMat::diag(&[C::new(3.0, 0.0), C::new(1.0, 0.0), C::new(2.0, 0.0)]);
    let spec = hermitian_spectrum(&m).unwrap();
    assert_eq!(spec.values(), &[3.0, 2.0, 1.0]);
}

#[test]
fn spectrum_of_pauli_x_is_plus_minus_one() {
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C::new(1.0, 0.0);
    m[(1, 0)] = C::new(1.0, 0.0);
    let spec = hermitian_spectrum(&m).unwrap();
    assert_close(spec.values()[0], 1.0, 1e-14, "pauli-x top");
    assert_close(spec.values()[1], -1.0, 1e-14, "pauli-x bottom");
}

#[test]
fn eigen_reconstruction_residual_is_tiny() {
    for (n, seed) in [(8usize, 1u64), (32, 2), (96, 3)] {
        let m = seeded_hermitian(n, seed);
        let (spec, q) = hermitian_eigen(&m).unwrap();
        // residual ‖M − QΛQ†‖₂ ≤ 1e−9·‖M‖₂
        let mut recon = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C::new(0.0, 0.0);
                for (s, lambda) in spec.values().iter().enumerate() {
                    acc += q[(i, s)] * lambda * q[(j, s)].conj();
                }
                recon[(i, j)] = acc;
            }
        }
        let mut diff = m.clone();
        for i in 0..n {
            for j in 0..n {
                diff[(i, j)] -= recon[(i, j)];
            }
        }
        let rel = hs_norm(&diff) / hs_norm(&m);
        assert!(rel <= 1e-9, "n={n}: reconstruction residual {rel}");
    }
}

#[test]
fn eigenvalue_sum_matches_trace() {
    let m = seeded_hermitian(24, 77);
    let spec = hermitian_spectrum(&m).unwrap();
    let sum: f64 = spec.values().iter().sum();
    assert!(
        (sum - m.trace().re).abs() <= 1e-9 * hs_norm(&m).max(1.0),
        "trace identity violated: {sum} vs {}",
        m.trace().re
    );
}

#[test]
fn spectrum_rejects_non_square_and_non_hermitian() {
    let rect = CMat::zeros(2, 3);
    assert!(matches!(hermitian_spectrum(&rect), Err(MatError::NotSquare { .. })));

    let mut skew = CMat::zeros(2, 2);
    skew[(0, 1)] = C::new(1.0, 0.0);
    skew[(1, 0)] = C::new(0.5, 0.0); // deviation 0.5 ≫ 1e−8
    assert!(matches!(hermitian_spectrum(&skew), Err(MatError::NotHermitian { .. })));
}

// ---------------------------------------------------------------------------
// Trace-norm oracle: SVD by bidiagonalization.
// ---------------------------------------------------------------------------

/// Singular values of a square complex matrix: Householder bidiagonalization
/// followed by Demmel–Kahan zero-shift QR sweeps on the real bidiagonal.
// Householder updates use offset indices (v[i - k]); ranges stay explicit.
#[allow(clippy::needless_range_loop)]
fn singular_values_bidiag(a: &CMat) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<C>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)]).collect())
        .collect();

    // Left reflector on column k (rows k..), then right reflector on row k
    // (cols k+1..): classic Golub–Kahan sweep.
    for k in 0..n {
        // -- left: zero m[k+1..][k]
        let norm2: f64 = (k..n).map(|i| m[i][k].norm_sqr()).sum();
        if norm2 > 0.0 {
            let alpha = m[k][k];
            let sigma = norm2.sqrt();
            let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { C::new(1.0, 0.0) };
            let mut v: Vec<C> = (k..n).map(|i| m[i][k]).collect();
            v[0] += phase * sigma;
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vnorm2 > 0.0 {
                let beta = 2.0 / vnorm2;
                for col in k..n {
                    let dot: C = (k..n).map(|i| v[i - k].conj() * m[i][col]).sum();
                    let f = beta * dot;
                    for i in k..n {
                        let vi = v[i - k];
                        m[i][col] -= f * vi;
                    }
                }
            }
        }
        // -- right: zero m[k][k+2..]
        if k + 2 <= n.saturating_sub(1) {
            let norm2: f64 = (k + 1..n).map(|j| m[k][j].norm_sqr()).sum();
            if norm2 > 0.0 {
                let alpha = m[k][k + 1];
                let sigma = norm2.sqrt();
                let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { C::new(1.0, 0.0) };
                let mut v: Vec<C> = (k + 1..n).map(|j| m[k][j].conj()).collect();
                v[0] += phase.conj() * sigma;
                let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                if vnorm2 > 0.0 {
                    let beta = 2.0 / vnorm2;
                    for row in k..n {
                        let dot: C = (k + 1..n).map(|j| m[row][j] * v[j - k - 1]).sum();
                        let f = beta * dot;
                        for j in k + 1..n {
                            m[row][j] -= f * v[j - k - 1].conj();
                        }
                    }
                }
            }
        }
    }

    // A bidiagonal matrix is diagonally unitarily equivalent to the one with
    // entry moduli (pick row/column phases greedily left to right), so the
    // singular values only see |d_k| and |e_k|.
    let mut d: Vec<f64> = (0..n).map(|k| m[k][k].norm()).collect();
    let mut e: Vec<f64> = (0..n.saturating_sub(1)).map(|k| m[k][k + 1].norm()).collect();

    // Demmel–Kahan zero-shift QR until off-diagonals vanish.
    fn rot(f: f64, g: f64) -> (f64, f64, f64) {
        if g == 0.0 {
            (1.0, 0.0, f)
        } else if f == 0.0 {
            (0.0, 1.0, g)
        } else {
            let r = f.hypot(g);
            (f / r, g / r, r)
        }
    }
    let scale = d.iter().chain(e.iter()).fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
    for _sweep in 0..20_000 {
        let maxe = e.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if maxe <= 1e-15 * scale {
            break;
        }
        let (mut c, mut oldc) = (1.0f64, 1.0f64);
        let mut s;
        let mut olds = 0.0f64;
        for i in 0..n - 1 {
            let (c2, s2, r) = rot(c * d[i], e[i]);
            c = c2;
            s = s2;
            if i != 0 {
                e[i - 1] = olds * r;
            }
            let (oc, os, dn) = rot(oldc * r, d[i + 1] * s);
            oldc = oc;
            olds = os;
            d[i] = dn;
        }
        let h = c * d[n - 1];
        e[n - 2] = h * olds;
        d[n - 1] = h * oldc;
    }
    let mut sv: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

fn seeded_general(n: usize, seed: u64) -> CMat {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = state;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    CMat::from_fn(n, n, |_, _| C::new(next(), next()))
}

#[test]
fn trace_norm_matches_bidiagonal_svd_6x6() {
    for seed in [5u64, 6, 7] {
        let a = seeded_general(6, seed);
        let sv = singular_values_bidiag(&a);
        let oracle: f64 = sv.iter().sum();
        let got = trace_norm(&a).unwrap();
        assert_close(got, oracle, 1e-8, "trace norm vs bidiagonal SVD");
    }
}

#[test]
fn trace_norm_trivial_cases() {
    assert_close(trace_norm(&CMat::identity(3)).unwrap(), 3.0, 1e-12, "identity");
    let m = CMat::diag(&[C::new(1.0, 0.0), C::new(-2.0, 0.0)]);
    assert_close(trace_norm(&m).unwrap(), 3.0, 1e-12, "diag(1,-2)");
    let rect = CMat::zeros(2, 3);
    assert!(matches!(trace_norm(&rect), Err(MatError::NotSquare { .. })));
}

#[test]
fn hs_norm_trivial_cases() {
    assert_close(hs_norm(&CMat::identity(4)), 2.0, 1e-14, "identity(4)");
    assert_close(hs_norm(&CMat::zeros(3, 3)), 0.0, 0.0, "zero");
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = C::new(3.0, 0.0);
    m[(0, 1)] = C::new(4.0, 0.0);
    assert_close(hs_norm(&m), 5.0, 1e-14, "pythagorean");
}

#[test]
fn norm_ordering_on_random_matrices() {
    for seed in 10..20u64 {
        let a = seeded_general(5, seed);
        let t = trace_norm(&a).unwrap();
        let h = hs_norm(&a);
        assert!(t >= h - 1e-12 && h >= 0.0, "norm ordering: tr {t} hs {h}");
    }
}

// Keep the Haar sampler honest on the one matrix everyone trusts by eye.
#[test]
fn seeded_haar_is_unitary_here_too() {
    let u = qde_core::haar_unitary(8, Seed::new(424242));
    let gram = u.dagger().mul(&u);
    let mut dev = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            let want = if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
            dev = dev.max((gram[(i, j)] - want).norm());
        }
    }
    assert!(dev <= 1e-12, "haar unitarity deviation {dev}");
}
