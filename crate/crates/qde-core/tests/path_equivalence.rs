//! Cross-checks between the three routes to the same spectra:
//!   1. Gram matrices of operator words (tracial / initial-state flavors),
//!   2. channel iteration on the doubled space (purified reference state),
//!   3. channel iteration on the system state alone.
//!
//! Plus brute-force oracles that enumerate the words explicitly, so the
//! recursion tree in the library is checked against flat enumeration.

use num_complex::Complex64 as C;
use qde_core::{
    alf_partial_entropy, baker_unitary, decoherence_entropy, hermitian_spectrum, momentum_partition,
    omega_state, partial_trace_left, partial_trace_right, purification, state_correlation,
    tracial_correlation, CMat, PathBudget, PartitionOfUnity, Seed, TorusQuantization,
};

const GRAM_CAP: usize = 4096;

fn basis_state(d: usize, j: usize) -> CMat {
    let mut v = CMat::zeros(d, 1);
    v[(j, 0)] = C::new(1.0, 0.0);
    v
}

/// Flat enumeration of the length-t operator words U·X_{i_t}···U·X_{i_1},
/// index i = Σ_s i_s·k^{s−1} (first symbol least significant).
fn words_by_enumeration(p: &PartitionOfUnity, u: &CMat, t: usize) -> Vec<CMat> {
    let k = p.len();
    let d = p.dim();
    let total = k.pow(t as u32);
    let mut out = Vec::with_capacity(total);
    for i in 0..total {
        let mut m = CMat::identity(d);
        let mut rest = i;
        for _ in 0..t {
            let sym = rest % k;
            rest /= k;
            m = u.mul(p.op(sym)).mul(&m);
        }
        out.push(m);
    }
    out
}

fn nonzero_spectrum(values: &[f64]) -> Vec<f64> {
    values.iter().copied().filter(|l| l.abs() > 1e-10).collect()
}

#[test]
fn tracial_gram_matches_flat_word_enumeration() {
    let tq = TorusQuantization::new(4);
    let u = baker_unitary(&tq).unwrap();
    let p = momentum_partition(4, 2).unwrap();
    for t in 1..=3 {
        let sigma = tracial_correlation(&p, &u, t, GRAM_CAP).unwrap();
        let words = words_by_enumeration(&p, &u, t);
        let n = words.len();
        for i in 0..n {
            for j in 0..n {
                // σ_{i;j} = tr(K_j† K_i)/d, entry by explicit trace loop.
                let prod = words[j].dagger().mul(&words[i]);
                let want = prod.trace() / 4.0;
                let got = sigma.mat()[(i, j)];
                assert!(
                    (got - want).norm() <= 1e-12,
                    "t={t} entry ({i},{j}): {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn two_step_identity_dynamics_gram_is_projector_diagonal() {
    // With u = 1 and a projective partition the only surviving words are the
    // constant symbol sequences: σ is diagonal with 1/k at i=(c,c,...).
    let p = momentum_partition(4, 2).unwrap();
    let sigma = tracial_correlation(&p, &CMat::identity(4), 2, GRAM_CAP).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j && (i % 2) == (i / 2) { 0.5 } else { 0.0 };
            let got = sigma.mat()[(i, j)];
            assert!(
                (got - C::new(want, 0.0)).norm() <= 1e-12,
                "({i},{j}): {got} vs {want}"
            );
        }
    }
}

/// Doubled-space oracle: iterate ρ ← Σ_j (W_j⊗1) ρ (W_j⊗1)† from the
/// maximally entangled projector, materializing the d²×d² Kraus matrices.
fn doubled_state_oracle(p: &PartitionOfUnity, u: &CMat, t: usize) -> CMat {
    let d = p.dim();
    let psi = purification(d);
    let mut rho = psi.mul(&psi.dagger());
    let lifted: Vec<CMat> = (0..p.len())
        .map(|j| u.mul(p.op(j)).kron(&CMat::identity(d)))
        .collect();
    for _ in 0..t {
        let mut next = CMat::zeros(d * d, d * d);
        for w in &lifted {
            let term = w.mul(&rho).mul(&w.dagger());
            for r in 0..d * d {
                for c in 0..d * d {
                    next[(r, c)] += term[(r, c)];
                }
            }
        }
        rho = next;
    }
    rho
}

#[test]
fn doubled_iteration_spectrum_matches_gram_spectrum() {
    for d in [4usize, 8] {
        let tq = TorusQuantization::new(d);
        let u = baker_unitary(&tq).unwrap();
        let p = momentum_partition(d, 2).unwrap();
        for t in 1..=3 {
            let sigma = tracial_correlation(&p, &u, t, GRAM_CAP).unwrap();
            let gram_spec = hermitian_spectrum(sigma.mat()).unwrap();
            let rho = doubled_state_oracle(&p, &u, t);
            let oracle_spec = hermitian_spectrum(&rho).unwrap();
            let a = nonzero_spectrum(gram_spec.values());
            let b = nonzero_spectrum(oracle_spec.values());
            assert_eq!(a.len(), b.len(), "d={d} t={t}: nonzero counts differ");
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-8, "d={d} t={t}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn omega_state_agrees_with_gram_both_directions() {
    // The library's own doubled-space path, cross-validated both ways.
    for d in [4usize, 8] {
        let tq = TorusQuantization::new(d);
        let u = baker_unitary(&tq).unwrap();
        let p = momentum_partition(d, 2).unwrap();
        for t in 1..=3 {
            let omega = omega_state(&p, &u, t, 16).unwrap();
            let from_channel = nonzero_spectrum(hermitian_spectrum(omega.mat()).unwrap().values());
            let sigma = tracial_correlation(&p, &u, t, GRAM_CAP).unwrap();
            let from_gram = nonzero_spectrum(hermitian_spectrum(sigma.mat()).unwrap().values());
            assert_eq!(from_channel.len(), from_gram.len(), "d={d} t={t}");
            for (x, y) in from_channel.iter().zip(&from_gram) {
                assert!((x - y).abs() <= 1e-8, "d={d} t={t}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn omega_state_at_t0_is_pure_and_reduces_to_tracial() {
    let p = momentum_partition(4, 2).unwrap();
    let omega = omega_state(&p, &CMat::identity(4), 0, 16).unwrap();
    assert!(omega.entropy().unwrap() <= 1e-9, "purification projector must be pure");
    // Both partial traces of |Ψ⟩⟨Ψ| are 1/d.
    let left = partial_trace_left(omega.mat(), 4, 4);
    let right = partial_trace_right(omega.mat(), 4, 4);
    for m in [left, right] {
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 0.25 } else { 0.0 };
                assert!((m[(i, j)] - C::new(want, 0.0)).norm() <= 1e-12);
            }
        }
    }
}

#[test]
fn trivial_partition_keeps_doubled_state_pure() {
    let p = PartitionOfUnity::identity(2);
    let u = qde_core::haar_unitary(2, Seed::new(99));
    for t in 0..4 {
        let omega = omega_state(&p, &u, t, 16).unwrap();
        assert!(omega.entropy().unwrap() <= 1e-9, "unitary channel must keep purity at t={t}");
    }
}

/// Two-copy oracle for the initial-state Gram path: the nonzero spectrum of
/// Σ_words (K⊗1)|α,ψ⟩⟨α,ψ|(K⊗1)† built by brute force must match the Gram of
/// the vectors K_i|α⟩.
#[test]
fn state_gram_matches_two_copy_density_oracle() {
    let d = 4;
    let tq = TorusQuantization::new(d);
    let u = baker_unitary(&tq).unwrap();
    let p = momentum_partition(d, 2).unwrap();
    let alpha = basis_state(d, 0);
    let t = 2;

    let sigma = state_correlation(&p, &u, t, &alpha, GRAM_CAP).unwrap();
    let gram_spec = nonzero_spectrum(hermitian_spectrum(sigma.mat()).unwrap().values());

    // Lift |α⟩ to |α⟩⊗|e₀⟩ on the doubled space; the second copy just tags
    // the state so the sum of (K⊗1)-conjugated projectors has the word Gram
    // as its nonzero spectrum.
    let mut lifted = CMat::zeros(d * d, 1);
    for m in 0..d {
        lifted[(m * d, 0)] = alpha[(m, 0)];
    }
    let proj = lifted.mul(&lifted.dagger());
    let words = words_by_enumeration(&p, &u, t);
    let mut rho = CMat::zeros(d * d, d * d);
    for w in &words {
        let wk = w.kron(&CMat::identity(d));
        let term = wk.mul(&proj).mul(&wk.dagger());
        for r in 0..d * d {
            for c in 0..d * d {
                rho[(r, c)] += term[(r, c)];
            }
        }
    }
    let oracle_spec = nonzero_spectrum(hermitian_spectrum(&rho).unwrap().values());

    assert_eq!(gram_spec.len(), oracle_spec.len());
    for (x, y) in gram_spec.iter().zip(&oracle_spec) {
        assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
    }
}

#[test]
fn channel_path_entropy_equals_state_gram_entropy() {
    // The measured-evolution entropy trace and the word-Gram entropy must be
    // the same number, not merely statistically close.
    for d in [4usize, 8, 16] {
        let tq = TorusQuantization::new(d);
        let u = baker_unitary(&tq).unwrap();
        let p = momentum_partition(d, 2).unwrap();
        let alpha = qde_core::random_pure_state(d, Seed::new(7 + d as u64));
        let t_max = 3;
        let trace = decoherence_entropy(&p, &u, t_max, &alpha).unwrap();
        for t in 1..=t_max {
            let sigma = state_correlation(&p, &u, t, &alpha, GRAM_CAP).unwrap();
            let gram_entropy = sigma.entropy().unwrap();
            let channel_entropy = trace.value_at(t).unwrap();
            assert!(
                (gram_entropy - channel_entropy).abs() <= 1e-8,
                "d={d} t={t}: gram {gram_entropy} vs channel {channel_entropy}"
            );
        }
    }
}

#[test]
fn alf_trace_crosses_over_to_doubled_path_consistently() {
    // Force the Gram cap below k^t so the tail of the trace must come from
    // the doubled-space path; the two segments must join seamlessly.
    let d = 8;
    let tq = TorusQuantization::new(d);
    let u = baker_unitary(&tq).unwrap();
    let p = momentum_partition(d, 2).unwrap();
    let full = alf_partial_entropy(&p, &u, 5, &PathBudget { gram_cap: 4096, omega_dim: 16 }).unwrap();
    let forced = alf_partial_entropy(&p, &u, 5, &PathBudget { gram_cap: 4, omega_dim: 16 }).unwrap();
    for t in 1..=5 {
        let a = full.value_at(t).unwrap();
        let b = forced.value_at(t).unwrap();
        assert!((a - b).abs() <= 1e-8, "t={t}: gram {a} vs doubled {b}");
    }
}
