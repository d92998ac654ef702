//! Simulation of finite-dimensional quantum maps under repeated measurement.
//!
//! The crate models a measured quantum map: a unitary step `U` on `C^d`
//! interleaved with a partition of unity `X = {X_1, …, X_k}` acting as a
//! measurement channel `ρ ↦ Σ_j X_j ρ X_j†`. From those two ingredients it
//! computes
//!
//! * **partial entropies** `S_t`: the von Neumann entropy of the Gram matrix
//!   of all length-`t` operator words `U X_{i_t} ⋯ U X_{i_1}` under the
//!   normalized trace (see [`tracial_correlation`] / [`alf_partial_entropy`]),
//! * **decoherence entropies** `E_t`: the entropy produced by iterating the
//!   measured map on a pure state, averaged over random initial states
//!   ([`decoherence_entropy`], [`mean_decoherence_entropy`]),
//! * **spectral gap bounds** sandwiching `S(σ) − mean S(σ^α)` between
//!   Monte-Carlo norm estimates ([`entropy_gap_bounds`]),
//! * **free-independence diagnostics** comparing word Grams against the
//!   `δ_ij·k^{−t}` prediction for generic dynamics
//!   ([`free_independence_probe`]),
//! * a **classical baker-map oracle** for symbolic-dynamics entropy rates
//!   ([`classical_symbol_entropy`]), and
//! * **torus quantization** utilities: the quantum baker map, momentum
//!   partitions, coherent states, and Husimi phase-space grids.
//!
//! Everything is deterministic given a [`Seed`]: ensemble averages use
//! per-sample child seeds, so serial and parallel runs produce identical
//! bits.

mod classical;
mod eig;
mod entropy;
mod mat;
mod partition;
mod sampling;
mod torus;

pub use num_complex::Complex64 as C64;

pub use classical::{
    classical_baker_inverse, classical_baker_step, classical_symbol_entropy, PhasePoint,
};
pub use entropy::{
    alf_partial_entropy, decoherence_entropy, entropy_gap_bounds, free_independence_probe,
    mean_decoherence_entropy, omega_state, partial_trace_left, partial_trace_right,
    production_rates, purification, state_correlation, tracial_correlation, BoundsReport,
    CorrelationMatrix, EntropyError, EntropyTrace, PathBudget, ProbeReport,
};
pub use mat::{
    hermitian_eigen, hermitian_spectrum, hs_norm, trace_norm, von_neumann_entropy, CMat,
    DensityMatrix, MatError, Spectrum,
};
pub use partition::{
    apply_channel, measured_refinement, measured_step, momentum_partition, read_partition,
    refine, rotate_partition, write_partition, PartitionError, PartitionKind, PartitionOfUnity,
};
pub use sampling::{haar_unitary, random_pure_state, Seed};
pub use torus::{
    baker_unitary, coherent_state, dft_matrix, husimi_of_operator, quantize_observable,
    translation_operators, CoherentStateParams, HusimiGrid, TorusError, TorusQuantization,
};
