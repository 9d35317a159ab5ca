//! Numerical laboratory for orthonormal Strichartz estimates of fractional
//! Schrödinger flows `e^{it(-Δ)^{θ/2}}` on the torus `T^d` and on the
//! waveguide `R^n × T^m`.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`], [`field`] and [`spectral`]: discretized manifolds, unitary
//!   Fourier transforms, fractional symbols, propagators and frequency
//!   projectors.
//! * [`kernels`] and [`quadrature`]: the exponential-sum kernel `K_N(t, x)`,
//!   its dispersive envelope and oscillatory-integral oracles.
//! * [`norms`], [`admissibility`] and [`fit`]: mixed Lebesgue norms, Besov
//!   norms, admissible-pair bookkeeping, derivative-loss predictions and
//!   log-log slope fits.
//! * [`schatten`]: singular values, Schatten and Sobolev–Schatten norms, the
//!   discrete Fourier extension operator and the duality check.
//! * [`ons`]: orthonormal systems, coefficient sequences and the density
//!   experiments.
//! * [`hartree`]: finite-rank Hartree dynamics by split-step and by Duhamel
//!   fixed-point iteration.
//!
//! All public operations are pure; values are immutable after construction
//! and may be shared across threads.

// parameter guards are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod hartree;
pub mod kernels;
pub mod norms;
pub mod ons;
pub mod quadrature;
pub mod schatten;
pub mod seed;
pub mod spectral;
mod util;

pub use admissibility::{
    classify_pair, predict_sigma, AdmissibleKind, AdmissiblePair, AlphaBound, Estimate,
    Manifold, PairRegion, SigmaOutcome, SigmaPrediction, SigmaSetting,
};
pub use error::{Error, Result};
pub use field::{Field, SpaceTimeField, SpectrumField, TimeGrid};
pub use fit::{fit_scaling, ScalingFit};
pub use geometry::{eta1, FrequencyLattice, Geometry, GeometryKind, GeometrySpec};
pub use kernels::{
    dispersive_sup, dispersive_sup_checked, kernel_exp_sum, waveguide_kernel, DispersiveReport,
    KernelQuery,
};
pub use norms::{besov_sup_norm, mixed_norm};
pub use num_complex::Complex64;
pub use quadrature::{vdc_integral_oracle, VdcResult};
pub use seed::derive_cell_seed;
pub use spectral::{
    forward_transform, fractional_symbol, inverse_transform, littlewood_paley, project_leq,
    propagate,
};
pub use hartree::{
    evolve, hartree_energy, split_step, DensityState, PotentialKind, PotentialSpec,
    TrajectoryRecord,
};
pub use ons::{generate_ons, lambda_family, LambdaKind, LambdaSequence, OnsKind, OrthonormalFamily};
pub use schatten::{duality_check, schatten_norm, sobolev_schatten_norm, DualityReport};
pub use util::next_pow2;
