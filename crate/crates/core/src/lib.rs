//! Prolate spheroidal mode optics for a diffraction-limited 1-D imaging system.
//!
//! A coherent imaging system with a hard pupil acts on one transverse
//! dimension as a finite Fourier transform: an object of half-width 1 (in
//! dimensionless units) is observed through a band limit `c`, the
//! space-bandwidth product. The natural mode set of such a system is the
//! prolate spheroidal wave functions ψ_k, the eigenfunctions of the sinc
//! kernel on the object core, with transmission eigenvalues λ_k that stay
//! close to 1 for roughly the first S = 2c/π modes (the Shannon number) and
//! then plunge super-exponentially.
//!
//! This crate builds that basis numerically ([`pswf`]), implements the
//! plane-to-plane field algebra of the illumination path ([`modes`]), models a
//! traveling-wave parametric amplifier as a Gaussian transformation of the
//! plane-wave modes and propagates its quadrature statistics into the prolate
//! basis ([`squeeze`]), evaluates the mode-budget conditions under which a
//! squeezed source can illuminate all transmitted modes ([`budget`]), and
//! draws seeded Monte-Carlo homodyne samples from the resulting Gaussian state
//! ([`homodyne`]). The [`verify`] module bundles the library's invariants into
//! a reportable check suite.
//!
//! Everything is pure, deterministic, double-precision numerics; heavy loops
//! parallelize through rayon and respect the ambient thread-pool size.

pub mod budget;
pub mod error;
pub mod homodyne;
pub mod modes;
pub mod pswf;
pub mod quad;
pub mod serialize;
pub mod squeeze;
pub mod verify;

pub use budget::{
    budget, budget_with_threshold, coherence_bound, effective_band, shannon_number, BudgetReport,
    EffectiveBand, ImagingConfig, Verdict,
};
pub use error::Error;
pub use homodyne::{
    aligned_displacement, empirical_covariance, homodyne_extract, sample, EmpiricalCovariance,
    ExtractedAmplitudes, Parity, QuadratureIndex, SampleBatch,
};
pub use modes::{
    apply_diaphragm, lens_transform, object_amplitudes, project_core_wings, psi_amplitudes,
    sample_mode, synthesize_object_field, transform_mode, DiaphragmSpec, ModeCoefficients,
    ModeKind, Plane, PlaneField,
};
pub use pswf::{BandParameter, ModeFunction, ProlateBasis};
pub use squeeze::{
    full_covariance, mode_variances, solve_uv, squeezing_report, ModeCovariance, ModeSqueezing,
    SqueezingProfile, UVCoefficients,
};
pub use verify::{run_all, CheckReport, CHECK_IDS};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, error::Error>;
