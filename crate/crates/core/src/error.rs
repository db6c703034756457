//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while building bases, transforming fields,
/// assembling covariances, or sampling.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scalar parameter (non-positive band, bad mode count, ...).
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// The Nyström eigenvalues did not settle between quadrature orders M and
    /// 2M; both spectra are carried for diagnosis.
    #[error(
        "prolate eigenvalues did not converge between quadrature orders {m} and {m2}: \
         max shift {max_shift:.3e} exceeds {tol:.1e}"
    )]
    EigenvalueConvergence {
        m: usize,
        m2: usize,
        max_shift: f64,
        tol: f64,
        spectrum_m: Vec<f64>,
        spectrum_m2: Vec<f64>,
    },

    /// More modes requested than are numerically resolvable at this band.
    #[error(
        "requested {requested} modes but only {resolvable} have eigenvalues above \
         the {floor:.0e} floor at c = {c}; retry with K <= {resolvable}"
    )]
    UnresolvableModes {
        requested: usize,
        resolvable: usize,
        floor: f64,
        c: f64,
    },

    /// Mode evaluation requested outside the oscillatory-quadrature validity
    /// range of the stored rule.
    #[error(
        "|s| = {s_abs:.3e} exceeds the evaluation validity bound {bound:.3e} \
         for quadrature order M = {m}; rebuild the basis with a larger M"
    )]
    EvalOutOfRange { s_abs: f64, bound: f64, m: usize },

    /// A gridded field carries too much energy at the grid boundary for the
    /// requested transform to be trustworthy.
    #[error(
        "field energy fraction {boundary_energy:.3e} in the outermost grid cells \
         exceeds {tol:.0e}; enlarge the grid extent L"
    )]
    BoundaryTruncation { boundary_energy: f64, tol: f64 },

    /// The grid extent is too small to capture the slowly decaying wings of
    /// the listed modes.
    #[error(
        "grid extent L = {extent} captures less than {threshold}% of the wings \
         energy for modes {affected:?}; enlarge L"
    )]
    WingsExtent {
        extent: f64,
        threshold: f64,
        affected: Vec<usize>,
    },

    /// Squeezing profile violates the even-symmetry requirement.
    #[error("squeezing profile is not even in q: {message}")]
    AsymmetricProfile { message: String },

    /// Explicit quadrature window too small for this profile.
    #[error(
        "quadrature window Q = {q_given} cannot capture the squeezing profile \
         (needs support up to |q| ~ {q_needed:.3}); suggested Q = {q_suggested:.3}"
    )]
    QuadratureWindow {
        q_given: f64,
        q_needed: f64,
        q_suggested: f64,
    },

    /// Assembled covariance failed the positive-definiteness check.
    #[error(
        "covariance assembly produced a non-positive-definite matrix \
         (most negative eigenvalue {min_eigenvalue:.3e})"
    )]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// Cholesky factorization failed while sampling.
    #[error("covariance factorization failed at leading minor {minor}")]
    Factorization { minor: usize },

    /// Malformed or inconsistent serialized document.
    #[error("serialization: {0}")]
    Serialization(String),

    /// Underlying I/O failure.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Shorthand used by constructors validating their inputs.
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }
}
