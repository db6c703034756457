//! Gaussian-state model of a traveling-wave optical parametric amplifier
//! (OPA) and the quadrature statistics it induces on the prolate mode
//! amplitudes.
//!
//! The OPA acts on the spatial-frequency amplitudes of the field as a
//! Bogoliubov transformation,
//!
//! ```text
//!     c̃(q) = U(q) c̃_in(q) + V(q) c̃_in†(−q),
//! ```
//!
//! with |U|² − |V|² = 1 preserving the commutators. In the standard
//! parametrization of multimode squeezing (Kolobov, Rev. Mod. Phys. 71, 1539
//! (1999)) the kernel is described by a squeeze magnitude r(q), the phase
//! θ(q) of the amplified quadrature, and the input-quadrature phase φ(q),
//! tied to U and V through the pair of linear relations
//!
//! ```text
//!     U(q) ± V*(−q) = e^{−iφ(q)} [ e^{±r(q)} cos θ(q) + i e^{∓r(q)} sin θ(q) ].
//! ```
//!
//! All three functions are even in q for a phase-matched degenerate OPA; the
//! evenness is what closes the two relations into a solvable 2×2 system (see
//! [`solve_uv`]).
//!
//! Feeding the squeezed output through the illumination optics projects it
//! onto the prolate modes. The mode amplitudes are
//!
//! ```text
//!     A_k = (1/√(2πc)) ∫ dq ψ_k(q/c) [ U(q) c̃_in(q) + V(q) c̃_in†(−q) ],
//! ```
//!
//! and for a vacuum OPA input every second moment of the quadrature vector
//! (A_{1,0}, A_{2,0}, …) reduces, after the delta contractions, to integrals
//! of ψ_j(q/c) ψ_k(q/c) against three real moments of the kernel:
//!
//! ```text
//!     a(q) = |U|² + |V|²          (= cosh 2r),
//!     b(q) = 2 Re[U(q) V(−q)]     (= sinh 2r · cos 2θ),
//!     d(q) = 2 Im[U(q) V(−q)]     (= sinh 2r · sin 2θ),
//! ```
//!
//! with the block structure (same-parity j, k only; σ = (−1)^k)
//!
//! ```text
//!     Cov(A_{1j}, A_{1k}) = ¼ (J[a] + σ J[b]),
//!     Cov(A_{2j}, A_{2k}) = ¼ (J[a] − σ J[b]),
//!     Cov(A_{1j}, A_{2k}) = ¼ σ J[d],        J[g] = (1/c) ∫ dq ψ_j ψ_k g.
//! ```
//!
//! Opposite-parity pairs decouple exactly (their integrands are odd). The
//! vacuum normalization ⟨c̃_in(q) c̃_in†(q′)⟩ = 2π δ(q − q′) is pinned by
//! requiring the vacuum variance 1/4 per quadrature, the shot-noise level of
//! this Fourier convention. φ(q) cancels from a, b and d — for vacuum input
//! the input-quadrature phase is physically irrelevant, and the covariance
//! assembly never consumes it (a property the tests pin down).
//!
//! Quadrature strategy: the prolate wings decay only like 1/|x|, so a naive
//! finite window would truncate percent-level ψ² mass. Every profile family
//! settles beyond some frequency — the moments become constants there — and
//! orthonormality gives the settled part of J[g] exactly:
//!
//! ```text
//!     J[g] = g_∞ δ_jk + (1/c) ∫_{|q| ≤ Q} dq ψ_j ψ_k (g − g_∞),
//! ```
//!
//! leaving a compactly supported correction handled by adaptive panels. The
//! window truncation error is then bounded by the residual squeeze magnitude
//! beyond Q and is held below 1e−8; profiles whose moments never settle
//! (an unbounded squeezing band with dispersive phase) are refused rather
//! than integrated badly.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::Error;
use crate::pswf::{BandParameter, ProlateBasis};
use crate::quad;
use crate::serialize::{fmt17, fmt17_array, fmt17_matrix};
use crate::Result;

/// Largest admissible squeeze magnitude. Beyond r = 12 the anti-squeezed
/// variance e^{2r}/4 exceeds 6e9 shot-noise units and double-precision
/// statistics on the squeezed partner lose all meaning.
pub const R_MAX: f64 = 12.0;

/// Absolute tolerance for each covariance correction integral.
const QUAD_TOL: f64 = 1e-9;

/// Admissible bound on the neglected moment tail beyond the quadrature
/// window (in variance units, i.e. relative to the shot-noise 1/4).
const TRUNCATION_TOL: f64 = 1e-8;

/// Residual squeeze magnitude the window of a decaying profile is extended
/// down to; e^{2r} − 1 ≈ 1e−12 there, negligible against `TRUNCATION_TOL`.
const TAIL_RESIDUAL_TARGET: f64 = 5e-13;

/// Pointwise evenness tolerance enforced by [`solve_uv`] on profile values.
const SYMMETRY_TOL: f64 = 1e-9;

/// Construction-time symmetry tolerance for tabulated profiles.
const TABLE_SYMMETRY_TOL: f64 = 1e-12;

/// A quadrature is reported squeezed when its variance sits below
/// 1/4 − `SQUEEZED_TOL`.
const SQUEEZED_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// squeezing profiles
// ---------------------------------------------------------------------------

/// The (r, θ, φ) description of an OPA squeezing kernel over spatial
/// frequency q.
///
/// All three functions must be even in q; the constructors validate what can
/// be validated up front and [`solve_uv`] re-checks evenness pointwise, so a
/// hand-assembled asymmetric table fails loudly instead of producing an
/// under-determined V(q).
///
/// The parametric families carry the quadratic dispersion model
/// θ(q) = θ₀ + β q² — the lowest-order even phase a stretch of free space or
/// crystal adds — with β = 0 describing dispersion-compensated operation.
/// φ(q) = φ₀ is kept constant; it never influences vacuum-input statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum SqueezingProfile {
    /// r(q) = r₀ on |q| ≤ q_c and zero outside. `q_c = ∞` is allowed and
    /// models the idealized frequency-flat squeezer.
    ConstantBand {
        r0: f64,
        q_c: f64,
        theta0: f64,
        beta: f64,
        phi0: f64,
    },
    /// r(q) = r₀ · exp(−q²/(2 q_c²)), the usual phase-matching roll-off.
    Gaussian {
        r0: f64,
        q_c: f64,
        theta0: f64,
        beta: f64,
        phi0: f64,
    },
    /// Piecewise-linear interpolation of (r, θ, φ) on a shared, symmetric,
    /// strictly increasing grid. Outside the tabulated range the profile is
    /// vacuum: r = 0 exactly (θ and φ are irrelevant there and read as 0).
    Tabulated {
        q: Vec<f64>,
        r: Vec<f64>,
        theta: Vec<f64>,
        phi: Vec<f64>,
    },
}

/// How the squeezing moments behave beyond every finite window — this is
/// what decides whether the settled-tail split is exact, merely bounded, or
/// impossible.
enum TailBehavior {
    /// r vanishes identically beyond this |q| (finite band, tabulated range).
    VacuumBeyond(f64),
    /// r decays smoothly; beyond the quoted |q| it stays below `residual`.
    SmallBeyond { q: f64, residual: f64 },
    /// r and θ take the same value at every q; the moments are global
    /// constants and no correction integral is needed at all.
    Constant,
    /// r never decays while θ keeps dispersing — the moments oscillate
    /// forever and no finite window meets the truncation requirement.
    NonDecaying,
}

impl SqueezingProfile {
    /// Frequency-flat squeezing of magnitude `r0` with amplified-quadrature
    /// phase θ₀ on an unbounded band.
    pub fn constant_band(r0: f64, q_c: f64, theta0: f64, beta: f64, phi0: f64) -> Result<Self> {
        let profile = SqueezingProfile::ConstantBand {
            r0,
            q_c,
            theta0,
            beta,
            phi0,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Gaussian phase-matching roll-off of 1/√e-width q_c.
    pub fn gaussian(r0: f64, q_c: f64, theta0: f64, beta: f64, phi0: f64) -> Result<Self> {
        let profile = SqueezingProfile::Gaussian {
            r0,
            q_c,
            theta0,
            beta,
            phi0,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Tabulated profile; the grid must be finite, strictly increasing and
    /// even-symmetric together with all three value rows.
    pub fn tabulated(q: Vec<f64>, r: Vec<f64>, theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let profile = SqueezingProfile::Tabulated { q, r, theta, phi };
        profile.validate()?;
        Ok(profile)
    }

    /// The unsqueezed OPA (r ≡ 0): pure vacuum at the output.
    pub fn vacuum() -> Self {
        SqueezingProfile::ConstantBand {
            r0: 0.0,
            q_c: f64::INFINITY,
            theta0: 0.0,
            beta: 0.0,
            phi0: 0.0,
        }
    }

    /// Squeeze magnitude r(q) ≥ 0.
    pub fn r(&self, q: f64) -> f64 {
        match self {
            SqueezingProfile::ConstantBand { r0, q_c, .. } => {
                if q.abs() <= *q_c {
                    *r0
                } else {
                    0.0
                }
            }
            SqueezingProfile::Gaussian { r0, q_c, .. } => {
                r0 * (-(q * q) / (2.0 * q_c * q_c)).exp()
            }
            SqueezingProfile::Tabulated { q: grid, r, .. } => interp_table(grid, r, q),
        }
    }

    /// Phase θ(q) of the amplified (stretched) quadrature.
    pub fn theta(&self, q: f64) -> f64 {
        match self {
            SqueezingProfile::ConstantBand { theta0, beta, .. }
            | SqueezingProfile::Gaussian { theta0, beta, .. } => theta0 + beta * q * q,
            SqueezingProfile::Tabulated { q: grid, theta, .. } => interp_table(grid, theta, q),
        }
    }

    /// Input-quadrature phase φ(q); physically inert for vacuum input.
    pub fn phi(&self, q: f64) -> f64 {
        match self {
            SqueezingProfile::ConstantBand { phi0, .. }
            | SqueezingProfile::Gaussian { phi0, .. } => *phi0,
            SqueezingProfile::Tabulated { q: grid, phi, .. } => interp_table(grid, phi, q),
        }
    }

    /// Re-run the constructor checks. Useful after building a variant
    /// directly or deserializing one.
    pub fn validate(&self) -> Result<()> {
        match self {
            SqueezingProfile::ConstantBand {
                r0,
                q_c,
                theta0,
                beta,
                phi0,
            } => {
                validate_magnitude("r0", *r0)?;
                if q_c.is_nan() || *q_c <= 0.0 {
                    return Err(Error::invalid(
                        "q_c",
                        format!("got {q_c}, need q_c > 0 (infinite is allowed)"),
                    ));
                }
                validate_finite("theta0", *theta0)?;
                validate_finite("beta", *beta)?;
                validate_finite("phi0", *phi0)
            }
            SqueezingProfile::Gaussian {
                r0,
                q_c,
                theta0,
                beta,
                phi0,
            } => {
                validate_magnitude("r0", *r0)?;
                if !q_c.is_finite() || *q_c <= 0.0 {
                    return Err(Error::invalid(
                        "q_c",
                        format!("got {q_c}, need a finite q_c > 0"),
                    ));
                }
                validate_finite("theta0", *theta0)?;
                validate_finite("beta", *beta)?;
                validate_finite("phi0", *phi0)
            }
            SqueezingProfile::Tabulated { q, r, theta, phi } => {
                let n = q.len();
                if n < 2 || r.len() != n || theta.len() != n || phi.len() != n {
                    return Err(Error::invalid(
                        "table",
                        format!(
                            "need at least 2 rows with equal lengths; got q/r/theta/phi = \
                             {}/{}/{}/{}",
                            n,
                            r.len(),
                            theta.len(),
                            phi.len()
                        ),
                    ));
                }
                for i in 0..n {
                    if !q[i].is_finite() {
                        return Err(Error::invalid("table", format!("q[{i}] is not finite")));
                    }
                    if i > 0 && q[i] <= q[i - 1] {
                        return Err(Error::invalid(
                            "table",
                            format!("grid must increase strictly; violated at index {i}"),
                        ));
                    }
                    validate_magnitude("r", r[i])?;
                    validate_finite("theta", theta[i])?;
                    validate_finite("phi", phi[i])?;
                }
                // even symmetry: the grid must mirror onto itself and every
                // value row must match across the mirror
                for i in 0..n {
                    let j = n - 1 - i;
                    let grid_tol = TABLE_SYMMETRY_TOL * q[i].abs().max(1.0);
                    if (q[i] + q[j]).abs() > grid_tol {
                        return Err(Error::AsymmetricProfile {
                            message: format!(
                                "grid point q[{i}] = {} has no mirror partner (q[{j}] = {})",
                                q[i], q[j]
                            ),
                        });
                    }
                    for (name, row) in [("r", r), ("theta", theta), ("phi", phi)] {
                        let tol = TABLE_SYMMETRY_TOL * row[i].abs().max(1.0);
                        if (row[i] - row[j]).abs() > tol {
                            return Err(Error::AsymmetricProfile {
                                message: format!(
                                    "{name}({}) = {} but {name}({}) = {}",
                                    q[i], row[i], q[j], row[j]
                                ),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Tail classification used by the quadrature planner.
    fn tail(&self) -> TailBehavior {
        match self {
            SqueezingProfile::ConstantBand { r0, q_c, beta, .. } => {
                if *r0 == 0.0 {
                    TailBehavior::Constant
                } else if q_c.is_finite() {
                    TailBehavior::VacuumBeyond(*q_c)
                } else if *beta == 0.0 {
                    TailBehavior::Constant
                } else {
                    TailBehavior::NonDecaying
                }
            }
            SqueezingProfile::Gaussian { r0, q_c, .. } => {
                if *r0 == 0.0 {
                    TailBehavior::Constant
                } else if *r0 <= TAIL_RESIDUAL_TARGET {
                    TailBehavior::SmallBeyond {
                        q: 0.0,
                        residual: *r0,
                    }
                } else {
                    // r(q) drops to the residual target at
                    // q = q_c √(2 ln(r0/target))
                    TailBehavior::SmallBeyond {
                        q: q_c * (2.0 * (r0 / TAIL_RESIDUAL_TARGET).ln()).sqrt(),
                        residual: TAIL_RESIDUAL_TARGET,
                    }
                }
            }
            SqueezingProfile::Tabulated { q, .. } => {
                TailBehavior::VacuumBeyond(*q.last().expect("validated table is non-empty"))
            }
        }
    }

    /// Positive frequencies where the moments may kink or jump: the band
    /// edge of a constant-band profile, every node and the outer edge of a
    /// tabulated one. The adaptive panels are split there.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            SqueezingProfile::ConstantBand { r0, q_c, .. } if *r0 != 0.0 && q_c.is_finite() => {
                vec![*q_c]
            }
            SqueezingProfile::Tabulated { q, .. } => {
                q.iter().copied().filter(|&x| x > 0.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// JSON rendering with full-precision reals; an unbounded q_c is written
    /// as `null` (JSON has no infinity literal).
    pub fn to_json(&self) -> String {
        let band = |q_c: f64| {
            if q_c.is_finite() {
                fmt17(q_c)
            } else {
                "null".to_string()
            }
        };
        match self {
            SqueezingProfile::ConstantBand {
                r0,
                q_c,
                theta0,
                beta,
                phi0,
            } => format!(
                "{{\"family\":\"constant_band\",\"r0\":{},\"q_c\":{},\"theta0\":{},\
                 \"beta\":{},\"phi0\":{}}}",
                fmt17(*r0),
                band(*q_c),
                fmt17(*theta0),
                fmt17(*beta),
                fmt17(*phi0)
            ),
            SqueezingProfile::Gaussian {
                r0,
                q_c,
                theta0,
                beta,
                phi0,
            } => format!(
                "{{\"family\":\"gaussian\",\"r0\":{},\"q_c\":{},\"theta0\":{},\
                 \"beta\":{},\"phi0\":{}}}",
                fmt17(*r0),
                fmt17(*q_c),
                fmt17(*theta0),
                fmt17(*beta),
                fmt17(*phi0)
            ),
            SqueezingProfile::Tabulated { q, r, theta, phi } => format!(
                "{{\"family\":\"tabulated\",\"q\":{},\"r\":{},\"theta\":{},\"phi\":{}}}",
                fmt17_array(q),
                fmt17_array(r),
                fmt17_array(theta),
                fmt17_array(phi)
            ),
        }
    }

    /// Parse and validate the [`to_json`](Self::to_json) rendering.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            family: String,
            #[serde(default)]
            r0: Option<f64>,
            // absent and null both mean an unbounded band
            #[serde(default)]
            q_c: Option<f64>,
            #[serde(default)]
            theta0: Option<f64>,
            #[serde(default)]
            beta: Option<f64>,
            #[serde(default)]
            phi0: Option<f64>,
            #[serde(default)]
            q: Option<Vec<f64>>,
            #[serde(default)]
            r: Option<Vec<f64>>,
            #[serde(default)]
            theta: Option<Vec<f64>>,
            #[serde(default)]
            phi: Option<Vec<f64>>,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let scalars = |doc: &Doc| {
            (
                doc.r0.unwrap_or(0.0),
                doc.q_c.unwrap_or(f64::INFINITY),
                doc.theta0.unwrap_or(0.0),
                doc.beta.unwrap_or(0.0),
                doc.phi0.unwrap_or(0.0),
            )
        };
        let profile = match doc.family.as_str() {
            "constant_band" => {
                let (r0, q_c, theta0, beta, phi0) = scalars(&doc);
                SqueezingProfile::ConstantBand {
                    r0,
                    q_c,
                    theta0,
                    beta,
                    phi0,
                }
            }
            "gaussian" => {
                let (r0, q_c, theta0, beta, phi0) = scalars(&doc);
                SqueezingProfile::Gaussian {
                    r0,
                    q_c,
                    theta0,
                    beta,
                    phi0,
                }
            }
            "tabulated" => SqueezingProfile::Tabulated {
                q: doc
                    .q
                    .ok_or_else(|| Error::Serialization("tabulated profile needs q".into()))?,
                r: doc
                    .r
                    .ok_or_else(|| Error::Serialization("tabulated profile needs r".into()))?,
                theta: doc
                    .theta
                    .ok_or_else(|| Error::Serialization("tabulated profile needs theta".into()))?,
                phi: doc
                    .phi
                    .ok_or_else(|| Error::Serialization("tabulated profile needs phi".into()))?,
            },
            other => {
                return Err(Error::Serialization(format!(
                    "unknown profile family {other:?}"
                )))
            }
        };
        profile.validate()?;
        Ok(profile)
    }
}

fn validate_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("got {value}, need a finite value")))
    }
}

fn validate_magnitude(name: &'static str, r: f64) -> Result<()> {
    if !r.is_finite() || !(0.0..=R_MAX).contains(&r) {
        return Err(Error::invalid(
            name,
            format!("squeeze magnitude {r} outside [0, {R_MAX}]"),
        ));
    }
    Ok(())
}

/// Linear interpolation on a strictly increasing grid; vacuum (0) outside.
fn interp_table(grid: &[f64], values: &[f64], q: f64) -> f64 {
    let n = grid.len();
    if q < grid[0] || q > grid[n - 1] {
        return 0.0;
    }
    let hi = grid.partition_point(|&g| g < q);
    if hi == 0 {
        return values[0];
    }
    let lo = hi - 1;
    let t = (q - grid[lo]) / (grid[hi] - grid[lo]);
    values[lo] + t * (values[hi] - values[lo])
}

// ---------------------------------------------------------------------------
// the Bogoliubov kernel
// ---------------------------------------------------------------------------

/// The kernel values (U(q), V(q)) at one spatial frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UVCoefficients {
    pub u: Complex64,
    pub v: Complex64,
}

impl UVCoefficients {
    /// |U|² − |V|² − 1: zero for any kernel that preserves the commutators.
    pub fn unitarity_defect(&self) -> f64 {
        self.u.norm_sqr() - self.v.norm_sqr() - 1.0
    }
}

/// Solve a general 2×2 complex linear system A x = b by Cramer's rule.
fn solve2(a: [[Complex64; 2]; 2], b: [Complex64; 2]) -> [Complex64; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [
        (b[0] * a[1][1] - a[0][1] * b[1]) / det,
        (a[0][0] * b[1] - b[0] * a[1][0]) / det,
    ]
}

/// The two parametrization relations at frequency q, solved for U(q) and
/// V*(−q). Evenness of the profile (validated by the callers) identifies
/// V(−q) with V(q), which is what lets a single frequency close the system.
fn uv_at(profile: &SqueezingProfile, q: f64) -> UVCoefficients {
    let r = profile.r(q);
    let theta = profile.theta(q);
    let phi = profile.phi(q);
    let input_phase = Complex64::from_polar(1.0, -phi);
    let e_plus = input_phase * Complex64::new(r.exp() * theta.cos(), (-r).exp() * theta.sin());
    let e_minus = input_phase * Complex64::new((-r).exp() * theta.cos(), r.exp() * theta.sin());
    // unknowns x = (U(q), V*(−q)); the ± relations read
    //   [ 1   1 ] [ U       ]   [ E₊ ]
    //   [ 1  −1 ] [ V*(−q)  ] = [ E₋ ]
    let one = Complex64::new(1.0, 0.0);
    let x = solve2([[one, one], [one, -one]], [e_plus, e_minus]);
    UVCoefficients {
        u: x[0],
        v: x[1].conj(),
    }
}

/// Solve the parametrization relations for (U(q), V(q)).
///
/// The closed hyperbolic forms are deliberately not assumed here; the
/// relations are solved as the linear system they are, and the tests compare
/// against the closed forms as an independent oracle. Evenness of r, θ and φ
/// is what determines V(q) from the pair of relations, so it is re-checked
/// pointwise: profiles assembled by hand around the validating constructors
/// fail here instead of silently returning a wrong V.
///
/// # Errors
///
/// [`Error::AsymmetricProfile`] when any of r, θ, φ differs between q and −q.
pub fn solve_uv(profile: &SqueezingProfile, q: f64) -> Result<UVCoefficients> {
    for (name, value, mirrored) in [
        ("r", profile.r(q), profile.r(-q)),
        ("theta", profile.theta(q), profile.theta(-q)),
        ("phi", profile.phi(q), profile.phi(-q)),
    ] {
        if (value - mirrored).abs() > SYMMETRY_TOL * value.abs().max(1.0) {
            return Err(Error::AsymmetricProfile {
                message: format!("{name}({q}) = {value} but {name}({mq}) = {mirrored}", mq = -q),
            });
        }
    }
    Ok(uv_at(profile, q))
}

/// The three real moments (a, b, d) of the kernel at frequency q; see the
/// module docs. b and d use U(q)V(−q) = U(q)V(q), again by evenness.
fn kernel_moments(profile: &SqueezingProfile, q: f64) -> (f64, f64, f64) {
    let uv = uv_at(profile, q);
    let cross = uv.u * uv.v;
    (
        uv.u.norm_sqr() + uv.v.norm_sqr(),
        2.0 * cross.re,
        2.0 * cross.im,
    )
}

// ---------------------------------------------------------------------------
// quadrature planning
// ---------------------------------------------------------------------------

/// Integration plan shared by the variance and covariance assemblies: a
/// window wide enough that the moments have settled beyond it, split into
/// panels at every non-smooth point of the profile and at the core/wings
/// seam of the prolate functions.
struct QuadPlan {
    /// Partition of [0, x_max], the half-window in the scaled coordinate
    /// x = q/c; integrands are even so the negative half is folded in by
    /// symmetry.
    segments: Vec<(f64, f64)>,
    /// True when the profile is globally constant: the settled moment values
    /// are then read off at q = 0 and the corrections vanish identically.
    constant: bool,
}

/// Choose the quadrature window for this basis/profile pair, or refuse with
/// a [`Error::QuadratureWindow`] when no admissible window exists.
fn quad_plan(basis: &ProlateBasis, profile: &SqueezingProfile) -> Result<QuadPlan> {
    let c = basis.c();
    // stay clear of the outermost validity range of the wing evaluations
    let q_cap = 0.98 * c * basis.eval_validity_bound();
    let (q_ext, residual, constant) = match profile.tail() {
        TailBehavior::VacuumBeyond(q) => (q, 0.0, false),
        TailBehavior::SmallBeyond { q, residual } => (q, residual, false),
        TailBehavior::Constant => (0.0, 0.0, true),
        TailBehavior::NonDecaying => {
            return Err(Error::QuadratureWindow {
                q_given: q_cap,
                q_needed: f64::INFINITY,
                q_suggested: f64::INFINITY,
            })
        }
    };
    let q_window = (4.0 * c).max(q_ext);
    if q_window > q_cap {
        return Err(Error::QuadratureWindow {
            q_given: q_cap,
            q_needed: q_window,
            q_suggested: 1.05 * q_window,
        });
    }
    // every neglected moment beyond the window is bounded by e^{2r} − 1 at
    // the residual magnitude, times the (≤ 1) ψ mass out there, over 4
    let neglected = 0.25 * (2.0 * residual).exp_m1();
    if neglected > TRUNCATION_TOL {
        return Err(Error::QuadratureWindow {
            q_given: q_window,
            q_needed: 1.5 * q_window,
            q_suggested: 1.5 * q_window,
        });
    }
    let x_max = q_window / c;
    let mut cuts: Vec<f64> = profile
        .breakpoints()
        .into_iter()
        .map(|q| q / c)
        .chain(std::iter::once(1.0))
        .filter(|&x| x > 1e-12 && x < x_max - 1e-12)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut segments = Vec::with_capacity(cuts.len() + 1);
    let mut lo = 0.0;
    for &cut in &cuts {
        segments.push((lo, cut));
        lo = cut;
    }
    segments.push((lo, x_max));
    Ok(QuadPlan { segments, constant })
}

/// (1/c) ∫_{|q| ≤ Q} ψ_j(q/c) ψ_k(q/c) g(q) dq for an even, settled-moment
/// correction g, by adaptive panels over the plan's segments. Opposite
/// parities integrate to zero exactly and are skipped.
fn windowed_pair_integral(
    basis: &ProlateBasis,
    j: usize,
    k: usize,
    plan: &QuadPlan,
    g: &(impl Fn(f64) -> f64 + ?Sized),
) -> f64 {
    if (j + k) % 2 == 1 {
        return 0.0;
    }
    let c = basis.c();
    let tol = QUAD_TOL / (2.0 * plan.segments.len() as f64);
    let mut acc = 0.0;
    for &(a, b) in &plan.segments {
        let (value, _) = quad::adaptive(a, b, tol, |x| {
            let pj = basis
                .eval_psi(j, x)
                .expect("quadrature window sits inside the evaluation validity range");
            let weight = if k == j {
                pj * pj
            } else {
                pj * basis
                    .eval_psi(k, x)
                    .expect("quadrature window sits inside the evaluation validity range")
            };
            weight * g(c * x)
        });
        acc += value;
    }
    2.0 * acc
}

// ---------------------------------------------------------------------------
// variances and the full covariance
// ---------------------------------------------------------------------------

/// Variances of the two quadratures (A_{1k}, A_{2k}) of prolate mode k under
/// the given squeezing profile:
///
/// ```text
///     ⟨(ΔA_{1k})²⟩ = (1/4c) ∫ dq ψ_k²(q/c) [ e^{±2r} cos²θ + e^{∓2r} sin²θ ],
/// ```
///
/// upper signs for even k, lower for odd (and swapped for A_{2k}) — the
/// parity the (−i)^k propagation phase imprints on the quadratures. This
/// routine integrates the bracket directly; [`full_covariance`] assembles
/// the same diagonal through the kernel moments, and the agreement of the
/// two routes is one of the module's invariant tests.
///
/// The integral runs over the whole line: the settled bracket beyond the
/// quadrature window is restored exactly through ∫ ψ_k² = 1 (see the module
/// docs), so slowly decaying prolate wings cost no truncation error.
///
/// # Errors
///
/// * [`Error::InvalidParameter`] for k ≥ K or an invalid profile.
/// * [`Error::QuadratureWindow`] when no admissible window exists — the
///   profile's support outruns the basis evaluation range, or its moments
///   never settle (unbounded band with β ≠ 0).
pub fn mode_variances(
    basis: &ProlateBasis,
    profile: &SqueezingProfile,
    k: usize,
) -> Result<(f64, f64)> {
    if k >= basis.k_count() {
        return Err(Error::invalid(
            "k",
            format!("mode {k} out of range; basis holds K = {}", basis.k_count()),
        ));
    }
    profile.validate()?;
    let plan = quad_plan(basis, profile)?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let bracket = |s: f64, q: f64| {
        let (r, theta) = (profile.r(q), profile.theta(q));
        let (cos2, sin2) = (theta.cos().powi(2), theta.sin().powi(2));
        (2.0 * s * r).exp() * cos2 + (-2.0 * s * r).exp() * sin2
    };
    let (c1, c2) = if plan.constant {
        (bracket(sign, 0.0), bracket(-sign, 0.0))
    } else {
        (1.0, 1.0)
    };
    let var1 = 0.25 * (c1 + windowed_pair_integral(basis, k, k, &plan, &|q| bracket(sign, q) - c1));
    let var2 =
        0.25 * (c2 + windowed_pair_integral(basis, k, k, &plan, &|q| bracket(-sign, q) - c2));
    Ok((var1, var2))
}

/// Covariance matrix of the quadrature vector (A_{1,0}, A_{2,0}, …,
/// A_{1,K−1}, A_{2,K−1}) for vacuum OPA input.
#[derive(Debug, Clone)]
pub struct ModeCovariance {
    band: BandParameter,
    profile: SqueezingProfile,
    rows: Vec<Vec<f64>>,
}

impl ModeCovariance {
    /// Assemble from parts, validating shape, symmetry and positive
    /// definiteness. This is the single gate every construction path —
    /// quadrature assembly and document import alike — must pass.
    pub fn from_parts(
        band: BandParameter,
        profile: SqueezingProfile,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        profile.validate()?;
        let n = rows.len();
        if n == 0 || n % 2 != 0 || rows.iter().any(|row| row.len() != n) {
            return Err(Error::invalid(
                "sigma",
                format!("need a square 2K×2K matrix, got {n} rows"),
            ));
        }
        for i in 0..n {
            for j in 0..i {
                let scale = rows[i][j].abs().max(rows[j][i].abs()).max(1.0);
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(
                        "sigma",
                        format!("matrix is not symmetric at ({i}, {j})"),
                    ));
                }
            }
        }
        let cov = ModeCovariance {
            band,
            profile,
            rows,
        };
        let min_eigenvalue = cov
            .as_matrix()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, &e| acc.min(e));
        if min_eigenvalue <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }
        Ok(cov)
    }

    pub fn band(&self) -> BandParameter {
        self.band
    }

    pub fn c(&self) -> f64 {
        self.band.c()
    }

    pub fn profile(&self) -> &SqueezingProfile {
        &self.profile
    }

    pub fn k_count(&self) -> usize {
        self.rows.len() / 2
    }

    /// Full matrix entry in the interleaved (A_{1,0}, A_{2,0}, …) ordering.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// The 2×2 quadrature block coupling modes j and k:
    /// [[Cov(A1j,A1k), Cov(A1j,A2k)], [Cov(A2j,A1k), Cov(A2j,A2k)]].
    pub fn block(&self, j: usize, k: usize) -> [[f64; 2]; 2] {
        [
            [self.rows[2 * j][2 * k], self.rows[2 * j][2 * k + 1]],
            [self.rows[2 * j + 1][2 * k], self.rows[2 * j + 1][2 * k + 1]],
        ]
    }

    /// (Var(A_{1k}), Var(A_{2k})) off the diagonal blocks.
    pub fn variance_pair(&self, k: usize) -> (f64, f64) {
        (self.rows[2 * k][2 * k], self.rows[2 * k + 1][2 * k + 1])
    }

    pub fn as_matrix(&self) -> DMatrix<f64> {
        let n = self.rows.len();
        DMatrix::from_fn(n, n, |i, j| self.rows[i][j])
    }

    /// Per-mode uncertainty products Var(A1)·Var(A2) − Cov(A1,A2)²; each is
    /// bounded below by 1/16 for any physical Gaussian state.
    pub fn uncertainty_products(&self) -> Vec<f64> {
        (0..self.k_count())
            .map(|k| {
                let b = self.block(k, k);
                b[0][0] * b[1][1] - b[0][1] * b[1][0]
            })
            .collect()
    }

    /// Serialize as a JSON document with 17-significant-digit reals.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"c\":{},\"K\":{},\"profile\":{},\"sigma\":{}}}",
            fmt17(self.c()),
            self.k_count(),
            self.profile.to_json(),
            fmt17_matrix(&self.rows)
        )
    }

    /// Re-load a document written by [`to_json`](Self::to_json), re-running
    /// the full validation gate.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc<'a> {
            c: f64,
            #[serde(rename = "K")]
            k_count: usize,
            #[serde(borrow)]
            profile: &'a serde_json::value::RawValue,
            sigma: Vec<Vec<f64>>,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if doc.sigma.len() != 2 * doc.k_count {
            return Err(Error::Serialization(format!(
                "sigma has {} rows but K = {}",
                doc.sigma.len(),
                doc.k_count
            )));
        }
        let band = BandParameter::new(doc.c)?;
        let profile = SqueezingProfile::from_json(doc.profile.get())?;
        ModeCovariance::from_parts(band, profile, doc.sigma)
    }
}

/// Assemble the full 2K×2K quadrature covariance for vacuum OPA input.
///
/// Same-parity mode pairs (j, k) couple through the three kernel-moment
/// integrals J[a], J[b], J[d] (module docs); opposite parities decouple
/// exactly. Each J splits into the settled tail, restored analytically
/// through orthonormality, plus a compact correction handled by adaptive
/// panels — so the slowly decaying prolate wings never translate into
/// truncation error. Pairs are integrated in parallel.
///
/// The diagonal blocks of the result must reproduce [`mode_variances`],
/// which integrates the textbook brackets instead of the kernel moments;
/// the tests hold the two routes together within 1e−8.
///
/// # Errors
///
/// As [`mode_variances`], plus [`Error::NotPositiveDefinite`] if quadrature
/// error ever drove the assembled matrix off the Gaussian-state cone.
pub fn full_covariance(basis: &ProlateBasis, profile: &SqueezingProfile) -> Result<ModeCovariance> {
    profile.validate()?;
    let plan = quad_plan(basis, profile)?;
    let kk = basis.k_count();
    let (a0, b0, d0) = if plan.constant {
        kernel_moments(profile, 0.0)
    } else {
        (1.0, 0.0, 0.0)
    };
    let pairs: Vec<(usize, usize)> = (0..kk)
        .flat_map(|j| (j..kk).step_by(2).map(move |k| (j, k)))
        .collect();
    let moments: Vec<((usize, usize), [f64; 3])> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let delta = if j == k { 1.0 } else { 0.0 };
            let ja = delta * a0
                + windowed_pair_integral(basis, j, k, &plan, &|q| kernel_moments(profile, q).0 - a0);
            let jb = delta * b0
                + windowed_pair_integral(basis, j, k, &plan, &|q| kernel_moments(profile, q).1 - b0);
            let jd = delta * d0
                + windowed_pair_integral(basis, j, k, &plan, &|q| kernel_moments(profile, q).2 - d0);
            ((j, k), [ja, jb, jd])
        })
        .collect();
    let n = 2 * kk;
    let mut rows = vec![vec![0.0; n]; n];
    for ((j, k), [ja, jb, jd]) in moments {
        // same parity throughout, so (−1)^j = (−1)^k
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let s11 = 0.25 * (ja + sign * jb);
        let s22 = 0.25 * (ja - sign * jb);
        let s12 = 0.25 * sign * jd;
        rows[2 * j][2 * k] = s11;
        rows[2 * k][2 * j] = s11;
        rows[2 * j + 1][2 * k + 1] = s22;
        rows[2 * k + 1][2 * j + 1] = s22;
        rows[2 * j][2 * k + 1] = s12;
        rows[2 * k + 1][2 * j] = s12;
        rows[2 * j + 1][2 * k] = s12;
        rows[2 * k][2 * j + 1] = s12;
    }
    ModeCovariance::from_parts(basis.band(), profile.clone(), rows)
}

// ---------------------------------------------------------------------------
// per-mode summary
// ---------------------------------------------------------------------------

/// Squeezing summary of one prolate mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSqueezing {
    pub k: usize,
    /// Quadrature angle α ∈ [0, π) minimizing Var(A₁ cos α + A₂ sin α);
    /// 0 when the block is isotropic (vacuum).
    pub angle: f64,
    pub min_variance: f64,
    pub max_variance: f64,
    /// 10 log₁₀(min variance / (1/4)): negative iff squeezed below shot noise.
    pub squeezing_db: f64,
    /// True when the minimum variance sits below 1/4 by more than 1e−12.
    pub squeezed: bool,
}

/// Rotate each diagonal 2×2 block to its principal axes and report the
/// squeezed/anti-squeezed variances, the squeezed quadrature angle, and the
/// squeezing in dB relative to shot noise.
pub fn squeezing_report(cov: &ModeCovariance) -> Vec<ModeSqueezing> {
    (0..cov.k_count())
        .map(|k| {
            let b = cov.block(k, k);
            let (v1, v2, cv) = (b[0][0], b[1][1], b[0][1]);
            let mean = 0.5 * (v1 + v2);
            let radius = (0.25 * (v1 - v2) * (v1 - v2) + cv * cv).sqrt();
            // Var(α) = mean + radius·cos(2α − δ) with δ = atan2(2cv, v1 − v2),
            // so the minimum sits at α = δ/2 + π/2
            let angle = if radius < 1e-14 {
                0.0
            } else {
                (0.5 * (2.0 * cv).atan2(v1 - v2) + FRAC_PI_2).rem_euclid(PI)
            };
            let min_variance = mean - radius;
            let max_variance = mean + radius;
            ModeSqueezing {
                k,
                angle,
                min_variance,
                max_variance,
                squeezing_db: 10.0 * (min_variance / 0.25).log10(),
                squeezed: min_variance < 0.25 - SQUEEZED_TOL,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::sync::OnceLock;

    fn basis() -> &'static ProlateBasis {
        static BASIS: OnceLock<ProlateBasis> = OnceLock::new();
        BASIS.get_or_init(|| {
            ProlateBasis::build(BandParameter::new(2.0).unwrap(), 8, 200).unwrap()
        })
    }

    /// Closed hyperbolic forms of the kernel, used as the independent oracle
    /// for the linear-system solve: U = e^{−iφ} cosh r e^{iθ},
    /// V = e^{iφ} sinh r e^{iθ}.
    fn closed_form_uv(r: f64, theta: f64, phi: f64) -> (Complex64, Complex64) {
        let u = Complex64::from_polar(1.0, -phi) * Complex64::from_polar(r.cosh(), theta);
        let v = Complex64::from_polar(1.0, phi) * Complex64::from_polar(r.sinh(), theta);
        (u, v)
    }

    /// A symmetric five-node table with a triangular squeeze bump and gentle
    /// phase structure.
    fn bump_table(c: f64) -> SqueezingProfile {
        SqueezingProfile::tabulated(
            vec![-2.0 * c, -c, 0.0, c, 2.0 * c],
            vec![0.0, 0.6, 1.1, 0.6, 0.0],
            vec![0.2, 0.1, 0.05, 0.1, 0.2],
            vec![0.4, 0.4, 0.4, 0.4, 0.4],
        )
        .unwrap()
    }

    #[test]
    fn solve_uv_reproduces_the_hyperbolic_closed_form() {
        let c = basis().c();
        let profiles = [
            SqueezingProfile::constant_band(1.0, f64::INFINITY, 0.0, 0.0, 0.0).unwrap(),
            SqueezingProfile::constant_band(0.7, 1.5 * c, 0.3, 0.02, 0.9).unwrap(),
            SqueezingProfile::gaussian(1.2, c, 0.4, 0.05, -0.6).unwrap(),
            bump_table(c),
        ];
        for profile in &profiles {
            for &q in &[0.0, 0.3, 1.0, 2.7, 5.0, -1.9] {
                let uv = solve_uv(profile, q).unwrap();
                let (u_ref, v_ref) =
                    closed_form_uv(profile.r(q), profile.theta(q), profile.phi(q));
                assert_abs_diff_eq!(uv.u.re, u_ref.re, epsilon = 1e-12);
                assert_abs_diff_eq!(uv.u.im, u_ref.im, epsilon = 1e-12);
                assert_abs_diff_eq!(uv.v.re, v_ref.re, epsilon = 1e-12);
                assert_abs_diff_eq!(uv.v.im, v_ref.im, epsilon = 1e-12);
            }
        }
        // the plain-magnitude case: U = cosh 1, V = sinh 1, both real
        let flat = SqueezingProfile::constant_band(1.0, f64::INFINITY, 0.0, 0.0, 0.0).unwrap();
        let uv = solve_uv(&flat, 0.8).unwrap();
        assert_abs_diff_eq!(uv.u.re, 1.543_080_634_815_243_7, epsilon = 1e-12);
        assert_abs_diff_eq!(uv.v.re, 1.175_201_193_643_801_4, epsilon = 1e-12);
        assert_abs_diff_eq!(uv.u.im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(uv.v.im, 0.0, epsilon = 1e-15);
        // and the identity transform
        let uv = solve_uv(&SqueezingProfile::vacuum(), 3.2).unwrap();
        assert_abs_diff_eq!((uv.u - Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(uv.v.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bogoliubov_unitarity_holds_at_random_frequencies() {
        let c = basis().c();
        let profiles = [
            SqueezingProfile::constant_band(2.5, 3.0 * c, 1.1, 0.07, 0.3).unwrap(),
            SqueezingProfile::gaussian(3.0, 0.8 * c, -0.5, 0.02, 1.7).unwrap(),
            bump_table(c),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for profile in &profiles {
            for _ in 0..1000 {
                let q: f64 = rng.gen_range(-6.0 * c..6.0 * c);
                let uv = solve_uv(profile, q).unwrap();
                assert!(
                    uv.unitarity_defect().abs() < 1e-12,
                    "|U|^2 - |V|^2 - 1 = {:e} at q = {q}",
                    uv.unitarity_defect()
                );
            }
        }
    }

    #[test]
    fn tabulated_profiles_interpolate_and_vanish_outside() {
        let c = basis().c();
        let table = bump_table(c);
        // exact at the nodes
        assert_eq!(table.r(0.0), 1.1);
        assert_eq!(table.r(c), 0.6);
        // linear in between
        assert_abs_diff_eq!(table.r(0.5 * c), 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(table.theta(1.5 * c), 0.15, epsilon = 1e-15);
        // vacuum beyond the tabulated range
        assert_eq!(table.r(2.0 * c + 1e-9), 0.0);
        assert_eq!(table.theta(-3.0 * c), 0.0);
        // and even up to rounding in the mirrored interpolation cells
        for &q in &[0.3, 1.1, 1.9, 3.7] {
            assert_abs_diff_eq!(table.r(q), table.r(-q), epsilon = 1e-15);
            assert_abs_diff_eq!(table.theta(q), table.theta(-q), epsilon = 1e-15);
        }
    }

    #[test]
    fn asymmetric_tables_are_rejected() {
        // asymmetric value row caught by the constructor
        let err = SqueezingProfile::tabulated(
            vec![-1.0, 0.0, 1.0],
            vec![0.2, 1.0, 0.3],
            vec![0.0; 3],
            vec![0.0; 3],
        )
        .unwrap_err();
        assert!(matches!(err, Error::AsymmetricProfile { .. }), "{err}");
        // non-mirrored grid caught as well
        let err = SqueezingProfile::tabulated(
            vec![-1.0, 0.0, 2.0],
            vec![0.2, 1.0, 0.2],
            vec![0.0; 3],
            vec![0.0; 3],
        )
        .unwrap_err();
        assert!(matches!(err, Error::AsymmetricProfile { .. }), "{err}");
        // a hand-assembled variant bypassing the constructor fails in solve_uv
        let sneaky = SqueezingProfile::Tabulated {
            q: vec![-1.0, 0.0, 1.0],
            r: vec![0.2, 1.0, 0.3],
            theta: vec![0.0; 3],
            phi: vec![0.0; 3],
        };
        let err = solve_uv(&sneaky, 0.7).unwrap_err();
        assert!(matches!(err, Error::AsymmetricProfile { .. }), "{err}");
    }

    #[test]
    fn profile_parameters_are_validated() {
        assert!(SqueezingProfile::constant_band(-0.1, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(SqueezingProfile::constant_band(12.5, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(SqueezingProfile::constant_band(1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(SqueezingProfile::gaussian(1.0, f64::INFINITY, 0.0, 0.0, 0.0).is_err());
        assert!(SqueezingProfile::gaussian(1.0, 1.0, f64::NAN, 0.0, 0.0).is_err());
        // length mismatch and non-increasing grid
        assert!(SqueezingProfile::tabulated(
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0; 3],
            vec![0.0; 3]
        )
        .is_err());
        assert!(SqueezingProfile::tabulated(
            vec![-1.0, 1.0, 1.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0; 3],
            vec![0.0; 3]
        )
        .is_err());
        // tabulated magnitude beyond the overflow guard
        assert!(SqueezingProfile::tabulated(
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 13.0, 0.0],
            vec![0.0; 3],
            vec![0.0; 3]
        )
        .is_err());
    }

    #[test]
    fn vacuum_variances_sit_at_the_shot_noise_quarter() {
        let vacuum = SqueezingProfile::vacuum();
        for k in 0..basis().k_count() {
            let (v1, v2) = mode_variances(basis(), &vacuum, k).unwrap();
            assert_abs_diff_eq!(v1, 0.25, epsilon = 1e-9);
            assert_abs_diff_eq!(v2, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn uniform_squeezing_reproduces_the_constant_bracket_variances() {
        // r ≡ 1, θ ≡ 0: the brackets are the constants e^{±2}, so the
        // variances are exactly e^{±2}/4 with the parity deciding which
        // quadrature is which
        let flat = SqueezingProfile::constant_band(1.0, f64::INFINITY, 0.0, 0.0, 0.0).unwrap();
        let anti = (2.0f64).exp() / 4.0;
        let sq = (-2.0f64).exp() / 4.0;
        for k in 0..basis().k_count() {
            let (v1, v2) = mode_variances(basis(), &flat, k).unwrap();
            if k % 2 == 0 {
                assert_abs_diff_eq!(v1, anti, epsilon = 1e-9);
                assert_abs_diff_eq!(v2, sq, epsilon = 1e-9);
            } else {
                assert_abs_diff_eq!(v1, sq, epsilon = 1e-9);
                assert_abs_diff_eq!(v2, anti, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn narrow_band_squeezing_interpolates_between_squeezed_and_vacuum() {
        // a band half the object bandwidth squeezes mode 0 only partially,
        // and barely touches the outermost mode, whose spectral mass sits
        // almost entirely beyond the squeezed band
        let c = basis().c();
        let narrow = SqueezingProfile::constant_band(1.0, 0.5 * c, 0.0, 0.0, 0.0).unwrap();
        let report = squeezing_report(&full_covariance(basis(), &narrow).unwrap());
        let sq = (-2.0f64).exp() / 4.0;
        assert!(report[0].min_variance > sq + 1e-3);
        assert!(report[0].min_variance < 0.25 - 1e-3);
        assert!(report[0].squeezed);
        assert!(report[7].min_variance > 0.2499);
    }

    #[test]
    fn quadrature_window_is_refused_when_no_window_works() {
        // unbounded squeezing with dispersive phase never settles
        let dispersive =
            SqueezingProfile::constant_band(1.0, f64::INFINITY, 0.0, 0.1, 0.0).unwrap();
        let err = mode_variances(basis(), &dispersive, 0).unwrap_err();
        assert!(matches!(err, Error::QuadratureWindow { .. }), "{err}");
        // a band wider than the wing evaluation range cannot be integrated
        let too_wide = SqueezingProfile::constant_band(1.0, 300.0, 0.0, 0.0, 0.0).unwrap();
        let err = full_covariance(basis(), &too_wide).unwrap_err();
        match err {
            Error::QuadratureWindow {
                q_given, q_needed, ..
            } => {
                assert!(q_needed > q_given);
            }
            other => panic!("expected QuadratureWindow, got {other}"),
        }
    }

    /// Brute-force fixed-resolution moment integral used as the covariance
    /// oracle: composite 40-point Gauss–Legendre panels of width 1/20 over
    /// [−12, 12] — about ten times the density the adaptive scheme settles
    /// at — with no settled-tail splitting and no parity folding.
    fn brute_pair_integral(j: usize, k: usize, g: impl Fn(f64) -> f64) -> f64 {
        let rule = GaussLegendre::new(40);
        let c = basis().c();
        let x_end = 12.0;
        let panels = 480;
        let width = 2.0 * x_end / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = -x_end + p as f64 * width;
            acc += rule.integrate(a, a + width, |x| {
                basis().eval_psi(j, x).unwrap() * basis().eval_psi(k, x).unwrap() * g(c * x)
            });
        }
        acc
    }

    #[test]
    fn gaussian_covariance_block_matches_a_brute_force_oracle() {
        let c = basis().c();
        let profile = SqueezingProfile::gaussian(1.0, c, 0.0, 0.0, 0.0).unwrap();
        let cov = full_covariance(basis(), &profile).unwrap();
        // oracle route: raw windowed integrals of the e^{±2r} brackets plus
        // the vacuum mass beyond the window restored through orthonormality
        let mass = brute_pair_integral(0, 0, |_| 1.0);
        let anti = 0.25 * (brute_pair_integral(0, 0, |q| (2.0 * profile.r(q)).exp()) + 1.0 - mass);
        let sq = 0.25 * (brute_pair_integral(0, 0, |q| (-2.0 * profile.r(q)).exp()) + 1.0 - mass);
        let block = cov.block(0, 0);
        assert_abs_diff_eq!(block[0][0], anti, epsilon = 1e-6);
        assert_abs_diff_eq!(block[1][1], sq, epsilon = 1e-6);
        // θ = 0 leaves the quadratures uncorrelated
        assert_abs_diff_eq!(block[0][1], 0.0, epsilon = 1e-9);
        // cross-mode coupling (0, 2): the full-line inner product ∫ψ₀ψ₂
        // vanishes by orthogonality, so the windowed oracle must subtract its
        // own truncated copy of it or the missing wings masquerade as signal
        let cross = 0.25
            * (brute_pair_integral(0, 2, |q| (2.0 * profile.r(q)).exp())
                - brute_pair_integral(0, 2, |_| 1.0));
        assert_abs_diff_eq!(cov.entry(0, 4), cross, epsilon = 1e-6);
    }

    #[test]
    fn covariance_diagonal_agrees_with_the_direct_variance_integrals() {
        // the covariance assembly works through the kernel moments of the
        // Bogoliubov transform while mode_variances integrates the textbook
        // brackets; their agreement pins the parity/phase conventions
        let c = basis().c();
        let profiles = [
            SqueezingProfile::constant_band(0.8, 1.5 * c, 0.3, 0.05, 0.2).unwrap(),
            SqueezingProfile::gaussian(1.0, c, 0.2, 0.1, 0.0).unwrap(),
            SqueezingProfile::constant_band(0.6, f64::INFINITY, 0.9, 0.0, 0.0).unwrap(),
            bump_table(c),
        ];
        for profile in &profiles {
            let cov = full_covariance(basis(), profile).unwrap();
            for k in 0..basis().k_count() {
                let (v1, v2) = mode_variances(basis(), profile, k).unwrap();
                let (c1, c2) = cov.variance_pair(k);
                assert_abs_diff_eq!(v1, c1, epsilon = 1e-8);
                assert_abs_diff_eq!(v2, c2, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn vacuum_covariance_is_the_identity_over_four() {
        let cov = full_covariance(basis(), &SqueezingProfile::vacuum()).unwrap();
        let n = 2 * basis().k_count();
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 0.25 } else { 0.0 };
                assert_abs_diff_eq!(cov.entry(i, j), expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn uniform_profiles_leave_distinct_modes_uncorrelated() {
        // a constant bracket turns every cross term into an orthogonality
        // integral, so off-diagonal blocks vanish
        let flat = SqueezingProfile::constant_band(0.8, f64::INFINITY, 0.4, 0.0, 0.0).unwrap();
        let cov = full_covariance(basis(), &flat).unwrap();
        for j in 0..basis().k_count() {
            for k in 0..basis().k_count() {
                if j == k {
                    continue;
                }
                for row in cov.block(j, k) {
                    for value in row {
                        assert!(
                            value.abs() < 1e-8,
                            "block ({j}, {k}) carries {value:e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn input_quadrature_phase_never_reaches_the_covariance() {
        // φ rotates the input quadratures, which are vacuum — the kernel
        // moments cancel it exactly, so the covariance cannot depend on it
        let c = basis().c();
        let reference = SqueezingProfile::gaussian(1.0, c, 0.2, 0.05, 0.0).unwrap();
        let rotated = SqueezingProfile::gaussian(1.0, c, 0.2, 0.05, 1.3).unwrap();
        let cov_ref = full_covariance(basis(), &reference).unwrap();
        let cov_rot = full_covariance(basis(), &rotated).unwrap();
        let n = 2 * basis().k_count();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(cov_ref.entry(i, j), cov_rot.entry(i, j), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn covariance_blocks_satisfy_the_heisenberg_bound() {
        let c = basis().c();
        let profiles = [
            SqueezingProfile::constant_band(0.8, 1.5 * c, 0.3, 0.05, 0.2).unwrap(),
            SqueezingProfile::gaussian(1.2, 0.7 * c, -0.4, 0.08, 0.0).unwrap(),
            bump_table(c),
        ];
        for profile in &profiles {
            let cov = full_covariance(basis(), profile).unwrap();
            for (k, det) in cov.uncertainty_products().iter().enumerate() {
                assert!(
                    *det >= 1.0 / 16.0 - 1e-10,
                    "mode {k} uncertainty product {det} below 1/16"
                );
            }
        }
    }

    #[test]
    fn stronger_squeezing_widens_the_variance_split_monotonically() {
        let c = basis().c();
        let mut last: Option<Vec<(f64, f64)>> = None;
        for r0 in [0.3, 0.6, 1.0] {
            let profile = SqueezingProfile::constant_band(r0, 2.0 * c, 0.0, 0.0, 0.0).unwrap();
            let report = squeezing_report(&full_covariance(basis(), &profile).unwrap());
            let extremes: Vec<(f64, f64)> = report
                .iter()
                .map(|m| (m.min_variance, m.max_variance))
                .collect();
            if let Some(prev) = &last {
                for (k, ((lo, hi), (lo_prev, hi_prev))) in
                    extremes.iter().zip(prev.iter()).enumerate()
                {
                    assert!(lo < lo_prev, "mode {k} min variance did not shrink");
                    assert!(hi > hi_prev, "mode {k} max variance did not grow");
                }
            }
            last = Some(extremes);
        }
    }

    #[test]
    fn wider_squeezing_bands_only_deepen_the_squeezing() {
        // growing the band covers more of each mode's spectral mass, so the
        // minimum variance can only drop; the two anchor values were fixed
        // by an independent high-resolution quadrature of the variance
        // integrals for this basis
        let c = basis().c();
        let mut last: Option<Vec<f64>> = None;
        for scale in [0.5, 1.0, 2.0, 3.0] {
            let profile =
                SqueezingProfile::constant_band(1.0, scale * c, 0.0, 0.0, 0.0).unwrap();
            let report = squeezing_report(&full_covariance(basis(), &profile).unwrap());
            let minima: Vec<f64> = report.iter().map(|m| m.min_variance).collect();
            if scale == 0.5 {
                assert_abs_diff_eq!(minima[0], 0.128084, epsilon = 1e-6);
            }
            if scale == 3.0 {
                assert_abs_diff_eq!(minima[0], 0.038138, epsilon = 1e-6);
            }
            if let Some(prev) = &last {
                for (k, (now, before)) in minima.iter().zip(prev.iter()).enumerate() {
                    assert!(
                        *now <= before + 1e-12,
                        "mode {k} min variance rose from {before} to {now}"
                    );
                }
            }
            last = Some(minima);
        }
    }

    #[test]
    fn squeezing_report_angles_follow_the_amplified_phase() {
        // vacuum: isotropic blocks, nothing squeezed, 0 dB
        let vacuum = squeezing_report(&full_covariance(basis(), &SqueezingProfile::vacuum()).unwrap());
        for mode in &vacuum {
            assert!(!mode.squeezed);
            assert_abs_diff_eq!(mode.squeezing_db, 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(mode.angle, 0.0, epsilon = 1e-12);
        }
        // r ≡ 1, θ ≡ 0: even modes squeeze A₂ (angle π/2) at −8.686 dB,
        // odd modes squeeze A₁ (angle 0)
        let flat = SqueezingProfile::constant_band(1.0, f64::INFINITY, 0.0, 0.0, 0.0).unwrap();
        let report = squeezing_report(&full_covariance(basis(), &flat).unwrap());
        let db = 10.0 * (-2.0f64).exp().log10();
        for mode in &report {
            assert!(mode.squeezed);
            assert_abs_diff_eq!(mode.squeezing_db, db, epsilon = 1e-6);
            let expected_angle = if mode.k % 2 == 0 { FRAC_PI_2 } else { 0.0 };
            assert_abs_diff_eq!(mode.angle, expected_angle, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(db, -8.685_889_638_065_035, epsilon = 1e-12);
        // rotating the amplified quadrature rotates the squeezed axis with it
        let tilted = SqueezingProfile::constant_band(1.0, f64::INFINITY, 0.3, 0.0, 0.0).unwrap();
        let report = squeezing_report(&full_covariance(basis(), &tilted).unwrap());
        for mode in &report {
            let expected_angle = if mode.k % 2 == 0 {
                0.3 + FRAC_PI_2
            } else {
                // odd parity flips the sign of the kernel moments, which
                // advances the principal axis by π/2
                0.3
            };
            assert_abs_diff_eq!(mode.angle, expected_angle, epsilon = 1e-9);
        }
    }

    #[test]
    fn covariance_document_roundtrips_and_is_validated() {
        let c = basis().c();
        let profile = SqueezingProfile::gaussian(0.9, 1.3 * c, 0.25, 0.04, 0.5).unwrap();
        let cov = full_covariance(basis(), &profile).unwrap();
        let back = ModeCovariance::from_json(&cov.to_json()).unwrap();
        assert_eq!(back.k_count(), cov.k_count());
        assert_eq!(back.profile(), cov.profile());
        let n = 2 * cov.k_count();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(
                    back.entry(i, j).to_bits(),
                    cov.entry(i, j).to_bits(),
                    "entry ({i}, {j}) drifted through JSON"
                );
            }
        }
        // an unbounded band serializes as null and comes back infinite
        let flat = full_covariance(basis(), &SqueezingProfile::vacuum()).unwrap();
        let back = ModeCovariance::from_json(&flat.to_json()).unwrap();
        match back.profile() {
            SqueezingProfile::ConstantBand { q_c, .. } => assert!(q_c.is_infinite()),
            other => panic!("vacuum profile deserialized as {other:?}"),
        }
        // a tampered document that is not positive definite is refused
        let mut rows = cov.rows().to_vec();
        rows[0][0] = -0.1;
        let err = ModeCovariance::from_parts(basis().band(), profile.clone(), rows).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }), "{err}");
        // as is an asymmetric matrix
        let mut rows = cov.rows().to_vec();
        rows[0][1] += 1e-3;
        let err = ModeCovariance::from_parts(basis().band(), profile, rows).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }), "{err}");
    }
}
