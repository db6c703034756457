//! Invariant registry: the library's documented properties as a reportable
//! check suite.
//!
//! Every numerical guarantee the other modules advertise — spectrum
//! identities of the prolate basis, the propagation relations of the field
//! algebra, consistency and physicality of the quadrature statistics, the
//! budget bookkeeping, and the statistical contracts of the homodyne
//! sampler — is re-measured here behind a stable check identifier:
//!
//! ```text
//!   PSWF-xx   eigenbasis construction      (pswf)
//!   MODE-xx   plane-to-plane field algebra (modes)
//!   SQZ-xx    quadrature statistics        (squeeze)
//!   BUD-xx    mode budget                  (budget)
//!   MC-xx     homodyne sampling            (homodyne)
//! ```
//!
//! Each check condenses to a single scalar — a worst-case defect or a
//! worst-case margin — compared against an explicit bound, so a failure
//! report always carries the measured value next to what was expected.
//! [`run_all`] executes the whole registry; the result is deterministic for
//! a fixed `seed`, which feeds the randomized sweeps (unitarity spot checks,
//! random profile generation, Monte-Carlo draws).
//!
//! The registry is not a substitute for the unit tests — those pin many more
//! edge cases — but it is the self-contained battery a deployment can run
//! against its own build, and the single place where the per-module
//! guarantees are listed side by side.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::budget::{budget, ImagingConfig, Verdict};
use crate::homodyne::{self, empirical_covariance, sample};
use crate::modes::{
    apply_diaphragm, lens_transform, project_core_wings, sample_mode, transform_mode,
    DiaphragmSpec, ModeKind, Plane,
};
use crate::pswf::{BandParameter, ProlateBasis};
use crate::quad;
use crate::squeeze::{full_covariance, mode_variances, solve_uv, ModeCovariance, SqueezingProfile};
use crate::Result;

/// Identifiers of every registered check, in execution order. `run_all`
/// returns exactly one report per entry.
pub const CHECK_IDS: [&str; 18] = [
    "PSWF-01", "PSWF-02", "PSWF-03", "PSWF-04", "MODE-01", "MODE-02", "MODE-03", "SQZ-01",
    "SQZ-02", "SQZ-03", "SQZ-04", "SQZ-05", "BUD-01", "BUD-02", "BUD-03", "MC-01", "MC-02",
    "MC-03",
];

/// Space-bandwidth product of the reference basis the registry measures on.
const REFERENCE_C: f64 = 2.0;
/// Retained modes of the reference basis; deep enough into the eigenvalue
/// plunge (λ₇ ≈ 7e−12) to exercise the near-degenerate regime.
const REFERENCE_K: usize = 8;
/// Nyström order of the reference basis.
const REFERENCE_M: usize = 200;

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Which side of the bound a measurement must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The measurement is a defect: pass iff `measured <= bound`.
    AtMost,
    /// The measurement is a margin: pass iff `measured >= bound`.
    AtLeast,
}

impl Direction {
    /// The comparison glyph used in rendered report lines.
    pub fn symbol(self) -> &'static str {
        match self {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
        }
    }
}

/// Outcome of a single registry check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    /// Stable identifier (`"PSWF-01"`, …); see [`CHECK_IDS`].
    pub id: &'static str,
    /// One-line statement of the property being measured.
    pub summary: &'static str,
    /// The condensed scalar: worst defect or worst margin over the sweep.
    pub measured: f64,
    /// The acceptance bound for `measured`.
    pub bound: f64,
    /// Which side of `bound` counts as success.
    pub direction: Direction,
    /// Whether the check passed.
    pub passed: bool,
}

impl CheckReport {
    fn at_most(id: &'static str, summary: &'static str, measured: f64, bound: f64) -> Self {
        CheckReport {
            id,
            summary,
            measured,
            bound,
            direction: Direction::AtMost,
            passed: measured <= bound,
        }
    }

    fn at_least(id: &'static str, summary: &'static str, measured: f64, bound: f64) -> Self {
        CheckReport {
            id,
            summary,
            measured,
            bound,
            direction: Direction::AtLeast,
            passed: measured >= bound,
        }
    }

    /// One-line rendering: `[ID] PASS measured=… <= bound=…  summary`.
    pub fn line(&self) -> String {
        format!(
            "[{}] {} measured={:.6e} {} bound={:.6e}  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.measured,
            self.direction.symbol(),
            self.bound,
            self.summary,
        )
    }
}

/// Run every registered check and collect the reports in [`CHECK_IDS`]
/// order. `seed` feeds the randomized sweeps, so two runs with the same seed
/// produce bit-identical reports.
///
/// # Errors
///
/// Any error from the underlying modules (a basis that fails to build, a
/// profile rejected by its constructor) aborts the run; the registry's
/// parameters are chosen so this does not happen on a healthy build.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    let basis = ProlateBasis::build(
        BandParameter::new(REFERENCE_C)?,
        REFERENCE_K,
        REFERENCE_M,
    )?;
    let reports = vec![
        pswf_01_spectrum_plunge()?,
        pswf_02_resolution_stability()?,
        pswf_03_trace_identities()?,
        pswf_04_psi_orthonormality(&basis)?,
        mode_01_propagation_relations(&basis)?,
        mode_02_diaphragm_invariance(&basis)?,
        mode_03_linearity(&basis)?,
        sqz_01_unitarity(seed)?,
        sqz_02_covariance_consistency(&basis)?,
        sqz_03_monotone_in_r(&basis)?,
        sqz_04_band_overlap_order(&basis)?,
        sqz_05_heisenberg_floor(&basis, seed)?,
        bud_01_margin_identity()?,
        bud_02_verdict_monotone()?,
        bud_03_overlap_variance_tie(&basis)?,
        mc_01_whiteness(&basis, seed)?,
        mc_02_determinism(&basis, seed)?,
        mc_03_displacement_invariance(&basis, seed)?,
    ];
    debug_assert_eq!(reports.len(), CHECK_IDS.len());
    debug_assert!(reports.iter().zip(CHECK_IDS).all(|(r, id)| r.id == id));
    Ok(reports)
}

// ---------------------------------------------------------------------------
// pswf: spectrum and basis checks
// ---------------------------------------------------------------------------

/// The eigenvalue plunge straddles the Shannon number: λ_k ≥ 1/2 for
/// k ≤ S−2 and λ_k ≤ 1/2 for k ≥ S+1, measured for S ∈ {4, 8}.
fn pswf_01_spectrum_plunge() -> Result<CheckReport> {
    let mut margin = f64::INFINITY;
    for s in [4usize, 8] {
        // S = 2c/π, so the band with integer Shannon number S is c = πS/2
        let band = BandParameter::new(0.5 * PI * s as f64)?;
        let spectrum = ProlateBasis::resolvable_spectrum(band, REFERENCE_M);
        for (k, &lambda) in spectrum.iter().enumerate() {
            if k + 2 <= s {
                margin = margin.min(lambda - 0.5);
            } else if k >= s + 1 {
                margin = margin.min(0.5 - lambda);
            }
        }
    }
    Ok(CheckReport::at_least(
        "PSWF-01",
        "the eigenvalue plunge straddles k = S for S in {4, 8}",
        margin,
        0.0,
    ))
}

/// Doubling the Nyström order moves none of the retained eigenvalues by
/// more than 1e−10: the reference resolution is converged.
fn pswf_02_resolution_stability() -> Result<CheckReport> {
    let band = BandParameter::new(REFERENCE_C)?;
    let coarse = ProlateBasis::resolvable_spectrum(band, REFERENCE_M);
    let fine = ProlateBasis::resolvable_spectrum(band, 2 * REFERENCE_M);
    let retained = REFERENCE_K.min(coarse.len()).min(fine.len());
    let measured = (0..retained)
        .map(|k| (coarse[k] - fine[k]).abs())
        .fold(0.0, f64::max);
    Ok(CheckReport::at_most(
        "PSWF-02",
        "doubling the quadrature order moves no retained eigenvalue",
        measured,
        1e-10,
    ))
}

/// Two independently computable spectrum identities: the trace Σλ_k = 2c/π
/// and the Hilbert–Schmidt norm Σλ_k² = ∫∫ K(s−t)² ds dt over the core
/// square, the latter collapsed to one dimension along the difference
/// coordinate.
fn pswf_03_trace_identities() -> Result<CheckReport> {
    let band = BandParameter::new(REFERENCE_C)?;
    let c = band.c();
    let spectrum = ProlateBasis::resolvable_spectrum(band, REFERENCE_M);
    let trace: f64 = spectrum.iter().sum();
    let trace_defect = (trace - band.shannon_number()).abs();
    let sum_of_squares: f64 = spectrum.iter().map(|l| l * l).sum();
    // ∫∫_{[−1,1]²} K(s−t)² ds dt = ∫_{−2}^{2} K(u)² (2 − |u|) du, and the
    // integrand is even; Gauss nodes stay strictly inside (0, 2), so the
    // removable point u = 0 is never touched
    let (hilbert_schmidt, _) = quad::adaptive(0.0, 2.0, 1e-12, |u| {
        let kernel = (c * u).sin() / (PI * u);
        2.0 * kernel * kernel * (2.0 - u)
    });
    let measured = trace_defect.max((sum_of_squares - hilbert_schmidt).abs());
    Ok(CheckReport::at_most(
        "PSWF-03",
        "spectrum trace and Hilbert-Schmidt identities",
        measured,
        1e-8,
    ))
}

/// Orthonormality of {ψ_k} over the whole real line: the core contribution
/// by direct quadrature of the ψ's, the wings contribution through
/// Parseval's identity. Each ψ_k is band-limited with Fourier transform
/// proportional to φ_k on the band, so the whole-line inner product equals
/// the core inner product of the φ's, and the wings part is that integral
/// minus the analytic core part √(λ_j λ_k) δ_jk. (The direct oscillatory
/// tail tops out near 1e−4 for the plunge modes, whose mass sits almost
/// entirely in slowly decaying wings; the Parseval route has no tail.)
fn pswf_04_psi_orthonormality(basis: &ProlateBasis) -> Result<CheckReport> {
    let mut measured: f64 = 0.0;
    for j in 0..basis.k_count() {
        for k in j..basis.k_count() {
            let (core, _) = quad::adaptive(-1.0, 1.0, 1e-11, |s| {
                basis.eval_psi(j, s).expect("the core is inside the validity range")
                    * basis.eval_psi(k, s).expect("the core is inside the validity range")
            });
            let (parseval, _) = quad::adaptive(-1.0, 1.0, 1e-11, |s| {
                basis.eval_phi(j, s) * basis.eval_phi(k, s)
            });
            let analytic_core = if j == k { basis.lambda(k) } else { 0.0 };
            let wings = parseval - analytic_core;
            let target = if j == k { 1.0 } else { 0.0 };
            measured = measured.max((core + wings - target).abs());
        }
    }
    Ok(CheckReport::at_most(
        "PSWF-04",
        "whole-line orthonormality of the psi family",
        measured,
        1e-7,
    ))
}

// ---------------------------------------------------------------------------
// modes: field-algebra checks
// ---------------------------------------------------------------------------

fn neg_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// The finite Fourier transform maps φ_k to (−i)^k ψ_k and χ_k to
/// (−i)^k θ_k, pointwise over s ∈ [−3, 3] including the band edges.
fn mode_01_propagation_relations(basis: &ProlateBasis) -> Result<CheckReport> {
    let points = [
        -3.0,
        -2.25,
        -1.5,
        -65.0 / 64.0,
        -1.0,
        -63.0 / 64.0,
        -0.5,
        0.0,
        0.5,
        63.0 / 64.0,
        1.0,
        65.0 / 64.0,
        1.5,
        2.25,
        3.0,
    ];
    let mut measured: f64 = 0.0;
    for k in 0..basis.k_count() {
        let phase = neg_i_pow(k);
        for &s in &points {
            let t_phi = transform_mode(basis, k, ModeKind::Phi, s)?;
            let want_phi = phase * Complex64::new(basis.eval_psi(k, s)?, 0.0);
            measured = measured.max((t_phi - want_phi).norm());
            let t_chi = transform_mode(basis, k, ModeKind::Chi, s)?;
            let want_chi = phase * Complex64::new(basis.eval_theta(k, s)?, 0.0);
            measured = measured.max((t_chi - want_chi).norm());
        }
    }
    Ok(CheckReport::at_most(
        "MODE-01",
        "propagation carries phi/chi onto psi/theta with the (-i)^k phase",
        measured,
        1e-6,
    ))
}

/// Diaphragms at or above the core size leave every core coefficient
/// bit-identical: the window only touches |ξ| > 1 where the φ_k vanish.
fn mode_02_diaphragm_invariance(basis: &ProlateBasis) -> Result<CheckReport> {
    let psi0 = sample_mode(basis, 0, ModeKind::Psi, Plane::Source, 8.0, 1.0 / 64.0)?;
    let phi1 = sample_mode(basis, 1, ModeKind::Phi, Plane::Source, 8.0, 1.0 / 64.0)?;
    let theta2 = sample_mode(basis, 2, ModeKind::Theta, Plane::Source, 8.0, 1.0 / 64.0)?;
    let mixed = phi1
        .scaled(Complex64::new(0.0, 1.0))
        .try_add(&theta2.scaled(Complex64::new(0.5, 0.0)))?;
    let mut differing = 0usize;
    for field in [&psi0, &mixed] {
        let before = project_core_wings(field, basis)?;
        for ratio in [1.0, 1.5, 3.0] {
            let cut = apply_diaphragm(field, DiaphragmSpec::new(ratio)?)?;
            let after = project_core_wings(&cut, basis)?;
            for (x, y) in before.c_core().iter().zip(after.c_core()) {
                if x.re.to_bits() != y.re.to_bits() || x.im.to_bits() != y.im.to_bits() {
                    differing += 1;
                }
            }
        }
    }
    Ok(CheckReport::at_most(
        "MODE-02",
        "open diaphragms leave every core coefficient bit-identical",
        differing as f64,
        0.0,
    ))
}

/// The lens transform and the core/wings projection commute with complex
/// scaling and addition of fields.
fn mode_03_linearity(basis: &ProlateBasis) -> Result<CheckReport> {
    let alpha = Complex64::new(1.25, -0.5);
    let beta = Complex64::new(-0.75, 2.0);
    let mut measured: f64 = 0.0;
    // lens transform on core-limited fields, compared on a shared grid
    let f0 = sample_mode(basis, 0, ModeKind::Phi, Plane::Source, 2.0, 1.0 / 256.0)?;
    let f1 = sample_mode(basis, 2, ModeKind::Phi, Plane::Source, 2.0, 1.0 / 256.0)?;
    let combo = f0.scaled(alpha).try_add(&f1.scaled(beta))?;
    let grid = Some((3.0, 0.25));
    let lhs = lens_transform(&combo, basis.band(), grid)?;
    let g0 = lens_transform(&f0, basis.band(), grid)?;
    let g1 = lens_transform(&f1, basis.band(), grid)?;
    for i in 0..lhs.len() {
        let rhs = g0.values()[i] * alpha + g1.values()[i] * beta;
        measured = measured.max((lhs.values()[i] - rhs).norm());
    }
    // projection on wings-bearing fields
    let fa = sample_mode(basis, 0, ModeKind::Psi, Plane::Source, 8.0, 1.0 / 64.0)?;
    let fb = sample_mode(basis, 1, ModeKind::Theta, Plane::Source, 8.0, 1.0 / 64.0)?;
    let pc = project_core_wings(&fa.scaled(alpha).try_add(&fb.scaled(beta))?, basis)?;
    let pa = project_core_wings(&fa, basis)?;
    let pb = project_core_wings(&fb, basis)?;
    for k in 0..basis.k_count() {
        let core = pa.c_core()[k] * alpha + pb.c_core()[k] * beta;
        let wings = pa.d_wings()[k] * alpha + pb.d_wings()[k] * beta;
        measured = measured.max((pc.c_core()[k] - core).norm());
        measured = measured.max((pc.d_wings()[k] - wings).norm());
    }
    Ok(CheckReport::at_most(
        "MODE-03",
        "lens transform and projection commute with the field algebra",
        measured,
        1e-12,
    ))
}

// ---------------------------------------------------------------------------
// squeeze: quadrature-statistics checks
// ---------------------------------------------------------------------------

/// A fixed symmetric table exercising the interpolated profile family.
fn reference_table() -> Result<SqueezingProfile> {
    SqueezingProfile::tabulated(
        vec![-3.0, -1.8, -0.6, 0.6, 1.8, 3.0],
        vec![0.2, 0.9, 1.4, 1.4, 0.9, 0.2],
        vec![0.5, 0.3, 0.1, 0.1, 0.3, 0.5],
        vec![-0.2, 0.0, 0.4, 0.4, 0.0, -0.2],
    )
}

/// Kernel unitarity |U(q)|² − |V(q)|² = 1 at seeded random frequencies for
/// all three profile families.
fn sqz_01_unitarity(seed: u64) -> Result<CheckReport> {
    let profiles = [
        SqueezingProfile::constant_band(0.9, 2.0, 0.35, 0.1, 0.2)?,
        SqueezingProfile::gaussian(1.2, 1.8, -0.25, 0.05, 0.6)?,
        reference_table()?,
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x53_51_5a_01);
    let mut measured: f64 = 0.0;
    for profile in &profiles {
        for _ in 0..1000 {
            let q: f64 = rng.gen_range(-6.0..6.0);
            measured = measured.max(solve_uv(profile, q)?.unitarity_defect().abs());
        }
    }
    Ok(CheckReport::at_most(
        "SQZ-01",
        "kernel unitarity at 1000 random frequencies per profile family",
        measured,
        1e-12,
    ))
}

/// The diagonal of the assembled covariance agrees with the directly
/// integrated per-mode variances for every family — the two routes share no
/// code beyond the profile itself.
fn sqz_02_covariance_consistency(basis: &ProlateBasis) -> Result<CheckReport> {
    let profiles = [
        SqueezingProfile::constant_band(1.0, 3.0, 0.3, 0.0, 0.0)?,
        SqueezingProfile::gaussian(1.0, 2.0, 0.3, 0.0, 0.0)?,
        reference_table()?,
    ];
    let mut measured: f64 = 0.0;
    for profile in &profiles {
        let cov = full_covariance(basis, profile)?;
        for k in 0..basis.k_count() {
            let (v1, v2) = mode_variances(basis, profile, k)?;
            let (w1, w2) = cov.variance_pair(k);
            measured = measured.max((v1 - w1).abs()).max((v2 - w2).abs());
        }
    }
    Ok(CheckReport::at_most(
        "SQZ-02",
        "covariance diagonal agrees with the direct variance route",
        measured,
        1e-8,
    ))
}

/// Raising a constant squeeze magnitude strictly raises every mode's
/// anti-squeezed variance and strictly lowers the squeezed one.
fn sqz_03_monotone_in_r(basis: &ProlateBasis) -> Result<CheckReport> {
    let magnitudes = [0.25, 0.5, 1.0, 1.5, 2.0];
    let mut margin = f64::INFINITY;
    let mut previous: Option<Vec<(f64, f64)>> = None;
    for &r0 in &magnitudes {
        let profile = SqueezingProfile::constant_band(r0, 3.0, 0.0, 0.0, 0.0)?;
        let mut pairs = Vec::with_capacity(basis.k_count());
        for k in 0..basis.k_count() {
            let (v1, v2) = mode_variances(basis, &profile, k)?;
            // A_{2k} is squeezed on even modes, A_{1k} on odd ones
            let (anti, squeezed) = if k % 2 == 0 { (v1, v2) } else { (v2, v1) };
            pairs.push((anti, squeezed));
        }
        if let Some(prev) = &previous {
            for (now, before) in pairs.iter().zip(prev) {
                margin = margin.min(now.0 - before.0).min(before.1 - now.1);
            }
        }
        previous = Some(pairs);
    }
    Ok(CheckReport::at_least(
        "SQZ-03",
        "variances move strictly monotonely with the squeeze magnitude",
        margin,
        0.0,
    ))
}

/// Widening a constant squeezed band never raises any mode's minimum
/// variance: more of the mode's spectral mass gets squeezed.
fn sqz_04_band_overlap_order(basis: &ProlateBasis) -> Result<CheckReport> {
    let cutoffs = [0.5, 1.0, 2.0, 4.0, 8.0];
    let mut measured = f64::NEG_INFINITY;
    let mut previous: Option<Vec<f64>> = None;
    for &q_c in &cutoffs {
        let profile = SqueezingProfile::constant_band(1.0, q_c, 0.0, 0.0, 0.0)?;
        let mut minima = Vec::with_capacity(basis.k_count());
        for k in 0..basis.k_count() {
            let (v1, v2) = mode_variances(basis, &profile, k)?;
            minima.push(v1.min(v2));
        }
        if let Some(prev) = &previous {
            for (now, before) in minima.iter().zip(prev) {
                measured = measured.max(now - before);
            }
        }
        previous = Some(minima);
    }
    Ok(CheckReport::at_most(
        "SQZ-04",
        "wider squeezed bands never raise any mode's minimum variance",
        measured,
        0.0,
    ))
}

/// Heisenberg floor: the per-mode uncertainty products of randomized
/// profiles never dip below 1/16, and every covariance passes the
/// positive-definiteness gate built into its constructor.
fn sqz_05_heisenberg_floor(basis: &ProlateBasis, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x53_51_5a_05);
    let mut min_product = f64::INFINITY;
    for index in 0..20 {
        let r0 = rng.gen_range(0.15..2.0);
        let q_c = rng.gen_range(0.8..5.0);
        let theta0 = rng.gen_range(-1.2..1.2);
        let beta = rng.gen_range(-0.15..0.15);
        let phi0 = rng.gen_range(-PI..PI);
        let profile = match index % 3 {
            0 => SqueezingProfile::constant_band(r0, q_c, theta0, beta, phi0)?,
            1 => SqueezingProfile::gaussian(r0, q_c, theta0, beta, phi0)?,
            _ => {
                let r = [rng.gen_range(0.0..1.8), rng.gen_range(0.0..1.8), rng.gen_range(0.0..1.8)];
                let t = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                SqueezingProfile::tabulated(
                    vec![-3.0, -1.5, -0.5, 0.5, 1.5, 3.0],
                    vec![r[2], r[1], r[0], r[0], r[1], r[2]],
                    vec![t[2], t[1], t[0], t[0], t[1], t[2]],
                    vec![p[2], p[1], p[0], p[0], p[1], p[2]],
                )?
            }
        };
        // construction runs the positive-definiteness gate; reaching the
        // products at all certifies the covariance is a physical state
        let cov = full_covariance(basis, &profile)?;
        for product in cov.uncertainty_products() {
            min_product = min_product.min(product);
        }
    }
    Ok(CheckReport::at_least(
        "SQZ-05",
        "uncertainty products of 20 random profiles hold the Heisenberg floor",
        min_product,
        0.0625 - 1e-10,
    ))
}

// ---------------------------------------------------------------------------
// budget checks
// ---------------------------------------------------------------------------

/// The textbook configuration used by the budget checks (S = 200).
fn reference_config() -> Result<ImagingConfig> {
    ImagingConfig::new(2.0e-3, 2.0e-3, 5.0e-3, 0.5e-6, 0.1)
}

/// The budget margin N/S equals the band ratio q_c/c identically, and the
/// matched point q_c = c lands on N = S bit-for-bit.
fn bud_01_margin_identity() -> Result<CheckReport> {
    let configs = [
        reference_config()?,
        ImagingConfig::new(0.77e-3, 1.0e-3, 3.3e-3, 633.0e-9, 0.19)?,
    ];
    let ratios = [1e-3, 0.25, 1.0, 2.5, 10.0, 1e3];
    let mut measured: f64 = 0.0;
    for cfg in &configs {
        let c = cfg.c();
        for &ratio in &ratios {
            let profile = SqueezingProfile::constant_band(1.0, ratio * c, 0.0, 0.0, 0.0)?;
            let report = budget(cfg, &profile)?;
            measured = measured.max((report.margin - report.q_c / c).abs());
            if ratio == 1.0 && report.n_modes.to_bits() != report.shannon.to_bits() {
                // the matched band must reproduce the Shannon number exactly,
                // not merely within tolerance
                measured = f64::INFINITY;
            }
        }
    }
    Ok(CheckReport::at_most(
        "BUD-01",
        "the budget margin equals the band ratio identically",
        measured,
        1e-12,
    ))
}

/// The verdict ladder is monotone along a widening band and spans the full
/// range from insufficient to sufficient.
fn bud_02_verdict_monotone() -> Result<CheckReport> {
    let cfg = reference_config()?;
    let c = cfg.c();
    let ratios = [0.05, 0.5, 0.999, 1.0, 2.0, 9.5, 10.0, 40.0];
    let mut verdicts = Vec::with_capacity(ratios.len());
    for &ratio in &ratios {
        let profile = SqueezingProfile::constant_band(1.0, ratio * c, 0.0, 0.0, 0.0)?;
        verdicts.push(budget(&cfg, &profile)?.verdict);
    }
    let mut violations = 0usize;
    for pair in verdicts.windows(2) {
        if pair[1] < pair[0] {
            violations += 1;
        }
    }
    if verdicts.first() != Some(&Verdict::Insufficient)
        || verdicts.last() != Some(&Verdict::Sufficient)
    {
        violations += 1;
    }
    Ok(CheckReport::at_most(
        "BUD-02",
        "the verdict is monotone in the band and spans the ladder",
        violations as f64,
        0.0,
    ))
}

/// Spectral mass of ψ_k inside |u| ≤ u_c, split at the core edge where the
/// evaluation branches change character.
fn band_mass(basis: &ProlateBasis, k: usize, u_c: f64) -> f64 {
    let mut panels = vec![(0.0, u_c.min(1.0))];
    if u_c > 1.0 {
        panels.push((1.0, u_c));
    }
    let mut mass = 0.0;
    for (a, b) in panels {
        let (value, _) = quad::adaptive(a, b, 1e-11, |u| {
            let p = basis.eval_psi(k, u).expect("inside the evaluation validity range");
            p * p
        });
        mass += value;
    }
    2.0 * mass
}

/// Band coverage predicts the variances: for a flat band of cutoff q_c the
/// minimum variance is exactly ¼[1 − m_k(1 − e^{−2r})] with m_k the mode's
/// spectral mass inside the band. In particular modes with under 10% of
/// their mass covered stay above 0.2, and modes with ≥ 99.3% coverage sit
/// within 5% of the flat-squeezing floor e^{−2r}/4.
fn bud_03_overlap_variance_tie(basis: &ProlateBasis) -> Result<CheckReport> {
    let r0: f64 = 1.0;
    let floor = 0.25 * (-2.0 * r0).exp();
    let squeezable = 1.0 - (-2.0 * r0).exp();
    let c = basis.c();
    let mut measured: f64 = 0.0;
    for &scale in &[0.5, 3.0, 10.0] {
        let profile = SqueezingProfile::constant_band(r0, scale * c, 0.0, 0.0, 0.0)?;
        for k in 0..basis.k_count() {
            let mass = band_mass(basis, k, scale);
            let (v1, v2) = mode_variances(basis, &profile, k)?;
            let minimum = v1.min(v2);
            let predicted = 0.25 * (1.0 - mass * squeezable);
            measured = measured.max((minimum - predicted).abs());
            // the two qualitative clauses, measured as violation depths so a
            // breach shows up in the same defect units
            if mass < 0.1 {
                measured = measured.max(0.2 - minimum);
            }
            if mass >= 0.993 {
                measured = measured.max(minimum - 1.05 * floor);
            }
        }
    }
    Ok(CheckReport::at_most(
        "BUD-03",
        "band coverage predicts the measured minimum variances",
        measured,
        2e-6,
    ))
}

// ---------------------------------------------------------------------------
// homodyne checks
// ---------------------------------------------------------------------------

/// The covariance a Monte-Carlo state is drawn from in the MC checks.
fn sampling_state(basis: &ProlateBasis) -> Result<ModeCovariance> {
    full_covariance(basis, &SqueezingProfile::gaussian(1.0, 2.0, 0.3, 0.0, 0.0)?)
}

/// Whitened draws pass a χ² whiteness test at the 1e−3 significance level,
/// for both the vacuum state and a structured squeezed state.
fn mc_01_whiteness(basis: &ProlateBasis, seed: u64) -> Result<CheckReport> {
    let states = [
        full_covariance(basis, &SqueezingProfile::vacuum())?,
        sampling_state(basis)?,
    ];
    let shots = 50_000;
    let mut worst: f64 = 0.0;
    for (index, cov) in states.iter().enumerate() {
        let batch = sample(cov, None, shots, seed ^ (0x6d_63_01 + index as u64))?;
        let factor = homodyne::cholesky_lower(cov.rows())?;
        let dim = 2 * cov.k_count();
        let mut statistic = 0.0;
        let mut white = vec![0.0; dim];
        for shot in 0..shots {
            let x = batch.shot(shot);
            for row in 0..dim {
                let mut value = x[row];
                for col in 0..row {
                    value -= factor[row][col] * white[col];
                }
                white[row] = value / factor[row][row];
                statistic += white[row] * white[row];
            }
        }
        // Σ wᵀw ~ χ²(n·2K) ≈ N(dof, 2·dof); two-sided z bound at 1e−3
        let dof = (shots * dim) as f64;
        worst = worst.max((statistic - dof).abs() / (2.0 * dof).sqrt());
    }
    Ok(CheckReport::at_most(
        "MC-01",
        "whitened draws pass the chi-square whiteness test",
        worst,
        3.2905,
    ))
}

/// Equal seeds reproduce batches bit-for-bit, and extending a batch never
/// rewrites the shots already drawn.
fn mc_02_determinism(basis: &ProlateBasis, seed: u64) -> Result<CheckReport> {
    let cov = sampling_state(basis)?;
    // spans three sample blocks, so the per-block stream policy is exercised
    let long = sample(&cov, None, 9000, seed)?;
    let again = sample(&cov, None, 9000, seed)?;
    let short = sample(&cov, None, 3000, seed)?;
    let mut differing = 0usize;
    for (a, b) in long.draws().iter().zip(again.draws()) {
        if a.to_bits() != b.to_bits() {
            differing += 1;
        }
    }
    for (a, b) in long.draws().iter().zip(short.draws()) {
        if a.to_bits() != b.to_bits() {
            differing += 1;
        }
    }
    Ok(CheckReport::at_most(
        "MC-02",
        "equal seeds reproduce homodyne batches bit for bit",
        differing as f64,
        0.0,
    ))
}

/// Displacing the state shifts means only: every empirical second moment of
/// a displaced batch matches the undisplaced one drawn from the same seed.
fn mc_03_displacement_invariance(basis: &ProlateBasis, seed: u64) -> Result<CheckReport> {
    let cov = sampling_state(basis)?;
    let dim = 2 * cov.k_count();
    let offsets: Vec<f64> = (0..dim).map(|i| 0.25 * i as f64 - 1.0).collect();
    let shots = 60_000;
    let plain = sample(&cov, None, shots, seed ^ 0x6d_63_03)?;
    let shifted = sample(&cov, Some(&offsets), shots, seed ^ 0x6d_63_03)?;
    let base = empirical_covariance(&plain)?;
    let moved = empirical_covariance(&shifted)?;
    let mut measured: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            measured = measured.max((base.cov[i][j] - moved.cov[i][j]).abs());
        }
    }
    Ok(CheckReport::at_most(
        "MC-03",
        "displacement leaves every empirical second moment unchanged",
        measured,
        1e-12,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    /// One registry run shared by the assertions below; the seed is
    /// arbitrary but fixed so failures are reproducible.
    fn reports() -> &'static [CheckReport] {
        static REPORTS: OnceLock<Vec<CheckReport>> = OnceLock::new();
        REPORTS.get_or_init(|| run_all(20260819).expect("the registry must run to completion"))
    }

    #[test]
    fn every_registered_check_passes() {
        for report in reports() {
            assert!(report.passed, "{}", report.line());
        }
    }

    #[test]
    fn the_registry_covers_every_module_with_stable_ids() {
        let ids: Vec<&str> = reports().iter().map(|r| r.id).collect();
        assert_eq!(ids, CHECK_IDS);
        for prefix_count in [("PSWF-", 4), ("MODE-", 3), ("SQZ-", 5), ("BUD-", 3), ("MC-", 3)] {
            let found = ids.iter().filter(|id| id.starts_with(prefix_count.0)).count();
            assert_eq!(found, prefix_count.1, "{} checks", prefix_count.0);
        }
    }

    #[test]
    fn report_lines_pair_the_measured_value_with_its_bound() {
        let pass = CheckReport::at_most("XX-01", "a defect stays small", 1e-9, 1e-6);
        assert!(pass.passed);
        let line = pass.line();
        assert!(line.starts_with("[XX-01] PASS measured=1.000000e-9 <= bound=1.000000e-6"));
        assert!(line.ends_with("a defect stays small"));
        let fail = CheckReport::at_least("XX-02", "a margin stays large", 0.1, 0.5);
        assert!(!fail.passed);
        assert!(fail.line().contains("FAIL measured=1.000000e-1 >= bound=5.000000e-1"));
    }

    #[test]
    fn the_registry_is_deterministic_for_a_fixed_seed() {
        let first = run_all(7).unwrap();
        let second = run_all(7).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.measured.to_bits(), b.measured.to_bits(), "{}", a.id);
            assert_eq!(a.passed, b.passed);
        }
    }
}
