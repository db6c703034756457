//! Prolate spheroidal wave functions of a band-limited 1-D imaging system.
//!
//! The object core occupies the dimensionless interval [−1, 1] and the system
//! transmits spatial frequencies up to the space-bandwidth product `c`. The
//! core-restricted modes φ_k solve the sinc-kernel eigenproblem
//!
//! ```text
//!   ∫_{−1}^{1} sin(c (s − s')) / (π (s − s')) · φ_k(s') ds' = λ_k φ_k(s),
//! ```
//!
//! with 1 > λ_0 > λ_1 > … > 0. The full-line modes are normalized to unit L²
//! norm on (−∞, ∞) and split into core and wings parts,
//!
//! ```text
//!   ψ_k = √λ_k · φ_k + √(1 − λ_k) · χ_k ,
//!   θ_k = √(1 − λ_k) · φ_k − √λ_k · χ_k ,
//! ```
//!
//! where φ_k vanishes outside [−1, 1], χ_k vanishes inside, and both are unit
//! normalized on their own supports. ψ_k reproduces itself under the finite
//! Fourier transform (Slepian–Pollak):
//!
//! ```text
//!   ∫_{−1}^{1} ψ_k(ξ) e^{−i q ξ} dξ = (−i)^k √(2π λ_k / c) · ψ_k(q / c),
//! ```
//!
//! which both defines the evaluation of ψ_k outside the core and is re-checked
//! numerically as an invariant.
//!
//! Construction is a Nyström discretization on a Gauss–Legendre rule: the
//! symmetrized kernel matrix B_ij = √w_i K(x_i, x_j) √w_j shares eigenvalues
//! with the integral operator, and its orthonormal eigenvectors give the
//! φ_k samples at the nodes. Because the kernel spectrum plunges below
//! machine precision past k ≈ 2c/π, the eigenvectors of the last resolvable
//! modes are then re-derived through the commuting Sturm–Liouville operator
//! (Legendre–Galerkin, well-gapped for every k) so the stored samples stay
//! machine-clean; an independent implementation of the same route backs the
//! spectrum up in the test suite.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Deserialize;

use crate::error::Error;
use crate::serialize::{fmt17, fmt17_array, fmt17_matrix};
use crate::Result;

/// Eigenvalues below this are numerical noise in double precision and are not
/// retained as modes.
pub const LAMBDA_FLOOR: f64 = 1e-15;

/// Convergence tolerance between the order-M and order-2M spectra.
pub const EIGENVALUE_TOL: f64 = 1e-10;

/// Orthonormality tolerance of the stored core samples under the stored rule.
pub const TOL_GRAM: f64 = 1e-10;

/// When 1 − λ_k is below this, the wings part χ_k is numerically
/// indeterminate (the mode is fully transmitted) and is treated as zero.
pub const CHI_CONDITIONING_FLOOR: f64 = 1e-14;

/// The space-bandwidth product of the imaging system.
///
/// For a pupil of size d, object of size X, wavelength λ and focal length f,
/// c = (π/2) · dX/(λf); the Shannon number S = 2c/π counts the modes the
/// system transmits with near-unit eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParameter {
    c: f64,
}

impl BandParameter {
    /// Validate and wrap a band value. Values below 0.1 are allowed but
    /// flagged: the whole spectrum sits far below 1 and the basis carries
    /// almost no transmitted mode.
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::invalid("c", format!("got {c}, need c > 0")));
        }
        if c < 0.1 {
            log::warn!("band c = {c} < 0.1: all eigenvalues are far below 1, the basis is nearly degenerate");
        }
        Ok(BandParameter { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Shannon number S = 2c/π.
    pub fn shannon_number(&self) -> f64 {
        2.0 * self.c / std::f64::consts::PI
    }

    /// True when the band is so small that no mode is usefully transmitted.
    pub fn is_degenerate(&self) -> bool {
        self.c < 0.1
    }
}

/// The band-limiting sinc kernel sin(c d)/(π d), finite on the diagonal.
pub(crate) fn sinc_kernel(c: f64, d: f64) -> f64 {
    let u = c * d;
    if u.abs() < 1e-4 {
        // series around the diagonal keeps full precision where sin(u)/u loses it
        c / std::f64::consts::PI * (1.0 - u * u / 6.0 * (1.0 - u * u / 20.0))
    } else {
        u.sin() / (std::f64::consts::PI * d)
    }
}

/// The prolate mode basis at a fixed band: eigenvalues, the quadrature rule
/// they were built on, and the φ_k node samples that make every mode function
/// evaluable anywhere on the real line.
#[derive(Debug, Clone)]
pub struct ProlateBasis {
    band: BandParameter,
    /// Number of retained modes K.
    k_count: usize,
    /// Gauss–Legendre order M of the stored rule.
    m: usize,
    /// λ_0 > λ_1 > … > λ_{K−1}, all in (0, 1).
    lambdas: Vec<f64>,
    /// Rule nodes on [−1, 1].
    nodes: Vec<f64>,
    /// Rule weights.
    weights: Vec<f64>,
    /// core_samples[k][i] = φ_k(x_i), unit L² norm on [−1, 1], sign fixed so
    /// that φ_k(1) > 0.
    core_samples: Vec<Vec<f64>>,
    /// Barycentric interpolation weights of the rule nodes (derived from
    /// `nodes`, never serialized).
    bary_weights: Vec<f64>,
    /// φ_k(1) for every retained mode (used by truncation estimates).
    phi_at_one: Vec<f64>,
}

/// Normalization tag carried by exported documents.
pub const NORM_CONVENTION: &str = "unit L2 norm on (-inf, inf)";

/// Raw Nyström solve at order m: descending eigenvalues and node samples.
fn nystrom_solve(c: f64, m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let rule = crate::quad::GaussLegendre::new(m);
    let (x, w) = (rule.nodes, rule.weights);
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = sw[i] * sinc_kernel(c, x[i] - x[j]) * sw[j];
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &bb| {
        eig.eigenvalues[bb]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let lambdas: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let samples: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..m).map(|i| eig.eigenvectors[(i, col)] / sw[i]).collect())
        .collect();
    (lambdas, x, w, samples)
}

/// Node samples of the first `k_count` prolate eigenfunctions through the
/// commuting Sturm–Liouville operator −[(1−x²)u′]′ + c²x² u = μ u, solved by
/// Legendre–Galerkin truncation.
///
/// The sinc kernel and this differential operator share eigenfunctions, but
/// their conditioning differs decisively: kernel eigenvalues plunge below
/// machine precision past k ≈ 2c/π, so the Nyström eigenvectors of the last
/// resolvable modes absorb O(ε/λ_k) of the near-degenerate junk cluster,
/// while the differential spectrum μ_k ≈ k(k+1) keeps O(k) gaps for every k
/// and its eigenvectors stay clean to machine precision. In the normalized
/// Legendre basis P̄_l the operator is symmetric pentadiagonal and splits by
/// parity into two tridiagonal blocks: diagonal l(l+1) + c²(α_l² + α_{l−1}²)
/// and coupling c² α_l α_{l+1} between l and l+2, with
/// α_l = (l+1)/√((2l+1)(2l+3)) from the three-term recurrence
/// x P̄_l = α_l P̄_{l+1} + α_{l−1} P̄_{l−1}. By Sturm oscillation the k-th
/// prolate is the ⌊k/2⌋-th ascending eigenvector of the parity-(k mod 2)
/// block; its Legendre coefficients decay superexponentially past
/// l ≈ k + c, so a modest truncation order is exact in double precision.
fn galerkin_node_samples(c: f64, k_count: usize, nodes: &[f64]) -> Vec<Vec<f64>> {
    let l_max = 2 * (k_count + (c.ceil() as usize) + 30);
    let alpha = |l: usize| -> f64 {
        let lf = l as f64;
        (lf + 1.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0)).sqrt()
    };
    // normalized-Legendre values P̄_l(x_i) for l = 0..=l_max+1
    let mut pbar = vec![vec![0.0f64; nodes.len()]; l_max + 2];
    for (i, &x) in nodes.iter().enumerate() {
        let mut p_prev = 1.0f64; // P_0
        let mut p_cur = x; // P_1
        pbar[0][i] = (0.5f64).sqrt();
        pbar[1][i] = (1.5f64).sqrt() * x;
        for l in 1..=l_max {
            let lf = l as f64;
            let p_next = ((2.0 * lf + 1.0) * x * p_cur - lf * p_prev) / (lf + 1.0);
            pbar[l + 1][i] = (lf + 1.5).sqrt() * p_next;
            p_prev = p_cur;
            p_cur = p_next;
        }
    }
    let mut out = vec![Vec::new(); k_count];
    for parity in 0..2usize.min(k_count) {
        let ls: Vec<usize> = (parity..=l_max).step_by(2).collect();
        let dim = ls.len();
        let mut t = DMatrix::<f64>::zeros(dim, dim);
        for (j, &l) in ls.iter().enumerate() {
            let lf = l as f64;
            let a_prev = if l == 0 { 0.0 } else { alpha(l - 1) };
            t[(j, j)] = lf * (lf + 1.0) + c * c * (alpha(l).powi(2) + a_prev.powi(2));
            if j + 1 < dim {
                let v = c * c * alpha(l) * alpha(l + 1);
                t[(j, j + 1)] = v;
                t[(j + 1, j)] = v;
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut k = parity;
        for &col in &order {
            if k >= k_count {
                break;
            }
            let mut row = vec![0.0f64; nodes.len()];
            for (j, &l) in ls.iter().enumerate() {
                let beta = eig.eigenvectors[(j, col)];
                for (i, v) in row.iter_mut().enumerate() {
                    *v += beta * pbar[l][i];
                }
            }
            out[k] = row;
            k += 2;
        }
    }
    out
}

/// Barycentric interpolation weights β_i = 1/∏_{j≠i}(x_i − x_j) for an
/// arbitrary node set, accumulated in log-magnitude so the M ≈ 200 factor
/// products neither overflow nor underflow, and normalized so max |β| = 1
/// (the barycentric ratio is scale invariant).
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut log_mag = vec![0.0f64; m];
    let mut sign = vec![1.0f64; m];
    for i in 0..m {
        for j in 0..m {
            if j != i {
                let d = nodes[i] - nodes[j];
                log_mag[i] -= d.abs().ln();
                if d < 0.0 {
                    sign[i] = -sign[i];
                }
            }
        }
    }
    let top = log_mag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..m).map(|i| sign[i] * (log_mag[i] - top).exp()).collect()
}

impl ProlateBasis {
    /// Build the first `k_count` modes at band `band` on an order-`m` rule.
    ///
    /// The solve is repeated at order 2m and the two spectra must agree to
    /// [`EIGENVALUE_TOL`]; modes whose eigenvalue sits below [`LAMBDA_FLOOR`]
    /// are not resolvable in double precision and asking for them is an error
    /// that names the largest safe K. The kernel solve fixes the spectrum;
    /// the stored eigenvector samples are refined through the commuting
    /// differential operator (see [`galerkin_node_samples`]), which
    /// represents the same eigenfunctions without the O(ε/λ_k) junk-cluster
    /// mixing the kernel eigenproblem suffers for its smallest eigenvalues.
    pub fn build(band: BandParameter, k_count: usize, m: usize) -> Result<Self> {
        if k_count < 1 {
            return Err(Error::invalid("K", "need at least one mode"));
        }
        let recommended = (4 * k_count).max((4.0 * band.c()).ceil() as usize);
        if m < recommended {
            log::warn!(
                "quadrature order M = {m} is below the recommended {recommended} for K = {k_count}, c = {}",
                band.c()
            );
        }
        if m < 2 * k_count {
            return Err(Error::invalid(
                "M",
                format!("order {m} cannot resolve {k_count} modes; need M >= {}", 2 * k_count),
            ));
        }
        let c = band.c();
        let (lambdas, nodes, weights, mut samples) = nystrom_solve(c, m);
        let (lambdas2, ..) = nystrom_solve(c, 2 * m);

        let resolvable = lambdas
            .iter()
            .take_while(|&&l| l >= LAMBDA_FLOOR)
            .count()
            .min(lambdas2.iter().take_while(|&&l| l >= LAMBDA_FLOOR).count());
        if k_count > resolvable {
            return Err(Error::UnresolvableModes {
                requested: k_count,
                resolvable,
                floor: LAMBDA_FLOOR,
                c,
            });
        }

        let max_shift = (0..k_count)
            .map(|k| (lambdas[k] - lambdas2[k]).abs())
            .fold(0.0f64, f64::max);
        if max_shift > EIGENVALUE_TOL {
            return Err(Error::EigenvalueConvergence {
                m,
                m2: 2 * m,
                max_shift,
                tol: EIGENVALUE_TOL,
                spectrum_m: lambdas[..k_count].to_vec(),
                spectrum_m2: lambdas2[..k_count].to_vec(),
            });
        }
        for k in 0..k_count.saturating_sub(1) {
            if lambdas[k] <= lambdas[k + 1] {
                return Err(Error::invalid(
                    "spectrum",
                    format!("eigenvalues not strictly decreasing at k = {k}; increase M"),
                ));
            }
        }

        let lambdas: Vec<f64> = lambdas[..k_count].to_vec();
        samples.truncate(k_count);

        // Replace each Nyström eigenvector by its commuting-operator
        // refinement (same eigenfunction, machine-clean for every k even
        // where the kernel spectrum is nearly degenerate), normalized under
        // the stored rule and sign-aligned with the vector it replaces.
        let refined = galerkin_node_samples(c, k_count, &nodes);
        for (k, row) in refined.into_iter().enumerate() {
            let mut norm2 = 0.0;
            let mut overlap = 0.0;
            for i in 0..m {
                norm2 += weights[i] * row[i] * row[i];
                overlap += weights[i] * row[i] * samples[k][i];
            }
            let cosine = overlap / norm2.sqrt();
            assert!(
                cosine.abs() > 0.99,
                "commuting-operator mode {k} does not match the kernel eigenvector \
                 (overlap {cosine:.6}); mode ordering is inconsistent"
            );
            let scale = cosine.signum() / norm2.sqrt();
            for (dst, v) in samples[k].iter_mut().zip(row) {
                *dst = scale * v;
            }
        }

        let bary_weights = barycentric_weights(&nodes);
        let mut basis = ProlateBasis {
            band,
            k_count,
            m,
            lambdas,
            nodes,
            weights,
            core_samples: samples,
            bary_weights,
            phi_at_one: Vec::new(),
        };
        basis.canonicalize_signs();
        Ok(basis)
    }

    /// Fix the sign convention φ_k(1) > 0 and cache the edge values.
    fn canonicalize_signs(&mut self) {
        self.phi_at_one = Vec::with_capacity(self.k_count);
        for k in 0..self.k_count {
            let mut v = self.eval_phi(k, 1.0);
            if v < 0.0 {
                for s in &mut self.core_samples[k] {
                    *s = -*s;
                }
                v = -v;
            }
            self.phi_at_one.push(v);
        }
    }

    /// The full resolvable spectrum at this band and order (all eigenvalues
    /// above [`LAMBDA_FLOOR`], descending), independent of any retained K.
    pub fn resolvable_spectrum(band: BandParameter, m: usize) -> Vec<f64> {
        let (lambdas, ..) = nystrom_solve(band.c(), m);
        lambdas
            .into_iter()
            .take_while(|&l| l >= LAMBDA_FLOOR)
            .collect()
    }

    pub fn band(&self) -> BandParameter {
        self.band
    }

    pub fn c(&self) -> f64 {
        self.band.c()
    }

    pub fn k_count(&self) -> usize {
        self.k_count
    }

    pub fn quadrature_order(&self) -> usize {
        self.m
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.lambdas[k]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn core_samples(&self, k: usize) -> &[f64] {
        &self.core_samples[k]
    }

    /// φ_k(1), the core-edge value (positive by the sign convention).
    pub fn phi_at_one(&self, k: usize) -> f64 {
        self.phi_at_one[k]
    }

    /// Evaluation handle for mode k.
    pub fn mode(&self, k: usize) -> ModeFunction<'_> {
        assert!(k < self.k_count, "mode index {k} out of range");
        ModeFunction { basis: self, k }
    }

    /// Largest |s| at which the oscillatory evaluation of ψ_k is still
    /// trustworthy: the order-M rule resolves e^{−i c s x} on [−1, 1] with a
    /// comfortable margin up to roughly 5 nodes per oscillation period.
    pub fn eval_validity_bound(&self) -> f64 {
        0.4 * std::f64::consts::PI * self.m as f64 / self.c()
    }

    /// Core interpolation of φ_k at any |s| ≤ 1 through the stored node
    /// samples, using the (second) barycentric form on the rule nodes. Zero
    /// outside the core by definition.
    ///
    /// φ_k is entire, so the degree-(M−1) interpolant through M Gauss nodes
    /// is exact far beyond double precision and the evaluation is uniformly
    /// stable in k. (The alternative Nyström back-interpolation
    /// φ_k = (1/λ_k) ∫ K φ_k amplifies node-sample rounding by 1/λ_k, which
    /// for the last resolvable modes costs six or more digits.)
    pub fn eval_phi(&self, k: usize, s: f64) -> f64 {
        if s.abs() > 1.0 {
            return 0.0;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.m {
            let d = s - self.nodes[i];
            if d == 0.0 {
                return self.core_samples[k][i];
            }
            let t = self.bary_weights[i] / d;
            num += t * self.core_samples[k][i];
            den += t;
        }
        num / den
    }

    /// ψ_k(s) anywhere on the real line.
    ///
    /// Inside the core this is √λ_k φ_k(s). Outside, the finite-Fourier
    /// self-reproduction property is inverted: with the core samples exact at
    /// the rule nodes,
    ///
    /// ```text
    ///   ψ_k(s) = Re[ i^k √(c/2π) Σ_i w_i φ_k(x_i) e^{−i c s x_i} ],
    /// ```
    ///
    /// which reduces to a single cosine (even k) or sine (odd k) sum. The sum
    /// loses accuracy once c|s| outruns the rule's oscillatory resolution, so
    /// arguments beyond [`eval_validity_bound`](Self::eval_validity_bound)
    /// are an error.
    pub fn eval_psi(&self, k: usize, s: f64) -> Result<f64> {
        if s.abs() <= 1.0 {
            return Ok(self.lambdas[k].sqrt() * self.eval_phi(k, s));
        }
        let bound = self.eval_validity_bound();
        if s.abs() > bound {
            return Err(Error::EvalOutOfRange {
                s_abs: s.abs(),
                bound,
                m: self.m,
            });
        }
        Ok(self.psi_wings(k, s))
    }

    /// The oscillatory-sum branch of ψ_k without the validity check (callers
    /// inside the crate keep their arguments bounded by construction).
    fn psi_wings(&self, k: usize, s: f64) -> f64 {
        let c = self.c();
        let mut acc = 0.0;
        match k % 2 {
            0 => {
                for i in 0..self.m {
                    acc += self.weights[i] * self.core_samples[k][i] * (c * s * self.nodes[i]).cos();
                }
            }
            _ => {
                for i in 0..self.m {
                    acc += self.weights[i] * self.core_samples[k][i] * (c * s * self.nodes[i]).sin();
                }
            }
        }
        let sign = if k % 4 >= 2 { -1.0 } else { 1.0 };
        sign * (c / (2.0 * std::f64::consts::PI)).sqrt() * acc
    }

    /// χ_k(s): the wings complement, (ψ_k − √λ_k φ_k)/√(1 − λ_k) — zero inside
    /// the core, ψ_k(s)/√(1 − λ_k) outside. When 1 − λ_k is below
    /// [`CHI_CONDITIONING_FLOOR`] the division is meaningless (the mode is
    /// fully transmitted) and χ_k is reported as identically zero with a
    /// warning.
    /// At the jump points s = ±1 the value is the jump midpoint
    /// ½ √λ_k φ_k(±1)/√(1 − λ_k) (Dirichlet convention), which is the value
    /// the Fourier transform of χ_k converges back to; note the pointwise
    /// identities ψ = √λ φ + √(1−λ) χ and θ = √(1−λ) φ − √λ χ hold everywhere
    /// *except* exactly at the jump, as always with one-sided discontinuities.
    pub fn eval_chi(&self, k: usize, s: f64) -> Result<f64> {
        if s.abs() < 1.0 {
            return Ok(0.0);
        }
        let one_minus = 1.0 - self.lambdas[k];
        if one_minus < CHI_CONDITIONING_FLOOR {
            log::warn!(
                "1 - lambda_{k} = {one_minus:.2e} is below the conditioning floor; treating chi_{k} as 0"
            );
            return Ok(0.0);
        }
        if s.abs() == 1.0 {
            // one-sided limits are 0 (core side) and √λ φ(±1)/√(1−λ) (wings
            // side, by continuity of ψ); return their mean
            return Ok(0.5 * self.lambdas[k].sqrt() * self.eval_phi(k, s) / one_minus.sqrt());
        }
        Ok(self.eval_psi(k, s)? / one_minus.sqrt())
    }

    /// θ_k(s) = √(1 − λ_k) φ_k(s) − √λ_k χ_k(s), the unit-norm complement of
    /// ψ_k spanning the same core/wings pair. Like χ_k it jumps at s = ±1 and
    /// takes the midpoint value φ_k(±1)(1 − 2λ_k)/(2√(1 − λ_k)) there.
    pub fn eval_theta(&self, k: usize, s: f64) -> Result<f64> {
        let lam = self.lambdas[k];
        if s.abs() < 1.0 {
            // clamp guards eigenvalues that round to 1.0 at large bands
            return Ok((1.0 - lam).max(0.0).sqrt() * self.eval_phi(k, s));
        }
        if s.abs() == 1.0 {
            // mean of the core-side limit √(1−λ) φ(±1) and the wings-side
            // limit −√λ χ(±1⁺); eval_chi already returns ½ χ(±1⁺) here
            let core_side = (1.0 - lam).max(0.0).sqrt() * self.eval_phi(k, s);
            return Ok(0.5 * core_side - lam.sqrt() * self.eval_chi(k, s)?);
        }
        Ok(-lam.sqrt() * self.eval_chi(k, s)?)
    }

    /// Serialize the basis as a JSON document with 17-significant-digit
    /// reals (lossless on re-parse).
    pub fn to_json(&self) -> String {
        format!(
            "{{\"c\":{},\"K\":{},\"M\":{},\"norm_convention\":{},\"lambdas\":{},\"nodes\":{},\"weights\":{},\"core_samples\":{}}}",
            fmt17(self.c()),
            self.k_count,
            self.m,
            serde_json::to_string(NORM_CONVENTION).unwrap(),
            fmt17_array(&self.lambdas),
            fmt17_array(&self.nodes),
            fmt17_array(&self.weights),
            fmt17_matrix(&self.core_samples),
        )
    }

    /// Re-load a basis from [`to_json`](Self::to_json) output, re-validating
    /// shape, eigenvalue ordering and the Gram identity of the stored samples.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            c: f64,
            #[serde(rename = "K")]
            k: usize,
            #[serde(rename = "M")]
            m: usize,
            #[allow(dead_code)]
            norm_convention: Option<String>,
            lambdas: Vec<f64>,
            nodes: Vec<f64>,
            weights: Vec<f64>,
            core_samples: Vec<Vec<f64>>,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        let band = BandParameter::new(doc.c)?;
        if doc.lambdas.len() != doc.k
            || doc.core_samples.len() != doc.k
            || doc.nodes.len() != doc.m
            || doc.weights.len() != doc.m
            || doc.core_samples.iter().any(|row| row.len() != doc.m)
        {
            return Err(Error::Serialization(
                "inconsistent K/M and array shapes in basis document".into(),
            ));
        }
        for k in 0..doc.k {
            let l = doc.lambdas[k];
            // the upper bound admits eigenvalues that round to exactly 1.0
            if !(l > 0.0 && l <= 1.0) || (k > 0 && doc.lambdas[k - 1] <= l) {
                return Err(Error::Serialization(format!(
                    "eigenvalues must lie in (0,1] and decrease strictly; offending index {k}"
                )));
            }
        }
        let bary_weights = barycentric_weights(&doc.nodes);
        let mut basis = ProlateBasis {
            band,
            k_count: doc.k,
            m: doc.m,
            lambdas: doc.lambdas,
            nodes: doc.nodes,
            weights: doc.weights,
            core_samples: doc.core_samples,
            bary_weights,
            phi_at_one: Vec::new(),
        };
        basis.canonicalize_signs();
        basis.validate_gram()?;
        Ok(basis)
    }

    /// Gram check of the stored samples under the stored rule: must be the
    /// identity within [`TOL_GRAM`].
    pub fn validate_gram(&self) -> Result<()> {
        let worst = self.gram_defect();
        if worst > TOL_GRAM {
            return Err(Error::Serialization(format!(
                "core samples fail orthonormality: max |Gram - I| = {worst:.3e}"
            )));
        }
        Ok(())
    }

    /// max_jk |⟨φ_j, φ_k⟩ − δ_jk| under the stored rule.
    pub fn gram_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.k_count {
            for k in j..self.k_count {
                let mut acc = 0.0;
                for i in 0..self.m {
                    acc += self.weights[i] * self.core_samples[j][i] * self.core_samples[k][i];
                }
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }
}

/// A lightweight evaluation handle for one mode of a built basis.
#[derive(Debug, Clone, Copy)]
pub struct ModeFunction<'a> {
    basis: &'a ProlateBasis,
    k: usize,
}

impl<'a> ModeFunction<'a> {
    pub fn index(&self) -> usize {
        self.k
    }

    /// 0 for even modes, 1 for odd ones; ψ_k(−s) = (−1)^k ψ_k(s).
    pub fn parity(&self) -> usize {
        self.k % 2
    }

    pub fn lambda(&self) -> f64 {
        self.basis.lambdas[self.k]
    }

    pub fn phi(&self, s: f64) -> f64 {
        self.basis.eval_phi(self.k, s)
    }

    pub fn psi(&self, s: f64) -> crate::Result<f64> {
        self.basis.eval_psi(self.k, s)
    }

    pub fn chi(&self, s: f64) -> crate::Result<f64> {
        self.basis.eval_chi(self.k, s)
    }

    pub fn theta(&self, s: f64) -> crate::Result<f64> {
        self.basis.eval_theta(self.k, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn basis_c2() -> ProlateBasis {
        ProlateBasis::build(BandParameter::new(2.0).unwrap(), 6, 200).unwrap()
    }

    #[test]
    fn eigenvalues_match_independent_reference() {
        // reference values from an independent Legendre–Galerkin computation
        // of the same spectrum (commuting tridiagonal differential operator,
        // eigenvalues recovered through the sinc-kernel Rayleigh quotient)
        let reference = [
            8.805_599_223_173_128e-1,
            3.556_406_254_848_853e-1,
            3.586_768_765_841_711e-2,
            1.152_232_766_996_297e-3,
            1.888_154_919_394_763e-5,
            1.935_852_202_033_379e-7,
        ];
        let basis = basis_c2();
        for (k, &l_ref) in reference.iter().enumerate() {
            assert_abs_diff_eq!(basis.lambda(k), l_ref, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_trace_equals_shannon_number() {
        let band = BandParameter::new(2.0).unwrap();
        let spectrum = ProlateBasis::resolvable_spectrum(band, 200);
        let total: f64 = spectrum.iter().sum();
        assert_abs_diff_eq!(total, band.shannon_number(), epsilon = 1e-8);
        // partial sums stay below the trace
        let mut acc = 0.0;
        for l in &spectrum {
            acc += l;
            assert!(acc <= band.shannon_number() + 1e-12);
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        assert!(basis_c2().gram_defect() < TOL_GRAM);
    }

    #[test]
    fn sign_convention_fixes_phi_at_one_positive() {
        let basis = basis_c2();
        for k in 0..basis.k_count() {
            assert!(basis.phi_at_one(k) > 0.0, "phi_{k}(1) must be positive");
        }
    }

    #[test]
    fn psi_parity_alternates() {
        let basis = basis_c2();
        for k in 0..basis.k_count() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for &s in &[0.3, 0.97, 1.5, 4.2, 11.0] {
                let plus = basis.eval_psi(k, s).unwrap();
                let minus = basis.eval_psi(k, -s).unwrap();
                assert_abs_diff_eq!(minus, sign * plus, epsilon = 1e-12);
            }
            if k % 2 == 1 {
                assert_abs_diff_eq!(basis.eval_psi(k, 0.0).unwrap(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn core_and_wings_branches_join_continuously() {
        // the two evaluation paths (barycentric interpolation inside, the
        // oscillatory sum outside) must agree across s = 1; this couples the
        // eigenvalue, the samples and the Fourier property in one check
        let basis = basis_c2();
        for k in 0..basis.k_count() {
            let inside = basis.eval_psi(k, 1.0).unwrap();
            let outside = basis.eval_psi(k, 1.0 + 1e-9).unwrap();
            assert_abs_diff_eq!(inside, outside, epsilon = 1e-7);
        }
    }

    #[test]
    fn mode_decomposition_identity_holds_pointwise() {
        // ψ = √λ φ + √(1−λ) χ and θ = √(1−λ) φ − √λ χ on both supports
        let basis = basis_c2();
        for k in 0..basis.k_count() {
            let lam = basis.lambda(k);
            for &s in &[0.2, 0.8, 1.3, 2.7] {
                let psi = basis.eval_psi(k, s).unwrap();
                let rebuilt = lam.sqrt() * basis.eval_phi(k, s)
                    + (1.0 - lam).sqrt() * basis.eval_chi(k, s).unwrap();
                assert_abs_diff_eq!(psi, rebuilt, epsilon = 1e-12);
                let theta = basis.eval_theta(k, s).unwrap();
                let rebuilt_t = (1.0 - lam).sqrt() * basis.eval_phi(k, s)
                    - lam.sqrt() * basis.eval_chi(k, s).unwrap();
                assert_abs_diff_eq!(theta, rebuilt_t, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn theta_norm_on_core_is_one_minus_lambda() {
        let basis = basis_c2();
        let (value, _) = crate::quad::adaptive(-1.0, 1.0, 1e-10, |s| {
            let t = basis.eval_theta(0, s).unwrap();
            t * t
        });
        assert_abs_diff_eq!(value, 1.0 - basis.lambda(0), epsilon = 1e-8);
    }

    #[test]
    fn psi_theta_orthogonal_over_full_line() {
        // ⟨ψ_k, θ_k⟩ = √λ√(1−λ) − √(1−λ)√λ = 0; core part and wings part
        // cancel exactly, each computable on its own support
        let basis = basis_c2();
        for k in 0..2 {
            let (core, _) = crate::quad::adaptive(-1.0, 1.0, 1e-11, |s| {
                basis.eval_psi(k, s).unwrap() * basis.eval_theta(k, s).unwrap()
            });
            let c = basis.c();
            // ψ_k θ_k ~ oscillation at 2c over an s⁻² envelope on the wings;
            // one full period of that beat is π/c
            let period = std::f64::consts::PI / c;
            let wings = crate::quad::tail_integrate(1.0, period, 6, &mut |s| {
                num_complex::Complex64::new(
                    basis.eval_psi(k, s).unwrap() * basis.eval_theta(k, s).unwrap(),
                    0.0,
                )
            });
            let total = core + 2.0 * wings.value.re; // ψθ is even in s for every k
            assert_abs_diff_eq!(total, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn unresolvable_mode_count_is_an_error_naming_the_safe_k() {
        let err = ProlateBasis::build(BandParameter::new(2.0).unwrap(), 40, 200).unwrap_err();
        match err {
            Error::UnresolvableModes {
                requested,
                resolvable,
                ..
            } => {
                assert_eq!(requested, 40);
                assert!(
                    (7..=12).contains(&resolvable),
                    "c = 2 resolves ~9 modes, reported {resolvable}"
                );
            }
            other => panic!("expected UnresolvableModes, got {other:?}"),
        }
    }

    #[test]
    fn evaluation_beyond_validity_bound_errors() {
        let basis = basis_c2();
        let bound = basis.eval_validity_bound();
        assert!(basis.eval_psi(0, bound * 2.0).is_err());
        assert!(basis.eval_psi(0, bound * 0.5).is_ok());
    }

    #[test]
    fn fully_transmitted_mode_has_zero_chi_with_warning() {
        // at c = 20 the lowest eigenvalue is 1 to machine precision, so the
        // wings complement is indeterminate and must come back as zero
        let basis = ProlateBasis::build(BandParameter::new(20.0).unwrap(), 1, 160).unwrap();
        assert!(1.0 - basis.lambda(0) < CHI_CONDITIONING_FLOOR);
        assert_eq!(basis.eval_chi(0, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let basis = basis_c2();
        let text = basis.to_json();
        let back = ProlateBasis::from_json(&text).unwrap();
        assert_eq!(back.k_count(), basis.k_count());
        assert_eq!(back.quadrature_order(), basis.quadrature_order());
        for k in 0..basis.k_count() {
            assert_eq!(back.lambda(k).to_bits(), basis.lambda(k).to_bits());
            for i in 0..basis.quadrature_order() {
                assert_eq!(
                    back.core_samples(k)[i].to_bits(),
                    basis.core_samples(k)[i].to_bits()
                );
            }
        }
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(ProlateBasis::from_json("{\"c\": 2.0}").is_err());
        let mut basis = basis_c2();
        // corrupt one sample badly enough to break the Gram identity
        basis.core_samples[0][3] += 0.05;
        let text = basis.to_json();
        assert!(matches!(
            ProlateBasis::from_json(&text),
            Err(Error::Serialization(_))
        ));
    }

    #[test]
    fn degenerate_band_is_flagged_but_usable() {
        let band = BandParameter::new(0.05).unwrap();
        assert!(band.is_degenerate());
        let basis = ProlateBasis::build(band, 1, 64).unwrap();
        assert!(basis.lambda(0) < 0.1);
    }
}
