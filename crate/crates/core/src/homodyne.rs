//! Seeded Monte-Carlo homodyne sampling of the prolate-mode Gaussian state.
//!
//! A [`ModeCovariance`] fixes a Gaussian state of the 2K-dimensional
//! quadrature vector (A_{1,0}, A_{2,0}, …, A_{1,K−1}, A_{2,K−1}), zero-mean
//! unless a classical displacement is added. This module draws shot-by-shot
//! realizations of that vector — the numerical analogue of spatially
//! resolved homodyne detection with a mode-matched local oscillator — and
//! closes the loop by comparing empirical statistics against the analytic
//! covariance.
//!
//! Randomness policy: every batch is generated by ChaCha12 (a named,
//! platform-stable, counter-based generator) seeded once with the batch
//! seed. Shots are produced in blocks of [`SAMPLE_BLOCK`]; block b reads
//! from counter stream b of the same seed, and within a block each shot
//! consumes its 2K standard normals in order. The rule makes batches
//! embarrassingly parallel across blocks, bit-identical however many
//! threads run, and prefix-stable: extending n never changes earlier
//! shots. Reruns on one platform reproduce draws bit for bit; across
//! platforms the rare tail branch of the normal sampler may differ in the
//! last ulp through the libm exp/log it calls, so derived statistics are
//! only guaranteed to about 1e−12.
//!
//! A homodyne detector reads one quadrature at a time: the local-oscillator
//! phase selects which one, and because the squeezed quadrature alternates
//! with mode parity, one phase setting accesses the squeezed amplitudes of
//! one parity class and the anti-squeezed amplitudes of the other.
//! [`homodyne_extract`] mirrors that selection on sampled batches.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::Error;
use crate::pswf::ProlateBasis;
use crate::serialize::{fmt17, fmt17_array};
use crate::squeeze::ModeCovariance;
use crate::Result;

/// Shots per generator stream: block b of a batch draws from ChaCha12
/// counter stream b, making generation parallel and prefix-stable.
pub const SAMPLE_BLOCK: usize = 4096;

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

/// A batch of Monte-Carlo quadrature draws from one Gaussian state.
///
/// Rows are shots; each row is the full quadrature vector in mode-major
/// order (A_{1,0}, A_{2,0}, A_{1,1}, A_{2,1}, …). Batches are only built by
/// [`sample`], so a value of this type always carries the (seed, n,
/// displacement) triple that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    seed: u64,
    k_count: usize,
    /// Row-major n × 2K draws.
    draws: Vec<f64>,
    displacement: Option<Vec<f64>>,
}

impl SampleBatch {
    /// Number of shots.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The batch seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of modes K.
    pub fn k_count(&self) -> usize {
        self.k_count
    }

    /// Length 2K of each quadrature vector.
    pub fn dim(&self) -> usize {
        2 * self.k_count
    }

    /// The quadrature vector measured in shot i.
    pub fn shot(&self, i: usize) -> &[f64] {
        let dim = self.dim();
        &self.draws[i * dim..(i + 1) * dim]
    }

    /// All draws, row-major n × 2K.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    /// The classical displacement added to the means, if any.
    pub fn displacement(&self) -> Option<&[f64]> {
        self.displacement.as_deref()
    }

    /// CSV rendering: a `shot` index column followed by one column per
    /// quadrature amplitude, full-precision values throughout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("shot");
        for k in 0..self.k_count {
            out.push_str(&format!(",A1_{k},A2_{k}"));
        }
        out.push('\n');
        for i in 0..self.n {
            out.push_str(&i.to_string());
            for value in self.shot(i) {
                out.push(',');
                out.push_str(&fmt17(*value));
            }
            out.push('\n');
        }
        out
    }

    /// JSON sidecar describing how the batch was produced: seed, shot and
    /// block bookkeeping, and the state (band, mode count, profile) of the
    /// covariance it was drawn from. Fails if `cov` is not the state the
    /// batch was sampled against (wrong mode count).
    pub fn sidecar_json(&self, cov: &ModeCovariance) -> Result<String> {
        if cov.k_count() != self.k_count {
            return Err(Error::invalid(
                "cov",
                format!(
                    "covariance carries K = {} modes but the batch was drawn with K = {}",
                    cov.k_count(),
                    self.k_count
                ),
            ));
        }
        let displacement = match &self.displacement {
            Some(mu) => fmt17_array(mu),
            None => "null".to_string(),
        };
        Ok(format!(
            "{{\"seed\":{},\"n\":{},\"K\":{},\"c\":{},\"block\":{},\
             \"displacement\":{},\"profile\":{}}}",
            self.seed,
            self.n,
            self.k_count,
            fmt17(cov.c()),
            SAMPLE_BLOCK,
            displacement,
            cov.profile().to_json()
        ))
    }
}

/// Lower-triangular Cholesky factor L with Σ = L Lᵀ, reporting the 1-based
/// leading minor at which positivity first fails — the diagnostic contract
/// nalgebra's factorization does not expose. A covariance that passed the
/// positive-definiteness gate can still land here when extreme squeezing
/// pushes its condition number past what double precision resolves.
pub(crate) fn cholesky_lower(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let dim = rows.len();
    let mut l = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = rows[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > 0.0 && sum.is_finite()) {
                    return Err(Error::Factorization { minor: i + 1 });
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Draw n shots of the quadrature vector from the Gaussian state with
/// covariance `cov` and mean `displacement` (zero when absent).
///
/// Each shot is μ + L z with L the lower Cholesky factor of Σ and z a
/// vector of 2K standard normals; the generator policy (ChaCha12, one
/// stream per [`SAMPLE_BLOCK`] shots) makes the result a pure function of
/// (cov, displacement, n, seed) down to the bit pattern.
pub fn sample(
    cov: &ModeCovariance,
    displacement: Option<&[f64]>,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::invalid("n", "got 0, need at least one shot"));
    }
    let dim = 2 * cov.k_count();
    if let Some(mu) = displacement {
        if mu.len() != dim {
            return Err(Error::invalid(
                "displacement",
                format!("got length {}, need 2K = {dim}", mu.len()),
            ));
        }
        if !mu.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid(
                "displacement",
                "every entry must be finite".to_string(),
            ));
        }
    }
    let l = cholesky_lower(cov.rows())?;
    let blocks = n.div_ceil(SAMPLE_BLOCK);
    let block_draws: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let shots = SAMPLE_BLOCK.min(n - b * SAMPLE_BLOCK);
            let mut out = Vec::with_capacity(shots * dim);
            let mut z = vec![0.0; dim];
            for _ in 0..shots {
                for zj in z.iter_mut() {
                    *zj = StandardNormal.sample(&mut rng);
                }
                for (i, row) in l.iter().enumerate() {
                    let mut x: f64 = row[..=i].iter().zip(&z).map(|(a, b)| a * b).sum();
                    if let Some(mu) = displacement {
                        x += mu[i];
                    }
                    out.push(x);
                }
            }
            out
        })
        .collect();
    Ok(SampleBatch {
        n,
        seed,
        k_count: cov.k_count(),
        draws: block_draws.concat(),
        displacement: displacement.map(<[f64]>::to_vec),
    })
}

/// A displacement vector putting a bright classical amplitude on the
/// anti-squeezed quadrature (A_{1k}) of every even mode, zeros elsewhere —
/// the default reading of "a properly chosen phase" for the classical wave.
/// It is a default, not an optimum: callers are free to displace any
/// quadrature pattern they like.
pub fn aligned_displacement(k_count: usize, amplitude: f64) -> Vec<f64> {
    let mut mu = vec![0.0; 2 * k_count];
    for k in (0..k_count).step_by(2) {
        mu[2 * k] = amplitude;
    }
    mu
}

// ---------------------------------------------------------------------------
// homodyne selection
// ---------------------------------------------------------------------------

/// Mode-parity class selected by the local-oscillator phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Whether mode k belongs to this class.
    pub fn contains(self, k: usize) -> bool {
        (k % 2 == 0) == (self == Parity::Even)
    }

    /// Lower-case name used in exported documents.
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Which quadrature of each mode the detector reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureIndex {
    /// A_{1k}.
    First,
    /// A_{2k}.
    Second,
}

impl QuadratureIndex {
    /// Column offset inside a mode's (A_{1k}, A_{2k}) pair.
    fn offset(self) -> usize {
        match self {
            QuadratureIndex::First => 0,
            QuadratureIndex::Second => 1,
        }
    }
}

/// The per-shot amplitude subset one homodyne setting gives access to.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedAmplitudes {
    /// Mode indices k in the selected parity class, ascending.
    pub modes: Vec<usize>,
    /// Row-major n × modes.len() amplitudes, one row per shot.
    pub values: Vec<f64>,
    /// Shot count (rows).
    pub n: usize,
}

impl ExtractedAmplitudes {
    /// The amplitudes of shot i.
    pub fn shot(&self, i: usize) -> &[f64] {
        let m = self.modes.len();
        &self.values[i * m..(i + 1) * m]
    }

    /// Unbiased empirical variance of each extracted amplitude, in mode
    /// order.
    pub fn variances(&self) -> Vec<f64> {
        let m = self.modes.len();
        let mut means = vec![0.0; m];
        for i in 0..self.n {
            for (mean, x) in means.iter_mut().zip(self.shot(i)) {
                *mean += x;
            }
        }
        for mean in &mut means {
            *mean /= self.n as f64;
        }
        let mut vars = vec![0.0; m];
        for i in 0..self.n {
            for j in 0..m {
                vars[j] += (self.shot(i)[j] - means[j]).powi(2);
            }
        }
        for var in &mut vars {
            *var /= (self.n - 1) as f64;
        }
        vars
    }
}

/// Select, per shot, the amplitudes A_{σk} whose mode parity and quadrature
/// index match one local-oscillator setting: one phase reads the squeezed
/// quadrature of one parity class (and the anti-squeezed quadrature of the
/// other), never both at once.
pub fn homodyne_extract(
    batch: &SampleBatch,
    basis: &ProlateBasis,
    parity: Parity,
    quadrature: QuadratureIndex,
) -> Result<ExtractedAmplitudes> {
    if basis.k_count() != batch.k_count() {
        return Err(Error::invalid(
            "basis",
            format!(
                "basis carries K = {} modes but the batch was drawn with K = {}",
                basis.k_count(),
                batch.k_count()
            ),
        ));
    }
    let modes: Vec<usize> = (0..batch.k_count()).filter(|&k| parity.contains(k)).collect();
    let offset = quadrature.offset();
    let mut values = Vec::with_capacity(batch.n() * modes.len());
    for i in 0..batch.n() {
        let row = batch.shot(i);
        values.extend(modes.iter().map(|&k| row[2 * k + offset]));
    }
    Ok(ExtractedAmplitudes {
        modes,
        values,
        n: batch.n(),
    })
}

// ---------------------------------------------------------------------------
// empirical statistics
// ---------------------------------------------------------------------------

/// Unbiased sample covariance of a batch with elementwise standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCovariance {
    /// 2K × 2K unbiased sample covariance.
    pub cov: Vec<Vec<f64>>,
    /// Elementwise standard errors from the Gaussian fourth-moment formula
    /// Var(C_ij) = (C_ii C_jj + C_ij²)/(n − 1), with the empirical values
    /// plugged in.
    pub standard_errors: Vec<Vec<f64>>,
    /// Shots the estimate is based on.
    pub n: usize,
    /// Empirical mean of each quadrature column.
    pub means: Vec<f64>,
}

/// Unbiased sample covariance of the batch draws, with standard-error
/// estimates for every entry. Shots are accumulated in fixed-size chunks
/// merged in order, so the result is bit-reproducible regardless of thread
/// count.
pub fn empirical_covariance(batch: &SampleBatch) -> Result<EmpiricalCovariance> {
    let n = batch.n();
    if n < 2 {
        return Err(Error::invalid(
            "batch",
            format!("got {n} shot(s), need at least 2 for a covariance"),
        ));
    }
    let dim = batch.dim();
    let chunks = n.div_ceil(SAMPLE_BLOCK);
    let chunk_range = |b: usize| (b * SAMPLE_BLOCK, ((b + 1) * SAMPLE_BLOCK).min(n));

    let mean_parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|b| {
            let (lo, hi) = chunk_range(b);
            let mut sums = vec![0.0; dim];
            for i in lo..hi {
                for (sum, x) in sums.iter_mut().zip(batch.shot(i)) {
                    *sum += x;
                }
            }
            sums
        })
        .collect();
    let mut means = vec![0.0; dim];
    for part in &mean_parts {
        for (mean, sum) in means.iter_mut().zip(part) {
            *mean += sum;
        }
    }
    for mean in &mut means {
        *mean /= n as f64;
    }

    let gram_parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|b| {
            let (lo, hi) = chunk_range(b);
            let mut gram = vec![0.0; dim * dim];
            let mut centered = vec![0.0; dim];
            for i in lo..hi {
                for (c, (x, mean)) in centered.iter_mut().zip(batch.shot(i).iter().zip(&means)) {
                    *c = x - mean;
                }
                for p in 0..dim {
                    for q in p..dim {
                        gram[p * dim + q] += centered[p] * centered[q];
                    }
                }
            }
            gram
        })
        .collect();
    let mut gram = vec![0.0; dim * dim];
    for part in &gram_parts {
        for (acc, g) in gram.iter_mut().zip(part) {
            *acc += g;
        }
    }

    let mut cov = vec![vec![0.0; dim]; dim];
    for p in 0..dim {
        for q in p..dim {
            let value = gram[p * dim + q] / (n - 1) as f64;
            cov[p][q] = value;
            cov[q][p] = value;
        }
    }
    let mut standard_errors = vec![vec![0.0; dim]; dim];
    for p in 0..dim {
        for q in 0..dim {
            standard_errors[p][q] =
                ((cov[p][p] * cov[q][q] + cov[p][q].powi(2)) / (n - 1) as f64).sqrt();
        }
    }
    Ok(EmpiricalCovariance {
        cov,
        standard_errors,
        n,
        means,
    })
}

// ---------------------------------------------------------------------------
