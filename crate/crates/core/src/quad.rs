//! Quadrature machinery: Gauss–Legendre rules, an adaptive integrator, an
//! endpoint-corrected trapezoid for uniformly gridded data, and an
//! extrapolated panel scheme for oscillatory tail integrals.
//!
//! Everything downstream (mode construction, field projections, covariance
//! integrals) runs through this module, so the rules here are kept small,
//! deterministic and individually tested.

use num_complex::Complex64;

/// A Gauss–Legendre rule on the reference interval [−1, 1].
///
/// Nodes are the roots of the Legendre polynomial P_n, found by Newton
/// iteration from the classical Chebyshev-like initial guesses; weights are
/// w_i = 2 / ((1 − x_i²) P'_n(x_i)²). For the orders used in this crate
/// (n ≤ a few thousand) the iteration converges to machine precision in a
/// handful of steps.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Value of (P_n(x), P'_n(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // derivative from the standard identity (1 − x²) P'_n = n (P_{n−1} − x P_n)
    let dp = if (1.0 - x * x).abs() > f64::EPSILON {
        (n as f64) * (p_prev - x * p) / (1.0 - x * x)
    } else {
        // endpoints: P'_n(±1) = ±^{n+1} n(n+1)/2
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        sign * (n as f64) * (n as f64 + 1.0) / 2.0
    };
    (p, dp)
}

impl GaussLegendre {
    /// Build the n-point rule. Panics on n = 0 (a programming error).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be at least 1");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // initial guess for the i-th root (descending in x)
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            // one polishing step to settle the weight
            let (p, dp) = legendre_pair(n, x);
            x -= p / dp;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // the middle node is exactly zero by symmetry
            nodes[n / 2] = 0.0;
            let (_, dp) = legendre_pair(n, 0.0);
            weights[n / 2] = 2.0 / (dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_a^b f by this rule mapped onto [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Complex-valued counterpart of [`integrate`](Self::integrate).
    pub fn integrate_complex(
        &self,
        a: f64,
        b: f64,
        mut f: impl FnMut(f64) -> Complex64,
    ) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * w;
        }
        acc * half
    }
}

/// Result of an adaptive integration: the value and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

/// Adaptive integration of a complex integrand on [a, b] to absolute
/// tolerance `tol`, by bisection with an embedded 10/20-point Gauss pair.
///
/// The error on each panel is estimated as |G20 − G10|; panels failing their
/// length-proportional share of `tol` are bisected. The scheme is meant for
/// smooth (possibly oscillatory) integrands; it caps the subdivision depth so
/// pathological inputs return a finite answer with an honest error estimate
/// instead of hanging.
pub fn adaptive_complex(
    a: f64,
    b: f64,
    tol: f64,
    f: &mut impl FnMut(f64) -> Complex64,
) -> Integral {
    let g10 = rule10();
    let g20 = rule20();
    let total_len = b - a;
    let mut stack = vec![(a, b, 0u32)];
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = g10.integrate_complex(lo, hi, &mut *f);
        let fine = g20.integrate_complex(lo, hi, &mut *f);
        let est = (fine - coarse).norm();
        let local_tol = tol * ((hi - lo) / total_len).max(1e-3);
        if est <= local_tol || depth >= 28 {
            value += fine;
            error += est;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Integral { value, error }
}

/// Real-valued adaptive integration; see [`adaptive_complex`].
pub fn adaptive(a: f64, b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let out = adaptive_complex(a, b, tol, &mut |x| Complex64::new(f(x), 0.0));
    (out.value.re, out.error)
}

fn rule10() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

fn rule20() -> &'static GaussLegendre {
    use std::sync::OnceLock;
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Composite trapezoid over uniformly spaced samples with order-6
/// Euler–Maclaurin endpoint corrections (a Gregory-type rule).
///
/// For a smooth integrand the plain trapezoid error is h²/12 (f'(b) − f'(a)) −
/// h⁴/720 (f'''(b) − f'''(a)) + O(h⁶); subtracting those two terms with
/// one-sided finite-difference derivatives (O(h⁴) for f', O(h²) for f''')
/// yields an O(h⁶) rule without moving off the uniform grid. Falls back to the
/// plain trapezoid when fewer than 7 samples are available.
pub fn trapezoid_corrected(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        acc += v;
    }
    let plain = acc * h;
    if n < 7 {
        return plain;
    }
    let d1_left = (-25.0 * values[0] + 48.0 * values[1] - 36.0 * values[2]
        + 16.0 * values[3]
        - 3.0 * values[4])
        / (12.0 * h);
    let d1_right = (25.0 * values[n - 1] - 48.0 * values[n - 2] + 36.0 * values[n - 3]
        - 16.0 * values[n - 4]
        + 3.0 * values[n - 5])
        / (12.0 * h);
    let d3_left = (-2.5 * values[0] + 9.0 * values[1] - 12.0 * values[2] + 7.0 * values[3]
        - 1.5 * values[4])
        / (h * h * h);
    let d3_right = (2.5 * values[n - 1] - 9.0 * values[n - 2] + 12.0 * values[n - 3]
        - 7.0 * values[n - 4]
        + 1.5 * values[n - 5])
        / (h * h * h);
    plain - h * h / 12.0 * (d1_right - d1_left) + h.powi(4) / 720.0 * (d3_right - d3_left)
}

/// Complex-sample counterpart of [`trapezoid_corrected`].
pub fn trapezoid_corrected_complex(values: &[Complex64], h: f64) -> Complex64 {
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    Complex64::new(trapezoid_corrected(&re, h), trapezoid_corrected(&im, h))
}

/// Neville polynomial extrapolation of (h_i, S_i) data to h = 0.
///
/// Returns the extrapolated value together with the difference between the
/// final tableau entry and its parent — the customary error estimate.
fn neville_at_zero(hs: &[f64], sums: &[Complex64]) -> (Complex64, f64) {
    let n = sums.len();
    assert!(n >= 2, "need at least two points to extrapolate");
    let mut cur = sums.to_vec();
    // `runner_up` ends as the interpolant through all points except the first —
    // the natural comparison value for the error estimate.
    let mut runner_up = cur[n - 1];
    for j in 1..n {
        if cur.len() == 2 {
            runner_up = cur[1];
        }
        for i in 0..n - j {
            let num = (cur[i + 1] - cur[i]) * hs[i + j];
            cur[i] = cur[i + 1] + num / (hs[i] - hs[i + j]);
        }
        cur.truncate(n - j);
    }
    (cur[0], (cur[0] - runner_up).norm())
}

/// Tail integral ∫_start^∞ f of an integrand that decays algebraically with a
/// periodic oscillation of known period (or decays faster, e.g. geometrically).
///
/// `period` must be one full oscillation period of the integrand, so that the
/// cumulative integrals sampled at panel boundaries are phase-locked: they then
/// follow a smooth asymptotic expansion in 1/ξ, S(ξ) = S_∞ + c₁/ξ + c₂/ξ² + …,
/// which Richardson/Neville extrapolation in h = 1/ξ resolves to high order.
/// Cumulative sums are recorded at panel counts 1, 2, 4, …, 2^max_doublings
/// (so the h sequence roughly halves, keeping the extrapolation
/// well-conditioned, as in Romberg integration); each panel uses a 20-point
/// Gauss rule. For integrands that die off geometrically the extrapolation
/// model is wrong but unnecessary; the routine detects fast decay of the
/// increments and falls back to the final cumulative sum in that case.
///
/// The farthest abscissa touched is start + 2^max_doublings · period; callers
/// integrating mode evaluations must keep that inside the evaluation validity
/// range of the basis.
pub fn tail_integrate(
    start: f64,
    period: f64,
    max_doublings: usize,
    f: &mut impl FnMut(f64) -> Complex64,
) -> Integral {
    assert!(period > 0.0 && max_doublings >= 2, "degenerate tail request");
    let g20 = rule20();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut done = 0usize;
    let mut hs = Vec::with_capacity(max_doublings + 1);
    let mut sums = Vec::with_capacity(max_doublings + 1);
    for j in 0..=max_doublings {
        let target = 1usize << j;
        while done < target {
            let lo = start + done as f64 * period;
            acc += g20.integrate_complex(lo, lo + period, &mut *f);
            done += 1;
        }
        hs.push(1.0 / (start + target as f64 * period));
        sums.push(acc);
    }
    let (nev_value, nev_error) = neville_at_zero(&hs, &sums);
    // Fast-decay fallback: when successive doubling increments shrink
    // geometrically the plain cumulative sum has already converged and the
    // polynomial-in-1/ξ model does not apply.
    let n = sums.len();
    let last_inc = (sums[n - 1] - sums[n - 2]).norm();
    let prev_inc = (sums[n - 2] - sums[n - 3]).norm();
    if last_inc < 0.25 * prev_inc && 0.3 * last_inc < nev_error {
        return Integral {
            value: sums[n - 1],
            error: last_inc,
        };
    }
    Integral {
        value: nev_value,
        error: nev_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn five_point_rule_matches_published_values() {
        // classical 5-point Gauss–Legendre abscissae/weights
        let rule = GaussLegendre::new(5);
        let x_ref = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let w_ref = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(rule.nodes[i], x_ref[i], epsilon = 1e-14);
            assert_abs_diff_eq!(rule.weights[i], w_ref[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn gauss_is_exact_on_matching_polynomials() {
        // an n-point rule integrates degree 2n−1 exactly; the odd top power
        // integrates to zero, so add a constant to keep the answer nontrivial
        for n in [1usize, 2, 3, 8, 33] {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let value = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32) + 1.0);
            assert_abs_diff_eq!(value, 2.0, epsilon = 1e-13);
        }
        // and with the x² term where the rule order actually covers it
        for n in [2usize, 3, 8, 33] {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let value = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32) + x * x);
            assert_abs_diff_eq!(value, 2.0 / 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn high_order_weights_sum_to_interval_length() {
        for n in [64usize, 200, 401] {
            let rule = GaussLegendre::new(n);
            let total: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-12);
            // nodes strictly inside and sorted
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
            assert!(rule.nodes.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn adaptive_handles_smooth_and_oscillatory_integrands() {
        let (v, e) = adaptive(0.0, 1.0, 1e-12, |x| x.exp());
        assert_abs_diff_eq!(v, std::f64::consts::E - 1.0, epsilon = 1e-11);
        assert!(e < 1e-9);

        // 40 oscillations across the window
        let (v, _) = adaptive(0.0, 8.0 * std::f64::consts::PI, 1e-12, |x| (10.0 * x).cos());
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn corrected_trapezoid_reaches_order_six() {
        // f(x) = exp(x) on [0, 1]; plain trapezoid at h = 1/64 errs at ~3e-5,
        // the corrected rule should be ~1e-12.
        let h = 1.0 / 64.0;
        let values: Vec<f64> = (0..=64).map(|i| (i as f64 * h).exp()).collect();
        let exact = std::f64::consts::E - 1.0;
        let plain: f64 = {
            let mut acc = 0.5 * (values[0] + values[64]);
            for v in &values[1..64] {
                acc += v;
            }
            acc * h
        };
        assert!((plain - exact).abs() > 1e-6);
        assert_abs_diff_eq!(trapezoid_corrected(&values, h), exact, epsilon = 5e-12);
    }

    #[test]
    fn corrected_trapezoid_halving_gains_about_six_orders() {
        let err_at = |n: usize| {
            let h = 1.0 / n as f64;
            let values: Vec<f64> = (0..=n).map(|i| (2.0 * i as f64 * h).sin()).collect();
            (trapezoid_corrected(&values, h) - 0.5 * (1.0 - 2.0f64.cos())).abs()
        };
        let ratio = err_at(32) / err_at(64);
        assert!(
            ratio > 30.0,
            "expected ~2^6 error reduction per halving, got ratio {ratio}"
        );
    }

    #[test]
    fn tail_integrate_matches_closed_form_exponential_case() {
        // ∫_1^∞ e^{−u} sin(10 u) du = Im[e^{(−1+10i)} / (1 − 10i)];
        // geometric decay exercises the fast-decay fallback path
        let exact = (Complex64::new(-1.0, 10.0).exp() / Complex64::new(1.0, -10.0)).im;
        let period = 2.0 * std::f64::consts::PI / 10.0;
        let out = tail_integrate(1.0, period, 5, &mut |u| {
            Complex64::new((-u).exp() * (10.0 * u).sin(), 0.0)
        });
        assert_abs_diff_eq!(out.value.re, exact, epsilon = 1e-10);
    }

    #[test]
    fn tail_integrate_handles_algebraic_decay() {
        // ∫_1^∞ sin(2u)/u² du = sin 2 − 2 Ci(2), with Ci(2) = 0.422980828774865
        let exact = 2.0f64.sin() - 2.0 * 0.422_980_828_774_864_8;
        let period = std::f64::consts::PI; // one period of sin(2u)
        let out = tail_integrate(1.0, period, 6, &mut |u| {
            Complex64::new((2.0 * u).sin() / (u * u), 0.0)
        });
        assert_abs_diff_eq!(out.value.re, exact, epsilon = 1e-9);
    }

    #[test]
    fn tail_integrate_is_translation_consistent() {
        // splitting the tail at an interior point must not change the value
        let f = |u: f64| Complex64::new((3.0 * u).cos() / u.powi(2), 0.0);
        let period = 2.0 * std::f64::consts::PI / 3.0;
        let whole = tail_integrate(2.0, period, 6, &mut { f }).value;
        let head = adaptive_complex(2.0, 2.0 + 8.0 * period, 1e-13, &mut { f }).value;
        let rest = tail_integrate(2.0 + 8.0 * period, period, 6, &mut { f }).value;
        assert_abs_diff_eq!(whole.re, (head + rest).re, epsilon = 1e-9);
    }

    #[test]
    fn tail_integrate_slow_oscillation_with_dc_envelope() {
        // ∫_4^∞ (1 + cos(2u))/u² du; the oscillatory part integrates by parts
        // to cos(8)/4 − 2(π/2 − Si(8)) with Si(8) = 1.574186821706942, and the
        // DC part (= 1/4) exercises the pure 1/ξ^m branch of the model.
        let si8 = 1.574_186_821_706_942_1;
        let exact = 0.25 + (8.0f64).cos() / 4.0 - 2.0 * (std::f64::consts::FRAC_PI_2 - si8);
        let period = std::f64::consts::PI;
        let out = tail_integrate(4.0, period, 6, &mut |u| {
            Complex64::new((1.0 + (2.0 * u).cos()) / (u * u), 0.0)
        });
        assert_abs_diff_eq!(out.value.re, exact, epsilon = 1e-9);
    }
}
