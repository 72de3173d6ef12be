//! Quadrature rules shared by the measure, rate and matrix modules.

use std::f64::consts::PI;

/// Default node count for the cosine rule on an interval.
pub const DEFAULT_NODES: usize = 2048;

/// Midpoint rule in the angle after `x = center + half_width * cos(phi)`.
///
/// Returns `(x_j, w_j)` such that `sum w_j f(x_j)` approximates the Lebesgue
/// integral of `f` over `[lo, hi]`. For integrands that vanish like a square
/// root at both edges the transformed integrand is smooth and periodic, so
/// the rule converges spectrally.
pub fn cosine_rule(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let h = PI / n as f64;
    (0..n)
        .map(|j| {
            let phi = (j as f64 + 0.5) * h;
            (center + half * phi.cos(), half * phi.sin() * h)
        })
        .collect()
}

/// Largest node count [`nodes_near_pole`] will ask for.
pub const MAX_NODES: usize = 1 << 20;

/// Node count for the cosine rule on `[lo, hi]` when the integrand has a
/// pole at `pole` just outside the interval. Poles within `δ` of an edge sit
/// about `sqrt(2δ / half_width)` from the real axis in the angle variable.
pub fn nodes_near_pole(lo: f64, hi: f64, pole: f64) -> usize {
    let half = 0.5 * (hi - lo);
    let d = if pole > hi {
        pole - hi
    } else if pole < lo {
        lo - pole
    } else {
        return MAX_NODES;
    };
    let width = (2.0 * d / half).sqrt();
    let want = (40.0 / width).min(MAX_NODES as f64) as usize;
    want.next_power_of_two().clamp(DEFAULT_NODES, MAX_NODES)
}

/// Uniform angles on `[-pi, pi)` with weights `1/n` (normalized Lebesgue measure).
pub fn circle_rule(n: usize) -> Vec<(f64, f64)> {
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|j| (-PI + j as f64 * h, 1.0 / n as f64))
        .collect()
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Pairwise summation, insensitive to the order of partial results up to rounding
/// of a balanced tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}
