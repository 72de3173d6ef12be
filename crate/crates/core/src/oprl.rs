//! Jacobi coefficients of measures on the real line.
//!
//! Coefficients are stored 0-based: `b[0]` is the first diagonal entry and
//! `a[0]` the first off-diagonal entry of the Jacobi matrix.

use crate::error::{Error, Result};
use crate::measures::{QuadratureMeasure, MAX_MOMENT_ORDER};

/// Iteration cap per eigenvalue in the QL sweep.
pub const QL_MAX_ITER: usize = 50;

/// Recursion coefficients, a finite prefix plus an optional constant tail.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiCoeffs {
    b: Vec<f64>,
    a: Vec<f64>,
    tail: Option<(f64, f64)>,
}

impl JacobiCoeffs {
    /// Coefficients of a finitely supported measure: `a.len() == b.len() - 1`.
    pub fn finite(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.is_empty() || a.len() + 1 != b.len() {
            return Err(Error::validation(format!(
                "finite Jacobi data needs len(a) = len(b) - 1, got {} and {}",
                b.len(),
                a.len()
            )));
        }
        let j = JacobiCoeffs { b, a, tail: None };
        j.check()?;
        Ok(j)
    }

    /// Prefix followed by `b_k = b_inf`, `a_k = a_inf`. `a` may have
    /// length `len(b)` or `len(b) - 1`; in the latter case the next `a` is
    /// taken from the tail.
    pub fn with_tail(b: Vec<f64>, a: Vec<f64>, b_inf: f64, a_inf: f64) -> Result<Self> {
        if a.len() != b.len() && a.len() + 1 != b.len() {
            return Err(Error::validation("inconsistent prefix lengths"));
        }
        if !(b_inf.is_finite() && a_inf.is_finite() && a_inf > 0.0) {
            return Err(Error::validation("tail must be finite with a_inf > 0"));
        }
        let mut a = a;
        if a.len() + 1 == b.len() {
            a.push(a_inf);
        }
        let j = JacobiCoeffs {
            b,
            a,
            tail: Some((b_inf, a_inf)),
        };
        j.check()?;
        Ok(j)
    }

    /// Purely constant sequence.
    pub fn constant(b_inf: f64, a_inf: f64) -> Result<Self> {
        Self::with_tail(Vec::new(), Vec::new(), b_inf, a_inf)
    }

    fn check(&self) -> Result<()> {
        if self.b.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("non-finite diagonal coefficient"));
        }
        if let Some(k) = self.a.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::validation(format!("a[{k}] must be positive")));
        }
        Ok(())
    }

    /// Stored diagonal prefix.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Stored off-diagonal prefix.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn tail(&self) -> Option<(f64, f64)> {
        self.tail
    }

    pub fn is_finite_measure(&self) -> bool {
        self.tail.is_none()
    }

    /// Number of diagonal entries of the finite matrix, `None` with a tail.
    pub fn size(&self) -> Option<usize> {
        match self.tail {
            None => Some(self.b.len()),
            Some(_) => None,
        }
    }

    pub fn b_at(&self, k: usize) -> Option<f64> {
        self.b.get(k).copied().or(self.tail.map(|t| t.0))
    }

    pub fn a_at(&self, k: usize) -> Option<f64> {
        self.a.get(k).copied().or(self.tail.map(|t| t.1))
    }

    /// `n x n` truncation as `(diagonal, off-diagonal)`.
    pub fn truncate(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if n == 0 {
            return Err(Error::domain("truncation size must be positive"));
        }
        if let Some(m) = self.size() {
            if n > m {
                return Err(Error::domain(format!(
                    "cannot truncate a {m}x{m} Jacobi matrix to {n}"
                )));
            }
        }
        let b = (0..n).map(|k| self.b_at(k).unwrap()).collect();
        let a = (0..n - 1).map(|k| self.a_at(k).unwrap()).collect();
        Ok((b, a))
    }

    /// Finite coefficients of the `n x n` truncation.
    pub fn truncated(&self, n: usize) -> Result<JacobiCoeffs> {
        let (b, a) = self.truncate(n)?;
        JacobiCoeffs::finite(b, a)
    }
}

/// Recursion coefficients of a discrete measure, `m` levels deep.
///
/// Runs the Lanczos process on `diag(points)` in its rotation form: points
/// are added one at a time and the Jacobi matrix is updated by an orthogonal
/// similarity, so the result does not suffer the loss of orthogonality of the
/// vector recurrence even when weights span many orders of magnitude.
pub fn lanczos(mu: &QuadratureMeasure, m: usize) -> Result<JacobiCoeffs> {
    let n = mu.len();
    if m == 0 {
        return Err(Error::domain("lanczos depth must be at least 1"));
    }
    if m > n {
        return Err(Error::domain(format!(
            "depth {m} exceeds the {n} support points"
        )));
    }
    let x = mu.points();
    let w = mu.weights();
    // p0 holds diagonal entries, p1 holds the total mass followed by a_k^2.
    let mut p0 = x.to_vec();
    let mut p1 = vec![0.0; n];
    p1[0] = w[0];
    for j in 1..n {
        let mut pn = w[j];
        let (mut gam, mut sig, mut t) = (1.0, 0.0, 0.0);
        let lam = x[j];
        for k in 0..=j {
            let rho = p1[k] + pn;
            let tmp = gam * rho;
            let tsig = sig;
            if rho <= 0.0 {
                gam = 1.0;
                sig = 0.0;
            } else {
                gam = p1[k] / rho;
                sig = pn / rho;
            }
            let tk = sig * (p0[k] - lam) - gam * t;
            p0[k] -= tk - t;
            t = tk;
            pn = if sig <= 0.0 {
                tsig * p1[k]
            } else {
                t * t / sig
            };
            p1[k] = tmp;
        }
    }
    let b = p0[..m].to_vec();
    let mut a = Vec::with_capacity(m - 1);
    for (k, &a2) in p1[1..m].iter().enumerate() {
        if !(a2 > 0.0) {
            return Err(Error::numerical(format!(
                "lanczos breakdown: a[{k}]^2 = {a2:e}"
            )));
        }
        a.push(a2.sqrt());
    }
    JacobiCoeffs::finite(b, a)
}

/// First component of the normalized eigenvector for eigenvalue `lam`,
/// squared, from a twisted factorization of `J - lam`. Components come out
/// as products of ratios, so tiny values keep their relative accuracy.
fn first_component_sq(diag: &[f64], off: &[f64], lam: f64) -> f64 {
    let n = diag.len();
    if n == 1 {
        return 1.0;
    }
    let scale = diag
        .iter()
        .chain(off)
        .fold(lam.abs(), |s, v| s.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let guard = |d: f64| if d == 0.0 { f64::EPSILON * scale } else { d };
    let mut dp = vec![0.0; n];
    let mut dm = vec![0.0; n];
    dp[0] = guard(diag[0] - lam);
    for i in 1..n {
        dp[i] = guard(diag[i] - lam - off[i - 1] * off[i - 1] / dp[i - 1]);
    }
    dm[n - 1] = guard(diag[n - 1] - lam);
    for i in (0..n - 1).rev() {
        dm[i] = guard(diag[i] - lam - off[i] * off[i] / dm[i + 1]);
    }
    let r = (0..n)
        .min_by(|&i, &j| {
            let gi = (dp[i] + dm[i] - (diag[i] - lam)).abs();
            let gj = (dp[j] + dm[j] - (diag[j] - lam)).abs();
            gi.total_cmp(&gj)
        })
        .unwrap();
    let mut z = vec![0.0; n];
    z[r] = 1.0;
    for i in (0..r).rev() {
        z[i] = -off[i] * z[i + 1] / dp[i];
    }
    for i in r..n - 1 {
        z[i + 1] = -off[i] * z[i] / dm[i + 1];
    }
    let norm2: f64 = z.iter().map(|v| v * v).sum();
    z[0] * z[0] / norm2
}

/// Eigenvalues of a symmetric tridiagonal matrix and the first component of
/// each normalized eigenvector. Implicit QL with Wilkinson shift.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::validation("tridiagonal shape mismatch"));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::numerical(format!(
                    "QL did not converge for eigenvalue {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zi1 = z[i + 1];
                z[i + 1] = s * z[i] + c * zi1;
                z[i] = c * z[i] - s * zi1;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Gauss quadrature of the `n x n` truncation: eigenvalues with squared
/// first eigenvector components as weights.
pub fn golub_welsch(j: &JacobiCoeffs, n: usize) -> Result<QuadratureMeasure> {
    let (b, a) = j.truncate(n)?;
    let (pts, _) = tridiagonal_eigen(&b, &a)?;
    let pairs: Vec<(f64, f64)> = pts
        .into_iter()
        .map(|x| (x, first_component_sq(&b, &a, x)))
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    QuadratureMeasure::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total)).collect())
}

/// Parameters `z_1, z_2, ...` with `b_k = z_{2k-2} + z_{2k-1}`,
/// `a_k^2 = z_{2k-1} z_{2k}` and `z_0 = 0`. `z[0]` holds `z_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZCoeffs {
    z: Vec<f64>,
    tail: Option<(f64, f64)>,
}

impl ZCoeffs {
    pub fn new(z: Vec<f64>, tail: Option<(f64, f64)>) -> Result<Self> {
        if z.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::validation("z parameters must be nonnegative"));
        }
        if let Some((o, e)) = tail {
            if !(o > 0.0 && e > 0.0 && o.is_finite() && e.is_finite()) {
                return Err(Error::validation("z tail must be positive"));
            }
        }
        Ok(ZCoeffs { z, tail })
    }

    /// The alternating sequence `(1, tau, 1, tau, ...)`.
    pub fn marchenko_pastur(tau: f64) -> Result<Self> {
        Self::new(Vec::new(), Some((1.0, tau)))
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn tail(&self) -> Option<(f64, f64)> {
        self.tail
    }

    /// `z_k` for 1-based `k`.
    pub fn get(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return Some(0.0);
        }
        self.z
            .get(k - 1)
            .copied()
            .or_else(|| self.tail.map(|(o, e)| if k % 2 == 1 { o } else { e }))
    }

    /// Multiplies `z_1` by `theta`.
    pub fn scale_first(&self, theta: f64) -> Result<Self> {
        let mut z = self.z.clone();
        if z.is_empty() {
            z.push(
                self.get(1)
                    .ok_or_else(|| Error::domain("empty z sequence"))?,
            );
        }
        z[0] *= theta;
        Self::new(z, self.tail)
    }
}

pub fn z_compose(zc: &ZCoeffs) -> Result<JacobiCoeffs> {
    let len = zc.z.len();
    match zc.tail {
        None => {
            if len == 0 {
                return Err(Error::validation("empty z sequence"));
            }
            let n = len.div_ceil(2);
            let b: Vec<f64> = (1..=n)
                .map(|k| zc.get(2 * k - 2).unwrap() + zc.get(2 * k - 1).unwrap())
                .collect();
            let na = len / 2;
            let a: Vec<f64> = (1..=na)
                .map(|k| (zc.get(2 * k - 1).unwrap() * zc.get(2 * k).unwrap()).sqrt())
                .collect();
            if na == n {
                return Err(Error::validation("finite z sequence must have odd length"));
            }
            JacobiCoeffs::finite(b, a)
        }
        Some((o, e)) => {
            let n = len / 2 + 2;
            let b = (1..=n)
                .map(|k| zc.get(2 * k - 2).unwrap() + zc.get(2 * k - 1).unwrap())
                .collect();
            let a = (1..=n)
                .map(|k| (zc.get(2 * k - 1).unwrap() * zc.get(2 * k).unwrap()).sqrt())
                .collect();
            JacobiCoeffs::with_tail(b, a, o + e, (o * e).sqrt())
        }
    }
}

const Z_TAIL_STEPS: usize = 100_000;

pub fn z_decompose(j: &JacobiCoeffs) -> Result<ZCoeffs> {
    let not_positive = || Error::domain("not supported on [0,∞)");
    let mut z = Vec::new();
    let mut prev = 0.0;
    let push_pair = |bk: f64, ak: Option<f64>, prev: &mut f64, z: &mut Vec<f64>| -> Result<()> {
        let odd = bk - *prev;
        let tol = 1e-13 * bk.abs().max(1.0);
        if odd < -tol {
            return Err(not_positive());
        }
        let odd = odd.max(0.0);
        z.push(odd);
        if let Some(ak) = ak {
            if odd <= 0.0 {
                return Err(not_positive());
            }
            let even = ak * ak / odd;
            z.push(even);
            *prev = even;
        }
        Ok(())
    };
    match j.tail() {
        None => {
            let n = j.b.len();
            for k in 0..n {
                push_pair(j.b[k], j.a.get(k).copied(), &mut prev, &mut z)?;
            }
            ZCoeffs::new(z, None)
        }
        Some((bi, ai)) => {
            let disc = bi * bi - 4.0 * ai * ai;
            if bi <= 0.0 || disc < 0.0 {
                return Err(not_positive());
            }
            let root = disc.sqrt();
            let (zo, ze) = (0.5 * (bi + root), 0.5 * (bi - root));
            let stored = j.b.len().max(j.a.len());
            for k in 0..stored {
                push_pair(j.b_at(k).unwrap(), j.a_at(k), &mut prev, &mut z)?;
            }
            let mut steps = 0;
            while (prev - ze).abs() > 1e-14 * bi && steps < Z_TAIL_STEPS {
                push_pair(bi, Some(ai), &mut prev, &mut z)?;
                steps += 1;
            }
            ZCoeffs::new(z, Some((zo, ze)))
        }
    }
}

/// Coefficients of the pushforward under `y = (x - s) / r`.
pub fn jacobi_affine(j: &JacobiCoeffs, r: f64, s: f64) -> Result<JacobiCoeffs> {
    if r == 0.0 || !r.is_finite() || !s.is_finite() {
        return Err(Error::domain("affine map needs finite nonzero scale"));
    }
    let b = j.b.iter().map(|v| (v - s) / r).collect();
    let a = j.a.iter().map(|v| v / r.abs()).collect();
    let out = JacobiCoeffs {
        b,
        a,
        tail: j.tail.map(|(bt, at)| ((bt - s) / r, at / r.abs())),
    };
    out.check()?;
    Ok(out)
}

/// Moments `m_1..m_K` as `(J^k)_{11}`.
pub fn jacobi_moments(j: &JacobiCoeffs, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::domain(format!(
            "moment order {k} outside 1..={MAX_MOMENT_ORDER}"
        )));
    }
    let n = match j.size() {
        Some(m) => m.min(k + 1),
        None => k + 1,
    };
    let (b, a) = j.truncate(n)?;
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        v = tridiag_apply(&b, &a, &v);
        out.push(v[0]);
    }
    Ok(out)
}

fn tridiag_apply(b: &[f64], a: &[f64], v: &[f64]) -> Vec<f64> {
    let n = b.len();
    (0..n)
        .map(|i| {
            let mut s = b[i] * v[i];
            if i > 0 {
                s += a[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += a[i] * v[i + 1];
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sc_gauss(n: usize) -> QuadratureMeasure {
        let np1 = (n + 1) as f64;
        QuadratureMeasure::new(
            (1..=n).map(|k| 2.0 * (k as f64 * PI / np1).cos()).collect(),
            (1..=n)
                .map(|k| 2.0 / np1 * (k as f64 * PI / np1).sin().powi(2))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lanczos_on_semicircle_gauss_rule() {
        let j = lanczos(&sc_gauss(512), 20).unwrap();
        assert!(j.b().iter().all(|b| b.abs() < 1e-10));
        assert!(j.a().iter().all(|a| (a - 1.0).abs() < 1e-10));
    }

    #[test]
    fn lanczos_dirac() {
        let j = lanczos(&QuadratureMeasure::dirac(0.7), 1).unwrap();
        assert_eq!(j.b(), &[0.7]);
        assert!(lanczos(&QuadratureMeasure::dirac(0.7), 2).is_err());
    }

    #[test]
    fn golub_welsch_two_by_two() {
        let j = JacobiCoeffs::finite(vec![0.0, 0.0], vec![1.0]).unwrap();
        let q = golub_welsch(&j, 2).unwrap();
        assert!((q.points()[0] + 1.0).abs() < 1e-15 && (q.points()[1] - 1.0).abs() < 1e-15);
        assert!(q.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));
        let d = golub_welsch(&JacobiCoeffs::finite(vec![3.0], vec![]).unwrap(), 1).unwrap();
        assert_eq!(d, QuadratureMeasure::dirac(3.0));
    }

    #[test]
    fn gauss_rule_from_free_coefficients() {
        let j = JacobiCoeffs::constant(0.0, 1.0).unwrap();
        let q = golub_welsch(&j, 40).unwrap();
        let want = sc_gauss(40);
        for (x, y) in q.points().iter().zip(want.points()) {
            assert!((x - y).abs() < 1e-13);
        }
        for (x, y) in q.weights().iter().zip(want.weights()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn marchenko_pastur_pattern() {
        let tau: f64 = 0.5;
        let j = z_compose(&ZCoeffs::marchenko_pastur(tau).unwrap()).unwrap();
        assert_eq!(j.b_at(0), Some(1.0));
        for k in 1..6 {
            assert!((j.b_at(k).unwrap() - 1.5).abs() < 1e-15);
        }
        for k in 0..6 {
            assert!((j.a_at(k).unwrap() - tau.sqrt()).abs() < 1e-15);
        }
        let m = jacobi_moments(&j, 2).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-15);
        assert!((m[1] - (1.0 + tau)).abs() < 1e-15);
    }

    #[test]
    fn z_of_dirac() {
        let z = z_decompose(&JacobiCoeffs::finite(vec![1.0], vec![]).unwrap()).unwrap();
        assert_eq!(z.z(), &[1.0]);
        let neg = JacobiCoeffs::finite(vec![-1.0], vec![]).unwrap();
        assert!(matches!(z_decompose(&neg), Err(Error::Domain(_))));
    }

    #[test]
    fn spike_on_first_z() {
        let tau = 0.5;
        let theta = 2.0;
        let z = ZCoeffs::marchenko_pastur(tau)
            .unwrap()
            .scale_first(theta)
            .unwrap();
        let j = z_compose(&z).unwrap();
        assert_eq!(j.b_at(0), Some(theta));
        assert!((j.a_at(0).unwrap() - (theta * tau).sqrt()).abs() < 1e-15);
        assert!((j.b_at(1).unwrap() - (1.0 + tau)).abs() < 1e-15);
        assert!((j.a_at(1).unwrap() - tau.sqrt()).abs() < 1e-15);
        assert_eq!(j.b_at(7), Some(1.0 + tau));
    }

    #[test]
    fn decompose_tail_recovers_mp() {
        let j =
            JacobiCoeffs::with_tail(vec![1.0], vec![0.5f64.sqrt()], 1.5, 0.5f64.sqrt()).unwrap();
        let z = z_decompose(&j).unwrap();
        let (o, e) = z.tail().unwrap();
        assert!((o - 1.0).abs() < 1e-12 && (e - 0.5).abs() < 1e-12);
        let back = z_compose(&z).unwrap();
        for k in 0..10 {
            assert!((back.b_at(k).unwrap() - j.b_at(k).unwrap()).abs() < 1e-12);
            assert!((back.a_at(k).unwrap() - j.a_at(k).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_on_coefficients() {
        let j = JacobiCoeffs::with_tail(vec![0.3, -0.2], vec![0.9], 0.1, 1.2).unwrap();
        assert_eq!(jacobi_affine(&j, 1.0, 0.0).unwrap(), j);
        let f = jacobi_affine(&j, -1.0, 0.0).unwrap();
        assert_eq!(f.b(), &[-0.3, 0.2]);
        assert_eq!(f.a(), j.a());
        assert!(jacobi_affine(&j, 0.0, 0.0).is_err());
    }

    #[test]
    fn affine_commutes_with_lanczos() {
        let q = sc_gauss(64);
        let (r, s) = (-1.7, 0.4);
        let lhs = lanczos(&q.affine_map(r, s).unwrap(), 12).unwrap();
        let rhs = jacobi_affine(&lanczos(&q, 12).unwrap(), r, s).unwrap();
        for (x, y) in lhs.b().iter().zip(rhs.b()) {
            assert!((x - y).abs() < 1e-8);
        }
        for (x, y) in lhs.a().iter().zip(rhs.a()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn moments_of_free_case() {
        let j = JacobiCoeffs::constant(0.0, 1.0).unwrap();
        let m = jacobi_moments(&j, 8).unwrap();
        assert_eq!(m, vec![0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0]);
        assert!(jacobi_moments(&j, 65).is_err());
    }

    fn random_jacobi() -> impl Strategy<Value = JacobiCoeffs> {
        (2usize..=50).prop_flat_map(|n| {
            (
                prop::collection::vec(-2.0f64..2.0, n),
                prop::collection::vec(0.5f64..2.0, n - 1),
            )
                .prop_map(|(b, a)| JacobiCoeffs::finite(b, a).unwrap())
        })
    }

    proptest! {
        #[test]
        fn lanczos_inverts_golub_welsch(j in random_jacobi()) {
            let n = j.size().unwrap();
            let q = golub_welsch(&j, n).unwrap();
            let back = lanczos(&q, n).unwrap();
            for (x, y) in back.b().iter().zip(j.b()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            for (x, y) in back.a().iter().zip(j.a()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn gauss_moments_match_coefficient_moments(j in random_jacobi()) {
            let n = j.size().unwrap();
            let q = golub_welsch(&j, n).unwrap();
            let k = (2 * n - 1).min(12);
            let mj = jacobi_moments(&j, k).unwrap();
            for (p, m) in mj.iter().enumerate() {
                let mq = q.integrate(|x| x.powi(p as i32 + 1));
                prop_assert!((mq - m).abs() < 1e-9 * m.abs().max(1.0));
            }
        }

        #[test]
        fn z_round_trip(z in prop::collection::vec(0.1f64..3.0, 1usize..15)) {
            let len = if z.len() % 2 == 0 { z.len() - 1 } else { z.len() };
            let zc = ZCoeffs::new(z[..len].to_vec(), None).unwrap();
            let j = z_compose(&zc).unwrap();
            let back = z_compose(&z_decompose(&j).unwrap()).unwrap();
            for (x, y) in back.b().iter().zip(j.b()) {
                prop_assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
            }
            for (x, y) in back.a().iter().zip(j.a()) {
                prop_assert!((x - y).abs() < 1e-12 * y.abs().max(1.0));
            }
        }
    }
}
