//! Rank-one perturbations of invariant ensembles with a polynomial
//! potential: the moment polynomial `Q_V` and the associated rate.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{moments_line, MeasureLine};
use crate::rates::{band_outliers, f_hermite, reversed_kl_line};

/// Highest potential degree accepted by [`qv_reduce`] (`2^r` words).
pub const MAX_DEGREE: usize = 12;

/// Polynomial in `θ` and the moments `m_j = (M^j)_{11}`.
///
/// A key `(p, [j_1, ..., j_k])` stands for `θ^p m_{j_1} ... m_{j_k}` with the
/// `j_i >= 1` sorted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MomentPolynomial {
    terms: BTreeMap<(u32, Vec<u32>), f64>,
}

impl MomentPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, coeff: f64, theta_power: u32, mut moments: Vec<u32>) {
        moments.sort_unstable();
        let key = (theta_power, moments);
        let v = self.terms.entry(key.clone()).or_insert(0.0);
        *v += coeff;
        if *v == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, u32, &[u32])> {
        self.terms.iter().map(|((p, m), c)| (*c, *p, m.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest moment index appearing in any term.
    pub fn max_order(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|(_, m)| m.iter().copied())
            .max()
            .unwrap_or(0) as usize
    }

    /// Value at `θ` with `moments[j - 1] = m_j`.
    pub fn eval(&self, theta: f64, moments: &[f64]) -> Result<f64> {
        if moments.len() < self.max_order() {
            return Err(Error::validation(format!(
                "need {} moments, got {}",
                self.max_order(),
                moments.len()
            )));
        }
        let mut s = 0.0;
        for ((p, m), c) in &self.terms {
            let mut t = c * theta.powi(*p as i32);
            for &j in m {
                t *= moments[j as usize - 1];
            }
            s += t;
        }
        Ok(s)
    }

    pub fn add(&self, other: &MomentPolynomial) -> MomentPolynomial {
        let mut out = self.clone();
        for (c, p, m) in other.terms() {
            out.add_term(c, p, m.to_vec());
        }
        out
    }

    pub fn scale(&self, k: f64) -> MomentPolynomial {
        let mut out = MomentPolynomial::new();
        for (c, p, m) in self.terms() {
            out.add_term(k * c, p, m.to_vec());
        }
        out
    }
}

impl fmt::Display for MomentPolynomial {
    /// Highest power of `θ` first, e.g. `θ^2 - 2 θ m1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, ((p, m), c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if i == 0 {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut factors = Vec::new();
            if mag != 1.0 {
                factors.push(format!("{mag}"));
            }
            match p {
                0 => {}
                1 => factors.push("θ".into()),
                _ => factors.push(format!("θ^{p}")),
            }
            let mut k = 0;
            while k < m.len() {
                let j = m[k];
                let run = m[k..].iter().take_while(|&&x| x == j).count();
                factors.push(if run == 1 {
                    format!("m{j}")
                } else {
                    format!("m{j}^{run}")
                });
                k += run;
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            f.write_str(&factors.join(" "))?;
        }
        Ok(())
    }
}

/// `Q_V` with `Tr V(M - θπ) - Tr V(M) = Q_V(θ, m_1, ..., m_{r-1})`, `π` the
/// projection on the first basis vector. `v[r]` is the coefficient of `x^r`.
///
/// Each word in `{M, -θπ}` with `k >= 1` projections is rotated to start
/// with `π`; it then reduces to `(-θ)^k` times the product of `(M^a)_{11}`
/// over the gaps `a` between consecutive projections (`m_0 = 1`).
pub fn qv_reduce(v: &[f64]) -> Result<MomentPolynomial> {
    let degree = v.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    if degree > MAX_DEGREE {
        return Err(Error::CostGuard(format!(
            "degree {degree} exceeds {MAX_DEGREE} (2^{degree} words)"
        )));
    }
    let mut q = MomentPolynomial::new();
    for (r, &c) in v.iter().enumerate().take(degree + 1) {
        if c == 0.0 || r == 0 {
            continue;
        }
        for word in 1u32..(1 << r) {
            let k = word.count_ones();
            let first = word.trailing_zeros();
            let mut gaps = Vec::with_capacity(k as usize);
            let mut run = 0u32;
            for step in 1..=r as u32 {
                let pos = (first + step) % r as u32;
                if word >> pos & 1 == 1 {
                    if run > 0 {
                        gaps.push(run);
                    }
                    run = 0;
                } else {
                    run += 1;
                }
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            q.add_term(sign * c, k, gaps);
        }
    }
    Ok(q)
}

/// Direct evaluation of both sides of the `Q_V` identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QvCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

fn trace_poly(v: &[f64], a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut p = DMatrix::<Complex64>::identity(n, n);
    let mut s = v.first().copied().unwrap_or(0.0) * n as f64;
    for c in v.iter().skip(1) {
        p = &p * a;
        s += c * p.trace().re;
    }
    s
}

/// `lhs = Tr V(M - θπ) - Tr V(M)` by matrix powers, `rhs = Q(θ, (M^j)_{11})`.
pub fn qv_check(
    v: &[f64],
    q: &MomentPolynomial,
    m: &DMatrix<Complex64>,
    theta: f64,
) -> Result<QvCheck> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::validation("matrix must be square and nonempty"));
    }
    let herm = (m - m.adjoint()).camax();
    if herm > 1e-12 * (1.0 + m.camax()) {
        return Err(Error::validation(format!(
            "matrix is not Hermitian ({herm:e})"
        )));
    }
    let mut shifted = m.clone();
    shifted[(0, 0)] -= Complex64::new(theta, 0.0);
    let lhs = trace_poly(v, &shifted) - trace_poly(v, m);
    let order = q.max_order();
    let mut moments = Vec::with_capacity(order);
    let mut col = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)
    });
    for _ in 0..order {
        col = m * col;
        moments.push(col[0].re);
    }
    let rhs = q.eval(theta, &moments)?;
    Ok(QvCheck {
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
    })
}

/// GUE-like Hermitian matrix scaled so its spectrum is close to `[-2, 2]`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let s = (1.0 / n as f64).sqrt();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        m[(i, i)] = Complex64::new(d * s, 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = Complex64::new(re, im) * (s / 2f64.sqrt());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// `J(μ)` before the additive normalization `inf J`, which is only known
/// when supplied by the caller.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralRate {
    pub j: f64,
    pub kl: f64,
    pub q: f64,
    pub outliers: Vec<(f64, f64)>,
    pub normalization: Option<f64>,
}

impl GeneralRate {
    /// `J - inf J` when the infimum is known.
    pub fn rate(&self) -> Option<f64> {
        self.normalization.map(|c| self.j - c)
    }
}

/// `J(μ) = K(μ_V | μ) + Q_V(θ, m_1(μ), ...) + Σ F_H(E_k)`, with outliers
/// taken relative to the support of `μ_V`.
pub fn rate_general(
    mu: &MeasureLine,
    mu_v: &MeasureLine,
    q: &MomentPolynomial,
    theta: f64,
    normalization: Option<f64>,
) -> Result<GeneralRate> {
    let Some((lo, hi)) = mu_v.support() else {
        return Err(Error::validation("equilibrium measure needs a density"));
    };
    if (mu_v.total_mass() - 1.0).abs() > 1e-8 || !mu_v.atoms().is_empty() {
        return Err(Error::validation(
            "equilibrium measure must be a normalized density",
        ));
    }
    let Some(outliers) = band_outliers(mu, lo, hi, |x| Ok(f_hermite(x)))? else {
        return Ok(GeneralRate {
            j: f64::INFINITY,
            kl: f64::INFINITY,
            q: f64::NAN,
            outliers: Vec::new(),
            normalization,
        });
    };
    let kl = reversed_kl_line(mu_v, mu)?;
    let order = q.max_order();
    let moments = if order == 0 {
        Vec::new()
    } else {
        moments_line(mu, order)?
    };
    let qv = q.eval(theta, &moments)?;
    let j = kl + qv + outliers.iter().map(|o| o.1).sum::<f64>();
    Ok(GeneralRate {
        j,
        kl,
        q: qv,
        outliers,
        normalization,
    })
}
