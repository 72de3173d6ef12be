//! Rate functions on the measure side and the coefficient side, and the
//! sum-rule auditor comparing them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::{marchenko_pastur, mp_edges, semicircle};
use crate::measures::{moments_circle, moments_line, MeasureCircle, MeasureLine};
use crate::oprl::{JacobiCoeffs, ZCoeffs};
use crate::opuc::{gross_witten, VerblunskyCoeffs};
use crate::quad;

/// Densities below this on a grid node count as vanishing.
pub const DENSITY_FLOOR: f64 = 1e-13;
/// Atoms farther than this outside the band are outliers.
pub const BAND_TOL: f64 = 1e-9;
/// Absolute tolerance of the adaptive quadrature for `F_L`.
pub const FL_TOL: f64 = 1e-13;

/// `G(x) = x - 1 - log x`, infinite for `x <= 0`.
pub fn g_func(x: f64) -> f64 {
    if x > 0.0 {
        let d = x - 1.0;
        d - d.ln_1p()
    } else {
        f64::INFINITY
    }
}

/// `F_H(x) = ∫_2^{|x|} sqrt(t^2 - 4) dt` for `|x| >= 2`, infinite otherwise.
pub fn f_hermite(x: f64) -> f64 {
    let y = x.abs();
    if y < 2.0 {
        return f64::INFINITY;
    }
    let r = ((y - 2.0) * (y + 2.0)).sqrt();
    0.5 * y * r - 2.0 * (0.5 * (y + r)).ln()
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("tau = {tau} outside (0, 1]")))
    }
}

/// `F_L^+` to the right of `τ⁺`, `F_L^-` to the left of `τ⁻`, infinite on
/// the band and on `(-∞, 0]`.
pub fn f_laguerre(x: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let (lo, hi) = mp_edges(tau);
    if x >= hi {
        // t = τ⁺ + s^2
        let f = |s: f64| {
            let t = hi + s * s;
            2.0 * s * s * (t - lo).sqrt() / (t * tau)
        };
        return Ok(quad::adaptive_simpson(&f, 0.0, (x - hi).sqrt(), FL_TOL));
    }
    if x > 0.0 && x <= lo && tau < 1.0 {
        // t = τ⁻ - s^2
        let f = |s: f64| {
            let t = lo - s * s;
            2.0 * s * s * (hi - t).sqrt() / (t * tau)
        };
        return Ok(quad::adaptive_simpson(&f, 0.0, (lo - x).sqrt(), FL_TOL));
    }
    Ok(f64::INFINITY)
}

/// `K(ref | μ) = ∫ log(d ref / dμ_ac) d ref` for a reference with a density.
pub fn reversed_kl_line(reference: &MeasureLine, mu: &MeasureLine) -> Result<f64> {
    let Some((lo, hi)) = reference.support() else {
        return Err(Error::validation("reference measure needs a density"));
    };
    if !mu.has_density() {
        return Ok(f64::INFINITY);
    }
    let n = reference.nodes().max(mu.nodes());
    let mut terms = Vec::with_capacity(n);
    for (x, w) in quad::cosine_rule(lo, hi, n) {
        let r = reference.density_at(x);
        if r <= 0.0 {
            continue;
        }
        let m = mu.density_at(x);
        if m <= DENSITY_FLOOR && r > DENSITY_FLOOR {
            return Ok(f64::INFINITY);
        }
        terms.push(w * r * (r / m.max(1e-300)).ln());
    }
    Ok(quad::pairwise_sum(&terms))
}

/// `K(ref | μ)` on the circle, densities with respect to `dθ/2π`.
pub fn kl_circle(reference: &MeasureCircle, mu: &MeasureCircle) -> Result<f64> {
    if !reference.has_density() {
        return Err(Error::validation("reference measure needs a density"));
    }
    if !mu.has_density() {
        return Ok(f64::INFINITY);
    }
    let n = reference.nodes().max(mu.nodes());
    let mut terms = Vec::with_capacity(n);
    for (t, w) in quad::circle_rule(n) {
        let r = reference.density_at(t);
        if r <= 0.0 {
            continue;
        }
        let m = mu.density_at(t);
        if m <= DENSITY_FLOOR && r > DENSITY_FLOOR {
            return Ok(f64::INFINITY);
        }
        terms.push(w * r * (r / m.max(1e-300)).ln());
    }
    Ok(quad::pairwise_sum(&terms))
}

fn check_g(g: f64) -> Result<()> {
    if g.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("|g| = {} exceeds 1", g.abs())))
    }
}

/// `K(GW_g | λ_0) = 1 - sqrt(1-g^2) + log((1 + sqrt(1-g^2)) / 2)`.
pub fn kl_gw_lambda0(g: f64) -> Result<f64> {
    check_g(g)?;
    let s = (1.0 - g * g).sqrt();
    Ok(1.0 - s + (0.5 * (1.0 + s)).ln())
}

/// `K(λ_0 | GW_g) = -log((1 + sqrt(1-g^2)) / 2)`.
pub fn kl_lambda0_gw(g: f64) -> Result<f64> {
    check_g(g)?;
    Ok(-(0.5 * (1.0 + (1.0 - g * g).sqrt())).ln())
}

/// `-Σ log(1 - |α_k|^2)`.
pub fn szego_sum(alpha: &VerblunskyCoeffs) -> f64 {
    if alpha.is_finite_measure() {
        return f64::INFINITY;
    }
    let terms: Vec<f64> = alpha
        .alpha()
        .iter()
        .map(|a| -(-a.norm_sqr()).ln_1p())
        .collect();
    quad::pairwise_sum(&terms)
}

/// Measure-side rate split into its relative entropy and outlier parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureRate {
    pub kl: f64,
    pub outliers: Vec<(f64, f64)>,
}

impl MeasureRate {
    pub fn infinite() -> Self {
        MeasureRate {
            kl: f64::INFINITY,
            outliers: Vec::new(),
        }
    }

    pub fn total(&self) -> f64 {
        self.kl + self.outliers.iter().map(|o| o.1).sum::<f64>()
    }
}

/// Outlier terms of `μ` against the band `[lo, hi]`, or `None` when the
/// absolutely continuous part leaks out of the band.
pub(crate) fn band_outliers(
    mu: &MeasureLine,
    lo: f64,
    hi: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<Option<Vec<(f64, f64)>>> {
    if let Some((a, b)) = mu.support() {
        if a < lo - BAND_TOL || b > hi + BAND_TOL {
            let leaks = quad::cosine_rule(a, b, mu.nodes())
                .into_iter()
                .any(|(x, _)| {
                    (x < lo - BAND_TOL || x > hi + BAND_TOL) && mu.density_at(x) > DENSITY_FLOOR
                });
            if leaks {
                return Ok(None);
            }
        }
    }
    let mut out = Vec::new();
    for atom in mu.atoms() {
        let x = atom.location;
        if x < lo - BAND_TOL || x > hi + BAND_TOL {
            out.push((x, f(x)?));
        }
    }
    Ok(Some(out))
}

pub fn rate_meas_hermite_parts(mu: &MeasureLine) -> Result<MeasureRate> {
    let Some(outliers) = band_outliers(mu, -2.0, 2.0, |x| Ok(f_hermite(x)))? else {
        return Ok(MeasureRate::infinite());
    };
    Ok(MeasureRate {
        kl: reversed_kl_line(&semicircle(), mu)?,
        outliers,
    })
}

/// `K(SC | μ) + Σ F_H(E_k)` on the one-band class, infinite off it.
pub fn rate_meas_hermite(mu: &MeasureLine) -> Result<f64> {
    Ok(rate_meas_hermite_parts(mu)?.total())
}

pub fn rate_meas_laguerre_parts(mu: &MeasureLine, tau: f64) -> Result<MeasureRate> {
    check_tau(tau)?;
    let (lo, hi) = mp_edges(tau);
    let Some(outliers) = band_outliers(mu, lo, hi, |x| f_laguerre(x, tau))? else {
        return Ok(MeasureRate::infinite());
    };
    Ok(MeasureRate {
        kl: reversed_kl_line(&marchenko_pastur(tau)?, mu)?,
        outliers,
    })
}

/// `K(MP_τ | μ) + Σ F_L^±(E_k)` on the one-band class, infinite off it.
pub fn rate_meas_laguerre(mu: &MeasureLine, tau: f64) -> Result<f64> {
    Ok(rate_meas_laguerre_parts(mu, tau)?.total())
}

/// `K(GW_g | μ)`.
pub fn rate_meas_gw(mu: &MeasureCircle, g: f64) -> Result<f64> {
    kl_circle(&gross_witten(g)?, mu)
}

/// `Σ (b_k^2 / 2 + G(a_k^2))`; finite only when the tail is `(0, 1)`.
pub fn rate_coeff_hermite(j: &JacobiCoeffs) -> Result<f64> {
    let Some((b_inf, a_inf)) = j.tail() else {
        return Ok(f64::INFINITY);
    };
    if b_inf != 0.0 || a_inf != 1.0 {
        return Ok(f64::INFINITY);
    }
    let n = j.b().len().max(j.a().len());
    let mut terms = Vec::with_capacity(2 * n);
    for k in 0..n {
        let b = j.b_at(k).unwrap_or(0.0);
        let a = j.a_at(k).unwrap_or(1.0);
        terms.push(0.5 * b * b);
        terms.push(g_func(a * a));
    }
    Ok(quad::pairwise_sum(&terms))
}

/// `Σ (G(z_{2k-1}) / τ + G(z_{2k} / τ))`; finite only when the tail is `(1, τ)`.
pub fn rate_coeff_laguerre(z: &ZCoeffs, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let Some((zo, ze)) = z.tail() else {
        return Ok(f64::INFINITY);
    };
    if g_func(zo) / tau + g_func(ze / tau) > 0.0 {
        return Ok(f64::INFINITY);
    }
    let n = z.z().len() + 2;
    let terms: Vec<f64> = (1..=n)
        .map(|k| {
            let v = z.get(k).unwrap_or(0.0);
            if k % 2 == 1 {
                g_func(v) / tau
            } else {
                g_func(v / tau)
            }
        })
        .collect();
    Ok(quad::pairwise_sum(&terms))
}

/// `K(GW_g | λ_0) - g Re(α_0 - Σ α_k conj α_{k-1}) - Σ log(1 - |α_k|^2)`.
pub fn rate_coeff_gw(alpha: &VerblunskyCoeffs, g: f64) -> Result<f64> {
    let k0 = kl_gw_lambda0(g)?;
    let szego = szego_sum(alpha);
    if szego.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let a = alpha.alpha();
    let mut cross = a.first().map_or(0.0, |x| x.re);
    for k in 1..a.len() {
        cross -= (a[k] * a[k - 1].conj()).re;
    }
    Ok(k0 - g * cross + szego)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpikedModel {
    Hermite { theta: f64 },
    Laguerre { tau: f64, theta: f64 },
    Gw { g: f64, phi: f64 },
}

/// Argument of a rate function: a measure on the line or on the circle.
#[derive(Debug, Clone, Copy)]
pub enum RateArg<'a> {
    Line(&'a MeasureLine),
    Circle(&'a MeasureCircle),
}

fn line_arg<'a>(arg: RateArg<'a>) -> Result<&'a MeasureLine> {
    match arg {
        RateArg::Line(m) => Ok(m),
        RateArg::Circle(_) => Err(Error::validation("model needs a measure on the line")),
    }
}

/// Rate of the spiked models on the measure side:
/// `I^H - θ m_1 + θ^2/2`, `I^L + (θ^{-1} - 1) m_1 / τ + log θ / τ`, and
/// `I^GW - g Re((e^{-iφ} - 1) m_1)`.
pub fn rate_spiked(model: SpikedModel, arg: RateArg<'_>) -> Result<f64> {
    match model {
        SpikedModel::Hermite { theta } => {
            let mu = line_arg(arg)?;
            let base = rate_meas_hermite(mu)?;
            if base.is_infinite() {
                return Ok(base);
            }
            let m1 = moments_line(mu, 1)?[0];
            Ok(base - theta * m1 + 0.5 * theta * theta)
        }
        SpikedModel::Laguerre { tau, theta } => {
            if !(theta > 0.0) {
                return Err(Error::domain(format!("theta = {theta} must be positive")));
            }
            let mu = line_arg(arg)?;
            let base = rate_meas_laguerre(mu, tau)?;
            if base.is_infinite() {
                return Ok(base);
            }
            let m1 = moments_line(mu, 1)?[0];
            Ok(base + (1.0 / theta - 1.0) * m1 / tau + theta.ln() / tau)
        }
        SpikedModel::Gw { g, phi } => {
            let RateArg::Circle(mu) = arg else {
                return Err(Error::validation("model needs a measure on the circle"));
            };
            let base = rate_meas_gw(mu, g)?;
            let m1 = moments_circle(mu, 1)?[0];
            let u = Complex64::from_polar(1.0, -phi) - 1.0;
            Ok(base - g * (u * m1).re)
        }
    }
}

/// Coefficient-side description matching [`RateArg`].
#[derive(Debug, Clone, Copy)]
pub enum CoeffArg<'a> {
    Jacobi(&'a JacobiCoeffs),
    Z(&'a ZCoeffs),
    Verblunsky(&'a VerblunskyCoeffs),
}

/// The spiked rates on the coefficient side, using `m_1 = b_1 = z_1` on
/// the line and `m_1 = conj α_0` on the circle.
pub fn rate_spiked_coeff(model: SpikedModel, arg: CoeffArg<'_>) -> Result<f64> {
    match (model, arg) {
        (SpikedModel::Hermite { theta }, CoeffArg::Jacobi(j)) => {
            let base = rate_coeff_hermite(j)?;
            let b1 = j.b_at(0).unwrap_or(0.0);
            Ok(base - theta * b1 + 0.5 * theta * theta)
        }
        (SpikedModel::Laguerre { tau, theta }, CoeffArg::Z(z)) => {
            let base = rate_coeff_laguerre(z, tau)?;
            let z1 = z.get(1).unwrap_or(0.0);
            Ok(base + (1.0 / theta - 1.0) * z1 / tau + theta.ln() / tau)
        }
        (SpikedModel::Gw { g, phi }, CoeffArg::Verblunsky(a)) => {
            let base = rate_coeff_gw(a, g)?;
            let a0 = a.get(0).unwrap_or_default();
            let u = Complex64::from_polar(1.0, phi) - 1.0;
            Ok(base - g * (a0 * u).re)
        }
        _ => Err(Error::validation(
            "coefficient type does not match the model",
        )),
    }
}

/// Both sides of a sum rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub measure_side: f64,
    pub coeff_side: f64,
    pub outlier_terms: Vec<(f64, f64)>,
    pub kl_term: f64,
    pub discrepancy: f64,
}

impl RateReport {
    fn new(parts: MeasureRate, coeff_side: f64) -> Self {
        let measure_side = parts.total();
        let discrepancy = if measure_side.is_finite() && coeff_side.is_finite() {
            (measure_side - coeff_side).abs()
        } else if measure_side == coeff_side {
            0.0
        } else {
            f64::INFINITY
        };
        RateReport {
            measure_side,
            coeff_side,
            outlier_terms: parts.outliers,
            kl_term: parts.kl,
            discrepancy,
        }
    }
}

/// A measure together with its recursion coefficients.
#[derive(Debug, Clone)]
pub enum SumRuleCase {
    /// Killip-Simon: `I^H_coeff(J) = I^H_meas(μ)`.
    Hermite {
        measure: MeasureLine,
        jacobi: JacobiCoeffs,
    },
    /// Laguerre: `I^L_coeff(z) = I^L_meas(μ)`.
    Laguerre {
        measure: MeasureLine,
        z: ZCoeffs,
        tau: f64,
    },
    /// Szegő: `-Σ log(1 - |α_k|^2) = K(λ_0 | μ)`.
    Szego {
        measure: MeasureCircle,
        alpha: VerblunskyCoeffs,
    },
    /// Gross-Witten: `I^GW_coeff(α) = K(GW_g | μ)`.
    Gw {
        measure: MeasureCircle,
        alpha: VerblunskyCoeffs,
        g: f64,
    },
}

pub fn sumrule_audit(case: &SumRuleCase) -> Result<RateReport> {
    Ok(match case {
        SumRuleCase::Hermite { measure, jacobi } => RateReport::new(
            rate_meas_hermite_parts(measure)?,
            rate_coeff_hermite(jacobi)?,
        ),
        SumRuleCase::Laguerre { measure, z, tau } => RateReport::new(
            rate_meas_laguerre_parts(measure, *tau)?,
            rate_coeff_laguerre(z, *tau)?,
        ),
        SumRuleCase::Szego { measure, alpha } => {
            let kl = kl_circle(&MeasureCircle::lebesgue(), measure)?;
            RateReport::new(
                MeasureRate {
                    kl,
                    outliers: Vec::new(),
                },
                szego_sum(alpha),
            )
        }
        SumRuleCase::Gw { measure, alpha, g } => {
            let kl = rate_meas_gw(measure, *g)?;
            RateReport::new(
                MeasureRate {
                    kl,
                    outliers: Vec::new(),
                },
                rate_coeff_gw(alpha, *g)?,
            )
        }
    })
}
