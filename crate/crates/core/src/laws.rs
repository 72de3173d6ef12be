//! Closed-form catalog: equilibrium laws, limits of the spiked models and
//! the free Meixner family.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::{Atom, MeasureCircle, MeasureLine};
use crate::oprl::{z_compose, JacobiCoeffs, ZCoeffs};
use crate::opuc::{aleksandrov, aleksandrov_measure, gross_witten, gw_alpha, VerblunskyCoeffs};
use crate::quad;

/// Tolerance below which a positive-part formula counts as vanishing.
pub const KINK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawSpec {
    Sc,
    Mp { tau: f64 },
    Gw { g: f64 },
    SpikedSc { theta: f64 },
    SpikedMp { tau: f64, theta: f64 },
    SpikedGw { g: f64, phi: f64 },
    Meixner { b: f64, c: f64 },
    MeixnerNormalized { b: f64, c: f64 },
}

#[derive(Debug, Clone)]
pub enum Law {
    Line(MeasureLine),
    Circle(MeasureCircle),
}

impl Law {
    pub fn line(self) -> Result<MeasureLine> {
        match self {
            Law::Line(m) => Ok(m),
            Law::Circle(_) => Err(Error::validation("law lives on the circle")),
        }
    }

    pub fn circle(self) -> Result<MeasureCircle> {
        match self {
            Law::Circle(m) => Ok(m),
            Law::Line(_) => Err(Error::validation("law lives on the line")),
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("tau = {tau} outside (0, 1]")))
    }
}

fn check_g(g: f64) -> Result<()> {
    if g.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("|g| = {} exceeds 1", g.abs())))
    }
}

fn check_c(c: f64) -> Result<()> {
    if c > -1.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("c = {c} must exceed -1")))
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite")))
    }
}

impl LawSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LawSpec::Sc => Ok(()),
            LawSpec::Mp { tau } => check_tau(tau),
            LawSpec::Gw { g } => check_g(g),
            LawSpec::SpikedSc { theta } => check_finite("theta", theta),
            LawSpec::SpikedMp { tau, theta } => {
                check_tau(tau)?;
                if tau == 1.0 {
                    return Err(Error::domain(
                        "spiked Laguerre limit is only available for tau < 1",
                    ));
                }
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(Error::domain(format!("theta = {theta} must be positive")));
                }
                Ok(())
            }
            LawSpec::SpikedGw { g, phi } => {
                check_g(g)?;
                check_finite("phi", phi)
            }
            LawSpec::Meixner { b, c } | LawSpec::MeixnerNormalized { b, c } => {
                check_finite("b", b)?;
                check_c(c)
            }
        }
    }

    /// Jacobi coefficients, for laws on the line.
    pub fn jacobi(&self) -> Result<JacobiCoeffs> {
        self.validate()?;
        match *self {
            LawSpec::Sc => JacobiCoeffs::constant(0.0, 1.0),
            LawSpec::Mp { tau } => z_compose(&ZCoeffs::marchenko_pastur(tau)?),
            LawSpec::SpikedSc { theta } => {
                JacobiCoeffs::with_tail(vec![theta], vec![1.0], 0.0, 1.0)
            }
            LawSpec::SpikedMp { tau, theta } => {
                z_compose(&ZCoeffs::marchenko_pastur(tau)?.scale_first(theta)?)
            }
            LawSpec::Meixner { b, c } => meixner_jacobi(b, c),
            LawSpec::MeixnerNormalized { b, c } => meixner_jacobi_normalized(b, c),
            _ => Err(Error::validation("law lives on the circle")),
        }
    }

    /// The first `n` Verblunsky coefficients, for laws on the circle.
    pub fn verblunsky(&self, n: usize) -> Result<VerblunskyCoeffs> {
        self.validate()?;
        let (g, phi) = match *self {
            LawSpec::Gw { g } => (g, 0.0),
            LawSpec::SpikedGw { g, phi } => (g, phi),
            _ => return Err(Error::validation("law lives on the line")),
        };
        let a = (0..n).map(|k| gw_alpha(g, k)).collect::<Result<Vec<_>>>()?;
        Ok(aleksandrov(&VerblunskyCoeffs::infinite(a)?, phi))
    }
}

pub fn build(spec: LawSpec) -> Result<Law> {
    spec.validate()?;
    Ok(match spec {
        LawSpec::Sc => Law::Line(semicircle()),
        LawSpec::Mp { tau } => Law::Line(marchenko_pastur(tau)?),
        LawSpec::Gw { g } => Law::Circle(gross_witten(g)?),
        LawSpec::SpikedSc { theta } => Law::Line(spiked_semicircle(theta)?),
        LawSpec::SpikedMp { tau, theta } => Law::Line(spiked_marchenko_pastur(tau, theta)?),
        LawSpec::SpikedGw { g, phi } => Law::Circle(aleksandrov_measure(&gross_witten(g)?, phi)?),
        LawSpec::Meixner { b, c } => Law::Line(meixner(b, c)?),
        LawSpec::MeixnerNormalized { b, c } => Law::Line(meixner_normalized(b, c)?),
    })
}

pub fn semicircle() -> MeasureLine {
    MeasureLine::new((-2.0, 2.0), sc_density, Vec::new()).expect("semicircle is valid")
}

pub fn sc_density(x: f64) -> f64 {
    (4.0 - x * x).max(0.0).sqrt() / (2.0 * PI)
}

/// Edges `(τ⁻, τ⁺) = ((1 - sqrt τ)^2, (1 + sqrt τ)^2)`.
pub fn mp_edges(tau: f64) -> (f64, f64) {
    let s = tau.sqrt();
    ((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s))
}

pub fn mp_density(x: f64, tau: f64) -> f64 {
    let (lo, hi) = mp_edges(tau);
    if x <= 0.0 {
        return 0.0;
    }
    ((hi - x) * (x - lo)).max(0.0).sqrt() / (2.0 * PI * tau * x)
}

pub fn marchenko_pastur(tau: f64) -> Result<MeasureLine> {
    check_tau(tau)?;
    MeasureLine::new(mp_edges(tau), move |x| mp_density(x, tau), Vec::new())
}

/// Limit of the spiked GUE spectral measure: density
/// `sqrt(4 - x^2) / (2π (1 + θ^2 - θx))` and an outlier at `θ + 1/θ` when `|θ| > 1`.
pub fn spiked_semicircle(theta: f64) -> Result<MeasureLine> {
    check_finite("theta", theta)?;
    if theta == 0.0 {
        return Ok(semicircle());
    }
    let mut atoms = Vec::new();
    let mass = 1.0 - 1.0 / (theta * theta);
    if mass > 0.0 {
        atoms.push(Atom::new(theta + 1.0 / theta, mass));
    }
    let d = 1.0 + theta * theta;
    let nodes = quad::nodes_near_pole(-2.0, 2.0, theta + 1.0 / theta);
    MeasureLine::with_nodes(
        (-2.0, 2.0),
        Arc::new(move |x| sc_density(x) / (d - theta * x)),
        atoms,
        nodes,
    )
}

/// Outlier `(w, v)` of the spiked Laguerre limit, or `None` below threshold.
/// The mass is `((θ-1)^2 - τ)_+ / ((θ-1)(θ+τ-1))`, which is what makes the
/// measure a probability measure.
pub fn spiked_mp_outlier(tau: f64, theta: f64) -> Option<(f64, f64)> {
    let num = (theta - 1.0).powi(2) - tau;
    if theta == 1.0 || num <= 0.0 {
        return None;
    }
    let v = num / ((theta - 1.0) * (theta + tau - 1.0));
    let w = -(theta + tau - 1.0) / (1.0 / theta - 1.0);
    Some((w, v))
}

/// Limit of the spiked LUE spectral measure for `τ < 1`.
pub fn spiked_marchenko_pastur(tau: f64, theta: f64) -> Result<MeasureLine> {
    LawSpec::SpikedMp { tau, theta }.validate()?;
    if theta == 1.0 {
        return marchenko_pastur(tau);
    }
    let atoms = spiked_mp_outlier(tau, theta)
        .map(|(w, v)| vec![Atom::new(w, v)])
        .unwrap_or_default();
    let (p, q) = (theta + tau - 1.0, 1.0 / theta - 1.0);
    let (lo, hi) = mp_edges(tau);
    MeasureLine::with_nodes(
        (lo, hi),
        Arc::new(move |x| {
            let r = 4.0 * tau - (x - (1.0 + tau)).powi(2);
            r.max(0.0).sqrt() / (2.0 * PI * x * (p + x * q))
        }),
        atoms,
        quad::nodes_near_pole(lo, hi, -p / q),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeixnerCase {
    FreeGaussian,
    FreePoisson,
    FreeBinomial,
    FreeHyperbolicTangent,
    FreeGamma,
    FreePascal,
}

impl fmt::Display for MeixnerCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeixnerCase::FreeGaussian => "free Gaussian",
            MeixnerCase::FreePoisson => "free Poisson",
            MeixnerCase::FreeBinomial => "free binomial",
            MeixnerCase::FreeHyperbolicTangent => "free hyperbolic tangent",
            MeixnerCase::FreeGamma => "free Gamma",
            MeixnerCase::FreePascal => "free Pascal",
        })
    }
}

pub fn meixner_classify(b: f64, c: f64) -> Result<MeixnerCase> {
    check_finite("b", b)?;
    check_c(c)?;
    let disc = b * b - 4.0 * c;
    Ok(if c == 0.0 {
        if b == 0.0 {
            MeixnerCase::FreeGaussian
        } else {
            MeixnerCase::FreePoisson
        }
    } else if c < 0.0 {
        MeixnerCase::FreeBinomial
    } else if disc < 0.0 {
        MeixnerCase::FreeHyperbolicTangent
    } else if disc == 0.0 {
        MeixnerCase::FreeGamma
    } else {
        MeixnerCase::FreePascal
    })
}

/// Real roots of `1 + bx + cx^2`.
fn denominator_roots(b: f64, c: f64) -> Vec<f64> {
    if c == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-1.0 / b] };
    }
    let disc = b * b - 4.0 * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // Stable pair: q = -(b + sign(b) sq) / 2, roots q/c and 1/q.
    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
    let mut r = vec![q / c, 1.0 / q];
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// Atoms of `μ_{b,c}` from the residues of its Cauchy transform
/// `G(z) = 1 / (z - G_t(z))`, `G_t` the transform of the constant tail.
pub fn meixner_atoms(b: f64, c: f64) -> Result<Vec<Atom>> {
    check_finite("b", b)?;
    check_c(c)?;
    let s2 = 1.0 + c;
    let half = 2.0 * s2.sqrt();
    let mut out = Vec::new();
    for x in denominator_roots(b, c) {
        let u = x - b;
        if u.abs() <= half {
            continue;
        }
        let sq = u.signum() * (u * u - 4.0 * s2).sqrt();
        // Physical pole: x = G_t(x) on the branch that decays at infinity.
        let lhs = u - 2.0 * s2 * x;
        if (sq - lhs).abs() > 1e-9 * (1.0 + sq.abs()) {
            continue;
        }
        let dgt = (1.0 - u / sq) / (2.0 * s2);
        let mass = 1.0 / (1.0 - dgt);
        if mass > KINK_TOL {
            out.push(Atom::new(x, mass));
        }
    }
    Ok(out)
}

/// Closed-form atom masses where one is known, kept for cross-checks
/// against [`meixner_atoms`]. Free Poisson: `(1 - b^{-2})_+` at `-1/b`. Free
/// binomial with `b = 0`: `(1 + 1/(2c))_+` at each of `±1/sqrt(-c)`. Free
/// Pascal: `(1 - (|b| - sqrt(b^2-4c)) / (2c sqrt(b^2-4c)))_+` at `x_+`, the
/// root of `1 + bx + cx^2` nearest zero. `None` where no closed form is used.
pub fn meixner_closed_form_atoms(b: f64, c: f64) -> Result<Option<Vec<Atom>>> {
    let case = meixner_classify(b, c)?;
    let keep = |v: Vec<Atom>| v.into_iter().filter(|a| a.mass > 0.0).collect::<Vec<_>>();
    Ok(match case {
        MeixnerCase::FreeGaussian | MeixnerCase::FreeHyperbolicTangent | MeixnerCase::FreeGamma => {
            Some(Vec::new())
        }
        MeixnerCase::FreePoisson => Some(keep(vec![Atom::new(
            -1.0 / b,
            (1.0 - 1.0 / (b * b)).max(0.0),
        )])),
        MeixnerCase::FreeBinomial if b == 0.0 => {
            let p = (1.0 + 1.0 / (2.0 * c)).max(0.0);
            let x = 1.0 / (-c).sqrt();
            Some(keep(vec![Atom::new(-x, p), Atom::new(x, p)]))
        }
        MeixnerCase::FreeBinomial => None,
        MeixnerCase::FreePascal => {
            let d = (b * b - 4.0 * c).sqrt();
            let p = (1.0 - (b.abs() - d) / (2.0 * c * d)).max(0.0);
            let xp = -b / (2.0 * c) + b.signum() * d / (2.0 * c);
            Some(keep(vec![Atom::new(xp, p)]))
        }
    })
}

/// `μ_{b,c}`: density `sqrt(4(1+c) - (x-b)^2) / (2π(1 + bx + cx^2))` on
/// `[b - 2 sqrt(1+c), b + 2 sqrt(1+c)]` plus atoms.
pub fn meixner(b: f64, c: f64) -> Result<MeasureLine> {
    let atoms = meixner_atoms(b, c)?;
    let half = 2.0 * (1.0 + c).sqrt();
    let (lo, hi) = (b - half, b + half);
    let nodes = denominator_roots(b, c)
        .into_iter()
        .map(|r| quad::nodes_near_pole(lo, hi, r))
        .max()
        .unwrap_or(quad::DEFAULT_NODES);
    MeasureLine::with_nodes(
        (lo, hi),
        Arc::new(move |x| {
            let r = 4.0 * (1.0 + c) - (x - b).powi(2);
            r.max(0.0).sqrt() / (2.0 * PI * (1.0 + b * x + c * x * x))
        }),
        atoms,
        nodes,
    )
}

/// `μ_{b,c}` transported onto `[-2, 2]` by `y = (x - b) / sqrt(1+c)`.
pub fn meixner_normalized(b: f64, c: f64) -> Result<MeasureLine> {
    meixner(b, c)?.affine_map((1.0 + c).sqrt(), b)
}

/// `(0, b, b, ...; 1, sqrt(1+c), sqrt(1+c), ...)`.
pub fn meixner_jacobi(b: f64, c: f64) -> Result<JacobiCoeffs> {
    check_finite("b", b)?;
    check_c(c)?;
    JacobiCoeffs::with_tail(vec![0.0], vec![1.0], b, (1.0 + c).sqrt())
}

/// `(-b/sqrt(1+c), 0, 0, ...; 1/sqrt(1+c), 1, 1, ...)`.
pub fn meixner_jacobi_normalized(b: f64, c: f64) -> Result<JacobiCoeffs> {
    check_finite("b", b)?;
    check_c(c)?;
    let s = (1.0 + c).sqrt();
    JacobiCoeffs::with_tail(vec![-b / s], vec![1.0 / s], 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::moments_line;
    use crate::oprl::lanczos;
    use approx::assert_abs_diff_eq;

    fn all_specs() -> Vec<LawSpec> {
        let mut v = vec![
            LawSpec::Sc,
            LawSpec::Mp { tau: 0.5 },
            LawSpec::Mp { tau: 1.0 },
            LawSpec::Gw { g: 0.8 },
            LawSpec::Gw { g: -1.0 },
            LawSpec::SpikedSc { theta: 2.0 },
            LawSpec::SpikedSc { theta: -1.5 },
            LawSpec::SpikedSc { theta: 0.5 },
            LawSpec::SpikedMp {
                tau: 0.5,
                theta: 2.0,
            },
            LawSpec::SpikedMp {
                tau: 0.5,
                theta: 0.2,
            },
            LawSpec::SpikedMp {
                tau: 0.3,
                theta: 1.2,
            },
            LawSpec::SpikedGw {
                g: 0.8,
                phi: PI / 3.0,
            },
        ];
        for b in [-1.5, -0.5, 0.0, 0.5, 1.5] {
            for c in [-0.75, 0.0, 0.5, 1.0] {
                v.push(LawSpec::Meixner { b, c });
                v.push(LawSpec::MeixnerNormalized { b, c });
            }
        }
        v.push(LawSpec::Meixner { b: 3.0, c: 1.0 });
        v.push(LawSpec::Meixner { b: 2.0, c: 1.0 });
        v
    }

    #[test]
    fn catalog_is_normalized() {
        for s in all_specs() {
            let mass = match build(s).unwrap() {
                Law::Line(m) => m.total_mass(),
                Law::Circle(m) => m.total_mass(),
            };
            assert!((mass - 1.0).abs() < 1e-8, "{s:?}: {mass}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build(LawSpec::Mp { tau: 1.5 }).is_err());
        assert!(build(LawSpec::Gw { g: 1.1 }).is_err());
        assert!(build(LawSpec::Meixner { b: 0.0, c: -1.0 }).is_err());
        assert!(build(LawSpec::SpikedMp {
            tau: 1.0,
            theta: 2.0
        })
        .is_err());
    }

    #[test]
    fn spiked_semicircle_outlier() {
        let m = spiked_semicircle(2.0).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(2.5, 0.75)]);
        let x = 0.3;
        let want = (4.0f64 - x * x).sqrt() / (2.0 * PI * (5.0 - 2.0 * x));
        assert_abs_diff_eq!(m.density_at(x), want, epsilon = 1e-15);
        assert!(spiked_semicircle(0.5).unwrap().atoms().is_empty());
    }

    #[test]
    fn spiked_laws_have_mean_theta() {
        for th in [0.5, 2.0, -1.5] {
            let m1 = moments_line(&spiked_semicircle(th).unwrap(), 1).unwrap()[0];
            assert!((m1 - th).abs() < 1e-7, "{th}: {m1}");
        }
        for (tau, th) in [(0.5, 2.0), (0.5, 0.2), (0.3, 1.2)] {
            let m1 = moments_line(&spiked_marchenko_pastur(tau, th).unwrap(), 1).unwrap()[0];
            assert!((m1 - th).abs() < 1e-7, "{tau} {th}: {m1}");
        }
    }

    #[test]
    fn spiked_mp_outlier_values() {
        let (w, v) = spiked_mp_outlier(0.5, 2.0).unwrap();
        assert_abs_diff_eq!(w, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-14);
        assert!(spiked_mp_outlier(0.5, 1.5).is_none());
        let m = spiked_marchenko_pastur(0.5, 1.0).unwrap();
        assert!(m.atoms().is_empty());
    }

    #[test]
    fn spiked_gw_at_zero_angle_is_gw() {
        let a = build(LawSpec::SpikedGw { g: 0.7, phi: 0.0 })
            .unwrap()
            .circle()
            .unwrap();
        let b = gross_witten(0.7).unwrap();
        for j in 0..1024 {
            let t = -PI + 2.0 * PI * j as f64 / 1024.0;
            assert!((a.density_at(t) - b.density_at(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn classification() {
        use MeixnerCase::*;
        let cases = [
            ((0.0, 0.0), FreeGaussian),
            ((0.5, 0.0), FreePoisson),
            ((0.0, -0.75), FreeBinomial),
            ((0.0, 0.5), FreeHyperbolicTangent),
            ((2.0, 1.0), FreeGamma),
            ((3.0, 1.0), FreePascal),
        ];
        for ((b, c), want) in cases {
            assert_eq!(meixner_classify(b, c).unwrap(), want);
        }
        assert!(meixner_classify(0.0, -1.0).is_err());
        assert_eq!(FreePascal.to_string(), "free Pascal");
    }

    #[test]
    fn binomial_atoms() {
        let a = meixner_atoms(0.0, -0.75).unwrap();
        assert_eq!(a.len(), 2);
        for (atom, sign) in a.iter().zip([-1.0, 1.0]) {
            assert_abs_diff_eq!(atom.location, sign / 0.75f64.sqrt(), epsilon = 1e-14);
            assert_abs_diff_eq!(atom.mass, 1.0 / 3.0, epsilon = 1e-14);
        }
        assert!(meixner_atoms(0.0, -0.5).unwrap().is_empty());
        assert!(meixner_atoms(0.5, 0.0).unwrap().is_empty());
    }

    // Reference atoms from the top eigenpair of a 4000-term truncation.
    #[test]
    fn atoms_match_truncation_oracle() {
        let cases = [
            ((3.0, 1.0), vec![(-0.38196601125010515, 0.8291796067500634)]),
            ((4.0, 0.5), vec![(-0.2583426132260585, 0.930955032350302)]),
            ((2.0, 0.0), vec![(-0.5, 0.75)]),
            (
                (0.7, -0.8),
                vec![
                    (-0.7630857945186592, 0.6027534027542175),
                    (1.6380857945186595, 0.14724659724578273),
                ],
            ),
        ];
        for ((b, c), want) in cases {
            let got = meixner_atoms(b, c).unwrap();
            assert_eq!(got.len(), want.len(), "{b} {c}");
            for (g, (x, p)) in got.iter().zip(want) {
                assert!(
                    (g.location - x).abs() < 1e-10 && (g.mass - p).abs() < 1e-10,
                    "{g:?}"
                );
            }
        }
        assert!(meixner_atoms(2.0, 1.0).unwrap().is_empty());
    }

    #[test]
    fn closed_forms_agree_with_residues() {
        for (b, c) in [
            (3.0, 1.0),
            (-3.0, 1.0),
            (2.5, 1.2),
            (2.0, 0.0),
            (0.0, -0.75),
            (0.0, -0.3),
        ] {
            let closed = meixner_closed_form_atoms(b, c).unwrap().unwrap();
            let res = meixner_atoms(b, c).unwrap();
            assert_eq!(closed.len(), res.len());
            for (p, r) in closed.iter().zip(&res) {
                assert!((p.location - r.location).abs() < 1e-12);
                assert!((p.mass - r.mass).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn meixner_mean_zero_variance_one() {
        for b in [-1.5, 0.0, 0.5, 1.5] {
            for c in [-0.75, 0.0, 0.5, 1.0] {
                let m = moments_line(&meixner(b, c).unwrap(), 2).unwrap();
                assert!(
                    m[0].abs() < 1e-7 && (m[1] - 1.0).abs() < 1e-7,
                    "{b} {c}: {m:?}"
                );
            }
        }
    }

    #[test]
    fn meixner_coefficients() {
        let j = meixner_jacobi(0.0, 0.0).unwrap();
        for k in 0..5 {
            assert_eq!((j.b_at(k), j.a_at(k)), (Some(0.0), Some(1.0)));
        }
        let n = meixner_jacobi_normalized(0.5, 0.5).unwrap();
        assert_abs_diff_eq!(n.b_at(0).unwrap(), -0.5 / 1.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(n.a_at(0).unwrap(), 1.0 / 1.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!((n.b_at(5), n.a_at(5)), (Some(0.0), Some(1.0)));
    }

    #[test]
    fn lanczos_recovers_meixner_coefficients() {
        let (b, c) = (0.5, 0.5);
        let q = meixner(b, c).unwrap().discretize(1024).unwrap();
        let j = lanczos(&q, 12).unwrap();
        let want = meixner_jacobi(b, c).unwrap();
        for k in 0..10 {
            assert!((j.b()[k] - want.b_at(k).unwrap()).abs() < 1e-6);
            assert!((j.a()[k] - want.a_at(k).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn spiked_mp_coefficients_match_measure() {
        let m = spiked_marchenko_pastur(0.5, 2.0)
            .unwrap()
            .discretize(2048)
            .unwrap();
        let j = lanczos(&m, 8).unwrap();
        let want = LawSpec::SpikedMp {
            tau: 0.5,
            theta: 2.0,
        }
        .jacobi()
        .unwrap();
        for k in 0..6 {
            assert!((j.b()[k] - want.b_at(k).unwrap()).abs() < 1e-8);
            assert!((j.a()[k] - want.a_at(k).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn free_poisson_affine_form() {
        let b = 2.0;
        let m = meixner(b, 0.0).unwrap().affine_map(1.0, b).unwrap();
        let y = 0.4;
        let want = (4.0f64 - y * y).sqrt() / (2.0 * PI * ((1.0 + b * b) + b * y));
        assert_abs_diff_eq!(m.density_at(y), want, epsilon = 1e-14);
        assert_abs_diff_eq!(m.atoms()[0].location, -b - 1.0 / b, epsilon = 1e-14);
        assert_abs_diff_eq!(m.atoms()[0].mass, 0.75, epsilon = 1e-14);
    }
}
