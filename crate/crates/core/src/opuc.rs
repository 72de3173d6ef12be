//! Verblunsky coefficients of measures on the unit circle.
//!
//! Orientation: with `c_k = ∫ e^{ikθ} dμ` the Carathéodory function is
//! `F(z) = 1 + 2 Σ conj(c_k) z^k` and `α_0 = conj(c_1)`. The CMV matrix is
//! `C = L M` with `L = Θ_0 ⊕ Θ_2 ⊕ ...`, `M = 1 ⊕ Θ_1 ⊕ Θ_3 ⊕ ...` and
//! `Θ_j = [[conj α_j, ρ_j], [ρ_j, -α_j]]`, so that `<e_1, C^k e_1> = c_k`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{MeasureCircle, MAX_MOMENT_ORDER};

/// Modulus-one detection tolerance in the Schur iteration.
pub const UNIMODULAR_TOL: f64 = 1e-10;
/// Largest dense CMV matrix.
pub const MAX_CMV: usize = 2048;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskyCoeffs {
    alpha: Vec<Complex64>,
    finite: bool,
}

impl VerblunskyCoeffs {
    /// Prefix of an infinite sequence; coefficients past the prefix are zero.
    pub fn infinite(alpha: Vec<Complex64>) -> Result<Self> {
        if let Some(k) = alpha.iter().position(|a| !(a.norm() < 1.0)) {
            return Err(Error::validation(format!(
                "|alpha_{k}| = {} must be < 1",
                alpha[k].norm()
            )));
        }
        Ok(VerblunskyCoeffs {
            alpha,
            finite: false,
        })
    }

    /// Coefficients of a measure with `len` atoms: the last one unimodular.
    pub fn finite(mut alpha: Vec<Complex64>) -> Result<Self> {
        let Some(last) = alpha.last().copied() else {
            return Err(Error::validation("empty coefficient list"));
        };
        if (last.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!(
                "last coefficient has modulus {} instead of 1",
                last.norm()
            )));
        }
        let n = alpha.len();
        alpha[n - 1] = last / last.norm();
        let mut v = Self::infinite(alpha[..n - 1].to_vec())?;
        v.alpha.push(alpha[n - 1]);
        v.finite = true;
        Ok(v)
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_finite_measure(&self) -> bool {
        self.finite
    }

    /// `α_k`, zero past the stored prefix of an infinite sequence.
    pub fn get(&self, k: usize) -> Option<Complex64> {
        match self.alpha.get(k) {
            Some(a) => Some(*a),
            None if !self.finite => Some(ZERO),
            None => None,
        }
    }

    /// Real part of the trace of the CMV matrix,
    /// `Re(conj α_0 - Σ_{k≥1} conj α_k α_{k-1})`.
    pub fn re_trace(&self) -> f64 {
        let a = &self.alpha;
        let mut s = a.first().map_or(0.0, |x| x.re);
        for k in 1..a.len() {
            s -= (a[k].conj() * a[k - 1]).re;
        }
        s
    }
}

fn series_div(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut q = vec![ZERO; len];
    for n in 0..len {
        let mut s = a.get(n).copied().unwrap_or(ZERO);
        for k in 1..=n.min(b.len().saturating_sub(1)) {
            s -= b[k] * q[n - k];
        }
        q[n] = s / b[0];
    }
    q
}

/// Verblunsky coefficients from trigonometric moments `c_1..c_K` by the
/// Schur algorithm on truncated power series.
pub fn schur_verblunsky(c: &[Complex64]) -> Result<VerblunskyCoeffs> {
    let k = c.len();
    if k == 0 {
        return Err(Error::domain("need at least one moment"));
    }
    // F + 1 = 2 + 2 Σ conj(c_j) z^j; (F - 1)/z = 2 Σ conj(c_{j+1}) z^j.
    let mut denom = vec![Complex64::new(2.0, 0.0)];
    denom.extend(c.iter().map(|x| 2.0 * x.conj()));
    let numer: Vec<Complex64> = c.iter().map(|x| 2.0 * x.conj()).collect();
    let mut f = series_div(&numer, &denom, k);
    let mut alpha = Vec::with_capacity(k);
    for step in 0..k {
        let gamma = f[0];
        let m = gamma.norm();
        if m > 1.0 + UNIMODULAR_TOL {
            return Err(Error::NotMomentSequence { step, modulus: m });
        }
        if m >= 1.0 - UNIMODULAR_TOL {
            alpha.push(gamma / m);
            return VerblunskyCoeffs::finite(alpha);
        }
        alpha.push(gamma);
        let len = f.len() - 1;
        if len == 0 {
            break;
        }
        // f_{n+1} = (f_n - γ) / (z (1 - conj(γ) f_n))
        let num: Vec<Complex64> = f[1..].to_vec();
        let mut den: Vec<Complex64> = f.iter().map(|x| -gamma.conj() * x).collect();
        den[0] += ONE;
        f = series_div(&num, &den, len);
    }
    VerblunskyCoeffs::infinite(alpha)
}

fn rho(a: Complex64) -> f64 {
    (1.0 - a.norm_sqr()).max(0.0).sqrt()
}

/// Applies the 2x2 blocks starting at `first` (0 for L, 1 for M) to `v`.
/// A block that would run past the end is truncated to `conj α`.
fn apply_blocks(alpha: &[Complex64], first: usize, v: &mut [Complex64]) {
    let n = v.len();
    let mut j = first;
    while j < n {
        let a = alpha[j];
        if j + 1 < n {
            let r = rho(a);
            let (x, y) = (v[j], v[j + 1]);
            v[j] = a.conj() * x + r * y;
            v[j + 1] = r * x - a * y;
        } else {
            v[j] *= a.conj();
        }
        j += 2;
    }
}

/// `C v` for the CMV matrix of the first `v.len()` coefficients, in O(n).
pub fn apply_cmv(alpha: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut w = v.to_vec();
    apply_blocks(alpha, 1, &mut w);
    apply_blocks(alpha, 0, &mut w);
    w
}

/// Dense CMV matrix of a finite coefficient list.
pub fn cmv_build(alpha: &VerblunskyCoeffs) -> Result<DMatrix<Complex64>> {
    if !alpha.is_finite_measure() {
        return Err(Error::validation(
            "CMV matrix needs a finite-measure coefficient list",
        ));
    }
    let n = alpha.len();
    if n > MAX_CMV {
        return Err(Error::domain(format!("CMV size {n} exceeds {MAX_CMV}")));
    }
    let mut c = DMatrix::from_element(n, n, ZERO);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = ZERO);
        e[j] = ONE;
        let col = apply_cmv(alpha.alpha(), &e);
        for (i, x) in col.into_iter().enumerate() {
            c[(i, j)] = x;
        }
    }
    Ok(c)
}

/// `c_1..c_K` as `<e_1, C^k e_1>`.
pub fn verblunsky_moments(alpha: &VerblunskyCoeffs, k: usize) -> Result<Vec<Complex64>> {
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::domain(format!(
            "moment order {k} outside 1..={MAX_MOMENT_ORDER}"
        )));
    }
    let coeffs: Vec<Complex64> = if alpha.is_finite_measure() && alpha.len() <= k + 1 {
        alpha.alpha().to_vec()
    } else {
        // c_1..c_K depend on α_0..α_{K-1} only; close the matrix with α_K = 1.
        let mut a: Vec<Complex64> = (0..k).map(|j| alpha.get(j).unwrap()).collect();
        a.push(ONE);
        a
    };
    let n = coeffs.len();
    let mut v = vec![ZERO; n];
    v[0] = ONE;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        v = apply_cmv(&coeffs, &v);
        out.push(v[0]);
    }
    Ok(out)
}

/// Carathéodory function `F_μ(z) = ∫ (e^{iθ}+z)/(e^{iθ}-z) dμ`, `|z| != 1`.
pub fn caratheodory(mu: &MeasureCircle, z: Complex64) -> Result<Complex64> {
    if (z.norm() - 1.0).abs() < 1e-15 {
        return Err(Error::domain(
            "Carathéodory function is evaluated off the circle",
        ));
    }
    if let Some(f) = mu.caratheodory_fn() {
        return Ok(f(z));
    }
    let kernel = |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        (e + z) / (e - z)
    };
    let re = mu.integrate_ac(|t| kernel(t).re);
    let im = mu.integrate_ac(|t| kernel(t).im);
    let atoms: Complex64 = mu.atoms().iter().map(|a| a.mass * kernel(a.location)).sum();
    Ok(Complex64::new(re, im) + atoms)
}

/// `lim_{r↑1} Re F(r e^{iθ})` along `r_j = 1 - 2^{-j}` with one Richardson
/// step. A limit growing like `1/(1-r)` is reported as a singular point.
pub fn density_recover(f: &dyn Fn(Complex64) -> Complex64, theta: f64) -> Result<f64> {
    let val = |j: i32| f(Complex64::from_polar(1.0 - 2f64.powi(-j), theta)).re;
    let mut prev = val(1);
    let mut prev_extrap: Option<f64> = None;
    for j in 2..=48 {
        let cur = val(j);
        let extrap = 2.0 * cur - prev;
        if let Some(pe) = prev_extrap {
            if (extrap - pe).abs() <= 1e-11 * extrap.abs().max(1.0) {
                return Ok(extrap);
            }
        }
        if cur.abs() > 1e6 && (cur / prev - 2.0).abs() < 0.05 {
            return Err(Error::SingularPoint(theta));
        }
        prev = cur;
        prev_extrap = Some(extrap);
    }
    let residual = (2.0 * val(48) - val(47) - prev_extrap.unwrap_or(0.0)).abs();
    Err(Error::Accuracy {
        what: format!("boundary limit at angle {theta}"),
        residual,
    })
}

/// Rotation `α_k ↦ e^{-iφ} α_k`.
pub fn aleksandrov(alpha: &VerblunskyCoeffs, phi: f64) -> VerblunskyCoeffs {
    let u = Complex64::from_polar(1.0, -phi);
    VerblunskyCoeffs {
        alpha: alpha.alpha().iter().map(|a| u * a).collect(),
        finite: alpha.is_finite_measure(),
    }
}

/// Measure whose coefficients are `e^{-iφ} α_k(μ)`. Needs an absolutely
/// continuous `μ` with a closed-form Carathéodory function.
pub fn aleksandrov_measure(mu: &MeasureCircle, phi: f64) -> Result<MeasureCircle> {
    let Some(f) = mu.caratheodory_fn().cloned() else {
        return Err(Error::validation("Aleksandrov map needs a closed-form F"));
    };
    if !mu.atoms().is_empty() || !mu.has_density() {
        return Err(Error::validation(
            "Aleksandrov map is implemented for absolutely continuous measures",
        ));
    }
    let (s, c) = (0.5 * phi).sin_cos();
    let i = Complex64::new(0.0, 1.0);
    let base = mu.clone();
    let f_den = f.clone();
    let density = move |t: f64| {
        let fz = f_den(Complex64::from_polar(1.0, t));
        base.density_at(t) / (c + i * s * fz).norm_sqr()
    };
    let u = Complex64::from_polar(1.0, -phi);
    let f_new = move |z: Complex64| {
        let fz = f(z);
        ((ONE - u) + (ONE + u) * fz) / ((ONE + u) + (ONE - u) * fz)
    };
    MeasureCircle::build(
        Some(Arc::new(density)),
        Vec::new(),
        Some(Arc::new(f_new)),
        mu.nodes(),
    )
}

/// Verblunsky coefficients of the Gross-Witten law, `|g| <= 1`.
pub fn gw_alpha(g: f64, n: usize) -> Result<Complex64> {
    if !(g.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "|g| = {} > 1 is the gapped phase",
            g.abs()
        )));
    }
    if g == 0.0 {
        return Ok(ZERO);
    }
    let np1 = (n + 1) as i32;
    if g.abs() == 1.0 {
        return Ok(Complex64::new(-(-g).powi(np1) / (n + 2) as f64, 0.0));
    }
    // x+ is the root of x + 1/x = -2/g inside the disk; x- = 1/x+.
    let xp = (-1.0 + (1.0 - g * g).sqrt()) / g;
    let r = xp * xp;
    let val = -(1.0 - r) * xp.powi(np1) / (1.0 - r.powi(np1 + 1));
    Ok(Complex64::new(val, 0.0))
}

/// The Gross-Witten law `(1 + g cos θ) dλ_0` with `F(z) = 1 + g z`.
pub fn gross_witten(g: f64) -> Result<MeasureCircle> {
    if !(g.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "|g| = {} > 1 is the gapped phase",
            g.abs()
        )));
    }
    MeasureCircle::build(
        Some(Arc::new(move |t: f64| 1.0 + g * t.cos())),
        Vec::new(),
        Some(Arc::new(move |z: Complex64| ONE + g * z)),
        crate::quad::DEFAULT_NODES,
    )
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap(theta: f64) -> f64 {
    let x = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if x >= PI {
        x - 2.0 * PI
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::QuadratureMeasure;
    use nalgebra::Schur;
    use proptest::prelude::*;

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lebesgue_has_zero_coefficients() {
        let a = schur_verblunsky(&[ZERO; 8]).unwrap();
        assert!(a.alpha().iter().all(|x| x.norm() == 0.0));
        assert!(!a.is_finite_measure());
    }

    #[test]
    fn gross_witten_schur() {
        let mut c = vec![ZERO; 10];
        c[0] = cplx(0.4, 0.0);
        let a = schur_verblunsky(&c).unwrap();
        assert!((a.alpha()[0] - cplx(0.4, 0.0)).norm() < 1e-15);
        assert!((a.alpha()[1] - cplx(-0.19047619047619047, 0.0)).norm() < 1e-14);
        for n in 0..10 {
            assert!((a.alpha()[n] - gw_alpha(0.8, n).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn dirac_terminates() {
        let a = schur_verblunsky(&[ONE; 6]).unwrap();
        assert!(a.is_finite_measure());
        assert_eq!(a.alpha(), &[ONE]);
    }

    #[test]
    fn non_moment_sequence_rejected() {
        let r = schur_verblunsky(&[cplx(1.5, 0.0), ZERO]);
        assert!(matches!(r, Err(Error::NotMomentSequence { step: 0, .. })));
    }

    #[test]
    fn gw_alpha_closed_forms() {
        for g in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert!((gw_alpha(g, 0).unwrap().re - g / 2.0).abs() < 1e-15);
        }
        assert!((gw_alpha(1.0, 1).unwrap().re + 1.0 / 3.0).abs() < 1e-15);
        assert!((gw_alpha(0.8, 1).unwrap().re + 0.19047619047619047).abs() < 1e-15);
        assert!(gw_alpha(1.2, 0).is_err());
    }

    #[test]
    fn gw_alpha_at_unit_coupling_matches_schur() {
        let mut c = vec![ZERO; 12];
        c[0] = cplx(0.5, 0.0);
        let a = schur_verblunsky(&c).unwrap();
        for n in 0..12 {
            assert!((a.alpha()[n] - gw_alpha(1.0, n).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn gw_alpha_decays_geometrically() {
        let g: f64 = 0.9;
        let xp = (-1.0 + (1.0 - g * g).sqrt()) / g;
        assert!(xp.abs() < 1.0);
        let r1 = gw_alpha(g, 40).unwrap().norm() / gw_alpha(g, 39).unwrap().norm();
        assert!((r1 - xp.abs()).abs() < 1e-10);
    }

    #[test]
    fn cmv_scalar() {
        let a = VerblunskyCoeffs::finite(vec![cplx(0.6, 0.8)]).unwrap();
        let c = cmv_build(&a).unwrap();
        assert!((c[(0, 0)] - cplx(0.6, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn cmv_zero_prefix_roots_of_unity() {
        let beta = Complex64::from_polar(1.0, 0.7);
        let a = VerblunskyCoeffs::finite(vec![ZERO, ZERO, ZERO, beta]).unwrap();
        let c = cmv_build(&a).unwrap();
        let schur = Schur::new(c);
        let (q, t) = schur.unpack();
        for k in 0..4 {
            let lam = t[(k, k)];
            assert!((lam.powi(4) - beta.conj()).norm() < 1e-12);
            assert!((q[(0, k)].norm_sqr() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn re_trace_matches_dense() {
        let a = VerblunskyCoeffs::finite(vec![
            cplx(0.3, -0.2),
            cplx(-0.1, 0.5),
            cplx(0.4, 0.4),
            cplx(0.0, 0.2),
            Complex64::from_polar(1.0, 2.0),
        ])
        .unwrap();
        let c = cmv_build(&a).unwrap();
        assert!((c.trace().re - a.re_trace()).abs() < 1e-14);
    }

    #[test]
    fn gw_moments_from_coefficients() {
        let a = VerblunskyCoeffs::infinite((0..200).map(|n| gw_alpha(0.8, n).unwrap()).collect())
            .unwrap();
        let c = verblunsky_moments(&a, 6).unwrap();
        assert!((c[0] - cplx(0.4, 0.0)).norm() < 1e-10);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn caratheodory_of_lebesgue_and_gw() {
        let z = cplx(0.3, -0.4);
        assert!((caratheodory(&MeasureCircle::lebesgue(), z).unwrap() - ONE).norm() < 1e-15);
        let gw = gross_witten(0.8).unwrap();
        assert!((caratheodory(&gw, z).unwrap() - (ONE + 0.8 * z)).norm() < 1e-15);
        let plain = MeasureCircle::new(|t| 1.0 + 0.8 * t.cos(), vec![]).unwrap();
        assert!((caratheodory(&plain, z).unwrap() - (ONE + 0.8 * z)).norm() < 1e-12);
        assert!((caratheodory(&plain, ZERO).unwrap() - ONE).norm() < 1e-14);
        assert!(caratheodory(&plain, ONE).is_err());
    }

    #[test]
    fn recover_gw_density() {
        let g = 0.8;
        let f = move |z: Complex64| ONE + g * z;
        for t in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            let w = density_recover(&f, t).unwrap();
            assert!((w - (1.0 + g * f64::cos(t))).abs() < 1e-12);
        }
    }

    #[test]
    fn recover_flags_atoms() {
        // Dirac mass at θ = 0.
        let f = |z: Complex64| (ONE + z) / (ONE - z);
        assert!(matches!(
            density_recover(&f, 0.0),
            Err(Error::SingularPoint(_))
        ));
        assert!(density_recover(&f, 1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn aleksandrov_of_gross_witten() {
        let (g, phi) = (0.8, PI / 3.0);
        let mu = aleksandrov_measure(&gross_witten(g).unwrap(), phi).unwrap();
        let (s, _) = (0.5 * phi).sin_cos();
        for t in [-2.5, -0.4, 0.0, 1.3, 3.0] {
            let want = (1.0 + g * f64::cos(t))
                / (1.0 - 2.0 * g * s * (t - 0.5 * phi).sin() + g * g * s * s);
            assert!((mu.density_at(t) - want).abs() < 1e-13);
        }
        let c = mu.moments(8).unwrap();
        assert!((c[0] - Complex64::from_polar(0.4, phi)).norm() < 1e-12);
        let a = schur_verblunsky(&c).unwrap();
        let want = aleksandrov(
            &VerblunskyCoeffs::infinite((0..8).map(|n| gw_alpha(g, n).unwrap()).collect()).unwrap(),
            phi,
        );
        for (x, y) in a.alpha().iter().zip(want.alpha()) {
            assert!((x - y).norm() < 1e-8);
        }
        let id = aleksandrov_measure(&gross_witten(g).unwrap(), 0.0).unwrap();
        assert!((id.density_at(0.3) - (1.0 + g * 0.3f64.cos())).abs() < 1e-15);
    }

    fn random_alpha(max_len: usize, radius: f64) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((0.0f64..radius, -PI..PI), 1..=max_len).prop_map(|v| {
            v.into_iter()
                .map(|(r, t)| Complex64::from_polar(r, t))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn schur_inverts_moments(alpha in random_alpha(30, 0.5)) {
            let a = VerblunskyCoeffs::infinite(alpha.clone()).unwrap();
            let c = verblunsky_moments(&a, alpha.len()).unwrap();
            let back = schur_verblunsky(&c).unwrap();
            for (x, y) in back.alpha().iter().zip(&alpha) {
                prop_assert!((x - y).norm() < 1e-10, "{x} vs {y}");
            }
        }

        #[test]
        fn cmv_is_unitary(alpha in random_alpha(16, 0.999), last in -PI..PI) {
            let mut alpha = alpha;
            alpha.push(Complex64::from_polar(1.0, last));
            let a = VerblunskyCoeffs::finite(alpha).unwrap();
            let c = cmv_build(&a).unwrap();
            let n = a.len();
            let err = (c.adjoint() * &c - DMatrix::<Complex64>::identity(n, n))
                .iter()
                .fold(0.0f64, |m, x| m.max(x.norm()));
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn cmv_spectral_measure_matches_schur(alpha in random_alpha(8, 0.9), last in -PI..PI) {
            let mut alpha = alpha;
            alpha.push(Complex64::from_polar(1.0, last));
            let a = VerblunskyCoeffs::finite(alpha.clone()).unwrap();
            let (q, t) = Schur::new(cmv_build(&a).unwrap()).unpack();
            let n = a.len();
            let pairs: Vec<(f64, f64)> =
                (0..n).map(|k| (t[(k, k)].arg(), q[(0, k)].norm_sqr())).collect();
            for k in 0..n {
                prop_assert!((t[(k, k)].norm() - 1.0).abs() < 1e-10);
            }
            let meas = QuadratureMeasure::from_pairs(pairs).unwrap();
            let c = meas.trig_moments(n);
            let back = schur_verblunsky(&c).unwrap();
            prop_assert!(back.is_finite_measure());
            for (x, y) in back.alpha().iter().zip(&alpha) {
                prop_assert!((x - y).norm() < 1e-7, "{x} vs {y}");
            }
        }
    }
}
