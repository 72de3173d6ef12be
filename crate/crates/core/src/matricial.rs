//! `r x r` matrix-valued spectral measures: block moments, the matrix
//! relative entropy, the spiked semicircle for a Hermitian spike `Θ` and
//! the matrix Gross-Witten rate.

use std::sync::Arc;

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laws::{sc_density, semicircle};
use crate::measures::{MeasureCircle, MeasureLine, MAX_MOMENT_ORDER};
use crate::opuc::{aleksandrov_measure, gross_witten};
use crate::quad;
use crate::rates::{f_hermite, g_func, kl_gw_lambda0, BAND_TOL, DENSITY_FLOOR};

pub type CMatrix = DMatrix<Complex64>;
pub type MatrixDensity = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Default grid size for matrix densities.
pub const GRID_NODES: usize = 1024;
/// Cap on the refined grid; every node stores an `r x r` matrix.
pub const MAX_GRID_NODES: usize = 1 << 16;
const MASS_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Interval carrying the absolutely continuous part, cosine-rule grid.
    Line { lo: f64, hi: f64 },
    /// Angles in `[-π, π)`, densities with respect to `dθ/2π`.
    Circle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAtom {
    pub location: f64,
    pub mass: CMatrix,
}

/// Matrix measure with a density sampled on a quadrature grid plus atoms.
#[derive(Clone)]
pub struct MatrixMeasure {
    r: usize,
    domain: Domain,
    density_fn: MatrixDensity,
    grid: Vec<(f64, f64)>,
    density: Vec<CMatrix>,
    atoms: Vec<MatrixAtom>,
}

impl std::fmt::Debug for MatrixMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixMeasure")
            .field("r", &self.r)
            .field("domain", &self.domain)
            .field("nodes", &self.grid.len())
            .field("atoms", &self.atoms)
            .finish()
    }
}

fn identity(r: usize) -> CMatrix {
    CMatrix::identity(r, r)
}

fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    (m - m.adjoint()).camax() <= tol * (1.0 + m.camax())
}

fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

fn grid_for(domain: Domain, nodes: usize) -> Vec<(f64, f64)> {
    match domain {
        Domain::Line { lo, hi } => quad::cosine_rule(lo, hi, nodes),
        Domain::Circle => quad::circle_rule(nodes),
    }
}

impl MatrixMeasure {
    pub fn new(
        r: usize,
        domain: Domain,
        nodes: usize,
        density: MatrixDensity,
        atoms: Vec<MatrixAtom>,
    ) -> Result<Self> {
        if r == 0 {
            return Err(Error::validation("matrix size must be positive"));
        }
        if nodes < 16 {
            return Err(Error::validation("need at least 16 grid nodes"));
        }
        if let Domain::Line { lo, hi } = domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::validation(format!("bad support [{lo}, {hi}]")));
            }
        }
        let grid = grid_for(domain, nodes);
        let values: Vec<CMatrix> = grid.iter().map(|&(x, _)| density(x)).collect();
        let m = MatrixMeasure {
            r,
            domain,
            density_fn: density,
            grid,
            density: values,
            atoms,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let r = self.r;
        let check = |m: &CMatrix, what: &str| -> Result<()> {
            if m.shape() != (r, r) {
                return Err(Error::validation(format!(
                    "{what} has shape {:?}, want {r}x{r}",
                    m.shape()
                )));
            }
            if !is_hermitian(m, HERMITIAN_TOL) {
                return Err(Error::validation(format!("{what} is not Hermitian")));
            }
            let min = hermitian_eigenvalues(m)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL {
                return Err(Error::validation(format!("{what} has eigenvalue {min:e}")));
            }
            Ok(())
        };
        for (d, &(x, _)) in self.density.iter().zip(&self.grid) {
            check(d, &format!("density at {x}"))?;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !a.location.is_finite() {
                return Err(Error::validation("atom location must be finite"));
            }
            if self.atoms[..i].iter().any(|b| b.location == a.location) {
                return Err(Error::validation(format!(
                    "duplicate atom at {}",
                    a.location
                )));
            }
            check(&a.mass, &format!("atom mass at {}", a.location))?;
        }
        let err = (self.total_mass() - identity(r)).camax();
        if err > MASS_TOL {
            return Err(Error::validation(format!(
                "total mass differs from identity by {err:e}"
            )));
        }
        Ok(())
    }

    /// `σ 𝟙` for a scalar measure with a density on an interval.
    pub fn quasi_scalar_line(sigma: &MeasureLine, r: usize) -> Result<Self> {
        let Some((lo, hi)) = sigma.support() else {
            return Err(Error::validation("quasi-scalar measure needs a density"));
        };
        let s = sigma.clone();
        let atoms = sigma
            .atoms()
            .iter()
            .map(|a| MatrixAtom {
                location: a.location,
                mass: identity(r).scale(a.mass),
            })
            .collect();
        Self::new(
            r,
            Domain::Line { lo, hi },
            GRID_NODES,
            Arc::new(move |x| identity(r).scale(s.density_at(x))),
            atoms,
        )
    }

    /// `σ 𝟙` for an absolutely continuous measure on the circle.
    pub fn quasi_scalar_circle(sigma: &MeasureCircle, r: usize) -> Result<Self> {
        let s = sigma.clone();
        let atoms = sigma
            .atoms()
            .iter()
            .map(|a| MatrixAtom {
                location: a.location,
                mass: identity(r).scale(a.mass),
            })
            .collect();
        Self::new(
            r,
            Domain::Circle,
            GRID_NODES,
            Arc::new(move |t| identity(r).scale(s.density_at(t))),
            atoms,
        )
    }

    /// `diag(μ_1, ..., μ_r)` with all densities sampled on `[lo, hi]`.
    pub fn diag_line(mus: &[MeasureLine], lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        let r = mus.len();
        let owned: Vec<MeasureLine> = mus.to_vec();
        let density = Arc::new(move |x: f64| {
            let mut m = CMatrix::zeros(r, r);
            for (i, mu) in owned.iter().enumerate() {
                let inside = mu.support().is_some_and(|(a, b)| x >= a && x <= b);
                if inside {
                    m[(i, i)] = Complex64::new(mu.density_at(x), 0.0);
                }
            }
            m
        });
        let mut atoms: Vec<MatrixAtom> = Vec::new();
        for (i, mu) in mus.iter().enumerate() {
            for a in mu.atoms() {
                let slot = match atoms.iter().position(|b| b.location == a.location) {
                    Some(k) => k,
                    None => {
                        atoms.push(MatrixAtom {
                            location: a.location,
                            mass: CMatrix::zeros(r, r),
                        });
                        atoms.len() - 1
                    }
                };
                atoms[slot].mass[(i, i)] += Complex64::new(a.mass, 0.0);
            }
        }
        Self::new(r, Domain::Line { lo, hi }, nodes, density, atoms)
    }

    /// `U ν U*`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        check_unitary(u)?;
        if u.nrows() != self.r {
            return Err(Error::validation("unitary has the wrong size"));
        }
        let (u1, u2) = (u.clone(), u.clone());
        let f = self.density_fn.clone();
        let atoms = self
            .atoms
            .iter()
            .map(|a| MatrixAtom {
                location: a.location,
                mass: &u1 * &a.mass * u1.adjoint(),
            })
            .collect();
        Self::new(
            self.r,
            self.domain,
            self.grid.len(),
            Arc::new(move |x| &u2 * f(x) * u2.adjoint()),
            atoms,
        )
    }

    pub fn with_resolution(&self, nodes: usize) -> Result<Self> {
        Self::new(
            self.r,
            self.domain,
            nodes,
            self.density_fn.clone(),
            self.atoms.clone(),
        )
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Grid nodes with their quadrature weights.
    pub fn grid(&self) -> &[(f64, f64)] {
        &self.grid
    }

    /// Density values at the grid nodes.
    pub fn density(&self) -> &[CMatrix] {
        &self.density
    }

    pub fn density_at(&self, x: f64) -> CMatrix {
        (self.density_fn)(x)
    }

    pub fn atoms(&self) -> &[MatrixAtom] {
        &self.atoms
    }

    /// `∫ f dν` entrywise, summing the density over the grid.
    pub fn integrate(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.r, self.r);
        for (d, &(x, w)) in self.density.iter().zip(&self.grid) {
            acc += d * (f(x) * w);
        }
        for a in &self.atoms {
            acc += &a.mass * f(a.location);
        }
        acc
    }

    pub fn total_mass(&self) -> CMatrix {
        self.integrate(|_| Complex64::new(1.0, 0.0))
    }
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::validation("unitary must be square"));
    }
    let err = (u.adjoint() * u - identity(u.nrows())).camax();
    if err > 1e-10 {
        return Err(Error::validation(format!(
            "matrix is not unitary ({err:e})"
        )));
    }
    Ok(())
}

/// Block Jacobi coefficients: Hermitian diagonal blocks `B_k`, positive
/// definite off-diagonal blocks `A_k`, and an optional constant tail.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobi {
    b: Vec<CMatrix>,
    a: Vec<CMatrix>,
    tail: Option<(CMatrix, CMatrix)>,
}

impl BlockJacobi {
    pub fn new(b: Vec<CMatrix>, a: Vec<CMatrix>, tail: Option<(CMatrix, CMatrix)>) -> Result<Self> {
        let r = b
            .first()
            .or(tail.as_ref().map(|t| &t.0))
            .map(|m| m.nrows())
            .ok_or_else(|| Error::validation("empty block Jacobi sequence"))?;
        let shaped = |m: &CMatrix| m.shape() == (r, r);
        let all_b = b.iter().chain(tail.as_ref().map(|t| &t.0));
        let all_a = a.iter().chain(tail.as_ref().map(|t| &t.1));
        for m in all_b {
            if !shaped(m) || !is_hermitian(m, HERMITIAN_TOL) {
                return Err(Error::validation("B blocks must be Hermitian r x r"));
            }
        }
        for m in all_a {
            if !shaped(m) || !is_hermitian(m, HERMITIAN_TOL) {
                return Err(Error::validation("A blocks must be Hermitian r x r"));
            }
            if hermitian_eigenvalues(m).into_iter().any(|l| l <= 0.0) {
                return Err(Error::validation("A blocks must be positive definite"));
            }
        }
        if tail.is_some() && a.len() != b.len() {
            return Err(Error::validation(
                "prefix needs as many A blocks as B blocks",
            ));
        }
        Ok(BlockJacobi { b, a, tail })
    }

    /// `(Θ, 0, 0, ...; 𝟙, 𝟙, ...)`.
    pub fn spiked_free(theta: &CMatrix) -> Result<Self> {
        let r = theta.nrows();
        Self::new(
            vec![theta.clone()],
            vec![identity(r)],
            Some((CMatrix::zeros(r, r), identity(r))),
        )
    }

    pub fn r(&self) -> usize {
        self.b
            .first()
            .or(self.tail.as_ref().map(|t| &t.0))
            .map_or(0, |m| m.nrows())
    }

    pub fn b(&self, k: usize) -> Option<&CMatrix> {
        self.b.get(k).or(self.tail.as_ref().map(|t| &t.0))
    }

    pub fn a(&self, k: usize) -> Option<&CMatrix> {
        self.a.get(k).or(self.tail.as_ref().map(|t| &t.1))
    }

    pub fn prefix(&self) -> (&[CMatrix], &[CMatrix]) {
        (&self.b, &self.a)
    }

    pub fn tail(&self) -> Option<&(CMatrix, CMatrix)> {
        self.tail.as_ref()
    }
}

pub trait MatrixMoments {
    /// `m_1..m_K`: `∫ x^k dν` on the line, `∫ e^{ikθ} dν` on the circle.
    fn matrix_moments(&self, k: usize) -> Result<Vec<CMatrix>>;
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::domain(format!(
            "moment order {k} outside 1..={MAX_MOMENT_ORDER}"
        )));
    }
    Ok(())
}

fn kernel(domain: Domain, j: i32) -> impl Fn(f64) -> Complex64 {
    move |x| match domain {
        Domain::Line { .. } => Complex64::new(x.powi(j), 0.0),
        Domain::Circle => Complex64::from_polar(1.0, j as f64 * x),
    }
}

impl MatrixMoments for MatrixMeasure {
    fn matrix_moments(&self, k: usize) -> Result<Vec<CMatrix>> {
        check_order(k)?;
        let coarse = self.with_resolution(self.grid.len() / 2)?;
        let mut out = Vec::with_capacity(k);
        for j in 1..=k as i32 {
            let f = kernel(self.domain, j);
            let a = self.integrate(&f);
            let b = coarse.integrate(&f);
            let scale = match self.domain {
                Domain::Line { .. } => self
                    .integrate(|x| Complex64::new(x.abs().powi(j), 0.0))
                    .camax()
                    .max(1.0),
                Domain::Circle => 1.0,
            };
            let residual = (&a - &b).camax() / scale;
            if residual > 1e-9 {
                return Err(Error::Accuracy {
                    what: format!("matrix moment of order {j}"),
                    residual,
                });
            }
            out.push(a);
        }
        Ok(out)
    }
}

impl MatrixMoments for BlockJacobi {
    fn matrix_moments(&self, k: usize) -> Result<Vec<CMatrix>> {
        check_order(k)?;
        let r = self.r();
        let blocks = k / 2 + 1;
        let n = r * blocks;
        let mut j = CMatrix::zeros(n, n);
        for i in 0..blocks {
            let b = self.b(i).ok_or_else(|| {
                Error::validation(format!("need {blocks} diagonal blocks for order {k}"))
            })?;
            j.view_mut((i * r, i * r), (r, r)).copy_from(b);
            if i + 1 < blocks {
                let a = self.a(i).ok_or_else(|| {
                    Error::validation(format!("need {} off-diagonal blocks", blocks - 1))
                })?;
                j.view_mut((i * r, (i + 1) * r), (r, r)).copy_from(a);
                j.view_mut(((i + 1) * r, i * r), (r, r))
                    .copy_from(&a.adjoint());
            }
        }
        let mut col = CMatrix::zeros(n, r);
        col.view_mut((0, 0), (r, r)).copy_from(&identity(r));
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            col = &j * col;
            out.push(col.view((0, 0), (r, r)).into_owned());
        }
        Ok(out)
    }
}

pub fn matrix_moments<M: MatrixMoments + ?Sized>(nu: &M, k: usize) -> Result<Vec<CMatrix>> {
    nu.matrix_moments(k)
}

/// Scalar reference `σ` of a quasi-scalar measure `σ 𝟙`.
#[derive(Debug, Clone, Copy)]
pub enum QuasiScalar<'a> {
    Line(&'a MeasureLine),
    Circle(&'a MeasureCircle),
}

/// `K(σ 𝟙 | ν) = -∫ log det h dσ` where `ν = h σ + ν_s`.
pub fn matrix_kl(sigma: QuasiScalar<'_>, nu: &MatrixMeasure) -> Result<f64> {
    let sigma_at: Box<dyn Fn(f64) -> f64> = match (sigma, nu.domain) {
        (QuasiScalar::Line(s), Domain::Line { lo, hi }) => {
            let Some((a, b)) = s.support() else {
                return Err(Error::validation("reference measure needs a density"));
            };
            if (a - lo).abs() > 1e-12 || (b - hi).abs() > 1e-12 {
                return Err(Error::validation(format!(
                    "reference support [{a}, {b}] differs from grid [{lo}, {hi}]"
                )));
            }
            Box::new(move |x| s.density_at(x))
        }
        (QuasiScalar::Circle(s), Domain::Circle) => {
            if !s.has_density() {
                return Err(Error::validation("reference measure needs a density"));
            }
            Box::new(move |t| s.density_at(t))
        }
        _ => {
            return Err(Error::validation(
                "reference and measure live on different domains",
            ))
        }
    };
    let mut terms = Vec::with_capacity(nu.grid.len());
    for (d, &(x, w)) in nu.density.iter().zip(&nu.grid) {
        let s = sigma_at(x);
        if s <= DENSITY_FLOOR {
            continue;
        }
        let eig = hermitian_eigenvalues(&d.unscale(s));
        if let Some(&l) = eig.iter().find(|&&l| l < -PSD_TOL) {
            return Err(Error::domain(format!(
                "density at {x} has eigenvalue {l:e}"
            )));
        }
        if eig.iter().any(|&l| l * s <= DENSITY_FLOOR) {
            return Ok(f64::INFINITY);
        }
        terms.push(w * s * eig.iter().map(|l| l.ln()).sum::<f64>());
    }
    Ok(-quad::pairwise_sum(&terms))
}

fn same_eigenvalue(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

/// `μ_{SC,Θ}`: density `sqrt(4 - x^2)/(2π) (ΘΘ* + 𝟙 - xΘ)^{-1}` on `[-2, 2]`
/// and an atom at `θ + 1/θ` with mass `(1 - θ^{-2})` times the eigenprojection
/// for each eigenvalue `|θ| > 1`. Equal eigenvalues share one atom.
pub fn spiked_sc_matrix(theta: &CMatrix) -> Result<MatrixMeasure> {
    if !theta.is_square() || theta.nrows() == 0 {
        return Err(Error::validation("Θ must be square and nonempty"));
    }
    if !is_hermitian(theta, HERMITIAN_TOL) {
        return Err(Error::validation("Θ must be Hermitian"));
    }
    let r = theta.nrows();
    let eig = SymmetricEigen::new((theta + theta.adjoint()).scale(0.5));
    let u = eig.eigenvectors.clone();
    let d: Vec<f64> = eig.eigenvalues.iter().copied().collect();

    let mut nodes = GRID_NODES;
    for &t in &d {
        if t != 0.0 && t.abs() != 1.0 {
            let need = quad::nodes_near_pole(-2.0, 2.0, t + 1.0 / t);
            if need > quad::DEFAULT_NODES {
                nodes = nodes.max(need.min(MAX_GRID_NODES));
            }
        }
    }

    let mut atoms: Vec<(f64, CMatrix)> = Vec::new();
    for (i, &t) in d.iter().enumerate() {
        if t.abs() <= 1.0 {
            continue;
        }
        let v = u.column(i);
        let proj = (v * v.adjoint()).scale(1.0 - 1.0 / (t * t));
        match atoms.iter_mut().find(|(s, _)| same_eigenvalue(*s, t)) {
            Some((_, m)) => *m += proj,
            None => atoms.push((t, proj)),
        }
    }
    let atoms = atoms
        .into_iter()
        .map(|(t, mass)| MatrixAtom {
            location: t + 1.0 / t,
            mass,
        })
        .collect();

    let density = Arc::new(move |x: f64| {
        let s = sc_density(x);
        let mut m = CMatrix::zeros(r, r);
        for (i, &t) in d.iter().enumerate() {
            let v = u.column(i);
            m += (v * v.adjoint()).scale(s / (t * t + 1.0 - x * t));
        }
        m
    });
    MatrixMeasure::new(r, Domain::Line { lo: -2.0, hi: 2.0 }, nodes, density, atoms)
}

fn rank(m: &CMatrix) -> usize {
    let eig = hermitian_eigenvalues(m);
    let top = eig.iter().fold(0.0f64, |a, &b| a.max(b));
    eig.iter().filter(|&&l| l > 1e-10 * top.max(1.0)).count()
}

fn check_shapes(nu: &MatrixMeasure, theta: &CMatrix) -> Result<()> {
    if theta.shape() != (nu.r, nu.r) {
        return Err(Error::validation(format!(
            "Θ is {:?} but the measure is {}x{}",
            theta.shape(),
            nu.r,
            nu.r
        )));
    }
    Ok(())
}

/// Matrix Hermite rate
/// `K(SC 𝟙 | ν) + Σ F_H(E_k) - Re Tr(Θ m_1) + Tr(ΘΘ*)/2`.
///
/// The absolutely continuous part must be sampled on `[-2, 2]`. Each atom
/// outside the band is charged once per unit of rank of its mass.
pub fn rate_matrix_hermite(nu: &MatrixMeasure, theta: &CMatrix) -> Result<f64> {
    check_shapes(nu, theta)?;
    let sc = semicircle();
    let kl = matrix_kl(QuasiScalar::Line(&sc), nu)?;
    if kl.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let outliers: f64 = nu
        .atoms
        .iter()
        .filter(|a| a.location.abs() > 2.0 + BAND_TOL)
        .map(|a| rank(&a.mass) as f64 * f_hermite(a.location))
        .sum();
    let m1 = &nu.matrix_moments(1)?[0];
    let linear = (theta * m1).trace().re;
    let quad_term = 0.5 * (theta * theta.adjoint()).trace().re;
    Ok(kl + outliers - linear + quad_term)
}

/// `Tr G(X) = Σ (λ - 1 - log λ)` over the eigenvalues of Hermitian `X`.
pub fn matrix_g(x: &CMatrix) -> f64 {
    hermitian_eigenvalues(x).into_iter().map(g_func).sum()
}

/// Coefficient form `Tr[(B_1 - Θ)(B_1 - Θ)*]/2 + Σ_{n>=2} Tr(B_n B_n*)/2 +
/// Σ Tr G(A_n A_n*)`. Infinite unless the tail is `(0, 𝟙)`.
pub fn rate_matrix_hermite_coeff(j: &BlockJacobi, theta: &CMatrix) -> Result<f64> {
    let r = j.r();
    if theta.shape() != (r, r) {
        return Err(Error::validation("Θ has the wrong size"));
    }
    match j.tail() {
        Some((b, a)) if b.camax() <= 1e-12 && (a - identity(r)).camax() <= 1e-12 => {}
        _ => return Ok(f64::INFINITY),
    }
    let (bs, as_) = j.prefix();
    let mut s = 0.0;
    for (k, b) in bs.iter().enumerate() {
        let d = if k == 0 { b - theta } else { b.clone() };
        s += 0.5 * (&d * d.adjoint()).trace().re;
    }
    if bs.is_empty() {
        s += 0.5 * (theta * theta.adjoint()).trace().re;
    }
    for a in as_ {
        s += matrix_g(&(a * a.adjoint()));
    }
    Ok(s)
}

/// `α_k ↦ Λ* α_k`.
pub fn matrix_aleksandrov(alpha: &[CMatrix], lambda: &CMatrix) -> Result<Vec<CMatrix>> {
    check_unitary(lambda)?;
    let ls = lambda.adjoint();
    alpha
        .iter()
        .map(|a| {
            if a.nrows() != ls.ncols() {
                Err(Error::validation("coefficient and Λ sizes differ"))
            } else {
                Ok(&ls * a)
            }
        })
        .collect()
}

/// `T_g(α) = -log det(𝟙 - αα†) - g Tr(αα†)`, infinite once `‖α‖ >= 1`.
pub fn t_g_evaluator(alpha: &CMatrix, g: f64) -> f64 {
    let eig = hermitian_eigenvalues(&(alpha * alpha.adjoint()));
    if eig.iter().any(|&l| l >= 1.0) {
        return f64::INFINITY;
    }
    eig.iter().map(|&l| -(-l).ln_1p() - g * l).sum()
}

/// Coefficient side of the matrix Gross-Witten sum rule with reference
/// `GW_g 𝟙`, for a finite prefix `α_0..α_K` followed by zeros:
/// `r K(GW_g | λ_0) - g Re Tr α_0 - (g/2) Tr α_0α_0† + Σ T_{-g}(α_k)
///  - (g/2) Σ Tr (α_{k+1} - α_k)(α_{k+1} - α_k)†`.
pub fn matrix_gw_coeff_rate(alpha: &[CMatrix], g: f64) -> Result<f64> {
    let Some(first) = alpha.first() else {
        return Err(Error::validation("need at least one coefficient"));
    };
    let r = first.nrows();
    let mut s = r as f64 * kl_gw_lambda0(g)?;
    s -= g * first.trace().re + 0.5 * g * (first * first.adjoint()).trace().re;
    let zero = CMatrix::zeros(r, r);
    for (k, a) in alpha.iter().enumerate() {
        if a.shape() != (r, r) {
            return Err(Error::validation("coefficients must share one size"));
        }
        let t = t_g_evaluator(a, -g);
        if t.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let next = alpha.get(k + 1).unwrap_or(&zero);
        let d = next - a;
        s += t - 0.5 * g * (&d * d.adjoint()).trace().re;
    }
    Ok(s)
}

/// `τ_Λ(μ 𝟙)`: the matrix measure with coefficients `Λ* α_k(μ) 𝟙`, built by
/// rotating `μ` separately along each eigenvector of `Λ`.
pub fn matrix_aleksandrov_measure(mu: &MeasureCircle, lambda: &CMatrix) -> Result<MatrixMeasure> {
    check_unitary(lambda)?;
    let r = lambda.nrows();
    let (q, t) = Schur::new(lambda.clone()).unpack();
    let rotated: Vec<MeasureCircle> = (0..r)
        .map(|j| aleksandrov_measure(mu, t[(j, j)].arg()))
        .collect::<Result<_>>()?;
    let density = Arc::new(move |theta: f64| {
        let mut m = CMatrix::zeros(r, r);
        for (j, rho) in rotated.iter().enumerate() {
            let v = q.column(j);
            m += (v * v.adjoint()).scale(rho.density_at(theta));
        }
        m
    });
    MatrixMeasure::new(r, Domain::Circle, GRID_NODES, density, Vec::new())
}

/// Matrix Gross-Witten rate `K(GW_g 𝟙 | ν) - g Re Tr(m_1 (Λ* - 𝟙))`.
pub fn rate_matrix_gw(nu: &MatrixMeasure, g: f64, lambda: &CMatrix) -> Result<f64> {
    check_unitary(lambda)?;
    if nu.domain != Domain::Circle {
        return Err(Error::validation(
            "matrix Gross-Witten rate needs a measure on the circle",
        ));
    }
    check_shapes(nu, lambda)?;
    let gw = gross_witten(g)?;
    let kl = matrix_kl(QuasiScalar::Circle(&gw), nu)?;
    if kl.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let m1 = &nu.matrix_moments(1)?[0];
    let tilt = (m1 * (lambda.adjoint() - identity(nu.r))).trace().re;
    Ok(kl - g * tilt)
}

/// The rank-one projection onto `(cos φ, sin φ)`.
pub fn projection(phi: f64) -> CMatrix {
    let (s, c) = phi.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[c * c, s * c, s * c, s * s].map(|x| Complex64::new(x, 0.0)),
    )
}

/// `diag(e^{iψ_1}, ..., e^{iψ_r})`.
pub fn diag_unitary(angles: &[f64]) -> CMatrix {
    let d: Vec<Complex64> = angles
        .iter()
        .map(|&a| Complex64::from_polar(1.0, a))
        .collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::stream;
    use crate::laws::spiked_semicircle;
    use crate::measures::moments_line;
    use crate::opuc::{gw_alpha, VerblunskyCoeffs};
    use crate::potential::random_hermitian;
    use crate::rates::{
        rate_coeff_gw, rate_meas_hermite, rate_spiked, reversed_kl_line, RateArg, SpikedModel,
    };
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn real_diag(d: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d.len(),
            d.iter().map(|&x| c(x)),
        ))
    }

    fn random_unitary(r: usize, seed: u64) -> CMatrix {
        let mut rng = stream(seed, 1);
        let m = CMatrix::from_fn(r, r, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        });
        m.qr().q()
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).camax()
    }

    #[test]
    fn quasi_scalar_semicircle_moments() {
        let nu = MatrixMeasure::quasi_scalar_line(&semicircle(), 3).unwrap();
        let m = matrix_moments(&nu, 4).unwrap();
        assert!(m[0].camax() < 1e-14);
        assert!(max_diff(&m[1], &identity(3)) < 1e-13);
        assert!(max_diff(&m[3], &identity(3).scale(2.0)) < 1e-13);
        assert_eq!(
            matrix_kl(QuasiScalar::Line(&semicircle()), &nu).unwrap(),
            0.0
        );
    }

    #[test]
    fn block_jacobi_moments() {
        let th = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(1.0),
                Complex64::new(0.5, 0.3),
                Complex64::new(0.5, -0.3),
                c(-0.4),
            ],
        );
        let j = BlockJacobi::spiked_free(&th).unwrap();
        let m = matrix_moments(&j, 3).unwrap();
        assert!(max_diff(&m[0], &th) < 1e-15);
        assert!(max_diff(&m[1], &(&th * &th + identity(2))) < 1e-14);
        // third moment: Θ^3 + 2Θ
        assert!(max_diff(&m[2], &(&th * &th * &th + th.scale(2.0))) < 1e-14);
        assert!(BlockJacobi::new(vec![th.clone()], vec![], None)
            .unwrap()
            .matrix_moments(2)
            .is_err());
    }

    #[test]
    fn block_jacobi_rejects_bad_blocks() {
        let bad_a = real_diag(&[1.0, -1.0]);
        assert!(BlockJacobi::new(vec![identity(2)], vec![bad_a], None).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(BlockJacobi::new(vec![non_herm], vec![identity(2)], None).is_err());
    }

    #[test]
    fn diagonal_spike_matches_scalar_laws() {
        let th = real_diag(&[2.0, 0.5]);
        let nu = spiked_sc_matrix(&th).unwrap();
        assert!(max_diff(&nu.total_mass(), &identity(2)) < 1e-12);
        let m = matrix_moments(&nu, 3).unwrap();
        for (i, t) in [2.0, 0.5].into_iter().enumerate() {
            let scalar = moments_line(&spiked_semicircle(t).unwrap(), 3).unwrap();
            for k in 0..3 {
                assert!((m[k][(i, i)].re - scalar[k]).abs() < 1e-10, "{i} {k}");
            }
        }
        assert!(m[0][(0, 1)].norm() < 1e-14);
        assert_eq!(nu.atoms().len(), 1);
        assert!((nu.atoms()[0].location - 2.5).abs() < 1e-15);
        assert!((nu.atoms()[0].mass[(0, 0)].re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_spike_is_semicircle() {
        let nu = spiked_sc_matrix(&CMatrix::zeros(2, 2)).unwrap();
        let sc = MatrixMeasure::quasi_scalar_line(&semicircle(), 2).unwrap();
        for (a, b) in nu.density().iter().zip(sc.density()) {
            assert!(max_diff(a, b) < 1e-15);
        }
        assert!(nu.atoms().is_empty());
    }

    #[test]
    fn kl_of_diagonal_spike() {
        let nu = spiked_sc_matrix(&real_diag(&[2.0, 0.5])).unwrap();
        let kl = matrix_kl(QuasiScalar::Line(&semicircle()), &nu).unwrap();
        assert!((kl - (1.5112943611198906 + 0.125)).abs() < 1e-9, "{kl}");
        let sc = semicircle();
        let parts: f64 = [2.0, 0.5]
            .into_iter()
            .map(|t| reversed_kl_line(&sc, &spiked_semicircle(t).unwrap()).unwrap())
            .sum();
        assert!((kl - parts).abs() < 1e-9);
    }

    #[test]
    fn kl_factorizes_on_block_diagonal() {
        let sc = semicircle();
        let mus = [
            spiked_semicircle(0.7).unwrap(),
            spiked_semicircle(-0.3).unwrap(),
        ];
        let nu = MatrixMeasure::diag_line(&mus, -2.0, 2.0, GRID_NODES).unwrap();
        let kl = matrix_kl(QuasiScalar::Line(&sc), &nu).unwrap();
        let want: f64 = mus.iter().map(|m| reversed_kl_line(&sc, m).unwrap()).sum();
        assert!((kl - want).abs() < 1e-9);
        assert!((kl - (0.49 + 0.09) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn kl_rejects_mismatched_domain() {
        let nu = MatrixMeasure::quasi_scalar_circle(&gross_witten(0.5).unwrap(), 2).unwrap();
        assert!(matrix_kl(QuasiScalar::Line(&semicircle()), &nu).is_err());
    }

    #[test]
    fn mixture_identity() {
        let phi = PI / 4.0;
        let theta = 2.0;
        let nu = spiked_sc_matrix(&projection(phi).scale(theta)).unwrap();
        assert_eq!(nu.grid().len(), GRID_NODES);
        let (s2, c2) = (phi.sin().powi(2), phi.cos().powi(2));
        let scalar = spiked_semicircle(theta).unwrap();
        for (d, &(x, _)) in nu.density().iter().zip(nu.grid()) {
            let want = s2 * sc_density(x) + c2 * scalar.density_at(x);
            assert!((d[(0, 0)].re - want).abs() < 1e-7, "{x}");
        }
        assert_eq!(nu.atoms().len(), 1);
        let a = &nu.atoms()[0];
        assert!((a.location - 2.5).abs() < 1e-14);
        assert!((a.mass[(0, 0)].re - c2 * 0.75).abs() < 1e-14);
    }

    #[test]
    fn degenerate_spike_merges_atoms() {
        let nu = spiked_sc_matrix(&identity(3).scale(1.5)).unwrap();
        assert_eq!(nu.atoms().len(), 1);
        assert_eq!(rank(&nu.atoms()[0].mass), 3);
        let rate = rate_matrix_hermite(&nu, &identity(3).scale(1.5)).unwrap();
        assert!(rate.abs() < 1e-9, "{rate}");
    }

    #[test]
    fn unit_spike_has_no_atom() {
        let nu = spiked_sc_matrix(&real_diag(&[1.0, -1.0])).unwrap();
        assert!(nu.atoms().is_empty());
        assert!(max_diff(&nu.total_mass(), &identity(2)) < 1e-12);
    }

    #[test]
    fn hermite_rate_vanishes_at_minimizer() {
        let th = real_diag(&[2.0, 0.5]);
        let nu = spiked_sc_matrix(&th).unwrap();
        assert!(rate_matrix_hermite(&nu, &th).unwrap().abs() < 1e-9);
        let j = BlockJacobi::spiked_free(&th).unwrap();
        assert_eq!(rate_matrix_hermite_coeff(&j, &th).unwrap(), 0.0);
    }

    #[test]
    fn hermite_rate_at_zero_spike_sums_scalars() {
        let mus = [
            spiked_semicircle(2.0).unwrap(),
            spiked_semicircle(0.6).unwrap(),
        ];
        let nu = MatrixMeasure::diag_line(&mus, -2.0, 2.0, GRID_NODES).unwrap();
        let rate = rate_matrix_hermite(&nu, &CMatrix::zeros(2, 2)).unwrap();
        let want: f64 = mus.iter().map(|m| rate_meas_hermite(m).unwrap()).sum();
        assert!((rate - want).abs() < 1e-9);
        assert!((rate - (2.0 + 0.18)).abs() < 1e-9);
    }

    #[test]
    fn hermite_measure_and_coefficient_sides_agree() {
        let u = random_unitary(2, 5);
        let t = real_diag(&[1.8, -0.4]);
        let th = CMatrix::from_row_slice(
            2,
            2,
            &[
                c(0.3),
                Complex64::new(0.2, 0.4),
                Complex64::new(0.2, -0.4),
                c(2.2),
            ],
        );
        let nu = spiked_sc_matrix(&(&u * &t * u.adjoint())).unwrap();
        let measure = rate_matrix_hermite(&nu, &th).unwrap();
        let j = BlockJacobi::spiked_free(&(&u * &t * u.adjoint())).unwrap();
        let coeff = rate_matrix_hermite_coeff(&j, &th).unwrap();
        assert!((measure - coeff).abs() < 1e-8, "{measure} {coeff}");
    }

    #[test]
    fn hermite_coefficient_side_with_off_diagonal_blocks() {
        let a = real_diag(&[1.3, 0.8]);
        let j = BlockJacobi::new(
            vec![CMatrix::zeros(2, 2)],
            vec![a],
            Some((CMatrix::zeros(2, 2), identity(2))),
        )
        .unwrap();
        let want = g_func(1.69) + g_func(0.64);
        assert!(
            (rate_matrix_hermite_coeff(&j, &CMatrix::zeros(2, 2)).unwrap() - want).abs() < 1e-14
        );
        let no_tail = BlockJacobi::new(vec![CMatrix::zeros(2, 2)], vec![], None).unwrap();
        assert_eq!(
            rate_matrix_hermite_coeff(&no_tail, &CMatrix::zeros(2, 2)).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn aleksandrov_map() {
        let a = vec![CMatrix::from_row_slice(
            2,
            2,
            &[c(0.2), c(0.1), Complex64::new(0.0, 0.3), c(-0.1)],
        )];
        assert_eq!(matrix_aleksandrov(&a, &identity(2)).unwrap(), a);
        let l = random_unitary(2, 9);
        let b = matrix_aleksandrov(&a, &l).unwrap();
        let norm = |m: &CMatrix| m.clone().svd(false, false).singular_values[0];
        assert!((norm(&a[0]) - norm(&b[0])).abs() < 1e-14);
        assert!(matrix_aleksandrov(&a, &identity(2).scale(2.0)).is_err());
    }

    #[test]
    fn t_g_scalar_reduction() {
        let a = Complex64::new(0.3, -0.4);
        let m = CMatrix::from_element(1, 1, a);
        let want = -(1.0 - a.norm_sqr()).ln() - 0.7 * a.norm_sqr();
        assert!((t_g_evaluator(&m, 0.7) - want).abs() < 1e-15);
        assert_eq!(t_g_evaluator(&CMatrix::zeros(2, 2), 0.7), 0.0);
        assert_eq!(t_g_evaluator(&identity(2), 0.7), f64::INFINITY);
    }

    #[test]
    fn gw_coefficient_side_reduces_to_scalar() {
        let alpha = [
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.2, 0.25),
            Complex64::new(0.05, 0.0),
        ];
        let mats: Vec<CMatrix> = alpha
            .iter()
            .map(|&a| CMatrix::from_element(1, 1, a))
            .collect();
        for g in [0.8, -0.5, 0.0, 1.0] {
            let scalar =
                rate_coeff_gw(&VerblunskyCoeffs::infinite(alpha.to_vec()).unwrap(), g).unwrap();
            let matrix = matrix_gw_coeff_rate(&mats, g).unwrap();
            assert!((scalar - matrix).abs() < 1e-14, "{g}: {scalar} {matrix}");
        }
    }

    #[test]
    fn gw_rate_without_rotation_is_kl() {
        let g = 0.8;
        let gw = gross_witten(g).unwrap();
        let nu = matrix_aleksandrov_measure(&gw, &diag_unitary(&[0.7, 0.0])).unwrap();
        let rate = rate_matrix_gw(&nu, g, &identity(2)).unwrap();
        let kl = matrix_kl(QuasiScalar::Circle(&gw), &nu).unwrap();
        assert_eq!(rate, kl);
    }

    #[test]
    fn gw_rate_scalar_reduction() {
        let (g, phi) = (0.8, PI / 3.0);
        let gw = gross_witten(g).unwrap();
        let lam = diag_unitary(&[phi]);
        for psi in [0.0, 0.4, phi, -1.0] {
            let rot = aleksandrov_measure(&gw, psi).unwrap();
            let nu = MatrixMeasure::quasi_scalar_circle(&rot, 1).unwrap();
            let matrix = rate_matrix_gw(&nu, g, &lam).unwrap();
            let scalar = rate_spiked(SpikedModel::Gw { g, phi }, RateArg::Circle(&rot)).unwrap();
            assert!((matrix - scalar).abs() < 1e-10, "{psi}: {matrix} {scalar}");
        }
    }

    #[test]
    fn gw_rate_vanishes_at_rotated_minimizer() {
        let g = 0.8;
        let lam = diag_unitary(&[PI / 3.0, 0.0]);
        let nu = matrix_aleksandrov_measure(&gross_witten(g).unwrap(), &lam).unwrap();
        let m1 = &nu.matrix_moments(1).unwrap()[0];
        assert!(max_diff(m1, &lam.scale(g / 2.0)) < 1e-12);
        assert!(rate_matrix_gw(&nu, g, &lam).unwrap().abs() < 1e-10);
        let off = matrix_aleksandrov_measure(&gross_witten(g).unwrap(), &lam.adjoint()).unwrap();
        assert!(rate_matrix_gw(&off, g, &lam).unwrap() > 0.1);
    }

    #[test]
    fn gw_sum_rule_for_rotated_family() {
        let g = 0.6;
        let gw = gross_witten(g).unwrap();
        let lam = random_unitary(2, 17);
        let nu = matrix_aleksandrov_measure(&gw, &lam).unwrap();
        let measure = matrix_kl(QuasiScalar::Circle(&gw), &nu).unwrap();
        let base: Vec<CMatrix> = (0..200)
            .map(|k| identity(2) * gw_alpha(g, k).unwrap())
            .collect();
        let coeff = matrix_gw_coeff_rate(&matrix_aleksandrov(&base, &lam).unwrap(), g).unwrap();
        assert!((measure - coeff).abs() < 1e-9, "{measure} {coeff}");
    }

    fn hermitian_spike(seed: u64, r: usize) -> CMatrix {
        random_hermitian(r, &mut stream(seed, 0)).scale(2.0 * (r as f64).sqrt())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn spiked_mass_and_moments(seed in any::<u64>(), r in 1usize..=4) {
            let th = hermitian_spike(seed, r);
            let nu = spiked_sc_matrix(&th).unwrap();
            prop_assert!(max_diff(&nu.total_mass(), &identity(r)) < 1e-7);
            let m = matrix_moments(&nu, 2).unwrap();
            prop_assert!(max_diff(&m[0], &th) < 1e-6);
            prop_assert!(max_diff(&m[1], &(&th * &th + identity(r))) < 1e-6);
        }

        #[test]
        fn unitary_covariance(seed in any::<u64>(), r in 1usize..=4) {
            let th = hermitian_spike(seed, r);
            let u = random_unitary(r, seed);
            let a = spiked_sc_matrix(&(&u * &th * u.adjoint())).unwrap();
            let b = spiked_sc_matrix(&th).unwrap().conjugate(&u).unwrap();
            prop_assert_eq!(a.grid().len(), b.grid().len());
            for (x, y) in a.density().iter().zip(b.density()) {
                prop_assert!(max_diff(x, y) < 1e-8);
            }
        }

        #[test]
        fn kl_nonnegative_on_perturbations(seed in any::<u64>(), eps in -0.2f64..0.2) {
            let h = random_hermitian(3, &mut stream(seed, 2));
            let scale = hermitian_eigenvalues(&h).into_iter().fold(0.0f64, |a, l| a.max(l.abs()));
            let h = h.unscale(scale.max(1e-12));
            let density = Arc::new(move |x: f64| (identity(3) + h.scale(eps * x)).scale(sc_density(x)));
            let nu = MatrixMeasure::new(3, Domain::Line { lo: -2.0, hi: 2.0 }, GRID_NODES, density, vec![]).unwrap();
            let kl = matrix_kl(QuasiScalar::Line(&semicircle()), &nu).unwrap();
            prop_assert!(kl >= -1e-14);
            if eps.abs() > 1e-3 {
                prop_assert!(kl > 0.0);
            }
        }
    }
}
