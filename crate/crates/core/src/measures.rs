//! Scalar probability measures on the real line and on the unit circle.
//!
//! A [`MeasureLine`] is an absolutely continuous part given by a density
//! closure on a closed interval plus finitely many atoms. A [`MeasureCircle`]
//! is the analogous object on `[-pi, pi)` with the density taken with respect
//! to normalized Lebesgue measure. [`QuadratureMeasure`] is the finitely
//! supported case, used for empirical spectral measures.
//!
//! Trigonometric moments follow the convention `c_k = ∫ e^{ikθ} dμ`, under
//! which the first Verblunsky coefficient is `α_0 = conj(c_1)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Atoms lighter than this are discarded at construction.
pub const ATOM_FLOOR: f64 = 1e-14;
/// Tolerance on the total mass of a continuous measure.
pub const MASS_TOL: f64 = 1e-8;
/// Tolerance on the total weight of a quadrature measure.
pub const WEIGHT_TOL: f64 = 1e-10;
/// Maximal moment order.
pub const MAX_MOMENT_ORDER: usize = 64;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Caratheodory = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

impl Atom {
    pub fn new(location: f64, mass: f64) -> Self {
        Atom { location, mass }
    }
}

fn clean_atoms(atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    let mut atoms: Vec<Atom> = atoms.into_iter().filter(|a| a.mass >= ATOM_FLOOR).collect();
    for a in &atoms {
        if !a.location.is_finite() || !a.mass.is_finite() || a.mass > 1.0 + MASS_TOL {
            return Err(Error::validation(format!(
                "bad atom ({}, {})",
                a.location, a.mass
            )));
        }
    }
    atoms.sort_by(|x, y| x.location.total_cmp(&y.location));
    if atoms.windows(2).any(|w| w[0].location == w[1].location) {
        return Err(Error::validation("atom locations must be distinct"));
    }
    Ok(atoms)
}

/// Probability measure on the real line: density on `support` plus atoms.
#[derive(Clone)]
pub struct MeasureLine {
    support: Option<(f64, f64)>,
    density: Option<Density>,
    atoms: Vec<Atom>,
    nodes: usize,
}

impl fmt::Debug for MeasureLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureLine")
            .field("support", &self.support)
            .field("atoms", &self.atoms)
            .field("nodes", &self.nodes)
            .finish()
    }
}

impl MeasureLine {
    pub fn new(
        support: (f64, f64),
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        Self::with_nodes(support, Arc::new(density), atoms, quad::DEFAULT_NODES)
    }

    pub fn with_nodes(
        support: (f64, f64),
        density: Density,
        atoms: Vec<Atom>,
        nodes: usize,
    ) -> Result<Self> {
        let (lo, hi) = support;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation(format!("bad support [{lo}, {hi}]")));
        }
        if nodes < 16 {
            return Err(Error::validation("need at least 16 quadrature nodes"));
        }
        let m = MeasureLine {
            support: Some(support),
            density: Some(density),
            atoms: clean_atoms(atoms)?,
            nodes,
        };
        for (x, _) in quad::cosine_rule(lo, hi, nodes) {
            let d = m.density_raw(x);
            if !(d >= 0.0) {
                return Err(Error::validation(format!("density {d} at {x} is negative")));
            }
        }
        m.check_mass()?;
        Ok(m)
    }

    /// Purely atomic measure.
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        let m = MeasureLine {
            support: None,
            density: None,
            atoms: clean_atoms(atoms)?,
            nodes: quad::DEFAULT_NODES,
        };
        if m.atoms.is_empty() {
            return Err(Error::validation("empty measure"));
        }
        m.check_mass()?;
        Ok(m)
    }

    fn check_mass(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::validation(format!("total mass {mass} is not 1")));
        }
        Ok(())
    }

    fn density_raw(&self, x: f64) -> f64 {
        match &self.density {
            Some(d) => d(x),
            None => 0.0,
        }
    }

    /// Density of the absolutely continuous part; zero off the support.
    pub fn density_at(&self, x: f64) -> f64 {
        match self.support {
            Some((lo, hi)) if x >= lo && x <= hi => self.density_raw(x).max(0.0),
            _ => 0.0,
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    /// Same measure with a different quadrature resolution.
    pub fn with_resolution(&self, nodes: usize) -> MeasureLine {
        MeasureLine {
            nodes: nodes.max(16),
            ..self.clone()
        }
    }

    /// `(x_j, density(x_j) * w_j)` for the absolutely continuous part.
    pub fn ac_nodes(&self, n: usize) -> Vec<(f64, f64)> {
        match self.support {
            Some((lo, hi)) => quad::cosine_rule(lo, hi, n)
                .into_iter()
                .map(|(x, w)| (x, w * self.density_at(x)))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Integral of `f` against the absolutely continuous part.
    pub fn integrate_ac(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .ac_nodes(self.nodes)
            .into_iter()
            .map(|(x, w)| w * f(x))
            .collect();
        quad::pairwise_sum(&terms)
    }

    /// Integral of `f` against the whole measure.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.integrate_ac(&f)
            + self
                .atoms
                .iter()
                .map(|a| a.mass * f(a.location))
                .sum::<f64>()
    }

    pub fn ac_mass(&self) -> f64 {
        self.integrate_ac(|_| 1.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.ac_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// Finitely supported approximation: cosine-rule nodes of the density
    /// plus the atoms, renormalized.
    pub fn discretize(&self, n: usize) -> Result<QuadratureMeasure> {
        let mut pts: Vec<(f64, f64)> = self
            .ac_nodes(n)
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .collect();
        pts.extend(self.atoms.iter().map(|a| (a.location, a.mass)));
        let total: f64 = pts.iter().map(|p| p.1).sum();
        for p in &mut pts {
            p.1 /= total;
        }
        QuadratureMeasure::from_pairs(pts)
    }

    /// Pushforward under `y = (x - s) / r`.
    pub fn affine_map(&self, r: f64, s: f64) -> Result<MeasureLine> {
        if r == 0.0 || !r.is_finite() || !s.is_finite() {
            return Err(Error::domain("affine map needs finite nonzero scale"));
        }
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom::new((a.location - s) / r, a.mass))
            .collect();
        match (self.support, &self.density) {
            (Some((lo, hi)), Some(d)) => {
                let (a, b) = ((lo - s) / r, (hi - s) / r);
                let d = d.clone();
                let density: Density = Arc::new(move |y| r.abs() * d(r * y + s));
                Self::with_nodes((a.min(b), a.max(b)), density, atoms, self.nodes)
            }
            _ => Self::atomic(atoms),
        }
    }
}

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureMeasure {
    /// Builds from unsorted `(point, weight)` pairs. Coincident points are
    /// merged; weights must sum to one within [`WEIGHT_TOL`] and are then
    /// renormalized exactly.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::validation("empty quadrature measure"));
        }
        if pairs.iter().any(|p| !p.0.is_finite() || !(p.1 >= 0.0)) {
            return Err(Error::validation("non-finite point or negative weight"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if points.last() == Some(&x) {
                *weights.last_mut().unwrap() += w;
            } else {
                points.push(x);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::validation(format!("weights sum to {total}")));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(QuadratureMeasure { points, weights })
    }

    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::validation("points and weights differ in length"));
        }
        Self::from_pairs(points.into_iter().zip(weights).collect())
    }

    pub fn dirac(x: f64) -> Self {
        QuadratureMeasure {
            points: vec![x],
            weights: vec![1.0],
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Largest support point and its weight.
    pub fn top(&self) -> (f64, f64) {
        let i = self.points.len() - 1;
        (self.points[i], self.weights[i])
    }

    pub fn affine_map(&self, r: f64, s: f64) -> Result<QuadratureMeasure> {
        if r == 0.0 || !r.is_finite() || !s.is_finite() {
            return Err(Error::domain("affine map needs finite nonzero scale"));
        }
        Self::from_pairs(
            self.points
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| ((x - s) / r, w))
                .collect(),
        )
    }

    /// Trigonometric moments when the points are angles.
    pub fn trig_moments(&self, k: usize) -> Vec<Complex64> {
        (1..=k)
            .map(|j| {
                self.points
                    .iter()
                    .zip(&self.weights)
                    .map(|(&t, &w)| w * Complex64::from_polar(1.0, j as f64 * t))
                    .sum()
            })
            .collect()
    }

    /// CSV with header `point,weight` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["point", "weight"])?;
        for (x, p) in self.points.iter().zip(&self.weights) {
            w.write_record([format!("{x:.16e}"), format!("{p:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut pairs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::validation(format!("bad csv row {rec:?}")))
            };
            pairs.push((parse(0)?, parse(1)?));
        }
        Self::from_pairs(pairs)
    }
}

/// Real moments `m_1..m_K`.
pub trait RealMoments {
    fn moments(&self, k: usize) -> Result<Vec<f64>>;
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::domain(format!(
            "moment order {k} outside 1..={MAX_MOMENT_ORDER}"
        )));
    }
    Ok(())
}

impl RealMoments for QuadratureMeasure {
    fn moments(&self, k: usize) -> Result<Vec<f64>> {
        check_order(k)?;
        Ok((1..=k as i32)
            .map(|j| self.integrate(|x| x.powi(j)))
            .collect())
    }
}

impl RealMoments for MeasureLine {
    fn moments(&self, k: usize) -> Result<Vec<f64>> {
        check_order(k)?;
        self.check_mass()?;
        let fine = self.with_resolution(self.nodes);
        let coarse = self.with_resolution(self.nodes / 2);
        let mut out = Vec::with_capacity(k);
        for j in 1..=k as i32 {
            let a = fine.integrate(|x| x.powi(j));
            let b = coarse.integrate(|x| x.powi(j));
            let scale = fine.integrate(|x| x.abs().powi(j)).max(1.0);
            let residual = (a - b).abs() / scale;
            if residual > 1e-9 {
                return Err(Error::Accuracy {
                    what: format!("moment of order {j}"),
                    residual,
                });
            }
            out.push(a);
        }
        Ok(out)
    }
}

pub fn moments_line<M: RealMoments + ?Sized>(mu: &M, k: usize) -> Result<Vec<f64>> {
    mu.moments(k)
}

/// Probability measure on the unit circle, parametrized by angle in `[-pi, pi)`.
#[derive(Clone)]
pub struct MeasureCircle {
    density: Option<Density>,
    atoms: Vec<Atom>,
    caratheodory: Option<Caratheodory>,
    nodes: usize,
}

impl fmt::Debug for MeasureCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureCircle")
            .field("atoms", &self.atoms)
            .field("closed_form_caratheodory", &self.caratheodory.is_some())
            .field("nodes", &self.nodes)
            .finish()
    }
}

fn wrap_angle(t: f64) -> f64 {
    let mut x = (t + PI).rem_euclid(2.0 * PI) - PI;
    if x >= PI {
        x -= 2.0 * PI;
    }
    x
}

impl MeasureCircle {
    /// `density` is taken with respect to normalized Lebesgue measure `dθ/2π`.
    pub fn new(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        Self::build(Some(Arc::new(density)), atoms, None, quad::DEFAULT_NODES)
    }

    pub fn build(
        density: Option<Density>,
        atoms: Vec<Atom>,
        caratheodory: Option<Caratheodory>,
        nodes: usize,
    ) -> Result<Self> {
        let atoms = atoms
            .into_iter()
            .map(|a| Atom::new(wrap_angle(a.location), a.mass))
            .collect();
        let m = MeasureCircle {
            density,
            atoms: clean_atoms(atoms)?,
            caratheodory,
            nodes: nodes.max(16),
        };
        for (t, _) in quad::circle_rule(m.nodes) {
            let d = m.density_at(t);
            if !(d >= 0.0) {
                return Err(Error::validation(format!(
                    "density {d} at angle {t} is negative"
                )));
            }
        }
        let mass = m.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::validation(format!("total mass {mass} is not 1")));
        }
        Ok(m)
    }

    /// Normalized Lebesgue measure.
    pub fn lebesgue() -> Self {
        Self::build(
            Some(Arc::new(|_| 1.0)),
            Vec::new(),
            Some(Arc::new(|_| Complex64::new(1.0, 0.0))),
            quad::DEFAULT_NODES,
        )
        .expect("lebesgue measure is valid")
    }

    /// Attaches a closed-form Carathéodory function.
    pub fn with_caratheodory(mut self, f: Caratheodory) -> Self {
        self.caratheodory = Some(f);
        self
    }

    pub fn caratheodory_fn(&self) -> Option<&Caratheodory> {
        self.caratheodory.as_ref()
    }

    pub fn density_at(&self, theta: f64) -> f64 {
        match &self.density {
            Some(d) => d(theta),
            None => 0.0,
        }
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn with_resolution(&self, nodes: usize) -> Self {
        MeasureCircle {
            nodes: nodes.max(16),
            ..self.clone()
        }
    }

    pub fn integrate_ac(&self, f: impl Fn(f64) -> f64) -> f64 {
        if self.density.is_none() {
            return 0.0;
        }
        let terms: Vec<f64> = quad::circle_rule(self.nodes)
            .into_iter()
            .map(|(t, w)| w * self.density_at(t) * f(t))
            .collect();
        quad::pairwise_sum(&terms)
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate_ac(|_| 1.0) + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// `c_j = ∫ e^{ijθ} dμ` for `j = 1..=k`.
    pub fn moments(&self, k: usize) -> Result<Vec<Complex64>> {
        check_order(k)?;
        let eval = |nodes: usize, j: usize| -> Complex64 {
            let m = self.with_resolution(nodes);
            let re = m.integrate_ac(|t| (j as f64 * t).cos());
            let im = m.integrate_ac(|t| (j as f64 * t).sin());
            let atoms: Complex64 = self
                .atoms
                .iter()
                .map(|a| a.mass * Complex64::from_polar(1.0, j as f64 * a.location))
                .sum();
            Complex64::new(re, im) + atoms
        };
        (1..=k)
            .map(|j| {
                let a = eval(self.nodes, j);
                let b = eval(self.nodes / 2, j);
                let residual = (a - b).norm();
                if residual > 1e-9 {
                    Err(Error::Accuracy {
                        what: format!("trigonometric moment of order {j}"),
                        residual,
                    })
                } else {
                    Ok(a)
                }
            })
            .collect()
    }
}

pub fn moments_circle(mu: &MeasureCircle, k: usize) -> Result<Vec<Complex64>> {
    mu.moments(k)
}
