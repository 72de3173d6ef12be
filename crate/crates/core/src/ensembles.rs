//! Samplers for the spiked Gaussian, Laguerre and Gross-Witten models in
//! coefficient form, and the random spectral measure of a sample.

use std::f64::consts::PI;

use nalgebra::Complex;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};
use crate::measures::QuadratureMeasure;
use crate::oprl::{golub_welsch, JacobiCoeffs};
use crate::opuc::{aleksandrov, cmv_build, gw_alpha, VerblunskyCoeffs};

/// Sweeps discarded before the Gross-Witten chain is sampled.
pub const BURN_IN: usize = 100;
/// Acceptance rate below which a chain is flagged as poorly mixing.
pub const MIN_ACCEPTANCE: f64 = 0.01;

/// Counter-based random stream.
pub type Stream = ChaCha20Rng;

/// Independent stream number `index` under a master `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A chi variate with `k` degrees of freedom, as the root of Gamma(k/2, 2).
pub fn chi<R: Rng + ?Sized>(k: usize, rng: &mut R) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let g = Gamma::new(k as f64 / 2.0, 2.0).expect("positive shape");
    g.sample(rng).sqrt()
}

fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * PI * rng.random::<f64>() - PI
}

#[derive(Debug, Clone)]
pub struct SpikedHermiteSample {
    pub jacobi: JacobiCoeffs,
    pub n: usize,
    pub theta: f64,
}

/// Tridiagonal spiked GUE: `b_1 ~ N(θ, 1/n)`, `b_k ~ N(0, 1/n)`,
/// `a_k = χ_{2(n-k)} / sqrt(2n)`.
pub fn sample_spiked_gue<R: Rng + ?Sized>(
    n: usize,
    theta: f64,
    rng: &mut R,
) -> Result<SpikedHermiteSample> {
    if n < 2 {
        return Err(Error::domain(format!("matrix size {n} < 2")));
    }
    if !theta.is_finite() {
        return Err(Error::domain("spike must be finite"));
    }
    let sd = (1.0 / n as f64).sqrt();
    let normal = Normal::new(0.0, sd).expect("positive sd");
    let scale = (2.0 * n as f64).sqrt();
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n - 1);
    for k in 1..=n {
        b.push(normal.sample(rng) + if k == 1 { theta } else { 0.0 });
        if k < n {
            a.push(chi(2 * (n - k), rng) / scale);
        }
    }
    Ok(SpikedHermiteSample {
        jacobi: JacobiCoeffs::finite(b, a)?,
        n,
        theta,
    })
}

/// Lower bidiagonal `B` with `J = B B^T`.
#[derive(Debug, Clone)]
pub struct SpikedLaguerreSample {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
    pub n: usize,
    pub big_n: usize,
    pub tau: f64,
    pub theta: f64,
}

impl SpikedLaguerreSample {
    /// `z_1, ..., z_{2n-1}`: squared diagonal and subdiagonal entries interleaved.
    pub fn z(&self) -> Vec<f64> {
        let mut z = Vec::with_capacity(2 * self.n - 1);
        for k in 0..self.n {
            z.push(self.diag[k] * self.diag[k]);
            if k + 1 < self.n {
                z.push(self.sub[k] * self.sub[k]);
            }
        }
        z
    }

    pub fn jacobi(&self) -> Result<JacobiCoeffs> {
        let n = self.n;
        let b = (0..n)
            .map(|k| {
                let s = if k == 0 {
                    0.0
                } else {
                    self.sub[k - 1] * self.sub[k - 1]
                };
                self.diag[k] * self.diag[k] + s
            })
            .collect();
        let a = (0..n - 1).map(|k| self.diag[k] * self.sub[k]).collect();
        JacobiCoeffs::finite(b, a)
    }
}

/// Bidiagonal spiked LUE with `n <= N`. The spike multiplies `B_11` by
/// `sqrt θ`, so `z_1` becomes `θ z_1`.
pub fn sample_spiked_lue<R: Rng + ?Sized>(
    n: usize,
    big_n: usize,
    theta: f64,
    rng: &mut R,
) -> Result<SpikedLaguerreSample> {
    if n < 2 || n > big_n {
        return Err(Error::domain(format!(
            "need 2 <= n <= N, got n={n}, N={big_n}"
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!(
            "Laguerre spike {theta} must be positive"
        )));
    }
    let scale = (2.0 * big_n as f64).sqrt();
    let mut diag = Vec::with_capacity(n);
    let mut sub = Vec::with_capacity(n - 1);
    for k in 1..=n {
        diag.push(chi(2 * (big_n - k + 1), rng) / scale);
        if k < n {
            sub.push(chi(2 * (n - k), rng) / scale);
        }
    }
    diag[0] *= theta.sqrt();
    Ok(SpikedLaguerreSample {
        diag,
        sub,
        n,
        big_n,
        tau: n as f64 / big_n as f64,
        theta,
    })
}

/// Haar coefficients: `|α_k|^2 ~ Beta(1, n-k-1)` with uniform phase and a
/// uniform unimodular `α_{n-1}`.
pub fn sample_cue_verblunsky<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<VerblunskyCoeffs> {
    if n == 0 {
        return Err(Error::domain("need n >= 1"));
    }
    let mut alpha = Vec::with_capacity(n);
    for k in 0..n {
        let r = if k + 1 == n {
            1.0
        } else {
            let u = 1.0 - rng.random::<f64>();
            (1.0 - u.powf(1.0 / (n - k - 1) as f64)).sqrt()
        };
        alpha.push(Complex64::from_polar(r, uniform_phase(rng)));
    }
    VerblunskyCoeffs::finite(alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcStats {
    pub acceptance: f64,
    pub sweeps: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct GrossWittenSample {
    pub alpha: VerblunskyCoeffs,
    pub g: f64,
    pub n: usize,
    pub mcmc_stats: McmcStats,
}

impl GrossWittenSample {
    /// First trigonometric moment of the spectral measure, `conj α_0`.
    pub fn m1(&self) -> Complex64 {
        self.alpha.alpha()[0].conj()
    }
}

/// Metropolis chain on Verblunsky coefficients for the Gross-Witten weight
/// `exp(n g Re Tr C)` over the Haar coefficient law.
pub struct GrossWittenChain {
    alpha: Vec<Complex64>,
    g: f64,
    steps: Vec<f64>,
    proposed: u64,
    accepted: u64,
    sweeps: usize,
}

impl GrossWittenChain {
    /// Starts from the large-n coefficients with a random last phase.
    pub fn new<R: Rng + ?Sized>(n: usize, g: f64, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("chain needs n >= 2"));
        }
        if !(g.abs() <= 1.0) {
            return Err(Error::domain(format!("|g| = {} exceeds 1", g.abs())));
        }
        let mut alpha = (0..n - 1)
            .map(|k| gw_alpha(g, k))
            .collect::<Result<Vec<_>>>()?;
        alpha.push(Complex64::from_polar(1.0, uniform_phase(rng)));
        let steps = (0..n).map(|k| 1.2 / ((n - k) as f64).sqrt()).collect();
        Ok(GrossWittenChain {
            alpha,
            g,
            steps,
            proposed: 0,
            accepted: 0,
            sweeps: 0,
        })
    }

    fn prev(&self, k: usize) -> Complex64 {
        if k == 0 {
            Complex64::new(-1.0, 0.0)
        } else {
            self.alpha[k - 1]
        }
    }

    // Terms of Re Tr C that involve α_k.
    fn local_trace(&self, k: usize, a: Complex64) -> f64 {
        let mut s = -(a.conj() * self.prev(k)).re;
        if k + 1 < self.alpha.len() {
            s -= (self.alpha[k + 1].conj() * a).re;
        }
        s
    }

    /// One pass of single-coordinate updates over all `n` coefficients.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.alpha.len();
        let tilt = n as f64 * self.g;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        for k in 0..n {
            let old = self.alpha[k];
            let step = self.steps[k];
            let (new, log_base) = if k + 1 == n {
                let t = old.arg() + step * normal.sample(rng);
                (Complex64::from_polar(1.0, t), 0.0)
            } else {
                let prop = old + Complex64::new(normal.sample(rng), normal.sample(rng)) * step;
                let r2 = prop.norm_sqr();
                if r2 >= 1.0 {
                    self.proposed += 1;
                    continue;
                }
                let e = (n - k - 2) as f64;
                (prop, e * ((1.0 - r2).ln() - (1.0 - old.norm_sqr()).ln()))
            };
            let log_ratio = log_base + tilt * (self.local_trace(k, new) - self.local_trace(k, old));
            self.proposed += 1;
            if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
                self.alpha[k] = new;
                self.accepted += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn run<R: Rng + ?Sized>(&mut self, sweeps: usize, rng: &mut R) {
        for _ in 0..sweeps {
            self.sweep(rng);
        }
    }

    pub fn stats(&self) -> McmcStats {
        let acceptance = if self.proposed == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposed as f64
        };
        let warning = (acceptance < MIN_ACCEPTANCE)
            .then(|| format!("acceptance rate {acceptance:.4} below {MIN_ACCEPTANCE}"));
        McmcStats {
            acceptance,
            sweeps: self.sweeps,
            warning,
        }
    }

    pub fn sample(&self) -> Result<GrossWittenSample> {
        Ok(GrossWittenSample {
            alpha: VerblunskyCoeffs::finite(self.alpha.clone())?,
            g: self.g,
            n: self.alpha.len(),
            mcmc_stats: self.stats(),
        })
    }
}

/// One Gross-Witten draw after `BURN_IN + sweeps` sweeps. At `g = 0` the
/// target is the Haar law itself and the exact sampler is used.
pub fn sample_gw_verblunsky<R: Rng + ?Sized>(
    n: usize,
    g: f64,
    rng: &mut R,
    sweeps: usize,
) -> Result<GrossWittenSample> {
    if sweeps == 0 {
        return Err(Error::domain("need at least one sweep"));
    }
    if !(g.abs() <= 1.0) {
        return Err(Error::domain(format!("|g| = {} exceeds 1", g.abs())));
    }
    if g == 0.0 || n == 1 {
        let alpha = sample_cue_verblunsky(n, rng)?;
        return Ok(GrossWittenSample {
            alpha,
            g,
            n,
            mcmc_stats: McmcStats {
                acceptance: 1.0,
                sweeps: 0,
                warning: None,
            },
        });
    }
    let mut chain = GrossWittenChain::new(n, g, rng)?;
    chain.run(BURN_IN + sweeps, rng);
    chain.sample()
}

/// Models whose spectral measure at the first basis vector can be extracted.
pub trait SpectralSample {
    fn spectral_measure(&self) -> Result<QuadratureMeasure>;
}

impl SpectralSample for SpikedHermiteSample {
    fn spectral_measure(&self) -> Result<QuadratureMeasure> {
        if self.n == 1 {
            return Ok(QuadratureMeasure::dirac(self.jacobi.b()[0]));
        }
        golub_welsch(&self.jacobi, self.n)
    }
}

impl SpectralSample for SpikedLaguerreSample {
    fn spectral_measure(&self) -> Result<QuadratureMeasure> {
        golub_welsch(&self.jacobi()?, self.n)
    }
}

impl SpectralSample for GrossWittenSample {
    /// Points are eigenangles in `[-π, π)`.
    fn spectral_measure(&self) -> Result<QuadratureMeasure> {
        let c = cmv_build(&self.alpha)?;
        let schur = c.try_schur(1e-14, 10_000).ok_or_else(|| {
            Error::numerical("Schur decomposition of the CMV matrix did not converge")
        })?;
        let (q, t) = schur.unpack();
        let pairs = (0..t.nrows())
            .map(|k| {
                let lam: Complex<f64> = t[(k, k)];
                (crate::opuc::wrap(lam.arg()), q[(0, k)].norm_sqr())
            })
            .collect();
        QuadratureMeasure::from_pairs(pairs)
    }
}

pub fn spectral_measure<S: SpectralSample + ?Sized>(sample: &S) -> Result<QuadratureMeasure> {
    sample.spectral_measure()
}

/// The image of a sample under the rank-one unitary perturbation of angle
/// `φ`: every coefficient is multiplied by `e^{-iφ}`.
pub fn unitary_rank_one_pushforward(sample: &GrossWittenSample, phi: f64) -> GrossWittenSample {
    GrossWittenSample {
        alpha: aleksandrov(&sample.alpha, phi),
        ..sample.clone()
    }
}
