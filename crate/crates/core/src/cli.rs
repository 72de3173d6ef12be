//! Command-line driver: sum rule audits, Monte Carlo of the spiked
//! ensembles, Verblunsky tables, `Q_V` listings and law grids.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::ensembles::{sample_spiked_gue, sample_spiked_lue, spectral_measure, stream};
use crate::error::{Error, Result};
use crate::laws::{build, mp_edges, spiked_mp_outlier, Law, LawSpec};
use crate::measures::{Atom, MeasureCircle};
use crate::oprl::ZCoeffs;
use crate::opuc::{gross_witten, gw_alpha, schur_verblunsky, VerblunskyCoeffs};
use crate::potential::{qv_check, qv_reduce, random_hermitian};
use crate::quad::{self, pairwise_sum};
use crate::rates::{sumrule_audit, RateReport, SumRuleCase};

/// Coefficients used for Gross-Witten sum rules.
const GW_TERMS: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "spiked-spectra",
    version,
    about = "Spectral measures of spiked random matrix ensembles"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Each flag can also be set through
/// the `SPIKED_*` environment variable named in its help.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, global = true, env = "SPIKED_SEED", default_value_t = 2024)]
    pub seed: u64,
    /// Matrix size (Monte Carlo) or number of coefficients (tables).
    #[arg(long, global = true, env = "SPIKED_N")]
    pub n: Option<usize>,
    #[arg(long, global = true, env = "SPIKED_REPLICAS", default_value_t = 200)]
    pub replicas: usize,
    #[arg(long, global = true, env = "SPIKED_THETA", allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, env = "SPIKED_TAU")]
    pub tau: Option<f64>,
    #[arg(long, global = true, env = "SPIKED_G", allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long, global = true, env = "SPIKED_PHI", allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, env = "SPIKED_B", allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, env = "SPIKED_C", allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Pass/fail tolerance; each subcommand has its own default.
    #[arg(long, global = true, env = "SPIKED_TOL")]
    pub tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "SPIKED_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "SPIKED_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Hermite,
    Laguerre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawName {
    Sc,
    Mp,
    Gw,
    SpikedSc,
    SpikedMp,
    SpikedGw,
    Meixner,
    MeixnerNormalized,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Both sides of the sum rules, for the default suite or one case such
    /// as `--case meixner b=0 c=-0.75`.
    Sumrule {
        #[arg(long, num_args = 1..)]
        case: Option<Vec<String>>,
    },
    /// Top eigenvalue, its weight and `m_1` per replica of a spiked ensemble.
    McSpike {
        #[arg(long, value_enum, default_value_t = Model::Hermite)]
        model: Model,
    },
    /// Closed-form Gross-Witten coefficients against the Schur algorithm.
    Verblunsky,
    /// `Q_V` terms and trace-identity residuals on random Hermitian matrices.
    Qv {
        /// Coefficients of `V` from the constant term up.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "0,0,0,0,1"
        )]
        coeffs: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Density grid and atoms of a limit law.
    Laws {
        #[arg(long, value_enum)]
        law: LawName,
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Seventeen significant digits.
pub fn render_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => render_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) if x.is_finite() => {
                let v: f64 = render_number(*x).parse().unwrap_or(*x);
                serde_json::Number::from_f64(v)
                    .map_or(serde_json::Value::Null, serde_json::Value::Number)
            }
            Cell::Num(x) => serde_json::Value::String(render_number(*x)),
            Cell::Int(i) => serde_json::Value::from(*i),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let map = self
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), v.json()))
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                let mut s =
                    serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

/// A table plus the names of the rows that missed their tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub failures: Vec<String>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_)
        | Error::Validation(_)
        | Error::CostGuard(_)
        | Error::NotMomentSequence { .. } => EXIT_INVALID,
        _ => EXIT_NUMERICAL,
    }
}

fn positive(name: &str, x: usize, min: usize) -> Result<usize> {
    if x < min {
        return Err(Error::domain(format!(
            "--{name} must be at least {min}, got {x}"
        )));
    }
    Ok(x)
}

fn tolerance(cfg: &RunConfig, default: f64) -> Result<f64> {
    let t = cfg.tol.unwrap_or(default);
    if !(t >= 0.0) {
        return Err(Error::domain(format!("--tol must be nonnegative, got {t}")));
    }
    Ok(t)
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let cfg = &cli.config;
    positive("replicas", cfg.replicas, 1)?;
    match &cli.command {
        Command::Sumrule { case } => cmd_sumrule(cfg, case.as_deref()),
        Command::McSpike { model } => cmd_mc_spike(cfg, *model),
        Command::Verblunsky => cmd_verblunsky(cfg),
        Command::Qv { coeffs, trials } => cmd_qv(cfg, coeffs, *trials),
        Command::Laws { law, points } => cmd_laws(cfg, *law, *points),
    }
}

/// Parses arguments, runs, writes the table and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = match report.table.render(cli.config.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let written = match &cli.config.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_NUMERICAL;
    }
    if report.failures.is_empty() {
        EXIT_OK
    } else {
        for f in &report.failures {
            eprintln!("FAIL: {f}");
        }
        EXIT_TOLERANCE
    }
}

/// A named sum rule case.
pub struct NamedCase {
    pub name: String,
    pub case: SumRuleCase,
}

fn gw_coeffs(g: f64, phi: f64) -> Result<VerblunskyCoeffs> {
    LawSpec::SpikedGw { g, phi }.verblunsky(GW_TERMS)
}

fn parse_case(words: &[String]) -> Result<NamedCase> {
    let (kind, rest) = words
        .split_first()
        .ok_or_else(|| Error::domain("--case needs a kind"))?;
    let mut params = std::collections::BTreeMap::new();
    for w in rest {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::domain(format!("expected key=value, got `{w}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::domain(format!("`{v}` is not a number")))?;
        params.insert(k.to_string(), v);
    }
    let allowed: &[&str] = match kind.as_str() {
        "hermite" => &["theta"],
        "meixner" => &["b", "c"],
        "laguerre" => &["tau", "theta"],
        "szego" => &["g"],
        "gw" => &["g", "phi"],
        other => return Err(Error::domain(format!("unknown case kind `{other}`"))),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::domain(format!(
            "`{k}` is not a parameter of `{kind}`"
        )));
    }
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    match kind.as_str() {
        "hermite" => Ok(hermite_case(get("theta", 0.0))?),
        "meixner" => Ok(meixner_case(get("b", 0.0), get("c", 0.0))?),
        "laguerre" => Ok(laguerre_case(get("tau", 0.5), get("theta", 1.0))?),
        "szego" => Ok(szego_case(get("g", 0.8))?),
        _ => Ok(gw_case(get("g", 0.8), params.get("phi").copied())?),
    }
}

fn hermite_case(theta: f64) -> Result<NamedCase> {
    let spec = LawSpec::SpikedSc { theta };
    Ok(NamedCase {
        name: format!("hermite theta={theta}"),
        case: SumRuleCase::Hermite {
            measure: build(spec)?.line()?,
            jacobi: spec.jacobi()?,
        },
    })
}

fn meixner_case(b: f64, c: f64) -> Result<NamedCase> {
    let spec = LawSpec::MeixnerNormalized { b, c };
    Ok(NamedCase {
        name: format!("meixner b={b} c={c}"),
        case: SumRuleCase::Hermite {
            measure: build(spec)?.line()?,
            jacobi: spec.jacobi()?,
        },
    })
}

fn laguerre_case(tau: f64, theta: f64) -> Result<NamedCase> {
    let spec = LawSpec::SpikedMp { tau, theta };
    spec.validate()?;
    Ok(NamedCase {
        name: format!("laguerre tau={tau} theta={theta}"),
        case: SumRuleCase::Laguerre {
            measure: build(spec)?.line()?,
            z: ZCoeffs::marchenko_pastur(tau)?.scale_first(theta)?,
            tau,
        },
    })
}

fn szego_case(g: f64) -> Result<NamedCase> {
    Ok(NamedCase {
        name: format!("szego g={g}"),
        case: SumRuleCase::Szego {
            measure: gross_witten(g)?,
            alpha: gw_coeffs(g, 0.0)?,
        },
    })
}

/// Reference `GW_g` evaluated at `λ_0` (no `phi`) or at the rotated law.
fn gw_case(g: f64, phi: Option<f64>) -> Result<NamedCase> {
    let (name, measure, alpha) = match phi {
        None => (
            format!("gw g={g}"),
            MeasureCircle::lebesgue(),
            VerblunskyCoeffs::infinite(vec![Complex64::new(0.0, 0.0)])?,
        ),
        Some(phi) => (
            format!("gw g={g} phi={phi}"),
            build(LawSpec::SpikedGw { g, phi })?.circle()?,
            gw_coeffs(g, phi)?,
        ),
    };
    Ok(NamedCase {
        name,
        case: SumRuleCase::Gw { measure, alpha, g },
    })
}

/// Cases run by `sumrule` without `--case`.
pub fn default_suite() -> Result<Vec<NamedCase>> {
    Ok(vec![
        hermite_case(0.0)?,
        hermite_case(0.5)?,
        hermite_case(2.0)?,
        hermite_case(-3.0)?,
        meixner_case(0.0, -0.75)?,
        meixner_case(0.5, 0.0)?,
        meixner_case(0.0, 0.5)?,
        laguerre_case(0.5, 1.0)?,
        laguerre_case(0.5, 2.0)?,
        laguerre_case(0.25, 0.5)?,
        szego_case(0.8)?,
        gw_case(0.8, None)?,
        gw_case(0.8, Some(std::f64::consts::FRAC_PI_3))?,
    ])
}

fn cmd_sumrule(cfg: &RunConfig, case: Option<&[String]>) -> Result<Report> {
    let tol = tolerance(cfg, 1e-5)?;
    let cases = match case {
        Some(words) => vec![parse_case(words)?],
        None => default_suite()?,
    };
    let mut table = Table::new(&[
        "case",
        "measure_side",
        "coeff_side",
        "kl_term",
        "outlier_terms",
        "discrepancy",
        "tol",
        "pass",
    ]);
    let mut failures = Vec::new();
    for NamedCase { name, case } in cases {
        let RateReport {
            measure_side,
            coeff_side,
            outlier_terms,
            kl_term,
            discrepancy,
        } = sumrule_audit(&case)?;
        let outliers = outlier_terms.iter().fold(0.0, |acc, o| acc + o.1);
        let pass = discrepancy <= tol;
        if !pass {
            failures.push(format!(
                "{name}: discrepancy {} > {tol}",
                render_number(discrepancy)
            ));
        }
        table.push(vec![
            name.into(),
            measure_side.into(),
            coeff_side.into(),
            kl_term.into(),
            outliers.into(),
            discrepancy.into(),
            tol.into(),
            (if pass { "true" } else { "false" }).into(),
        ]);
    }
    Ok(Report { table, failures })
}

/// Limits of (top eigenvalue, its weight, `m_1`) for the spiked laws.
pub fn spike_limits(model: Model, theta: f64, tau: f64) -> Result<(f64, f64, f64)> {
    match model {
        Model::Hermite => {
            if theta > 1.0 {
                Ok((theta + 1.0 / theta, 1.0 - 1.0 / (theta * theta), theta))
            } else {
                Ok((2.0, 0.0, theta))
            }
        }
        Model::Laguerre => {
            let spec = LawSpec::SpikedMp { tau, theta };
            spec.validate()?;
            let m1 = spec.jacobi()?.b_at(0).unwrap_or(f64::NAN);
            match spiked_mp_outlier(tau, theta) {
                Some((w, v)) if w > mp_edges(tau).1 => Ok((w, v, m1)),
                _ => Ok((mp_edges(tau).1, 0.0, m1)),
            }
        }
    }
}

/// Per-replica `(top eigenvalue, top weight, m_1)`; replica `i` draws from
/// stream `i` of `seed`.
pub fn mc_spike_replicas(
    model: Model,
    n: usize,
    theta: f64,
    tau: f64,
    seed: u64,
    replicas: usize,
) -> Result<Vec<[f64; 3]>> {
    let big_n = if model == Model::Laguerre {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::domain(format!("tau = {tau} must lie in (0, 1]")));
        }
        (n as f64 / tau).round() as usize
    } else {
        n
    };
    (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let q = match model {
                Model::Hermite => spectral_measure(&sample_spiked_gue(n, theta, &mut rng)?)?,
                Model::Laguerre => {
                    spectral_measure(&sample_spiked_lue(n, big_n, theta, &mut rng)?)?
                }
            };
            let (top, w) = q.top();
            Ok([top, w, q.integrate(|x| x)])
        })
        .collect()
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0) / n).sqrt())
}

fn cmd_mc_spike(cfg: &RunConfig, model: Model) -> Result<Report> {
    let n = positive("n", cfg.n.unwrap_or(500), 2)?;
    let theta = cfg.theta.unwrap_or(2.0);
    let tau = cfg.tau.unwrap_or(0.5);
    if model == Model::Laguerre && !(theta > 0.0) {
        return Err(Error::domain(format!("theta = {theta} must be positive")));
    }
    let tol = tolerance(cfg, 0.05)?;
    let rows = mc_spike_replicas(model, n, theta, tau, cfg.seed, cfg.replicas)?;
    let limits = spike_limits(model, theta, tau)?;

    let mut table = Table::new(&["row", "top_eigenvalue", "top_weight", "m1", "tol"]);
    // Eigen-solver accuracy of the individual replica values.
    let solver_tol = 1e-10;
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![
            i.to_string().into(),
            r[0].into(),
            r[1].into(),
            r[2].into(),
            solver_tol.into(),
        ]);
    }
    let stats: Vec<(f64, f64)> = (0..3)
        .map(|k| mean_and_stderr(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect();
    table.push(vec![
        "mean".into(),
        stats[0].0.into(),
        stats[1].0.into(),
        stats[2].0.into(),
        tol.into(),
    ]);
    table.push(vec![
        "stderr".into(),
        stats[0].1.into(),
        stats[1].1.into(),
        stats[2].1.into(),
        Cell::Empty,
    ]);
    table.push(vec![
        "limit".into(),
        limits.0.into(),
        limits.1.into(),
        limits.2.into(),
        tol.into(),
    ]);

    let names = ["top_eigenvalue", "top_weight", "m1"];
    let lim = [limits.0, limits.1, limits.2];
    let failures = (0..3)
        .filter(|&k| !((stats[k].0 - lim[k]).abs() <= tol))
        .map(|k| {
            format!(
                "{}: mean {} vs limit {} (tol {tol})",
                names[k],
                render_number(stats[k].0),
                render_number(lim[k])
            )
        })
        .collect();
    Ok(Report { table, failures })
}

fn cmd_verblunsky(cfg: &RunConfig) -> Result<Report> {
    let g = cfg.g.unwrap_or(0.8);
    let k = positive("n", cfg.n.unwrap_or(30), 1)?;
    let tol = tolerance(cfg, 1e-10)?;
    let closed: Vec<Complex64> = (0..=k).map(|n| gw_alpha(g, n)).collect::<Result<_>>()?;
    let mut moments = vec![Complex64::new(0.0, 0.0); k + 1];
    moments[0] = Complex64::new(g / 2.0, 0.0);
    let schur = schur_verblunsky(&moments)?;
    let mut table = Table::new(&[
        "n",
        "closed_form_re",
        "closed_form_im",
        "schur_re",
        "schur_im",
        "diff",
        "tol",
    ]);
    let mut failures = Vec::new();
    for (n, a) in closed.iter().enumerate() {
        let s = schur.get(n).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let diff = (a - s).norm();
        if !(diff <= tol) {
            failures.push(format!("n={n}: diff {}", render_number(diff)));
        }
        table.push(vec![
            n.into(),
            a.re.into(),
            a.im.into(),
            s.re.into(),
            s.im.into(),
            diff.into(),
            tol.into(),
        ]);
    }
    Ok(Report { table, failures })
}

fn cmd_qv(cfg: &RunConfig, coeffs: &[f64], trials: usize) -> Result<Report> {
    let tol = tolerance(cfg, 1e-10)?;
    let q = qv_reduce(coeffs)?;
    let mut table = Table::new(&["kind", "label", "value", "lhs", "rhs", "diff", "tol"]);
    let mut listing = MomentPolynomialRows::default();
    for (c, p, m) in q.terms() {
        listing.push(c, p, m);
    }
    for (label, c) in listing.0.into_iter().rev() {
        table.push(vec![
            "term".into(),
            label.into(),
            c.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            // Word counts are exact integers times the coefficients of V.
            0.0.into(),
        ]);
    }
    table.push(vec![
        "polynomial".into(),
        q.to_string().into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
    ]);
    let mut failures = Vec::new();
    for t in 0..trials {
        let mut rng = stream(cfg.seed, t as u64);
        let n = rng.random_range(5..=10usize);
        let theta = rng.random_range(-2.0..=2.0);
        let m = random_hermitian(n, &mut rng);
        let chk = qv_check(coeffs, &q, &m, theta)?;
        let label = format!("trial={t} n={n} theta={}", render_number(theta));
        if !(chk.diff <= tol) {
            failures.push(format!("{label}: residual {}", render_number(chk.diff)));
        }
        table.push(vec![
            "check".into(),
            label.into(),
            Cell::Empty,
            chk.lhs.into(),
            chk.rhs.into(),
            chk.diff.into(),
            tol.into(),
        ]);
    }
    Ok(Report { table, failures })
}

#[derive(Default)]
struct MomentPolynomialRows(Vec<(String, f64)>);

impl MomentPolynomialRows {
    fn push(&mut self, c: f64, p: u32, m: &[u32]) {
        let mut label = format!("theta^{p}");
        for j in m {
            let _ = write!(label, " m{j}");
        }
        self.0.push((label, c));
    }
}

fn law_spec(cfg: &RunConfig, law: LawName) -> LawSpec {
    let theta = cfg.theta.unwrap_or(2.0);
    let tau = cfg.tau.unwrap_or(0.5);
    let g = cfg.g.unwrap_or(0.8);
    let phi = cfg.phi.unwrap_or(0.0);
    let (b, c) = (cfg.b.unwrap_or(0.0), cfg.c.unwrap_or(0.0));
    match law {
        LawName::Sc => LawSpec::Sc,
        LawName::Mp => LawSpec::Mp { tau },
        LawName::Gw => LawSpec::Gw { g },
        LawName::SpikedSc => LawSpec::SpikedSc { theta },
        LawName::SpikedMp => LawSpec::SpikedMp { tau, theta },
        LawName::SpikedGw => LawSpec::SpikedGw { g, phi },
        LawName::Meixner => LawSpec::Meixner { b, c },
        LawName::MeixnerNormalized => LawSpec::MeixnerNormalized { b, c },
    }
}

fn cmd_laws(cfg: &RunConfig, law: LawName, points: usize) -> Result<Report> {
    let points = positive("points", points, 2)?;
    let tol = tolerance(cfg, 1e-8)?;
    let spec = law_spec(cfg, law);
    let mut table = Table::new(&["kind", "x", "value", "tol"]);
    type Density = Box<dyn Fn(f64) -> f64>;
    let (grid, density, atoms, mass): (Vec<f64>, Density, Vec<Atom>, f64) = match build(spec)? {
        Law::Line(mu) => {
            let grid = match mu.support() {
                Some((lo, hi)) => quad::cosine_rule(lo, hi, points)
                    .into_iter()
                    .rev()
                    .map(|p| p.0)
                    .collect(),
                None => Vec::new(),
            };
            let mass = mu.total_mass();
            let atoms = mu.atoms().to_vec();
            (grid, Box::new(move |x| mu.density_at(x)), atoms, mass)
        }
        Law::Circle(mu) => {
            let grid = quad::circle_rule(points).into_iter().map(|p| p.0).collect();
            let mass = mu.total_mass();
            let atoms = mu.atoms().to_vec();
            (grid, Box::new(move |t| mu.density_at(t)), atoms, mass)
        }
    };
    // Densities are closed forms; atoms come from residues.
    let density_tol = 1e-14;
    let atom_tol = 1e-12;
    for x in grid {
        table.push(vec![
            "density".into(),
            x.into(),
            density(x).into(),
            density_tol.into(),
        ]);
    }
    for a in &atoms {
        table.push(vec![
            "atom".into(),
            a.location.into(),
            a.mass.into(),
            atom_tol.into(),
        ]);
    }
    table.push(vec!["mass".into(), Cell::Empty, mass.into(), tol.into()]);
    let failures = if (mass - 1.0).abs() <= tol {
        Vec::new()
    } else {
        vec![format!("total mass {}", render_number(mass))]
    };
    Ok(Report { table, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(args: &[&str]) -> Result<Report> {
        let mut full = vec!["spiked-spectra"];
        full.extend_from_slice(args);
        execute(&Cli::try_parse_from(full).unwrap())
    }

    fn cell(r: &Report, row: usize, col: &str) -> f64 {
        match &r.table.rows[row][r.table.column(col).unwrap()] {
            Cell::Num(x) => *x,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn number_rendering() {
        assert_eq!(render_number(0.1), "1.0000000000000001e-1");
        assert_eq!(render_number(f64::INFINITY), "inf");
        assert_eq!(render_number(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn default_sumrule_suite_passes() {
        let r = report(&["sumrule"]).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        assert_eq!(r.table.rows.len(), default_suite().unwrap().len());
    }

    #[test]
    fn meixner_case_row() {
        let r = report(&["sumrule", "--case", "meixner", "b=0", "c=-0.75"]).unwrap();
        assert!((cell(&r, 0, "coeff_side") - 1.6137056388801094).abs() < 1e-12);
        assert!(cell(&r, 0, "discrepancy") < 1e-5);
    }

    #[test]
    fn gw_case_row() {
        let r = report(&["sumrule", "--case", "gw", "g=0.8", "--format", "json"]).unwrap();
        assert!((cell(&r, 0, "measure_side") - 0.17685644868579024).abs() < 1e-9);
        assert!((cell(&r, 0, "coeff_side") - 0.17685644868579024).abs() < 1e-12);
    }

    #[test]
    fn bad_case_is_rejected() {
        assert!(matches!(
            report(&["sumrule", "--case", "gw", "x=1"]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            report(&["sumrule", "--case", "nope"]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            report(&["sumrule", "--case", "gw", "g=2"]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn verblunsky_tables() {
        let r = report(&["verblunsky", "--g", "0.8"]).unwrap();
        assert!(r.failures.is_empty());
        assert_eq!(r.table.rows.len(), 31);
        let r = report(&["verblunsky", "--g", "1", "--n", "12", "--tol", "1e-8"]).unwrap();
        for n in 0..=12 {
            let want = (-1.0f64).powi(n as i32 + 1) / (n + 2) as f64;
            assert!((cell(&r, n, "closed_form_re") + want).abs() < 1e-15);
        }
        let r = report(&["verblunsky", "--g", "0"]).unwrap();
        assert!((0..r.table.rows.len()).all(|i| cell(&r, i, "schur_re") == 0.0));
    }

    #[test]
    fn qv_listing_and_guard() {
        let r = report(&["qv", "--coeffs", "0,0,1", "--trials", "3"]).unwrap();
        assert!(r.failures.is_empty());
        let poly = r
            .table
            .rows
            .iter()
            .find(|row| row[0] == Cell::from("polynomial"))
            .unwrap();
        assert_eq!(poly[1], Cell::from("θ^2 - 2 θ m1"));
        let r = report(&["qv", "--trials", "20"]).unwrap();
        assert!(r.failures.is_empty());
        let mut big = vec!["0"; 14];
        big[13] = "1";
        let arg = big.join(",");
        assert!(matches!(
            report(&["qv", "--coeffs", &arg]),
            Err(Error::CostGuard(_))
        ));
    }

    #[test]
    fn laws_grid() {
        let r = report(&[
            "laws",
            "--law",
            "spiked-sc",
            "--theta",
            "2",
            "--points",
            "8",
        ])
        .unwrap();
        assert!(r.failures.is_empty());
        let atom = r
            .table
            .rows
            .iter()
            .find(|row| row[0] == Cell::from("atom"))
            .unwrap();
        assert_eq!(atom[1], Cell::Num(2.5));
        assert!(report(&["laws", "--law", "spiked-mp", "--tau", "1"]).is_err());
    }

    #[test]
    fn mc_spike_is_deterministic_and_summarized() {
        let args = [
            "mc-spike",
            "--n",
            "60",
            "--replicas",
            "6",
            "--seed",
            "3",
            "--tol",
            "10",
        ];
        let a = report(&args).unwrap();
        let b = report(&args).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.table.rows.len(), 9);
        assert!(a.failures.is_empty());
        let csv_a = a.table.render(Format::Csv).unwrap();
        assert!(csv_a.starts_with("row,top_eigenvalue,top_weight,m1,tol\n"));
    }

    #[test]
    fn spike_limit_values() {
        assert_eq!(
            spike_limits(Model::Hermite, 2.0, 0.0).unwrap(),
            (2.5, 0.75, 2.0)
        );
        assert_eq!(
            spike_limits(Model::Hermite, 0.5, 0.0).unwrap(),
            (2.0, 0.0, 0.5)
        );
        let (w, v, m1) = spike_limits(Model::Laguerre, 2.0, 0.5).unwrap();
        assert!(
            (w - 3.0).abs() < 1e-14 && (v - 1.0 / 3.0).abs() < 1e-14 && (m1 - 2.0).abs() < 1e-14
        );
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let r = report(&["sumrule", "--case", "hermite", "theta=2"]).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&r.table.render(Format::Json).unwrap()).unwrap();
        let obj = v[0].as_object().unwrap();
        assert_eq!(obj.keys().count(), r.table.columns.len());
        assert_eq!(obj["case"], "hermite theta=2");
    }
}
