//! Run configuration, verification suites, and the command entry points used
//! by the `poisson-sharp` binary.
//!
//! A configuration file holds `key = value` lines (`#` starts a comment).
//! Keys: `domain`, `h`, `rtol`, `betas`, `beta`, `suites`, `seed`, `out`,
//! `kmax`, `samples`. Command-line flags override file values.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bathtub::{ExtremalOptimizer, OptimizerOptions, SigmaCurve};
use crate::bounds::{
    bound_shifted, bound_sign_split, compare_ball_moduli, verify_2_7, BallModulusParams, BoundReport, TOL_DISC,
};
use crate::error::{Error, Result};
use crate::families::{feasible_source, nonnegative_field, sign_changing_field, Lcg64};
use crate::grid::{make_domain, GridDomain, ScalarField, Shape};
use crate::io;
use crate::rearrange::{ball_for, green_rearrangement_check, talenti_check, RadialProfile};
use crate::solver::{solve_poisson, torsion_function};
use crate::spectral::{eigen_bound_check, eigen_raw_bound_check, eigenpairs, DEFAULT_EIGEN_EPS};

/// Exit status for configuration and input errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a solve does not converge.
pub const EXIT_SOLVER: i32 = 3;
/// Exit status when a gating check fails.
pub const EXIT_CHECK_FAILED: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_solver_failure() => EXIT_SOLVER,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Sigma,
    Ball,
    Talenti,
    Green,
    Sign,
    Eigen,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Sigma, Suite::Ball, Suite::Talenti, Suite::Green, Suite::Sign, Suite::Eigen];

    /// Per-suite stream offset, so a suite draws the same families whatever
    /// else is selected.
    fn stream(self) -> u64 {
        0x9e37_79b9_7f4a_7c15u64.wrapping_mul(self as u64 + 1)
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigma" => Ok(Suite::Sigma),
            "ball" => Ok(Suite::Ball),
            "talenti" => Ok(Suite::Talenti),
            "green" => Ok(Suite::Green),
            "sign" => Ok(Suite::Sign),
            "eigen" => Ok(Suite::Eigen),
            other => Err(Error::InvalidArgument(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Sigma => "sigma",
            Suite::Ball => "ball",
            Suite::Talenti => "talenti",
            Suite::Green => "green",
            Suite::Sign => "sign",
            Suite::Eigen => "eigen",
        };
        f.write_str(name)
    }
}

/// Explicit `β` values, or a count of equispaced points in `(0, |D|]`.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSpec {
    Count(usize),
    List(Vec<f64>),
}

impl FromStr for BetaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if !s.contains(',') && !s.contains('.') {
            if let Ok(n) = s.parse::<usize>() {
                return Ok(BetaSpec::Count(n));
            }
        }
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(parse_real)
            .collect::<Result<Vec<_>>>()
            .map(BetaSpec::List)
    }
}

/// Reals, also accepting `a/b`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("`{s}` is not a number"));
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().map_err(|_| bad())? / b.trim().parse::<f64>().map_err(|_| bad())?,
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: Shape,
    pub h: f64,
    pub rtol: f64,
    pub betas: BetaSpec,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub kmax: usize,
    /// Random sources per family check.
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: Shape::Square { side: 1.0 },
            h: 1.0 / 64.0,
            rtol: 1e-10,
            betas: BetaSpec::Count(8),
            suites: Suite::ALL.to_vec(),
            seed: 1,
            output_dir: PathBuf::from("out"),
            kmax: 6,
            samples: 5,
        }
    }
}

/// Values supplied on the command line; `None` keeps the file or default.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub domain: Option<String>,
    pub h: Option<String>,
    pub rtol: Option<f64>,
    pub betas: Option<String>,
    pub beta: Vec<f64>,
    pub suites: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub kmax: Option<usize>,
    pub samples: Option<usize>,
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str| {
            v.trim().parse::<u64>().map_err(|_| Error::InvalidArgument(format!("`{v}` is not a nonnegative integer")))
        };
        match key {
            "domain" => self.domain = value.parse()?,
            "h" => self.h = parse_real(value)?,
            "rtol" => self.rtol = parse_real(value)?,
            "betas" => self.betas = value.parse()?,
            "beta" => self.betas = BetaSpec::List(vec![parse_real(value)?]),
            "suites" => self.suites = parse_suites(value)?,
            "seed" => self.seed = int(value)?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            "kmax" => self.kmax = int(value)? as usize,
            "samples" => self.samples = int(value)? as usize,
            other => return Err(Error::InvalidArgument(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Defaults, then the file, then flags.
    pub fn resolve(file: Option<&Path>, o: &Overrides) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            cfg.apply_text(&std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
            })?)?;
        }
        if let Some(v) = &o.domain {
            cfg.set("domain", v)?;
        }
        if let Some(v) = &o.h {
            cfg.set("h", v)?;
        }
        if let Some(v) = o.rtol {
            cfg.rtol = v;
        }
        if let Some(v) = &o.betas {
            cfg.set("betas", v)?;
        }
        if !o.beta.is_empty() {
            cfg.betas = BetaSpec::List(o.beta.clone());
        }
        if let Some(v) = &o.suites {
            cfg.suites = parse_suites(v)?;
        }
        if let Some(v) = o.seed {
            cfg.seed = v;
        }
        if let Some(v) = &o.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = o.kmax {
            cfg.kmax = v;
        }
        if let Some(v) = o.samples {
            cfg.samples = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.is_nan() || self.h <= 0.0 {
            return Err(Error::OutOfRange { what: "h", value: self.h, lo: 0.0, hi: f64::INFINITY });
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::OutOfRange { what: "rtol", value: self.rtol, lo: 0.0, hi: 1.0 });
        }
        if self.betas == BetaSpec::Count(0) {
            return Err(Error::InvalidArgument("beta count must be positive".into()));
        }
        Ok(())
    }

    pub fn build_domain(&self) -> Result<Arc<GridDomain>> {
        make_domain(&self.domain, self.h)
    }

    /// Sorted `β` values, checked against `[0, |D|]`.
    pub fn resolve_betas(&self, d: &GridDomain) -> Result<Vec<f64>> {
        let m = d.measure();
        let mut betas = match &self.betas {
            BetaSpec::Count(n) => (1..=*n).map(|k| m * k as f64 / *n as f64).collect(),
            BetaSpec::List(v) => v.clone(),
        };
        for &b in &betas {
            if !(0.0..=m).contains(&b) {
                return Err(Error::OutOfRange { what: "beta", value: b, lo: 0.0, hi: m });
            }
        }
        betas.sort_by(f64::total_cmp);
        betas.dedup();
        Ok(betas)
    }

    fn solver_rtol(&self) -> f64 {
        self.rtol
    }

    fn rng(&self, suite: Suite) -> Lcg64 {
        Lcg64::new(self.seed ^ suite.stream())
    }
}

/// Reports and written files of one command.
#[derive(Debug, Default)]
pub struct Outcome {
    pub reports: Vec<BoundReport>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn failures(&self) -> Vec<&BoundReport> {
        self.reports.iter().filter(|r| !r.ok()).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures().is_empty() {
            0
        } else {
            EXIT_CHECK_FAILED
        }
    }

    fn extend(&mut self, suite: Suite, reports: Vec<BoundReport>) {
        self.reports.extend(reports.into_iter().map(|r| r.with("suite", suite.to_string())));
    }

    fn file(&mut self, path: PathBuf) -> PathBuf {
        self.files.push(path.clone());
        path
    }

    fn finish(&mut self, cfg: &RunConfig) -> Result<()> {
        let p = self.file(cfg.output_dir.join("reports.jsonl"));
        io::write_reports_jsonl(&p, &self.reports)?;
        let p = self.file(cfg.output_dir.join("summary.csv"));
        io::write_summary_csv(&p, &self.reports)
    }
}

fn optimizer_options(cfg: &RunConfig) -> OptimizerOptions {
    OptimizerOptions { seed: cfg.seed, ..OptimizerOptions::with_rtol(cfg.solver_rtol()) }
}

fn curve_reports(curve: &SigmaCurve, ball: &BallModulusParams) -> Result<Vec<BoundReport>> {
    let drop = curve.points.windows(2).map(|w| w[0].sigma - w[1].sigma).fold(0.0, f64::max);
    let mut out = vec![BoundReport::new("sigma_monotone", drop, 0.0, 1e-12).with("points", curve.points.len())];
    for p in &curve.points {
        let sb = ball.radial_sigma_ball(p.beta.min(ball.measure()))?;
        out.push(
            BoundReport::new("sigma_vs_ball", p.sigma, sb, TOL_DISC * sb)
                .with("beta", p.beta)
                .with("iterations", p.iterations)
                .with("argmax_cell", p.argmax_cell),
        );
    }
    Ok(out)
}

fn constants_table(d: &GridDomain) -> Result<Vec<crate::bounds::ModulusComparison>> {
    let mut rows = Vec::new();
    let mut params = vec![BallModulusParams::for_domain(d)];
    for n in [2, 3] {
        params.push(BallModulusParams::new(n, 1.0)?);
    }
    for p in params {
        rows.extend(compare_ball_moduli(&p, 64)?);
    }
    Ok(rows)
}

fn suite_sigma(cfg: &RunConfig, d: &Arc<GridDomain>, out: &mut Outcome) -> Result<Vec<BoundReport>> {
    let betas = cfg.resolve_betas(d)?;
    let mut opt = ExtremalOptimizer::new(d, optimizer_options(cfg))?;
    let curve = opt.curve(&betas)?;
    let ball = BallModulusParams::for_domain(d);
    let mut reports = curve_reports(&curve, &ball)?;
    let p = out.file(cfg.output_dir.join("sigma_curve.csv"));
    io::write_sigma_curve_csv(&p, &curve, &ball)?;

    // Equality witnesses and random feasible sources at the computed betas.
    let usable: Vec<_> = curve.points.iter().filter(|p| p.beta >= d.cell_volume()).collect();
    for sp in &usable {
        reports.push(verify_2_7(d, &sp.weights, sp)?.with("source", "extremal"));
    }
    let mut rng = cfg.rng(Suite::Sigma);
    if !usable.is_empty() {
        let jobs: Vec<(usize, ScalarField)> = (0..cfg.samples)
            .map(|i| {
                let sp = usable[i % usable.len()];
                Ok((i % usable.len(), feasible_source(d, sp.beta, &mut rng)?))
            })
            .collect::<Result<_>>()?;
        let checked: Vec<BoundReport> = jobs
            .par_iter()
            .map(|(k, f)| verify_2_7(d, f, usable[*k]).map(|r| r.with("source", "random")))
            .collect::<Result<_>>()?;
        reports.extend(checked);
    }
    Ok(reports)
}

fn suite_ball(cfg: &RunConfig, d: &Arc<GridDomain>, out: &mut Outcome) -> Result<Vec<BoundReport>> {
    let rows = constants_table(d)?;
    let p = out.file(cfg.output_dir.join("constants_discrepancy.csv"));
    io::write_modulus_comparison_csv(&p, &rows)?;
    let mut reports = Vec::new();
    let mut groups: Vec<(usize, f64)> = rows.iter().map(|r| (r.dim, r.radius)).collect();
    groups.dedup();
    for (dim, radius) in groups {
        let sel: Vec<_> = rows.iter().filter(|r| r.dim == dim && r.radius == radius).collect();
        let worst = sel.iter().map(|r| r.radial - r.explicit).fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = sel.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        reports.push(
            BoundReport::new("explicit_dominates_radial", worst, 0.0, 0.0)
                .with("dim", dim)
                .with("radius", radius)
                .with("min_ratio", min_ratio)
                .with("samples", sel.len()),
        );
    }
    let ball = BallModulusParams::for_domain(d);
    let mut rng = cfg.rng(Suite::Ball);
    let fields: Vec<ScalarField> = (0..cfg.samples).map(|_| nonnegative_field(d, &mut rng)).collect::<Result<_>>()?;
    let rtol = cfg.solver_rtol();
    let checked: Vec<Vec<BoundReport>> = fields
        .par_iter()
        .map(|f| {
            let lhs = solve_poisson(d, f, rtol)?.u.norm_linf();
            let (l1, linf) = (f.norm_l1(), f.norm_linf());
            let explicit = ball.bound_2_10(l1, linf)?;
            let radial = ball.radial_bound(l1, linf)?;
            Ok(vec![
                BoundReport::new("explicit_bound", lhs, explicit, 0.0).with("l1", l1).with("linf", linf),
                BoundReport::new("ball_bound", lhs, radial, TOL_DISC * radial).with("l1", l1).with("linf", linf),
            ])
        })
        .collect::<Result<_>>()?;
    reports.extend(checked.into_iter().flatten());
    Ok(reports)
}

fn suite_talenti(cfg: &RunConfig, d: &Arc<GridDomain>, out: &mut Outcome) -> Result<Vec<BoundReport>> {
    let mut rng = cfg.rng(Suite::Talenti);
    let mut fields = vec![ScalarField::constant(d, 1.0)];
    for _ in 0..cfg.samples {
        fields.push(nonnegative_field(d, &mut rng)?);
    }
    let ball = ball_for(d)?;
    let p = out.file(cfg.output_dir.join("talenti_profile.csv"));
    io::write_radial_profile_csv(&p, &RadialProfile::new(&fields[fields.len() - 1], &ball)?)?;
    let rtol = cfg.solver_rtol();
    fields.par_iter().map(|f| talenti_check(d, f, rtol)).collect()
}

fn green_sources(cfg: &RunConfig, d: &GridDomain) -> Vec<usize> {
    let mut rng = cfg.rng(Suite::Green);
    let mut sources = vec![d.centermost_cell()];
    while sources.len() < 5.min(d.len()) {
        let c = rng.below(d.len());
        if !sources.contains(&c) {
            sources.push(c);
        }
    }
    sources
}

fn suite_green(cfg: &RunConfig, d: &Arc<GridDomain>, out: &mut Outcome) -> Result<Vec<BoundReport>> {
    let rtol = cfg.solver_rtol();
    let sources = green_sources(cfg, d);
    let g = crate::solver::green_column(d, sources[0], rtol)?.g.map(|x| x.max(0.0));
    let p = out.file(cfg.output_dir.join("green_profile.csv"));
    io::write_radial_profile_csv(&p, &RadialProfile::new(&g, &ball_for(d)?)?)?;
    sources.par_iter().map(|&s| green_rearrangement_check(d, s, rtol)).collect()
}

fn suite_sign(cfg: &RunConfig, d: &Arc<GridDomain>) -> Result<Vec<BoundReport>> {
    let mut rng = cfg.rng(Suite::Sign);
    let fields: Vec<ScalarField> = (0..cfg.samples).map(|_| sign_changing_field(d, &mut rng)).collect::<Result<_>>()?;
    let torsion = torsion_function(d, cfg.solver_rtol())?;
    let checked: Vec<Vec<BoundReport>> = fields
        .par_iter()
        .map(|f| {
            let mut ball = BallModulusParams::for_domain(d);
            let mut reports = vec![bound_sign_split(&mut ball, f)?];
            reports.extend(bound_shifted(d, f, &mut ball, &torsion)?.all().into_iter().cloned());
            Ok(reports)
        })
        .collect::<Result<_>>()?;
    let mut reports: Vec<BoundReport> = checked.into_iter().flatten().collect();

    // Sharp mode: the half-and-half source, plus the shifted reports for the
    // first random source.
    let mut opt = ExtremalOptimizer::new(d, optimizer_options(cfg))?;
    let cx = d.centroid()[0];
    let split = ScalarField::from_fn(d, |x| if x[0] < cx { 1.0 } else { -1.0 });
    reports.push(bound_sign_split(&mut opt, &split)?.with("source", "half_split"));
    if let Some(f) = fields.first() {
        reports.extend(bound_shifted(d, f, &mut opt, &torsion)?.all().into_iter().cloned());
    }
    Ok(reports)
}

fn suite_eigen(cfg: &RunConfig, d: &Arc<GridDomain>, out: &mut Outcome) -> Result<Vec<BoundReport>> {
    let pairs = eigenpairs(d, cfg.kmax, DEFAULT_EIGEN_EPS)?;
    let ball = BallModulusParams::for_domain(d);
    let checks: Vec<BoundReport> = pairs.iter().map(|ep| eigen_bound_check(&ball, ep)).collect();
    let p = out.file(cfg.output_dir.join("eigen_report.csv"));
    io::write_eigen_report_csv(&p, &pairs, &checks)?;
    let mut reports = checks;
    for ep in &pairs {
        reports.push(eigen_raw_bound_check(ep, d)?);
        reports.push(
            BoundReport::new(format!("eigen_residual_k{}", ep.k), ep.residual, DEFAULT_EIGEN_EPS, 0.0)
                .with("lambda", ep.lambda),
        );
    }
    Ok(reports)
}

fn run_suites(cfg: &RunConfig, suites: &[Suite]) -> Result<Outcome> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut out = Outcome::default();
    let selected: BTreeSet<Suite> = suites.iter().copied().collect();
    if selected.is_empty() {
        out.finish(cfg)?;
        return Ok(out);
    }
    let d = cfg.build_domain()?;
    if selected.contains(&Suite::Sigma) {
        // Range errors in the betas are configuration errors, so check them first.
        cfg.resolve_betas(&d)?;
    }
    for suite in selected {
        let reports = match suite {
            Suite::Sigma => suite_sigma(cfg, &d, &mut out)?,
            Suite::Ball => suite_ball(cfg, &d, &mut out)?,
            Suite::Talenti => suite_talenti(cfg, &d, &mut out)?,
            Suite::Green => suite_green(cfg, &d, &mut out)?,
            Suite::Sign => suite_sign(cfg, &d)?,
            Suite::Eigen => suite_eigen(cfg, &d, &mut out)?,
        };
        out.extend(suite, reports);
    }
    out.finish(cfg)?;
    Ok(out)
}

/// Sigma curve with CSV/JSON output and heatmaps of `f̂` and `û` at each `β`.
pub fn cmd_sigma(cfg: &RunConfig) -> Result<Outcome> {
    let d = cfg.build_domain()?;
    let betas = cfg.resolve_betas(&d)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut out = Outcome::default();
    let mut points = vec![0.0];
    points.extend(betas.iter().copied().filter(|&b| b > 0.0));
    let mut opt = ExtremalOptimizer::new(&d, optimizer_options(cfg))?;
    let curve = opt.curve(&points)?;
    let ball = BallModulusParams::for_domain(&d);
    let p = out.file(cfg.output_dir.join("sigma_curve.csv"));
    io::write_sigma_curve_csv(&p, &curve, &ball)?;
    let p = out.file(cfg.output_dir.join("sigma_curve.json"));
    io::write_json(&p, &curve)?;
    for (i, sp) in curve.points.iter().enumerate() {
        let p = out.file(cfg.output_dir.join(format!("f_hat_{i:02}.pgm")));
        io::write_pgm(&p, &sp.weights)?;
        let p = out.file(cfg.output_dir.join(format!("u_hat_{i:02}.pgm")));
        io::write_pgm(&p, &sp.solution)?;
    }
    let p = out.file(cfg.output_dir.join("constants_discrepancy.csv"));
    io::write_modulus_comparison_csv(&p, &constants_table(&d)?)?;
    let reports = curve_reports(&curve, &ball)?;
    out.extend(Suite::Sigma, reports);
    out.finish(cfg)?;
    Ok(out)
}

/// Selected verification suites; exit status 4 if any gating check fails.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    run_suites(cfg, &cfg.suites)
}

pub fn cmd_eigen(cfg: &RunConfig) -> Result<Outcome> {
    run_suites(cfg, &[Suite::Eigen])
}

pub fn cmd_green(cfg: &RunConfig) -> Result<Outcome> {
    run_suites(cfg, &[Suite::Green])
}

pub fn cmd_talenti(cfg: &RunConfig) -> Result<Outcome> {
    run_suites(cfg, &[Suite::Talenti])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let cfg = RunConfig::parse_file_text("# run\ndomain = disk:1\nh = 1/32\nbetas = 0.5, 1.0\nsuites = talenti,eigen\nseed = 9\n")
            .unwrap();
        assert_eq!(cfg.domain, Shape::Disk { radius: 1.0 });
        assert_eq!(cfg.h, 1.0 / 32.0);
        assert_eq!(cfg.betas, BetaSpec::List(vec![0.5, 1.0]));
        assert_eq!(cfg.suites, vec![Suite::Talenti, Suite::Eigen]);
        assert_eq!(cfg.seed, 9);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "domain = disk:1\nh = 0.05\nkmax = 3\n").unwrap();
        let o = Overrides { h: Some("0.1".into()), seed: Some(4), ..Default::default() };
        let cfg = RunConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!((cfg.h, cfg.seed, cfg.kmax), (0.1, 4, 3));
        assert!(RunConfig::parse_file_text("colour = red").is_err());
        assert!(RunConfig::parse_file_text("h").is_err());
    }

    #[test]
    fn beta_specs() {
        assert_eq!("8".parse::<BetaSpec>().unwrap(), BetaSpec::Count(8));
        assert_eq!("0.25".parse::<BetaSpec>().unwrap(), BetaSpec::List(vec![0.25]));
        assert_eq!("1/4, 1/2".parse::<BetaSpec>().unwrap(), BetaSpec::List(vec![0.25, 0.5]));
        let cfg = RunConfig { betas: BetaSpec::Count(4), ..Default::default() };
        let d = cfg.build_domain().unwrap();
        assert_eq!(cfg.resolve_betas(&d).unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        let bad = RunConfig { betas: BetaSpec::List(vec![2.0]), ..Default::default() };
        assert!(matches!(bad.resolve_betas(&d), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NotConverged { iterations: 1, residual: 1.0 }), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::InvalidShape("x".into())), EXIT_CONFIG);
        let empty = Outcome::default();
        assert_eq!(empty.exit_code(), 0);
    }
}
