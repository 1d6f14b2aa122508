//! File formats and subcommands behind the `kts` binary.
//!
//! Problems and reports are single JSON documents. Floats are written in
//! shortest round-trip form, so reading a file back yields bit-identical
//! values.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use kts::intersect::{lift, reduce, Line3, Surface3};
use kts::linalg::{dist_inf, norm_inf, Point2};
use kts::verify::{
    conditioning_zeros, estimate_condition, fixture_illconditioned, fixture_nearest_zero, random_poly,
    random_system,
};
use kts::{BasisKind, Error as SolveError, Patch, SolveConfig, SolveResult, SolveStats, TensorPoly};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

/// Samples per family used for the conditioning lower bound.
const COND_SAMPLES: usize = 2000;

pub const EXIT_COMPLETE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "system2d")]
    System2d,
    #[serde(rename = "surface_line")]
    SurfaceLine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub p: [f64; 3],
    pub d: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_patch_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_patches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_step_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duplicate_tol: Option<f64>,
}

impl ConfigOverrides {
    fn apply(&self, mut c: SolveConfig) -> SolveConfig {
        if let Some(x) = self.min_patch_width {
            c.min_patch_width = x;
        }
        if let Some(x) = self.max_patches {
            c.max_patches = x;
        }
        if let Some(x) = self.newton_step_tol {
            c.newton_step_tol = x;
        }
        if let Some(x) = self.newton_max_iter {
            c.newton_max_iter = x;
        }
        if let Some(x) = self.zero_residual_tol {
            c.zero_residual_tol = x;
        }
        if let Some(x) = self.duplicate_tol {
            c.duplicate_tol = x;
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: Mode,
    pub basis: String,
    pub degrees: [usize; 2],
    /// `coefficients[i][j]` is the coefficient vector of `φ_i(u)φ_j(v)`.
    pub coefficients: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<LineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigOverrides>,
    /// Free-form expected values, carried along but never interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<serde_json::Value>,
}

impl ProblemFile {
    pub fn from_poly(name: Option<String>, poly: &TensorPoly, line: Option<LineSpec>) -> Self {
        let (m, n) = poly.degrees();
        let coefficients = (0..=m)
            .map(|i| (0..=n).map(|j| poly.coeff(i, j).to_vec()).collect())
            .collect();
        ProblemFile {
            schema_version: SCHEMA_VERSION.into(),
            name,
            mode: if line.is_some() { Mode::SurfaceLine } else { Mode::System2d },
            basis: poly.basis().name().into(),
            degrees: [m, n],
            coefficients,
            line,
            config: None,
            reference: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let problem: ProblemFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        problem.validate().with_context(|| format!("validating {}", path.display()))?;
        Ok(problem)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    fn dim(&self) -> usize {
        match self.mode {
            Mode::System2d => 2,
            Mode::SurfaceLine => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "schema_version: expected \"{SCHEMA_VERSION}\", found \"{}\"",
            self.schema_version
        );
        self.basis.parse::<BasisKind>().context("basis")?;
        let [m, n] = self.degrees;
        if self.mode == Mode::SurfaceLine {
            ensure!(m >= 1 && n >= 1, "degrees: a surface needs degree at least 1 in each direction");
        }
        ensure!(
            self.coefficients.len() == m + 1,
            "coefficients: expected {} rows for degree {m}, found {}",
            m + 1,
            self.coefficients.len()
        );
        let dim = self.dim();
        for (i, row) in self.coefficients.iter().enumerate() {
            ensure!(
                row.len() == n + 1,
                "coefficients[{i}]: expected {} entries for degree {n}, found {}",
                n + 1,
                row.len()
            );
            for (j, c) in row.iter().enumerate() {
                ensure!(c.len() == dim, "coefficients[{i}][{j}]: expected {dim} components, found {}", c.len());
                ensure!(c.iter().all(|x| x.is_finite()), "coefficients[{i}][{j}]: values must be finite");
            }
        }
        match (self.mode, &self.line) {
            (Mode::System2d, Some(_)) => bail!("line: only allowed in surface_line mode"),
            (Mode::SurfaceLine, None) => bail!("line: required in surface_line mode"),
            _ => {}
        }
        Ok(())
    }

    pub fn poly(&self) -> Result<TensorPoly> {
        let basis: BasisKind = self.basis.parse()?;
        Ok(TensorPoly::from_grid(basis, &self.coefficients)?)
    }

    pub fn solve_config(&self) -> SolveConfig {
        self.config.clone().unwrap_or_default().apply(SolveConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroRecord {
    pub uv: [f64; 2],
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionRecord {
    pub uv: [f64; 2],
    pub t: f64,
    pub point: [f64; 3],
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsRecord {
    pub patches_examined: usize,
    pub smallest_width: f64,
    pub max_newton_iterations: usize,
}

impl From<SolveStats> for StatsRecord {
    fn from(s: SolveStats) -> Self {
        StatsRecord {
            patches_examined: s.patches_examined,
            smallest_width: s.smallest_width,
            max_newton_iterations: s.max_newton_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchRecord {
    pub center: [f64; 2],
    pub radius: f64,
}

impl From<&Patch> for PatchRecord {
    fn from(p: &Patch) -> Self {
        PatchRecord { center: p.center, radius: p.radius }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub elapsed_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<ZeroRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersections: Option<Vec<IntersectionRecord>>,
    pub stats: StatsRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_lb: Option<f64>,
    pub unresolved: Vec<PatchRecord>,
    /// Every patch was excluded or covered by a safe region.
    pub complete: bool,
    pub budget_exhausted: bool,
    pub timing: Timing,
}

impl ReportFile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.complete {
            EXIT_COMPLETE
        } else {
            EXIT_INCOMPLETE
        }
    }

    /// Found points in parameter space.
    pub fn points(&self) -> Vec<Point2> {
        match (&self.zeros, &self.intersections) {
            (Some(z), _) => z.iter().map(|r| r.uv).collect(),
            (None, Some(x)) => x.iter().map(|r| r.uv).collect(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunFlags {
    pub min_width: Option<f64>,
    pub max_patches: Option<usize>,
    /// Restrict intersections to `t ≥ 0`.
    pub ray: bool,
    /// Compute the conditioning lower bound.
    pub cond: bool,
}

/// Runs the solver, keeping the partial result when the patch budget runs out.
fn run_solver(f: &TensorPoly, config: &SolveConfig) -> Result<(SolveResult, bool)> {
    match kts::solve(f, config) {
        Ok(r) => Ok((r, false)),
        Err(SolveError::BudgetExhausted { partial, .. }) => Ok((*partial, true)),
        Err(e) => Err(e.into()),
    }
}

fn condition_lb(f: &TensorPoly) -> Result<f64> {
    let zeros = conditioning_zeros(f)?;
    Ok(estimate_condition(f, &zeros, COND_SAMPLES)?.cond_lb)
}

/// Solves a problem of either mode and builds its report.
pub fn run(problem: &ProblemFile, flags: &RunFlags) -> Result<ReportFile> {
    problem.validate()?;
    let mut config = problem.solve_config();
    if let Some(w) = flags.min_width {
        config.min_patch_width = w;
    }
    if let Some(n) = flags.max_patches {
        config.max_patches = n;
    }
    let poly = problem.poly()?;
    let start = Instant::now();

    let (system, surface_line) = match (&problem.mode, &problem.line) {
        (Mode::SurfaceLine, Some(l)) => {
            let surface = Surface3::new(poly)?;
            let line = Line3::new(l.p, l.d)?;
            (reduce(&surface, &line)?, Some((surface, line)))
        }
        _ => (poly, None),
    };
    let (result, budget_exhausted) = run_solver(&system, &config)?;
    let (zeros, intersections) = match &surface_line {
        None => {
            let z = result
                .zeros
                .iter()
                .map(|&uv| ZeroRecord { uv, residual: norm_inf(&system.evaluate2(uv)) })
                .collect();
            (Some(z), None)
        }
        Some((surface, line)) => {
            let x = lift(surface, line, &result.zeros)?
                .into_iter()
                .filter(|x| !flags.ray || x.t >= 0.0)
                .map(|x| IntersectionRecord { uv: x.uv, t: x.t, point: x.point, residual: x.residual })
                .collect();
            (None, Some(x))
        }
    };
    let cond_lb = if flags.cond { Some(condition_lb(&system)?) } else { None };
    let elapsed = start.elapsed().as_secs_f64();
    info!(
        "{} patches examined, {} zeros, {} unresolved",
        result.stats.patches_examined,
        result.zeros.len(),
        result.unresolved.len()
    );
    Ok(ReportFile {
        schema_version: SCHEMA_VERSION.into(),
        name: problem.name.clone(),
        mode: problem.mode,
        zeros,
        intersections,
        stats: result.stats.into(),
        cond_lb,
        unresolved: result.unresolved.iter().map(PatchRecord::from).collect(),
        complete: result.is_complete(),
        budget_exhausted,
        timing: Timing { elapsed_seconds: elapsed },
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_mode(input: &Path, out: Option<&Path>, flags: &RunFlags, mode: Mode) -> Result<i32> {
    let problem = ProblemFile::load(input)?;
    if problem.mode != mode {
        let want = match mode {
            Mode::System2d => "system2d",
            Mode::SurfaceLine => "surface_line",
        };
        bail!("mode: this command needs a {want} problem");
    }
    let report = run(&problem, flags)?;
    emit(&report.to_json(), out)?;
    Ok(report.exit_code())
}

/// `solve`: returns the exit code after writing the report.
pub fn cmd_solve(input: &Path, out: Option<&Path>, flags: &RunFlags) -> Result<i32> {
    run_mode(input, out, flags, Mode::System2d)
}

/// `intersect`: returns the exit code after writing the report.
pub fn cmd_intersect(input: &Path, out: Option<&Path>, flags: &RunFlags) -> Result<i32> {
    run_mode(input, out, flags, Mode::SurfaceLine)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub status: String,
    pub cond_lb: Option<f64>,
    pub num_zeros: Option<usize>,
    pub min_zero_distance: Option<f64>,
    pub patches_examined: Option<usize>,
    pub smallest_width: Option<f64>,
    pub max_newton_iterations: Option<usize>,
}

impl BenchRow {
    fn failed(name: String, status: &str) -> Self {
        BenchRow {
            name,
            status: status.into(),
            cond_lb: None,
            num_zeros: None,
            min_zero_distance: None,
            patches_examined: None,
            smallest_width: None,
            max_newton_iterations: None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.status != "error"
    }
}

fn min_pairwise(points: &[Point2]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = dist_inf(*a, *b);
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    }
    best
}

fn bench_one(path: &Path) -> BenchRow {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let problem = match ProblemFile::load(path) {
        Ok(p) => p,
        Err(e) => {
            log::warn!("{e:#}");
            return BenchRow::failed(stem, "error");
        }
    };
    let name = problem.name.clone().unwrap_or(stem);
    match run(&problem, &RunFlags { cond: true, ..RunFlags::default() }) {
        Ok(report) => {
            let points = report.points();
            let status = if report.budget_exhausted {
                "budget_exhausted"
            } else if report.complete {
                "complete"
            } else {
                "unresolved"
            };
            BenchRow {
                name,
                status: status.into(),
                cond_lb: report.cond_lb,
                num_zeros: Some(points.len()),
                min_zero_distance: min_pairwise(&points),
                patches_examined: Some(report.stats.patches_examined),
                smallest_width: Some(report.stats.smallest_width),
                max_newton_iterations: Some(report.stats.max_newton_iterations),
            }
        }
        Err(e) => {
            log::warn!("{name}: {e:#}");
            BenchRow::failed(name, "error")
        }
    }
}

/// Runs every `*.json` problem in `dir`; rows are sorted by name.
pub fn bench_rows(dir: &Path) -> Result<Vec<BenchRow>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    ensure!(!files.is_empty(), "{}: no problem files", dir.display());
    let mut rows: Vec<BenchRow> = files.iter().map(|p| bench_one(p)).collect();
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(rows)
}

/// `bench`: exit 0 when at least one row succeeded.
pub fn cmd_bench(dir: &Path, csv_out: Option<&Path>) -> Result<i32> {
    let rows = bench_rows(dir)?;
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
    emit(&String::from_utf8(bytes)?, csv_out)?;
    Ok(if rows.iter().any(BenchRow::succeeded) { EXIT_COMPLETE } else { EXIT_ERROR })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    Illconditioned,
    NearestZero,
    Random,
}

impl std::str::FromStr for FixtureKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "illconditioned" => FixtureKind::Illconditioned,
            "nearest_zero" => FixtureKind::NearestZero,
            "random" => FixtureKind::Random,
            other => bail!("unknown fixture kind `{other}` (illconditioned, nearest_zero, random)"),
        })
    }
}

#[derive(Clone, Debug)]
pub struct FixtureParams {
    pub seed: u64,
    pub eps: f64,
    pub u0: f64,
    /// Recorded for reference only; it does not enter the system.
    pub v0: Option<f64>,
    pub degrees: [usize; 2],
    pub basis: BasisKind,
    pub omega: f64,
    pub x_star: [f64; 2],
    pub alpha: [f64; 4],
    /// Random surface / line problem instead of a 2-system.
    pub surface: bool,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            seed: 0,
            eps: 0.1,
            u0: 0.5,
            v0: None,
            degrees: [2, 2],
            basis: BasisKind::Bernstein,
            omega: 20.0,
            x_star: [0.5, 0.5],
            // Jacobian of (u³ − 2.2u² + 1.55u − .35, v² − .7v + .1) at (.5, .5).
            alpha: [0.1, 0.0, 0.0, 0.3],
            surface: false,
        }
    }
}

pub fn make_fixture(kind: FixtureKind, p: &FixtureParams) -> Result<ProblemFile> {
    let problem = match kind {
        FixtureKind::Illconditioned => {
            let f = fixture_illconditioned(p.u0, p.eps)?;
            let mut file = ProblemFile::from_poly(Some(format!("illconditioned_e{}", p.eps)), &f, None);
            let mut meta = serde_json::json!({ "u0": p.u0, "eps": p.eps, "num_zeros": 0 });
            if let Some(v0) = p.v0 {
                meta["v0"] = v0.into();
            }
            file.reference = Some(meta);
            file
        }
        FixtureKind::NearestZero => {
            let [a1, a2, a3, a4] = p.alpha;
            let f = fixture_nearest_zero(p.x_star, [[a1, a2], [a3, a4]], p.omega)?;
            let mut file = ProblemFile::from_poly(Some(format!("nearest_zero_w{}", p.omega)), &f, None);
            file.reference = Some(serde_json::json!({
                "x_star": p.x_star,
                "omega": p.omega,
                "zero_distance": 2.0 / p.omega,
            }));
            file
        }
        FixtureKind::Random => {
            let [m, n] = p.degrees;
            ensure!(m <= 15 && n <= 15, "degrees: at most 15 per direction");
            if p.surface {
                ensure!(m >= 1 && n >= 1, "degrees: a surface needs degree at least 1");
                let poly = random_poly(p.basis, m, n, 3, p.seed);
                let surface = Surface3::new(poly.clone())?;
                // A line through a surface point, so at least one crossing exists.
                let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed);
                let uv = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
                let d: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
                let t0: f64 = rng.random_range(-1.0..1.0);
                let s = surface.evaluate(uv);
                let line = LineSpec { p: [s[0] - t0 * d[0], s[1] - t0 * d[1], s[2] - t0 * d[2]], d };
                ProblemFile::from_poly(Some(format!("random_surface_s{}", p.seed)), &poly, Some(line))
            } else {
                let f = random_system(p.basis, m, n, p.seed);
                ProblemFile::from_poly(Some(format!("random_{}_s{}", p.basis.name(), p.seed)), &f, None)
            }
        }
    };
    Ok(problem)
}

/// `fixtures`: writes the problem file.
pub fn cmd_fixtures(kind: FixtureKind, params: &FixtureParams, out: Option<&Path>) -> Result<i32> {
    emit(&make_fixture(kind, params)?.to_json(), out)?;
    Ok(EXIT_COMPLETE)
}

/// `KTS_LOG` value to a log level; unset or unknown values keep warnings.
pub fn log_level(value: Option<&str>) -> log::LevelFilter {
    match value.map(str::trim) {
        Some("quiet") => log::LevelFilter::Off,
        Some("info") => log::LevelFilter::Info,
        Some("debug") => log::LevelFilter::Debug,
        Some("trace") => log::LevelFilter::Trace,
        _ => log::LevelFilter::Warn,
    }
}
