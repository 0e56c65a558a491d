//! Command-line front end: configuration resolution and subcommand dispatch.
//!
//! Precedence is flags > `--config` JSON file > built-in defaults. Exit codes:
//! `0` all checks passed, `1` a check or computation failed, `2` invalid
//! configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::exec::Exec;
use crate::group::{GroupWord, HalfPlanePoint};
use crate::operators::{carleman_scan_with, IndexWindow};
use crate::orbit::{OrbitSampler, OrbitSamples, TailPolicy};
use crate::params::{
    a_sequence, a_sequence_exact, c_coeff, rational_from_f64, series_from_curvature, SeriesKind,
    SeriesParam,
};
use crate::report::Report;
use crate::spherical::compare_spherical;
use crate::suites::{area_suite, run_suite_lenient, SuiteContext, Tolerances};
use crate::svg::{line_plot, Series};
use crate::verify::{gauss_curvature_fd, CURVATURE_STEP};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const DEFAULT_TRUNC: usize = 256;
const MIN_TRUNC: usize = 16;

#[derive(Parser, Debug)]
#[command(
    name = "orbitforge",
    version,
    about = "Constant-curvature minimal surfaces as PSL(2,R) orbits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Print the A_k and c_k sequences.
    Constants,
    /// Bracket and Casimir residuals of the truncated generators.
    Operators,
    /// Carleman partial sums and the Jacobi gauge check.
    Carleman,
    /// Sample the orbit map on a grid or at a group word.
    Orbit,
    /// Frame-flow cross-validation and Gram pairings.
    Flow,
    /// Spherical-function comparison along a geodesic.
    Spherical,
    /// Run one verification suite (or all) and report.
    Verify,
    /// Area rigidity constants for a closed surface of the given genus.
    Area,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesArg {
    Principal,
    Complementary,
}

impl From<SeriesArg> for SeriesKind {
    fn from(a: SeriesArg) -> Self {
        match a {
            SeriesArg::Principal => SeriesKind::Principal,
            SeriesArg::Complementary => SeriesKind::Complementary,
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct Options {
    /// Target curvature K < 0 (exclusive with --series/--value).
    #[arg(long, global = true, allow_hyphen_values = true, conflicts_with_all = ["series", "value"])]
    pub curvature: Option<f64>,
    /// Representation series (with --value).
    #[arg(long, global = true, value_enum, requires = "value")]
    pub series: Option<SeriesArg>,
    /// tau for the principal series, sigma for the complementary series.
    #[arg(long, global = true, allow_hyphen_values = true, requires = "series")]
    pub value: Option<f64>,
    /// Truncation half-width N of the index window {-N..N}.
    #[arg(long, global = true)]
    pub trunc: Option<usize>,
    /// Rows excluded at each window edge when scanning residuals (default 2).
    #[arg(long, global = true)]
    pub margin: Option<usize>,
    /// Tail buffer width; defaults to ceil(N/8).
    #[arg(long, global = true)]
    pub buffer: Option<usize>,
    /// Tail-mass threshold above which sampling is refused (default 1e-10).
    #[arg(long, global = true)]
    pub tail_eps: Option<f64>,
    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_tolerance)]
    pub tolerances: Vec<(String, f64)>,
    /// Verification suite for `verify`, or `all`.
    #[arg(long, global = true)]
    pub suite: Option<String>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each subcommand accepts a subset.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Final time for flow and spherical runs.
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Integration or sampling steps for flow and spherical runs.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Genus of the closed surface for `area` (default 2).
    #[arg(long, global = true)]
    pub genus: Option<u32>,
    /// Largest Carleman partial-sum index (default 1e6).
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Largest ladder index for `constants` and Gram pairings (default 8).
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Group word as JSON, e.g. `[{"basis":[1,0,0],"t":0.5}]`.
    #[arg(long, global = true, conflicts_with = "points")]
    pub word: Option<String>,
    /// Sample points `x,y;x,y;...` in the upper half-plane.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// JSON configuration file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Force the sequential execution path.
    #[arg(long, global = true)]
    pub sequential: bool,
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesEntry {
    kind: SeriesKind,
    value: f64,
}

/// On-disk configuration; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    curvature: Option<f64>,
    series: Option<SeriesEntry>,
    trunc: Option<usize>,
    margin: Option<usize>,
    buffer: Option<usize>,
    tail_eps: Option<f64>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    suite: Option<String>,
    out: Option<PathBuf>,
    format: Option<Format>,
    t_max: Option<f64>,
    steps: Option<usize>,
    genus: Option<u32>,
    nmax: Option<usize>,
    kmax: Option<usize>,
    word: Option<GroupWord>,
    points: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamChoice {
    Curvature(f64),
    Series(SeriesParam),
}

impl ParamChoice {
    pub fn series(&self) -> Result<SeriesParam> {
        match *self {
            ParamChoice::Curvature(k) => series_from_curvature(k),
            ParamChoice::Series(s) => Ok(s),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub param: Option<ParamChoice>,
    pub trunc: usize,
    pub margin: usize,
    pub buffer: Option<usize>,
    pub tail_eps: f64,
    pub tolerances: Tolerances,
    pub suite: String,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub genus: u32,
    pub nmax: usize,
    pub kmax: Option<usize>,
    pub word: Option<GroupWord>,
    pub points: Option<Vec<HalfPlanePoint>>,
    pub exec: Exec,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn resolve(opts: &Options) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };

        if file.curvature.is_some() && file.series.is_some() {
            return Err(config_err(
                "config file sets both curvature and series; choose one",
            ));
        }
        let param = if let Some(k) = opts.curvature {
            Some(ParamChoice::Curvature(k))
        } else if let (Some(kind), Some(v)) = (opts.series, opts.value) {
            Some(ParamChoice::Series(SeriesParam::new(kind.into(), v)?))
        } else if let Some(k) = file.curvature {
            Some(ParamChoice::Curvature(k))
        } else if let Some(e) = file.series {
            Some(ParamChoice::Series(SeriesParam::new(e.kind, e.value)?))
        } else {
            None
        };
        if let Some(ParamChoice::Curvature(k)) = param {
            series_from_curvature(k)?;
        }

        let trunc = opts.trunc.or(file.trunc).unwrap_or(DEFAULT_TRUNC);
        if trunc < MIN_TRUNC {
            return Err(config_err(format!(
                "--trunc must be at least {MIN_TRUNC}, got {trunc}"
            )));
        }
        let margin = opts.margin.or(file.margin).unwrap_or(2);
        let tail_eps = opts
            .tail_eps
            .or(file.tail_eps)
            .unwrap_or(TailPolicy::DEFAULT_EPS);
        if !(tail_eps > 0.0) {
            return Err(config_err(format!(
                "tail-eps must be positive, got {tail_eps}"
            )));
        }
        let buffer = opts.buffer.or(file.buffer);
        if let Some(b) = buffer {
            if b == 0 || b >= trunc {
                return Err(config_err(format!(
                    "buffer must lie in 1..{trunc}, got {b}"
                )));
            }
        }

        let mut tolerances = Tolerances::default();
        for (k, v) in &file.tolerances {
            tolerances.set(k, *v)?;
        }
        for (k, v) in &opts.tolerances {
            tolerances.set(k, *v)?;
        }

        let t_max = opts.t_max.or(file.t_max);
        if let Some(t) = t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(config_err(format!("t-max must be positive, got {t}")));
            }
        }
        let steps = opts.steps.or(file.steps);
        if steps == Some(0) {
            return Err(config_err("steps must be at least 1"));
        }
        let genus = opts.genus.or(file.genus).unwrap_or(2);
        if genus < 2 {
            return Err(config_err(format!("genus must be at least 2, got {genus}")));
        }
        let nmax = opts.nmax.or(file.nmax).unwrap_or(1_000_000);
        if nmax < 2 {
            return Err(config_err("nmax must be at least 2"));
        }

        let word = match &opts.word {
            Some(text) => {
                Some(serde_json::from_str(text).map_err(|e| config_err(format!("--word: {e}")))?)
            }
            None => file.word,
        };
        let points = match &opts.points {
            Some(text) => Some(parse_points(text)?),
            None => file
                .points
                .map(|v| {
                    v.iter()
                        .map(|&[x, y]| HalfPlanePoint::new(x, y))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()
                .map_err(|e| config_err(format!("points: {e}")))?,
        };

        Ok(Self {
            param,
            trunc,
            margin,
            buffer,
            tail_eps,
            tolerances,
            suite: opts
                .suite
                .clone()
                .or(file.suite)
                .unwrap_or_else(|| "all".into()),
            out: opts.out.clone().or(file.out),
            format: opts.format.or(file.format),
            t_max,
            steps,
            genus,
            nmax,
            kmax: opts.kmax.or(file.kmax),
            word,
            points,
            exec: if opts.sequential {
                Exec::Sequential
            } else {
                Exec::default()
            },
        })
    }

    fn series(&self) -> Result<SeriesParam> {
        self.param
            .ok_or_else(|| config_err("one of --curvature or --series/--value is required"))?
            .series()
    }

    fn window(&self) -> Result<IndexWindow> {
        IndexWindow::new(self.trunc, self.margin)
    }

    fn tail(&self, window: &IndexWindow) -> TailPolicy {
        TailPolicy {
            buffer: self.buffer.unwrap_or(TailPolicy::for_window(window).buffer),
            eps: self.tail_eps,
        }
    }

    fn context(&self) -> Result<SuiteContext> {
        let window = self.window()?;
        let mut ctx = SuiteContext::new(self.series()?, window);
        ctx.tail = self.tail(&window);
        ctx.tolerances = self.tolerances.clone();
        if let Some(t) = self.t_max {
            ctx.t_max_flow = t;
            ctx.t_max_spherical = t;
        }
        if let Some(n) = self.steps {
            ctx.flow_steps = n;
            ctx.spherical_steps = n;
        }
        ctx.nmax = self.nmax;
        ctx.genus = self.genus;
        if let Some(k) = self.kmax {
            ctx.kmax = k;
        }
        ctx.exec = self.exec;
        Ok(ctx)
    }

    fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(config_err(format!(
                "format {f:?} is not supported here; choose from {allowed:?}"
            )))
        }
    }
}

fn parse_points(text: &str) -> Result<Vec<HalfPlanePoint>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (x, y) = pair
                .split_once(',')
                .ok_or_else(|| config_err(format!("point {pair:?} is not x,y")))?;
            let x: f64 = x
                .trim()
                .parse()
                .map_err(|e| config_err(format!("point {pair:?}: {e}")))?;
            let y: f64 = y
                .trim()
                .parse()
                .map_err(|e| config_err(format!("point {pair:?}: {e}")))?;
            HalfPlanePoint::new(x, y).map_err(|e| config_err(e.to_string()))
        })
        .collect()
}

/// Output of a subcommand: payload plus whether every check passed.
struct Outcome {
    body: String,
    report: Option<Report>,
    ok: bool,
}

impl Outcome {
    fn data(body: String) -> Self {
        Self {
            body,
            report: None,
            ok: true,
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_CONFIG,
            };
        }
    };
    let cfg = match RunConfig::resolve(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli.command, &cfg) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome.body, cfg.out.as_deref()) {
                eprintln!("error: {e}");
                return EXIT_FAIL;
            }
            if let Some(report) = &outcome.report {
                for c in report.failures() {
                    eprintln!(
                        "FAIL {}: {} (value {:e}, expected {:e}, tolerance {:e})",
                        c.name, c.anchor, c.value, c.expected, c.tolerance
                    );
                }
            }
            if outcome.ok {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e @ (Error::Config(_) | Error::InvalidSeries(_) | Error::NonNegativeCurvature(_))) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

fn emit(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Constants => constants(cfg),
        Command::Operators => report_command(cfg, "operators"),
        Command::Carleman => carleman(cfg),
        Command::Orbit => orbit(cfg),
        Command::Flow => {
            let ctx = cfg.context()?;
            let mut report = run_suite_lenient("flow", &ctx)?;
            report.extend(run_suite_lenient("gram", &ctx)?);
            report.suite = "flow".into();
            render_report(cfg, report)
        }
        Command::Spherical => spherical(cfg),
        Command::Verify => verify(cfg),
        Command::Area => area(cfg),
    }
}

fn report_command(cfg: &RunConfig, suite: &str) -> Result<Outcome> {
    let ctx = cfg.context()?;
    render_report(cfg, run_suite_lenient(suite, &ctx)?)
}

fn render_report(cfg: &RunConfig, report: Report) -> Result<Outcome> {
    let body = match cfg.format_or(Format::Json, &[Format::Json, Format::Csv])? {
        Format::Csv => report.to_csv(),
        _ => report.to_json(),
    };
    Ok(Outcome {
        body,
        ok: report.passed(),
        report: Some(report),
    })
}

fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let s = cfg.series()?;
    let k = s.curvature();
    let kmax = cfg.kmax.unwrap_or(8);
    let seq = a_sequence(k, kmax)?;
    let c = |p: usize| if p >= 2 { Some(c_coeff(k, p)) } else { None };
    match cfg.format_or(Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Csv => {
            let mut out = String::from("k,A_k,c_k\n");
            for (i, a) in seq.a_seq.iter().enumerate() {
                let ck = c(i).map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!("{i},{a},{ck}\n"));
            }
            Ok(Outcome::data(out))
        }
        _ => {
            let exact = rational_from_f64(k).map(|q| {
                a_sequence_exact(&q, kmax)
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
            });
            let v = json!({
                "s": s,
                "lambda": s.lambda(),
                "conformal_factor": s.conformal_factor(),
                "curvature": k,
                "A": seq.a_seq,
                "A_exact": exact,
                "c": (0..=kmax).map(c).collect::<Vec<_>>(),
            });
            Ok(Outcome::data(serde_json::to_string_pretty(&v)? + "\n"))
        }
    }
}

fn carleman(cfg: &RunConfig) -> Result<Outcome> {
    let k = cfg.series()?.curvature();
    let scan = carleman_scan_with(k, cfg.nmax, cfg.exec)?;
    let ok = scan.gauge.all_positive;
    let body = match cfg.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
        Format::Csv => scan.to_csv(),
        Format::Svg => carleman_svg(&scan),
        _ => serde_json::to_string_pretty(&scan)? + "\n",
    };
    Ok(Outcome {
        body,
        report: None,
        ok,
    })
}

fn carleman_svg(scan: &crate::operators::CarlemanScan) -> String {
    let pts = scan
        .rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.ratio))
        .collect();
    line_plot(
        &format!("Carleman ratio, K = {}", scan.curvature),
        "ln N",
        "S(N) / ((2/sqrt|K|) ln N)",
        &[
            Series::line("ratio", pts),
            Series::line(
                "limit",
                vec![
                    ((scan.rows[0].n as f64).ln(), 1.0),
                    ((scan.last().n as f64).ln(), 1.0),
                ],
            ),
        ],
    )
}

fn default_grid() -> Vec<HalfPlanePoint> {
    let mut g = Vec::with_capacity(9);
    for y in [0.5, 1.0, 2.0] {
        for x in [-0.5, 0.0, 0.5] {
            g.push(HalfPlanePoint { x, y });
        }
    }
    g
}

fn orbit(cfg: &RunConfig) -> Result<Outcome> {
    let s = cfg.series()?;
    let window = cfg.window()?;
    let sampler = OrbitSampler::new(s, window)?
        .with_tail(cfg.tail(&window))
        .with_exec(cfg.exec);
    let (grid, vectors) = match &cfg.word {
        Some(word) => (vec![word.apply_to_i()?], vec![sampler.orbit_point(word)?]),
        None => {
            let grid = cfg.points.clone().unwrap_or_else(default_grid);
            let v = sampler.grid(&grid)?;
            (grid, v)
        }
    };
    let samples = OrbitSamples::new(s, &grid, &vectors);
    let body = match cfg.format_or(Format::Json, &[Format::Json, Format::Csv])? {
        Format::Csv => samples.to_csv(),
        _ => serde_json::to_string_pretty(&samples)? + "\n",
    };
    Ok(Outcome::data(body))
}

fn spherical(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = cfg.context()?;
    let sampler = ctx.sampler()?;
    let cmp = compare_spherical(&sampler, ctx.t_max_spherical, ctx.spherical_steps)?;
    let ok = cmp.max_error <= ctx.tolerances.get("spherical");
    if !ok {
        eprintln!(
            "FAIL spherical.max_error: <u(exp t s1) v, v> = phi_s(t) (value {:e}, tolerance {:e})",
            cmp.max_error,
            ctx.tolerances.get("spherical")
        );
    }
    let body = match cfg.format_or(Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
        Format::Csv => cmp.to_csv(),
        Format::Svg => spherical_svg(&cmp),
        _ => serde_json::to_string_pretty(&cmp)? + "\n",
    };
    Ok(Outcome {
        body,
        report: None,
        ok,
    })
}

fn spherical_svg(cmp: &crate::spherical::SphericalComparison) -> String {
    line_plot(
        &format!("Spherical function, s = {}", cmp.s),
        "t",
        "phi_s(t)",
        &[
            Series::line("ODE", cmp.rows.iter().map(|r| (r.t, r.phi)).collect()),
            Series::markers(
                "orbit",
                cmp.rows
                    .iter()
                    .step_by((cmp.rows.len() / 25).max(1))
                    .map(|r| (r.t, r.orbit_coordinate))
                    .collect(),
            ),
        ],
    )
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.format == Some(Format::Svg) {
        return match cfg.suite.as_str() {
            "carleman" => carleman(cfg),
            "spherical" => spherical(cfg),
            "curvature" => Ok(Outcome::data(curvature_sweep_svg(cfg)?)),
            other => Err(config_err(format!("no plot for suite {other:?}"))),
        };
    }
    if cfg.suite == "area" {
        return render_report(cfg, area_suite(cfg.genus, &cfg.tolerances)?);
    }
    report_command(cfg, &cfg.suite.clone())
}

/// Finite-difference curvature at `i` for a handful of `s`, against `-8/(1-4s²)`.
fn curvature_sweep_svg(cfg: &RunConfig) -> Result<String> {
    let window = cfg.window()?;
    let formula = |s2: f64| -8.0 / (1.0 - 4.0 * s2);
    let curve = (0..=60)
        .map(|i| {
            let s2 = -1.0 + i as f64 * (1.0 + 0.2) / 60.0;
            (s2, formula(s2))
        })
        .collect();
    let params = [
        SeriesParam::principal(1.0)?,
        SeriesParam::principal(0.5)?,
        SeriesParam::principal(0.25)?,
        SeriesParam::complementary(0.0)?,
        SeriesParam::complementary(0.2)?,
    ];
    let fd = cfg.exec.map(&params, |s| {
        let sampler = OrbitSampler::new(*s, window)?.with_tail(cfg.tail(&window));
        Ok((
            s.s_squared(),
            gauss_curvature_fd(&sampler, &HalfPlanePoint::I, CURVATURE_STEP)?,
        ))
    });
    let fd = fd.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(line_plot(
        "Gauss curvature of the orbit map",
        "s^2",
        "K",
        &[
            Series::line("-8/(1-4s^2)", curve),
            Series::markers("finite difference at i", fd),
        ],
    ))
}

fn area(cfg: &RunConfig) -> Result<Outcome> {
    let report = area_suite(cfg.genus, &cfg.tolerances)?;
    match cfg.format_or(Format::Text, &[Format::Text, Format::Json, Format::Csv])? {
        Format::Text => {
            let chi = (2 * cfg.genus - 2) as u64;
            let body = format!(
                "{} {} {}\n",
                pi_fraction(chi, 4),
                pi_fraction(2 * chi, 1),
                0.125
            );
            Ok(Outcome {
                body,
                ok: report.passed(),
                report: Some(report),
            })
        }
        _ => render_report(cfg, report),
    }
}

/// `num·π/den` in lowest terms, e.g. `pi/2`, `4*pi`, `3*pi/2`.
pub fn pi_fraction(num: u64, den: u64) -> String {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(num, den).max(1);
    let (n, d) = (num / g, den / g);
    let head = match n {
        0 => return "0".into(),
        1 => "pi".to_string(),
        n => format!("{n}*pi"),
    };
    if d == 1 {
        head
    } else {
        format!("{head}/{d}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        let mut full = vec!["orbitforge", "verify"];
        full.extend_from_slice(args);
        let cli = Cli::try_parse_from(full).expect("parses");
        RunConfig::resolve(&cli.opts)
    }

    #[test]
    fn pi_fractions() {
        assert_eq!(pi_fraction(2, 4), "pi/2");
        assert_eq!(pi_fraction(4, 1), "4*pi");
        assert_eq!(pi_fraction(4, 4), "pi");
        assert_eq!(pi_fraction(6, 4), "3*pi/2");
    }

    #[test]
    fn negative_curvature_flag() {
        let cfg = resolve(&["--curvature", "-8"]).unwrap();
        assert_eq!(cfg.param, Some(ParamChoice::Curvature(-8.0)));
        assert_eq!(cfg.trunc, DEFAULT_TRUNC);
    }

    #[test]
    fn series_and_curvature_are_exclusive() {
        let r = Cli::try_parse_from([
            "orbitforge",
            "verify",
            "--curvature",
            "-8",
            "--series",
            "principal",
            "--value",
            "1",
        ]);
        assert!(r.is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        assert!(matches!(
            resolve(&["--curvature", "1"]),
            Err(Error::NonNegativeCurvature(_))
        ));
        assert!(matches!(resolve(&["--trunc", "8"]), Err(Error::Config(_))));
        assert!(matches!(
            resolve(&["--tol", "bracket=-1"]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            resolve(&["--series", "complementary", "--value", "0.7"]),
            Err(Error::InvalidSeries(_))
        ));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join(format!("orbitforge-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        std::fs::write(
            &path,
            r#"{"series":{"kind":"principal","value":1.0},"trunc":64,"tolerances":{"bracket":1e-9}}"#,
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cfg = resolve(&["--config", p]).unwrap();
        assert_eq!(cfg.trunc, 64);
        assert_eq!(cfg.tolerances.get("bracket"), 1e-9);
        assert!(matches!(cfg.param, Some(ParamChoice::Series(_))));
        let cfg = resolve(&["--config", p, "--trunc", "32", "--curvature", "-10"]).unwrap();
        assert_eq!(cfg.trunc, 32);
        assert_eq!(cfg.param, Some(ParamChoice::Curvature(-10.0)));
        std::fs::write(
            &path,
            r#"{"curvature":-8,"series":{"kind":"principal","value":1.0}}"#,
        )
        .unwrap();
        assert!(matches!(resolve(&["--config", p]), Err(Error::Config(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn points_parse() {
        let pts = parse_points("0,1; -0.5,2").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].x, -0.5);
        assert!(parse_points("0,-1").is_err());
    }
}
