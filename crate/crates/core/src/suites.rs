//! Verification suites assembled into [`Report`]s for the CLI.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;
use serde_json::json;

use crate::exec::Exec;
use crate::group::{hyperbolic_distance, HalfPlanePoint};
use crate::operators::{
    build_skew_basis, carleman_scan_with, commutator_residuals_with, graded_laplacian_check_with,
    IndexWindow,
};
use crate::orbit::{cross_validate_with, frame_flow_with, OrbitSampler, TailPolicy};
use crate::params::{a_sequence, SeriesParam};
use crate::report::{Check, Report};
use crate::spherical::compare_spherical;
use crate::verify::{
    area_rigidity, gauss_curvature_fd, gram_pairings, minimality_residual, octagon_area_quadrature,
    pullback_metric, CURVATURE_STEP, METRIC_STEP,
};
use crate::{Error, Result};

pub const SUITES: [&str; 10] = [
    "operators",
    "carleman",
    "metric",
    "curvature",
    "minimality",
    "spherical",
    "flow",
    "gram",
    "area",
    "structure",
];

/// Named tolerances with pinned defaults; user overrides must be positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let pairs = [
            ("bracket", 1e-12),
            ("casimir", 1e-11),
            ("carleman_ratio", 0.1),
            ("carleman_growth", 1.8),
            ("metric", 1e-5),
            ("conformality", 1e-5),
            ("curvature_rel", 1e-2),
            ("minimality", 1e-3),
            ("spherical", 1e-5),
            ("cross_validation", 1e-6),
            ("gram", 1e-8),
            ("area", 1e-6),
            ("structure", 1e-12),
        ];
        Self(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("unknown tolerance {name}"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !self.0.contains_key(name) {
            return Err(Error::Config(format!("unknown tolerance {name:?}")));
        }
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!(
                "tolerance {name} must be positive, got {value}"
            )));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }
}

/// Everything a suite needs; built by the CLI from a resolved config.
#[derive(Clone, Debug)]
pub struct SuiteContext {
    pub series: SeriesParam,
    pub window: IndexWindow,
    pub tail: TailPolicy,
    pub tolerances: Tolerances,
    pub t_max_flow: f64,
    pub t_max_spherical: f64,
    pub flow_steps: usize,
    pub spherical_steps: usize,
    pub nmax: usize,
    pub genus: u32,
    pub kmax: usize,
    pub exec: Exec,
}

/// Half-width used for the full-matrix frame flow behind the Gram suite.
pub const GRAM_HALF_WIDTH: usize = 32;

impl SuiteContext {
    pub fn new(series: SeriesParam, window: IndexWindow) -> Self {
        Self {
            series,
            window,
            tail: TailPolicy::for_window(&window),
            tolerances: Tolerances::default(),
            t_max_flow: 1.0,
            t_max_spherical: 3.0,
            flow_steps: 1000,
            spherical_steps: 300,
            nmax: 1_000_000,
            genus: 2,
            kmax: 8,
            exec: Exec::default(),
        }
    }

    pub fn curvature(&self) -> f64 {
        self.series.curvature()
    }

    pub fn sampler(&self) -> Result<OrbitSampler> {
        Ok(OrbitSampler::new(self.series, self.window)?
            .with_tail(self.tail)
            .with_exec(self.exec))
    }

    fn params(&self) -> serde_json::Value {
        json!({
            "s": self.series,
            "curvature": self.curvature(),
            "N": self.window.half_width,
            "margin": self.window.margin,
            "tail": self.tail,
        })
    }

    fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }
}

pub fn run_suite(name: &str, ctx: &SuiteContext) -> Result<Report> {
    match name {
        "operators" => operators_suite(ctx),
        "carleman" => carleman_suite(ctx),
        "metric" => metric_suite(ctx),
        "curvature" => curvature_suite(ctx),
        "minimality" => minimality_suite(ctx),
        "spherical" => spherical_suite(ctx),
        "flow" => flow_suite(ctx),
        "gram" => gram_suite(ctx),
        "area" => area_suite(ctx.genus, &ctx.tolerances),
        "structure" => structure_suite(ctx),
        "all" => {
            let mut report = Report::new("all", ctx.params());
            for s in SUITES {
                report.extend(run_suite(s, ctx)?);
            }
            Ok(report)
        }
        other => Err(Error::Config(format!(
            "unknown suite {other:?}; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

/// Runs a suite and turns computational errors into a failed check rather
/// than aborting the whole report.
pub fn run_suite_lenient(name: &str, ctx: &SuiteContext) -> Result<Report> {
    if name == "all" {
        let mut report = Report::new("all", ctx.params());
        for s in SUITES {
            report.extend(run_suite_lenient(s, ctx)?);
        }
        return Ok(report);
    }
    match run_suite(name, ctx) {
        Ok(r) => Ok(r),
        Err(e @ Error::Config(_)) => Err(e),
        Err(e) => {
            let mut r = Report::new(name, ctx.params());
            r.push(Check::holds(
                format!("{name}.completed"),
                e.to_string(),
                false,
            ));
            Ok(r)
        }
    }
}

fn operators_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("operators", ctx.params());
    let k = ctx.curvature();
    let mut window = ctx.window;
    window.margin = window.margin.max(2);
    let brackets = commutator_residuals_with(k, window, ctx.exec)?;
    for r in &brackets.residuals {
        report.push(Check::residual(
            format!("operators.{}", r.name),
            bracket_anchor(&r.name),
            r.interior,
            ctx.tol("bracket"),
        ));
    }
    let casimir = graded_laplacian_check_with(k, window, ctx.exec)?;
    for r in &casimir.residuals {
        report.push(Check::residual(
            format!("operators.{}", r.name),
            "Phi = Delta - K Z^2 = -2 and commutes with X, Y, Z",
            r.interior,
            ctx.tol("casimir"),
        ));
    }
    Ok(report)
}

fn bracket_anchor(name: &str) -> &'static str {
    if name.starts_with("[T_") {
        "[Z,X]=X, [Z,Y]=-Y, [X,Y]=-(K/2)Z"
    } else if name.starts_with("[F_") {
        "[F_1,F_2]=|K|F_3, [F_2,F_3]=-F_1, [F_3,F_1]=-F_2"
    } else {
        "[s1,s2]=s3, [s2,s3]=-s1, [s3,s1]=-s2 lifted through phi"
    }
}

fn carleman_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("carleman", ctx.params());
    let scan = carleman_scan_with(ctx.curvature(), ctx.nmax, ctx.exec)?;
    let anchor = "sum 1/sqrt(c_k) diverges like (2/sqrt|K|) ln N";
    let last = scan.last();
    report.push(Check::absolute(
        "carleman.ratio",
        anchor,
        last.ratio,
        1.0,
        ctx.tol("carleman_ratio"),
    ));
    if ctx.nmax >= 1_000_000 {
        let s3 = scan.at(1000).expect("checkpoint 1000").partial_sum;
        let s6 = scan.at(1_000_000).expect("checkpoint 10^6").partial_sum;
        report.push(Check::at_least(
            "carleman.growth",
            anchor,
            s6 / s3,
            ctx.tol("carleman_growth"),
        ));
    }
    report.push(Check::holds(
        "carleman.monotone",
        anchor,
        scan.rows
            .windows(2)
            .all(|w| w[1].partial_sum > w[0].partial_sum),
    ));
    report.push(Check::holds(
        "carleman.gauged_positive",
        "e_{1-2k} -> -e_{1-2k} makes T_X - T_Y a Jacobi matrix",
        scan.gauge.all_positive,
    ));
    Ok(report)
}

fn metric_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("metric", ctx.params());
    let sampler = ctx.sampler()?;
    let c = ctx.series.conformal_factor();
    let anchor = "u*g_H = c_s g_0, c_s = lambda_s/2";
    for y in [1.0, 2.0] {
        let p = HalfPlanePoint::new(0.0, y)?;
        let m = pullback_metric(&sampler, &p, METRIC_STEP)?;
        let expect = c / (y * y);
        let tol = ctx.tol("metric") / (y * y);
        report.push(Check::absolute(
            format!("metric.g11@(0,{y})"),
            anchor,
            m.g11,
            expect,
            tol,
        ));
        report.push(Check::absolute(
            format!("metric.g22@(0,{y})"),
            anchor,
            m.g22,
            expect,
            tol,
        ));
        report.push(Check::residual(
            format!("metric.g12@(0,{y})"),
            anchor,
            m.g12.abs(),
            ctx.tol("conformality"),
        ));
    }
    Ok(report)
}

fn curvature_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("curvature", ctx.params());
    let sampler = ctx.sampler()?;
    let k = gauss_curvature_fd(&sampler, &HalfPlanePoint::I, CURVATURE_STEP)?;
    report.push(Check::relative(
        "curvature.gauss@(0,1)",
        "K_s = -8/(1-4s^2)",
        k,
        ctx.curvature(),
        ctx.tol("curvature_rel"),
    ));
    Ok(report)
}

fn minimality_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("minimality", ctx.params());
    let sampler = ctx.sampler()?;
    let (r1, r2) = minimality_residual(&sampler, &HalfPlanePoint::I, CURVATURE_STEP)?;
    report.push(Check::residual(
        "minimality.r1@(0,1)",
        "Delta_{g_0} u = -lambda_s u",
        r1,
        ctx.tol("minimality"),
    ));
    report.push(Check::residual(
        "minimality.r2@(0,1)",
        "Delta_{u*g} u = -2u",
        r2,
        ctx.tol("minimality") / ctx.series.conformal_factor(),
    ));
    Ok(report)
}

fn spherical_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("spherical", ctx.params());
    let sampler = ctx.sampler()?;
    let cmp = compare_spherical(&sampler, ctx.t_max_spherical, ctx.spherical_steps)?;
    report.push(Check::residual(
        "spherical.max_error",
        "<u(exp t s1) v, v> = phi_s(t), Delta phi = -lambda_s phi",
        cmp.max_error,
        ctx.tol("spherical"),
    ));
    Ok(report)
}

fn flow_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("flow", ctx.params());
    let sampler = ctx.sampler()?;
    let cv = cross_validate_with(&sampler, ctx.t_max_flow, ctx.flow_steps)?;
    let anchor = "flow of du_0 = F_1 u_0 w^1 + F_2 u_0 w^2 equals the orbit";
    report.push(Check::residual(
        "flow.cross_validation.sigma1",
        anchor,
        cv.sigma1,
        ctx.tol("cross_validation"),
    ));
    report.push(Check::residual(
        "flow.cross_validation.sigma2",
        anchor,
        cv.sigma2,
        ctx.tol("cross_validation"),
    ));
    Ok(report)
}

fn gram_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("gram", ctx.params());
    let n = ctx.window.half_width.min(GRAM_HALF_WIDTH);
    let window = IndexWindow::new(n, 1)?;
    let inv = 1.0 / (-ctx.curvature()).sqrt();
    let state = frame_flow_with(
        ctx.series,
        window,
        [inv, 0.0, 0.0],
        ctx.t_max_flow,
        ctx.flow_steps,
        ctx.exec,
    )?;
    let gram = gram_pairings(&state, ctx.curvature(), ctx.kmax)?;
    let tol = ctx.tol("gram");
    for (name, anchor) in [
        ("pair_diag", "<X^k u, Y^k u> = A_k"),
        ("pair_shift", "<X^{k+m} u, Y^k u> = 0"),
        ("ladder_down", "Y X^k u = -(A_k/A_{k-1}) X^{k-1} u"),
        ("ladder_up", "X Y^k u = -(A_k/A_{k-1}) Y^{k-1} u"),
        (
            "hermitian_vs_bilinear",
            "bilinear and Hermitian Gram suites agree",
        ),
        ("column_conjugation", "u_{-k} = conj(u_k)"),
    ] {
        report.push(Check::residual(
            format!("gram.{name}"),
            anchor,
            gram.max_of(name),
            tol,
        ));
    }
    report.push(Check::residual(
        "gram.unitarity_drift",
        "{u_k} orthonormal",
        state.unitarity_drift,
        tol,
    ));
    let a = a_sequence(ctx.curvature(), ctx.kmax)?;
    report.push(Check::holds(
        "gram.a_sequence_positive",
        "A_0 = 1, A_{k+1} = (1 - binom(k+1,2) K) A_k / 2 > 0",
        a.a_seq.iter().all(|&x| x > 0.0) && a.a_seq[0] == 1.0,
    ));
    Ok(report)
}

/// Area constants; independent of the series parameter.
pub fn area_suite(genus: u32, tolerances: &Tolerances) -> Result<Report> {
    let mut report = Report::new("area", json!({ "genus": genus }));
    let (bound, hyperbolic) = area_rigidity(genus)?;
    let chi = (2 * genus - 2) as f64;
    let anchor = "Area(f* g_H) >= (pi/4)|chi|, f* g_H = g_0/8";
    report.push(Check::absolute(
        "area.bound",
        anchor,
        bound,
        PI / 4.0 * chi,
        0.0,
    ));
    report.push(Check::absolute(
        "area.hyperbolic",
        anchor,
        hyperbolic,
        2.0 * PI * chi,
        0.0,
    ));
    report.push(Check::absolute(
        "area.ratio",
        anchor,
        bound / hyperbolic,
        0.125,
        0.0,
    ));
    let tol = tolerances.get("area");
    let octagon = octagon_area_quadrature(tol)?;
    report.push(Check::absolute(
        "area.octagon",
        "Gauss-Bonnet: regular octagon with angles pi/4 has area 4 pi",
        octagon,
        4.0 * PI,
        tol,
    ));
    report.push(Check::absolute(
        "area.octagon_rescaled",
        anchor,
        octagon / 8.0,
        area_rigidity(2)?.0,
        tol,
    ));
    Ok(report)
}

fn structure_suite(ctx: &SuiteContext) -> Result<Report> {
    let mut report = Report::new("structure", ctx.params());
    let tol = ctx.tol("structure");
    let (f1, f2, f3) = build_skew_basis(ctx.curvature(), ctx.window)?;
    let skew = [&f1, &f2, &f3]
        .iter()
        .map(|f| f.skew_hermitian_defect())
        .fold(0.0, f64::max);
    let conj = [&f1, &f2, &f3]
        .iter()
        .map(|f| f.conjugation_defect())
        .fold(0.0, f64::max);
    report.push(Check::residual(
        "structure.skew_hermitian",
        "F_i skew-adjoint",
        skew,
        0.0,
    ));
    report.push(Check::residual(
        "structure.conjugation",
        "J F_i J = F_i",
        conj,
        0.0,
    ));

    let sampler = ctx.sampler()?;
    let grid = structure_grid()?;
    let points = sampler.grid(&grid)?;
    let norm_defect = points
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let real_defect = points
        .iter()
        .map(|v| v.real_structure_defect())
        .fold(0.0, f64::max);
    report.push(Check::residual(
        "structure.unit_norm",
        "u maps into the unit sphere",
        norm_defect,
        tol,
    ));
    report.push(Check::residual(
        "structure.real",
        "u_{-k} = conj(u_k)",
        real_defect,
        tol,
    ));

    // two-point invariance: <u(p), u(q)> depends only on d(p, q)
    let base = sampler.propagator(&crate::operators::Sl2Element::SIGMA1)?;
    let e0 = ctx.window.basis_vector(0);
    let p0 = ctx.window.pos(0);
    let mut worst = 0.0_f64;
    for (i, p) in grid.iter().enumerate() {
        for (j, q) in grid.iter().enumerate().skip(i + 1) {
            let d = hyperbolic_distance(p, q);
            let reference = base.apply(d, &e0)[p0];
            worst = worst.max((points[j].hermitian(&points[i]) - reference).norm());
        }
    }
    report.push(Check::residual(
        "structure.two_point_invariance",
        "<u(p),u(q)> = phi_s(d(p,q))",
        worst,
        1e-8,
    ));
    Ok(report)
}

fn structure_grid() -> Result<Vec<HalfPlanePoint>> {
    [(0.0, 1.0), (0.3, 0.8), (-0.5, 1.4), (1.0, 1.0), (0.2, 0.5)]
        .iter()
        .map(|&(x, y)| HalfPlanePoint::new(x, y))
        .collect()
}
