//! Geometric checks on the sampled immersion: pulled-back metric, Gaussian
//! curvature of the conformal factor, the Laplace eigen-equation, bilinear
//! Gram pairings of the osculating frame, and the area constants.

use std::f64::consts::PI;

use serde::Serialize;

use crate::exec::nan_max;
use crate::group::HalfPlanePoint;
use crate::linalg::{bilinear_pairing, hermitian_inner, norm, C64};
use crate::operators::Representation;
use crate::orbit::{FrameState, OrbitSampler, OsculatingVector};
use crate::params::{a_sequence, c_coeff};
use crate::{Error, Result};

/// Default stencil for first derivatives of the orbit map.
pub const METRIC_STEP: f64 = 1e-3;
/// Default stencil for the curvature and Laplacian second differences.
pub const CURVATURE_STEP: f64 = 1e-2;

/// First fundamental form of the orbit map in half-plane coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricSample {
    pub point: HalfPlanePoint,
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub h: f64,
}

impl MetricSample {
    /// `|g12| / g11`.
    pub fn conformality_defect(&self) -> f64 {
        self.g12.abs() / self.g11
    }
}

fn shifted(p: &HalfPlanePoint, dx: f64, dy: f64) -> Result<HalfPlanePoint> {
    HalfPlanePoint::new(p.x + dx, p.y + dy)
}

fn central_difference(plus: &OsculatingVector, minus: &OsculatingVector, h: f64) -> Vec<C64> {
    plus.coords
        .iter()
        .zip(&minus.coords)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// Central differences of `u` in `x` and `y`; the entries are real parts of
/// Hermitian products, which for vectors of the real space are the real
/// inner products. Expected value `c_s / y²` on the diagonal.
pub fn pullback_metric(sampler: &OrbitSampler, p: &HalfPlanePoint, h: f64) -> Result<MetricSample> {
    if !(h > 0.0) || h >= p.y {
        return Err(Error::InvalidArgument(format!(
            "stencil width {h} invalid at y = {}",
            p.y
        )));
    }
    let pts = [
        shifted(p, h, 0.0)?,
        shifted(p, -h, 0.0)?,
        shifted(p, 0.0, h)?,
        shifted(p, 0.0, -h)?,
    ];
    let u = sampler.grid(&pts)?;
    let ux = central_difference(&u[0], &u[1], h);
    let uy = central_difference(&u[2], &u[3], h);
    Ok(MetricSample {
        point: *p,
        g11: hermitian_inner(&ux, &ux).re,
        g12: hermitian_inner(&ux, &uy).re,
        g22: hermitian_inner(&uy, &uy).re,
        h,
    })
}

/// `K = -(1/(2λ)) Δ ln λ` for the conformal factor `λ = g11`, with a
/// five-point Laplacian of width `h` and metric stencil
/// `min(h/10, METRIC_STEP)`.
pub fn gauss_curvature_fd(sampler: &OrbitSampler, p: &HalfPlanePoint, h: f64) -> Result<f64> {
    let hm = (0.1 * h).min(METRIC_STEP);
    let pts = [
        *p,
        shifted(p, h, 0.0)?,
        shifted(p, -h, 0.0)?,
        shifted(p, 0.0, h)?,
        shifted(p, 0.0, -h)?,
    ];
    let mut log_factor = [0.0; 5];
    let mut centre = 0.0;
    for (i, q) in pts.iter().enumerate() {
        let g = pullback_metric(sampler, q, hm)?.g11;
        if i == 0 {
            centre = g;
        }
        log_factor[i] = g.ln();
    }
    let lap = (log_factor[1] + log_factor[2] + log_factor[3] + log_factor[4] - 4.0 * log_factor[0])
        / (h * h);
    Ok(-lap / (2.0 * centre))
}

/// `(r1, r2)` with `r1 = ‖y² (∂xx + ∂yy) u + λ_s u‖` and `r2 = r1 / c_s`,
/// the same residual measured in the induced metric where the eigenvalue is
/// `-2`.
pub fn minimality_residual(
    sampler: &OrbitSampler,
    p: &HalfPlanePoint,
    h: f64,
) -> Result<(f64, f64)> {
    if !(h > 0.0) || h >= p.y {
        return Err(Error::InvalidArgument(format!(
            "stencil width {h} invalid at y = {}",
            p.y
        )));
    }
    let pts = [
        *p,
        shifted(p, h, 0.0)?,
        shifted(p, -h, 0.0)?,
        shifted(p, 0.0, h)?,
        shifted(p, 0.0, -h)?,
    ];
    let u = sampler.grid(&pts)?;
    let s = sampler.series();
    let lambda = s.lambda();
    let y2 = p.y * p.y;
    let residual: Vec<C64> = (0..u[0].coords.len())
        .map(|i| {
            let lap = (u[1].coords[i] + u[2].coords[i] + u[3].coords[i] + u[4].coords[i]
                - 4.0 * u[0].coords[i])
                / (h * h);
            y2 * lap + lambda * u[0].coords[i]
        })
        .collect();
    let r1 = norm(&residual);
    Ok((r1, r1 / s.conformal_factor()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingResidual {
    pub name: String,
    pub k: i64,
    pub m: i64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub kmax: usize,
    pub a_seq: Vec<f64>,
    pub residuals: Vec<PairingResidual>,
}

impl GramReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, nan_max)
    }

    pub fn max_of(&self, name: &str) -> f64 {
        self.residuals
            .iter()
            .filter(|r| r.name == name)
            .map(|r| r.residual)
            .fold(0.0, nan_max)
    }
}

/// Number of off-diagonal shifts checked by [`gram_pairings`].
pub const MAX_PAIRING_SHIFT: usize = 4;

/// Bilinear Gram pairings of `X^k u = √A_k u_k` and `Y^k u = √A_k u_{-k}`
/// at a flowed frame, all normalised by `√(A_j A_k)`:
///
/// * `pair_diag`: `⟨X^k u, Y^k u⟩ / A_k - 1`
/// * `pair_shift`: `⟨X^{k+m} u, Y^k u⟩` and `⟨X^k u, Y^{k+m} u⟩`, `1 ≤ m ≤ 4`
/// * `ladder_down`: `Y X^k u + (A_k/A_{k-1}) X^{k-1} u` with `Y` transported
///   by the frame, and `ladder_up` its mirror
/// * `hermitian_vs_bilinear`: `⟨u_j, u_{-k}⟩ - (u_j, u_k)_Herm`
/// * `column_conjugation`: `u_{-k} - J u_k`
pub fn gram_pairings(state: &FrameState, curvature: f64, kmax: usize) -> Result<GramReport> {
    let window = state.window;
    let need = kmax + MAX_PAIRING_SHIFT + window.margin.max(1);
    if need > window.half_width {
        return Err(Error::WindowTooSmall {
            half_width: window.half_width,
            reason: format!("Gram pairings up to k = {kmax} need N >= {need}"),
        });
    }
    let a = a_sequence(curvature, kmax + MAX_PAIRING_SHIFT)?;
    let col = |k: i64| state.column(k);
    let mut residuals = Vec::new();
    let mut push = |name: &str, k: i64, m: i64, residual: f64| {
        residuals.push(PairingResidual {
            name: name.to_string(),
            k,
            m,
            residual,
        })
    };

    for k in 0..=kmax as i64 {
        let b = bilinear_pairing(col(k), col(-k));
        push("pair_diag", k, 0, (b - 1.0).norm());
        for m in 1..=MAX_PAIRING_SHIFT as i64 {
            push(
                "pair_shift",
                k,
                m,
                bilinear_pairing(col(k + m), col(-k)).norm(),
            );
            push(
                "pair_shift",
                k,
                -m,
                bilinear_pairing(col(k), col(-k - m)).norm(),
            );
        }
    }

    // Transported ladder operators U T U† against the frame columns.
    let rep = Representation::new(curvature, window)?;
    let n = window.dim();
    let adjoint_apply = |v: &[C64]| -> Vec<C64> {
        (0..n)
            .map(|p| hermitian_inner(v, &state.columns[p * n..(p + 1) * n]))
            .collect()
    };
    let forward_apply = |c: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (p, cp) in c.iter().enumerate() {
            if *cp == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, u) in out.iter_mut().zip(&state.columns[p * n..(p + 1) * n]) {
                *o += cp * u;
            }
        }
        out
    };
    for k in 1..=kmax as i64 {
        let ck = c_coeff(curvature, k as usize).sqrt();
        let down = forward_apply(&rep.t_y.apply(&adjoint_apply(col(k))));
        let r: Vec<C64> = down
            .iter()
            .zip(col(k - 1))
            .map(|(x, y)| x + ck * y)
            .collect();
        push("ladder_down", k, -1, norm(&r));
        let up = forward_apply(&rep.t_x.apply(&adjoint_apply(col(-k))));
        let r: Vec<C64> = up
            .iter()
            .zip(col(-k + 1))
            .map(|(x, y)| x + ck * y)
            .collect();
        push("ladder_up", -k, 1, norm(&r));
    }

    let reach = (kmax + MAX_PAIRING_SHIFT) as i64;
    for j in -reach..=reach {
        for k in -reach..=reach {
            let b = bilinear_pairing(col(j), col(-k));
            let h = hermitian_inner(col(j), col(k));
            push("hermitian_vs_bilinear", j, k, (b - h).norm());
        }
        let flipped: Vec<C64> = col(j).iter().rev().map(|z| z.conj()).collect();
        let d = flipped
            .iter()
            .zip(col(-j))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, nan_max);
        push("column_conjugation", j, 0, d);
    }

    Ok(GramReport {
        kmax,
        a_seq: a.a_seq,
        residuals,
    })
}

/// `((π/4)|χ|, 2π|χ|)` for a closed surface of genus `g ≥ 2`,
/// `|χ| = 2g - 2`.
pub fn area_rigidity(genus: u32) -> Result<(f64, f64)> {
    if genus < 2 {
        return Err(Error::InvalidArgument(format!(
            "genus must be at least 2, got {genus}"
        )));
    }
    let chi = (2 * genus - 2) as f64;
    Ok((PI / 4.0 * chi, 2.0 * PI * chi))
}

/// Regular geodesic `sides`-gon with the given interior angle, centred at
/// the origin of the Poincaré disk.
#[derive(Clone, Copy, Debug)]
pub struct RegularPolygon {
    pub sides: u32,
    pub interior_angle: f64,
    /// Euclidean radius of the vertices in the disk.
    pub vertex_radius: f64,
    /// Distance from the origin to the centre of each edge's circle.
    pub edge_centre: f64,
}

impl RegularPolygon {
    pub fn new(sides: u32, interior_angle: f64) -> Result<Self> {
        let n = sides as f64;
        if sides < 3 || !(interior_angle > 0.0) || (n - 2.0) * PI - n * interior_angle <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "no hyperbolic regular {sides}-gon with interior angle {interior_angle}"
            )));
        }
        // hyperbolic circumradius: cosh R = cot(π/n) cot(α/2)
        let cosh_r = 1.0 / (PI / n).tan() / (interior_angle / 2.0).tan();
        let r = cosh_r.acosh();
        let vertex_radius = (r / 2.0).tanh();
        let edge_centre =
            (vertex_radius * vertex_radius + 1.0) / (2.0 * vertex_radius * (PI / n).cos());
        Ok(Self {
            sides,
            interior_angle,
            vertex_radius,
            edge_centre,
        })
    }

    /// Boundary radius at angle `phi` from an edge midpoint, `|phi| ≤ π/n`.
    /// The edge is the circle `r² - 2 r c cos φ + 1 = 0`, orthogonal to the
    /// unit circle.
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        let b = self.edge_centre * phi.cos();
        // smaller root, written to avoid cancellation
        1.0 / (b + (b * b - 1.0).sqrt())
    }

    /// Radially integrated area element: `∫_0^R 4r/(1-r²)² dr = 2R²/(1-R²)`.
    fn sector_density(&self, phi: f64) -> f64 {
        let r = self.boundary_radius(phi);
        2.0 * r * r / (1.0 - r * r)
    }

    /// Hyperbolic area by adaptive Simpson in the polar angle.
    pub fn area(&self, tolerance: f64) -> Result<f64> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let half = PI / self.sides as f64;
        let pieces = 2.0 * self.sides as f64;
        let f = |phi: f64| self.sector_density(phi);
        let mut evals = 0usize;
        let integral = adaptive_simpson(&f, 0.0, half, tolerance / pieces, 0, &mut evals).ok_or(
            Error::QuadratureNoConvergence {
                tolerance,
                estimate: f64::NAN,
            },
        )?;
        Ok(pieces * integral)
    }
}

const SIMPSON_MAX_DEPTH: usize = 40;
const SIMPSON_MAX_EVALS: usize = 1_000_000;

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    evals: &mut usize,
) -> Option<f64> {
    let simpson = |a: f64, b: f64, fa: f64, fm: f64, fb: f64| (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        evals: &mut usize,
        simpson: &impl Fn(f64, f64, f64, f64, f64) -> f64,
    ) -> Option<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        *evals += 2;
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Some(left + right + delta / 15.0);
        }
        if depth >= SIMPSON_MAX_DEPTH || *evals > SIMPSON_MAX_EVALS {
            return None;
        }
        let l = recurse(
            f,
            a,
            m,
            fa,
            flm,
            fm,
            left,
            tol / 2.0,
            depth + 1,
            evals,
            simpson,
        )?;
        let r = recurse(
            f,
            m,
            b,
            fm,
            frm,
            fb,
            right,
            tol / 2.0,
            depth + 1,
            evals,
            simpson,
        )?;
        Some(l + r)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    *evals += 3;
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, depth, evals, &simpson)
}

/// Area of the regular geodesic octagon with interior angles `π/4`; the
/// Gauss–Bonnet value is `6π - 8·π/4 = 4π`.
pub fn octagon_area_quadrature(tolerance: f64) -> Result<f64> {
    RegularPolygon::new(8, PI / 4.0)?.area(tolerance)
}
