//! Radial spherical function `φ_s` of the hyperbolic plane.
//!
//! `φ_s(t)` solves `φ'' + coth(t) φ' + λ_s φ = 0` with `φ(0) = 1`,
//! `φ'(0) = 0`, where `t` is the hyperbolic distance to the base point. The
//! regular singular point at `t = 0` is bridged by a Taylor series up to
//! `t₀`, after which a fixed-step RK4 takes over.

use serde::Serialize;

use crate::group::{hyperbolic_distance, HalfPlanePoint};
use crate::operators::Sl2Element;
use crate::orbit::OrbitSampler;
use crate::params::SeriesParam;
use crate::{Error, Result};

/// Handoff point between the series start and RK4.
pub const SERIES_HANDOFF: f64 = 1e-2;

/// Even Taylor coefficients `a_0..a_3` of `φ = Σ a_j t^{2j}`.
///
/// Substituting into the ODE with `coth t - 1/t = t/3 - t³/45 + 2t⁵/945 - …`
/// gives `(2n)² a_n + Σ_{m+j=n, j≥1} d_m 2j a_j + λ a_{n-1} = 0`.
fn series_coefficients(lambda: f64) -> [f64; 4] {
    const D: [f64; 3] = [1.0 / 3.0, -1.0 / 45.0, 2.0 / 945.0];
    let mut a = [1.0, 0.0, 0.0, 0.0];
    for n in 1..4 {
        let mut acc = lambda * a[n - 1];
        for j in 1..n {
            acc += D[n - j - 1] * 2.0 * j as f64 * a[j];
        }
        a[n] = -acc / (4.0 * (n * n) as f64);
    }
    a
}

/// `(φ(t), φ'(t))` from the degree-6 series; accurate to `O(t⁸)`.
pub fn phi_series(lambda: f64, t: f64) -> (f64, f64) {
    let a = series_coefficients(lambda);
    let t2 = t * t;
    let phi = a[0] + t2 * (a[1] + t2 * (a[2] + t2 * a[3]));
    let dphi = t * (2.0 * a[1] + t2 * (4.0 * a[2] + t2 * 6.0 * a[3]));
    (phi, dphi)
}

fn rhs(lambda: f64, t: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -y[1] / t.tanh() - lambda * y[0]]
}

fn rk4_step(lambda: f64, t: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = rhs(lambda, t, y);
    let k2 = rhs(lambda, t + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = rhs(lambda, t + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = rhs(lambda, t + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// `φ_s` sampled at `t_i = i · t_max / steps`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialProfile {
    pub s: SeriesParam,
    pub samples: Vec<(f64, f64)>,
    pub step: f64,
}

impl RadialProfile {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|&(_, v)| v)
    }

    /// Finite-difference `φ'' + coth(t) φ' + λ φ` at interior samples with
    /// `t ≥ t_min`, as `(t, residual)`.
    pub fn eigen_residuals(&self, t_min: f64) -> Vec<(f64, f64)> {
        let h = self.step;
        let lambda = self.s.lambda();
        self.samples
            .windows(3)
            .filter(|w| w[1].0 >= t_min)
            .map(|w| {
                let (t, f) = w[1];
                let d2 = (w[2].1 - 2.0 * f + w[0].1) / (h * h);
                let d1 = (w[2].1 - w[0].1) / (2.0 * h);
                (t, d2 + d1 / t.tanh() + lambda * f)
            })
            .collect()
    }
}

pub fn phi_radial(s: SeriesParam, t_max: f64, steps: usize) -> Result<RadialProfile> {
    if !(t_max > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument(format!(
            "phi_radial needs t_max > 0 and steps >= 1 (got {t_max}, {steps})"
        )));
    }
    let lambda = s.lambda();
    let h = t_max / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, 1.0));
    let mut y = [1.0, 0.0];
    for i in 0..steps {
        let (t0, t1) = (i as f64 * h, (i + 1) as f64 * h);
        if t1 <= SERIES_HANDOFF {
            let (f, df) = phi_series(lambda, t1);
            y = [f, df];
        } else if t0 < SERIES_HANDOFF {
            let (f, df) = phi_series(lambda, SERIES_HANDOFF);
            y = rk4_step(lambda, SERIES_HANDOFF, [f, df], t1 - SERIES_HANDOFF);
        } else {
            y = rk4_step(lambda, t0, y, h);
        }
        samples.push((t1, y[0]));
    }
    Ok(RadialProfile {
        s,
        samples,
        step: h,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphericalRow {
    pub t: f64,
    pub phi: f64,
    pub orbit_coordinate: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SphericalComparison {
    pub s: SeriesParam,
    pub rows: Vec<SphericalRow>,
    pub max_error: f64,
    /// Largest imaginary part of `⟨u(exp tσ_1) e_0, e_0⟩`.
    pub max_imaginary: f64,
}

impl SphericalComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,phi,orbit_coordinate,abs_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.t, r.phi, r.orbit_coordinate, r.abs_error
            ));
        }
        out
    }
}

/// Compares `⟨ρ_s(exp tσ_1) e_0, e_0⟩` from the truncated representation
/// against the ODE profile `φ_s(t)`; `exp(tσ_1)` moves `i` by exactly `t`.
pub fn compare_spherical(
    sampler: &OrbitSampler,
    t_max: f64,
    steps: usize,
) -> Result<SphericalComparison> {
    let s = sampler.series();
    let profile = phi_radial(s, t_max, steps)?;
    let prop = sampler.propagator(&Sl2Element::SIGMA1)?;
    let window = sampler.window();
    let e0 = window.basis_vector(0);
    let p0 = window.pos(0);
    let coords = sampler
        .exec()
        .map(&profile.samples, |&(t, _)| prop.apply(t, &e0)[p0]);
    let mut max_error = 0.0_f64;
    let mut max_imaginary = 0.0_f64;
    let rows = profile
        .samples
        .iter()
        .zip(coords)
        .map(|(&(t, phi), c)| {
            let abs_error = (c.re - phi).abs().max(c.im.abs());
            max_error = max_error.max(abs_error);
            max_imaginary = max_imaginary.max(c.im.abs());
            SphericalRow {
                t,
                phi,
                orbit_coordinate: c.re,
                abs_error,
            }
        })
        .collect();
    Ok(SphericalComparison {
        s,
        rows,
        max_error,
        max_imaginary,
    })
}

/// `φ_s(d(p, i))` evaluated with a fresh profile; convenient for scattered
/// points.
pub fn phi_at_point(s: SeriesParam, p: &HalfPlanePoint, steps_per_unit: usize) -> Result<f64> {
    let d = hyperbolic_distance(p, &HalfPlanePoint::I);
    if d == 0.0 {
        return Ok(1.0);
    }
    let steps = ((d * steps_per_unit as f64).ceil() as usize).max(1);
    let profile = phi_radial(s, d, steps)?;
    Ok(profile.samples.last().expect("non-empty").1)
}
