//! The immersion `u(A) = ρ_s(A) e_0` on a truncated window, built two
//! independent ways: by unitary exponentials of the represented generators,
//! and by integrating the moving-frame ODE for a constant coframe.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::exec::{nan_max, Exec};
use crate::group::{iwasawa_word, GroupWord, HalfPlanePoint};
use crate::linalg::{bilinear_pairing, distance, hermitian_inner, norm, UnitaryPropagator, C64};
use crate::operators::{BandedOperator, IndexWindow, Representation, Sl2Element};
use crate::params::SeriesParam;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Coordinates over `{e_k}` of a point of the truncated Hilbert sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct OsculatingVector {
    pub window: IndexWindow,
    pub coords: Vec<C64>,
}

impl OsculatingVector {
    pub fn basis(window: IndexWindow, k: i64) -> Self {
        Self {
            window,
            coords: window.basis_vector(k),
        }
    }

    pub fn coord(&self, k: i64) -> C64 {
        self.coords[self.window.pos(k)]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    /// `Σ x_k conj(y_k)`.
    pub fn hermitian(&self, other: &Self) -> C64 {
        hermitian_inner(&self.coords, &other.coords)
    }

    /// `Σ x_m y_{-m}`.
    pub fn bilinear(&self, other: &Self) -> C64 {
        bilinear_pairing(&self.coords, &other.coords)
    }

    /// The antilinear involution `x_k ↦ conj(x_{-k})`.
    pub fn conjugate_flip(&self) -> Self {
        Self {
            window: self.window,
            coords: self.coords.iter().rev().map(|z| z.conj()).collect(),
        }
    }

    /// `max |x_k - conj(x_{-k})|`; zero for vectors of the real space.
    pub fn real_structure_defect(&self) -> f64 {
        self.coords
            .iter()
            .zip(self.coords.iter().rev())
            .map(|(a, b)| (a - b.conj()).norm())
            .fold(0.0, nan_max)
    }

    /// `Σ_{|k| > N - buffer} |x_k|²`.
    pub fn tail_mass(&self, buffer: usize) -> f64 {
        let cut = self.window.n() - buffer as i64;
        self.window
            .indices()
            .filter(|k| k.abs() > cut)
            .map(|k| self.coord(k).norm_sqr())
            .sum()
    }
}

/// Tail-mass monitor: the last `buffer` indices on each side may carry at
/// most `eps` of squared mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPolicy {
    pub buffer: usize,
    pub eps: f64,
}

impl TailPolicy {
    pub const DEFAULT_EPS: f64 = 1e-10;

    /// `buffer = ⌈N/8⌉`, `eps = 1e-10`.
    pub fn for_window(window: &IndexWindow) -> Self {
        Self {
            buffer: window.half_width.div_ceil(8),
            eps: Self::DEFAULT_EPS,
        }
    }

    pub fn check(&self, v: &OsculatingVector) -> Result<()> {
        let tail = v.tail_mass(self.buffer);
        if !(tail <= self.eps) {
            return Err(Error::TailBreach {
                tail,
                eps: self.eps,
                half_width: v.window.half_width,
                suggested: 2 * v.window.half_width,
            });
        }
        Ok(())
    }
}

/// Orbit map of one series parameter on one window, with cached unitary
/// propagators per Lie-algebra direction.
pub struct OrbitSampler {
    series: SeriesParam,
    rep: Representation,
    tail: TailPolicy,
    exec: Exec,
    cache: Mutex<HashMap<[u64; 3], Arc<UnitaryPropagator>>>,
}

impl std::fmt::Debug for OrbitSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrbitSampler")
            .field("series", &self.series)
            .field("window", &self.rep.window)
            .field("tail", &self.tail)
            .finish()
    }
}

impl OrbitSampler {
    pub fn new(series: SeriesParam, window: IndexWindow) -> Result<Self> {
        let rep = Representation::new(series.curvature(), window)?;
        Ok(Self {
            series,
            tail: TailPolicy::for_window(&window),
            rep,
            exec: Exec::default(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn series(&self) -> SeriesParam {
        self.series
    }

    pub fn window(&self) -> IndexWindow {
        self.rep.window
    }

    pub fn tail(&self) -> TailPolicy {
        self.tail
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn curvature(&self) -> f64 {
        self.rep.curvature
    }

    /// Propagator of `φ(X)`, built on first use.
    pub fn propagator(&self, x: &Sl2Element) -> Result<Arc<UnitaryPropagator>> {
        let key = [x.a.to_bits(), x.b.to_bits(), x.c.to_bits()];
        if let Some(p) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(UnitaryPropagator::new(&self.rep.rep(x))?);
        self.cache
            .lock()
            .expect("cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&p));
        Ok(p)
    }

    /// `ρ(word) v`, rightmost factor first.
    pub fn apply_word(&self, word: &GroupWord, v: &[C64]) -> Result<Vec<C64>> {
        let mut out = v.to_vec();
        for f in word.factors().iter().rev() {
            if f.t == 0.0 {
                continue;
            }
            out = self.propagator(&f.element())?.apply(f.t, &out);
        }
        Ok(out)
    }

    /// `ρ(word) e_0` without the tail check.
    pub fn orbit_point_raw(&self, word: &GroupWord) -> Result<OsculatingVector> {
        let window = self.window();
        let coords = self.apply_word(word, &window.basis_vector(0))?;
        Ok(OsculatingVector { window, coords })
    }

    pub fn orbit_point(&self, word: &GroupWord) -> Result<OsculatingVector> {
        let v = self.orbit_point_raw(word)?;
        self.tail.check(&v)?;
        Ok(v)
    }

    /// Orbit point over `p`, reached through its Iwasawa word.
    pub fn at(&self, p: &HalfPlanePoint) -> Result<OsculatingVector> {
        self.orbit_point(&iwasawa_word(p))
    }

    pub fn grid(&self, grid: &[HalfPlanePoint]) -> Result<Vec<OsculatingVector>> {
        // Warm the two Iwasawa propagators so parallel workers share them.
        self.propagator(&crate::group::HOROCYCLIC)?;
        self.propagator(&Sl2Element::SIGMA2)?;
        self.exec
            .map(grid, |p| {
                self.at(p).map_err(|e| Error::GridPoint {
                    x: p.x,
                    y: p.y,
                    source: Box::new(e),
                })
            })
            .into_iter()
            .collect()
    }
}

pub fn orbit_point(
    s: SeriesParam,
    window: IndexWindow,
    word: &GroupWord,
) -> Result<OsculatingVector> {
    OrbitSampler::new(s, window)?.orbit_point(word)
}

/// Retries with doubled `N` on tail breaches, up to `max_half_width`.
pub fn orbit_point_auto(
    s: SeriesParam,
    half_width: usize,
    word: &GroupWord,
    max_half_width: usize,
) -> Result<OsculatingVector> {
    let mut n = half_width;
    loop {
        let window = IndexWindow::new(n, 2)?;
        match orbit_point(s, window, word) {
            Err(Error::TailBreach { suggested, .. }) if suggested <= max_half_width => {
                n = suggested
            }
            other => return other,
        }
    }
}

pub fn orbit_grid(
    s: SeriesParam,
    window: IndexWindow,
    grid: &[HalfPlanePoint],
) -> Result<Vec<OsculatingVector>> {
    OrbitSampler::new(s, window)?.grid(grid)
}

/// Sampled orbit in the JSON layout
/// `{"s":{...},"N":...,"points":[{"x","y","coords":[[re,im],...]}]}`.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSamples {
    pub s: SeriesParam,
    #[serde(rename = "N")]
    pub n: usize,
    pub points: Vec<OrbitSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitSample {
    pub x: f64,
    pub y: f64,
    pub coords: Vec<[f64; 2]>,
}

impl OrbitSamples {
    pub fn new(s: SeriesParam, grid: &[HalfPlanePoint], vectors: &[OsculatingVector]) -> Self {
        let n = vectors.first().map_or(0, |v| v.window.half_width);
        let points = grid
            .iter()
            .zip(vectors)
            .map(|(p, v)| OrbitSample {
                x: p.x,
                y: p.y,
                coords: v.coords.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect();
        Self { s, n, points }
    }

    pub fn to_csv(&self) -> String {
        let n = self.n as i64;
        let mut out = String::from("x,y");
        for k in -n..=n {
            out.push_str(&format!(",k_re_{k},k_im_{k}"));
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{},{}", p.x, p.y));
            for c in &p.coords {
                out.push_str(&format!(",{},{}", c[0], c[1]));
            }
            out.push('\n');
        }
        out
    }
}

/// Osculating frame along a constant-coframe flow. Column `k` (stored
/// contiguously) holds the coordinates of `u_k(q)` over `{e_j}`.
#[derive(Clone, Debug)]
pub struct FrameState {
    pub window: IndexWindow,
    pub columns: Vec<C64>,
    pub t: f64,
    pub coframe: [f64; 3],
    pub unitarity_drift: f64,
}

impl FrameState {
    pub fn identity(window: IndexWindow) -> Self {
        let n = window.dim();
        let mut columns = vec![ZERO; n * n];
        for p in 0..n {
            columns[p * n + p] = C64::new(1.0, 0.0);
        }
        Self {
            window,
            columns,
            t: 0.0,
            coframe: [0.0; 3],
            unitarity_drift: 0.0,
        }
    }

    pub fn column(&self, k: i64) -> &[C64] {
        let n = self.window.dim();
        let p = self.window.pos(k);
        &self.columns[p * n..(p + 1) * n]
    }

    pub fn column_vector(&self, k: i64) -> OsculatingVector {
        OsculatingVector {
            window: self.window,
            coords: self.column(k).to_vec(),
        }
    }

    /// `max |(U*U - I)_{jk}|`.
    pub fn unitarity_defect(&self, exec: Exec) -> f64 {
        let n = self.window.dim();
        exec.max_range(0..n, |j| {
            let cj = &self.columns[j * n..(j + 1) * n];
            let mut worst = 0.0_f64;
            for k in 0..n {
                let ck = &self.columns[k * n..(k + 1) * n];
                let g = hermitian_inner(ck, cj);
                let expect = if j == k { 1.0 } else { 0.0 };
                worst = nan_max(worst, (g - expect).norm());
            }
            worst
        })
    }
}

/// `U M` for the tridiagonal generator `M`: column `k` of the result is
/// `M_{k-1,k} U_{k-1} + M_{kk} U_k + M_{k+1,k} U_{k+1}`.
fn right_multiply(u: &[C64], g: &BandedOperator, out: &mut [C64], exec: Exec) {
    let n = g.dim();
    exec.fill_chunks(out, n, |p, col| {
        let own = &u[p * n..(p + 1) * n];
        let d = g.diag[p];
        for (o, x) in col.iter_mut().zip(own) {
            *o = d * x;
        }
        if p > 0 {
            let m = g.lower[p];
            if m != ZERO {
                for (o, x) in col.iter_mut().zip(&u[(p - 1) * n..p * n]) {
                    *o += m * x;
                }
            }
        }
        if p + 1 < n {
            let m = g.upper[p];
            if m != ZERO {
                for (o, x) in col.iter_mut().zip(&u[(p + 1) * n..(p + 2) * n]) {
                    *o += m * x;
                }
            }
        }
    });
}

/// Classical RK4 with fixed step for `y' = F(y)`, where `F` is linear and
/// writes into the output buffer.
struct Rk4Linear {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Linear {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![ZERO; len],
            k2: vec![ZERO; len],
            k3: vec![ZERO; len],
            k4: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }

    fn step(&mut self, y: &mut [C64], h: f64, f: &impl Fn(&[C64], &mut [C64])) {
        f(y, &mut self.k1);
        for ((t, a), b) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *t = a + 0.5 * h * b;
        }
        f(&self.tmp, &mut self.k2);
        for ((t, a), b) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *t = a + 0.5 * h * b;
        }
        f(&self.tmp, &mut self.k3);
        for ((t, a), b) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *t = a + h * b;
        }
        f(&self.tmp, &mut self.k4);
        let h6 = h / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h6 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Largest tolerated unitarity drift of [`frame_flow`].
pub const MAX_UNITARITY_DRIFT: f64 = 1e-6;

/// Integrates `dU/dt = U (ω¹F_1 + ω²F_2 + ρF_3)` from `U(0) = I`, i.e.
/// `du_k = (T_X u_k) ω + (T_Y u_k) ω̄ - i k u_k ρ` with `ω = ω¹ + iω²`.
pub fn frame_flow(
    s: SeriesParam,
    window: IndexWindow,
    coframe: [f64; 3],
    t_end: f64,
    steps: usize,
) -> Result<FrameState> {
    frame_flow_with(s, window, coframe, t_end, steps, Exec::default())
}

pub fn frame_flow_with(
    s: SeriesParam,
    window: IndexWindow,
    coframe: [f64; 3],
    t_end: f64,
    steps: usize,
    exec: Exec,
) -> Result<FrameState> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "frame_flow needs at least one step".into(),
        ));
    }
    let rep = Representation::new(s.curvature(), window)?;
    let g = rep.coframe_generator(coframe);
    let mut state = FrameState::identity(window);
    let h = t_end / steps as f64;
    let mut rk = Rk4Linear::new(state.columns.len());
    let f = |u: &[C64], out: &mut [C64]| right_multiply(u, &g, out, exec);
    for _ in 0..steps {
        rk.step(&mut state.columns, h, &f);
    }
    state.t = t_end;
    state.coframe = coframe;
    state.unitarity_drift = state.unitarity_defect(exec);
    if !(state.unitarity_drift <= MAX_UNITARITY_DRIFT) {
        return Err(Error::UnitarityDrift {
            drift: state.unitarity_drift,
            steps,
        });
    }
    Ok(state)
}

/// RK4 trajectory of `v' = G v` from `e_0`, sampled after every step.
///
/// RK4 applied to `U' = U G` from `U(0) = I` produces polynomials in `G`,
/// so this is exactly column 0 of [`frame_flow`].
pub fn flow_column_zero(
    rep: &Representation,
    coframe: [f64; 3],
    t_end: f64,
    steps: usize,
) -> Vec<Vec<C64>> {
    let g = rep.coframe_generator(coframe);
    let mut v = rep.window.basis_vector(0);
    let mut rk = Rk4Linear::new(v.len());
    let h = t_end / steps as f64;
    let f = |x: &[C64], out: &mut [C64]| out.copy_from_slice(&g.apply(x));
    let mut out = Vec::with_capacity(steps + 1);
    out.push(v.clone());
    for _ in 0..steps {
        rk.step(&mut v, h, &f);
        out.push(v.clone());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossValidation {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl CrossValidation {
    pub fn max(&self) -> f64 {
        nan_max(self.sigma1, self.sigma2)
    }
}

/// Max Hermitian-norm gap between the frame flow along coframe
/// `(1/√|K|, 0, 0)` and the orbit `exp(tσ_1) e_0`, and likewise for
/// `(0, 1/√|K|, 0)` against `exp(tσ_2) e_0`, over every RK4 step.
pub fn cross_validate(
    s: SeriesParam,
    window: IndexWindow,
    t_max: f64,
    steps: usize,
) -> Result<CrossValidation> {
    cross_validate_with(&OrbitSampler::new(s, window)?, t_max, steps)
}

pub fn cross_validate_with(
    sampler: &OrbitSampler,
    t_max: f64,
    steps: usize,
) -> Result<CrossValidation> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "cross_validate needs at least one step".into(),
        ));
    }
    let rep = sampler.representation();
    let inv = 1.0 / (-rep.curvature).sqrt();
    let e0 = rep.window.basis_vector(0);
    let h = t_max / steps as f64;
    let gap = |coframe: [f64; 3], x: Sl2Element| -> Result<f64> {
        let flow = flow_column_zero(rep, coframe, t_max, steps);
        let prop = sampler.propagator(&x)?;
        Ok(sampler
            .exec()
            .map_range(0..flow.len(), |i| {
                distance(&flow[i], &prop.apply(i as f64 * h, &e0))
            })
            .into_iter()
            .fold(0.0, nan_max))
    };
    Ok(CrossValidation {
        sigma1: gap([inv, 0.0, 0.0], Sl2Element::SIGMA1)?,
        sigma2: gap([0.0, inv, 0.0], Sl2Element::SIGMA2)?,
    })
}
