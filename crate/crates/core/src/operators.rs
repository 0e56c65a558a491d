//! Truncated ladder operators on the osculating basis `{e_k}`.
//!
//! `T_X` raises the grade by one, `T_Y` lowers it, `T_Z` is the grade. The
//! skew-Hermitian combinations `F_1 = T_X + T_Y`, `F_2 = i(T_X - T_Y)` and
//! `F_3 = -i T_Z` span a representation of sl(2, R) through
//! `σ_1 ↦ F_1/√|K|`, `σ_2 ↦ F_2/√|K|`, `σ_3 ↦ F_3`.
//!
//! Every operator lives on the window `{-N, …, N}`; entries that would leave
//! the window are dropped. Identities that involve products are checked on
//! interior columns only, and each check states how many bands it consumes.

use serde::Serialize;

use crate::exec::{nan_max, Exec};
use crate::linalg::{C64, I};
use crate::params::c_coeff;
use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);

/// The index window `{-N, …, N}` plus the interior margin used by identity
/// checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexWindow {
    pub half_width: usize,
    pub margin: usize,
}

impl IndexWindow {
    pub fn new(half_width: usize, margin: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::WindowTooSmall {
                half_width,
                reason: "half-width must be positive".into(),
            });
        }
        if margin > half_width {
            return Err(Error::WindowTooSmall {
                half_width,
                reason: format!("margin {margin} exceeds the half-width"),
            });
        }
        Ok(Self { half_width, margin })
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn n(&self) -> i64 {
        self.half_width as i64
    }

    /// Storage position of index `k`.
    pub fn pos(&self, k: i64) -> usize {
        debug_assert!(self.contains(k), "index {k} outside window");
        (k + self.n()) as usize
    }

    pub fn index(&self, pos: usize) -> i64 {
        pos as i64 - self.n()
    }

    pub fn contains(&self, k: i64) -> bool {
        k.abs() <= self.n()
    }

    pub fn is_interior(&self, k: i64) -> bool {
        k.abs() <= self.n() - self.margin as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let n = self.n();
        -n..=n
    }

    pub fn basis_vector(&self, k: i64) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim()];
        v[self.pos(k)] = C64::new(1.0, 0.0);
        v
    }

    fn require_margin(&self, required: usize) -> Result<()> {
        if self.margin < required {
            return Err(Error::InsufficientMargin {
                required,
                actual: self.margin,
            });
        }
        Ok(())
    }
}

/// Tridiagonal complex operator on an [`IndexWindow`].
///
/// `diag[pos(k)]` is entry `(k, k)`, `upper[pos(k)]` is entry `(k+1, k)`
/// (grade-raising), `lower[pos(k)]` is entry `(k-1, k)` (grade-lowering).
/// `upper[pos(N)]` and `lower[pos(-N)]` are always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedOperator {
    pub window: IndexWindow,
    pub diag: Vec<C64>,
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
}

impl BandedOperator {
    pub fn zero(window: IndexWindow) -> Self {
        let n = window.dim();
        Self {
            window,
            diag: vec![ZERO; n],
            upper: vec![ZERO; n],
            lower: vec![ZERO; n],
        }
    }

    /// Builds from per-index band values; out-of-window entries are dropped.
    pub fn from_fn(
        window: IndexWindow,
        diag: impl Fn(i64) -> C64,
        upper: impl Fn(i64) -> C64,
        lower: impl Fn(i64) -> C64,
    ) -> Self {
        let mut op = Self::zero(window);
        let n = window.n();
        for k in window.indices() {
            let p = window.pos(k);
            op.diag[p] = diag(k);
            if k < n {
                op.upper[p] = upper(k);
            }
            if k > -n {
                op.lower[p] = lower(k);
            }
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Entry `(j, k)`; zero off the three bands or outside the window.
    pub fn entry(&self, j: i64, k: i64) -> C64 {
        let w = &self.window;
        if !w.contains(j) || !w.contains(k) {
            return ZERO;
        }
        let p = w.pos(k);
        match j - k {
            0 => self.diag[p],
            1 => self.upper[p],
            -1 => self.lower[p],
            _ => ZERO,
        }
    }

    /// `A v` on the window.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![ZERO; n];
        for p in 0..n {
            let x = v[p];
            if x == ZERO {
                continue;
            }
            out[p] += self.diag[p] * x;
            if p + 1 < n {
                out[p + 1] += self.upper[p] * x;
            }
            if p > 0 {
                out[p - 1] += self.lower[p] * x;
            }
        }
        out
    }

    /// Entrywise modulus, as a real operator.
    pub fn modulus(&self) -> Self {
        let m = |v: &[C64]| v.iter().map(|z| C64::new(z.norm(), 0.0)).collect();
        Self {
            window: self.window,
            diag: m(&self.diag),
            upper: m(&self.upper),
            lower: m(&self.lower),
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        let f = |v: &Vec<C64>| v.iter().map(|x| x * a).collect();
        Self {
            window: self.window,
            diag: f(&self.diag),
            upper: f(&self.upper),
            lower: f(&self.lower),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.window.half_width, other.window.half_width);
        let f = |a: &Vec<C64>, b: &Vec<C64>| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Self {
            window: self.window,
            diag: f(&self.diag, &other.diag),
            upper: f(&self.upper, &other.upper),
            lower: f(&self.lower, &other.lower),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// `max |A_{jk} + conj(A_{kj})|` over the stored bands.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for p in 0..n {
            worst = worst.max((self.diag[p] + self.diag[p].conj()).norm());
            if p + 1 < n {
                // (k+1, k) against (k, k+1)
                worst = worst.max((self.upper[p] + self.lower[p + 1].conj()).norm());
            }
        }
        worst
    }

    /// `max |conj(A_{-j,-k}) - A_{jk}|`: failure of `A` to commute with the
    /// antilinear involution `x_k ↦ conj(x_{-k})`.
    pub fn conjugation_defect(&self) -> f64 {
        let w = self.window;
        let mut worst = 0.0_f64;
        for k in w.indices() {
            for j in (k - 1)..=(k + 1) {
                if w.contains(j) {
                    let d = (self.entry(-j, -k).conj() - self.entry(j, k)).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let n = self.dim();
        let w = self.window;
        let mut m = vec![vec![ZERO; n]; n];
        for j in w.indices() {
            for k in w.indices() {
                m[w.pos(j)][w.pos(k)] = self.entry(j, k);
            }
        }
        m
    }
}

/// Element `a σ_1 + b σ_2 + c σ_3` of sl(2, R) with
/// `σ_1 = [[0, ½], [½, 0]]`, `σ_2 = [[-½, 0], [0, ½]]`,
/// `σ_3 = [[0, ½], [-½, 0]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct Sl2Element {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sl2Element {
    pub const SIGMA1: Self = Self::new(1.0, 0.0, 0.0);
    pub const SIGMA2: Self = Self::new(0.0, 1.0, 0.0);
    pub const SIGMA3: Self = Self::new(0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn coefficients(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn scale(&self, t: f64) -> Self {
        Self::new(self.a * t, self.b * t, self.c * t)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }

    /// Lie bracket from `[σ_1,σ_2] = σ_3`, `[σ_2,σ_3] = -σ_1`,
    /// `[σ_3,σ_1] = -σ_2`.
    pub fn bracket(&self, o: &Self) -> Self {
        Self::new(
            -(self.b * o.c - self.c * o.b),
            -(self.c * o.a - self.a * o.c),
            self.a * o.b - self.b * o.a,
        )
    }

    /// The 2×2 matrix `[[p, q], [r, s]]` as `[p, q, r, s]`.
    pub fn matrix(&self) -> [f64; 4] {
        [
            -0.5 * self.b,
            0.5 * (self.a + self.c),
            0.5 * (self.a - self.c),
            0.5 * self.b,
        ]
    }
}

/// `α_k`, the `(k+1, k)` entry of `T_X`.
pub fn raising_coefficient(curvature: f64, k: i64) -> f64 {
    match k {
        k if k <= -2 => -c_coeff(curvature, (-k) as usize).sqrt(),
        -1 => -std::f64::consts::FRAC_1_SQRT_2,
        0 => std::f64::consts::FRAC_1_SQRT_2,
        k => c_coeff(curvature, (k + 1) as usize).sqrt(),
    }
}

/// `β_k`, the `(k-1, k)` entry of `T_Y`.
pub fn lowering_coefficient(curvature: f64, k: i64) -> f64 {
    match k {
        k if k <= -1 => c_coeff(curvature, (1 - k) as usize).sqrt(),
        0 => std::f64::consts::FRAC_1_SQRT_2,
        1 => -std::f64::consts::FRAC_1_SQRT_2,
        k => -c_coeff(curvature, k as usize).sqrt(),
    }
}

/// `(T_X, T_Y, T_Z)` truncated to `window`.
pub fn build_generators(
    curvature: f64,
    window: IndexWindow,
) -> Result<(BandedOperator, BandedOperator, BandedOperator)> {
    check_curvature(curvature)?;
    if window.half_width < 2 {
        return Err(Error::WindowTooSmall {
            half_width: window.half_width,
            reason: "ladder operators need N >= 2".into(),
        });
    }
    let re = |x: f64| C64::new(x, 0.0);
    let t_x = BandedOperator::from_fn(
        window,
        |_| ZERO,
        |k| re(raising_coefficient(curvature, k)),
        |_| ZERO,
    );
    let t_y = BandedOperator::from_fn(
        window,
        |_| ZERO,
        |_| ZERO,
        |k| re(lowering_coefficient(curvature, k)),
    );
    let t_z = BandedOperator::from_fn(window, |k| re(k as f64), |_| ZERO, |_| ZERO);
    Ok((t_x, t_y, t_z))
}

fn check_curvature(curvature: f64) -> Result<()> {
    if !(curvature < 0.0) || !curvature.is_finite() {
        return Err(Error::NonNegativeCurvature(curvature));
    }
    Ok(())
}

/// `(F_1, F_2, F_3) = (T_X + T_Y, i(T_X - T_Y), -i T_Z)`.
pub fn build_skew_basis(
    curvature: f64,
    window: IndexWindow,
) -> Result<(BandedOperator, BandedOperator, BandedOperator)> {
    let (t_x, t_y, t_z) = build_generators(curvature, window)?;
    Ok(skew_from_generators(&t_x, &t_y, &t_z))
}

fn skew_from_generators(
    t_x: &BandedOperator,
    t_y: &BandedOperator,
    t_z: &BandedOperator,
) -> (BandedOperator, BandedOperator, BandedOperator) {
    let f1 = t_x.add(t_y);
    let f2 = t_x.sub(t_y).scale(I);
    let f3 = t_z.scale(-I);
    (f1, f2, f3)
}

/// All truncated operators of one curvature on one window.
#[derive(Clone, Debug)]
pub struct Representation {
    pub curvature: f64,
    pub window: IndexWindow,
    pub t_x: BandedOperator,
    pub t_y: BandedOperator,
    pub t_z: BandedOperator,
    pub f1: BandedOperator,
    pub f2: BandedOperator,
    pub f3: BandedOperator,
}

impl Representation {
    pub fn new(curvature: f64, window: IndexWindow) -> Result<Self> {
        let (t_x, t_y, t_z) = build_generators(curvature, window)?;
        let (f1, f2, f3) = skew_from_generators(&t_x, &t_y, &t_z);
        Ok(Self {
            curvature,
            window,
            t_x,
            t_y,
            t_z,
            f1,
            f2,
            f3,
        })
    }

    /// `φ(aσ_1 + bσ_2 + cσ_3) = (a F_1 + b F_2)/√|K| + c F_3`.
    pub fn rep(&self, x: &Sl2Element) -> BandedOperator {
        let inv = 1.0 / (-self.curvature).sqrt();
        self.f1
            .scale(C64::new(x.a * inv, 0.0))
            .add(&self.f2.scale(C64::new(x.b * inv, 0.0)))
            .add(&self.f3.scale(C64::new(x.c, 0.0)))
    }

    /// `ω¹ F_1 + ω² F_2 + ρ F_3`, the generator of the moving-frame flow for
    /// a constant coframe.
    pub fn coframe_generator(&self, coframe: [f64; 3]) -> BandedOperator {
        self.f1
            .scale(C64::new(coframe[0], 0.0))
            .add(&self.f2.scale(C64::new(coframe[1], 0.0)))
            .add(&self.f3.scale(C64::new(coframe[2], 0.0)))
    }
}

/// `φ(X)` on a fresh representation.
pub fn sl2_rep(curvature: f64, window: IndexWindow, x: &Sl2Element) -> Result<BandedOperator> {
    Ok(Representation::new(curvature, window)?.rep(x))
}

/// One operator identity evaluated column by column.
///
/// Each defect entry is divided by the summed magnitude of the terms that
/// cancel in it (floored at 1), so the figure is an accumulation bound that
/// stays meaningful when the ladder entries grow like `N`. The raw absolute
/// error is kept alongside.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub name: String,
    /// Max scaled entry error over interior columns.
    pub interior: f64,
    /// Max absolute entry error over interior columns.
    pub interior_absolute: f64,
    /// Boundary columns (excluded from `interior`) whose defect is nonzero.
    pub contaminated_columns: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub curvature: f64,
    pub half_width: usize,
    pub margin: usize,
    pub residuals: Vec<IdentityResidual>,
}

impl ResidualReport {
    pub fn max_interior(&self) -> f64 {
        self.residuals.iter().map(|r| r.interior).fold(0.0, nan_max)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

/// A linear map applied to basis columns.
type ColumnMap<'a> = dyn Fn(&[C64]) -> Vec<C64> + Sync + Send + 'a;

/// `defect` evaluates the identity; `terms` evaluates the same expression
/// with every operator and coefficient replaced by its modulus.
fn scan_identity(
    window: IndexWindow,
    exec: Exec,
    name: &str,
    defect: &ColumnMap,
    terms: &ColumnMap,
) -> IdentityResidual {
    const BOUNDARY_EPS: f64 = 1e-12;
    let per_column = exec.map_range(0..window.dim(), |p| {
        let e = window.basis_vector(window.index(p));
        let d = defect(&e);
        let m = terms(&e);
        d.iter().zip(&m).fold((0.0, 0.0), |(scaled, abs), (x, y)| {
            let a = x.norm();
            (nan_max(scaled, a / y.re.max(1.0)), nan_max(abs, a))
        })
    });
    let mut interior = 0.0_f64;
    let mut interior_absolute = 0.0_f64;
    let mut contaminated = Vec::new();
    for (p, (scaled, abs)) in per_column.into_iter().enumerate() {
        let k = window.index(p);
        if window.is_interior(k) {
            interior = nan_max(interior, scaled);
            interior_absolute = nan_max(interior_absolute, abs);
        } else if abs > BOUNDARY_EPS {
            contaminated.push(k);
        }
    }
    IdentityResidual {
        name: name.to_string(),
        interior,
        interior_absolute,
        contaminated_columns: contaminated,
    }
}

fn commutator(a: &BandedOperator, b: &BandedOperator, v: &[C64]) -> Vec<C64> {
    let ab = a.apply(&b.apply(v));
    let ba = b.apply(&a.apply(v));
    ab.iter().zip(&ba).map(|(x, y)| x - y).collect()
}

/// `|a||b|v + |b||a|v`, the magnitude counterpart of [`commutator`].
fn commutator_terms(a: &BandedOperator, b: &BandedOperator, v: &[C64]) -> Vec<C64> {
    let ab = a.apply(&b.apply(v));
    let ba = b.apply(&a.apply(v));
    ab.iter().zip(&ba).map(|(x, y)| x + y).collect()
}

fn axpy(a: &[C64], scale: C64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + scale * y).collect()
}

/// `[a, b] v + c·t v`, as a (defect, terms) pair of column maps.
fn bracket_identity<'a>(
    a: &'a BandedOperator,
    b: &'a BandedOperator,
    c: C64,
    t: &'a BandedOperator,
    abs: [&'a BandedOperator; 3],
) -> (Box<ColumnMap<'a>>, Box<ColumnMap<'a>>) {
    let [aa, ab, at] = abs;
    let cn = C64::new(c.norm(), 0.0);
    (
        Box::new(move |v| axpy(&commutator(a, b, v), c, &t.apply(v))),
        Box::new(move |v| axpy(&commutator_terms(aa, ab, v), cn, &at.apply(v))),
    )
}

/// Bracket relations of the ladder operators, of the skew basis and of the
/// lifted sl(2, R) basis, on interior columns. Needs margin ≥ 1.
pub fn commutator_residuals(curvature: f64, window: IndexWindow) -> Result<ResidualReport> {
    commutator_residuals_with(curvature, window, Exec::default())
}

pub fn commutator_residuals_with(
    curvature: f64,
    window: IndexWindow,
    exec: Exec,
) -> Result<ResidualReport> {
    window.require_margin(1)?;
    let r = Representation::new(curvature, window)?;
    let abs_k = -curvature;
    let one = C64::new(1.0, 0.0);
    let re = |x: f64| C64::new(x, 0.0);
    let (tx, ty, tz) = (r.t_x.modulus(), r.t_y.modulus(), r.t_z.modulus());
    let (f1, f2, f3) = (r.f1.modulus(), r.f2.modulus(), r.f3.modulus());

    let mut residuals = Vec::new();
    let mut push = |name: &str, (d, m): (Box<ColumnMap>, Box<ColumnMap>)| {
        residuals.push(scan_identity(window, exec, name, &*d, &*m))
    };

    push(
        "[T_Z,T_X]-T_X",
        bracket_identity(&r.t_z, &r.t_x, -one, &r.t_x, [&tz, &tx, &tx]),
    );
    push(
        "[T_Z,T_Y]+T_Y",
        bracket_identity(&r.t_z, &r.t_y, one, &r.t_y, [&tz, &ty, &ty]),
    );
    push(
        "[T_X,T_Y]+(K/2)T_Z",
        bracket_identity(&r.t_x, &r.t_y, re(curvature / 2.0), &r.t_z, [&tx, &ty, &tz]),
    );
    push(
        "[F_1,F_2]-|K|F_3",
        bracket_identity(&r.f1, &r.f2, re(-abs_k), &r.f3, [&f1, &f2, &f3]),
    );
    push(
        "[F_2,F_3]+F_1",
        bracket_identity(&r.f2, &r.f3, one, &r.f1, [&f2, &f3, &f1]),
    );
    push(
        "[F_3,F_1]+F_2",
        bracket_identity(&r.f3, &r.f1, one, &r.f2, [&f3, &f1, &f2]),
    );

    let basis = [Sl2Element::SIGMA1, Sl2Element::SIGMA2, Sl2Element::SIGMA3];
    let reps: Vec<BandedOperator> = basis.iter().map(|x| r.rep(x)).collect();
    let moduli: Vec<BandedOperator> = reps.iter().map(BandedOperator::modulus).collect();
    for (i, j) in [(0usize, 1usize), (1, 2), (2, 0)] {
        let target = r.rep(&basis[i].bracket(&basis[j]));
        let target_mod = target.modulus();
        let name = format!(
            "[phi(s{}),phi(s{})]-phi([s{},s{}])",
            i + 1,
            j + 1,
            i + 1,
            j + 1
        );
        push(
            &name,
            bracket_identity(
                &reps[i],
                &reps[j],
                -one,
                &target,
                [&moduli[i], &moduli[j], &target_mod],
            ),
        );
    }

    Ok(ResidualReport {
        curvature,
        half_width: window.half_width,
        margin: window.margin,
        residuals,
    })
}

/// `Δ_op = 2(T_X T_Y + T_Y T_X)` and `Φ_op = Δ_op - K T_Z²` on interior
/// columns: `Δ_op e_0 = -2 e_0`, `Φ_op = -2`, and `Φ_op` commutes with
/// `T_X`, `T_Y`, `T_Z`. Needs margin ≥ 2.
pub fn graded_laplacian_check(curvature: f64, window: IndexWindow) -> Result<ResidualReport> {
    graded_laplacian_check_with(curvature, window, Exec::default())
}

pub fn graded_laplacian_check_with(
    curvature: f64,
    window: IndexWindow,
    exec: Exec,
) -> Result<ResidualReport> {
    window.require_margin(2)?;
    let r = Representation::new(curvature, window)?;
    let (mx, my, mz) = (r.t_x.modulus(), r.t_y.modulus(), r.t_z.modulus());
    // `2(XY + YX) - k Z²`; since K < 0 the moduli version needs no sign change
    let casimir_of =
        |x: &BandedOperator, y: &BandedOperator, z: &BandedOperator, k: f64, v: &[C64]| {
            let xy = x.apply(&y.apply(v));
            let yx = y.apply(&x.apply(v));
            let zz = z.apply(&z.apply(v));
            xy.iter()
                .zip(&yx)
                .zip(&zz)
                .map(|((a, b), c)| 2.0 * (a + b) - k * c)
                .collect::<Vec<C64>>()
        };
    let casimir = |v: &[C64]| casimir_of(&r.t_x, &r.t_y, &r.t_z, curvature, v);
    let casimir_terms = |v: &[C64]| casimir_of(&mx, &my, &mz, curvature, v);
    let two = C64::new(2.0, 0.0);

    let e0 = window.basis_vector(0);
    let lap_e0 = axpy(&casimir_of(&r.t_x, &r.t_y, &r.t_z, 0.0, &e0), two, &e0);
    let lap_e0 = lap_e0.iter().map(|z| z.norm()).fold(0.0, nan_max);

    let mut residuals = vec![IdentityResidual {
        name: "Delta e_0 + 2 e_0".into(),
        interior: lap_e0,
        interior_absolute: lap_e0,
        contaminated_columns: Vec::new(),
    }];
    let mut push = |name: &str, d: &ColumnMap, m: &ColumnMap| {
        residuals.push(scan_identity(window, exec, name, d, m))
    };
    push("Phi + 2", &|v| axpy(&casimir(v), two, v), &|v| {
        axpy(&casimir_terms(v), two, v)
    });
    for (label, op, op_mod) in [
        ("T_X", &r.t_x, &mx),
        ("T_Y", &r.t_y, &my),
        ("T_Z", &r.t_z, &mz),
    ] {
        push(
            &format!("[Phi,{label}]"),
            &|v| {
                let a = casimir(&op.apply(v));
                let b = op.apply(&casimir(v));
                a.iter().zip(&b).map(|(x, y)| x - y).collect()
            },
            &|v| {
                let a = casimir_terms(&op_mod.apply(v));
                let b = op_mod.apply(&casimir_terms(v));
                a.iter().zip(&b).map(|(x, y)| x + y).collect()
            },
        );
    }
    Ok(ResidualReport {
        curvature,
        half_width: window.half_width,
        margin: window.margin,
        residuals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CarlemanRow {
    pub n: usize,
    pub partial_sum: f64,
    pub ratio: f64,
}

/// Off-diagonal sign check of `T_X - T_Y` after flipping `e_{1-2k}`
/// (`k ≥ 1`), i.e. of the Jacobi matrix used for Carleman's test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaugeCheck {
    pub half_width: usize,
    pub min_off_diagonal: f64,
    pub symmetric_defect: f64,
    pub all_positive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CarlemanScan {
    pub curvature: f64,
    pub rows: Vec<CarlemanRow>,
    pub gauge: GaugeCheck,
}

impl CarlemanScan {
    pub fn last(&self) -> &CarlemanRow {
        self.rows.last().expect("scan has rows")
    }

    pub fn at(&self, n: usize) -> Option<&CarlemanRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,partial_sum,ratio\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{}\n", r.n, r.partial_sum, r.ratio));
        }
        s
    }
}

/// Checkpoints `100, 200, 500, 1000, …` up to and including `nmax`.
fn carleman_checkpoints(nmax: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 100usize;
    'outer: loop {
        for m in [1usize, 2, 5] {
            let n = decade * m;
            if n >= nmax {
                break 'outer;
            }
            out.push(n);
        }
        decade *= 10;
    }
    out.push(nmax);
    out
}

/// `S(N) = Σ_{2≤k≤N} 1/√c_k` at logarithmic checkpoints, with the ratio
/// `S(N) / ((2/√|K|) ln N)`, plus the gauged Jacobi-matrix sign check.
pub fn carleman_scan(curvature: f64, nmax: usize) -> Result<CarlemanScan> {
    carleman_scan_with(curvature, nmax, Exec::default())
}

pub fn carleman_scan_with(curvature: f64, nmax: usize, exec: Exec) -> Result<CarlemanScan> {
    check_curvature(curvature)?;
    if nmax < 100 {
        return Err(Error::InvalidArgument(format!(
            "Carleman scan needs nmax >= 100, got {nmax}"
        )));
    }
    // terms[i] = 1/√c_{i+2}; fixed chunking keeps the summation order (and
    // hence every digit) independent of the strategy.
    const CHUNK: usize = 4096;
    let mut terms = vec![0.0; nmax - 1];
    exec.fill_chunks(&mut terms, CHUNK, |ci, chunk| {
        for (j, t) in chunk.iter_mut().enumerate() {
            let k = ci * CHUNK + j + 2;
            *t = 1.0 / c_coeff(curvature, k).sqrt();
        }
    });
    let scale = 2.0 / (-curvature).sqrt();
    let mut rows = Vec::new();
    let mut sum = 0.0;
    let mut k = 2usize;
    for n in carleman_checkpoints(nmax) {
        while k <= n {
            sum += terms[k - 2];
            k += 1;
        }
        rows.push(CarlemanRow {
            n,
            partial_sum: sum,
            ratio: sum / (scale * (n as f64).ln()),
        });
    }
    let gauge = gauged_jacobi_check(curvature, nmax.min(1000))?;
    Ok(CarlemanScan {
        curvature,
        rows,
        gauge,
    })
}

/// Builds `T_X - T_Y` on `{-N, …, N}`, flips the sign of `e_{1-2k}` for
/// `k ≥ 1` and scans the resulting off-diagonal.
pub fn gauged_jacobi_check(curvature: f64, half_width: usize) -> Result<GaugeCheck> {
    let window = IndexWindow::new(half_width, 0)?;
    let (t_x, t_y, _) = build_generators(curvature, window)?;
    let jacobi = t_x.sub(&t_y);
    let sign = |k: i64| if k < 0 && k % 2 != 0 { -1.0 } else { 1.0 };
    let mut min_off = f64::INFINITY;
    let mut sym = 0.0_f64;
    let mut all_real = true;
    for k in -window.n()..window.n() {
        let below = jacobi.entry(k + 1, k) * (sign(k) * sign(k + 1));
        let above = jacobi.entry(k, k + 1) * (sign(k) * sign(k + 1));
        all_real &= below.im == 0.0 && above.im == 0.0;
        sym = sym.max((below - above).norm());
        min_off = min_off.min(below.re);
    }
    Ok(GaugeCheck {
        half_width,
        min_off_diagonal: min_off,
        symmetric_defect: sym,
        all_positive: all_real && min_off > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn win(n: usize, m: usize) -> IndexWindow {
        IndexWindow::new(n, m).unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn generator_actions_on_low_grades() {
        let w = win(8, 1);
        let (tx, ty, tz) = build_generators(-8.0, w).unwrap();
        let e0 = w.basis_vector(0);
        let x = tx.apply(&e0);
        assert!(close(x[w.pos(1)], C64::new(SQRT_HALF, 0.0)));
        assert_eq!(x.iter().filter(|z| z.norm() > 0.0).count(), 1);
        let y = ty.apply(&e0);
        assert!(close(y[w.pos(-1)], C64::new(SQRT_HALF, 0.0)));
        let x1 = tx.apply(&w.basis_vector(1));
        assert!((x1[w.pos(2)].re - 4.5f64.sqrt()).abs() < 1e-15);
        assert!((x1[w.pos(2)].re - 2.121320).abs() < 1e-6);
        let z = tz.apply(&w.basis_vector(-3));
        assert_eq!(z[w.pos(-3)], C64::new(-3.0, 0.0));
    }

    #[test]
    fn truncation_drops_outgoing_entries() {
        let w = win(4, 0);
        let (tx, ty, _) = build_generators(-8.0, w).unwrap();
        assert_eq!(tx.upper[w.pos(4)], ZERO);
        assert_eq!(ty.lower[w.pos(-4)], ZERO);
        assert!(tx.apply(&w.basis_vector(4)).iter().all(|z| *z == ZERO));
    }

    #[test]
    fn skew_basis_entries() {
        let w = win(6, 1);
        let (f1, f2, f3) = build_skew_basis(-8.0, w).unwrap();
        assert!(f3.apply(&w.basis_vector(0)).iter().all(|z| *z == ZERO));
        assert!(close(f1.entry(1, 0), C64::new(SQRT_HALF, 0.0)));
        assert!(close(f1.entry(-1, 0), C64::new(SQRT_HALF, 0.0)));
        assert!(close(f2.entry(2, 1), C64::new(0.0, 4.5f64.sqrt())));
        assert!(close(f2.entry(0, 1), C64::new(0.0, SQRT_HALF)));
        for f in [&f1, &f2, &f3] {
            assert_eq!(f.skew_hermitian_defect(), 0.0);
            assert_eq!(f.conjugation_defect(), 0.0);
        }
    }

    #[test]
    fn representation_examples() {
        let w = win(5, 1);
        let r = Representation::new(-8.0, w).unwrap();
        assert_eq!(r.rep(&Sl2Element::SIGMA3), r.f3);
        let zero = r.rep(&Sl2Element::default());
        assert!(zero
            .diag
            .iter()
            .chain(&zero.upper)
            .chain(&zero.lower)
            .all(|z| z.norm() == 0.0));
        let s1 = r.rep(&Sl2Element::SIGMA1);
        let expect = r.f1.scale(C64::new(1.0 / (2.0 * 2f64.sqrt()), 0.0));
        for k in w.indices() {
            for j in w.indices() {
                assert!((s1.entry(j, k) - expect.entry(j, k)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn sl2_structure_constants() {
        let [s1, s2, s3] = [Sl2Element::SIGMA1, Sl2Element::SIGMA2, Sl2Element::SIGMA3];
        assert_eq!(s1.bracket(&s2), s3);
        assert_eq!(s2.bracket(&s3), s1.scale(-1.0));
        assert_eq!(s3.bracket(&s1), s2.scale(-1.0));
        // matrix commutators agree with the structure constants
        let mul = |x: [f64; 4], y: [f64; 4]| {
            [
                x[0] * y[0] + x[1] * y[2],
                x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2],
                x[2] * y[1] + x[3] * y[3],
            ]
        };
        for x in [s1, s2, s3] {
            for y in [s1, s2, s3] {
                let (a, b) = (mul(x.matrix(), y.matrix()), mul(y.matrix(), x.matrix()));
                let comm = [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
                assert_eq!(comm, x.bracket(&y).matrix());
            }
        }
    }

    #[test]
    fn hand_evaluated_brackets() {
        let w = win(6, 1);
        let r = Representation::new(-8.0, w).unwrap();
        let e0 = w.basis_vector(0);
        let c = commutator(&r.t_z, &r.t_x, &e0);
        assert!(close(c[w.pos(1)], C64::new(SQRT_HALF, 0.0)));
        assert!(commutator(&r.t_x, &r.t_y, &e0)
            .iter()
            .all(|z| z.norm() < 1e-15));
        let e1 = w.basis_vector(1);
        let c = commutator(&r.t_x, &r.t_y, &e1);
        // (c_2 - 1/2) e_1 = 4 e_1 = -(K/2) e_1
        assert!((c[w.pos(1)] - C64::new(4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn residual_report_flags_boundary() {
        let report = commutator_residuals(-8.0, win(16, 1)).unwrap();
        assert_eq!(report.residuals.len(), 9);
        assert!(report.max_interior() <= 1e-12, "{report:?}");
        let xy = report.get("[T_X,T_Y]+(K/2)T_Z").unwrap();
        assert_eq!(xy.contaminated_columns, vec![-16, 16]);
        assert!(matches!(
            commutator_residuals(-8.0, win(16, 0)),
            Err(Error::InsufficientMargin {
                required: 1,
                actual: 0
            })
        ));
    }

    #[test]
    fn casimir_is_minus_two() {
        let w = win(12, 2);
        let report = graded_laplacian_check(-8.0, w).unwrap();
        assert!(report.max_interior() <= 1e-11, "{report:?}");
        assert_eq!(report.get("[Phi,T_Z]").unwrap().interior, 0.0);
        // brute-force dense oracle for Φ e_1
        let r = Representation::new(-8.0, w).unwrap();
        let dense = |op: &BandedOperator| op.to_dense();
        let (x, y, z) = (dense(&r.t_x), dense(&r.t_y), dense(&r.t_z));
        let n = w.dim();
        let mm = |a: &Vec<Vec<C64>>, b: &Vec<Vec<C64>>| {
            let mut out = vec![vec![ZERO; n]; n];
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        out[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            out
        };
        let (xy, yx, zz) = (mm(&x, &y), mm(&y, &x), mm(&z, &z));
        let p = w.pos(1);
        let phi_11 = 2.0 * (xy[p][p] + yx[p][p]) + 8.0 * zz[p][p];
        assert!((phi_11 - C64::new(-2.0, 0.0)).norm() < 1e-13);
        assert!(graded_laplacian_check(-8.0, win(12, 1)).is_err());
    }

    #[test]
    fn carleman_first_term_and_gauge() {
        let scan = carleman_scan(-8.0, 1000).unwrap();
        let b2 = c_coeff(-8.0, 2).sqrt();
        assert!((b2 - 2.12132).abs() < 1e-5);
        assert!((1.0 / b2 - 0.47140).abs() < 1e-5);
        assert_eq!(scan.rows[0].n, 100);
        assert_eq!(scan.last().n, 1000);
        assert!(scan
            .rows
            .windows(2)
            .all(|w| w[1].partial_sum > w[0].partial_sum));
        assert!(scan.gauge.all_positive);
        assert_eq!(scan.gauge.half_width, 1000);
        assert_eq!(scan.gauge.symmetric_defect, 0.0);
        assert!(scan.to_csv().starts_with("N,partial_sum,ratio\n100,"));
    }

    #[test]
    fn checkpoints() {
        assert_eq!(carleman_checkpoints(1000), vec![100, 200, 500, 1000]);
        assert_eq!(carleman_checkpoints(150), vec![100, 150]);
        assert_eq!(carleman_checkpoints(100), vec![100]);
    }
}
