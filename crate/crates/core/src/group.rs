//! PSL(2, R) arithmetic on the upper half-plane.

use serde::{Deserialize, Serialize};

use crate::operators::Sl2Element;
use crate::{Error, Result};

/// Real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_array(m: [f64; 4]) -> Self {
        Self::new(m[0], m[1], m[2], m[3])
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a)
    }

    /// Representative with the first nonzero entry of the top row positive.
    pub fn canonical(&self) -> Self {
        let lead = if self.a != 0.0 { self.a } else { self.b };
        if lead < 0.0 {
            self.scale(-1.0)
        } else {
            *self
        }
    }

    /// Max entry difference after canonicalising both, i.e. distance in
    /// PSL(2, R) rather than SL(2, R).
    pub fn projective_distance(&self, o: &Self) -> f64 {
        let (x, y) = (self.canonical(), o.canonical());
        [x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `exp(tX)` in closed form.
///
/// Every traceless `M = tX` satisfies `M² = δ I` with `δ = -det M`, so the
/// exponential is `cosh(√δ) I + sinh(√δ)/√δ M` (hyperbolic),
/// `cos(√-δ) I + sin(√-δ)/√-δ M` (elliptic) or `I + M` (parabolic).
pub fn sl2_exp(x: &Sl2Element, t: f64) -> Mat2 {
    let m = Mat2::from_array(x.scale(t).matrix());
    let delta = -m.det();
    let (even, odd) = if delta > 0.0 {
        let r = delta.sqrt();
        (r.cosh(), sinhc(r))
    } else if delta < 0.0 {
        let r = (-delta).sqrt();
        (r.cos(), sinc(r))
    } else {
        (1.0, 1.0)
    };
    Mat2::IDENTITY.scale(even).add(&m.scale(odd))
}

fn sinhc(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 + r * r / 6.0
    } else {
        r.sinh() / r
    }
}

fn sinc(r: f64) -> f64 {
    if r < 1e-4 {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    }
}

/// Point `x + iy` of the upper half-plane, hyperbolic metric
/// `(dx² + dy²)/y²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub const I: Self = Self { x: 0.0, y: 1.0 };

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "({x}, {y}) is not in the upper half-plane"
            )));
        }
        Ok(Self { x, y })
    }
}

/// `z ↦ (az + b)/(cz + d)`.
pub fn mobius_apply(m: &Mat2, z: &HalfPlanePoint) -> Result<HalfPlanePoint> {
    let det = m.det();
    if (det - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnimodular(det));
    }
    // denominator cz + d
    let (dr, di) = (m.c * z.x + m.d, m.c * z.y);
    let den = dr * dr + di * di;
    if den.sqrt() < 1e-300 {
        return Err(Error::NumericalPole(den.sqrt()));
    }
    let (nr, ni) = (m.a * z.x + m.b, m.a * z.y);
    let x = (nr * dr + ni * di) / den;
    // Im((az+b)/(cz+d)) = det * y / |cz+d|²
    let y = det * z.y / den;
    HalfPlanePoint::new(x, y)
}

/// Complex derivative `1/(cz + d)²` of the Möbius map, as `(re, im)`.
pub fn mobius_derivative(m: &Mat2, z: &HalfPlanePoint) -> (f64, f64) {
    let (dr, di) = (m.c * z.x + m.d, m.c * z.y);
    let (sr, si) = (dr * dr - di * di, 2.0 * dr * di);
    let den = sr * sr + si * si;
    (sr / den, -si / den)
}

/// `arccosh(1 + |z - w|² / (2 y_z y_w))`.
pub fn hyperbolic_distance(z: &HalfPlanePoint, w: &HalfPlanePoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    let q = (dx * dx + dy * dy) / (2.0 * z.y * w.y);
    // acosh(1 + q) = ln(1 + q + sqrt(q (q + 2))), stable for small q
    (q + (q * (q + 2.0)).sqrt()).ln_1p()
}

/// One factor `exp(t X)` of a word.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordFactor {
    pub basis: [f64; 3],
    pub t: f64,
}

impl WordFactor {
    pub fn new(x: Sl2Element, t: f64) -> Self {
        Self {
            basis: x.coefficients(),
            t,
        }
    }

    pub fn element(&self) -> Sl2Element {
        Sl2Element::new(self.basis[0], self.basis[1], self.basis[2])
    }

    pub fn matrix(&self) -> Mat2 {
        sl2_exp(&self.element(), self.t)
    }
}

/// Ordered product of one-parameter exponentials, leftmost factor applied
/// last. Serialises as the bare factor list
/// `[{"basis":[a,b,c],"t":...}, ...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<WordFactor>", into = "Vec<WordFactor>")]
pub struct GroupWord {
    factors: Vec<WordFactor>,
    matrix: Mat2,
}

impl From<Vec<WordFactor>> for GroupWord {
    fn from(factors: Vec<WordFactor>) -> Self {
        let matrix = factors
            .iter()
            .fold(Mat2::IDENTITY, |m, f| m.mul(&f.matrix()));
        Self { factors, matrix }
    }
}

impl From<GroupWord> for Vec<WordFactor> {
    fn from(w: GroupWord) -> Self {
        w.factors
    }
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::from(Vec::new())
    }

    pub fn single(x: Sl2Element, t: f64) -> Self {
        Self::from(vec![WordFactor::new(x, t)])
    }

    pub fn factors(&self) -> &[WordFactor] {
        &self.factors
    }

    pub fn matrix(&self) -> Mat2 {
        self.matrix
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self::from(factors)
    }

    /// Image of `i` under the word.
    pub fn apply_to_i(&self) -> Result<HalfPlanePoint> {
        mobius_apply(&self.matrix, &HalfPlanePoint::I)
    }
}

/// `σ_1 + σ_3 = [[0, 1], [0, 0]]`, generator of horocyclic translations.
pub const HOROCYCLIC: Sl2Element = Sl2Element::new(1.0, 0.0, 1.0);

/// `exp(x (σ_1 + σ_3)) · exp(-ln(y) σ_2)`, sending `i` to `x + iy`.
/// Factors with zero parameter are omitted.
pub fn iwasawa_word(p: &HalfPlanePoint) -> GroupWord {
    let mut factors = Vec::with_capacity(2);
    if p.x != 0.0 {
        factors.push(WordFactor::new(HOROCYCLIC, p.x));
    }
    if p.y != 1.0 {
        factors.push(WordFactor::new(Sl2Element::SIGMA2, -p.y.ln()));
    }
    GroupWord::from(factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        let t = 0.8;
        let m = sl2_exp(&Sl2Element::SIGMA1, t);
        let (ch, sh) = ((t / 2.0).cosh(), (t / 2.0).sinh());
        assert!(m.max_abs_diff(&Mat2::new(ch, sh, sh, ch)) < 1e-15);
        assert_eq!(
            sl2_exp(&Sl2Element::new(0.3, -2.0, 1.0), 0.0),
            Mat2::IDENTITY
        );
        let full_turn = sl2_exp(&Sl2Element::SIGMA3, 2.0 * PI);
        assert!(full_turn.max_abs_diff(&Mat2::IDENTITY.scale(-1.0)) < 1e-14);
        assert!(full_turn.projective_distance(&Mat2::IDENTITY) < 1e-14);
    }

    #[test]
    fn mobius_examples() {
        let i = HalfPlanePoint::I;
        assert_eq!(mobius_apply(&Mat2::IDENTITY, &i).unwrap(), i);
        let t = 1.3;
        let p = mobius_apply(&sl2_exp(&Sl2Element::SIGMA1, t), &i).unwrap();
        assert!((p.x - t.tanh()).abs() < 1e-15);
        assert!((p.y - 1.0 / t.cosh()).abs() < 1e-15);
        let q = mobius_apply(&sl2_exp(&HOROCYCLIC, 2.5), &i).unwrap();
        assert!((q.x - 2.5).abs() < 1e-15 && (q.y - 1.0).abs() < 1e-15);
        assert!(matches!(
            mobius_apply(&Mat2::new(2.0, 0.0, 0.0, 2.0), &i),
            Err(Error::NotUnimodular(_))
        ));
        let z = HalfPlanePoint::new(0.0, 1e-310).unwrap();
        assert!(matches!(
            mobius_apply(&Mat2::new(0.0, -1.0, 1.0, 0.0), &z),
            Err(Error::NumericalPole(_))
        ));
    }

    #[test]
    fn distance_examples() {
        let i = HalfPlanePoint::I;
        assert_eq!(hyperbolic_distance(&i, &i), 0.0);
        let two_i = HalfPlanePoint::new(0.0, 2.0).unwrap();
        assert!((hyperbolic_distance(&i, &two_i) - 2f64.ln()).abs() < 1e-15);
        for t in [1e-6, 0.1, 1.0, 3.0, 7.0] {
            let p = mobius_apply(&sl2_exp(&Sl2Element::SIGMA1, t), &i).unwrap();
            assert!((hyperbolic_distance(&i, &p) - t).abs() < 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn iwasawa_examples() {
        assert!(iwasawa_word(&HalfPlanePoint::I).factors().is_empty());
        let w = iwasawa_word(&HalfPlanePoint::new(0.0, 4.0).unwrap());
        assert_eq!(w.factors().len(), 1);
        assert!(w.matrix().max_abs_diff(&Mat2::new(2.0, 0.0, 0.0, 0.5)) < 1e-15);
        let w = iwasawa_word(&HalfPlanePoint::new(3.0, 1.0).unwrap());
        assert_eq!(w.factors().len(), 1);
        assert!(w.matrix().max_abs_diff(&Mat2::new(1.0, 3.0, 0.0, 1.0)) < 1e-15);
        let p = HalfPlanePoint::new(-1.7, 0.3).unwrap();
        let q = iwasawa_word(&p).apply_to_i().unwrap();
        assert!((q.x - p.x).abs() < 1e-12 && (q.y - p.y).abs() < 1e-12);
    }

    #[test]
    fn word_json_shape() {
        let w = iwasawa_word(&HalfPlanePoint::new(3.0, 1.0).unwrap());
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, r#"[{"basis":[1.0,0.0,1.0],"t":3.0}]"#);
        let back: GroupWord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn canonical_sign() {
        let m = Mat2::new(-1.0, 2.0, 0.5, -2.0);
        assert_eq!(m.canonical(), Mat2::new(1.0, -2.0, -0.5, 2.0));
        let m = Mat2::new(0.0, -1.0, 1.0, 0.0);
        assert_eq!(m.canonical(), Mat2::new(0.0, 1.0, -1.0, 0.0));
    }
}
