//! Classification parameter of the class-one series and the curvature
//! coefficient recursions.
//!
//! A class-one representation is labelled by `s`, either imaginary
//! (principal series, `s = iτ`) or real with `|s| < 1/2` (complementary
//! series). The orbit of its spherical vector is a minimal surface of
//! constant curvature `K_s = -8 / (1 - 4 s²)`. Everything downstream only
//! ever needs `s²`, `λ_s = 1/4 - s²`, `c_s = λ_s / 2` and `K_s = -1 / c_s`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Principal,
    Complementary,
}

/// `Principal` stores `τ ≥ 0` with `s = iτ`; `Complementary` stores
/// `σ ∈ (-1/2, 1/2)` with `s = σ`. The point `s = 0` is always stored as
/// `Complementary(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesParam {
    pub kind: SeriesKind,
    pub value: f64,
}

/// `(λ_s, c_s, K_s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureDictionary {
    pub lambda: f64,
    pub conformal_factor: f64,
    pub curvature: f64,
}

impl SeriesParam {
    pub fn principal(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidSeries(format!(
                "principal parameter must be finite and >= 0, got {tau}"
            )));
        }
        if tau == 0.0 {
            return Ok(Self::complementary_unchecked(0.0));
        }
        Ok(Self {
            kind: SeriesKind::Principal,
            value: tau,
        })
    }

    pub fn complementary(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma.abs() >= 0.5 {
            return Err(Error::InvalidSeries(format!(
                "complementary parameter must lie in (-1/2, 1/2), got {sigma}"
            )));
        }
        Ok(Self::complementary_unchecked(sigma))
    }

    fn complementary_unchecked(sigma: f64) -> Self {
        // normalise -0.0 so that equality and serialisation are stable
        Self {
            kind: SeriesKind::Complementary,
            value: if sigma == 0.0 { 0.0 } else { sigma },
        }
    }

    pub fn new(kind: SeriesKind, value: f64) -> Result<Self> {
        match kind {
            SeriesKind::Principal => Self::principal(value),
            SeriesKind::Complementary => Self::complementary(value),
        }
    }

    /// `s²`: `-τ²` on the principal series, `σ²` on the complementary one.
    pub fn s_squared(&self) -> f64 {
        match self.kind {
            SeriesKind::Principal => -self.value * self.value,
            SeriesKind::Complementary => self.value * self.value,
        }
    }

    /// Laplace eigenvalue `λ_s = 1/4 - s²`.
    pub fn lambda(&self) -> f64 {
        0.25 - self.s_squared()
    }

    /// Conformal factor `c_s = λ_s / 2` of the pulled-back metric.
    pub fn conformal_factor(&self) -> f64 {
        0.5 * self.lambda()
    }

    /// Gaussian curvature `K_s = -1 / c_s = -8 / (1 - 4 s²)`.
    pub fn curvature(&self) -> f64 {
        -1.0 / self.conformal_factor()
    }
}

impl std::fmt::Display for SeriesParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            SeriesKind::Principal => write!(f, "s = {}i", self.value),
            SeriesKind::Complementary => write!(f, "s = {}", self.value),
        }
    }
}

/// Inverts `K = -8 / (1 - 4 s²)`. `|K| < 8` lands on the principal series,
/// `|K| ≥ 8` on the complementary one, with `|K| = 8` giving `s = 0`.
pub fn series_from_curvature(curvature: f64) -> Result<SeriesParam> {
    if curvature.is_nan() || curvature >= 0.0 {
        return Err(Error::NonNegativeCurvature(curvature));
    }
    if curvature.is_infinite() {
        return Err(Error::InvalidSeries("curvature must be finite".into()));
    }
    let abs_k = -curvature;
    // s² = (1 - 8/|K|) / 4, written to stay exact at |K| = 8.
    let s2 = (abs_k - 8.0) / (4.0 * abs_k);
    if s2 >= 0.0 {
        SeriesParam::complementary(s2.sqrt())
    } else {
        SeriesParam::principal((-s2).sqrt())
    }
}

pub fn curvature_from_series(s: &SeriesParam) -> CurvatureDictionary {
    CurvatureDictionary {
        lambda: s.lambda(),
        conformal_factor: s.conformal_factor(),
        curvature: s.curvature(),
    }
}

fn binom2(p: usize) -> f64 {
    let p = p as f64;
    0.5 * p * (p - 1.0)
}

/// `c_p = (1 - binom(p, 2) K) / 2`, the ratio `A_p / A_{p-1}`.
pub fn c_coeff(curvature: f64, p: usize) -> f64 {
    debug_assert!(p >= 1, "c_p is defined for p >= 1");
    0.5 * (1.0 - binom2(p) * curvature)
}

/// `A_0..A_kmax` for a fixed curvature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureCoefficients {
    pub curvature: f64,
    pub a_seq: Vec<f64>,
}

impl CurvatureCoefficients {
    pub fn kmax(&self) -> usize {
        self.a_seq.len() - 1
    }

    pub fn a(&self, k: usize) -> f64 {
        self.a_seq[k]
    }

    /// `A_p / A_{p-1}` read off the stored sequence.
    pub fn ratio(&self, p: usize) -> f64 {
        self.a_seq[p] / self.a_seq[p - 1]
    }
}

/// Evaluates `A_0 = 1`, `A_{k+1} = (1 - binom(k+1, 2) K) A_k / 2`.
///
/// Fails instead of returning infinities once the sequence leaves the f64
/// range.
pub fn a_sequence(curvature: f64, kmax: usize) -> Result<CurvatureCoefficients> {
    if !curvature.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "curvature must be finite, got {curvature}"
        )));
    }
    let mut a_seq = Vec::with_capacity(kmax + 1);
    a_seq.push(1.0);
    let mut a = 1.0_f64;
    for k in 0..kmax {
        a *= c_coeff(curvature, k + 1);
        if !a.is_finite() {
            return Err(Error::CoefficientOverflow {
                k: k + 1,
                curvature,
            });
        }
        a_seq.push(a);
    }
    if curvature < 0.0 {
        debug_assert!(a_seq.iter().all(|&a| a > 0.0));
    }
    Ok(CurvatureCoefficients { curvature, a_seq })
}

/// Exact `c_p` for rational curvature.
pub fn c_coeff_exact(curvature: &BigRational, p: usize) -> BigRational {
    let p = BigInt::from(p);
    let binom = BigRational::from_integer(&p * (&p - BigInt::one()) / BigInt::from(2));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    half * (BigRational::one() - binom * curvature)
}

/// Exact `A_0..A_kmax` for rational curvature.
pub fn a_sequence_exact(curvature: &BigRational, kmax: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(kmax + 1);
    let mut a = BigRational::one();
    out.push(a.clone());
    for k in 0..kmax {
        a *= c_coeff_exact(curvature, k + 1);
        out.push(a.clone());
    }
    out
}

/// The exact binary value of `x` as a rational.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn curvature_minus_eight_is_s_zero() {
        let s = series_from_curvature(-8.0).unwrap();
        assert_eq!(s.kind, SeriesKind::Complementary);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.lambda(), 0.25);
        assert_eq!(s.conformal_factor(), 0.125);
    }

    #[test]
    fn curvature_minus_four_is_principal_half() {
        let s = series_from_curvature(-4.0).unwrap();
        assert_eq!(s.kind, SeriesKind::Principal);
        assert!((s.value - 0.5).abs() < 1e-15);
        assert!((s.lambda() - 0.5).abs() < 1e-15);
        assert!((s.conformal_factor() - 0.25).abs() < 1e-15);
        assert!((s.conformal_factor() + 1.0 / -4.0).abs() < 1e-15);
    }

    #[test]
    fn curvature_minus_sixteen_is_complementary() {
        let s = series_from_curvature(-16.0).unwrap();
        assert_eq!(s.kind, SeriesKind::Complementary);
        assert!((s.value - (1.0f64 / 8.0).sqrt()).abs() < 1e-15);
        assert!((s.value - 0.353553).abs() < 1e-6);
    }

    #[test]
    fn dictionary_examples() {
        let d = curvature_from_series(&SeriesParam::complementary(0.0).unwrap());
        assert_eq!(
            (d.lambda, d.conformal_factor, d.curvature),
            (0.25, 0.125, -8.0)
        );
        let d = curvature_from_series(&SeriesParam::principal(0.5).unwrap());
        assert_eq!(
            (d.lambda, d.conformal_factor, d.curvature),
            (0.5, 0.25, -4.0)
        );
        // sigma -> 1/2 from below
        let d = curvature_from_series(&SeriesParam::complementary(0.5 - 1e-9).unwrap());
        assert!(d.lambda > 0.0 && d.lambda < 1e-8);
        assert!(d.curvature < -1e8);
    }

    #[test]
    fn rejects_non_negative_curvature() {
        assert!(matches!(
            series_from_curvature(0.0),
            Err(Error::NonNegativeCurvature(_))
        ));
        assert!(matches!(
            series_from_curvature(2.0),
            Err(Error::NonNegativeCurvature(_))
        ));
        assert!(series_from_curvature(f64::NAN).is_err());
        assert!(SeriesParam::complementary(0.5).is_err());
        assert!(SeriesParam::principal(-1.0).is_err());
        assert_eq!(
            SeriesParam::principal(0.0).unwrap().kind,
            SeriesKind::Complementary
        );
    }

    #[test]
    fn a_sequence_low_terms() {
        for k in [-8.0, -1.0, 3.0] {
            let a = a_sequence(k, 1).unwrap();
            assert_eq!(a.a_seq, vec![1.0, 0.5]);
        }
        let a = a_sequence(-8.0, 3).unwrap();
        assert_eq!(a.a(2), 2.25);
        assert_eq!(a.a(3), 28.125);
        assert_eq!(a.ratio(2), 4.5);
    }

    #[test]
    fn c_coeff_examples() {
        assert_eq!(c_coeff(-123.0, 1), 0.5);
        assert_eq!(c_coeff(-8.0, 2), 4.5);
        assert_eq!(c_coeff(-8.0, 3), 12.5);
    }

    #[test]
    fn overflow_is_an_error() {
        let err = a_sequence(-1e6, 400).unwrap_err();
        assert!(matches!(err, Error::CoefficientOverflow { .. }));
    }

    #[test]
    fn exact_ratio_is_c_p() {
        let k = BigRational::from_integer(BigInt::from(-8));
        let a = a_sequence_exact(&k, 20);
        for p in 1..=20 {
            assert_eq!(&a[p] / &a[p - 1], c_coeff_exact(&k, p));
        }
        assert_eq!(a[3], BigRational::new(BigInt::from(225), BigInt::from(8)));
    }

    #[test]
    fn exact_ladder_difference() {
        // c_{k+1} - c_k = -K k / 2, the algebra behind [X, Y] = -(K/2) Z
        let k = BigRational::new(BigInt::from(-32), BigInt::from(3));
        for p in 1..40usize {
            let diff = c_coeff_exact(&k, p + 1) - c_coeff_exact(&k, p);
            let expect = -&k * BigRational::from_integer(BigInt::from(p))
                / BigRational::from_integer(BigInt::from(2));
            assert_eq!(diff, expect);
        }
    }

    #[test]
    fn float_matches_exact() {
        let kf = -16.0 / 3.0;
        let k = rational_from_f64(kf).unwrap();
        let exact = a_sequence_exact(&k, 30);
        let float = a_sequence(kf, 30).unwrap();
        for (e, f) in exact.iter().zip(&float.a_seq) {
            let e = num_traits::ToPrimitive::to_f64(e).unwrap();
            assert!(rel(*f, e) < 1e-13);
        }
    }

    #[test]
    fn ladder_asymptotics() {
        for k in [-4.0, -8.0, -16.0] {
            let p = 10_000;
            let ratio = c_coeff(k, p).sqrt() / ((-k).sqrt() / 2.0 * p as f64);
            assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
        }
    }
}
