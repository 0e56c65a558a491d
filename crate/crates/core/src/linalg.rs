//! Small dense/banded linear algebra: complex vector helpers, an implicit-QL
//! eigensolver for real symmetric tridiagonal matrices, and unitary
//! propagators `exp(tG)` for skew-Hermitian tridiagonal generators.

use num_complex::Complex64;

use crate::operators::BandedOperator;
use crate::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// `Σ x_k conj(y_k)`.
pub fn hermitian_inner(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Complex bilinear pairing over a symmetric index window,
/// `Σ_m x_m y_{-m}`. Slices are stored from index `-N` to `N`.
pub fn bilinear_pairing(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter().rev()).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn distance(x: &[C64], y: &[C64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
///
/// `vectors` is column-major: eigenvector `j` occupies
/// `vectors[j*n..(j+1)*n]`.
#[derive(Clone, Debug)]
pub struct SymTridiagEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymTridiagEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[j * n..(j + 1) * n]
    }
}

/// Implicit QL with Wilkinson shifts on diagonal `diag` and off-diagonal
/// `off` (`off[i]` couples rows `i` and `i + 1`).
///
/// Hand-rolled rather than a dense library solver: working on the band
/// directly keeps the eigenvectors' parity structure to rounding level.
pub fn sym_tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<SymTridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymTridiagEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    const MAX_ITER: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::EigenNoConvergence(l));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..(i + 1) * n];
                let zi1 = &mut hi[..n];
                for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let f = *b;
                    *b = s * *a + c * f;
                    *a = c * *a - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(SymTridiagEigen {
        values: d,
        vectors: z,
    })
}

/// `exp(tG)` for a skew-Hermitian tridiagonal `G`, via the Hermitian
/// matrix `H = iG`.
///
/// `H` is gauged by a diagonal unitary `D` to a real symmetric tridiagonal
/// `T = D* H D` with non-negative off-diagonal, so that
/// `exp(tG) = D Q exp(-itΛ) Qᵀ D*` where `T = Q Λ Qᵀ`. The result is
/// unitary up to the orthogonality of `Q`.
#[derive(Clone, Debug)]
pub struct UnitaryPropagator {
    gauge: Vec<C64>,
    eigen: SymTridiagEigen,
}

impl UnitaryPropagator {
    pub fn new(generator: &BandedOperator) -> Result<Self> {
        let n = generator.dim();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        let mut gauge = Vec::with_capacity(n);
        let mut phase = C64::new(1.0, 0.0);
        gauge.push(phase);
        for pos in 0..n {
            diag.push((I * generator.diag[pos]).re);
            if pos + 1 < n {
                // H_{pos+1,pos} = i * G_{pos+1,pos}
                let h = I * generator.upper[pos];
                let mag = h.norm();
                off.push(mag);
                if mag > 0.0 {
                    phase *= h / mag;
                }
                gauge.push(phase);
            }
        }
        let eigen = sym_tridiag_eigen(&diag, &off)?;
        Ok(Self { gauge, eigen })
    }

    pub fn dim(&self) -> usize {
        self.gauge.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `exp(tG) v`.
    pub fn apply(&self, t: f64, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let w: Vec<C64> = v
            .iter()
            .zip(&self.gauge)
            .map(|(x, p)| x * p.conj())
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, &lambda) in self.eigen.values.iter().enumerate() {
            let q = self.eigen.vector(j);
            let mut y = C64::new(0.0, 0.0);
            for (qi, wi) in q.iter().zip(&w) {
                y += wi * qi;
            }
            if y == C64::new(0.0, 0.0) {
                continue;
            }
            y *= C64::from_polar(1.0, -t * lambda);
            for (o, qi) in out.iter_mut().zip(q) {
                *o += y * qi;
            }
        }
        for (o, p) in out.iter_mut().zip(&self.gauge) {
            *o *= p;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_sym(diag: &[f64], off: &[f64]) -> Vec<Vec<f64>> {
        let n = diag.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = diag[i];
            if i + 1 < n {
                a[i][i + 1] = off[i];
                a[i + 1][i] = off[i];
            }
        }
        a
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        let diag: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin() * 3.0).collect();
        let off: Vec<f64> = (0..39).map(|i| 1.0 + (i as f64).sqrt()).collect();
        let eig = sym_tridiag_eigen(&diag, &off).unwrap();
        let a = dense_sym(&diag, &off);
        let n = diag.len();
        for j in 0..n {
            let v = eig.vector(j);
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i][k] * v[k]).sum();
                assert!((av - eig.values[j] * v[i]).abs() < 1e-12);
            }
            for k in 0..n {
                let dot: f64 = v.iter().zip(eig.vector(k)).map(|(a, b)| a * b).sum();
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-13);
            }
        }
        let trace: f64 = diag.iter().sum();
        let sum: f64 = eig.values.iter().sum();
        assert!((trace - sum).abs() < 1e-11);
    }

    #[test]
    fn decoupled_blocks_and_tiny_cases() {
        let eig = sym_tridiag_eigen(&[2.0], &[]).unwrap();
        assert_eq!(eig.values, vec![2.0]);
        let mut vals = sym_tridiag_eigen(&[1.0, 1.0, 5.0], &[1.0, 0.0])
            .unwrap()
            .values;
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 0.0).abs() < 1e-15);
        assert!((vals[1] - 2.0).abs() < 1e-15);
        assert!((vals[2] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn pairings() {
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(3.0, 0.0)];
        let y = [C64::new(0.0, 1.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)];
        // Σ x_m y_{-m}: x_{-1} y_1 + x_0 y_0 + x_1 y_{-1}
        assert_eq!(
            bilinear_pairing(&x, &y),
            C64::new(2.0, 0.0) + C64::new(0.0, 2.0) + C64::new(0.0, 3.0)
        );
        assert_eq!(hermitian_inner(&x, &x), C64::new(14.0, 0.0));
    }
}
