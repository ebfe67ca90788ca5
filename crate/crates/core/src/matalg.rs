//! Dense kernels for small square matrices: products, determinants,
//! singular values, exterior powers and the singular value functions.
//!
//! Magnitudes leave this module as natural logarithms. Matrices are only
//! materialized at the `d x d` (or `C(d,t) x C(d,t)`) scale.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Row-major dense square matrix.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    d: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl SquareMatrix {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: data.len() });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SquareMatrix { d, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.len();
        let mut data = Vec::with_capacity(d * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(d, data)
    }

    pub fn identity(d: usize) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        SquareMatrix { d, data }
    }

    pub fn zeros(d: usize) -> Self {
        SquareMatrix { d, data: vec![0.0; d * d] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d);
        for (i, v) in values.iter().enumerate() {
            m.data[i * d + i] = *v;
        }
        m
    }

    /// Planar rotation by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        SquareMatrix { d: 2, data: vec![c, -s, s, c] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.d.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.d).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.d;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j];
            }
        }
        out
    }

    /// `out = self * rhs`, reusing `out`'s storage.
    pub fn mul_into(&self, rhs: &SquareMatrix, out: &mut SquareMatrix) {
        let d = self.d;
        debug_assert_eq!(rhs.d, d);
        out.d = d;
        out.data.clear();
        out.data.resize(d * d, 0.0);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.rows().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Divides by the max-abs entry and returns the log of the divisor.
    pub fn renormalize(&mut self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 || !m.is_finite() {
            return 0.0;
        }
        self.scale(1.0 / m);
        m.ln()
    }

    pub fn det(&self) -> f64 {
        lu_det(self.d, self.data.clone())
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.d;
        let mut a = self.data.clone();
        let mut inv = Self::identity(d).data;
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&x, &y| a[x * d + col].abs().total_cmp(&a[y * d + col].abs()))
                .unwrap_or(col);
            let p = a[piv * d + col];
            if p == 0.0 {
                return Err(Error::Singular { index: 0, det: 0.0 });
            }
            if piv != col {
                for j in 0..d {
                    a.swap(piv * d + j, col * d + j);
                    inv.swap(piv * d + j, col * d + j);
                }
            }
            for j in 0..d {
                a[col * d + j] /= p;
                inv[col * d + j] /= p;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[r * d + col];
                if f != 0.0 {
                    for j in 0..d {
                        a[r * d + j] -= f * a[col * d + j];
                        inv[r * d + j] -= f * inv[col * d + j];
                    }
                }
            }
        }
        Self::new(d, inv)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::identity(self.d);
        let mut tmp = Self::zeros(self.d);
        for _ in 0..e {
            out.mul_into(self, &mut tmp);
            std::mem::swap(&mut out, &mut tmp);
        }
        out
    }

    /// Invertibility test `|det| > 1e-12 * (max |entry|)^d`.
    pub fn is_invertible(&self) -> bool {
        let scale = self.max_abs().powi(self.d as i32);
        self.det().abs() > 1e-12 * scale
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.d, self.d, &self.data)
    }

    /// Eigenvalues (complex in general) via the real Schur form.
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        if self.d == 0 {
            return Vec::new();
        }
        self.to_nalgebra().complex_eigenvalues().iter().copied().collect()
    }

    pub fn max_abs_diff(&self, other: &SquareMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        let mut out = SquareMatrix::zeros(self.d);
        self.mul_into(rhs, &mut out);
        out
    }
}

fn lu_det(d: usize, mut a: Vec<f64>) -> f64 {
    let mut det = 1.0;
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&x, &y| a[x * d + col].abs().total_cmp(&a[y * d + col].abs()))
            .unwrap_or(col);
        let p = a[piv * d + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..d {
                a.swap(piv * d + j, col * d + j);
            }
            det = -det;
        }
        det *= p;
        for r in col + 1..d {
            let f = a[r * d + col] / p;
            if f != 0.0 {
                for j in col..d {
                    a[r * d + j] -= f * a[col * d + j];
                }
            }
        }
    }
    det
}

/// Singular value decomposition `M = U diag(sigma) V^T` with `sigma`
/// sorted non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: SquareMatrix,
    pub sigma: Vec<f64>,
    pub v: SquareMatrix,
}

/// One-sided (Hestenes) Jacobi SVD. Relative accuracy of the small
/// singular values is limited by the conditioning of the column-scaled
/// matrix rather than by `sigma_1`.
pub fn svd(m: &SquareMatrix) -> Svd {
    let d = m.dim();
    // columns of `u` and `v` stored contiguously
    let mut u: Vec<Vec<f64>> = (0..d).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let tol = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..d {
            for j in i + 1..d {
                let alpha: f64 = u[i].iter().map(|x| x * x).sum();
                let beta: f64 = u[j].iter().map(|x| x * x).sum();
                let gamma: f64 = u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (cols, r) in [(&mut u, d), (&mut v, d)] {
                    for row in 0..r {
                        let a = cols[i][row];
                        let b = cols[j][row];
                        cols[i][row] = c * a - s * b;
                        cols[j][row] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = u
        .iter()
        .enumerate()
        .map(|(j, col)| (col.iter().map(|x| x * x).sum::<f64>().sqrt(), j))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut um = SquareMatrix::zeros(d);
    let mut vm = SquareMatrix::zeros(d);
    let mut sigma = Vec::with_capacity(d);
    for (k, &(s, j)) in order.iter().enumerate() {
        sigma.push(s);
        for row in 0..d {
            um.set(row, k, if s > 0.0 { u[j][row] / s } else { 0.0 });
            vm.set(row, k, v[j][row]);
        }
    }
    Svd { u: um, sigma, v: vm }
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &SquareMatrix) -> f64 {
    match m.dim() {
        0 => 0.0,
        1 => m.get(0, 0).abs(),
        2 => {
            let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
            let f = a * a + b * b + c * c + d * d;
            let det = a * d - b * c;
            let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
            ((f + disc) / 2.0).sqrt()
        }
        _ => svd(m).sigma[0],
    }
}

/// Natural logs of singular values, sorted non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSingularValues(pub Vec<f64>);

impl LogSingularValues {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn log_abs_det(&self) -> f64 {
        self.0.iter().sum()
    }
}

pub fn singular_values(m: &SquareMatrix) -> Result<LogSingularValues> {
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(LogSingularValues(svd(m).sigma.iter().map(|s| s.ln()).collect()))
}

/// Lexicographically ordered `t`-subsets of `{0, .., d-1}`.
pub fn subsets(d: usize, t: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, t: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < t - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, t, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if t <= d {
        rec(0, d, t, &mut Vec::with_capacity(t), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Degree-`t` exterior power in the lexicographic basis of `t`-subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorRep {
    pub t: usize,
    pub matrix: SquareMatrix,
}

impl ExteriorRep {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `t x t` minors of `m`, rows and columns indexed by lexicographic subsets.
pub fn wedge(m: &SquareMatrix, t: usize) -> Result<ExteriorRep> {
    let d = m.dim();
    if t == 0 || t > d {
        return Err(Error::DegreeOutOfRange { t, d });
    }
    let subs = subsets(d, t);
    let dim = subs.len();
    let mut out = SquareMatrix::zeros(dim);
    let mut buf = vec![0.0; t * t];
    for (r, rows) in subs.iter().enumerate() {
        for (c, cols) in subs.iter().enumerate() {
            for (a, &i) in rows.iter().enumerate() {
                for (b, &j) in cols.iter().enumerate() {
                    buf[a * t + b] = m.get(i, j);
                }
            }
            out.set(r, c, lu_det(t, buf.clone()));
        }
    }
    Ok(ExteriorRep { t, matrix: out })
}

/// `log psi^q = sum_i q_i log sigma_i`.
pub fn psi_q_log(values: &[f64], q: &[f64]) -> Result<f64> {
    if values.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: values.len(), got: q.len() });
    }
    Ok(values
        .iter()
        .zip(q)
        .map(|(v, w)| if *w == 0.0 { 0.0 } else { v * w })
        .sum())
}

/// Log of Falconer's singular value function. For `s >= d` this is
/// `(s/d) log|det|`.
pub fn phi_s_log(v: &LogSingularValues, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(format!("s = {s} must be non-negative")));
    }
    let d = v.dim();
    if s >= d as f64 {
        return Ok(s / d as f64 * v.log_abs_det());
    }
    let m = s.floor() as usize;
    let head: f64 = v.0[..m].iter().sum();
    let frac = s - m as f64;
    Ok(if frac == 0.0 { head } else { head + frac * v.0[m] })
}

/// Weights `(1,..,1, s-m, 0,..,0)` for which `psi^q = phi^s`.
pub fn falconer_weights(d: usize, s: f64) -> Vec<f64> {
    let m = s.floor() as usize;
    (0..d)
        .map(|i| {
            if i < m {
                1.0
            } else if i == m {
                s - m as f64
            } else {
                0.0
            }
        })
        .collect()
}

/// `phi^s` and `psi^q` agree for the Falconer weights, to 1e-12.
pub fn equivalence_check(v: &LogSingularValues, s: f64) -> bool {
    let d = v.dim();
    if !(0.0..=d as f64).contains(&s) {
        return false;
    }
    let q = falconer_weights(d, s);
    match (phi_s_log(v, s), psi_q_log(&v.0, &q)) {
        (Ok(a), Ok(b)) => (a - b).abs() <= 1e-12 * (1.0 + a.abs()),
        _ => false,
    }
}

/// Unit vector spanning the (approximate) kernel of `m`: the right singular
/// vector of its smallest singular value.
pub fn null_vector(m: &SquareMatrix) -> Vec<f64> {
    let s = svd(m);
    s.v.column(m.dim() - 1)
}

pub fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, d: usize) -> SquareMatrix {
        let data = (0..d * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        SquareMatrix::new(d, data).unwrap()
    }

    #[test]
    fn diag_and_rotation_singular_values() {
        let v = singular_values(&SquareMatrix::diag(&[2.0, 0.5])).unwrap();
        assert_relative_eq!(v.0[0], 2f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(v.0[1], -(2f64.ln()), epsilon = 1e-15);
        let r = singular_values(&SquareMatrix::rotation(0.7)).unwrap();
        assert!(r.0.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = random(&mut rng, 3);
            let ours = singular_values(&m).unwrap();
            let gram = m.to_nalgebra().transpose() * m.to_nalgebra();
            let mut ev: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            for (l, e) in ours.0.iter().zip(&ev) {
                let s = l.exp();
                assert!((s - e.sqrt()).abs() <= 1e-10 * e.sqrt().max(1.0), "{s} vs {}", e.sqrt());
            }
        }
    }

    #[test]
    fn singular_values_reject_non_finite() {
        let m = SquareMatrix { d: 1, data: vec![f64::NAN] };
        assert_eq!(singular_values(&m), Err(Error::NonFinite));
    }

    #[test]
    fn wedge_basics() {
        let w = wedge(&SquareMatrix::diag(&[2.0, 0.5]), 2).unwrap();
        assert_eq!(w.dim(), 1);
        assert_relative_eq!(w.matrix.get(0, 0), 1.0);
        for d in 1..=4 {
            for t in 1..=d {
                let w = wedge(&SquareMatrix::identity(d), t).unwrap();
                assert_eq!(w.matrix, SquareMatrix::identity(binomial(d, t)));
            }
        }
        let m = SquareMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(wedge(&m, 1).unwrap().matrix, m);
        assert!(matches!(wedge(&m, 3), Err(Error::DegreeOutOfRange { .. })));
        assert!(matches!(wedge(&m, 0), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn wedge_norm_is_product_of_top_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m = random(&mut rng, 3);
            let sv = singular_values(&m).unwrap();
            let w = wedge(&m, 2).unwrap();
            let lhs = spectral_norm(&w.matrix).ln();
            assert!((lhs - (sv.0[0] + sv.0[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn wedge_top_degree_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random(&mut rng, 4);
        let w = wedge(&m, 4).unwrap();
        assert_relative_eq!(w.matrix.get(0, 0), m.det(), max_relative = 1e-12);
    }

    #[test]
    fn psi_examples() {
        let m = SquareMatrix::from_rows(&[[1.0, 2.0], [0.5, 3.0]]).unwrap();
        let v = singular_values(&m).unwrap();
        assert_relative_eq!(psi_q_log(&v.0, &[1.0, 1.0]).unwrap(), m.det().abs().ln(), epsilon = 1e-12);
        assert_relative_eq!(psi_q_log(&v.0, &[1.0, 0.0]).unwrap(), spectral_norm(&m).ln(), epsilon = 1e-12);
        assert_eq!(psi_q_log(&v.0, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(psi_q_log(&v.0, &[1.0]).is_err());
    }

    #[test]
    fn phi_examples() {
        let v = singular_values(&SquareMatrix::diag(&[4.0, 1.0])).unwrap();
        assert_relative_eq!(phi_s_log(&v, 1.5).unwrap(), 4f64.ln(), epsilon = 1e-15);
        assert_eq!(phi_s_log(&v, 0.0).unwrap(), 0.0);
        assert_relative_eq!(phi_s_log(&v, 3.0).unwrap(), 8f64.ln(), epsilon = 1e-14);
        assert!(phi_s_log(&v, -0.1).is_err());
    }

    #[test]
    fn phi_uses_abs_det_for_negative_determinant() {
        let v = singular_values(&SquareMatrix::diag(&[-3.0, 2.0])).unwrap();
        assert_relative_eq!(phi_s_log(&v, 2.0).unwrap(), 6f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn phi_is_continuous_at_integers() {
        let v = LogSingularValues(vec![0.9, 0.1, -0.4]);
        for k in 1..=3 {
            let s = k as f64;
            let below = phi_s_log(&v, s - 1e-9).unwrap();
            let at = phi_s_log(&v, s).unwrap();
            assert!((below - at).abs() < 1e-8);
        }
    }

    #[test]
    fn phi_monotone_when_contracting() {
        let v = LogSingularValues(vec![-0.1, -0.5, -1.2]);
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let s = 0.1 * i as f64;
            let x = phi_s_log(&v, s).unwrap();
            assert!(x <= prev + 1e-15);
            prev = x;
        }
    }

    #[test]
    fn equivalence_examples() {
        let v = LogSingularValues(vec![0.7, -0.2]);
        assert!(equivalence_check(&v, 1.0));
        assert!(equivalence_check(&v, 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random(&mut rng, 3);
        assert!(equivalence_check(&singular_values(&m).unwrap(), 1.37));
    }

    #[test]
    fn inverse_and_det() {
        let m = SquareMatrix::from_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).max_abs_diff(&SquareMatrix::identity(2)) < 1e-15);
        assert_relative_eq!(m.det(), 1.0, epsilon = 1e-15);
        assert!(!SquareMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap().is_invertible());
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(binomial(6, 3), 20);
    }
}
