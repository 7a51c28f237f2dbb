//! Minimal dense complex linear algebra for 2x2 and 4x4 Hermitian and
//! unitary matrices.
//!
//! Everything here is value-semantic and sized for two-qubit work: matrices
//! are stored row-major in a flat `Vec`, and the eigensolver is a cyclic
//! Jacobi iteration that is overkill-accurate at these dimensions.

use num_complex::Complex;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex64 = Complex<f64>;

/// Maximum asymmetry tolerated before a matrix is rejected as non-Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Residual bound documented for the Jacobi eigensolver on 4x4 inputs.
pub const EIGEN_RESIDUAL_BOUND: f64 = 1e-10;

const GRAM_SCHMIDT_DROP_TOL: f64 = 1e-8;
const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum QmatError {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds tol {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },
    #[error("input vectors are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "vector entries must be finite"
        );
        Self { data }
    }

    pub fn from_real(reals: &[f64]) -> Self {
        Self::new(reals.iter().map(|&r| c(r, 0.0)).collect())
    }

    /// Computational basis vector |index> in the given dimension.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut data = vec![c(0.0, 0.0); dim];
        data[index] = c(1.0, 0.0);
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.data[i]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Inner product <self|other>, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn sub(&self, other: &ComplexVector) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self {
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Kronecker product |self> (x) |other>.
    pub fn tensor(&self, other: &ComplexVector) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        Self { data }
    }

    /// Rank-1 projector |self><self|.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.data[i] * self.data[j].conj());
            }
        }
        m
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "data length must be dim^2");
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![c(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, c(1.0, 0.0));
        }
        m
    }

    /// Diagonal matrix with real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, c(d, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn add(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.dim(), "dimension mismatch");
        let n = self.dim;
        let mut out = vec![c(0.0, 0.0); n];
        for (i, entry) in out.iter_mut().enumerate() {
            for j in 0..n {
                *entry += self.get(i, j) * v.get(j);
            }
        }
        ComplexVector::new(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// U * self * U^dagger.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Kronecker product with basis order |row_a, row_b>.
    pub fn tensor(&self, other: &ComplexMatrix) -> Self {
        let (da, db) = (self.dim, other.dim);
        let n = da * db;
        let mut out = Self::zeros(n);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.get(ia, ja);
                if a == c(0.0, 0.0) {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out.set(ia * db + ib, ja * db + jb, a * other.get(ib, jb));
                    }
                }
            }
        }
        out
    }

    /// Largest entry-wise modulus of self - other.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm test of m^dagger * m = I.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let product = self.adjoint().matmul(self);
        product.max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    /// Largest modulus among entries of self - self^dagger.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// (self + self^dagger) / 2, absorbing roundoff from operator chains.
    pub fn symmetrized(&self) -> Self {
        self.add(&self.adjoint()).scale(0.5)
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// The matrix is symmetrized internally; asymmetry beyond `tol` is an
    /// error. Uses the closed form for 2x2 and cyclic Jacobi otherwise, with
    /// per-pair residual below [`EIGEN_RESIDUAL_BOUND`].
    pub fn hermitian_eigenvalues(&self, tol: f64) -> Result<Vec<f64>, QmatError> {
        Ok(self.hermitian_eigen(tol)?.0)
    }

    /// Full Hermitian eigendecomposition: ascending eigenvalues and a unitary
    /// whose columns are the matching eigenvectors.
    pub fn hermitian_eigen(&self, tol: f64) -> Result<(Vec<f64>, ComplexMatrix), QmatError> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(QmatError::NotHermitian {
                asymmetry: defect,
                tol,
            });
        }
        let m = self.symmetrized();
        let (mut values, mut vectors) = if self.dim == 2 {
            eigen_2x2(&m)
        } else {
            jacobi_hermitian(m)
        };
        sort_eigenpairs(&mut values, &mut vectors);
        Ok((values, vectors))
    }

    /// Trace out one qubit of a 4x4 two-qubit operator.
    pub fn partial_trace(&self, keep: Subsystem) -> ComplexMatrix {
        assert_eq!(self.dim, 4, "partial trace is defined for 4x4 matrices");
        let mut out = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                let mut sum = c(0.0, 0.0);
                for k in 0..2 {
                    // Basis |a b> at index 2a + b.
                    let (row, col) = match keep {
                        Subsystem::A => (2 * i + k, 2 * j + k),
                        Subsystem::B => (2 * k + i, 2 * k + j),
                    };
                    sum += self.get(row, col);
                }
                out.set(i, j, sum);
            }
        }
        out
    }
}

/// Which qubit a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Extend `columns` (mutually orthonormal within 1e-10) to a full unitary.
///
/// Remaining columns come from Gram-Schmidt over the canonical basis,
/// skipping candidates whose projection residual falls below 1e-8.
pub fn complete_to_unitary(
    dim: usize,
    columns: &[ComplexVector],
) -> Result<ComplexMatrix, QmatError> {
    assert!(columns.len() <= dim, "more columns than dimensions");
    let mut worst = 0.0f64;
    for (i, a) in columns.iter().enumerate() {
        assert_eq!(a.dim(), dim, "column dimension mismatch");
        worst = worst.max((a.norm() - 1.0).abs());
        for b in columns.iter().skip(i + 1) {
            worst = worst.max(a.inner(b).norm());
        }
    }
    if worst > ORTHONORMAL_TOL {
        return Err(QmatError::NotOrthonormal(worst));
    }

    let mut cols: Vec<ComplexVector> = columns.to_vec();
    for j in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut cand = ComplexVector::basis(dim, j);
        // Two projection passes keep the completion orthogonal to roundoff.
        for _ in 0..2 {
            for col in &cols {
                let overlap = col.inner(&cand);
                cand = cand.sub(&col.scale(overlap));
            }
        }
        let norm = cand.norm();
        if norm < GRAM_SCHMIDT_DROP_TOL {
            continue;
        }
        cols.push(cand.scale(c(1.0 / norm, 0.0)));
    }
    assert_eq!(cols.len(), dim, "canonical basis failed to complete");

    let mut u = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..dim {
            u.set(i, j, col.get(i));
        }
    }
    Ok(u)
}

fn eigen_2x2(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let (lo, hi) = (mean - radius, mean + radius);

    // Eigenvector for hi: (b, hi - a), or e0 when the matrix is diagonal.
    let mut v_hi = ComplexVector::new(vec![b, c(hi - a, 0.0)]);
    if v_hi.norm() < 1e-14 {
        v_hi = if (a - hi).abs() < (d - hi).abs() {
            ComplexVector::basis(2, 0)
        } else {
            ComplexVector::basis(2, 1)
        };
    } else {
        v_hi = v_hi.scale(c(1.0 / v_hi.norm(), 0.0));
    }
    // Orthogonal complement in 2 dimensions.
    let v_lo = ComplexVector::new(vec![-v_hi.get(1).conj(), v_hi.get(0).conj()]);

    let mut vectors = ComplexMatrix::zeros(2);
    for i in 0..2 {
        vectors.set(i, 0, v_lo.get(i));
        vectors.set(i, 1, v_hi.get(i));
    }
    (vec![lo, hi], vectors)
}

/// Cyclic Jacobi iteration for Hermitian matrices.
fn jacobi_hermitian(mut a: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.dim();
    let mut v = ComplexMatrix::identity(n);
    let scale = a
        .data
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off = off.max(a.get(i, j).norm());
                }
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{i phi}
                let alpha = a.get(p, p).re;
                let gamma = a.get(q, q).re;
                let tau = (gamma - alpha) / (2.0 * r);
                // Smaller root of t^2 - 2 tau t - 1 = 0.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;

                // Rotation U: U_pp = c, U_pq = -s e^{i phi},
                //             U_qp = s e^{-i phi}, U_qq = c.
                let sp = sth * phase;
                // A <- A U (columns p, q).
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * cth + akq * sp.conj());
                    a.set(k, q, akq * cth - akp * sp);
                }
                // A <- U^dagger A (rows p, q).
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk * cth + aqk * sp);
                    a.set(q, k, aqk * cth - apk * sp.conj());
                }
                // V <- V U.
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * cth + vkq * sp.conj());
                    v.set(k, q, vkq * cth - vkp * sp);
                }
                // Make the annihilated pair exactly zero and the diagonal real.
                a.set(p, q, c(0.0, 0.0));
                a.set(q, p, c(0.0, 0.0));
                a.set(p, p, c(a.get(p, p).re, 0.0));
                a.set(q, q, c(a.get(q, q).re, 0.0));
            }
        }
    }

    let values = (0..n).map(|i| a.get(i, i).re).collect();
    (values, v)
}

fn sort_eigenpairs(values: &mut [f64], vectors: &mut ComplexMatrix) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let old_values = values.to_vec();
    let old_vectors = vectors.clone();
    for (new_col, &old_col) in order.iter().enumerate() {
        values[new_col] = old_values[old_col];
        for row in 0..n {
            vectors.set(row, new_col, old_vectors.get(row, old_col));
        }
    }
}

/// Pauli sigma_x.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]])
}
