//! Dense square complex matrices and a cyclic-Jacobi Hermitian eigensolver.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for algebraic identities (equality, unitarity,
/// Hermiticity, trace normalization).
pub const DEFAULT_TOL: f64 = 1e-12;

/// Looser tolerance for quantities that pass through the eigensolver,
/// e.g. positivity of density-matrix spectra.
pub const EIGEN_TOL: f64 = 1e-10;

/// Dense square matrix of complex amplitudes, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_vec(dim: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), dim * dim, "need dim^2 entries");
        Self { dim, entries }
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "need dim^2 entries");
        Self {
            dim,
            entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Rank-1 projector |v><v| from a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, v[i] * v[j].conj());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik.norm_sqr() == 0.0 {
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

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
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

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Conjugation U . self . U^dagger.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// Largest entrywise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise comparison with an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// Largest entry of |U^dagger U - I|.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// Frobenius inner product Tr(self^dagger . other).
    pub fn frobenius_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies self to a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, col)).collect()
    }

    /// Embeds a smaller matrix into an identity of dimension `dim`, placing
    /// block entry (r, c) at global position (modes[r], modes[c]).
    pub fn embed(block: &Self, dim: usize, modes: &[usize]) -> Self {
        assert_eq!(block.dim(), modes.len());
        assert!(modes.iter().all(|&m| m < dim));
        let mut out = Self::identity(dim);
        for (r, &mr) in modes.iter().enumerate() {
            for (c, &mc) in modes.iter().enumerate() {
                out.set(mr, mc, block.get(r, c));
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (row, col): (usize, usize)) -> &Complex64 {
        &self.entries[row * self.dim + col]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, rhs)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, rhs)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with the left factor on the slow (outer) index, i.e.
/// subsystem A is the left factor throughout the crate.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(da * db);
    for ia in 0..da {
        for ja in 0..da {
            let aij = a.get(ia, ja);
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for ib in 0..db {
                for jb in 0..db {
                    out.set(ia * db + ib, ja * db + jb, aij * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and a unitary whose k-th column is
/// the eigenvector for the k-th eigenvalue.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_hermitian(1e-9) {
        return Err(Error::NotHermitian {
            residual: m.hermiticity_residual(),
        });
    }
    let n = m.dim();
    let mut a = m.clone();
    // Symmetrize away representation noise so the iteration sees an exactly
    // Hermitian matrix.
    for i in 0..n {
        let d = a.get(i, i);
        a.set(i, i, Complex64::new(d.re, 0.0));
        for j in (i + 1)..n {
            let avg = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, avg);
            a.set(j, i, avg.conj());
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = a
        .entries()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let threshold = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if mag <= threshold {
                    continue;
                }
                let phase = apq / mag; // e^{i arg(a_pq)}
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Zeroing condition for this rotation layout:
                // t^2 - 2*tau*t - 1 = 0, smaller-magnitude root.
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns: col_p <- c*col_p + s*conj(phase)*col_q,
                //          col_q <- -s*phase*col_p + c*col_q   (and rows by symmetry)
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = -phase * s;
                let u_qp = phase.conj() * s;
                let u_qq = Complex64::new(c, 0.0);

                // A <- U^dagger A U, applied as row then column updates.
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, u_pp.conj() * apj + u_qp.conj() * aqj);
                    a.set(q, j, u_pq.conj() * apj + u_qq.conj() * aqj);
                }
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * u_pp + aiq * u_qp);
                    a.set(i, q, aip * u_pq + aiq * u_qq);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * u_pp + viq * u_qp);
                    v.set(i, q, vip * u_pq + viq * u_qq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigvals: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| eigvals[i].partial_cmp(&eigvals[j]).unwrap());

    let sorted_vals: Vec<f64> = order.iter().map(|&i| eigvals[i]).collect();
    let mut sorted_vecs = ComplexMatrix::zeros(n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vecs.set(i, newcol, v.get(i, oldcol));
        }
    }
    Ok((sorted_vals, sorted_vecs))
}
