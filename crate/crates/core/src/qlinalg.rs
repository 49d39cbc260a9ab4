//! Dense complex linear algebra for qubit-register density matrices.
//!
//! Qubits are numbered from 1. Qubit 1 is the most significant bit of the
//! computational-basis label, so for three qubits the basis index of `|q1 q2 q3>`
//! is `4*q1 + 2*q2 + q3`. All entropies are in bits.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Tolerance for the Hermiticity, trace and positivity checks on density matrices.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Eigenvalues below this are treated as exact zeros in entropy evaluations.
pub const EIGEN_CLAMP: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Validation(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Validation("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        Self::from_row_major(r, c, data)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `|a><b|` for column vectors `a` and `b`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m[(i, j)] = ai * bj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Entrywise sum. Panics on shape mismatch.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn to_nalgebra_hermitian(&self) -> DMatrix<Complex64> {
        // Symmetrize so round-off asymmetry never leaks into the eigensolver.
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            if i == j {
                Complex64::new(self[(i, i)].re, 0.0)
            } else {
                0.5 * (self[(i, j)] + self[(j, i)].conj())
            }
        })
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        if self.rows == 1 {
            return vec![self[(0, 0)].re];
        }
        let mut ev: Vec<f64> = self.to_nalgebra_hermitian().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigenvalues with matching unit eigenvectors of a Hermitian matrix.
    pub fn hermitian_eigen(&self) -> Vec<(f64, Vec<Complex64>)> {
        assert!(self.is_square(), "eigen-decomposition of a non-square matrix");
        let eig = self.to_nalgebra_hermitian().symmetric_eigen();
        let mut pairs: Vec<(f64, Vec<Complex64>)> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lam)| (lam, eig.eigenvectors.column(k).iter().copied().collect()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`; `a` supplies the most significant index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// A trace-one positive-semidefinite Hermitian matrix on `n_qubits` qubits.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    n_qubits: usize,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({} qubits) {:?}", self.n_qubits, self.matrix)
    }
}

fn qubit_count(dim: usize) -> Option<usize> {
    (dim >= 2 && dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at [`VALIDATION_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Validation(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows, matrix.cols
            )));
        }
        let n_qubits = qubit_count(matrix.rows)
            .ok_or_else(|| Error::Validation(format!("dimension {} is not 2^n with n >= 1", matrix.rows)))?;
        let herm = matrix.hermiticity_defect();
        if herm > VALIDATION_TOL {
            return Err(Error::Validation(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > VALIDATION_TOL {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < -VALIDATION_TOL {
            return Err(Error::Validation(format!("not positive semidefinite (min eigenvalue {min_ev:e})")));
        }
        Ok(Self { matrix, n_qubits })
    }

    /// Wraps a matrix already known to be a valid state (e.g. the output of a
    /// partial trace or dephasing of a valid state).
    pub(crate) fn from_valid(matrix: ComplexMatrix) -> Self {
        let n_qubits = qubit_count(matrix.rows).expect("dimension must be a power of two");
        debug_assert!(matrix.hermiticity_defect() <= VALIDATION_TOL);
        Self { matrix, n_qubits }
    }

    /// Maximally mixed state on `n_qubits`.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self::from_valid(ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Real diagonal (computational-basis populations).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        // Tr(rho rho) = sum_ij |rho_ij|^2 for Hermitian rho.
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Tensor product of two states.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_valid(tensor_product(&self.matrix, &other.matrix))
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    pub fn dephase(&self) -> DensityMatrix {
        dephase(self)
    }
}

/// Bit position (from the least significant end) that holds qubit `q` (1-based).
pub(crate) fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    n_qubits - q
}

pub(crate) fn check_qubit(n_qubits: usize, q: usize) -> Result<()> {
    if q == 0 || q > n_qubits {
        Err(Error::IndexOutOfRange { index: q, n_qubits })
    } else {
        Ok(())
    }
}

/// Reduced state on the qubits in `keep` (1-based), in ascending qubit order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::Validation("partial trace must keep at least one qubit".into()));
    }
    for &q in &kept {
        check_qubit(n, q)?;
    }
    if kept.len() == n {
        return Ok(rho.clone());
    }

    let kept_bits: Vec<usize> = kept.iter().map(|&q| qubit_bit(n, q)).collect();
    let traced_mask: usize = (1..=n).filter(|q| !kept.contains(q)).fold(0, |m, q| m | (1 << qubit_bit(n, q)));
    // Map a full basis index to its index in the kept subsystem.
    let reduce = |idx: usize| -> usize { kept_bits.iter().fold(0, |acc, &b| (acc << 1) | ((idx >> b) & 1)) };

    let dim = rho.dim();
    let mut out = ComplexMatrix::zeros(1 << kept.len(), 1 << kept.len());
    for r in 0..dim {
        let rt = r & traced_mask;
        let rr = reduce(r);
        for c in 0..dim {
            if c & traced_mask == rt {
                out[(rr, reduce(c))] += rho.matrix[(r, c)];
            }
        }
    }
    Ok(DensityMatrix::from_valid(out))
}

/// Zeroes all off-diagonal entries in the computational basis.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let diag: Vec<Complex64> = rho.populations().into_iter().map(|p| Complex64::new(p, 0.0)).collect();
    DensityMatrix::from_valid(ComplexMatrix::from_diagonal(&diag))
}

/// Shannon entropy in bits of a probability-like vector, clamping small values to zero.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > EIGEN_CLAMP).map(|&p| -p * p.log2()).sum::<f64>().max(0.0)
}

/// `-Tr rho log2 rho`, in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.eigenvalues())
}

/// Entropy of the dephased state, evaluated directly from the populations.
pub fn dephased_entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.populations())
}

/// Quantum relative entropy `S(rho || sigma)` in bits.
///
/// Returns `f64::INFINITY` when the support of `rho` is not contained in the
/// support of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Validation(format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim())));
    }
    let neg_entropy = -von_neumann_entropy(rho);

    // Tr rho log sigma = sum_k log(s_k) <v_k| rho |v_k>
    let mut cross = 0.0;
    for (s, v) in sigma.matrix.hermitian_eigen() {
        let mut overlap = ZERO;
        for (i, vi) in v.iter().enumerate() {
            let row: Complex64 = v.iter().enumerate().map(|(j, vj)| rho.matrix[(i, j)] * vj).sum();
            overlap += vi.conj() * row;
        }
        let w = overlap.re;
        if s <= EIGEN_CLAMP {
            if w > VALIDATION_TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += w * s.log2();
    }
    Ok((neg_entropy - cross).max(0.0))
}
