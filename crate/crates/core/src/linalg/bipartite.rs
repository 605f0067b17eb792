use std::ops::{Add, Sub};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::eig::{hermitian_eig, hermitian_eig_with, EigenSystem};
use crate::linalg::matrix::ComplexMatrix;
use crate::scalar::{Real, C};
use crate::tolerances::Tolerances;

/// Which subsystem a partial operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Hermitian operator on C^dimA ⊗ C^dimB, Alice-major (index = a·dimB + b).
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator<T> {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix<T>,
}

impl<T: Real> BipartiteOperator<T> {
    /// Wraps a matrix, checking its shape and Hermiticity.
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::new_with(dim_a, dim_b, matrix, &T::tolerances())
    }

    pub fn new_with(dim_a: usize, dim_b: usize, matrix: ComplexMatrix<T>, tol: &Tolerances) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Shape("subsystem dimensions must be positive".into()));
        }
        let n = dim_a * dim_b;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::Shape(format!(
                "{}x{} matrix does not act on {dim_a}⊗{dim_b}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        matrix.check_hermitian(tol.hermitian)?;
        Ok(Self { dim_a, dim_b, matrix })
    }

    /// Skips the Hermiticity check; for results of Hermiticity-preserving operations.
    pub(crate) fn from_parts(dim_a: usize, dim_b: usize, matrix: ComplexMatrix<T>) -> Self {
        debug_assert_eq!(matrix.rows(), dim_a * dim_b);
        Self { dim_a, dim_b, matrix }
    }

    pub fn identity(dim_a: usize, dim_b: usize) -> Self {
        Self::from_parts(dim_a, dim_b, ComplexMatrix::identity(dim_a * dim_b))
    }

    /// |v⟩⟨v| on the given dimensions.
    pub fn projector(dim_a: usize, dim_b: usize, v: &[C<T>]) -> Self {
        assert_eq!(v.len(), dim_a * dim_b, "vector length does not match dimensions");
        Self::from_parts(dim_a, dim_b, ComplexMatrix::projector(v))
    }

    /// A ⊗ B for Hermitian local factors.
    pub fn product(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<Self> {
        Self::new(a.rows(), b.rows(), a.kron(b))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_parts(self.dim_a, self.dim_b, self.matrix.scale(s))
    }

    /// M ↦ K M K† for a square K of matching size.
    pub fn congruence(&self, k: &ComplexMatrix<T>) -> Self {
        let m = &(k * &self.matrix) * &k.adjoint();
        Self::from_parts(self.dim_a, self.dim_b, m.hermitian_part())
    }

    pub fn same_dims(&self, other: &Self) -> bool {
        self.dims() == other.dims()
    }

    pub fn max_diff(&self, other: &Self) -> T {
        self.matrix.max_diff(&other.matrix)
    }

    pub fn eig(&self) -> Result<EigenSystem<T>> {
        hermitian_eig(&self.matrix)
    }

    pub fn eig_with(&self, tol: &Tolerances) -> Result<EigenSystem<T>> {
        hermitian_eig_with(&self.matrix, tol)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eig()?.min())
    }

    /// Partial transpose on one side. Entries are permuted, never recombined,
    /// so applying it twice returns the input bit for bit.
    pub fn partial_transpose(&self, side: Side) -> Self {
        let (da, db) = (self.dim_a, self.dim_b);
        let n = da * db;
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i / db, i % db);
            let (a2, b2) = (j / db, j % db);
            match side {
                Side::B => self.matrix[(a * db + b2, a2 * db + b)],
                Side::A => self.matrix[(a2 * db + b, a * db + b2)],
            }
        });
        Self::from_parts(da, db, m)
    }

    /// Tr_B, a dimA × dimA matrix.
    pub fn reduced_a(&self) -> ComplexMatrix<T> {
        let (da, db) = (self.dim_a, self.dim_b);
        ComplexMatrix::from_fn(da, da, |a, a2| {
            (0..db).fold(C::zero(), |acc, b| acc + self.matrix[(a * db + b, a2 * db + b)])
        })
    }

    /// Tr_A, a dimB × dimB matrix.
    pub fn reduced_b(&self) -> ComplexMatrix<T> {
        let (da, db) = (self.dim_a, self.dim_b);
        ComplexMatrix::from_fn(db, db, |b, b2| {
            (0..da).fold(C::zero(), |acc, a| acc + self.matrix[(a * db + b, a * db + b2)])
        })
    }
}

impl<T: Real> Add for &BipartiteOperator<T> {
    type Output = BipartiteOperator<T>;

    fn add(self, rhs: &BipartiteOperator<T>) -> BipartiteOperator<T> {
        assert!(self.same_dims(rhs), "dimension mismatch");
        BipartiteOperator::from_parts(self.dim_a, self.dim_b, &self.matrix + &rhs.matrix)
    }
}

impl<T: Real> Sub for &BipartiteOperator<T> {
    type Output = BipartiteOperator<T>;

    fn sub(self, rhs: &BipartiteOperator<T>) -> BipartiteOperator<T> {
        assert!(self.same_dims(rhs), "dimension mismatch");
        BipartiteOperator::from_parts(self.dim_a, self.dim_b, &self.matrix - &rhs.matrix)
    }
}

/// Partial transpose, free-function form.
pub fn partial_transpose<T: Real>(m: &BipartiteOperator<T>, side: Side) -> BipartiteOperator<T> {
    m.partial_transpose(side)
}

/// |H| = Σ|λᵢ| vᵢvᵢ†.
pub fn operator_abs<T: Real>(h: &BipartiteOperator<T>) -> Result<BipartiteOperator<T>> {
    let es = h.eig()?;
    let (da, db) = h.dims();
    Ok(BipartiteOperator::from_parts(da, db, es.apply(|x| x.abs()).hermitian_part()))
}

/// Σ|λᵢ|.
pub fn trace_norm<T: Real>(h: &BipartiteOperator<T>) -> Result<T> {
    Ok(h.eig()?.values.iter().map(|v| v.abs()).sum())
}

/// Schmidt coefficients of a pure state on dimA ⊗ dimB, descending.
pub fn schmidt_coefficients<T: Real>(v: &[C<T>], dim_a: usize, dim_b: usize) -> Result<Vec<T>> {
    if v.len() != dim_a * dim_b {
        return Err(Error::Shape(format!("vector of length {} on {dim_a}⊗{dim_b}", v.len())));
    }
    let rho = BipartiteOperator::projector(dim_a, dim_b, v);
    let red = rho.reduced_a();
    let mut vals: Vec<T> = hermitian_eig(&red)?.values.into_iter().map(|x| x.max(T::zero()).sqrt()).collect();
    vals.reverse();
    Ok(vals)
}
