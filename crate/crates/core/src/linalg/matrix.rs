use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries; rejects wrong lengths and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = re(v);
        }
        m
    }

    /// 2×2 matrix from its four entries in row-major order.
    pub fn from_2x2(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Self { rows: 2, cols: 2, data: vec![a, b, c, d] }
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C<T>], v: &[C<T>]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Rank-one projector |v⟩⟨v|.
    pub fn projector(v: &[C<T>]) -> Self {
        Self::outer(v, v)
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

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C<T>]) {
        for (i, z) in v.iter().enumerate() {
            self[(i, j)] = *z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(C::zero(), |a, b| a + b)
    }

    /// Largest entry modulus; NaN if any entry is NaN.
    pub fn max_norm(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), nan_max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), nan_max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Hilbert–Schmidt inner product Re Tr(A†B).
    pub fn hs_inner(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Largest |M[i,j] − conj(M[j,i])| together with its position.
    pub fn hermitian_defect(&self) -> (T, usize, usize) {
        let mut worst = (T::zero(), 0, 0);
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        worst
    }

    /// Fails with `NonHermitianInput` when the defect exceeds `tol` relative to the max-norm.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!("{}x{} matrix is not square", self.rows, self.cols)));
        }
        let scale = self.max_norm().max(T::one());
        let (d, row, col) = self.hermitian_defect();
        if d > T::lit(tol) * scale {
            return Err(Error::NonHermitianInput { row, col, deviation: d.as_f64() });
        }
        Ok(())
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(C::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// ⟨u|M|v⟩.
    pub fn sandwich(&self, u: &[C<T>], v: &[C<T>]) -> C<T> {
        inner(u, &self.mul_vec(v))
    }

    /// Tensor product with Alice-major index ordering.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    pub fn det_2x2(&self) -> C<T> {
        assert_eq!((self.rows, self.cols), (2, 2), "det_2x2 needs a 2x2 matrix");
        self.data[0] * self.data[3] - self.data[1] * self.data[2]
    }

    pub fn inverse_2x2(&self) -> Result<Self> {
        let det = self.det_2x2();
        if det.norm() <= T::epsilon() * self.max_norm() * self.max_norm() {
            return Err(Error::InvalidArgument("singular 2x2 matrix".into()));
        }
        let inv = C::<T>::one() / det;
        Ok(Self::from_2x2(self.data[3] * inv, -self.data[1] * inv, -self.data[2] * inv, self.data[0] * inv))
    }

    /// Converts the entries to another precision.
    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] = out.data[i * rhs.cols + j] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in difference");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

/// ⟨u|v⟩, antilinear in the first argument.
pub fn inner<T: Real>(u: &[C<T>], v: &[C<T>]) -> C<T> {
    u.iter().zip(v).fold(C::zero(), |acc, (a, b)| acc + a.conj() * b)
}

pub fn norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn norm_sqr<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Returns `v/‖v‖`, or `None` for the zero vector.
pub fn normalized<T: Real>(v: &[C<T>]) -> Option<Vec<C<T>>> {
    let n = norm(v);
    if n <= T::zero() {
        return None;
    }
    Some(v.iter().map(|z| z / n).collect())
}

fn nan_max<T: Real>(acc: T, x: T) -> T {
    if acc.is_nan() || x.is_nan() {
        T::nan()
    } else {
        acc.max(x)
    }
}
