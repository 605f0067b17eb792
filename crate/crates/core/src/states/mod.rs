//! Density matrices, named two-qubit families and random ensembles.

mod ensemble;
mod file;

pub use ensemble::{random_state, EnsembleKind, EnsembleSpec, SampleRng};
pub use file::StateFile;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{BipartiteOperator, ComplexMatrix};
use crate::scalar::{re, Real, C};
use crate::tolerances::Tolerances;

/// A positive semidefinite bipartite operator with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    op: BipartiteOperator<T>,
    rescaled: bool,
}

impl<T: Real> DensityMatrix<T> {
    pub fn op(&self) -> &BipartiteOperator<T> {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.op.dims()
    }

    /// Set when validation had to rescale the input to unit trace.
    pub fn was_rescaled(&self) -> bool {
        self.rescaled
    }

    pub fn purity(&self) -> T {
        let m = self.op.matrix();
        m.hs_inner(m)
    }

    /// Skips validation; for operators that are states by construction.
    pub(crate) fn from_op_unchecked(op: BipartiteOperator<T>) -> Self {
        Self { op, rescaled: false }
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        let (da, db) = self.dims();
        DensityMatrix {
            op: BipartiteOperator::from_parts(da, db, self.matrix().cast()),
            rescaled: self.rescaled,
        }
    }
}

/// Checks Hermiticity, normalizes the trace and checks positivity.
pub fn validate<T: Real>(m: &BipartiteOperator<T>) -> Result<DensityMatrix<T>> {
    validate_with(m, &T::tolerances())
}

pub fn validate_with<T: Real>(m: &BipartiteOperator<T>, tol: &Tolerances) -> Result<DensityMatrix<T>> {
    m.matrix().check_hermitian(tol.hermitian)?;
    let tr = m.trace();
    if !(tr > T::zero()) {
        return Err(Error::NotNormalizable { trace: tr.as_f64() });
    }
    let rescaled = (tr - T::one()).abs() > T::lit(tol.trace);
    let op = if rescaled { m.scale(T::one() / tr) } else { m.clone() };
    let min = op.eig_with(tol)?.min();
    if min < -T::lit(tol.psd) {
        return Err(Error::NotPsd { min_eigenvalue: min.as_f64() });
    }
    Ok(DensityMatrix { op, rescaled })
}

/// The frozen Bell basis e₀ = |ψ⁻⟩, e₁ = |ψ⁺⟩, e₂ = |φ⁻⟩, e₃ = |φ⁺⟩.
pub fn bell_basis<T: Real>() -> [Vec<C<T>>; 4] {
    let s = T::FRAC_1_SQRT_2();
    let z = C::zero();
    [
        vec![z, re(s), re(-s), z],
        vec![z, re(s), re(s), z],
        vec![re(s), z, z, re(-s)],
        vec![re(s), z, z, re(s)],
    ]
}

/// Bell basis vectors as the columns of a unitary.
pub fn bell_matrix<T: Real>() -> ComplexMatrix<T> {
    let basis = bell_basis::<T>();
    ComplexMatrix::from_fn(4, 4, |i, j| basis[j][i])
}

/// Bell-diagonal state Σ pᵢ |eᵢ⟩⟨eᵢ|.
pub fn bell_diagonal<T: Real>(p: [T; 4]) -> Result<DensityMatrix<T>> {
    let slack = T::lit(T::tolerances().trace);
    if p.iter().any(|x| !x.is_finite() || *x < T::zero()) {
        return Err(Error::InvalidProbabilityVector(format!("negative or non-finite entry in {p:?}")));
    }
    let sum: T = p.iter().copied().sum();
    if (sum - T::one()).abs() > slack {
        return Err(Error::InvalidProbabilityVector(format!("entries sum to {sum}")));
    }
    Ok(DensityMatrix::from_op_unchecked(bell_mixture(p)))
}

/// Σ wᵢ |eᵢ⟩⟨eᵢ| for arbitrary real weights.
pub(crate) fn bell_mixture<T: Real>(w: [T; 4]) -> BipartiteOperator<T> {
    let basis = bell_basis::<T>();
    let mut m = ComplexMatrix::zeros(4, 4);
    for (wi, e) in w.iter().zip(basis.iter()) {
        if *wi != T::zero() {
            m = &m + &ComplexMatrix::projector(e).scale(*wi);
        }
    }
    BipartiteOperator::from_parts(2, 2, m)
}

/// Werner state p|ψ⁻⟩⟨ψ⁻| + (1 − p)I/4, p ∈ [−1/3, 1].
pub fn werner<T: Real>(p: T) -> Result<DensityMatrix<T>> {
    if !(p >= T::lit(-1.0 / 3.0) - T::epsilon() && p <= T::one() + T::epsilon()) {
        return Err(Error::InvalidArgument(format!("Werner parameter {p} outside [-1/3, 1]")));
    }
    let q = (T::one() - p) / T::lit(4.0);
    Ok(DensityMatrix::from_op_unchecked(bell_mixture([p + q, q, q, q])))
}

/// The σ_c family, unnormalized and not necessarily positive:
///
/// ```text
///        ⎡a+c  0   0    d ⎤
///  1/2 · ⎢ 0   0   0    0 ⎥
///        ⎢ 0   0  b-c   0 ⎥
///        ⎣ d   0   0   a-b⎦
/// ```
pub fn sigma_c<T: Real>(a: T, b: T, c: T, d: T) -> BipartiteOperator<T> {
    let half = T::lit(0.5);
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = re((a + c) * half);
    m[(2, 2)] = re((b - c) * half);
    m[(3, 3)] = re((a - b) * half);
    m[(0, 3)] = re(d * half);
    m[(3, 0)] = re(d * half);
    BipartiteOperator::from_parts(2, 2, m)
}

/// Maximally mixed state on dimA ⊗ dimB.
pub fn maximally_mixed<T: Real>(dim_a: usize, dim_b: usize) -> DensityMatrix<T> {
    let n = T::from_usize(dim_a * dim_b).expect("small dimension");
    DensityMatrix::from_op_unchecked(BipartiteOperator::identity(dim_a, dim_b).scale(T::one() / n))
}

/// Pure state |v⟩⟨v|/⟨v|v⟩.
pub fn pure_state<T: Real>(dim_a: usize, dim_b: usize, v: &[C<T>]) -> Result<DensityMatrix<T>> {
    let v = crate::linalg::normalized(v).ok_or(Error::NotNormalizable { trace: 0.0 })?;
    if v.len() != dim_a * dim_b {
        return Err(Error::Shape(format!("vector of length {} on {dim_a}⊗{dim_b}", v.len())));
    }
    Ok(DensityMatrix::from_op_unchecked(BipartiteOperator::projector(dim_a, dim_b, &v)))
}
