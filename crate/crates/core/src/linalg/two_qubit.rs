//! Two-qubit specific structure: Pauli matrices, the flip operator and the
//! spin-flip (tilde) operation.

use num_traits::{One, Zero};

use crate::linalg::matrix::ComplexMatrix;
use crate::scalar::{c, Real, C};

pub fn pauli_x<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_2x2(C::zero(), C::one(), C::one(), C::zero())
}

pub fn pauli_y<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_2x2(C::zero(), c(0.0, -1.0), c(0.0, 1.0), C::zero())
}

pub fn pauli_z<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_2x2(C::one(), C::zero(), C::zero(), -C::<T>::one())
}

/// [σx, σy, σz].
pub fn paulis<T: Real>() -> [ComplexMatrix<T>; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Swap operator V|ab⟩ = |ba⟩ on C^d ⊗ C^d.
pub fn flip<T: Real>(d: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(d * d, d * d, |i, j| {
        let (a, b) = (i / d, i % d);
        if j == b * d + a {
            C::one()
        } else {
            C::zero()
        }
    })
}

/// Ã = σ₂ A* σ₂.
pub fn tilde_local<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    assert_eq!((a.rows(), a.cols()), (2, 2), "tilde is defined on 2x2 operators");
    // σ₂ A* σ₂ = [[a11*, -a10*], [-a01*, a00*]]
    ComplexMatrix::from_2x2(a[(1, 1)].conj(), -a[(1, 0)].conj(), -a[(0, 1)].conj(), a[(0, 0)].conj())
}

/// |ψ̃⟩ = (σ₂⊗σ₂)|ψ*⟩.
pub fn tilde_state<T: Real>(psi: &[C<T>]) -> Vec<C<T>> {
    assert_eq!(psi.len(), 4, "tilde is defined on two-qubit vectors");
    // σ₂⊗σ₂ maps |00⟩→−|11⟩, |01⟩→|10⟩, |10⟩→|01⟩, |11⟩→−|00⟩.
    vec![-psi[3].conj(), psi[2].conj(), psi[1].conj(), -psi[0].conj()]
}
