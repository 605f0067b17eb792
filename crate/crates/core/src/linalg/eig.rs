//! Cyclic complex Jacobi eigensolver for small dense Hermitian matrices.
//!
//! Output is deterministic: rotations are applied in a fixed (p, q) sweep
//! order, eigenvalues come back ascending (ties keep their diagonal position)
//! and every eigenvector is rotated so that its largest-magnitude component is
//! real and nonnegative, the lowest index winning ties.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::scalar::{re, Real, C};
use crate::tolerances::Tolerances;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        self.vectors.column(k)
    }

    /// Σ f(λᵢ) vᵢvᵢ†.
    pub fn apply(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.apply(|x| x)
    }

    /// Number of eigenvalues above `rel · max(|λ|)`.
    pub fn rank(&self, rel: f64) -> usize {
        let scale = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return 0;
        }
        let thr = T::lit(rel) * scale;
        self.values.iter().filter(|v| **v > thr).count()
    }
}

/// Eigendecomposition with the precision's default tolerances.
pub fn hermitian_eig<T: Real>(h: &ComplexMatrix<T>) -> Result<EigenSystem<T>> {
    hermitian_eig_with(h, &T::tolerances())
}

pub fn hermitian_eig_with<T: Real>(h: &ComplexMatrix<T>, tol: &Tolerances) -> Result<EigenSystem<T>> {
    if h.as_slice().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    h.check_hermitian(tol.hermitian)?;
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::<T>::identity(n);
    let total = a.frobenius_norm().powi(2);
    let threshold = T::lit(tol.jacobi_offdiag) * total;

    let mut converged = total == T::zero();
    for _ in 0..tol.jacobi_max_sweeps {
        if converged {
            break;
        }
        if off_diagonal_mass(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_mass(&a) > threshold {
        return Err(Error::EigenNonConvergent { sweeps: tol.jacobi_max_sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        vectors.set_column(k, &col);
    }
    Ok(EigenSystem { values, vectors })
}

/// Eigenvalues only.
pub fn eigenvalues<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(hermitian_eig(h)?.values)
}

pub fn min_eigenvalue<T: Real>(h: &ComplexMatrix<T>) -> Result<T> {
    Ok(hermitian_eig(h)?.min())
}

fn off_diagonal_mass<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Applies the rotation G that zeroes a[p][q]: a ← G†aG, v ← vG.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (mag + mag);
    let t = if tau == T::zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let cs = T::one() / (T::one() + t * t).sqrt();
    let sn = t * cs;
    let phase = (apq / mag).conj();

    let g_pp = re(cs);
    let g_pq = re(sn);
    let g_qp = phase * (-sn);
    let g_qq = phase * cs;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C::zero();
    a[(q, p)] = C::zero();
    a[(p, p)] = re(a[(p, p)].re);
    a[(q, q)] = re(a[(q, q)].re);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Rotates `col` so its largest-magnitude entry (lowest index on ties) is real and nonnegative.
pub(crate) fn fix_phase<T: Real>(col: &mut [C<T>]) {
    let mut best = 0;
    let mut best_mag = T::zero();
    for (i, z) in col.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == T::zero() {
        return;
    }
    let u: C<T> = col[best].conj() / best_mag;
    for z in col.iter_mut() {
        *z = *z * u;
    }
    col[best] = Complex::new(best_mag, T::zero());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn identity_spectrum() {
        let es = hermitian_eig(&ComplexMatrix::<f64>::identity(4)).unwrap();
        assert_eq!(es.values, vec![1.0; 4]);
        assert_eq!(es.vectors, ComplexMatrix::identity(4));
    }

    #[test]
    fn zero_matrix() {
        let es = hermitian_eig(&ComplexMatrix::<f64>::zeros(3, 3)).unwrap();
        assert_eq!(es.values, vec![0.0; 3]);
    }

    #[test]
    fn two_by_two_complex() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = ComplexMatrix::<f64>::from_2x2(c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0));
        let es = hermitian_eig(&m).unwrap();
        assert!((es.values[0] - 1.0).abs() < 1e-15);
        assert!((es.values[1] - 3.0).abs() < 1e-15);
        assert!(es.reconstruct().max_diff(&m) < 1e-15);
        for k in 0..2 {
            let col = es.vector(k);
            let lead = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let top = col.iter().find(|z| (z.norm() - lead).abs() < 1e-15).unwrap();
            assert!(top.im == 0.0 && top.re >= 0.0);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::<f64>::from_2x2(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn rank_threshold() {
        let m = ComplexMatrix::<f64>::diagonal(&[1.0, 0.5, 1e-13, 0.0]);
        assert_eq!(hermitian_eig(&m).unwrap().rank(1e-10), 2);
    }

    #[test]
    fn single_precision_runs() {
        let m = ComplexMatrix::<f32>::from_2x2(c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0));
        let es = hermitian_eig(&m).unwrap();
        assert!((es.values[0] - 1.0).abs() < 1e-6);
        assert!((es.values[1] - 3.0).abs() < 1e-6);
    }
}
