//! Negative-part decomposition of σ^{T_B}, the binegativity |σ^{T_B}|^{T_B},
//! negativity measures and per-state theorem checks.


use crate::error::{Error, Result};
use crate::linalg::{operator_abs, schmidt_coefficients, trace_norm, BipartiteOperator, ComplexMatrix, Side};
use crate::scalar::{Real, C};
use crate::states::{validate_with, DensityMatrix};
use crate::tolerances::Tolerances;

/// One negative eigenpair of σ^{T_B}: the eigenvalue is −`weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeTerm<T> {
    pub weight: T,
    pub vector: Vec<C<T>>,
}

/// σ^{T_B} = P − Σ λᵢ|ψᵢ⟩⟨ψᵢ| with P ⪰ 0 and P|ψᵢ⟩ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeDecomposition<T> {
    /// Unnormalized positive part P.
    pub positive: BipartiteOperator<T>,
    /// Negative terms, most negative first.
    pub negatives: Vec<NegativeTerm<T>>,
    /// Full ascending spectrum of σ^{T_B}.
    pub spectrum: Vec<T>,
    /// Eigenvalues assigned to P (ascending); band values are zeroed.
    pub positive_spectrum: Vec<T>,
}

impl<T: Real> NegativeDecomposition<T> {
    pub fn dims(&self) -> (usize, usize) {
        self.positive.dims()
    }

    /// Sum of the negative weights.
    pub fn negativity(&self) -> T {
        self.negatives.iter().fold(T::zero(), |acc, t| acc + t.weight)
    }

    /// λ: the largest negative weight, zero for PPT input.
    pub fn lambda(&self) -> T {
        self.negatives.first().map_or(T::zero(), |t| t.weight)
    }

    /// ψ for the largest negative weight.
    pub fn psi(&self) -> Option<&[C<T>]> {
        self.negatives.first().map(|t| t.vector.as_slice())
    }

    pub fn is_entangled(&self, tol: &Tolerances) -> bool {
        self.negativity() > T::lit(tol.psd)
    }

    /// Σ λᵢ|ψᵢ⟩⟨ψᵢ|.
    pub fn negative_part(&self) -> BipartiteOperator<T> {
        let (da, db) = self.dims();
        let mut m = ComplexMatrix::zeros(da * db, da * db);
        for t in &self.negatives {
            m = &m + &ComplexMatrix::projector(&t.vector).scale(t.weight);
        }
        BipartiteOperator::from_parts(da, db, m)
    }

    /// P − Σ λᵢ|ψᵢ⟩⟨ψᵢ|, which should reproduce σ^{T_B}.
    pub fn reconstruct(&self) -> BipartiteOperator<T> {
        &self.positive - &self.negative_part()
    }

    /// P^{T_B} + Σ λᵢ(|ψᵢ⟩⟨ψᵢ|)^{T_B}.
    pub fn binegativity(&self) -> BipartiteOperator<T> {
        (&self.positive + &self.negative_part()).partial_transpose(Side::B)
    }

    /// Numerical rank of P at the relative threshold.
    pub fn positive_rank(&self, rel: f64) -> usize {
        let max = self.positive_spectrum.iter().fold(T::zero(), |m, v| m.max(*v));
        if max == T::zero() {
            return 0;
        }
        let thr = T::lit(rel) * max;
        self.positive_spectrum.iter().filter(|v| **v > thr).count()
    }
}

pub fn negative_decomposition<T: Real>(sigma: &DensityMatrix<T>) -> Result<NegativeDecomposition<T>> {
    negative_decomposition_with(sigma, &T::tolerances())
}

/// Spectral split of σ^{T_B} at zero. Eigenvalues inside ±`zero_band` count as
/// zeros of P.
pub fn negative_decomposition_with<T: Real>(
    sigma: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<NegativeDecomposition<T>> {
    let pt = sigma.op().partial_transpose(Side::B);
    let es = pt.eig_with(tol)?;
    let band = T::lit(tol.zero_band);
    let (da, db) = pt.dims();

    let mut negatives = Vec::new();
    let mut positive_spectrum = Vec::new();
    for (k, &v) in es.values.iter().enumerate() {
        if v < -band {
            negatives.push(NegativeTerm { weight: -v, vector: es.vector(k) });
        } else {
            positive_spectrum.push(if v > band { v } else { T::zero() });
        }
    }
    if (da, db) == (2, 2) {
        let strong = negatives.iter().filter(|t| t.weight > T::lit(tol.psd)).count();
        if strong >= 2 {
            return Err(Error::DegenerateNegativeSpectrum { count: strong });
        }
    }
    let positive = es.apply(|v| if v > band { v } else { T::zero() });
    Ok(NegativeDecomposition {
        positive: BipartiteOperator::from_parts(da, db, positive.hermitian_part()),
        negatives,
        spectrum: es.values,
        positive_spectrum,
    })
}

/// |σ^{T_B}|^{T_B}.
pub fn binegativity<T: Real>(sigma: &DensityMatrix<T>) -> Result<BipartiteOperator<T>> {
    let pt = sigma.op().partial_transpose(Side::B);
    Ok(operator_abs(&pt)?.partial_transpose(Side::B))
}

/// Entanglement numbers derived from the partial transpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementSummary<T> {
    /// Sum of |negative eigenvalues| of σ^{T_B}.
    pub negativity: T,
    /// log₂‖σ^{T_B}‖₁.
    pub log_negativity: T,
    pub is_ppt: bool,
    /// Largest negative weight (the single one for entangled two-qubit states).
    pub lambda: T,
    /// Smallest eigenvalue of |σ^{T_B}|^{T_B}.
    pub binegativity_min_eig: T,
}

pub fn summary<T: Real>(sigma: &DensityMatrix<T>) -> Result<EntanglementSummary<T>> {
    summary_with(sigma, &T::tolerances())
}

pub fn summary_with<T: Real>(sigma: &DensityMatrix<T>, tol: &Tolerances) -> Result<EntanglementSummary<T>> {
    let pt = sigma.op().partial_transpose(Side::B);
    let es = pt.eig_with(tol)?;
    let negativity = es.values.iter().filter(|v| **v < T::zero()).fold(T::zero(), |acc, v| acc - *v);
    let lambda = es.values.first().map_or(T::zero(), |v| (-*v).max(T::zero()));
    let tn: T = es.values.iter().map(|v| v.abs()).sum();
    let bineg = BipartiteOperator::from_parts(pt.dims().0, pt.dims().1, es.apply(|v| v.abs()).hermitian_part())
        .partial_transpose(Side::B);
    Ok(EntanglementSummary {
        negativity,
        log_negativity: tn.log2(),
        is_ppt: negativity <= T::lit(tol.psd),
        lambda,
        binegativity_min_eig: bineg.eig_with(tol)?.min(),
    })
}

/// log₂‖σ^{T_B}‖₁.
pub fn log_negativity<T: Real>(sigma: &DensityMatrix<T>) -> Result<T> {
    Ok(trace_norm(&sigma.op().partial_transpose(Side::B))?.log2())
}

/// σ = (1 + λ)·state − λ·deviation with `state` = P^{T_B}/(1 + λ) separable.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableApproximation<T> {
    pub state: DensityMatrix<T>,
    /// (|ψ⟩⟨ψ|)^{T_B}, not scaled by λ.
    pub deviation: BipartiteOperator<T>,
    pub lambda: T,
}

impl<T: Real> SeparableApproximation<T> {
    pub fn reconstruct(&self) -> BipartiteOperator<T> {
        let one = T::one();
        &self.state.op().scale(one + self.lambda) - &self.deviation.scale(self.lambda)
    }
}

pub fn separable_approximation<T: Real>(sigma: &DensityMatrix<T>) -> Result<SeparableApproximation<T>> {
    separable_approximation_with(sigma, &T::tolerances())
}

pub fn separable_approximation_with<T: Real>(
    sigma: &DensityMatrix<T>,
    tol: &Tolerances,
) -> Result<SeparableApproximation<T>> {
    if sigma.dims() != (2, 2) {
        return Err(Error::Shape("separable approximation is defined for two qubits".into()));
    }
    let d = negative_decomposition_with(sigma, tol)?;
    if !d.is_entangled(tol) {
        return Err(Error::NotEntangled);
    }
    let lambda = d.lambda();
    let psi = d.psi().expect("entangled input has a negative term");
    let approx = d.positive.partial_transpose(Side::B).scale(T::one() / (T::one() + lambda));
    let state = validate_with(&approx, tol)?;
    let ppt_min = state.op().partial_transpose(Side::B).eig_with(tol)?.min();
    if ppt_min < -T::lit(tol.psd) {
        return Err(Error::CertificateFailure {
            reason: "separable approximation is not PPT".into(),
            margins: vec![("ppt_min_eig".into(), ppt_min.as_f64())],
        });
    }
    Ok(SeparableApproximation {
        state,
        deviation: BipartiteOperator::projector(2, 2, psi).partial_transpose(Side::B),
        lambda,
    })
}

/// Per-state outcome of the two-qubit theorem checks. Violations are data.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremFlags<T> {
    pub entangled: bool,
    pub negativity: T,
    pub lambda: T,
    /// Minimum eigenvalue of P^{T_B}.
    pub p_tb_min_eig: T,
    /// Entangled: P^{T_B} strictly positive. PPT: P^{T_B} = σ ⪰ 0 within slack.
    pub p_tb_positive: bool,
    /// Numerical rank of P (entangled input only).
    pub positive_rank: Option<usize>,
    pub rank3: Option<bool>,
    /// Minimum eigenvalue of the binegativity.
    pub binegativity_min_eig: T,
    pub binegativity_positive: bool,
    /// Smaller Schmidt coefficient of ψ (entangled input only).
    pub psi_schmidt_min: Option<T>,
    /// ‖P^{T_B} − (σ + |σ^{T_B}|^{T_B})/2‖_max.
    pub midpoint_error: T,
    /// PPT input only: ‖|σ^{T_B}|^{T_B} − σ‖_max.
    pub ppt_identity_error: Option<T>,
    /// Spectrum of P (ascending).
    pub positive_spectrum: Vec<T>,
}

pub fn check_theorems<T: Real>(sigma: &DensityMatrix<T>) -> Result<TheoremFlags<T>> {
    let tol = T::tolerances();
    let d = negative_decomposition_with(sigma, &tol)?;
    check_theorems_from(sigma, &d, &tol)
}

/// Theorem checks reusing an existing decomposition.
pub fn check_theorems_from<T: Real>(
    sigma: &DensityMatrix<T>,
    d: &NegativeDecomposition<T>,
    tol: &Tolerances,
) -> Result<TheoremFlags<T>> {
    if sigma.dims() != (2, 2) {
        return Err(Error::Shape("theorem checks are defined for two qubits".into()));
    }
    let slack = T::lit(tol.psd);
    let entangled = d.is_entangled(tol);
    let p_tb = d.positive.partial_transpose(Side::B);
    let p_tb_min_eig = p_tb.eig_with(tol)?.min();
    let bineg = d.binegativity();
    let binegativity_min_eig = bineg.eig_with(tol)?.min();

    let half = T::lit(0.5);
    let midpoint = (&sigma.op().scale(half) + &bineg.scale(half)).matrix().clone();
    let midpoint_error = p_tb.matrix().max_diff(&midpoint);

    let (positive_rank, rank3, psi_schmidt_min, ppt_identity_error, p_tb_positive) = if entangled {
        let rank = d.positive_rank(tol.rank);
        let psi = d.psi().expect("entangled input has a negative term");
        let sc = schmidt_coefficients(psi, 2, 2)?;
        (Some(rank), Some(rank == 3), Some(sc[1]), None, p_tb_min_eig > T::zero())
    } else {
        let err = bineg.max_diff(sigma.op());
        (None, None, None, Some(err), p_tb_min_eig >= -slack)
    };

    Ok(TheoremFlags {
        entangled,
        negativity: d.negativity(),
        lambda: d.lambda(),
        p_tb_min_eig,
        p_tb_positive,
        positive_rank,
        rank3,
        binegativity_min_eig,
        binegativity_positive: binegativity_min_eig >= -slack,
        psi_schmidt_min,
        midpoint_error,
        ppt_identity_error,
        positive_spectrum: d.positive_spectrum.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::states::{bell_basis, werner};

    fn phi_plus() -> Vec<C<f64>> {
        bell_basis::<f64>()[3].clone()
    }

    #[test]
    fn singlet_decomposition() {
        let s = werner(1.0f64).unwrap();
        let d = negative_decomposition(&s).unwrap();
        assert_eq!(d.negatives.len(), 1);
        assert!((d.lambda() - 0.5).abs() < 1e-12);
        let overlap = crate::linalg::inner(d.psi().unwrap(), &phi_plus()).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let expected = (&ComplexMatrix::identity(4) - &ComplexMatrix::projector(&phi_plus())).scale(0.5);
        assert!(d.positive.matrix().max_diff(&expected) < 1e-12);
    }

    #[test]
    fn ppt_input_has_no_negatives() {
        let s = werner(0.2f64).unwrap();
        let d = negative_decomposition(&s).unwrap();
        assert!(d.negatives.is_empty());
        assert!(d.positive.max_diff(&s.op().partial_transpose(Side::B)) < 1e-12);
        assert!(binegativity(&s).unwrap().max_diff(s.op()) < 1e-12);
    }

    #[test]
    fn singlet_binegativity_is_half_identity() {
        let b = binegativity(&werner(1.0f64).unwrap()).unwrap();
        assert!(b.matrix().max_diff(&ComplexMatrix::identity(4).scale(0.5)) < 1e-12);
    }

    #[test]
    fn singlet_summary() {
        let s = summary(&werner(1.0f64).unwrap()).unwrap();
        assert!((s.negativity - 0.5).abs() < 1e-12);
        assert!((s.log_negativity - 1.0).abs() < 1e-12);
        assert!(!s.is_ppt);
        assert!((s.binegativity_min_eig - 0.5).abs() < 1e-12);
    }

    #[test]
    fn werner_third_is_ppt_boundary() {
        let s = summary(&werner(1.0f64 / 3.0).unwrap()).unwrap();
        assert!(s.is_ppt);
        assert!(s.negativity < 1e-12);
    }

    #[test]
    fn separable_approximation_requires_entanglement() {
        assert_eq!(separable_approximation(&werner(0.2f64).unwrap()).unwrap_err(), Error::NotEntangled);
    }

    #[test]
    fn singlet_separable_approximation() {
        let a = separable_approximation(&werner(1.0f64).unwrap()).unwrap();
        let p_tb = &ComplexMatrix::identity(4).scale(0.25) + &ComplexMatrix::projector(&bell_basis::<f64>()[0]).scale(0.5);
        assert!(a.state.matrix().max_diff(&p_tb.scale(1.0 / 1.5)) < 1e-12);
        assert!(a.reconstruct().max_diff(&werner(1.0f64).unwrap().op().clone()) < 1e-12);
    }

    #[test]
    fn singlet_flags() {
        let f = check_theorems(&werner(1.0f64).unwrap()).unwrap();
        assert!(f.entangled && f.p_tb_positive && f.binegativity_positive);
        assert!((f.p_tb_min_eig - 0.25).abs() < 1e-12);
        assert_eq!(f.positive_rank, Some(3));
        assert!((f.binegativity_min_eig - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ppt_flags() {
        let f = check_theorems(&werner(0.1f64).unwrap()).unwrap();
        assert!(!f.entangled && f.p_tb_positive && f.binegativity_positive);
        assert_eq!(f.positive_rank, None);
        assert!(f.ppt_identity_error.unwrap() < 1e-12);
    }

    #[test]
    fn single_precision_singlet() {
        let s = werner(1.0f32).unwrap();
        let b = binegativity(&s).unwrap();
        assert!(b.matrix().max_diff(&ComplexMatrix::identity(4).scale(0.5)) < 1e-5);
        let d = negative_decomposition(&s).unwrap();
        assert!((d.lambda() - 0.5).abs() < 1e-5);
    }
}
