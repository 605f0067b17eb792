//! Proof objects for the positivity of the binegativity of a two-qubit state.
//!
//! Starting from σ^{T_B} = P − λ|ψ⟩⟨ψ| and the normal form of P, this module
//! builds the witness |φ⟩, the matrix C = H₁H₂ with Tr CC* ≥ 2, the bound
//! λ₀ = (1 − 2p₀)M/N ≥ λ and the operator X = P^{T_B} + λ₀(|ψ⟩⟨ψ|)^{T_B}, so that
//!
//! ```text
//! |σ^{T_B}|^{T_B} = (1 − λ/λ₀) P^{T_B} + (λ/λ₀) X
//! ```
//!
//! is an explicit convex combination of two positive operators.

use serde::Serialize;

use crate::binegativity::{negative_decomposition_with, NegativeDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{flip, inner, norm_sqr, tilde_local, BipartiteOperator, ComplexMatrix, Side};
use crate::normal_form::{
    filter_normal_form_with, kernel_state_with, pt_in_normal_form, rank3_regularize_with, NormalForm,
};
use crate::report::MatrixJson;
use crate::scalar::{Real, C};
use crate::states::{bell_basis, DensityMatrix};
use crate::tolerances::Tolerances;

/// Every checked quantity of a certificate, as a signed margin or error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateMargins {
    /// Minimum eigenvalue of P^{T_B}.
    pub p_tb_min: f64,
    /// Minimum eigenvalue of X.
    pub x_min: f64,
    /// Tr CC* − 2.
    pub tr_cc_star: f64,
    /// λ₀ − λ.
    pub lambda: f64,
    /// ‖|σ^{T_B}|^{T_B} − recombination‖_max.
    pub recombination_error: f64,
    /// Tr[(|ψ⟩⟨ψ|)^{T_B}|φ⟩⟨φ|].
    pub hyperplane_overlap: f64,
    /// |⟨φ|σ|φ⟩ − closed form|.
    pub closed_form_error: f64,
    /// 1 − |⟨ψ_nf|ψ⟩|, kernel of the normal form against the negative eigenvector.
    pub kernel_mismatch: f64,
    /// Reconstruction residual of the normal form of P.
    pub normal_form_residual: f64,
}

impl CertificateMargins {
    pub fn as_pairs(&self) -> Vec<(String, f64)> {
        vec![
            ("p_tb_min".into(), self.p_tb_min),
            ("x_min".into(), self.x_min),
            ("tr_cc_star".into(), self.tr_cc_star),
            ("lambda".into(), self.lambda),
            ("recombination_error".into(), self.recombination_error),
            ("hyperplane_overlap".into(), self.hyperplane_overlap),
            ("closed_form_error".into(), self.closed_form_error),
            ("kernel_mismatch".into(), self.kernel_mismatch),
            ("normal_form_residual".into(), self.normal_form_residual),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinegativityCertificate<T> {
    /// Witness |φ⟩, unit norm.
    pub phi: Vec<C<T>>,
    /// Kernel state |ψ⟩ of the normal form, unit norm.
    pub psi: Vec<C<T>>,
    pub l: T,
    pub m: T,
    pub n: T,
    pub c: ComplexMatrix<T>,
    pub tr_cc_star: T,
    /// λ from the negative eigenvalue of σ^{T_B}.
    pub lambda: T,
    pub lambda0: T,
    pub x: BipartiteOperator<T>,
    /// (1 − λ/λ₀, λ/λ₀).
    pub weights: (T, T),
    /// ⟨φ|σ|φ⟩ evaluated directly.
    pub witness_expectation: T,
    /// (1 − 2p₀)/(2NL) − λ Tr CC*/(4ML).
    pub closed_form_expectation: T,
    pub hyperplane_overlap: T,
    /// P was raised to rank 3 before the normal form was taken.
    pub regularized: bool,
    pub normal_form: NormalForm<T>,
    pub margins: CertificateMargins,
}

/// (Ã⊗B̃*)|φ⁺⟩ normalized, and its squared norm L.
pub fn nonpositivity_witness<T: Real>(nf: &NormalForm<T>) -> Result<(Vec<C<T>>, T)> {
    if !nf.is_bell_diagonal() {
        return Err(Error::NotBellDiagonal);
    }
    let k = tilde_local(&nf.a).kron(&tilde_local(&nf.b).conj());
    let raw = k.mul_vec(&bell_basis::<T>()[3]);
    let l = norm_sqr(&raw);
    let s = l.sqrt();
    Ok((raw.iter().map(|z| z / s).collect(), l))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    pub c: ComplexMatrix<T>,
    /// Ã†Ã.
    pub h1: ComplexMatrix<T>,
    /// B̃ᵀB̃*.
    pub h2: ComplexMatrix<T>,
    /// Tr CC*, real.
    pub tr_cc_star: T,
}

pub fn c_matrix<T: Real>(nf: &NormalForm<T>) -> Result<CMatrix<T>> {
    if !nf.is_bell_diagonal() {
        return Err(Error::NotBellDiagonal);
    }
    let at = tilde_local(&nf.a);
    let bt = tilde_local(&nf.b);
    let h1 = &at.adjoint() * &at;
    let h2 = &bt.transpose() * &bt.conj();
    let c = &h1 * &h2;
    let tr_cc_star = (&c * &c.conj()).trace().re;
    Ok(CMatrix { c, h1, h2, tr_cc_star })
}

/// λ₀ = (1 − 2p₀)M/N.
pub fn lambda_bound<T: Real>(nf: &NormalForm<T>, m: T) -> Result<T> {
    lambda_bound_with(nf, m, &T::tolerances())
}

pub fn lambda_bound_with<T: Real>(nf: &NormalForm<T>, m: T, tol: &Tolerances) -> Result<T> {
    if !nf.is_bell_diagonal() {
        return Err(Error::NotBellDiagonal);
    }
    let p0 = nf.p[0];
    if p0 >= T::lit(0.5 - tol.p0_gap) {
        return Err(Error::P0TooLarge { p0: p0.as_f64() });
    }
    Ok((T::one() - T::lit(2.0) * p0) * m / nf.n)
}

/// X = P^{T_B} + λ₀(|ψ⟩⟨ψ|)^{T_B}.
pub fn x_operator<T: Real>(d: &NegativeDecomposition<T>, lambda0: T) -> Result<BipartiteOperator<T>> {
    if d.dims() != (2, 2) {
        return Err(Error::Shape("X is defined for two qubits".into()));
    }
    let psi = d.psi().ok_or(Error::NotEntangled)?;
    let (da, db) = d.dims();
    let kick = BipartiteOperator::projector(da, db, psi).scale(lambda0);
    Ok((&d.positive + &kick).partial_transpose(Side::B))
}

/// The two summands of 2N(Ã†⊗B̃ᵀ)X(Ã⊗B̃*), with X built from the normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct XPrimeTerms<T> {
    /// 2Σᵢ₌₀² (p₀ − p₃₋ᵢ)|eᵢ⟩⟨eᵢ|.
    pub term1: BipartiteOperator<T>,
    /// (1 − 2p₀)(C⊗I)[C̃†C̃⊗I + V](C†⊗I).
    pub term2: BipartiteOperator<T>,
}

impl<T: Real> XPrimeTerms<T> {
    pub fn sum(&self) -> BipartiteOperator<T> {
        &self.term1 + &self.term2
    }
}

pub fn x_prime_terms<T: Real>(nf: &NormalForm<T>, lambda0: T) -> Result<XPrimeTerms<T>> {
    let _ = lambda0;
    let cm = c_matrix(nf)?;
    let p = nf.p;
    let two = T::lit(2.0);
    let basis = bell_basis::<T>();
    let mut t1 = ComplexMatrix::zeros(4, 4);
    for i in 0..3 {
        t1 = &t1 + &ComplexMatrix::projector(&basis[i]).scale(two * (p[0] - p[3 - i]));
    }
    let i2 = ComplexMatrix::identity(2);
    let ct = tilde_local(&cm.c);
    let inner_op = &(&ct.adjoint() * &ct).kron(&i2) + &flip::<T>(2);
    let outer = cm.c.kron(&i2);
    let t2 = (&(&outer * &inner_op) * &outer.adjoint()).scale(T::one() - two * p[0]);
    Ok(XPrimeTerms {
        term1: BipartiteOperator::from_parts(2, 2, t1),
        term2: BipartiteOperator::from_parts(2, 2, t2.hermitian_part()),
    })
}

/// 2N(Ã†⊗B̃ᵀ)·op·(Ã⊗B̃*).
pub fn to_primed_frame<T: Real>(nf: &NormalForm<T>, op: &BipartiteOperator<T>) -> BipartiteOperator<T> {
    let k = tilde_local(&nf.a).kron(&tilde_local(&nf.b).conj());
    op.congruence(&k.adjoint()).scale(T::lit(2.0) * nf.n)
}

/// ⟨ψ⁻|[(C̃†C̃ + I)⊗I]⁻¹|ψ⁻⟩, equal to ½ for det C = 1.
pub fn singlet_resolvent<T: Real>(c: &ComplexMatrix<T>) -> Result<T> {
    let ct = tilde_local(c);
    let m = &(&ct.adjoint() * &ct) + &ComplexMatrix::identity(2);
    let inv = m.inverse_2x2()?.kron(&ComplexMatrix::identity(2));
    let singlet = &bell_basis::<T>()[0];
    Ok(inv.sandwich(singlet, singlet).re)
}

/// Tr[(|ψ⟩⟨ψ|)^{T_B}|φ⟩⟨φ|] for two-qubit vectors.
pub fn hyperplane_overlap<T: Real>(psi: &[C<T>], phi: &[C<T>]) -> T {
    let pt = BipartiteOperator::projector(2, 2, psi).partial_transpose(Side::B);
    pt.matrix().sandwich(phi, phi).re
}

pub fn certify<T: Real>(sigma: &DensityMatrix<T>) -> Result<BinegativityCertificate<T>> {
    certify_with(sigma, &T::tolerances())
}

fn failure(reason: &str, margins: &CertificateMargins) -> Error {
    Error::CertificateFailure { reason: reason.into(), margins: margins.as_pairs() }
}

fn blank_margins() -> CertificateMargins {
    CertificateMargins {
        p_tb_min: f64::NAN,
        x_min: f64::NAN,
        tr_cc_star: f64::NAN,
        lambda: f64::NAN,
        recombination_error: f64::NAN,
        hyperplane_overlap: f64::NAN,
        closed_form_error: f64::NAN,
        kernel_mismatch: f64::NAN,
        normal_form_residual: f64::NAN,
    }
}

/// Full certificate chain for an entangled two-qubit state.
pub fn certify_with<T: Real>(sigma: &DensityMatrix<T>, tol: &Tolerances) -> Result<BinegativityCertificate<T>> {
    if sigma.dims() != (2, 2) {
        return Err(Error::Shape("certificates are defined for two qubits".into()));
    }
    let d = negative_decomposition_with(sigma, tol)?;
    certify_from(sigma, &d, tol)
}

/// Certificate chain reusing an existing decomposition.
pub fn certify_from<T: Real>(
    sigma: &DensityMatrix<T>,
    d: &NegativeDecomposition<T>,
    tol: &Tolerances,
) -> Result<BinegativityCertificate<T>> {
    if !d.is_entangled(tol) {
        return Err(Error::NotEntangled);
    }
    let psi_dec = d.psi().expect("entangled input has a negative term").to_vec();
    let lambda = d.lambda();
    let mut margins = blank_margins();

    let regularized = d.positive_rank(tol.rank) < 3;
    let p = if regularized { rank3_regularize_with(&d.positive, &psi_dec, tol)? } else { d.positive.clone() };

    let lift = |e: Error| match e {
        e if e.is_numerical() => e,
        Error::FullRankInput { .. } | Error::NotBellDiagonal | Error::P0TooLarge { .. } | Error::NotPsd { .. } => {
            Error::CertificateFailure { reason: e.to_string(), margins: blank_margins().as_pairs() }
        }
        e => e,
    };

    let nf = filter_normal_form_with(&p, tol).map_err(lift)?;
    margins.normal_form_residual = nf.residual.as_f64();
    if !nf.is_bell_diagonal() {
        return Err(failure("normal form of P is not Bell-diagonal", &margins));
    }
    let scale = p.matrix().max_norm().max(T::one());
    if nf.residual > T::lit(tol.reconstruction) * scale {
        return Err(failure("normal form does not reconstruct P", &margins));
    }
    let (psi, m) = kernel_state_with(&nf, tol).map_err(lift)?;
    margins.kernel_mismatch = (T::one() - inner(&psi, &psi_dec).norm()).as_f64();

    let (phi, l) = nonpositivity_witness(&nf)?;
    let cm = c_matrix(&nf)?;
    let n = nf.n;
    let lambda0 = lambda_bound_with(&nf, m, tol).map_err(lift)?;
    let x = x_operator(d, lambda0)?;

    let p_tb = d.positive.partial_transpose(Side::B);
    let w1 = lambda / lambda0;
    let weights = (T::one() - w1, w1);
    let recombined = &p_tb.scale(weights.0) + &x.scale(weights.1);
    let bineg = d.binegativity();

    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let witness_expectation = sigma.matrix().sandwich(&phi, &phi).re;
    let closed_form_expectation =
        (T::one() - two * nf.p[0]) / (two * n * l) - lambda * cm.tr_cc_star / (four * m * l);
    let overlap = hyperplane_overlap(&psi, &phi);

    margins.p_tb_min = p_tb.eig_with(tol)?.min().as_f64();
    margins.x_min = x.eig_with(tol)?.min().as_f64();
    margins.tr_cc_star = (cm.tr_cc_star - two).as_f64();
    margins.lambda = (lambda0 - lambda).as_f64();
    margins.recombination_error = recombined.max_diff(&bineg).as_f64();
    margins.hyperplane_overlap = overlap.as_f64();
    margins.closed_form_error = (witness_expectation - closed_form_expectation).abs().as_f64();

    let bound = tol.certificate_bound;
    if margins.tr_cc_star < -bound {
        return Err(failure("Tr CC* < 2", &margins));
    }
    if margins.lambda < -bound {
        return Err(failure("λ > λ₀", &margins));
    }
    if margins.x_min < -tol.certificate {
        return Err(failure("X is not positive", &margins));
    }
    if !(margins.recombination_error <= tol.certificate) {
        return Err(failure("convex recombination does not reproduce the binegativity", &margins));
    }
    if !(margins.hyperplane_overlap > 0.0) {
        return Err(failure("hyperplane overlap is not positive", &margins));
    }
    if !regularized && !(margins.closed_form_error <= tol.certificate) {
        return Err(failure("witness expectation disagrees with its closed form", &margins));
    }

    Ok(BinegativityCertificate {
        phi,
        psi,
        l,
        m,
        n,
        c: cm.c,
        tr_cc_star: cm.tr_cc_star,
        lambda,
        lambda0,
        x,
        weights,
        witness_expectation,
        closed_form_expectation,
        hyperplane_overlap: overlap,
        regularized,
        normal_form: nf,
        margins,
    })
}

/// Report view of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateJson {
    pub lambda: f64,
    pub lambda0: f64,
    pub tr_cc_star: f64,
    pub weights: [f64; 2],
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub c: MatrixJson,
    pub phi: crate::report::VectorJson,
    pub psi: crate::report::VectorJson,
    pub x: MatrixJson,
    pub hyperplane_overlap: f64,
    pub witness_expectation: f64,
    pub closed_form_expectation: f64,
    pub regularized: bool,
    pub margins: CertificateMargins,
}

impl<T: Real> BinegativityCertificate<T> {
    pub fn to_json(&self) -> CertificateJson {
        use crate::report::VectorJson;
        CertificateJson {
            lambda: self.lambda.as_f64(),
            lambda0: self.lambda0.as_f64(),
            tr_cc_star: self.tr_cc_star.as_f64(),
            weights: [self.weights.0.as_f64(), self.weights.1.as_f64()],
            l: self.l.as_f64(),
            m: self.m.as_f64(),
            n: self.n.as_f64(),
            c: MatrixJson::from_matrix(&self.c),
            phi: VectorJson::from_slice(&self.phi),
            psi: VectorJson::from_slice(&self.psi),
            x: MatrixJson::from_matrix(self.x.matrix()),
            hyperplane_overlap: self.hyperplane_overlap.as_f64(),
            witness_expectation: self.witness_expectation.as_f64(),
            closed_form_expectation: self.closed_form_expectation.as_f64(),
            regularized: self.regularized,
            margins: self.margins,
        }
    }

    /// P^{T_B} recomputed from the normal form.
    pub fn p_tb_from_normal_form(&self) -> Result<BipartiteOperator<T>> {
        pt_in_normal_form(&self.normal_form)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::NormalFormClass;
    use crate::states::{bell_diagonal, werner};
    use num_complex::Complex;

    fn identity_nf(p: [f64; 4]) -> NormalForm<f64> {
        NormalForm {
            a: ComplexMatrix::identity(2),
            b: ComplexMatrix::identity(2),
            p,
            n: 1.0,
            class: NormalFormClass::BellDiagonal,
            residual: 0.0,
            iterations: 0,
        }
    }

    fn random_filter(seed: u64) -> ComplexMatrix<f64> {
        let mut rng = crate::states::SampleRng::new(seed, 0, 77);
        let mut g = || Complex::new(rng.gaussian(), rng.gaussian());
        let m = ComplexMatrix::from_2x2(g(), g(), g(), g());
        m.scale_complex(Complex::new(1.0, 0.0) / m.det_2x2().sqrt())
    }

    fn random_nf(seed: u64, p: [f64; 4]) -> NormalForm<f64> {
        let mut nf = identity_nf(p);
        nf.a = random_filter(seed);
        nf.b = random_filter(seed + 1_000_000);
        nf.n = 0.7;
        nf
    }

    #[test]
    fn identity_filters() {
        let nf = identity_nf([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        let (phi, l) = nonpositivity_witness(&nf).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        assert!((inner(&phi, &bell_basis::<f64>()[3]).norm() - 1.0).abs() < 1e-15);
        let cm = c_matrix(&nf).unwrap();
        assert!(cm.c.max_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!((cm.tr_cc_star - 2.0).abs() < 1e-15);
        let t = x_prime_terms(&nf, 0.5).unwrap();
        let expected = (&ComplexMatrix::identity(4) + &flip::<f64>(2)).scale(1.0 / 3.0);
        assert!(t.term2.matrix().max_diff(&expected) < 1e-14);
        assert!(t.term1.matrix().max_diff(&ComplexMatrix::projector(&bell_basis::<f64>()[0]).scale(2.0 / 3.0)) < 1e-14);
    }

    #[test]
    fn witness_kernel_at_p0_half() {
        let nf = random_nf(3, [0.5, 0.3, 0.2, 0.0]);
        let (phi, _) = nonpositivity_witness(&nf).unwrap();
        let pt = pt_in_normal_form(&nf).unwrap();
        let v = pt.matrix().mul_vec(&phi);
        assert!(crate::linalg::norm(&v) < 1e-9);
    }

    #[test]
    fn random_normal_form_identities() {
        for seed in 0..50 {
            let nf = random_nf(seed, [0.4, 0.35, 0.25, 0.0]);
            let cm = c_matrix(&nf).unwrap();
            assert!((cm.c.det_2x2() - Complex::new(1.0, 0.0)).norm() < 1e-9);
            assert!(cm.tr_cc_star >= 2.0 - 1e-10);
            assert!((singlet_resolvent(&cm.c).unwrap() - 0.5).abs() < 1e-10);

            let (psi, m) = crate::normal_form::kernel_state(&nf).unwrap();
            let (phi, l) = nonpositivity_witness(&nf).unwrap();
            let lhs = hyperplane_overlap(&psi, &phi);
            assert!((lhs - cm.tr_cc_star / (4.0 * m * l)).abs() < 1e-10, "seed {seed}");

            let lambda0 = lambda_bound(&nf, m).unwrap();
            let p_tb = pt_in_normal_form(&nf).unwrap();
            let kick = BipartiteOperator::projector(2, 2, &psi).partial_transpose(Side::B).scale(lambda0);
            let x = &p_tb + &kick;
            let terms = x_prime_terms(&nf, lambda0).unwrap();
            let primed = to_primed_frame(&nf, &x);
            let err = primed.max_diff(&terms.sum()) / primed.matrix().max_norm().max(1.0);
            assert!(err < 1e-9, "seed {seed}: {err}");
            assert!(terms.term1.min_eigenvalue().unwrap() >= -1e-9);
            assert!(terms.term2.min_eigenvalue().unwrap() >= -1e-9 * terms.term2.matrix().max_norm().max(1.0));
        }
    }

    #[test]
    fn lambda_bound_boundary() {
        let nf = identity_nf([0.5, 0.3, 0.2, 0.0]);
        assert!(matches!(lambda_bound(&nf, 1.0), Err(Error::P0TooLarge { .. })));
    }

    #[test]
    fn overlap_examples() {
        let b = bell_basis::<f64>();
        assert!((hyperplane_overlap(&b[3], &b[3]) - 0.5).abs() < 1e-15);
        assert!((hyperplane_overlap(&b[3], &b[0]) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn singlet_certificate() {
        let s = werner(1.0f64).unwrap();
        let cert = certify(&s).unwrap();
        assert!((cert.lambda - 0.5).abs() < 1e-12);
        assert!((cert.lambda0 - 0.5).abs() < 1e-12);
        assert!(cert.weights.0.abs() < 1e-12 && (cert.weights.1 - 1.0).abs() < 1e-12);
        assert!(cert.x.matrix().max_diff(&ComplexMatrix::identity(4).scale(0.5)) < 1e-12);
        assert!(!cert.regularized);
    }

    #[test]
    fn werner_half_weights() {
        let s = werner(0.5f64).unwrap();
        let cert = certify(&s).unwrap();
        assert!((cert.lambda - 0.125).abs() < 1e-12);
        assert!((cert.lambda0 - 0.375).abs() < 1e-12);
        assert!((cert.weights.0 - 2.0 / 3.0).abs() < 1e-12);
        assert!((cert.weights.1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ppt_input_is_not_certified() {
        let s = bell_diagonal([0.4f64, 0.3, 0.2, 0.1]).unwrap();
        assert_eq!(certify(&s).unwrap_err(), Error::NotEntangled);
    }

    #[test]
    fn certificate_is_deterministic() {
        let s = werner(0.8f64).unwrap();
        let a = certify(&s).unwrap();
        let again = crate::states::validate(s.op()).unwrap();
        let b = certify(&again).unwrap();
        assert_eq!(a, b);
    }
}
