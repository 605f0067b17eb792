//! Binegativity of bipartite quantum states.
//!
//! For a two-qubit state σ the partial transpose splits as
//! σ^{T_B} = P − λ|ψ⟩⟨ψ| with P ⪰ 0 and P|ψ⟩ = 0, and the binegativity
//! |σ^{T_B}|^{T_B} = P^{T_B} + λ(|ψ⟩⟨ψ|)^{T_B} is always positive. This crate
//! computes that split, brings P to its filtering normal form, and builds an
//! explicit certificate: a nonpositivity witness |φ⟩, a bound λ₀ ≥ λ and a
//! positive operator X such that the binegativity is a convex combination of
//! P^{T_B} and X. The [`explorer`] module runs these checks over random
//! ensembles and searches two-qutrit systems for binegative states.
//!
//! All kernels are generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases below fix `f64`, which is what the
//! ensemble explorer and the report formats use.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod binegativity;
pub mod certificates;
pub mod error;
pub mod explorer;
pub mod linalg;
pub mod normal_form;
pub mod report;
pub mod scalar;
pub mod states;
pub mod tolerances;

pub use error::{Error, Result};
pub use scalar::{Real, C};
pub use tolerances::Tolerances;

pub type Complex64 = num_complex::Complex<f64>;
pub type Matrix = linalg::ComplexMatrix<f64>;
pub type Operator = linalg::BipartiteOperator<f64>;
pub type Eigen = linalg::EigenSystem<f64>;
pub type Density = states::DensityMatrix<f64>;
pub type Decomposition = binegativity::NegativeDecomposition<f64>;
pub type Normal = normal_form::NormalForm<f64>;
pub type Certificate = certificates::BinegativityCertificate<f64>;

pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type Operator32 = linalg::BipartiteOperator<f32>;
pub type Density32 = states::DensityMatrix<f32>;
