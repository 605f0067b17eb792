//! The single tolerance record every comparison in the crate draws from.
//!
//! Comparisons are relative to the max-norm of the operator involved, except
//! the positive-semidefinite slack, which is absolute after normalizing the
//! operator to unit trace.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity check, relative to the max-norm of the input.
    pub hermitian: f64,
    /// Allowed distance of a state's trace from 1 before it is rescaled.
    pub trace: f64,
    /// Minimum eigenvalue slack for positivity, absolute at unit trace.
    pub psd: f64,
    /// Eigenvalues of the partial transpose within this band count as zero.
    pub zero_band: f64,
    /// Rank threshold relative to the largest eigenvalue.
    pub rank: f64,
    /// Smallest Schmidt coefficient for a vector to count as entangled.
    pub schmidt: f64,
    /// Determinant and tilde-identity checks.
    pub determinant: f64,
    /// Jacobi convergence: off-diagonal Frobenius mass relative to the total.
    pub jacobi_offdiag: f64,
    pub jacobi_max_sweeps: usize,
    /// Filter iteration stops when the marginals are this close to I/2.
    pub filter_marginal: f64,
    pub filter_max_iterations: usize,
    pub filter_stall_window: usize,
    /// Marginal-purity decrease per window under which the iteration is stalled.
    pub filter_stall_purity: f64,
    /// Marginal-deviation ratio per window above which the iteration is stalled.
    pub filter_stall_ratio: f64,
    /// Minimum iteration count before the ratio test applies.
    pub filter_stall_min_iterations: usize,
    /// Normal-form reconstruction residual.
    pub reconstruction: f64,
    /// Largest p3 still treated as zero.
    pub kernel_p3: f64,
    /// Regularization strength relative to the trace of the positive part.
    pub regularize: f64,
    /// Required gap between p0 and 1/2.
    pub p0_gap: f64,
    /// Positivity of X and convex recombination.
    pub certificate: f64,
    /// Slack on Tr CC* >= 2 and lambda <= lambda0.
    pub certificate_bound: f64,
    /// Linear dependence of section directions.
    pub plane: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            trace: 1e-12,
            psd: 1e-10,
            zero_band: 1e-12,
            rank: 1e-10,
            schmidt: 1e-8,
            determinant: 1e-10,
            jacobi_offdiag: 1e-26,
            jacobi_max_sweeps: 100,
            filter_marginal: 1e-13,
            filter_max_iterations: 100_000,
            filter_stall_window: 50,
            filter_stall_purity: 1e-14,
            filter_stall_ratio: 0.9,
            filter_stall_min_iterations: 500,
            reconstruction: 1e-9,
            kernel_p3: 1e-9,
            regularize: 1e-8,
            p0_gap: 1e-12,
            certificate: 1e-9,
            certificate_bound: 1e-10,
            plane: 1e-12,
        }
    }
}

impl Tolerances {
    /// Defaults for `f32` arithmetic.
    pub fn single_precision() -> Self {
        Self {
            hermitian: 1e-5,
            trace: 1e-5,
            psd: 1e-5,
            zero_band: 1e-6,
            rank: 1e-4,
            schmidt: 1e-3,
            determinant: 1e-4,
            jacobi_offdiag: 1e-12,
            jacobi_max_sweeps: 100,
            filter_marginal: 1e-6,
            filter_max_iterations: 100_000,
            filter_stall_window: 50,
            filter_stall_purity: 1e-7,
            filter_stall_ratio: 0.9,
            filter_stall_min_iterations: 500,
            reconstruction: 1e-4,
            kernel_p3: 1e-4,
            regularize: 1e-3,
            p0_gap: 1e-6,
            certificate: 1e-4,
            certificate_bound: 1e-4,
            plane: 1e-6,
        }
    }

    /// Rejects records with non-positive or non-finite entries.
    pub fn validate(&self) -> Result<(), String> {
        let reals = [
            ("hermitian", self.hermitian),
            ("trace", self.trace),
            ("psd", self.psd),
            ("zero_band", self.zero_band),
            ("rank", self.rank),
            ("schmidt", self.schmidt),
            ("determinant", self.determinant),
            ("jacobi_offdiag", self.jacobi_offdiag),
            ("filter_marginal", self.filter_marginal),
            ("filter_stall_purity", self.filter_stall_purity),
            ("filter_stall_ratio", self.filter_stall_ratio),
            ("reconstruction", self.reconstruction),
            ("kernel_p3", self.kernel_p3),
            ("regularize", self.regularize),
            ("p0_gap", self.p0_gap),
            ("certificate", self.certificate),
            ("certificate_bound", self.certificate_bound),
            ("plane", self.plane),
        ];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("tolerance `{name}` must be positive and finite, got {v}"));
            }
        }
        if self.filter_stall_ratio >= 1.0 {
            return Err("tolerance `filter_stall_ratio` must be below 1".into());
        }
        if self.jacobi_max_sweeps == 0 || self.filter_max_iterations == 0 || self.filter_stall_window == 0 {
            return Err("iteration limits must be positive".into());
        }
        Ok(())
    }
}
