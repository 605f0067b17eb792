use std::time::Instant;

use serde::Serialize;

use crate::binegativity::{check_theorems_from, negative_decomposition_with, TheoremFlags};
use crate::certificates::{certify_from, CertificateMargins};
use crate::error::{Error, Result};
use crate::report::{SCHEMA_VERSION, TOOL_VERSION};
use crate::states::{random_state, DensityMatrix, EnsembleSpec, StateFile};
use crate::tolerances::Tolerances;

use super::map_indexed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub total: usize,
    pub entangled: usize,
    /// Entangled samples with P^{T_B} strictly positive.
    pub p_tb_positive: usize,
    /// Entangled samples with rank P = 3.
    pub rank3: usize,
    /// All samples with a positive binegativity.
    pub binegativity_positive: usize,
    /// Entangled samples with a certificate.
    pub certificate_pass: usize,
    /// PPT samples whose binegativity equals σ.
    pub ppt_identity_pass: usize,
    /// Samples where a numerical routine failed.
    pub numerical_failures: usize,
}

/// Extreme value of one property and the sample index where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstMargin {
    pub value: Option<f64>,
    pub index: Option<usize>,
}

impl WorstMargin {
    fn empty() -> Self {
        Self { value: None, index: None }
    }

    fn min(&mut self, v: f64, index: usize) {
        if self.value.is_none_or(|cur| v < cur) {
            *self = Self { value: Some(v), index: Some(index) };
        }
    }

    fn max(&mut self, v: f64, index: usize) {
        if self.value.is_none_or(|cur| v > cur) {
            *self = Self { value: Some(v), index: Some(index) };
        }
    }
}

/// Minima of margins and maxima of errors over the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstMargins {
    /// min eig of the binegativity, all samples.
    pub binegativity_min_eig: WorstMargin,
    /// min eig of P^{T_B}, entangled samples.
    pub p_tb_min_eig: WorstMargin,
    /// Smallest nonzero eigenvalue of P relative to its largest, entangled samples.
    pub p_rank3_gap: WorstMargin,
    /// Tr CC* − 2.
    pub tr_cc_star: WorstMargin,
    /// λ₀ − λ.
    pub lambda: WorstMargin,
    pub x_min_eig: WorstMargin,
    pub hyperplane_overlap: WorstMargin,
    pub recombination_error: WorstMargin,
    pub midpoint_error: WorstMargin,
    /// PPT samples: ‖|σ^{T_B}|^{T_B} − σ‖_max.
    pub ppt_identity_error: WorstMargin,
    pub normal_form_residual: WorstMargin,
}

impl WorstMargins {
    fn new() -> Self {
        let e = WorstMargin::empty();
        Self {
            binegativity_min_eig: e,
            p_tb_min_eig: e,
            p_rank3_gap: e,
            tr_cc_star: e,
            lambda: e,
            x_min_eig: e,
            hyperplane_overlap: e,
            recombination_error: e,
            midpoint_error: e,
            ppt_identity_error: e,
            normal_form_residual: e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub property: String,
    pub detail: String,
    pub state: StateFile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: String,
    pub tool_version: String,
    pub spec: EnsembleSpec,
    pub tolerances: Tolerances,
    pub counts: Counts,
    pub worst_margins: WorstMargins,
    pub violations: Vec<Violation>,
    pub wall_time_seconds: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// The report with the timing field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_seconds: 0.0, ..self.clone() }
    }
}

/// Per-sample result before aggregation.
#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub index: usize,
    pub flags: Option<TheoremFlags<f64>>,
    pub certificate: Option<std::result::Result<CertificateMargins, Error>>,
    pub error: Option<Error>,
}

fn evaluate(sigma: &DensityMatrix<f64>, index: usize, tol: &Tolerances) -> SampleOutcome {
    let d = match negative_decomposition_with(sigma, tol) {
        Ok(d) => d,
        Err(e) => return SampleOutcome { index, flags: None, certificate: None, error: Some(e) },
    };
    let flags = match check_theorems_from(sigma, &d, tol) {
        Ok(f) => f,
        Err(e) => return SampleOutcome { index, flags: None, certificate: None, error: Some(e) },
    };
    let certificate = flags.entangled.then(|| certify_from(sigma, &d, tol).map(|c| c.margins));
    SampleOutcome { index, flags: Some(flags), certificate, error: None }
}

/// Runs the two-qubit theorem checks and certificates over an ensemble.
pub fn verify_ensemble(spec: &EnsembleSpec, tol: &Tolerances) -> Result<VerificationReport> {
    spec.check()?;
    tol.validate().map_err(Error::InvalidArgument)?;
    if spec.dims != (2, 2) {
        return Err(Error::InvalidArgument("verification suite is defined for 2x2".into()));
    }
    let start = Instant::now();
    let outcomes = map_indexed(spec.count, |i| match random_state::<f64>(spec, i) {
        Ok(s) => evaluate(&s, i, tol),
        Err(e) => SampleOutcome { index: i, flags: None, certificate: None, error: Some(e) },
    });

    let mut counts = Counts { total: spec.count, ..Counts::default() };
    let mut worst = WorstMargins::new();
    let mut violations = Vec::new();
    let mut flag = |index: usize, property: &str, detail: String| {
        let state = random_state::<f64>(spec, index).map(|s| StateFile::from_state(&s)).expect("regenerates");
        violations.push(Violation { index, property: property.into(), detail, state });
    };

    for o in &outcomes {
        let i = o.index;
        if let Some(e) = &o.error {
            counts.numerical_failures += 1;
            flag(i, "numerical", e.to_string());
            continue;
        }
        let f = o.flags.as_ref().expect("flags present without error");
        worst.binegativity_min_eig.min(f.binegativity_min_eig, i);
        worst.midpoint_error.max(f.midpoint_error, i);
        if f.binegativity_positive {
            counts.binegativity_positive += 1;
        } else {
            flag(i, "binegativity_positive", format!("min eigenvalue {:e}", f.binegativity_min_eig));
        }
        if f.midpoint_error > tol.certificate {
            flag(i, "midpoint_identity", format!("error {:e}", f.midpoint_error));
        }
        if !f.entangled {
            let err = f.ppt_identity_error.unwrap_or(f64::NAN);
            worst.ppt_identity_error.max(err, i);
            if err <= tol.psd {
                counts.ppt_identity_pass += 1;
            } else {
                flag(i, "ppt_identity", format!("‖|σ^TB|^TB − σ‖ = {err:e}"));
            }
            continue;
        }
        counts.entangled += 1;
        worst.p_tb_min_eig.min(f.p_tb_min_eig, i);
        let pmax = f.positive_spectrum.iter().cloned().fold(0.0, f64::max);
        let n = f.positive_spectrum.len();
        if n >= 3 && pmax > 0.0 {
            worst.p_rank3_gap.min(f.positive_spectrum[n - 3] / pmax, i);
        }
        if f.p_tb_positive {
            counts.p_tb_positive += 1;
        } else {
            flag(i, "positive_part_ppt", format!("min eigenvalue of P^TB {:e}", f.p_tb_min_eig));
        }
        if f.rank3 == Some(true) {
            counts.rank3 += 1;
        } else {
            flag(i, "positive_part_rank3", format!("rank {:?}", f.positive_rank));
        }
        match o.certificate.as_ref().expect("entangled samples are certified") {
            Ok(m) => {
                counts.certificate_pass += 1;
                worst.tr_cc_star.min(m.tr_cc_star, i);
                worst.lambda.min(m.lambda, i);
                worst.x_min_eig.min(m.x_min, i);
                worst.hyperplane_overlap.min(m.hyperplane_overlap, i);
                worst.recombination_error.max(m.recombination_error, i);
                worst.normal_form_residual.max(m.normal_form_residual, i);
            }
            Err(e) => {
                if e.is_numerical() && !matches!(e, Error::CertificateFailure { .. }) {
                    counts.numerical_failures += 1;
                }
                flag(i, "certificate", e.to_string());
            }
        }
    }

    Ok(VerificationReport {
        schema: SCHEMA_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        spec: *spec,
        tolerances: *tol,
        counts,
        worst_margins: worst,
        violations,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
