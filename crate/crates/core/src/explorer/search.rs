use std::time::Instant;

use serde::Serialize;

use crate::binegativity::binegativity;
use crate::error::{Error, Result};
use crate::report::{SCHEMA_VERSION, TOOL_VERSION};
use crate::states::{random_state, DensityMatrix, EnsembleSpec, StateFile};
use crate::tolerances::Tolerances;

use super::map_indexed;

/// A unit-trace state counts as binegative below this eigenvalue.
pub const BINEGATIVE_THRESHOLD: f64 = -1e-10;

const MAX_EXEMPLARS: usize = 10;
/// Slots reserved for states whose midpoint is not positive.
const MIDPOINT_SLOTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exemplar {
    pub index: usize,
    pub min_binegativity_eig: f64,
    pub min_midpoint_eig: f64,
    pub state: StateFile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchRecord {
    pub schema: String,
    pub tool_version: String,
    pub spec: EnsembleSpec,
    pub tolerances: Tolerances,
    pub dims: [usize; 2],
    pub samples: usize,
    pub binegative_count: usize,
    pub midpoint_nonpositive_count: usize,
    pub exemplars: Vec<Exemplar>,
    pub wall_time_seconds: f64,
}

impl SearchRecord {
    pub fn without_timing(&self) -> Self {
        Self { wall_time_seconds: 0.0, ..self.clone() }
    }
}

struct Hit {
    index: usize,
    bineg_min: f64,
    midpoint_min: f64,
}

/// (min eig of |σ^{T_B}|^{T_B}, min eig of σ/2 + |σ^{T_B}|^{T_B}/2).
fn probe(sigma: &DensityMatrix<f64>, tol: &Tolerances) -> Result<(f64, f64)> {
    let b = binegativity(sigma)?;
    let bmin = b.eig_with(tol)?.min();
    if bmin >= BINEGATIVE_THRESHOLD {
        return Ok((bmin, f64::NAN));
    }
    let mid = (&sigma.op().scale(0.5) + &b.scale(0.5)).eig_with(tol)?.min();
    Ok((bmin, mid))
}

pub fn search_binegative(spec: &EnsembleSpec) -> Result<SearchRecord> {
    search_binegative_with(spec, &Tolerances::default())
}

/// Samples the ensemble and records binegative states.
pub fn search_binegative_with(spec: &EnsembleSpec, tol: &Tolerances) -> Result<SearchRecord> {
    spec.check()?;
    tol.validate().map_err(Error::InvalidArgument)?;
    let start = Instant::now();
    let results = map_indexed(spec.count, |i| -> Result<Option<Hit>> {
        let sigma = random_state::<f64>(spec, i)?;
        let (bineg_min, midpoint_min) = probe(&sigma, tol)?;
        Ok((bineg_min < BINEGATIVE_THRESHOLD).then_some(Hit { index: i, bineg_min, midpoint_min }))
    });
    let mut hits = Vec::new();
    for r in results {
        if let Some(h) = r? {
            hits.push(h);
        }
    }

    let binegative_count = hits.len();
    let midpoint_nonpositive_count = hits.iter().filter(|h| h.midpoint_min < BINEGATIVE_THRESHOLD).count();

    let by = |key: fn(&Hit) -> f64| {
        move |a: &&Hit, b: &&Hit| key(a).total_cmp(&key(b)).then(a.index.cmp(&b.index))
    };
    let mut chosen: Vec<&Hit> = hits.iter().filter(|h| h.midpoint_min < BINEGATIVE_THRESHOLD).collect();
    chosen.sort_by(by(|h| h.midpoint_min));
    chosen.truncate(MIDPOINT_SLOTS);
    let mut rest: Vec<&Hit> = hits.iter().filter(|h| !chosen.iter().any(|c| c.index == h.index)).collect();
    rest.sort_by(by(|h| h.bineg_min));
    rest.truncate(MAX_EXEMPLARS - chosen.len());
    chosen.extend(rest);

    let exemplars = chosen
        .into_iter()
        .map(|h| {
            let sigma = random_state::<f64>(spec, h.index)?;
            Ok(Exemplar {
                index: h.index,
                min_binegativity_eig: h.bineg_min,
                min_midpoint_eig: h.midpoint_min,
                state: StateFile::from_state(&sigma),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SearchRecord {
        schema: SCHEMA_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        spec: *spec,
        tolerances: *tol,
        dims: [spec.dims.0, spec.dims.1],
        samples: spec.count,
        binegative_count,
        midpoint_nonpositive_count,
        exemplars,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Reloads an exemplar through its JSON form and recomputes both eigenvalues.
pub fn reverify_exemplar(e: &Exemplar, tol: &Tolerances) -> Result<(f64, f64)> {
    let sigma = StateFile::parse(&e.state.to_json())?.state(tol)?;
    probe(&sigma, tol)
}
