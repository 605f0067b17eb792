use num_complex::Complex;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteOperator, ComplexMatrix};
use crate::scalar::Real;
use crate::states::DensityMatrix;

/// Stream tag used for state generation; other consumers must pick another tag.
const STATE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// GG†/Tr(GG†) with square Ginibre G.
    HilbertSchmidt,
    /// Projector on a normalized Gaussian vector.
    HaarPure,
    /// GG†/Tr(GG†) with G of k columns.
    RankK { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dims: (usize, usize),
    pub kind: EnsembleKind,
    pub seed: u64,
    pub count: usize,
}

impl EnsembleSpec {
    pub fn new(dims: (usize, usize), kind: EnsembleKind, seed: u64, count: usize) -> Result<Self> {
        let spec = Self { dims, kind, seed, count };
        spec.check()?;
        Ok(spec)
    }

    pub fn hilbert_schmidt(dims: (usize, usize), seed: u64, count: usize) -> Self {
        Self { dims, kind: EnsembleKind::HilbertSchmidt, seed, count }
    }

    pub fn check(&self) -> Result<()> {
        let n = self.dims.0 * self.dims.1;
        if n == 0 {
            return Err(Error::InvalidArgument("ensemble dimensions must be positive".into()));
        }
        if let EnsembleKind::RankK { k } = self.kind {
            if k == 0 || k > n {
                return Err(Error::InvalidArgument(format!("rank {k} outside 1..={n}")));
            }
        }
        Ok(())
    }

    /// Columns of the Ginibre factor.
    fn factor_columns(&self) -> usize {
        match self.kind {
            EnsembleKind::HilbertSchmidt => self.dims.0 * self.dims.1,
            EnsembleKind::HaarPure => 1,
            EnsembleKind::RankK { k } => k,
        }
    }
}

/// Counter-based generator keyed by (seed, index, stream).
///
/// ChaCha20 with the seed in key bytes 0..8 and the sample index in key bytes
/// 8..16; the stream tag selects the ChaCha stream. Each sample therefore has
/// its own independent sequence regardless of evaluation order.
pub struct SampleRng {
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl SampleRng {
    pub fn new(seed: u64, index: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&index.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner, spare: None }
    }

    /// Uniform on (0, 1], 53 bits.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller; the second variate of each pair is cached.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// The `index`-th member of the ensemble.
pub fn random_state<T: Real>(spec: &EnsembleSpec, index: usize) -> Result<DensityMatrix<T>> {
    spec.check()?;
    if index >= spec.count {
        return Err(Error::InvalidArgument(format!("index {index} >= ensemble count {}", spec.count)));
    }
    let (da, db) = spec.dims;
    let n = da * db;
    let k = spec.factor_columns();
    let mut rng = SampleRng::new(spec.seed, index as u64, STATE_STREAM);
    let g = ComplexMatrix::from_fn(n, k, |_, _| {
        let re = rng.gaussian();
        let im = rng.gaussian();
        Complex::new(T::lit(re), T::lit(im))
    });
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let rho = w.scale(T::one() / tr).hermitian_part();
    Ok(DensityMatrix::from_op_unchecked(BipartiteOperator::from_parts(da, db, rho)))
}
