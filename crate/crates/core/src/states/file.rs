//! State file: `{"dims":[dA,dB],"re":[[…]],"im":[[…]]}`, row-major, Alice-major index.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BipartiteOperator, ComplexMatrix};
use crate::report::{to_json_string, MatrixJson};
use crate::scalar::Real;
use crate::states::{validate_with, DensityMatrix};
use crate::tolerances::Tolerances;

/// Largest subsystem dimension the format accepts.
pub const MAX_LOCAL_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_operator<T: Real>(op: &BipartiteOperator<T>) -> Self {
        let (da, db) = op.dims();
        let MatrixJson { re, im } = MatrixJson::from_matrix(op.matrix());
        Self { dims: [da, db], re, im }
    }

    pub fn from_state<T: Real>(s: &DensityMatrix<T>) -> Self {
        Self::from_operator(s.op())
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::StateFile(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        to_json_string(self).expect("state file serializes")
    }

    /// Checks shape and Hermiticity and returns the operator.
    pub fn operator(&self, tol: &Tolerances) -> Result<BipartiteOperator<f64>> {
        let [da, db] = self.dims;
        if da == 0 || db == 0 || da > MAX_LOCAL_DIM || db > MAX_LOCAL_DIM {
            return Err(Error::StateFile(format!("dims {da}x{db} outside 1..={MAX_LOCAL_DIM}")));
        }
        let n = da * db;
        let bad_shape = |rows: &Vec<Vec<f64>>| {
            rows.len() != n || rows.iter().any(|r| r.len() != n)
        };
        if bad_shape(&self.re) || bad_shape(&self.im) {
            return Err(Error::StateFile(format!("re/im must both be {n}x{n} arrays")));
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(Complex::new(self.re[i][j], self.im[i][j]));
            }
        }
        let m = ComplexMatrix::from_row_major(n, n, data).map_err(|e| Error::StateFile(e.to_string()))?;
        BipartiteOperator::new_with(da, db, m, tol)
    }

    /// Parses, checks and validates into a density matrix.
    pub fn state(&self, tol: &Tolerances) -> Result<DensityMatrix<f64>> {
        validate_with(&self.operator(tol)?, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_state, werner, EnsembleSpec};
    use proptest::prelude::*;

    #[test]
    fn werner_roundtrip_is_lossless() {
        let w = werner(0.37f64).unwrap();
        let text = StateFile::from_state(&w).to_json();
        let back = StateFile::parse(&text).unwrap().state(&Tolerances::default()).unwrap();
        assert_eq!(back.matrix(), w.matrix());
    }

    #[test]
    fn reports_non_hermitian_pair() {
        let text = r#"{"dims":[2,2],
            "re":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]],
            "im":[[0,0,0,0],[0,0,0,0.5],[0,0,0,0],[0,0,0,0]]}"#;
        let err = StateFile::parse(text).unwrap().operator(&Tolerances::default()).unwrap_err();
        assert_eq!(err, Error::NonHermitianInput { row: 1, col: 3, deviation: 0.5 });
    }

    #[test]
    fn rejects_bad_shapes() {
        let text = r#"{"dims":[2,2],"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(StateFile::parse(text).unwrap().operator(&Tolerances::default()).is_err());
        let text = r#"{"dims":[5,1],"re":[],"im":[]}"#;
        assert!(StateFile::parse(text).unwrap().operator(&Tolerances::default()).is_err());
        assert!(StateFile::parse("{not json").is_err());
        assert!(StateFile::parse(r#"{"dims":[1,1],"re":[[1]],"im":[[0]],"x":1}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]
        #[test]
        fn random_states_roundtrip(seed in any::<u64>(), da in 1usize..=3, db in 1usize..=3) {
            let spec = EnsembleSpec::hilbert_schmidt((da, db), seed, 1);
            let s: DensityMatrix<f64> = random_state(&spec, 0).unwrap();
            let file = StateFile::from_state(&s);
            let back = StateFile::parse(&file.to_json()).unwrap();
            prop_assert_eq!(&back, &file);
            let op = back.operator(&Tolerances::default()).unwrap();
            prop_assert_eq!(op.matrix(), s.matrix());
        }
    }
}
