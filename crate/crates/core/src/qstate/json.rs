use serde::{Deserialize, Serialize};

use super::{ChiMatrix, Mat4, QstateError, TwoQubitState, PAULI_LABELS, TWO_QUBIT_BASIS};
use crate::scalar::{Real, C};

/// Matrix dump: row-major rows of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub basis: Vec<String>,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix<T: Real>(m: &Mat4<T>, basis: &[&str]) -> Self {
        let data = (0..4)
            .map(|r| {
                (0..4)
                    .map(|col| [m[(r, col)].re.as_f64(), m[(r, col)].im.as_f64()])
                    .collect()
            })
            .collect();
        Self {
            basis: basis.iter().map(|s| s.to_string()).collect(),
            data,
        }
    }

    pub fn to_matrix<T: Real>(&self) -> Result<Mat4<T>, QstateError> {
        if self.data.len() != 4 || self.data.iter().any(|row| row.len() != 4) {
            return Err(QstateError::NonFinite);
        }
        Ok(Mat4::from_fn(|r, col| {
            let [re, im] = self.data[r][col];
            C::new(T::lit(re), T::lit(im))
        }))
    }
}

impl<T: Real> From<&TwoQubitState<T>> for MatrixJson {
    fn from(s: &TwoQubitState<T>) -> Self {
        Self::from_matrix(s.matrix(), &TWO_QUBIT_BASIS)
    }
}

impl<T: Real> From<&ChiMatrix<T>> for MatrixJson {
    fn from(chi: &ChiMatrix<T>) -> Self {
        Self::from_matrix(chi.matrix(), &PAULI_LABELS)
    }
}

impl<T: Real> TryFrom<&MatrixJson> for TwoQubitState<T> {
    type Error = QstateError;
    fn try_from(j: &MatrixJson) -> Result<Self, Self::Error> {
        TwoQubitState::new(j.to_matrix()?)
    }
}

impl<T: Real> TryFrom<&MatrixJson> for ChiMatrix<T> {
    type Error = QstateError;
    fn try_from(j: &MatrixJson) -> Result<Self, Self::Error> {
        ChiMatrix::new(j.to_matrix()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::bell_state;

    #[test]
    fn layout_is_row_major_pairs() {
        let j = MatrixJson::from(&bell_state::<f64>());
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with(r#"{"basis":["HH","HV","VH","VV"],"data":[[[0.5"#), "{text}");
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        let rho: TwoQubitState<f64> = (&back).try_into().unwrap();
        assert_eq!(rho, bell_state());
    }
}
