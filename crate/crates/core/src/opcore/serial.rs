//! JSON encoding of complex data: a scalar is `[re, im]`, a matrix is an
//! array of row arrays, a vector is a flat array of scalars.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{c, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

pub type ScalarJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ScalarJson>>;
pub type VectorJson = Vec<ScalarJson>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Invalid("matrix has no rows".into()));
    }
    let m = rows[0].len();
    if m == 0 {
        return Err(Error::Invalid("matrix has no columns".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
        return Err(Error::dims(format!("matrix row {i} length"), m, r.len()));
    }
    let out = ComplexMatrix::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1]));
    super::linalg::check_finite(&out)?;
    Ok(out)
}

pub fn vector_to_json(v: &ComplexVector) -> VectorJson {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &VectorJson) -> ComplexVector {
    ComplexVector::from_iterator(v.len(), v.iter().map(|z| c(z[0], z[1])))
}

/// `#[serde(with = "matrix")]` adapter for [`ComplexMatrix`] fields.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        let rows = MatrixJson::deserialize(d)?;
        matrix_from_json(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "matrix_list")]` adapter for `Vec<ComplexMatrix>` fields.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        let list = Vec::<MatrixJson>::deserialize(d)?;
        list.iter()
            .map(|m| matrix_from_json(m).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_rows() {
        let m = ComplexMatrix::from_row_slice(2, 3, &[c(1.0, 0.0), c(2.0, 0.5), c(3.0, 0.0), c(4.0, 0.0), c(5.0, -1.0), c(6.0, 0.0)]);
        let json = matrix_to_json(&m);
        assert_eq!(json[0][1], [2.0, 0.5]);
        assert_eq!(json[1][1], [5.0, -1.0]);
        assert_eq!(matrix_from_json(&json).unwrap(), m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[1.0, 0.0]]];
        assert!(matrix_from_json(&rows).is_err());
        assert!(matrix_from_json(&vec![]).is_err());
    }
}
