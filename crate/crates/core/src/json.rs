//! JSON encodings shared by every file format: complex numbers are `[re, im]`
//! pairs, matrices are row-major nested arrays.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result, C64};

/// A complex number serialized as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cx(pub C64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Cx(C64::new(re, im)))
    }
}

pub fn vec_to_json(v: &[C64]) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

pub fn vec_from_json(v: &[Cx]) -> Vec<C64> {
    v.iter().map(|c| c.0).collect()
}

pub fn dvec_to_json(v: &DVector<C64>) -> Vec<Cx> {
    v.iter().copied().map(Cx).collect()
}

pub fn dvec_from_json(v: &[Cx]) -> DVector<C64> {
    DVector::from_iterator(v.len(), v.iter().map(|c| c.0))
}

pub fn mat_to_json(m: &DMatrix<C64>) -> Vec<Vec<Cx>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| Cx(m[(r, c)])).collect())
        .collect()
}

pub fn mat_from_json(rows: &[Vec<Cx>]) -> Result<DMatrix<C64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c].0))
}

pub fn square_from_json(rows: &[Vec<Cx>]) -> Result<DMatrix<C64>> {
    let m = mat_from_json(rows)?;
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
