//! Descriptor files.
//!
//! ```json
//! { "dim": 2, "labels": ["delta_0", "delta_1"],
//!   "mult": [[[[1,0],[0,0]], ...]],      // d×d×d
//!   "unit": [[1,0],[1,0]], "invol": [[...]],  // d, d×d
//!   "coproduct": [...],                  // d×d×d, Δ[i][j][k]
//!   "counit": [[1,0],[0,0]],
//!   "rep_blocks": [[ R_b(e_0), R_b(e_1) ]] }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::BialgebraDescriptor;
use crate::json::{mat_to_json, Cx};
use crate::linalg::CMatrix;
use crate::{Error, Result, C64};

/// On-disk layout. Tensor fields are kept as raw JSON values so that rank
/// mismatches surface as shape errors rather than parse errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DescriptorFile {
    pub dim: usize,
    pub labels: Vec<String>,
    pub mult: Value,
    pub unit: Value,
    pub invol: Value,
    pub coproduct: Value,
    pub counit: Value,
    pub rep_blocks: Value,
}

impl DescriptorFile {
    pub fn from_descriptor(b: &BialgebraDescriptor) -> Self {
        let d = b.dim();
        let cube = |flat: &[C64]| -> Value {
            let nested: Vec<Vec<Vec<Cx>>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).map(|k| Cx(flat[(i * d + j) * d + k])).collect())
                        .collect()
                })
                .collect();
            serde_json::to_value(nested).expect("serializable")
        };
        let list = |v: &[C64]| -> Value {
            serde_json::to_value(v.iter().copied().map(Cx).collect::<Vec<_>>()).expect("serializable")
        };
        let blocks: Vec<Vec<Vec<Vec<Cx>>>> = b
            .rep_blocks()
            .iter()
            .map(|block| block.iter().map(mat_to_json).collect())
            .collect();
        Self {
            dim: d,
            labels: b.labels().to_vec(),
            mult: cube(b.raw_mult()),
            unit: list(b.unit_coeffs()),
            invol: serde_json::to_value(mat_to_json(b.invol_matrix())).expect("serializable"),
            coproduct: cube(b.raw_coproduct()),
            counit: list(b.counit_coeffs()),
            rep_blocks: serde_json::to_value(blocks).expect("serializable"),
        }
    }

    pub fn into_descriptor(self) -> Result<BialgebraDescriptor> {
        let d = self.dim;
        let (mult_shape, mult) = complex_tensor(&self.mult, 3, "mult")?;
        expect_shape("mult", &mult_shape, &[d, d, d])?;
        let (unit_shape, unit) = complex_tensor(&self.unit, 1, "unit")?;
        expect_shape("unit", &unit_shape, &[d])?;
        let (invol_shape, invol) = complex_tensor(&self.invol, 2, "invol")?;
        expect_shape("invol", &invol_shape, &[d, d])?;
        let (co_shape, coproduct) = complex_tensor(&self.coproduct, 3, "coproduct")?;
        expect_shape("coproduct", &co_shape, &[d, d, d])?;
        let (counit_shape, counit) = complex_tensor(&self.counit, 1, "counit")?;
        expect_shape("counit", &counit_shape, &[d])?;

        let blocks_raw = self
            .rep_blocks
            .as_array()
            .ok_or_else(|| Error::Shape("rep_blocks must be a list of blocks".into()))?;
        let mut rep_blocks = Vec::with_capacity(blocks_raw.len());
        for (b, block) in blocks_raw.iter().enumerate() {
            let name = format!("rep_blocks[{b}]");
            let (shape, flat) = complex_tensor(block, 3, &name)?;
            if shape[0] != d || shape[1] != shape[2] {
                return Err(Error::Shape(format!(
                    "{name}: expected {d} square matrices, got shape {shape:?}"
                )));
            }
            let n = shape[1];
            rep_blocks.push(
                (0..d)
                    .map(|i| CMatrix::from_fn(n, n, |r, c| flat[(i * n + r) * n + c]))
                    .collect(),
            );
        }
        BialgebraDescriptor::from_parts(
            d,
            self.labels,
            mult,
            unit,
            CMatrix::from_fn(d, d, |r, c| invol[r * d + c]),
            coproduct,
            counit,
            rep_blocks,
        )
    }
}

fn expect_shape(name: &str, got: &[usize], want: &[usize]) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Shape(format!("{name}: expected shape {want:?}, got {got:?}")))
    }
}

/// Decodes a nested array of `[re, im]` leaves with the given rank into its
/// shape and row-major data.
fn complex_tensor(v: &Value, rank: usize, name: &str) -> Result<(Vec<usize>, Vec<C64>)> {
    fn leaf(v: &Value) -> Option<C64> {
        match v.as_array()?.as_slice() {
            [re, im] => Some(C64::new(re.as_f64()?, im.as_f64()?)),
            _ => None,
        }
    }
    fn walk(
        v: &Value,
        depth: usize,
        rank: usize,
        name: &str,
        shape: &mut Vec<usize>,
        out: &mut Vec<C64>,
    ) -> Result<()> {
        if depth == rank {
            let z = leaf(v).ok_or_else(|| {
                Error::Shape(format!("{name}: expected a [re, im] leaf at depth {rank}"))
            })?;
            out.push(z);
            return Ok(());
        }
        let arr = v.as_array().ok_or_else(|| {
            Error::Shape(format!("{name}: tensor has rank {depth}, expected {rank}"))
        })?;
        if shape.len() == depth {
            shape.push(arr.len());
        } else if shape[depth] != arr.len() {
            return Err(Error::Shape(format!("{name}: ragged along axis {depth}")));
        }
        if arr.is_empty() && depth + 1 < rank {
            shape.resize(rank, 0);
        }
        for item in arr {
            walk(item, depth + 1, rank, name, shape, out)?;
        }
        Ok(())
    }
    let mut shape = Vec::new();
    let mut out = Vec::new();
    walk(v, 0, rank, name, &mut shape, &mut out)?;
    Ok((shape, out))
}

/// Reads a descriptor file and checks tensor shapes. Axioms are not checked.
pub fn load_descriptor(path: &Path) -> Result<BialgebraDescriptor> {
    let text = std::fs::read_to_string(path)?;
    let file: DescriptorFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.into_descriptor()
}

pub fn save_descriptor(path: &Path, b: &BialgebraDescriptor) -> Result<()> {
    crate::json::write_json(path, &DescriptorFile::from_descriptor(b))
}
