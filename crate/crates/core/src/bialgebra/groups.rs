//! The two standard example families built from a finite group: the
//! commutative function algebra `F(G)` and the cocommutative group algebra
//! `ℂ[G]`.

use serde::{Deserialize, Serialize};

use super::BialgebraDescriptor;
use crate::linalg::{c, CMatrix};
use crate::{Error, Result, C64};

/// A Cayley table with 0-based indices: `table[g][h]` is the index of `gh`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupTable(pub Vec<Vec<usize>>);

/// Identity and inverses of a checked group table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupData {
    pub identity: usize,
    pub inverse: Vec<usize>,
}

impl GroupTable {
    pub fn cyclic(n: usize) -> Self {
        Self((0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect())
    }

    /// The symmetric group on three letters, elements ordered as
    /// `id, (12), (13), (23), (123), (132)` acting on the left.
    pub fn s3() -> Self {
        let perms: [[usize; 3]; 6] =
            [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
        let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("closed");
        Self(
            perms
                .iter()
                .map(|g| {
                    perms
                        .iter()
                        .map(|h| index([g[h[0]], g[h[1]], g[h[2]]]))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn op(&self, g: usize, h: usize) -> usize {
        self.0[g][h]
    }
}

/// Verifies closure, associativity, identity and inverses.
pub fn check_group_table(table: &GroupTable) -> Result<GroupData> {
    let n = table.order();
    if n == 0 {
        return Err(Error::NotAGroup("empty table".into()));
    }
    for (g, row) in table.0.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotAGroup(format!("row {g} has length {}", row.len())));
        }
        if let Some(&bad) = row.iter().find(|&&x| x >= n) {
            return Err(Error::NotAGroup(format!("entry {bad} out of range in row {g}")));
        }
    }
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                if table.op(table.op(a, b), cc) != table.op(a, table.op(b, cc)) {
                    return Err(Error::NotAGroup(format!("({a}{b}){cc} != {a}({b}{cc})")));
                }
            }
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|g| table.op(e, g) == g && table.op(g, e) == g))
        .ok_or_else(|| Error::NotAGroup("no identity element".into()))?;
    let inverse = (0..n)
        .map(|g| {
            (0..n)
                .find(|&h| table.op(g, h) == identity && table.op(h, g) == identity)
                .ok_or_else(|| Error::NotAGroup(format!("element {g} has no inverse")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupData { identity, inverse })
}

/// `F(G)`: basis `δ_g`, pointwise product, `Δ(δ_g) = Σ_{hk=g} δ_h ⊗ δ_k`,
/// `ε(δ_g) = [g = e]`, represented by diagonal matrices.
pub fn function_algebra(table: &GroupTable) -> Result<BialgebraDescriptor> {
    let group = check_group_table(table)?;
    let d = table.order();
    let one = c(1.0);
    let mut mult = vec![C64::default(); d * d * d];
    let mut coproduct = vec![C64::default(); d * d * d];
    for g in 0..d {
        mult[(g * d + g) * d + g] = one;
        for h in 0..d {
            coproduct[(table.op(h, g) * d + h) * d + g] = one;
        }
    }
    let counit = (0..d).map(|g| if g == group.identity { one } else { C64::default() }).collect();
    let block = (0..d)
        .map(|g| {
            let mut m = CMatrix::zeros(d, d);
            m[(g, g)] = one;
            m
        })
        .collect();
    BialgebraDescriptor::from_parts(
        d,
        (0..d).map(|g| format!("delta_{g}")).collect(),
        mult,
        vec![one; d],
        CMatrix::identity(d, d),
        coproduct,
        counit,
        vec![block],
    )
}

/// `ℂ[G]`: basis `u_g`, `u_g u_h = u_{gh}`, `u_g* = u_{g⁻¹}`,
/// `Δ(u_g) = u_g ⊗ u_g`, `ε(u_g) = 1`, represented by the left regular
/// representation.
pub fn group_algebra(table: &GroupTable) -> Result<BialgebraDescriptor> {
    let group = check_group_table(table)?;
    let d = table.order();
    let one = c(1.0);
    let mut mult = vec![C64::default(); d * d * d];
    let mut coproduct = vec![C64::default(); d * d * d];
    let mut invol = CMatrix::zeros(d, d);
    let mut unit = vec![C64::default(); d];
    unit[group.identity] = one;
    for g in 0..d {
        for h in 0..d {
            mult[(g * d + h) * d + table.op(g, h)] = one;
        }
        coproduct[(g * d + g) * d + g] = one;
        invol[(g, group.inverse[g])] = one;
    }
    let block = (0..d)
        .map(|g| {
            let mut m = CMatrix::zeros(d, d);
            for h in 0..d {
                m[(table.op(g, h), h)] = one;
            }
            m
        })
        .collect();
    BialgebraDescriptor::from_parts(
        d,
        (0..d).map(|g| format!("u_{g}")).collect(),
        mult,
        unit,
        invol,
        coproduct,
        vec![one; d],
        vec![block],
    )
}
