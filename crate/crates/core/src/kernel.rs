//! Linear maps `B → B(k̂)` with `k̂ = ℂ ⊕ k`, stored by their values on the
//! basis of `B`.
//!
//! Block decomposition of `φ(a)` on `k̂`:
//!
//! ```text
//!   [ γ(a)  δ†(a) ]
//!   [ δ(a)  ν(a)  ]
//! ```
//!
//! with `γ` the vacuum corner `⟨e₀|φ(·)|e₀⟩`.

use serde::{Deserialize, Serialize};

use crate::bialgebra::{BialgebraDescriptor, Element, Functional};
use crate::json::{mat_to_json, square_from_json, Cx};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::{Error, Result, C64, DEFAULT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMap {
    target_dim: usize,
    blocks: Vec<CMatrix>,
}

/// JSON form: `{"target_dim": n, "blocks": [φ(e_0), φ(e_1), ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelMapFile {
    pub target_dim: usize,
    pub blocks: Vec<Vec<Vec<Cx>>>,
}

impl KernelMap {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Shape("kernel map needs at least one block".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::Shape("target space must contain the vacuum".into()));
        }
        if blocks.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::Shape("kernel map blocks must be square of a common size".into()));
        }
        Ok(Self { target_dim: n, blocks })
    }

    pub fn zero(dim: usize, target_dim: usize) -> Self {
        Self { target_dim, blocks: vec![CMatrix::zeros(target_dim, target_dim); dim] }
    }

    /// A functional viewed as a map into `B(ℂ)`.
    pub fn scalar(f: &Functional) -> Self {
        Self {
            target_dim: 1,
            blocks: f.coeffs.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect(),
        }
    }

    /// `a ↦ f(a) I_n`.
    pub fn functional_times_identity(f: &Functional, n: usize) -> Self {
        Self {
            target_dim: n,
            blocks: f.coeffs.iter().map(|&z| linalg::identity(n) * z).collect(),
        }
    }

    /// Assembles `[[γ, δ†],[δ, ν]]` blockwise from per-basis data.
    pub fn from_parts(
        gamma: &Functional,
        delta: &[CVector],
        delta_dagger: &[CVector],
        nu: &[CMatrix],
    ) -> Result<Self> {
        let d = gamma.dim();
        if delta.len() != d || delta_dagger.len() != d || nu.len() != d {
            return Err(Error::Shape("block parts must have one entry per basis element".into()));
        }
        let k = nu.first().map_or(0, CMatrix::nrows);
        let mut blocks = Vec::with_capacity(d);
        for i in 0..d {
            if delta[i].len() != k || delta_dagger[i].len() != k || nu[i].shape() != (k, k) {
                return Err(Error::Shape(format!("block parts for basis element {i}")));
            }
            let mut m = CMatrix::zeros(k + 1, k + 1);
            m[(0, 0)] = gamma.coeffs[i];
            for r in 0..k {
                m[(r + 1, 0)] = delta[i][r];
                m[(0, r + 1)] = delta_dagger[i][r];
            }
            m.view_mut((1, 1), (k, k)).copy_from(&nu[i]);
            blocks.push(m);
        }
        Self::new(blocks)
    }

    /// Dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.blocks.len()
    }

    /// `1 + dim k`.
    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn noise_dim(&self) -> usize {
        self.target_dim - 1
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn eval(&self, a: &Element) -> CMatrix {
        a.coeffs
            .iter()
            .zip(&self.blocks)
            .fold(CMatrix::zeros(self.target_dim, self.target_dim), |acc, (z, m)| acc + m * *z)
    }

    /// Vacuum corner `γ = ⟨e₀|φ(·)|e₀⟩`.
    pub fn gamma(&self) -> Functional {
        Functional::new(self.blocks.iter().map(|m| m[(0, 0)]).collect())
    }

    /// Lower-left column `δ(e_i)`.
    pub fn delta(&self, i: usize) -> CVector {
        self.blocks[i].view((1, 0), (self.noise_dim(), 1)).column(0).into_owned()
    }

    /// Upper-right row `δ†(e_i)`, returned as a column.
    pub fn delta_dagger(&self, i: usize) -> CVector {
        self.blocks[i].view((0, 1), (1, self.noise_dim())).transpose().column(0).into_owned()
    }

    /// Lower-right block `ν(e_i)`.
    pub fn nu(&self, i: usize) -> CMatrix {
        let k = self.noise_dim();
        self.blocks[i].view((1, 1), (k, k)).into_owned()
    }

    /// The functional `⟨x, φ(·) y⟩` for vectors on the target space.
    pub fn matrix_element(&self, x: &CVector, y: &CVector) -> Functional {
        Functional::new(self.blocks.iter().map(|m| x.dotc(&(m * y))).collect())
    }

    /// `⟨ĉ, φ(·) d̂⟩` with `ĉ = (1, c)`, `d̂ = (1, d)`.
    pub fn component(&self, c_vec: &CVector, d_vec: &CVector) -> Functional {
        self.matrix_element(&hat(c_vec), &hat(d_vec))
    }

    /// `a ↦ L φ(a) R` with `L = v*`, `R = w`.
    pub fn sandwich(&self, v: &CMatrix, w: &CMatrix) -> Result<Self> {
        if v.nrows() != self.target_dim || w.nrows() != self.target_dim {
            return Err(Error::Shape("sandwich factors must act on the target space".into()));
        }
        Self::new(self.blocks.iter().map(|m| v.adjoint() * m * w).collect())
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        Self::new(self.blocks.iter().map(f).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { target_dim: self.target_dim, blocks: self.blocks.iter().map(|m| m * z).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        if self.dim() != other.dim() || self.target_dim != other.target_dim {
            return Err(Error::Shape("kernel maps have different shapes".into()));
        }
        Self::new(self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect())
    }

    /// Largest entry modulus over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `max_i ‖φ(e_i*) − φ(e_i)*‖`.
    pub fn hermitian_residual(&self, b: &BialgebraDescriptor) -> f64 {
        (0..self.dim())
            .map(|i| {
                let lhs = self.eval(&b.star(&b.basis(i)));
                linalg::max_abs(&(lhs - self.blocks[i].adjoint()))
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian_real(&self, b: &BialgebraDescriptor) -> bool {
        self.hermitian_residual(b) <= 1e-12
    }

    /// Largest violation of multiplicativity and *-preservation.
    pub fn star_hom_residual(&self, b: &BialgebraDescriptor) -> f64 {
        let d = self.dim();
        let mut r = self.hermitian_residual(b);
        for i in 0..d {
            for j in 0..d {
                let lhs = self.eval(&b.mul(&b.basis(i), &b.basis(j)));
                r = r.max(linalg::max_abs(&(lhs - &self.blocks[i] * &self.blocks[j])));
            }
        }
        r
    }

    /// Block matrix `[φ(e_i* e_j)]_{ij}`; it is positive semidefinite iff the
    /// map is completely positive.
    pub fn choi(&self, b: &BialgebraDescriptor) -> CMatrix {
        let (d, n) = (self.dim(), self.target_dim);
        let mut out = CMatrix::zeros(d * n, d * n);
        for i in 0..d {
            for j in 0..d {
                let m = self.eval(&b.star_mul_basis(i, j));
                out.view_mut((i * n, j * n), (n, n)).copy_from(&m);
            }
        }
        out
    }

    pub fn choi_min_eigenvalue(&self, b: &BialgebraDescriptor) -> f64 {
        linalg::min_eigenvalue(&self.choi(b))
    }

    pub fn is_completely_positive(&self, b: &BialgebraDescriptor, tol: f64) -> bool {
        let choi = self.choi(b);
        linalg::hermiticity_residual(&choi) <= tol && linalg::min_eigenvalue(&choi) >= -tol
    }

    /// Completely bounded norm of a completely positive map, `‖φ(1)‖`.
    /// Maps that are not CP are rejected; no general CB-norm routine is
    /// provided.
    pub fn cb_norm(&self, b: &BialgebraDescriptor) -> Result<f64> {
        let min_eig = self.choi_min_eigenvalue(b);
        if !self.is_completely_positive(b, DEFAULT_TOL) {
            return Err(Error::NotCompletelyPositive { min_eig });
        }
        Ok(linalg::op_norm(&self.eval(&b.one())))
    }

    pub fn to_file(&self) -> KernelMapFile {
        KernelMapFile {
            target_dim: self.target_dim,
            blocks: self.blocks.iter().map(mat_to_json).collect(),
        }
    }

    pub fn from_file(file: &KernelMapFile) -> Result<Self> {
        let blocks = file
            .blocks
            .iter()
            .map(|m| square_from_json(m))
            .collect::<Result<Vec<_>>>()?;
        let map = Self::new(blocks)?;
        if map.target_dim != file.target_dim {
            return Err(Error::Shape(format!(
                "target_dim {} does not match block size {}",
                file.target_dim, map.target_dim
            )));
        }
        Ok(map)
    }
}

/// `ĉ = (1, c)`.
pub fn hat(v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len() + 1);
    out[0] = c(1.0);
    out.rows_mut(1, v.len()).copy_from(v);
    out
}

/// Vacuum vector `e₀` on `ℂ ⊕ ℂ^k`.
pub fn vacuum(k: usize) -> CVector {
    hat(&CVector::zeros(k))
}

/// `Δ^QS = diag(0, I_k)`.
pub fn delta_qs(k: usize) -> CMatrix {
    linalg::direct_sum(&CMatrix::zeros(1, 1), &linalg::identity(k))
}
