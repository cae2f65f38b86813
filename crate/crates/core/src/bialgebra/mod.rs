//! Finite-dimensional counital *-bialgebras given by structure constants,
//! together with a faithful block-matrix *-representation used for norms and
//! positivity.

mod groups;
mod io;
mod validate;

use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{self, CMatrix};
use crate::{Error, Result, C64, DEFAULT_TOL};

pub use groups::{check_group_table, function_algebra, group_algebra, GroupTable};
pub use io::{load_descriptor, save_descriptor, DescriptorFile};
pub use validate::{validate, validate_with_tol, ValidationReport};

/// A finite-dimensional *-bialgebra in a fixed basis `e_0, ..., e_{d-1}`.
///
/// Tensors are stored flat: `mult[(i*d + j)*d + k]` is the coefficient of
/// `e_k` in `e_i e_j`, and `coproduct[(i*d + j)*d + k]` the coefficient of
/// `e_j ⊗ e_k` in `Δ(e_i)`. The involution acts as
/// `(Σ c_i e_i)* = Σ_{i,k} conj(c_i) invol[(i,k)] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BialgebraDescriptor {
    dim: usize,
    labels: Vec<String>,
    mult: Vec<C64>,
    unit: Vec<C64>,
    invol: CMatrix,
    coproduct: Vec<C64>,
    counit: Vec<C64>,
    rep_blocks: Vec<Vec<CMatrix>>,
}

/// An element of the algebra as a coefficient list against the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub coeffs: Vec<C64>,
}

/// An element of the dual space, stored by its values on the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub coeffs: Vec<C64>,
}

/// Result of a positivity test: `margin` is the smallest eigenvalue seen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Positivity {
    pub positive: bool,
    pub margin: f64,
}

/// Certificate for [`BialgebraDescriptor::functional_is_state`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateReport {
    pub is_state: bool,
    /// `|φ(1) - 1|`.
    pub unit_residual: f64,
    /// Smallest eigenvalue of the Gram matrix `φ(e_i* e_j)`.
    pub gram_min_eig: f64,
}

impl Element {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self { coeffs: vec![C64::default(); dim] }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coeffs[i] = linalg::c(1.0);
        e
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * z).collect() }
    }
}

impl Functional {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self { coeffs: vec![C64::default(); dim] }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self { coeffs: values.iter().map(|&v| linalg::c(v)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Linear evaluation `φ(a)`.
    pub fn eval(&self, a: &Element) -> C64 {
        self.coeffs.iter().zip(&a.coeffs).map(|(f, x)| f * x).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * z).collect() }
    }

    /// Largest coefficient modulus, the distance used for functional residuals.
    pub fn max_abs(&self) -> f64 {
        linalg::max_abs_slice(&self.coeffs)
    }

    pub fn distance(&self, other: &Functional) -> f64 {
        (self - other).max_abs()
    }
}

macro_rules! linear_ops {
    ($t:ident) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: &$t) -> $t {
                $t { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
            }
        }
        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: &$t) -> $t {
                $t { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                $t { coeffs: self.coeffs.iter().map(|a| -a).collect() }
            }
        }
        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                self.scale(linalg::c(rhs))
            }
        }
    };
}

linear_ops!(Element);
linear_ops!(Functional);

impl BialgebraDescriptor {
    /// Assembles a descriptor from its parts, checking every tensor shape.
    /// Axioms are not checked here; see [`validate`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        dim: usize,
        labels: Vec<String>,
        mult: Vec<C64>,
        unit: Vec<C64>,
        invol: CMatrix,
        coproduct: Vec<C64>,
        counit: Vec<C64>,
        rep_blocks: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        let d = dim;
        if d == 0 {
            return Err(Error::Shape("dim must be positive".into()));
        }
        let check = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Shape(format!("{name}: expected {want} entries, got {got}")))
            }
        };
        check("labels", labels.len(), d)?;
        check("mult", mult.len(), d * d * d)?;
        check("unit", unit.len(), d)?;
        check("coproduct", coproduct.len(), d * d * d)?;
        check("counit", counit.len(), d)?;
        if invol.shape() != (d, d) {
            return Err(Error::Shape(format!("invol: expected {d}x{d}, got {:?}", invol.shape())));
        }
        if rep_blocks.is_empty() {
            return Err(Error::Shape("rep_blocks must contain at least one block".into()));
        }
        for (b, block) in rep_blocks.iter().enumerate() {
            check(&format!("rep_blocks[{b}]"), block.len(), d)?;
            let n = block[0].nrows();
            if block.iter().any(|m| m.shape() != (n, n)) {
                return Err(Error::Shape(format!(
                    "rep_blocks[{b}]: matrices must be square of a common size"
                )));
            }
        }
        Ok(Self { dim, labels, mult, unit, invol, coproduct, counit, rep_blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of the basis element with the given label.
    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn mult(&self, i: usize, j: usize, k: usize) -> C64 {
        self.mult[(i * self.dim + j) * self.dim + k]
    }

    /// Coefficients of `e_i e_j`.
    pub fn mult_basis(&self, i: usize, j: usize) -> &[C64] {
        let d = self.dim;
        &self.mult[(i * d + j) * d..(i * d + j + 1) * d]
    }

    pub fn coproduct(&self, i: usize, j: usize, k: usize) -> C64 {
        self.coproduct[(i * self.dim + j) * self.dim + k]
    }

    /// Nonzero terms `(j, k, Δ[i][(j,k)])` of `Δ(e_i)`.
    pub fn coproduct_terms(&self, i: usize) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let d = self.dim;
        (0..d * d).filter_map(move |jk| {
            let z = self.coproduct[i * d * d + jk];
            (z != C64::default()).then_some((jk / d, jk % d, z))
        })
    }

    pub fn unit_coeffs(&self) -> &[C64] {
        &self.unit
    }

    pub fn invol_matrix(&self) -> &CMatrix {
        &self.invol
    }

    pub fn counit_coeffs(&self) -> &[C64] {
        &self.counit
    }

    pub fn rep_blocks(&self) -> &[Vec<CMatrix>] {
        &self.rep_blocks
    }

    pub fn raw_mult(&self) -> &[C64] {
        &self.mult
    }

    pub fn raw_coproduct(&self) -> &[C64] {
        &self.coproduct
    }

    pub fn basis(&self, i: usize) -> Element {
        Element::basis(self.dim, i)
    }

    pub fn one(&self) -> Element {
        Element::new(self.unit.clone())
    }

    /// The counit as a functional.
    pub fn counit(&self) -> Functional {
        Functional::new(self.counit.clone())
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let d = self.dim;
        let mut out = vec![C64::default(); d];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if *ai == C64::default() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if *bj == C64::default() {
                    continue;
                }
                let w = ai * bj;
                for (o, m) in out.iter_mut().zip(self.mult_basis(i, j)) {
                    *o += w * m;
                }
            }
        }
        Element::new(out)
    }

    pub fn star(&self, a: &Element) -> Element {
        let d = self.dim;
        let mut out = vec![C64::default(); d];
        for (i, ai) in a.coeffs.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += ai.conj() * self.invol[(i, k)];
            }
        }
        Element::new(out)
    }

    /// `e_i* e_j`.
    pub fn star_mul_basis(&self, i: usize, j: usize) -> Element {
        self.mul(&self.star(&self.basis(i)), &self.basis(j))
    }

    /// Image of `a` in each representation block.
    pub fn rep(&self, a: &Element) -> Vec<CMatrix> {
        self.rep_blocks
            .iter()
            .map(|block| {
                let n = block[0].nrows();
                a.coeffs
                    .iter()
                    .zip(block)
                    .fold(CMatrix::zeros(n, n), |acc, (z, m)| acc + m * *z)
            })
            .collect()
    }

    /// Image of `a` as a single block-diagonal matrix.
    pub fn rep_matrix(&self, a: &Element) -> CMatrix {
        self.rep(a)
            .iter()
            .fold(CMatrix::zeros(0, 0), |acc, m| linalg::direct_sum(&acc, m))
    }

    /// C*-norm of `a`, computed in the faithful representation.
    pub fn norm(&self, a: &Element) -> f64 {
        self.rep(a).iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    pub fn element_positive(&self, a: &Element) -> Positivity {
        self.element_positive_with_tol(a, DEFAULT_TOL)
    }

    /// `a ≥ 0` iff every block image is Hermitian and positive semidefinite.
    pub fn element_positive_with_tol(&self, a: &Element, tol: f64) -> Positivity {
        let mut hermitian = true;
        let mut margin = f64::INFINITY;
        for m in self.rep(a) {
            hermitian &= linalg::hermiticity_residual(&m) <= tol;
            margin = margin.min(linalg::min_eigenvalue(&m));
        }
        Positivity { positive: hermitian && margin >= -tol, margin }
    }

    /// Gram matrix `G_ij = φ(e_i* e_j)`.
    pub fn gram(&self, phi: &Functional) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |i, j| phi.eval(&self.star_mul_basis(i, j)))
    }

    pub fn functional_is_state(&self, phi: &Functional) -> StateReport {
        self.functional_is_state_with_tol(phi, DEFAULT_TOL)
    }

    /// A functional is a state iff `φ(1) = 1` and its Gram matrix is PSD; the
    /// latter is equivalent to `φ(b*b) ≥ 0` for every `b`.
    pub fn functional_is_state_with_tol(&self, phi: &Functional, tol: f64) -> StateReport {
        let unit_residual = (phi.eval(&self.one()) - linalg::c(1.0)).norm();
        let gram = self.gram(phi);
        let herm = linalg::hermiticity_residual(&gram);
        let gram_min_eig = linalg::min_eigenvalue(&gram);
        StateReport {
            is_state: unit_residual <= tol && herm <= tol && gram_min_eig >= -tol,
            unit_residual,
            gram_min_eig,
        }
    }

    /// Residual of `flip ∘ Δ = Δ`.
    pub fn cocommutativity_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r = r.max((self.coproduct(i, j, k) - self.coproduct(i, k, j)).norm());
                }
            }
        }
        r
    }

    /// Residual of `ab = ba` over basis pairs.
    pub fn commutativity_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r = r.max((self.mult(i, j, k) - self.mult(j, i, k)).norm());
                }
            }
        }
        r
    }

    /// Returns a copy with the counit replaced; used to build corrupted
    /// fixtures.
    pub fn with_counit(&self, counit: Vec<C64>) -> Result<Self> {
        if counit.len() != self.dim {
            return Err(Error::Shape("counit length".into()));
        }
        Ok(Self { counit, ..self.clone() })
    }

    /// Checks that `chi` is a *-character: multiplicative, *-preserving and
    /// unital. Returns the largest violation.
    pub fn character_residual(&self, chi: &Functional) -> f64 {
        let d = self.dim;
        let mut r = (chi.eval(&self.one()) - linalg::c(1.0)).norm();
        for i in 0..d {
            let ei = self.basis(i);
            let star = chi.eval(&self.star(&ei)) - chi.coeffs[i].conj();
            r = r.max(star.norm());
            for j in 0..d {
                let prod = chi.eval(&self.mul(&ei, &self.basis(j))) - chi.coeffs[i] * chi.coeffs[j];
                r = r.max(prod.norm());
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn z2() -> BialgebraDescriptor {
        function_algebra(&GroupTable::cyclic(2)).unwrap()
    }

    #[test]
    fn unit_is_positive_with_margin_one() {
        let b = z2();
        let p = b.element_positive(&b.one());
        assert!(p.positive);
        assert!((p.margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn signed_difference_is_not_positive() {
        let b = z2();
        let a = Element::new(vec![c(1.0), c(-1.0)]);
        let p = b.element_positive(&a);
        assert!(!p.positive);
        assert!((p.margin + 1.0).abs() < 1e-15);
    }

    #[test]
    fn counit_is_a_state() {
        for b in [z2(), group_algebra(&GroupTable::cyclic(3)).unwrap()] {
            assert!(b.functional_is_state(&b.counit()).is_state);
        }
    }

    #[test]
    fn probability_vector_is_a_state() {
        let b = z2();
        assert!(b.functional_is_state(&Functional::from_real(&[0.3, 0.7])).is_state);
        assert!(!b.functional_is_state(&Functional::from_real(&[1.3, -0.3])).is_state);
    }

    #[test]
    fn twice_counit_is_not_a_state() {
        let b = z2();
        let r = b.functional_is_state(&b.counit().scale(c(2.0)));
        assert!(!r.is_state);
        assert!((r.unit_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn star_is_conjugate_linear() {
        let b = group_algebra(&GroupTable::cyclic(3)).unwrap();
        let a = Element::new(vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0), c(3.0)]);
        let s = b.star(&a);
        // u_g* = u_{g^-1}: coefficient of u_1 in a* is conj(coefficient of u_2).
        assert_eq!(s.coeffs, vec![C64::new(1.0, -2.0), c(3.0), C64::new(0.0, 1.0)]);
    }

    #[test]
    fn from_parts_rejects_bad_lengths() {
        let b = z2();
        let err = BialgebraDescriptor::from_parts(
            2,
            b.labels().to_vec(),
            b.raw_mult()[..4].to_vec(),
            b.unit_coeffs().to_vec(),
            b.invol_matrix().clone(),
            b.raw_coproduct().to_vec(),
            b.counit_coeffs().to_vec(),
            b.rep_blocks().to_vec(),
        );
        assert!(matches!(err, Err(Error::Shape(_))));
    }
}
