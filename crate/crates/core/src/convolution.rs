//! The convolution algebra `(B*, ⋆)`, convolution of kernel maps, the
//! R-map `φ ↦ (id ⊗ φ)∘Δ` with its left inverse the ε-slice, and
//! convolution exponentials.

use serde::{Deserialize, Serialize};

use crate::bialgebra::{BialgebraDescriptor, Functional};
use crate::kernel::KernelMap;
use crate::linalg::{self, CMatrix};
use crate::{Error, Result};

/// Default cap on `(dim ĥ₁·dim ĥ₂)²·d` for [`convolve_kernel`].
pub const DEFAULT_KERNEL_BUDGET: usize = 1 << 24;

/// Target for the truncation bound of the exponential series.
const SERIES_TAIL: f64 = 1e-12;

/// A linear operator on `B` acting on coefficient columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperatorOnB(pub CMatrix);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExpAlgorithm {
    /// Exponentiate the R-map matrix densely and slice with ε.
    #[default]
    Rmap,
    /// Truncated power series in the convolution algebra.
    Series,
}

impl std::str::FromStr for ExpAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rmap" => Ok(Self::Rmap),
            "series" => Ok(Self::Series),
            other => Err(Error::Parse(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// `(φ₁ ⋆ φ₂)(e_i) = Σ_{j,k} Δ[i][(j,k)] φ₁(e_j) φ₂(e_k)`.
pub fn convolve(b: &BialgebraDescriptor, phi1: &Functional, phi2: &Functional) -> Functional {
    Functional::new(
        (0..b.dim())
            .map(|i| {
                b.coproduct_terms(i)
                    .map(|(j, k, z)| z * phi1.coeffs[j] * phi2.coeffs[k])
                    .sum()
            })
            .collect(),
    )
}

/// `(Φ₁ ⋆ Φ₂)(e_i) = Σ Δ[i][(j,k)] Φ₁(e_j) ⊗ Φ₂(e_k)`, Kronecker products in
/// row-major leg order: the legs of `Φ₁` come first.
pub fn convolve_kernel(
    b: &BialgebraDescriptor,
    phi1: &KernelMap,
    phi2: &KernelMap,
) -> Result<KernelMap> {
    convolve_kernel_with_budget(b, phi1, phi2, DEFAULT_KERNEL_BUDGET)
}

pub fn convolve_kernel_with_budget(
    b: &BialgebraDescriptor,
    phi1: &KernelMap,
    phi2: &KernelMap,
    budget: usize,
) -> Result<KernelMap> {
    let n = phi1.target_dim() * phi2.target_dim();
    let required = n.saturating_mul(n).saturating_mul(b.dim());
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let blocks = (0..b.dim())
        .map(|i| {
            b.coproduct_terms(i).fold(CMatrix::zeros(n, n), |acc, (j, k, z)| {
                acc + phi1.block(j).kronecker(phi2.block(k)) * z
            })
        })
        .collect();
    KernelMap::new(blocks)
}

/// Matrix of `(id ⊗ φ)∘Δ`: column `i` holds the coefficients of the image of
/// `e_i`.
pub fn r_matrix(b: &BialgebraDescriptor, phi: &Functional) -> LinearOperatorOnB {
    let d = b.dim();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for (j, k, z) in b.coproduct_terms(i) {
            m[(j, i)] += z * phi.coeffs[k];
        }
    }
    LinearOperatorOnB(m)
}

/// A map `Ψ: B → B ⊗ B(ĥ)`, stored as `parts[i][j]`: the `B(ĥ)` coefficient
/// of `e_j` in `Ψ(e_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMap {
    pub target_dim: usize,
    pub parts: Vec<Vec<CMatrix>>,
}

/// `(id ⊗ Φ)∘Δ` for a kernel map.
pub fn r_lift(b: &BialgebraDescriptor, phi: &KernelMap) -> LiftedMap {
    let d = b.dim();
    let n = phi.target_dim();
    let parts = (0..d)
        .map(|i| {
            let mut row = vec![CMatrix::zeros(n, n); d];
            for (j, k, z) in b.coproduct_terms(i) {
                row[j] += phi.block(k) * z;
            }
            row
        })
        .collect();
    LiftedMap { target_dim: n, parts }
}

/// ε applied to the left leg: the left inverse of [`r_lift`].
pub fn e_slice(b: &BialgebraDescriptor, psi: &LiftedMap) -> Result<KernelMap> {
    let d = b.dim();
    let n = psi.target_dim;
    if psi.parts.len() != d || psi.parts.iter().any(|row| row.len() != d) {
        return Err(Error::Shape("lifted map must be indexed by basis pairs".into()));
    }
    if psi.parts.iter().flatten().any(|m| m.shape() != (n, n)) {
        return Err(Error::Shape("lifted map blocks must match target_dim".into()));
    }
    let eps = b.counit_coeffs();
    let blocks = psi
        .parts
        .iter()
        .map(|row| {
            row.iter()
                .zip(eps)
                .fold(CMatrix::zeros(n, n), |acc, (m, e)| acc + m * *e)
        })
        .collect();
    KernelMap::new(blocks)
}

/// `φ = ε ∘ T` for an operator on `B`.
pub fn e_slice_operator(b: &BialgebraDescriptor, op: &LinearOperatorOnB) -> Functional {
    let eps = b.counit_coeffs();
    Functional::new(
        (0..b.dim())
            .map(|i| (0..b.dim()).map(|j| eps[j] * op.0[(j, i)]).sum())
            .collect(),
    )
}

/// `exp_⋆(tγ)` with unit ε.
pub fn conv_exp(b: &BialgebraDescriptor, gamma: &Functional, t: f64, alg: ExpAlgorithm) -> Functional {
    match alg {
        ExpAlgorithm::Rmap => conv_exp_rmap(b, gamma, t),
        ExpAlgorithm::Series => conv_exp_series(b, gamma, t).value,
    }
}

fn conv_exp_rmap(b: &BialgebraDescriptor, gamma: &Functional, t: f64) -> Functional {
    if t == 0.0 {
        return b.counit();
    }
    let r = r_matrix(b, gamma).0 * linalg::c(t);
    e_slice_operator(b, &LinearOperatorOnB(linalg::expm(&r)))
}

/// Series evaluation together with its truncation data.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExp {
    pub value: Functional,
    pub terms: usize,
    /// `(x^{N+1}/(N+1)!)·e^x` with `x = ‖tγ‖`.
    pub tail_bound: f64,
}

/// Number of terms `N` such that `(x^{N+1}/(N+1)!)·e^x ≤ 1e-12`.
pub fn series_terms(x: f64) -> usize {
    let mut n = 0usize;
    let mut term = x; // x^{n+1}/(n+1)!
    while term * x.exp() > SERIES_TAIL {
        n += 1;
        term *= x / (n + 1) as f64;
    }
    n
}

/// `Σ_{n ≤ N} tⁿ γ^{⋆n}/n!`, with the dual norm of `γ` taken as the operator
/// norm of its R-map matrix.
pub fn conv_exp_series(b: &BialgebraDescriptor, gamma: &Functional, t: f64) -> SeriesExp {
    let x = (linalg::op_norm(&r_matrix(b, gamma).0) * t).abs();
    let n = series_terms(x);
    let tg = gamma.scale(linalg::c(t));
    let mut term = b.counit();
    let mut sum = term.clone();
    for k in 1..=n {
        term = convolve(b, &term, &tg).scale(linalg::c(1.0 / k as f64));
        sum = &sum + &term;
    }
    let mut tail = x.exp();
    for k in 1..=n + 1 {
        tail *= x / k as f64;
    }
    SeriesExp { value: sum, terms: n, tail_bound: tail }
}

/// `φ^{⋆n}`, with `φ^{⋆0} = ε`.
pub fn convolution_power(b: &BialgebraDescriptor, phi: &Functional, n: usize) -> Functional {
    (0..n).fold(b.counit(), |acc, _| convolve(b, &acc, phi))
}

/// Left-to-right ⋆-product of a sequence; ε for an empty sequence.
pub fn convolve_all<'a>(
    b: &BialgebraDescriptor,
    factors: impl IntoIterator<Item = &'a Functional>,
) -> Functional {
    factors.into_iter().fold(b.counit(), |acc, f| convolve(b, &acc, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::{function_algebra, group_algebra, GroupTable};
    use crate::linalg::c;
    use crate::C64;

    fn point_mass(d: usize, x: usize) -> Functional {
        let mut f = Functional::zero(d);
        f.coeffs[x] = c(1.0);
        f
    }

    #[test]
    fn counit_is_two_sided_unit() {
        let b = function_algebra(&GroupTable::s3()).unwrap();
        let phi = Functional::new((0..6).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect());
        assert_eq!(convolve(&b, &b.counit(), &phi), phi);
        assert_eq!(convolve(&b, &phi, &b.counit()), phi);
    }

    #[test]
    fn point_masses_convolve_like_group_elements() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        assert_eq!(convolve(&b, &point_mass(2, 0), &point_mass(2, 1)), point_mass(2, 1));
        assert_eq!(convolve(&b, &point_mass(2, 1), &point_mass(2, 1)), point_mass(2, 0));
    }

    #[test]
    fn grouplike_convolution_is_pointwise() {
        let b = group_algebra(&GroupTable::cyclic(2)).unwrap();
        let phi = Functional::new(vec![C64::new(0.5, 1.0), c(-2.0)]);
        let psi = Functional::new(vec![c(3.0), C64::new(0.0, 1.0)]);
        let got = convolve(&b, &phi, &psi);
        assert_eq!(got.coeffs[0], phi.coeffs[0] * psi.coeffs[0]);
        assert_eq!(got.coeffs[1], phi.coeffs[1] * psi.coeffs[1]);
    }

    #[test]
    fn r_matrix_of_counit_is_identity() {
        let b = function_algebra(&GroupTable::s3()).unwrap();
        assert_eq!(r_matrix(&b, &b.counit()).0, linalg::identity(6));
    }

    #[test]
    fn r_matrix_of_point_mass_swaps() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        assert_eq!(r_matrix(&b, &point_mass(2, 1)).0, swap);
    }

    #[test]
    fn e_slice_of_coproduct_is_identity_coefficients() {
        // Ψ_k(e_i) = Σ_j Δ[i][(j,k)] e_j ⊗ 1, one scalar lift per right-leg index k.
        let b = function_algebra(&GroupTable::s3()).unwrap();
        for k in 0..6 {
            let parts = (0..6)
                .map(|i| (0..6).map(|j| CMatrix::from_element(1, 1, b.coproduct(i, j, k))).collect())
                .collect();
            let sliced = e_slice(&b, &LiftedMap { target_dim: 1, parts }).unwrap();
            for i in 0..6 {
                let want = if i == k { c(1.0) } else { c(0.0) };
                assert_eq!(sliced.block(i)[(0, 0)], want);
            }
        }
        let eps = KernelMap::scalar(&b.counit());
        assert_eq!(e_slice(&b, &r_lift(&b, &eps)).unwrap(), eps);
    }

    #[test]
    fn kernel_convolution_with_counit_is_identity() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let phi = KernelMap::new(vec![
            CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]),
            CMatrix::from_row_slice(2, 2, &[c(-1.0), c(0.5), c(0.0), c(2.0)]),
        ])
        .unwrap();
        let eps = KernelMap::scalar(&b.counit());
        assert_eq!(convolve_kernel(&b, &phi, &eps).unwrap(), phi);
        assert_eq!(convolve_kernel(&b, &eps, &phi).unwrap(), phi);
    }

    #[test]
    fn kernel_budget_is_enforced() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let phi = KernelMap::zero(2, 4);
        let err = convolve_kernel_with_budget(&b, &phi, &phi, 100).unwrap_err();
        assert!(matches!(err, Error::Budget { required: 512, budget: 100 }));
    }

    #[test]
    fn zero_generator_gives_counit() {
        let b = function_algebra(&GroupTable::cyclic(3)).unwrap();
        for t in [0.0, 0.5, 3.0] {
            for alg in [ExpAlgorithm::Rmap, ExpAlgorithm::Series] {
                let p = conv_exp(&b, &Functional::zero(3), t, alg);
                assert!(p.distance(&b.counit()) < 1e-15);
            }
        }
    }

    #[test]
    fn series_terms_meet_the_bound() {
        for x in [0.0, 0.1, 1.0, 4.0, 10.0] {
            let n = series_terms(x);
            let mut bound = x.exp();
            for k in 1..=n + 1 {
                bound *= x / k as f64;
            }
            assert!(bound <= 1e-12, "x={x} n={n} bound={bound}");
        }
    }

    #[test]
    fn algorithm_parses() {
        assert_eq!("rmap".parse::<ExpAlgorithm>().unwrap(), ExpAlgorithm::Rmap);
        assert!("pade".parse::<ExpAlgorithm>().is_err());
    }
}
