//! Axiom residuals for a descriptor. Every check is a direct tensor
//! contraction over basis elements; elements of `B ⊗ B` are handled as
//! `d × d` coefficient matrices.

use serde::Serialize;

use super::{BialgebraDescriptor, Element};
use crate::linalg::{self, c, CMatrix};
use crate::{C64, DEFAULT_TOL};

/// One residual per axiom, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tol: f64,
    pub residuals: Vec<(String, f64)>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

pub fn validate(b: &BialgebraDescriptor) -> ValidationReport {
    validate_with_tol(b, DEFAULT_TOL)
}

pub fn validate_with_tol(b: &BialgebraDescriptor, tol: f64) -> ValidationReport {
    let residuals = vec![
        ("associativity".to_string(), associativity(b)),
        ("unit".to_string(), unit(b)),
        ("involution".to_string(), involution(b)),
        ("coassociativity".to_string(), coassociativity(b)),
        ("coproduct_multiplicative".to_string(), coproduct_multiplicative(b)),
        ("coproduct_star".to_string(), coproduct_star(b)),
        ("coproduct_unital".to_string(), coproduct_unital(b)),
        ("counit_character".to_string(), b.character_residual(&b.counit())),
        ("counital_property".to_string(), counital(b)),
        ("rep_multiplicative".to_string(), rep_multiplicative(b)),
        ("rep_star".to_string(), rep_star(b)),
        ("rep_unital".to_string(), rep_unital(b)),
        ("rep_faithful".to_string(), rep_faithful(b)),
    ];
    let pass = residuals.iter().all(|(_, r)| *r <= tol);
    ValidationReport { tol, residuals, pass }
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn associativity(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let mut r: f64 = 0.0;
    for i in 0..d {
        let ei = b.basis(i);
        for j in 0..d {
            let eij = b.mul(&ei, &b.basis(j));
            for k in 0..d {
                let ek = b.basis(k);
                let left = b.mul(&eij, &ek);
                let right = b.mul(&ei, &b.mul(&b.basis(j), &ek));
                r = r.max(max_diff(&left.coeffs, &right.coeffs));
            }
        }
    }
    r
}

fn unit(b: &BialgebraDescriptor) -> f64 {
    let one = b.one();
    (0..b.dim())
        .map(|i| {
            let ei = b.basis(i);
            max_diff(&b.mul(&one, &ei).coeffs, &ei.coeffs)
                .max(max_diff(&b.mul(&ei, &one).coeffs, &ei.coeffs))
        })
        .fold(0.0, f64::max)
}

/// Anti-multiplicativity `(e_i e_j)* = e_j* e_i*` and `a** = a`. Conjugate
/// linearity holds by construction of [`BialgebraDescriptor::star`].
fn involution(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let mut r: f64 = 0.0;
    for i in 0..d {
        let ei = b.basis(i);
        r = r.max(max_diff(&b.star(&b.star(&ei)).coeffs, &ei.coeffs));
        for j in 0..d {
            let ej = b.basis(j);
            let left = b.star(&b.mul(&ei, &ej));
            let right = b.mul(&b.star(&ej), &b.star(&ei));
            r = r.max(max_diff(&left.coeffs, &right.coeffs));
        }
    }
    r
}

/// `Δ(a)` as a coefficient matrix over `e_j ⊗ e_k`.
fn coproduct_of(b: &BialgebraDescriptor, a: &Element) -> CMatrix {
    let d = b.dim();
    CMatrix::from_fn(d, d, |j, k| {
        a.coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| z * b.coproduct(i, j, k))
            .sum()
    })
}

/// Product in `B ⊗ B`.
fn tensor_mul(b: &BialgebraDescriptor, x: &CMatrix, y: &CMatrix) -> CMatrix {
    let d = b.dim();
    let mut out = CMatrix::zeros(d, d);
    for ((a1, a2), xa) in x.iter().enumerate().map(|(n, z)| ((n % d, n / d), z)) {
        if *xa == C64::default() {
            continue;
        }
        for ((b1, b2), yb) in y.iter().enumerate().map(|(n, z)| ((n % d, n / d), z)) {
            if *yb == C64::default() {
                continue;
            }
            let w = xa * yb;
            let left = b.mult_basis(a1, b1);
            let right = b.mult_basis(a2, b2);
            for (p, lp) in left.iter().enumerate() {
                if *lp == C64::default() {
                    continue;
                }
                for (q, rq) in right.iter().enumerate() {
                    out[(p, q)] += w * lp * rq;
                }
            }
        }
    }
    out
}

/// Involution on `B ⊗ B`.
fn tensor_star(b: &BialgebraDescriptor, x: &CMatrix) -> CMatrix {
    let s = b.invol_matrix();
    s.transpose() * x.map(|z| z.conj()) * s
}

fn coassociativity(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let mut r: f64 = 0.0;
    for i in 0..d {
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    let left: C64 = (0..d).map(|j| b.coproduct(i, j, z) * b.coproduct(j, x, y)).sum();
                    let right: C64 = (0..d).map(|k| b.coproduct(i, x, k) * b.coproduct(k, y, z)).sum();
                    r = r.max((left - right).norm());
                }
            }
        }
    }
    r
}

fn coproduct_multiplicative(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let deltas: Vec<CMatrix> = (0..d).map(|i| coproduct_of(b, &b.basis(i))).collect();
    let mut r: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let lhs = coproduct_of(b, &b.mul(&b.basis(i), &b.basis(j)));
            let rhs = tensor_mul(b, &deltas[i], &deltas[j]);
            r = r.max(linalg::max_abs(&(lhs - rhs)));
        }
    }
    r
}

fn coproduct_star(b: &BialgebraDescriptor) -> f64 {
    (0..b.dim())
        .map(|i| {
            let ei = b.basis(i);
            let lhs = coproduct_of(b, &b.star(&ei));
            let rhs = tensor_star(b, &coproduct_of(b, &ei));
            linalg::max_abs(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}

fn coproduct_unital(b: &BialgebraDescriptor) -> f64 {
    let one = b.one();
    let u = CMatrix::from_fn(b.dim(), b.dim(), |j, k| one.coeffs[j] * one.coeffs[k]);
    linalg::max_abs(&(coproduct_of(b, &one) - u))
}

/// `(ε ⊗ id)∘Δ = id = (id ⊗ ε)∘Δ`.
fn counital(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let eps = b.counit_coeffs();
    let mut r: f64 = 0.0;
    for i in 0..d {
        for x in 0..d {
            let delta = if i == x { c(1.0) } else { C64::default() };
            let left: C64 = (0..d).map(|j| eps[j] * b.coproduct(i, j, x)).sum();
            let right: C64 = (0..d).map(|k| b.coproduct(i, x, k) * eps[k]).sum();
            r = r.max((left - delta).norm()).max((right - delta).norm());
        }
    }
    r
}

fn rep_multiplicative(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let mut r: f64 = 0.0;
    for i in 0..d {
        let ri = b.rep_matrix(&b.basis(i));
        for j in 0..d {
            let lhs = b.rep_matrix(&b.mul(&b.basis(i), &b.basis(j)));
            r = r.max(linalg::max_abs(&(lhs - &ri * b.rep_matrix(&b.basis(j)))));
        }
    }
    r
}

fn rep_star(b: &BialgebraDescriptor) -> f64 {
    (0..b.dim())
        .map(|i| {
            let ei = b.basis(i);
            linalg::max_abs(&(b.rep_matrix(&b.star(&ei)) - b.rep_matrix(&ei).adjoint()))
        })
        .fold(0.0, f64::max)
}

fn rep_unital(b: &BialgebraDescriptor) -> f64 {
    let r1 = b.rep_matrix(&b.one());
    linalg::max_abs(&(&r1 - linalg::identity(r1.nrows())))
}

/// Number of missing dimensions in the column rank of `a ↦ vec(R(a))`.
fn rep_faithful(b: &BialgebraDescriptor) -> f64 {
    let d = b.dim();
    let cols: Vec<_> = (0..d)
        .map(|i| {
            let m = b.rep_matrix(&b.basis(i));
            nalgebra::DVector::from_iterator(m.len(), m.iter().copied())
        })
        .collect();
    let stacked = CMatrix::from_columns(&cols);
    (d - linalg::rank(&stacked, 1e-10)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::{function_algebra, group_algebra, GroupTable};

    #[test]
    fn z2_function_algebra_passes_tightly() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let rep = validate(&b);
        assert!(rep.pass);
        assert!(rep.max_residual() <= 1e-14);
        assert_eq!(rep.residuals.len(), 13);
    }

    #[test]
    fn corrupted_counit_fails_counital_property() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        // Evaluation at the non-identity element.
        let bad = b.with_counit(vec![c(0.0), c(1.0)]).unwrap();
        let rep = validate(&bad);
        assert!(!rep.pass);
        assert!(rep.residual("counital_property").unwrap() > 0.5);
    }

    #[test]
    fn group_algebras_pass() {
        for n in [2, 3, 4] {
            assert!(validate(&group_algebra(&GroupTable::cyclic(n)).unwrap()).pass);
        }
        assert!(validate(&group_algebra(&GroupTable::s3()).unwrap()).pass);
        assert!(validate(&function_algebra(&GroupTable::s3()).unwrap()).pass);
    }

    #[test]
    fn cocommutativity_tracks_abelianness() {
        for n in [2, 3, 4] {
            let f = function_algebra(&GroupTable::cyclic(n)).unwrap();
            assert_eq!(f.cocommutativity_residual(), 0.0);
        }
        let s3 = function_algebra(&GroupTable::s3()).unwrap();
        assert!(s3.cocommutativity_residual() > 0.5);
    }

    #[test]
    fn broken_multiplication_is_reported() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let mut mult = b.raw_mult().to_vec();
        mult[0] = c(2.0); // δ_0 δ_0 = 2 δ_0
        let bad = BialgebraDescriptor::from_parts(
            2,
            b.labels().to_vec(),
            mult,
            b.unit_coeffs().to_vec(),
            b.invol_matrix().clone(),
            b.raw_coproduct().to_vec(),
            b.counit_coeffs().to_vec(),
            b.rep_blocks().to_vec(),
        )
        .unwrap();
        let rep = validate(&bad);
        assert!(!rep.pass);
        assert!(rep.residual("unit").unwrap() > 0.5);
        assert!(rep.residual("rep_multiplicative").unwrap() > 0.5);
    }
}
