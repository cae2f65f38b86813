//! Repeated-interaction quantum random walks.
//!
//! For a representation `π` on `h̄`, a vector `ξ ∈ h̄` and a step `h` with
//! `h‖ξ‖² ≤ 1`, the interaction unitary is
//! `U = [[c, −√h⟨ξ|], [√h|ξ⟩, cQ + Q⊥]]` with `c = √(1 − h‖ξ‖²)` and `Q`
//! the projection onto `ℂξ`. The one-step walk map is
//! `ψ(a) = V*(ε(a) ⊕ π(a))V` with `V = U(1 ⊕ D)`.

use serde::Serialize;

use crate::bialgebra::{BialgebraDescriptor, Element, Functional};
use crate::cocycle::{self, CocycleSpec, StepFunction};
use crate::convolution::convolve;
use crate::kernel::{hat, vacuum, KernelMap};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::{Error, Result, C64};

const ISOMETRY_TOL: f64 = 1e-12;
const STAR_HOM_TOL: f64 = 1e-10;

fn coefficient(xi: &CVector, h: f64) -> Result<f64> {
    let value = h * xi.norm_squared();
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("step must be positive, got {h}")));
    }
    if value > 1.0 + 1e-15 {
        return Err(Error::StepTooLarge { value });
    }
    Ok((1.0 - value).max(0.0).sqrt())
}

/// Interaction unitary on `ℂ ⊕ h̄`.
pub fn build_walk_unitary(xi: &CVector, h: f64) -> Result<CMatrix> {
    let n = xi.len();
    let cos = coefficient(xi, h)?;
    let norm2 = xi.norm_squared();
    let q = if norm2 > 0.0 { xi * xi.adjoint() / c(norm2) } else { CMatrix::zeros(n, n) };
    let s = xi * c(h.sqrt());
    let mut u = CMatrix::zeros(n + 1, n + 1);
    u[(0, 0)] = c(cos);
    u.view_mut((1, 0), (n, 1)).copy_from(&s);
    u.view_mut((0, 1), (1, n)).copy_from(&(-s.adjoint()));
    let corner = &q * c(cos) + (linalg::identity(n) - &q);
    u.view_mut((1, 1), (n, n)).copy_from(&corner);
    Ok(u)
}

/// `V = U(1 ⊕ D)` for an isometry `D: k → h̄`.
pub fn build_walk_isometry(xi: &CVector, d: &CMatrix, h: f64) -> Result<CMatrix> {
    if d.nrows() != xi.len() {
        return Err(Error::Shape(format!("D maps into dimension {}, ξ has {}", d.nrows(), xi.len())));
    }
    let residual = linalg::max_abs(&(d.adjoint() * d - linalg::identity(d.ncols())));
    if residual > ISOMETRY_TOL {
        return Err(Error::NotIsometry { residual });
    }
    Ok(build_walk_unitary(xi, h)? * linalg::direct_sum(&linalg::identity(1), d))
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let id = linalg::identity(n);
    linalg::max_abs(&(u.adjoint() * u - &id)).max(linalg::max_abs(&(u * u.adjoint() - id)))
}

/// Data of one walk step.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkScheme {
    pub h: f64,
    /// `U` when `D = I`, `V = U(1 ⊕ D)` otherwise.
    pub v: CMatrix,
    pub psi: KernelMap,
    pub pi: Vec<CMatrix>,
    pub xi: CVector,
    pub d: Option<CMatrix>,
}

impl WalkScheme {
    /// `c = √(1 − h‖ξ‖²)`.
    pub fn cos(&self) -> f64 {
        (1.0 - self.h * self.xi.norm_squared()).max(0.0).sqrt()
    }

    /// `ω_{e₀}∘ψ`.
    pub fn vacuum_functional(&self) -> Functional {
        let e0 = vacuum(self.psi.noise_dim());
        self.psi.matrix_element(&e0, &e0)
    }
}

/// `ψ(e_i) = V*(ε(e_i) ⊕ π(e_i))V`.
pub fn walk_map(
    b: &BialgebraDescriptor,
    pi: &[CMatrix],
    xi: &CVector,
    d: Option<&CMatrix>,
    h: f64,
) -> Result<WalkScheme> {
    let n = xi.len();
    if pi.len() != b.dim() || pi.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::Shape(format!("π must give {} matrices of size {n}", b.dim())));
    }
    let residual = star_hom_residual(b, pi);
    if residual > STAR_HOM_TOL {
        return Err(Error::NotStarHomomorphic { residual });
    }
    let v = match d {
        Some(d) => build_walk_isometry(xi, d, h)?,
        None => build_walk_unitary(xi, h)?,
    };
    let blocks = pi
        .iter()
        .zip(b.counit_coeffs())
        .map(|(p, e)| {
            let mut m = linalg::direct_sum(&CMatrix::zeros(1, 1), p);
            m[(0, 0)] = *e;
            v.adjoint() * m * &v
        })
        .collect();
    Ok(WalkScheme {
        h,
        psi: KernelMap::new(blocks)?,
        v,
        pi: pi.to_vec(),
        xi: xi.clone(),
        d: d.cloned(),
    })
}

fn star_hom_residual(b: &BialgebraDescriptor, pi: &[CMatrix]) -> f64 {
    let n = pi.first().map_or(0, CMatrix::nrows);
    let apply = |a: &Element| {
        a.coeffs.iter().zip(pi).fold(CMatrix::zeros(n, n), |acc, (z, m)| acc + m * *z)
    };
    let mut r: f64 = 0.0;
    for i in 0..b.dim() {
        let ei = b.basis(i);
        r = r.max(linalg::max_abs(&(apply(&b.star(&ei)) - pi[i].adjoint())));
        for j in 0..b.dim() {
            r = r.max(linalg::max_abs(&(apply(&b.mul(&ei, &b.basis(j))) - &pi[i] * &pi[j])));
        }
    }
    r
}

/// `Σ_h(X) = S X S` with `S = diag(h^{-1/2}, I)`.
pub fn sigma_h(x: &CMatrix, h: f64) -> CMatrix {
    let mut out = x.clone();
    let s = 1.0 / h.sqrt();
    for j in 0..out.ncols() {
        out[(0, j)] *= s;
    }
    for i in 0..out.nrows() {
        out[(i, 0)] *= s;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferenceReport {
    pub h: f64,
    /// `max ‖LHS − RHS‖` over the basis.
    pub residual: f64,
    /// `max ‖φ − Σ_h(ψ − ε·I)‖` over the basis.
    pub lhs_norm: f64,
}

/// Checks `φ − Σ_h(ψ − ε·I) = (h/(1+c))φ₁ − (h²/(1+c)²)φ₂` with
/// `φ₁ = [[0, γ⟨ξ|], [γ|ξ⟩, Xν + νX]]`, `φ₂ = γ·diag(0, X)`, `X = |ξ⟩⟨ξ|`.
pub fn scaled_difference_identity(
    b: &BialgebraDescriptor,
    phi: &KernelMap,
    pi: &[CMatrix],
    xi: &CVector,
    h: f64,
) -> Result<DifferenceReport> {
    let k = xi.len();
    if phi.noise_dim() != k || phi.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "φ acts on ℂ⊕ℂ^{}, ξ lives in ℂ^{k}",
            phi.noise_dim()
        )));
    }
    let scheme = walk_map(b, pi, xi, None, h)?;
    let cos = scheme.cos();
    let a1 = h / (1.0 + cos);
    let a2 = a1 * a1;
    let x = xi * xi.adjoint();
    let eps = b.counit_coeffs();
    let (mut residual, mut lhs_norm) = (0.0f64, 0.0f64);
    for i in 0..b.dim() {
        let shifted = scheme.psi.block(i) - linalg::identity(k + 1) * eps[i];
        let lhs = phi.block(i) - sigma_h(&shifted, h);
        let gamma = phi.block(i)[(0, 0)];
        let nu = &pi[i] - linalg::identity(k) * eps[i];
        let mut phi1 = CMatrix::zeros(k + 1, k + 1);
        phi1.view_mut((1, 0), (k, 1)).copy_from(&(xi * gamma));
        phi1.view_mut((0, 1), (1, k)).copy_from(&(xi.adjoint() * gamma));
        phi1.view_mut((1, 1), (k, k)).copy_from(&(&x * &nu + &nu * &x));
        let phi2 = linalg::direct_sum(&CMatrix::zeros(1, 1), &(&x * gamma));
        let rhs = phi1 * c(a1) - phi2 * c(a2);
        lhs_norm = lhs_norm.max(linalg::max_abs(&lhs));
        residual = residual.max(linalg::max_abs(&(lhs - rhs)));
    }
    Ok(DifferenceReport { h, residual, lhs_norm })
}

/// `q_j = ⟨v_j, ψ(·) u_j⟩` for `j = 1..n`, where `u_j = (1, h^{-1/2}∫_{I_j} g)`
/// on `I_j = [(j−1)h, jh[` and likewise `v_j` for `f`.
pub fn step_functionals(psi: &KernelMap, h: f64, n: usize, f: &StepFunction, g: &StepFunction) -> Vec<Functional> {
    let scale = c(1.0 / h.sqrt());
    (0..n)
        .map(|j| {
            let (lo, hi) = (j as f64 * h, (j + 1) as f64 * h);
            let v = hat(&(f.integral(lo, hi) * scale));
            let u = hat(&(g.integral(lo, hi) * scale));
            psi.matrix_element(&v, &u)
        })
        .collect()
}

fn check_walk_inputs(psi: &KernelMap, f: &StepFunction, g: &StepFunction) -> Result<()> {
    if f.noise_dim() != psi.noise_dim() || g.noise_dim() != psi.noise_dim() {
        return Err(Error::Shape(format!(
            "step functions have dimensions {} and {}, walk noise space has {}",
            f.noise_dim(),
            g.noise_dim(),
            psi.noise_dim()
        )));
    }
    Ok(())
}

/// `⟨ε(f), I_n(ψ_n(b)) ε(g)⟩ = (q₁ ⋆ ⋯ ⋆ qₙ)(b)·exp⟨f, g⟩_{L²[nh, T_max]}`.
#[allow(clippy::too_many_arguments)]
pub fn walk_matrix_element(
    b: &BialgebraDescriptor,
    psi: &KernelMap,
    h: f64,
    n: usize,
    f: &StepFunction,
    g: &StepFunction,
    elem: &Element,
    t_max: Option<f64>,
) -> Result<C64> {
    check_walk_inputs(psi, f, g)?;
    let t = n as f64 * h;
    let horizon = cocycle::resolve_horizon(&[f, g], t, t_max)?;
    let lambda = step_functionals(psi, h, n, f, g)
        .iter()
        .fold(b.counit(), |acc, q| convolve(b, &acc, q));
    Ok(lambda.eval(elem) * cocycle::inner_product(f, g, t, horizon).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub err: f64,
    /// `err(h)/err(previous h)`; absent on the first row or after a zero error.
    pub ratio: Option<f64>,
}

/// Source data of the walk compared against a cocycle.
#[derive(Debug, Clone, Copy)]
pub struct WalkSource<'a> {
    pub pi: &'a [CMatrix],
    pub xi: &'a CVector,
    pub d: Option<&'a CMatrix>,
}

/// For each `h`, the largest deviation between walk and cocycle matrix
/// elements over grid times `t = nh ≤ T` and the given elements. The norm is a
/// supremum over this finite witness family.
#[allow(clippy::too_many_arguments)]
pub fn convergence_table(
    spec: &CocycleSpec,
    source: WalkSource<'_>,
    t_final: f64,
    f: &StepFunction,
    g: &StepFunction,
    elements: &[Element],
    h_grid: &[f64],
    t_max: Option<f64>,
) -> Result<Vec<ConvergenceRow>> {
    let b = &spec.algebra;
    let horizon = cocycle::resolve_horizon(&[f, g], t_final, t_max)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let scheme = walk_map(b, source.pi, source.xi, source.d, h)?;
        check_walk_inputs(&scheme.psi, f, g)?;
        let steps = (t_final / h + 1e-9).floor() as usize;
        let qs = step_functionals(&scheme.psi, h, steps, f, g);
        let mut walk = b.counit();
        let mut err: f64 = 0.0;
        for n in 0..=steps {
            if n > 0 {
                walk = convolve(b, &walk, &qs[n - 1]);
            }
            let t = n as f64 * h;
            let walk_tail = cocycle::inner_product(f, g, t, horizon).exp();
            let exact = cocycle::form_solution(spec, f, g, t)?;
            let exact_tail = cocycle::inner_product(f, g, 0.0, horizon).exp();
            for elem in elements {
                let dev = walk.eval(elem) * walk_tail - exact.eval(elem) * exact_tail;
                err = err.max(dev.norm());
            }
        }
        let ratio = rows.last().and_then(|prev| (prev.err > 0.0).then(|| err / prev.err));
        rows.push(ConvergenceRow { h, err, ratio });
    }
    Ok(rows)
}
