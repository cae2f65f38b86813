//! Generating functionals and ε-structure maps.
//!
//! A real, conditionally positive functional `γ` with `γ(1) = 0` yields,
//! through a GNS quotient of the form
//! `q(a, b) = γ(a*b) − γ(a)*ε(b) − ε(a)*γ(b)`, a Schürmann triple
//! `(π, δ, γ)` on a finite noise space `k`. The triple assembles into the
//! structure map `[[γ, δ†], [δ, π − ε·I]]` on `ℂ ⊕ k`.

use serde::Serialize;

use crate::bialgebra::{BialgebraDescriptor, Element, Functional};
use crate::json::{dvec_to_json, mat_to_json, vec_to_json, Cx};
use crate::kernel::{delta_qs, KernelMap};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::{Error, Result, C64, DEFAULT_TOL};

/// Default relative eigenvalue cut for the rank of the GNS Gram matrix.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relation residual beyond which the GNS representation is rejected.
const PI_TOL: f64 = 1e-8;

/// Number of real grid points per axis in the witness-free ζ search.
const ZETA_GRID: usize = 81;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratingReport {
    /// `max_i |γ(e_i*) − conj γ(e_i)|`.
    pub reality: f64,
    /// Smallest eigenvalue of `γ(a*b)` on `Ker ε`.
    pub cond_pos_min_eig: f64,
    /// `γ(1)`.
    #[serde(serialize_with = "ser_c64")]
    pub unit_value: C64,
    pub tol: f64,
    pub pass: bool,
}

fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&Cx(*z), s)
}

pub fn check_generating(b: &BialgebraDescriptor, gamma: &Functional) -> GeneratingReport {
    check_generating_with_tol(b, gamma, DEFAULT_TOL)
}

pub fn check_generating_with_tol(
    b: &BialgebraDescriptor,
    gamma: &Functional,
    tol: f64,
) -> GeneratingReport {
    let d = b.dim();
    let reality = (0..d)
        .map(|i| (gamma.eval(&b.star(&b.basis(i))) - gamma.coeffs[i].conj()).norm())
        .fold(0.0, f64::max);
    let eps_row = CMatrix::from_row_slice(1, d, b.counit_coeffs());
    let kernel = linalg::null_space(&eps_row, 1e-12);
    let gram = b.gram(gamma);
    let restricted = kernel.adjoint() * gram * &kernel;
    let cond_pos_min_eig = if restricted.nrows() == 0 { 0.0 } else { linalg::min_eigenvalue(&restricted) };
    let unit_value = gamma.eval(&b.one());
    let pass = reality <= tol && cond_pos_min_eig >= -tol && unit_value.norm() <= tol;
    GeneratingReport { reality, cond_pos_min_eig, unit_value, tol, pass }
}

/// `(k, π, δ, γ, ξ)` together with the Gram matrix it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurmannTriple {
    pub noise_dim: usize,
    /// `π(e_i)` on `k`.
    pub pi: Vec<CMatrix>,
    /// `δ(e_i) ∈ k`.
    pub delta: Vec<CVector>,
    pub gamma: Functional,
    /// Implementing vector with `δ = ν(·)ξ`, `γ = ⟨ξ, ν(·)ξ⟩`, when found.
    pub xi: Option<CVector>,
    /// `Q_ij = γ(e_i* e_j) − γ(e_i)* ε(e_j) − ε(e_i)* γ(e_j)`.
    pub gram: CMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct TripleFile {
    pub noise_dim: usize,
    pub pi: Vec<Vec<Vec<Cx>>>,
    pub delta: Vec<Vec<Cx>>,
    pub gamma: Vec<Cx>,
    pub xi: Option<Vec<Cx>>,
    pub gram: Vec<Vec<Cx>>,
}

impl SchurmannTriple {
    pub fn pi_of(&self, a: &Element) -> CMatrix {
        let k = self.noise_dim;
        a.coeffs.iter().zip(&self.pi).fold(CMatrix::zeros(k, k), |acc, (z, m)| acc + m * *z)
    }

    pub fn delta_of(&self, a: &Element) -> CVector {
        a.coeffs
            .iter()
            .zip(&self.delta)
            .fold(CVector::zeros(self.noise_dim), |acc, (z, v)| acc + v * *z)
    }

    /// `ν(e_i) = π(e_i) − ε(e_i) I`.
    pub fn nu(&self, b: &BialgebraDescriptor) -> Vec<CMatrix> {
        nu_from_pi(b, &self.pi)
    }

    /// Largest violation of `π` being a *-homomorphism.
    pub fn pi_residual(&self, b: &BialgebraDescriptor) -> f64 {
        rep_residual(b, &self.pi)
    }

    /// `δ(ab) = π(a)δ(b) + δ(a)ε(b)` over basis pairs.
    pub fn cocycle_residual(&self, b: &BialgebraDescriptor) -> f64 {
        let d = b.dim();
        let eps = b.counit_coeffs();
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let lhs = self.delta_of(&b.mul(&b.basis(i), &b.basis(j)));
                let rhs = &self.pi[i] * &self.delta[j] + &self.delta[i] * eps[j];
                r = r.max(linalg::max_abs(&(lhs - rhs)));
            }
        }
        r
    }

    /// `δ(a)*δ(b) = q(a, b)` over basis pairs.
    pub fn inner_product_residual(&self, b: &BialgebraDescriptor) -> f64 {
        let d = b.dim();
        let q = gns_gram(b, &self.gamma);
        let mut r: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                r = r.max((self.delta[i].dotc(&self.delta[j]) - q[(i, j)]).norm());
            }
        }
        r
    }

    /// Residual of `γ = ⟨ξ, ν(·)ξ⟩` and `δ = ν(·)ξ`, when ξ is set.
    pub fn implementing_residual(&self, b: &BialgebraDescriptor) -> Option<f64> {
        let xi = self.xi.as_ref()?;
        Some(implementing_residual(&self.nu(b), xi, &self.delta, &self.gamma))
    }

    pub fn to_file(&self) -> TripleFile {
        TripleFile {
            noise_dim: self.noise_dim,
            pi: self.pi.iter().map(mat_to_json).collect(),
            delta: self.delta.iter().map(dvec_to_json).collect(),
            gamma: vec_to_json(&self.gamma.coeffs),
            xi: self.xi.as_ref().map(dvec_to_json),
            gram: mat_to_json(&self.gram),
        }
    }
}

fn nu_from_pi(b: &BialgebraDescriptor, pi: &[CMatrix]) -> Vec<CMatrix> {
    let k = pi.first().map_or(0, CMatrix::nrows);
    pi.iter()
        .zip(b.counit_coeffs())
        .map(|(p, e)| p - linalg::identity(k) * *e)
        .collect()
}

fn rep_residual(b: &BialgebraDescriptor, pi: &[CMatrix]) -> f64 {
    let d = b.dim();
    let k = pi.first().map_or(0, CMatrix::nrows);
    let apply = |a: &Element| {
        a.coeffs.iter().zip(pi).fold(CMatrix::zeros(k, k), |acc, (z, m)| acc + m * *z)
    };
    let mut r: f64 = 0.0;
    for i in 0..d {
        let ei = b.basis(i);
        r = r.max(linalg::max_abs(&(apply(&b.star(&ei)) - pi[i].adjoint())));
        for j in 0..d {
            let lhs = apply(&b.mul(&ei, &b.basis(j)));
            r = r.max(linalg::max_abs(&(lhs - &pi[i] * &pi[j])));
        }
    }
    r
}

fn implementing_residual(nu: &[CMatrix], xi: &CVector, delta: &[CVector], gamma: &Functional) -> f64 {
    nu.iter()
        .zip(delta)
        .zip(&gamma.coeffs)
        .map(|((n, dl), g)| {
            let nx = n * xi;
            linalg::max_abs(&(&nx - dl)).max((xi.dotc(&nx) - g).norm())
        })
        .fold(0.0, f64::max)
}

/// `Q_ij = γ(e_i* e_j) − conj γ(e_i) ε(e_j) − conj ε(e_i) γ(e_j)`.
pub fn gns_gram(b: &BialgebraDescriptor, gamma: &Functional) -> CMatrix {
    let d = b.dim();
    let g = b.gram(gamma);
    let eps = b.counit_coeffs();
    CMatrix::from_fn(d, d, |i, j| {
        g[(i, j)] - gamma.coeffs[i].conj() * eps[j] - eps[i].conj() * gamma.coeffs[j]
    })
}

/// GNS construction of the Schürmann triple of a generating functional.
pub fn gns_triple(b: &BialgebraDescriptor, gamma: &Functional, tol: f64) -> Result<SchurmannTriple> {
    let report = check_generating_with_tol(b, gamma, tol.max(DEFAULT_TOL));
    if !report.pass {
        return Err(Error::NotGenerating(format!(
            "reality {:e}, conditional positivity {:e}, γ(1) = {}",
            report.reality, report.cond_pos_min_eig, report.unit_value
        )));
    }
    let d = b.dim();
    let q = gns_gram(b, gamma);
    let (values, vectors) = linalg::hermitian_eigen(&q);
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    let kept: Vec<usize> = (0..d).filter(|&k| top > 0.0 && values[k] > tol * top).collect();
    let r = kept.len();

    // Column j of `frame` is d(e_j).
    let frame = CMatrix::from_fn(r, d, |row, j| {
        let k = kept[row];
        vectors[(j, k)].conj() * values[k].sqrt()
    });
    let frame_pinv = linalg::pinv(&frame, 1e-12);
    let eps = b.counit_coeffs();

    let mut pi = Vec::with_capacity(d);
    let mut worst: f64 = 0.0;
    for i in 0..d {
        let ei = b.basis(i);
        let target = CMatrix::from_fn(r, d, |row, j| {
            let prod = b.mul(&ei, &b.basis(j));
            let dprod: C64 = prod.coeffs.iter().enumerate().map(|(m, z)| frame[(row, m)] * z).sum();
            dprod - eps[j] * frame[(row, i)]
        });
        let p = &target * &frame_pinv;
        worst = worst.max(linalg::max_abs(&(&p * &frame - &target)));
        pi.push(p);
    }
    let scale = linalg::max_abs(&frame).max(1.0);
    if worst > PI_TOL * scale {
        return Err(Error::InconsistentPi { residual: worst });
    }

    let mut delta: Vec<CVector> = (0..d).map(|j| frame.column(j).into_owned()).collect();
    let nu = nu_from_pi(b, &pi);
    let xi = solve_xi(&nu, &delta).and_then(|xi| {
        let res = implementing_residual(&nu, &xi, &delta, gamma);
        (res <= 10.0 * tol.max(DEFAULT_TOL) * scale).then_some(xi)
    });
    let xi = xi.map(|xi| {
        let phase = linalg::first_nonzero_phase(&xi, 1e-12);
        for dl in &mut delta {
            *dl *= phase;
        }
        xi * phase
    });

    Ok(SchurmannTriple { noise_dim: r, pi, delta, gamma: gamma.clone(), xi, gram: q })
}

/// Least-squares solution of `ν(e_i) ξ = δ(e_i)` stacked over `i`.
fn solve_xi(nu: &[CMatrix], delta: &[CVector]) -> Option<CVector> {
    let k = nu.first().map_or(0, CMatrix::nrows);
    if k == 0 {
        return Some(CVector::zeros(0));
    }
    let d = nu.len();
    let mut stacked = CMatrix::zeros(d * k, k);
    let mut rhs = CVector::zeros(d * k);
    for i in 0..d {
        stacked.view_mut((i * k, 0), (k, k)).copy_from(&nu[i]);
        rhs.rows_mut(i * k, k).copy_from(&delta[i]);
    }
    Some(linalg::pinv(&stacked, 1e-12) * rhs)
}

/// Block structure map `[[γ, δ†], [δ, π − ε·I]]`. With ξ set, the blocks are
/// `γ = ⟨ξ|ν|ξ⟩`, `δ = ν|ξ⟩`, `δ† = ⟨ξ|ν`; otherwise the raw δ columns are
/// used with `δ†(a) = δ(a*)*`.
pub fn assemble_structure_map(b: &BialgebraDescriptor, triple: &SchurmannTriple) -> Result<KernelMap> {
    let nu = triple.nu(b);
    let d = b.dim();
    match &triple.xi {
        Some(xi) => Ok(implemented_map(&nu, xi)),
        None => {
            let invol = b.invol_matrix();
            let delta_dagger: Vec<CVector> = (0..d)
                .map(|i| {
                    (0..d).fold(CVector::zeros(triple.noise_dim), |acc, k| {
                        acc + triple.delta[k].map(|z| z.conj()) * invol[(i, k)].conj()
                    })
                })
                .collect();
            KernelMap::from_parts(&triple.gamma, &triple.delta, &delta_dagger, &nu)
        }
    }
}

/// `[⟨ξ|; I] ν(·) [|ξ⟩ I]`.
pub fn implemented_map(nu: &[CMatrix], xi: &CVector) -> KernelMap {
    let k = xi.len();
    let mut frame = CMatrix::zeros(k, k + 1);
    frame.set_column(0, xi);
    frame.view_mut((0, 1), (k, k)).copy_from(&linalg::identity(k));
    KernelMap::new(nu.iter().map(|n| frame.adjoint() * n * &frame).collect())
        .expect("blocks share the target dimension")
}

/// Largest violation over basis pairs of
/// `φ(a*b) = φ(a)*χ(b) + χ(a)*φ(b) + φ(a)* Δ^QS φ(b)`.
pub fn verify_structure_relation(b: &BialgebraDescriptor, phi: &KernelMap, chi: &Functional) -> Result<f64> {
    let residual = b.character_residual(chi);
    if residual > DEFAULT_TOL {
        return Err(Error::NotCharacter { residual });
    }
    Ok(structure_residual(b, phi, chi))
}

fn structure_residual(b: &BialgebraDescriptor, phi: &KernelMap, chi: &Functional) -> f64 {
    let d = b.dim();
    let dq = delta_qs(phi.noise_dim());
    let mut r: f64 = 0.0;
    for i in 0..d {
        let pa = phi.block(i).adjoint();
        for j in 0..d {
            let pb = phi.block(j);
            let lhs = phi.eval(&b.star_mul_basis(i, j));
            let rhs = &pa * chi.coeffs[j] + pb * chi.coeffs[i].conj() + &pa * &dq * pb;
            r = r.max(linalg::max_abs(&(lhs - rhs)));
        }
    }
    r
}

/// `(π, ξ)` read off from a structure map.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplementingPair {
    pub pi: Vec<CMatrix>,
    pub xi: CVector,
    /// Covers both `ν(e_i)ξ = δ(e_i)` and `γ = ⟨ξ, ν(·)ξ⟩`.
    pub residual: f64,
    /// Largest violation of `π` being a *-homomorphism.
    pub pi_residual: f64,
    /// Structure-relation residual of the input with `χ = ε`.
    pub structure_residual: f64,
}

pub fn extract_implementing_pair(b: &BialgebraDescriptor, phi: &KernelMap) -> ImplementingPair {
    let d = b.dim();
    let k = phi.noise_dim();
    let eps = b.counit_coeffs();
    let nu: Vec<CMatrix> = (0..d).map(|i| phi.nu(i)).collect();
    let pi: Vec<CMatrix> = nu.iter().zip(eps).map(|(n, e)| n + linalg::identity(k) * *e).collect();
    let delta: Vec<CVector> = (0..d).map(|i| phi.delta(i)).collect();
    let xi = solve_xi(&nu, &delta).unwrap_or_else(|| CVector::zeros(k));
    let residual = implementing_residual(&nu, &xi, &delta, &phi.gamma());
    ImplementingPair {
        pi_residual: rep_residual(b, &pi),
        structure_residual: structure_residual(b, phi, &b.counit()),
        pi,
        xi,
        residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorClass {
    StarHomomorphic,
    CpPreunital,
    CpContractive,
    Unclassified,
}

/// Optional certificates for the completely positive classes.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `φ = ψ − ε(·)(Δ^QS + |ζ⟩⟨e₀| + |e₀⟩⟨ζ|)` with ψ completely positive.
    Contractive { psi: KernelMap, zeta: CVector },
    /// `φ = [⟨ξ|; D*](ρ − ε·I)(·)[|ξ⟩ D]` with `D*D = I`.
    Preunital { rho: Vec<CMatrix>, isometry: CMatrix, xi: CVector },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub class: GeneratorClass,
    pub structure_residual: f64,
    /// How closely the witness (or search result) reproduces φ.
    pub decomposition_residual: Option<f64>,
    /// Smallest Choi eigenvalue of the completely positive part.
    pub choi_min_eig: Option<f64>,
    /// Largest eigenvalue of `φ(1)`.
    pub unit_max_eig: f64,
    /// `ζ` found by the search, when it was needed.
    pub zeta: Option<Vec<Cx>>,
}

/// `ψ = φ + ε(·)(Δ^QS + |ζ⟩⟨e₀| + |e₀⟩⟨ζ|)`.
fn contractive_part(b: &BialgebraDescriptor, phi: &KernelMap, zeta: &CVector) -> Result<KernelMap> {
    let n = phi.target_dim();
    let mut shift = delta_qs(n - 1);
    for r in 0..n {
        shift[(r, 0)] += zeta[r];
        shift[(0, r)] += zeta[r].conj();
    }
    let eps_part = KernelMap::functional_times_identity(&b.counit(), n)
        .map_blocks(|m| &shift * m[(0, 0)])?;
    phi.add(&eps_part)
}

pub fn classify_generator(
    b: &BialgebraDescriptor,
    phi: &KernelMap,
    witness: Option<&Witness>,
    tol: f64,
) -> Result<Classification> {
    let n = phi.target_dim();
    let structure_residual = structure_residual(b, phi, &b.counit());
    let unit_val = phi.eval(&b.one());
    let unit_max_eig = -linalg::min_eigenvalue(&(-&unit_val));
    let mut out = Classification {
        class: GeneratorClass::Unclassified,
        structure_residual,
        decomposition_residual: None,
        choi_min_eig: None,
        unit_max_eig,
        zeta: None,
    };
    if structure_residual <= tol {
        out.class = GeneratorClass::StarHomomorphic;
        return Ok(out);
    }
    match witness {
        Some(Witness::Preunital { rho, isometry, xi }) => {
            let big = isometry.nrows();
            if rho.len() != b.dim()
                || rho.iter().any(|m| m.shape() != (big, big))
                || isometry.ncols() != n - 1
                || xi.len() != big
            {
                return Err(Error::WitnessShape("preunital witness dimensions".into()));
            }
            let iso_res = linalg::max_abs(&(isometry.adjoint() * isometry - linalg::identity(n - 1)));
            let nu = nu_from_pi(b, rho);
            let mut frame = CMatrix::zeros(big, n);
            frame.set_column(0, xi);
            frame.view_mut((0, 1), (big, n - 1)).copy_from(isometry);
            let rebuilt = KernelMap::new(nu.iter().map(|m| frame.adjoint() * m * &frame).collect())?;
            let rep_res = rep_residual(b, rho);
            let res = phi.distance(&rebuilt)?;
            out.decomposition_residual = Some(res.max(iso_res).max(rep_res));
            if res <= tol && iso_res <= tol && rep_res <= tol {
                out.class = GeneratorClass::CpPreunital;
            }
        }
        Some(Witness::Contractive { psi, zeta }) => {
            if psi.target_dim() != n || psi.dim() != b.dim() || zeta.len() != n {
                return Err(Error::WitnessShape("contractive witness dimensions".into()));
            }
            let res = contractive_part(b, phi, zeta)?.distance(psi)?;
            let choi = psi.choi_min_eigenvalue(b);
            out.decomposition_residual = Some(res);
            out.choi_min_eig = Some(choi);
            if res <= tol && choi >= -tol && unit_max_eig <= tol {
                out.class = GeneratorClass::CpContractive;
            }
        }
        None => {
            if let Some((zeta, choi)) = search_zeta(b, phi) {
                out.choi_min_eig = Some(choi);
                out.decomposition_residual = Some(0.0);
                if choi >= -tol && unit_max_eig <= tol {
                    out.class = GeneratorClass::CpContractive;
                    out.zeta = Some(dvec_to_json(&zeta));
                }
            }
        }
    }
    Ok(out)
}

/// Grid search for ζ making `φ + ε(·)(Δ^QS + |ζ⟩⟨e₀| + |e₀⟩⟨ζ|)` completely
/// positive. The k-part of ζ cancels the off-diagonal column of `φ(1)`; the
/// e₀-part `s` is scanned over a real grid, then over a complex one if the
/// real scan fails. Returns the best ζ and its Choi minimum eigenvalue.
fn search_zeta(b: &BialgebraDescriptor, phi: &KernelMap) -> Option<(CVector, f64)> {
    let n = phi.target_dim();
    let unit_val = phi.eval(&b.one());
    let mut base = CVector::zeros(n);
    for r in 1..n {
        base[r] = -unit_val[(r, 0)];
    }
    let scale = phi.max_abs().max(1.0);
    let grid: Vec<f64> = (0..ZETA_GRID)
        .map(|i| scale * (2.0 * i as f64 / (ZETA_GRID - 1) as f64 - 1.0) * 2.0)
        .collect();
    let eval = |s: C64| {
        let mut zeta = base.clone();
        zeta[0] = s;
        let choi = contractive_part(b, phi, &zeta).ok()?.choi_min_eigenvalue(b);
        Some((zeta, choi))
    };
    let best = |cands: Vec<(CVector, f64)>| {
        cands.into_iter().fold(None, |acc: Option<(CVector, f64)>, cand| match acc {
            Some(a) if a.1 >= cand.1 => Some(a),
            _ => Some(cand),
        })
    };
    let real = best(grid.iter().filter_map(|&s| eval(c(s))).collect())?;
    if real.1 >= -DEFAULT_TOL {
        return Some(real);
    }
    let complex = best(
        grid.iter()
            .flat_map(|&re| grid.iter().map(move |&im| C64::new(re, im)))
            .filter_map(eval)
            .collect(),
    )?;
    Some(if complex.1 > real.1 { complex } else { real })
}
