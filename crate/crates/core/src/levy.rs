//! Discrete Fock-space Lévy processes, the weak-process axiom suite,
//! convolution semigroups of states and the classical F(G) comparison.

use std::sync::OnceLock;

use serde::Serialize;

use crate::bialgebra::{function_algebra, BialgebraDescriptor, Element, Functional, GroupTable};
use crate::convolution::{conv_exp, convolve, convolve_kernel_with_budget, ExpAlgorithm, DEFAULT_KERNEL_BUDGET};
use crate::json::{vec_to_json, Cx};
use crate::kernel::KernelMap;
use crate::linalg::{self, c, CMatrix};
use crate::schurmann::check_generating_with_tol;
use crate::{Error, Result};

/// Default cap on `(1 + dim k)^N`.
pub const DEFAULT_BUDGET: usize = 4096;

const STAR_HOM_TOL: f64 = 1e-10;

/// Axiom tolerance of [`verify_wqlp_axioms`].
pub const AXIOM_TOL: f64 = 1e-10;

/// Process on `k̂^{⊗N}` whose increment over steps `[m, n[` is
/// `I^{⊗m} ⊗ ψ_{n−m} ⊗ I^{⊗(N−n)}`, with `ψ_r` the r-fold kernel convolution
/// of a *-homomorphic one-step map.
#[derive(Debug)]
pub struct DiscreteLevyProcess {
    algebra: BialgebraDescriptor,
    psi: KernelMap,
    steps: usize,
    powers: Vec<OnceLock<KernelMap>>,
}

impl DiscreteLevyProcess {
    pub fn new(algebra: BialgebraDescriptor, psi: KernelMap, steps: usize) -> Result<Self> {
        Self::with_budget(algebra, psi, steps, DEFAULT_BUDGET)
    }

    pub fn with_budget(algebra: BialgebraDescriptor, psi: KernelMap, steps: usize, budget: usize) -> Result<Self> {
        if psi.dim() != algebra.dim() {
            return Err(Error::Shape(format!("ψ has {} blocks, algebra dimension {}", psi.dim(), algebra.dim())));
        }
        let residual = psi.star_hom_residual(&algebra);
        if residual > STAR_HOM_TOL {
            return Err(Error::NotStarHomomorphic { residual });
        }
        let required = u32::try_from(steps)
            .ok()
            .and_then(|n| psi.target_dim().checked_pow(n))
            .unwrap_or(usize::MAX);
        if required > budget {
            return Err(Error::Budget { required, budget });
        }
        Ok(Self { algebra, psi, steps, powers: (0..=steps).map(|_| OnceLock::new()).collect() })
    }

    pub fn psi(&self) -> &KernelMap {
        &self.psi
    }

    /// `ψ_r`, with `ψ_0 = ε` on `ℂ`.
    pub fn power(&self, r: usize) -> &KernelMap {
        self.powers[r].get_or_init(|| {
            if r == 0 {
                KernelMap::functional_times_identity(&self.algebra.counit(), 1)
            } else {
                convolve_kernel_with_budget(&self.algebra, self.power(r - 1), &self.psi, DEFAULT_KERNEL_BUDGET)
                    .expect("within the tensor budget checked at construction")
            }
        })
    }
}

/// Increments `J_{m,n}(b)` of a process on a finite tensor product with
/// vacuum at index 0.
pub trait Increments {
    fn algebra(&self) -> &BialgebraDescriptor;
    fn steps(&self) -> usize;
    fn increment(&self, m: usize, n: usize, b: &Element) -> Result<CMatrix>;
}

impl Increments for DiscreteLevyProcess {
    fn algebra(&self) -> &BialgebraDescriptor {
        &self.algebra
    }

    fn steps(&self) -> usize {
        self.steps
    }

    fn increment(&self, m: usize, n: usize, b: &Element) -> Result<CMatrix> {
        discrete_increment(self, m, n, b)
    }
}

/// `J_{m,n}(b) = I^{⊗m} ⊗ ψ_{n−m}(b) ⊗ I^{⊗(N−n)}`.
pub fn discrete_increment(p: &DiscreteLevyProcess, m: usize, n: usize, b: &Element) -> Result<CMatrix> {
    if m > n || n > p.steps {
        return Err(Error::Precondition(format!("need 0 ≤ m ≤ n ≤ {}, got m = {m}, n = {n}", p.steps)));
    }
    let leg = p.psi.target_dim();
    Ok(linalg::embed(&p.power(n - m).eval(b), leg.pow(m as u32), leg.pow((p.steps - n) as u32)))
}

/// `λ_{m,n} = ⟨Ω, J_{m,n}(·) Ω⟩`.
pub fn vacuum_functional<P: Increments + ?Sized>(p: &P, m: usize, n: usize) -> Result<Functional> {
    let b = p.algebra();
    (0..b.dim())
        .map(|i| p.increment(m, n, &b.basis(i)).map(|x| x[(0, 0)]))
        .collect::<Result<Vec<_>>>()
        .map(Functional::new)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    /// `λ_{r,t} = λ_{r,s} ⋆ λ_{s,t}`.
    pub chain: f64,
    /// `λ_{t,t} = ε`.
    pub diagonal: f64,
    /// `λ_{s,t} = λ_{0,t−s}`.
    pub stationarity: f64,
    /// Vacuum factorization over disjoint intervals.
    pub independence: f64,
    /// `‖λ_{0,1} − ε‖`, informational.
    pub one_step_distance: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_wqlp_axioms<P: Increments + ?Sized>(p: &P) -> Result<AxiomReport> {
    verify_wqlp_axioms_with_tol(p, AXIOM_TOL)
}

pub fn verify_wqlp_axioms_with_tol<P: Increments + ?Sized>(p: &P, tol: f64) -> Result<AxiomReport> {
    let b = p.algebra();
    let n = p.steps();
    let eps = b.counit();
    let mut lambda = vec![vec![None; n + 1]; n + 1];
    for m in 0..=n {
        for k in m..=n {
            lambda[m][k] = Some(vacuum_functional(p, m, k)?);
        }
    }
    let lam = |m: usize, k: usize| lambda[m][k].as_ref().expect("filled for m ≤ k");

    let (mut chain, mut diagonal, mut stationarity, mut independence) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for r in 0..=n {
        diagonal = diagonal.max(lam(r, r).distance(&eps));
        for t in r..=n {
            stationarity = stationarity.max(lam(r, t).distance(lam(0, t - r)));
            for s in r..=t {
                chain = chain.max(lam(r, t).distance(&convolve(b, lam(r, s), lam(s, t))));
            }
        }
    }

    let intervals: Vec<(usize, usize)> = (0..n).flat_map(|m| (m + 1..=n).map(move |k| (m, k))).collect();
    let basis: Vec<Element> = (0..b.dim()).map(|i| b.basis(i)).collect();
    for &(m1, n1) in &intervals {
        for &(m2, n2) in &intervals {
            if n1 > m2 && n2 > m1 {
                continue;
            }
            for x1 in &basis {
                let j1 = p.increment(m1, n1, x1)?;
                let l1 = lam(m1, n1).eval(x1);
                for x2 in &basis {
                    let j2 = p.increment(m2, n2, x2)?;
                    let joint = (j1.row(0) * j2.column(0))[(0, 0)];
                    independence = independence.max((joint - l1 * lam(m2, n2).eval(x2)).norm());
                }
            }
        }
    }

    let one_step_distance = if n >= 1 { lam(0, 1).distance(&eps) } else { 0.0 };
    let pass = [chain, diagonal, stationarity, independence].iter().all(|r| *r <= tol);
    Ok(AxiomReport { chain, diagonal, stationarity, independence, one_step_distance, tol, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRow {
    pub t: f64,
    pub coeffs: Vec<Cx>,
    pub unit_residual: f64,
    pub gram_min_eig: f64,
    pub is_state: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatesReport {
    pub rows: Vec<StateRow>,
    /// `max ‖λ_{t_i} ⋆ λ_{t_{i+1}} − λ_{t_i + t_{i+1}}‖` over adjacent pairs.
    pub semigroup_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `λ_t = exp_⋆(tγ)` on a time grid, each certified as a state.
pub fn semigroup_of_states(b: &BialgebraDescriptor, gamma: &Functional, grid: &[f64], tol: f64) -> Result<StatesReport> {
    let gen = check_generating_with_tol(b, gamma, tol.max(crate::DEFAULT_TOL));
    if !gen.pass {
        return Err(Error::NotGenerating(format!(
            "reality {:e}, conditional positivity {:e}, γ(1) = {}",
            gen.reality, gen.cond_pos_min_eig, gen.unit_value
        )));
    }
    if let Some(t) = grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Precondition(format!("grid times must be nonnegative, got {t}")));
    }
    let states: Vec<Functional> = grid.iter().map(|&t| conv_exp(b, gamma, t, ExpAlgorithm::Rmap)).collect();
    let rows: Vec<StateRow> = grid
        .iter()
        .zip(&states)
        .map(|(&t, s)| {
            let rep = b.functional_is_state_with_tol(s, tol);
            StateRow {
                t,
                coeffs: vec_to_json(&s.coeffs),
                unit_residual: rep.unit_residual,
                gram_min_eig: rep.gram_min_eig,
                is_state: rep.is_state,
            }
        })
        .collect();
    let semigroup_residual = grid
        .windows(2)
        .zip(states.windows(2))
        .map(|(t, s)| convolve(b, &s[0], &s[1]).distance(&conv_exp(b, gamma, t[0] + t[1], ExpAlgorithm::Rmap)))
        .fold(0.0, f64::max);
    let pass = rows.iter().all(|r| r.is_state) && semigroup_residual <= tol;
    Ok(StatesReport { rows, semigroup_residual, tol, pass })
}

/// Centered difference `(λ_h − λ_{−h}) / 2h` of `t ↦ exp_⋆(tγ)` at 0.
pub fn semigroup_derivative_at_zero(b: &BialgebraDescriptor, gamma: &Functional, h: f64) -> Functional {
    let plus = conv_exp(b, gamma, h, ExpAlgorithm::Rmap);
    let minus = conv_exp(b, gamma, -h, ExpAlgorithm::Rmap);
    (&plus - &minus).scale(c(0.5 / h))
}

/// Rate matrix on `G` induced by `γ` on `F(G)`: `Q[x][xg] = γ(δ_g)` for
/// `g ≠ e`, rows summing to zero.
pub fn classical_rate_matrix(table: &GroupTable, gamma: &Functional) -> Result<CMatrix> {
    let data = crate::bialgebra::check_group_table(table)?;
    let n = table.order();
    let mut q = CMatrix::zeros(n, n);
    for x in 0..n {
        for g in (0..n).filter(|&g| g != data.identity) {
            let rate = gamma.coeffs[g];
            q[(x, table.op(x, g))] += rate;
            q[(x, x)] -= rate;
        }
    }
    Ok(q)
}

/// `max_{t,y} |λ_t(δ_y) − (e^{tQ})_{e,y}|` over the grid.
pub fn classical_oracle_compare(table: &GroupTable, gamma: &Functional, grid: &[f64]) -> Result<f64> {
    let b = function_algebra(table)?;
    let gen = check_generating_with_tol(&b, gamma, crate::DEFAULT_TOL);
    if !gen.pass {
        return Err(Error::NotGenerating(format!(
            "reality {:e}, conditional positivity {:e}",
            gen.reality, gen.cond_pos_min_eig
        )));
    }
    let identity = crate::bialgebra::check_group_table(table)?.identity;
    let q = classical_rate_matrix(table, gamma)?;
    let mut worst: f64 = 0.0;
    for &t in grid {
        let lambda = conv_exp(&b, gamma, t, ExpAlgorithm::Rmap);
        let markov = linalg::expm(&(&q * c(t)));
        for y in 0..b.dim() {
            worst = worst.max((lambda.coeffs[y] - markov[(identity, y)]).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::schurmann::gns_triple;
    use crate::walk::walk_map;

    fn two_point_process(h: f64, steps: usize) -> DiscreteLevyProcess {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let t = gns_triple(&b, &Functional::from_real(&[-1.0, 1.0]), 1e-10).unwrap();
        let s = walk_map(&b, &t.pi, t.xi.as_ref().unwrap(), None, h).unwrap();
        DiscreteLevyProcess::new(b, s.psi, steps).unwrap()
    }

    #[test]
    fn zero_length_increment_is_counit() {
        let p = two_point_process(0.25, 2);
        let j = discrete_increment(&p, 1, 1, &p.algebra().basis(0)).unwrap();
        assert_eq!(j, linalg::identity(4));
        assert_eq!(discrete_increment(&p, 1, 1, &p.algebra().basis(1)).unwrap(), CMatrix::zeros(4, 4));
    }

    #[test]
    fn single_step_increment_is_psi() {
        let p = two_point_process(0.25, 1);
        let b1 = p.algebra().basis(1);
        assert_eq!(discrete_increment(&p, 0, 1, &b1).unwrap(), p.psi().eval(&b1));
    }

    #[test]
    fn two_step_vacuum_expectation() {
        let h = 0.25;
        let p = two_point_process(h, 2);
        let j = discrete_increment(&p, 0, 2, &p.algebra().basis(1)).unwrap();
        assert!((j[(0, 0)] - c(2.0 * h * (1.0 - h))).norm() < 1e-15);
    }

    #[test]
    fn two_point_axioms_hold() {
        let rep = verify_wqlp_axioms(&two_point_process(0.25, 4)).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.chain.max(rep.stationarity).max(rep.independence) <= 1e-12);
        assert!((rep.one_step_distance - 0.25).abs() < 1e-14);
    }

    #[test]
    fn trivial_process_has_zero_residuals() {
        let b = function_algebra(&GroupTable::cyclic(3)).unwrap();
        let psi = KernelMap::functional_times_identity(&b.counit(), 2);
        let rep = verify_wqlp_axioms(&DiscreteLevyProcess::new(b, psi, 3).unwrap()).unwrap();
        assert_eq!((rep.chain, rep.diagonal, rep.stationarity, rep.independence), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn budget_and_homomorphism_are_enforced() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let psi = KernelMap::functional_times_identity(&b.counit(), 2);
        assert!(matches!(
            DiscreteLevyProcess::new(b.clone(), psi, 13),
            Err(Error::Budget { required: 8192, budget: 4096 })
        ));
        let scalar = KernelMap::scalar(&Functional::from_real(&[0.5, 0.5]));
        assert!(matches!(DiscreteLevyProcess::new(b, scalar, 2), Err(Error::NotStarHomomorphic { .. })));
    }

    #[test]
    fn two_point_states_are_poisson() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let rep = semigroup_of_states(&b, &Functional::from_real(&[-1.0, 1.0]), &grid, 1e-10).unwrap();
        assert!(rep.pass);
        for row in &rep.rows {
            let e = (-2.0 * row.t).exp();
            assert!((row.coeffs[0].0 - c((1.0 + e) / 2.0)).norm() < 1e-12);
            assert!((row.coeffs[1].0 - c((1.0 - e) / 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn non_generating_functional_is_rejected() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let err = semigroup_of_states(&b, &Functional::from_real(&[1.0, -1.0]), &[0.5], 1e-10);
        assert!(matches!(err, Err(Error::NotGenerating(_))));
    }

    #[test]
    fn derivative_recovers_generator() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        let gamma = Functional::from_real(&[-1.0, 1.0]);
        let d = semigroup_derivative_at_zero(&b, &gamma, 1e-5);
        assert!(d.distance(&gamma) < 1e-8);
    }

    #[test]
    fn z3_rate_matrix_is_circulant() {
        let table = GroupTable::cyclic(3);
        let gamma = Functional::from_real(&[-1.0, 1.0, 0.0]);
        let q = classical_rate_matrix(&table, &gamma).unwrap();
        assert_eq!(q[(0, 1)], c(1.0));
        assert_eq!(q[(2, 0)], c(1.0));
        assert_eq!(q[(1, 1)], c(-1.0));
        assert!(classical_oracle_compare(&table, &gamma, &[0.5, 1.0]).unwrap() < 1e-12);
    }

    #[test]
    fn vacuum_functional_matches_walk_power() {
        let p = two_point_process(0.25, 3);
        let e0 = CVector::from_column_slice(&[c(1.0), c(0.0)]);
        let q = p.psi().matrix_element(&e0, &e0);
        let lam = vacuum_functional(&p, 0, 3).unwrap();
        let want = crate::convolution::convolution_power(p.algebra(), &q, 3);
        assert!(lam.distance(&want) <= 1e-12);
    }
}
