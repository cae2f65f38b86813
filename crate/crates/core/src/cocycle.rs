//! Matrix elements of convolution cocycles between exponential vectors of
//! step functions.
//!
//! For right-continuous step functions `f, g` with values in `k`, the form
//! solution on `[0, t[` is the ⋆-product
//! `λ^{f,g}_t = η ⋆ p^{c₀,d₀}_{Δt₀} ⋆ ⋯ ⋆ p^{cₙ,dₙ}_{Δtₙ}` of the semigroups
//! generated by `φ_{ĉ,d̂} = ⟨ĉ, φ(·) d̂⟩`. The first slot is the bra and is
//! conjugate-linear.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bialgebra::{BialgebraDescriptor, Element, Functional};
use crate::convolution::{conv_exp, convolve, ExpAlgorithm};
use crate::json::{dvec_from_json, dvec_to_json, Cx};
use crate::kernel::KernelMap;
use crate::linalg::{self, CMatrix, CVector};
use crate::{Error, Result, C64};

/// Breakpoints closer than this are merged.
pub const SNAP: f64 = 1e-12;

/// Default centered finite-difference step.
pub const DEFAULT_H_FD: f64 = 1e-4;

/// Right-continuous step function `[0, ∞[ → k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionFile", into = "StepFunctionFile")]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<CVector>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFunctionFile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<Cx>>,
}

impl TryFrom<StepFunctionFile> for StepFunction {
    type Error = Error;
    fn try_from(file: StepFunctionFile) -> Result<Self> {
        StepFunction::new(file.breakpoints, file.values.iter().map(|v| dvec_from_json(v)).collect())
    }
}

impl From<StepFunction> for StepFunctionFile {
    fn from(f: StepFunction) -> Self {
        Self { breakpoints: f.breakpoints, values: f.values.iter().map(dvec_to_json).collect() }
    }
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<CVector>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::Shape(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite() || *t < 0.0)
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Shape("breakpoints must be finite, nonnegative and strictly increasing".into()));
        }
        let k = values[0].len();
        if values.iter().any(|v| v.len() != k) {
            return Err(Error::Shape("step values must share one dimension".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn zero(k: usize) -> Self {
        Self::constant(CVector::zeros(k))
    }

    pub fn constant(v: CVector) -> Self {
        Self { breakpoints: Vec::new(), values: vec![v] }
    }

    /// `v·1_{[a,b[}`.
    pub fn indicator(v: CVector, a: f64, b: f64) -> Result<Self> {
        let zero = CVector::zeros(v.len());
        if a <= 0.0 {
            Self::new(vec![b], vec![v, zero])
        } else {
            Self::new(vec![a, b], vec![zero.clone(), v, zero])
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[CVector] {
        &self.values
    }

    pub fn noise_dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn value_at(&self, s: f64) -> &CVector {
        &self.values[self.breakpoints.partition_point(|&b| b <= s)]
    }

    /// The last value, carried on `[t_n, ∞[`.
    pub fn tail_value(&self) -> &CVector {
        self.values.last().expect("at least one value")
    }

    pub fn has_bounded_support(&self) -> bool {
        linalg::max_abs(self.tail_value()) == 0.0
    }

    /// `s ↦ f(s + shift)`.
    pub fn shift(&self, shift: f64) -> Self {
        let first = self.breakpoints.partition_point(|&b| b <= shift);
        Self {
            breakpoints: self.breakpoints[first..].iter().map(|b| b - shift).collect(),
            values: self.values[first..].to_vec(),
        }
    }

    /// Same function with an extra breakpoint at `s`.
    pub fn refine(&self, s: f64) -> Self {
        let i = self.breakpoints.partition_point(|&b| b < s);
        if s <= 0.0 || self.breakpoints.get(i) == Some(&s) {
            return self.clone();
        }
        let mut out = self.clone();
        out.breakpoints.insert(i, s);
        out.values.insert(i, self.values[i].clone());
        out
    }

    /// `∫_a^b f(s) ds`.
    pub fn integral(&self, a: f64, b: f64) -> CVector {
        let mut acc = CVector::zeros(self.noise_dim());
        for (lo, hi) in pieces(&[self.breakpoints.as_slice()], a, b) {
            acc += self.value_at(0.5 * (lo + hi)) * C64::new(hi - lo, 0.0);
        }
        acc
    }
}

/// Merged breakpoint partition of `[a, b[`, with breakpoints closer than
/// [`SNAP`] merged and zero-length pieces dropped.
fn pieces(breaks: &[&[f64]], a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breaks.iter().flat_map(|v| v.iter().copied()).filter(|&t| t > a && t < b).collect();
    cuts.sort_by(f64::total_cmp);
    let mut pts = vec![a];
    for t in cuts {
        if t - pts.last().copied().unwrap_or(a) > SNAP {
            pts.push(t);
        }
    }
    if b - pts.last().copied().unwrap_or(a) <= SNAP && pts.len() > 1 {
        pts.pop();
    }
    pts.push(b);
    pts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

/// `⟨f, g⟩_{L²[a,b]}`, conjugate-linear in `f`.
pub fn inner_product(f: &StepFunction, g: &StepFunction, a: f64, b: f64) -> C64 {
    pieces(&[f.breakpoints(), g.breakpoints()], a, b)
        .into_iter()
        .map(|(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            f.value_at(mid).dotc(g.value_at(mid)) * (hi - lo)
        })
        .sum()
}

/// Stochastic generator `φ` and initial functional `η`.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleSpec {
    pub algebra: BialgebraDescriptor,
    pub phi: KernelMap,
    pub eta: Functional,
}

impl CocycleSpec {
    /// Cocycle case `η = ε`.
    pub fn new(algebra: BialgebraDescriptor, phi: KernelMap) -> Result<Self> {
        let eta = algebra.counit();
        Self::with_eta(algebra, phi, eta)
    }

    pub fn with_eta(algebra: BialgebraDescriptor, phi: KernelMap, eta: Functional) -> Result<Self> {
        if phi.dim() != algebra.dim() || eta.dim() != algebra.dim() {
            return Err(Error::Shape(format!(
                "algebra has dimension {}, φ has {} blocks, η has {} coefficients",
                algebra.dim(),
                phi.dim(),
                eta.dim()
            )));
        }
        Ok(Self { algebra, phi, eta })
    }

    pub fn noise_dim(&self) -> usize {
        self.phi.noise_dim()
    }

    fn check_step(&self, f: &StepFunction) -> Result<()> {
        if f.noise_dim() != self.noise_dim() {
            return Err(Error::Shape(format!(
                "step function has dimension {}, noise space has {}",
                f.noise_dim(),
                self.noise_dim()
            )));
        }
        Ok(())
    }
}

/// `φ_{ĉ,d̂}(b) = ⟨ĉ, φ(b) d̂⟩`.
pub fn phi_component(phi: &KernelMap, c: &CVector, d: &CVector) -> Functional {
    phi.component(c, d)
}

/// `p^{c,d}_t = exp_⋆(t φ_{ĉ,d̂})`.
pub fn associated_semigroup(spec: &CocycleSpec, c: &CVector, d: &CVector, t: f64) -> Functional {
    conv_exp(&spec.algebra, &phi_component(&spec.phi, c, d), t, ExpAlgorithm::Rmap)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("time must be finite and nonnegative, got {t}")))
    }
}

/// `λ^{f,g}_t`.
pub fn form_solution(spec: &CocycleSpec, f: &StepFunction, g: &StepFunction, t: f64) -> Result<Functional> {
    check_time(t)?;
    spec.check_step(f)?;
    spec.check_step(g)?;
    let b = &spec.algebra;
    let mut acc = spec.eta.clone();
    if t == 0.0 {
        return Ok(acc);
    }
    for (lo, hi) in pieces(&[f.breakpoints(), g.breakpoints()], 0.0, t) {
        let mid = 0.5 * (lo + hi);
        let p = associated_semigroup(spec, f.value_at(mid), g.value_at(mid), hi - lo);
        acc = convolve(b, &acc, &p);
    }
    Ok(acc)
}

/// Horizon used when none is given: one time unit past the last breakpoint
/// and past `t`.
pub fn default_horizon(fs: &[&StepFunction], t: f64) -> f64 {
    fs.iter()
        .flat_map(|f| f.breakpoints().last().copied())
        .fold(t, f64::max)
        + 1.0
}

pub(crate) fn resolve_horizon(fs: &[&StepFunction], t: f64, t_max: Option<f64>) -> Result<f64> {
    let horizon = match t_max {
        Some(h) => h,
        None if fs.iter().all(|f| f.has_bounded_support()) => default_horizon(fs, t),
        None => return Err(Error::UnboundedSupport),
    };
    if t > horizon {
        return Err(Error::Horizon { t, horizon });
    }
    Ok(horizon)
}

/// `⟨ε(f), l_t(b) ε(g)⟩ = λ^{f,g}_t(b)·exp⟨f, g⟩_{L²[0,T_max]}`, with the
/// step functions cut off at `T_max`.
pub fn cocycle_matrix_element(
    spec: &CocycleSpec,
    f: &StepFunction,
    g: &StepFunction,
    t: f64,
    b: &Element,
    t_max: Option<f64>,
) -> Result<C64> {
    let horizon = resolve_horizon(&[f, g], t, t_max)?;
    let lambda = form_solution(spec, f, g, t)?;
    Ok(lambda.eval(b) * inner_product(f, g, 0.0, horizon).exp())
}

/// `max |λ^{f,g}_{s+t} − λ^{f,g}_s ⋆ λ^{S*_s f, S*_s g}_t|` over coefficients.
pub fn verify_cocycle_identity(
    spec: &CocycleSpec,
    f: &StepFunction,
    g: &StepFunction,
    s: f64,
    t: f64,
) -> Result<f64> {
    check_time(s)?;
    check_time(t)?;
    let whole = form_solution(spec, f, g, s + t)?;
    let head = form_solution(spec, f, g, s)?;
    let tail = form_solution(spec, &f.shift(s), &g.shift(s), t)?;
    Ok(whole.distance(&convolve(&spec.algebra, &head, &tail)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralEquationReport {
    pub t: f64,
    pub h_fd: f64,
    /// Centered difference of `s ↦ λ^{f,g}_s(b)` at `t`.
    pub derivative: Cx,
    /// `(λ^{f,g}_t ⋆ φ_{f̂(t),ĝ(t)})(b)`.
    pub generator_term: Cx,
    pub residual: f64,
    /// `residual / h_fd²`.
    pub constant: f64,
}

pub fn verify_integral_equation(
    spec: &CocycleSpec,
    f: &StepFunction,
    g: &StepFunction,
    t: f64,
    b: &Element,
    h_fd: f64,
) -> Result<IntegralEquationReport> {
    if !(h_fd > 0.0) {
        return Err(Error::Precondition(format!("finite-difference step must be positive, got {h_fd}")));
    }
    check_time(t - h_fd)?;
    for &bp in f.breakpoints().iter().chain(g.breakpoints()) {
        if (bp - t).abs() <= h_fd {
            return Err(Error::BreakpointCollision { t, h: h_fd, breakpoint: bp });
        }
    }
    let plus = form_solution(spec, f, g, t + h_fd)?.eval(b);
    let minus = form_solution(spec, f, g, t - h_fd)?.eval(b);
    let derivative = (plus - minus) / (2.0 * h_fd);
    let lambda = form_solution(spec, f, g, t)?;
    let comp = phi_component(&spec.phi, f.value_at(t), g.value_at(t));
    let generator_term = convolve(&spec.algebra, &lambda, &comp).eval(b);
    let residual = (derivative - generator_term).norm();
    Ok(IntegralEquationReport {
        t,
        h_fd,
        derivative: Cx(derivative),
        generator_term: Cx(generator_term),
        residual,
        constant: residual / (h_fd * h_fd),
    })
}

/// `M_ij = ⟨ε(f_i), l_t(a_i* a_j) ε(f_j)⟩`.
pub fn cp_gram_matrix(
    spec: &CocycleSpec,
    t: f64,
    fs: &[StepFunction],
    elements: &[Element],
    t_max: Option<f64>,
) -> Result<CMatrix> {
    if fs.len() != elements.len() {
        return Err(Error::Shape(format!(
            "{} step functions but {} elements",
            fs.len(),
            elements.len()
        )));
    }
    let refs: Vec<&StepFunction> = fs.iter().collect();
    let horizon = resolve_horizon(&refs, t, t_max)?;
    let b = &spec.algebra;
    let n = fs.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let ai_star = b.star(&elements[i]);
        for j in 0..n {
            let prod = b.mul(&ai_star, &elements[j]);
            m[(i, j)] = cocycle_matrix_element(spec, &fs[i], &fs[j], t, &prod, Some(horizon))?;
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of [`cp_gram_matrix`]; `+∞` for empty lists.
pub fn cp_gram_witness(
    spec: &CocycleSpec,
    t: f64,
    fs: &[StepFunction],
    elements: &[Element],
    t_max: Option<f64>,
) -> Result<f64> {
    Ok(linalg::min_eigenvalue(&cp_gram_matrix(spec, t, fs, elements, t_max)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSearch {
    pub min_eig: f64,
    /// Index of the trial attaining `min_eig`.
    pub trial: usize,
    pub trials: usize,
}

/// Random search for a negative [`cp_gram_witness`]. Each trial draws `size`
/// step functions supported in `[0, t]` with at most two breakpoints and
/// `size` elements, all with coefficients in the unit square.
pub fn cp_witness_search<R: Rng + ?Sized>(
    spec: &CocycleSpec,
    t: f64,
    rng: &mut R,
    trials: usize,
    size: usize,
) -> Result<WitnessSearch> {
    let k = spec.noise_dim();
    let d = spec.algebra.dim();
    let z = |rng: &mut R| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut best = WitnessSearch { min_eig: f64::INFINITY, trial: 0, trials };
    for trial in 0..trials {
        let mut fs = Vec::with_capacity(size);
        let mut elements = Vec::with_capacity(size);
        for _ in 0..size {
            let mut cuts: Vec<f64> = (0..rng.random_range(0..=2)).map(|_| rng.random_range(0.0..t.max(SNAP))).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() <= SNAP);
            cuts.retain(|&c| c > SNAP);
            cuts.push(t.max(SNAP) + 1.0);
            let mut values: Vec<CVector> = (0..cuts.len()).map(|_| CVector::from_fn(k, |_, _| z(rng))).collect();
            values.push(CVector::zeros(k));
            fs.push(StepFunction::new(cuts, values)?);
            elements.push(Element::new((0..d).map(|_| z(rng)).collect()));
        }
        let min_eig = cp_gram_witness(spec, t, &fs, &elements, None)?;
        if min_eig < best.min_eig {
            best.min_eig = min_eig;
            best.trial = trial;
        }
    }
    Ok(best)
}
