//! Experiment configs and the input files they point to.
//!
//! Relative paths inside a config or a spec file resolve against the
//! directory of that file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bialgebra::{load_descriptor, BialgebraDescriptor, Element, Functional};
use crate::cocycle::{CocycleSpec, StepFunction};
use crate::convolution::ExpAlgorithm;
use crate::json::{read_json, vec_from_json, Cx};
use crate::kernel::{KernelMap, KernelMapFile};
use crate::linalg::{CMatrix, CVector};
use crate::schurmann::{self, SchurmannTriple};
use crate::{Error, Result, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Validate,
    BuildAlgebra,
    ConvExp,
    Schurmann,
    Classify,
    Evolve,
    Verify,
    CpWitness,
    Walk,
    WalkConverge,
    LevyVerify,
    States,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// One experiment. Fields not used by `kind` must be absent or are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    /// Bialgebra descriptor file.
    pub algebra: Option<PathBuf>,
    /// Cocycle spec file (algebra plus generator).
    pub spec: Option<PathBuf>,
    /// Generating functional, as `[re, im]` coefficients.
    pub gamma: Option<Vec<Cx>>,
    /// Kernel map file.
    pub phi: Option<PathBuf>,
    /// Classification witness file.
    pub witness: Option<PathBuf>,
    /// `function` or `group` for `build-algebra`.
    pub family: Option<String>,
    /// `cyclic:N`, `s3`, or a Cayley-table file.
    pub group: Option<String>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub t_max: Option<f64>,
    pub h: Option<f64>,
    pub steps: Option<usize>,
    pub h_grid: Option<Vec<f64>>,
    pub grid: Option<Vec<f64>>,
    /// Step-function files or inline JSON.
    pub f: Option<String>,
    pub g: Option<String>,
    pub fs: Option<Vec<String>>,
    /// Element: `one`, a basis label, or a JSON coefficient list.
    pub b: Option<String>,
    pub elements: Option<Vec<String>>,
    #[serde(rename = "N")]
    pub n_steps: Option<usize>,
    pub budget: Option<usize>,
    pub h_fd: Option<f64>,
    pub alg: Option<ExpAlgorithm>,
    pub trials: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = read_json(path)?;
        cfg.rebase(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Resolves relative file paths against `dir`.
    pub fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = dir.join(&*path);
                }
            }
        };
        fix(&mut self.algebra);
        fix(&mut self.spec);
        fix(&mut self.phi);
        fix(&mut self.witness);
        fix(&mut self.out);
        let fix_step = |s: &mut String| {
            if !s.trim_start().starts_with('{') && Path::new(s.as_str()).is_relative() {
                *s = dir.join(s.as_str()).to_string_lossy().into_owned();
            }
        };
        self.f.iter_mut().for_each(fix_step);
        self.g.iter_mut().for_each(fix_step);
        self.fs.iter_mut().flatten().for_each(fix_step);
        if let Some(group) = &mut self.group {
            if group != "s3" && !group.starts_with("cyclic:") && Path::new(group.as_str()).is_relative() {
                *group = dir.join(group.as_str()).to_string_lossy().into_owned();
            }
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn require<T: Clone>(&self, value: &Option<T>, name: &str) -> Result<T> {
        value.clone().ok_or_else(|| Error::Precondition(format!("missing parameter `{name}`")))
    }
}

/// `{"algebra": path, "gamma": [...] | "phi": {...}, "eta": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub algebra: PathBuf,
    pub gamma: Option<Vec<Cx>>,
    pub phi: Option<KernelMapFile>,
    pub eta: Option<Vec<Cx>>,
}

/// A cocycle spec together with the data a walk is built from.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub cocycle: CocycleSpec,
    pub gamma: Option<Functional>,
    pub triple: Option<SchurmannTriple>,
    /// `(π, ξ)` implementing the generator.
    pub pi: Vec<CMatrix>,
    pub xi: CVector,
    /// Residual of the implementing pair.
    pub pair_residual: f64,
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec> {
    let file: SpecFile = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let algebra_path = if file.algebra.is_relative() { dir.join(&file.algebra) } else { file.algebra.clone() };
    let algebra = load_descriptor(&algebra_path)?;
    let gamma = file.gamma.as_ref().map(|g| functional(&algebra, g)).transpose()?;
    let (phi, triple) = match (&gamma, &file.phi) {
        (Some(g), None) => {
            let t = schurmann::gns_triple(&algebra, g, schurmann::DEFAULT_RANK_TOL)?;
            (schurmann::assemble_structure_map(&algebra, &t)?, Some(t))
        }
        (None, Some(p)) => (KernelMap::from_file(p)?, None),
        _ => return Err(Error::Parse(format!("{}: give exactly one of `gamma` and `phi`", path.display()))),
    };
    let (pi, xi, pair_residual) = match &triple {
        Some(t) => match (&t.xi, t.implementing_residual(&algebra)) {
            (Some(xi), Some(res)) => (t.pi.clone(), xi.clone(), res),
            _ => {
                let pair = schurmann::extract_implementing_pair(&algebra, &phi);
                (pair.pi, pair.xi, pair.residual)
            }
        },
        None => {
            let pair = schurmann::extract_implementing_pair(&algebra, &phi);
            (pair.pi, pair.xi, pair.residual)
        }
    };
    let eta = match &file.eta {
        Some(e) => functional(&algebra, e)?,
        None => algebra.counit(),
    };
    Ok(LoadedSpec { cocycle: CocycleSpec::with_eta(algebra, phi, eta)?, gamma, triple, pi, xi, pair_residual })
}

pub fn functional(b: &BialgebraDescriptor, coeffs: &[Cx]) -> Result<Functional> {
    if coeffs.len() != b.dim() {
        return Err(Error::Shape(format!("functional has {} coefficients, algebra dimension {}", coeffs.len(), b.dim())));
    }
    Ok(Functional::new(vec_from_json(coeffs)))
}

/// `one`, a basis label, or a JSON list of `[re, im]` coefficients.
pub fn parse_element(b: &BialgebraDescriptor, text: &str) -> Result<Element> {
    let text = text.trim();
    if text == "one" {
        return Ok(b.one());
    }
    if let Some(i) = b.label_index(text) {
        return Ok(b.basis(i));
    }
    if text.starts_with('[') {
        let coeffs: Vec<Cx> = serde_json::from_str(text).map_err(|e| Error::Parse(format!("element {text:?}: {e}")))?;
        if coeffs.len() != b.dim() {
            return Err(Error::Shape(format!("element has {} coefficients, algebra dimension {}", coeffs.len(), b.dim())));
        }
        return Ok(Element::new(vec_from_json(&coeffs)));
    }
    Err(Error::Parse(format!("unknown element {text:?}")))
}

/// A step-function file path, or inline JSON starting with `{`.
pub fn parse_step(text: &str) -> Result<StepFunction> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("step function: {e}")))
    } else {
        read_json(Path::new(text))
    }
}

pub fn step_or_zero(text: &Option<String>, k: usize) -> Result<StepFunction> {
    text.as_deref().map_or_else(|| Ok(StepFunction::zero(k)), parse_step)
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid {text:?}: {e}"))))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [start, stop, step] if *step > 0.0 && stop >= start => {
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(Error::Parse(format!("grid {text:?} must be start:stop:step with step > 0"))),
    }
}

/// `2^-a..2^-b`, or a comma-separated list.
pub fn parse_h_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("h-grid {text:?} must be 2^-a..2^-b or a comma list"));
    if let Some((lo, hi)) = text.split_once("..") {
        let exp = |s: &str| s.trim().strip_prefix("2^").and_then(|e| e.parse::<i32>().ok()).ok_or_else(bad);
        let (a, b) = (exp(lo)?, exp(hi)?);
        let step = if b >= a { 1 } else { -1 };
        let mut out = vec![];
        let mut e = a;
        loop {
            out.push(2f64.powi(e));
            if e == b {
                break;
            }
            e += step;
        }
        return Ok(out);
    }
    text.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bialgebra::{function_algebra, GroupTable};
    use crate::linalg::c;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert!(parse_grid("1:0:0.1").is_err());
        assert_eq!(parse_h_grid("2^-2..2^-4").unwrap(), vec![0.25, 0.125, 0.0625]);
        assert_eq!(parse_h_grid("0.5,0.25").unwrap(), vec![0.5, 0.25]);
        assert!(parse_h_grid("2^x..2^-3").is_err());
    }

    #[test]
    fn elements() {
        let b = function_algebra(&GroupTable::cyclic(2)).unwrap();
        assert_eq!(parse_element(&b, "one").unwrap(), b.one());
        assert_eq!(parse_element(&b, "delta_1").unwrap(), b.basis(1));
        let e = parse_element(&b, "[[1,0],[0,2]]").unwrap();
        assert_eq!(e.coeffs[1], crate::C64::new(0.0, 2.0));
        assert!(parse_element(&b, "nope").is_err());
        assert!(matches!(parse_element(&b, "[[1,0]]"), Err(Error::Shape(_))));
    }

    #[test]
    fn inline_step_function() {
        let f = parse_step(r#"{"breakpoints":[0.5],"values":[[[1,0]],[[0,0]]]}"#).unwrap();
        assert_eq!(f.value_at(0.1)[0], c(1.0));
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"kind":"validate","bogus":1}"#);
        assert!(err.is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"kind":"walk-converge","T":1.0,"N":4}"#).unwrap();
        assert_eq!((cfg.t_final, cfg.n_steps), (Some(1.0), Some(4)));
    }
}
