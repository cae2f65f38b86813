//! Execution of one experiment config.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use super::config::{
    functional, load_spec, parse_element, parse_step, step_or_zero, ExperimentConfig, ExperimentKind, LoadedSpec,
};
use super::report::{num, Certificate, Report, Table};
use crate::bialgebra::{
    function_algebra, group_algebra, load_descriptor, validate_with_tol, BialgebraDescriptor,
    DescriptorFile, Element, Functional, GroupTable,
};
use crate::cocycle::{self, StepFunction};
use crate::convolution::{conv_exp, conv_exp_series, convolution_power, ExpAlgorithm};
use crate::json::{dvec_from_json, dvec_to_json, mat_to_json, read_json, square_from_json, vec_to_json, Cx};
use crate::kernel::{KernelMap, KernelMapFile};
use crate::levy::{self, DiscreteLevyProcess};
use crate::linalg;
use crate::schurmann::{self, Witness};
use crate::walk::{self, WalkSource};
use crate::{Error, Result};

/// Tolerance of the walk error identity and unitarity checks.
const WALK_IDENTITY_TOL: f64 = 1e-12;

/// Tolerance of the numerical generator check in `states`.
const DERIVATIVE_TOL: f64 = 1e-6;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = cfg.require(&cfg.kind, "kind")?;
    match kind {
        ExperimentKind::Validate => run_validate(cfg),
        ExperimentKind::BuildAlgebra => run_build_algebra(cfg),
        ExperimentKind::ConvExp => run_conv_exp(cfg),
        ExperimentKind::Schurmann => run_schurmann(cfg),
        ExperimentKind::Classify => run_classify(cfg),
        ExperimentKind::Evolve => run_evolve(cfg),
        ExperimentKind::Verify => run_verify(cfg),
        ExperimentKind::CpWitness => run_cp_witness(cfg),
        ExperimentKind::Walk => run_walk(cfg),
        ExperimentKind::WalkConverge => run_walk_converge(cfg),
        ExperimentKind::LevyVerify => run_levy_verify(cfg),
        ExperimentKind::States => run_states(cfg),
    }
}

fn algebra(cfg: &ExperimentConfig) -> Result<BialgebraDescriptor> {
    match (&cfg.algebra, &cfg.spec) {
        (Some(path), _) => load_descriptor(path),
        (None, Some(spec)) => Ok(load_spec(spec)?.cocycle.algebra),
        (None, None) => Err(Error::Precondition("missing parameter `algebra`".into())),
    }
}

fn spec(cfg: &ExperimentConfig) -> Result<LoadedSpec> {
    load_spec(&cfg.require(&cfg.spec, "spec")?)
}

/// `gamma` from the config, else from the spec file.
fn gamma(cfg: &ExperimentConfig, b: &BialgebraDescriptor) -> Result<Functional> {
    if let Some(g) = &cfg.gamma {
        return functional(b, g);
    }
    if let Some(path) = &cfg.spec {
        if let Some(g) = load_spec(path)?.gamma {
            return Ok(g);
        }
    }
    Err(Error::Precondition("missing parameter `gamma`".into()))
}

fn nonnegative_time(name: &str, t: f64) -> Result<f64> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Error::Precondition(format!("`{name}` must be finite and nonnegative, got {t}")))
    }
}

fn elements(cfg: &ExperimentConfig, b: &BialgebraDescriptor) -> Result<Vec<Element>> {
    match &cfg.elements {
        Some(list) => list.iter().map(|e| parse_element(b, e)).collect(),
        None => Ok((0..b.dim()).map(|i| b.basis(i)).collect()),
    }
}

fn functional_json(b: &BialgebraDescriptor, f: &Functional) -> Value {
    Value::Object(
        b.labels()
            .iter()
            .zip(&f.coeffs)
            .map(|(l, z)| (l.clone(), json!([num(z.re), num(z.im)])))
            .collect(),
    )
}

fn kernel_json(phi: &KernelMap) -> Value {
    serde_json::to_value(phi.to_file()).expect("serializable")
}

fn run_validate(cfg: &ExperimentConfig) -> Result<Report> {
    let b = algebra(cfg)?;
    let tol = cfg.tol();
    let rep = validate_with_tol(&b, tol);
    let certs = rep.residuals.iter().map(|(name, v)| Certificate::at_most(name, *v, tol)).collect();
    Ok(Report::new("validate", certs, json!({ "dim": b.dim(), "labels": b.labels() })))
}

fn group_table(spec: &str) -> Result<GroupTable> {
    if spec == "s3" {
        return Ok(GroupTable::s3());
    }
    if let Some(n) = spec.strip_prefix("cyclic:") {
        let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad group order in {spec:?}")))?;
        return Ok(GroupTable::cyclic(n));
    }
    read_json(Path::new(spec))
}

fn run_build_algebra(cfg: &ExperimentConfig) -> Result<Report> {
    let table = group_table(&cfg.require(&cfg.group, "group")?)?;
    let family = cfg.family.as_deref().unwrap_or("function");
    let b = match family {
        "function" => function_algebra(&table)?,
        "group" => group_algebra(&table)?,
        other => return Err(Error::Parse(format!("unknown family {other:?}; use `function` or `group`"))),
    };
    let rep = validate_with_tol(&b, cfg.tol());
    let data = serde_json::to_value(DescriptorFile::from_descriptor(&b))?;
    let mut report = Report::new("build-algebra", vec![Certificate::flag("valid", rep.pass)], data);
    report.raw = true;
    Ok(report)
}

fn run_conv_exp(cfg: &ExperimentConfig) -> Result<Report> {
    let b = algebra(cfg)?;
    let g = gamma(cfg, &b)?;
    let t = cfg.require(&cfg.t, "t")?;
    let alg = cfg.alg.unwrap_or_default();
    let value = conv_exp(&b, &g, t, alg);
    let other = match alg {
        ExpAlgorithm::Rmap => conv_exp_series(&b, &g, t).value,
        ExpAlgorithm::Series => conv_exp(&b, &g, t, ExpAlgorithm::Rmap),
    };
    let series = conv_exp_series(&b, &g, t);
    let certs = vec![Certificate::at_most("algorithm_agreement", value.distance(&other), cfg.tol())];
    let data = json!({
        "t": t,
        "algorithm": alg,
        "value": functional_json(&b, &value),
        "series_terms": series.terms,
        "series_tail_bound": num(series.tail_bound),
    });
    let rows = b
        .labels()
        .iter()
        .zip(&value.coeffs)
        .map(|(l, z)| vec![Value::String(l.clone()), num(z.re), num(z.im)])
        .collect();
    Ok(Report::new("conv-exp", certs, data).with_table(Table { header: vec!["label".into(), "re".into(), "im".into()], rows }))
}

fn run_schurmann(cfg: &ExperimentConfig) -> Result<Report> {
    let b = algebra(cfg)?;
    let g = gamma(cfg, &b)?;
    let tol = cfg.tol();
    let gen = schurmann::check_generating_with_tol(&b, &g, tol);
    let triple = schurmann::gns_triple(&b, &g, schurmann::DEFAULT_RANK_TOL)?;
    let phi = schurmann::assemble_structure_map(&b, &triple)?;
    let structure = schurmann::verify_structure_relation(&b, &phi, &b.counit())?;
    let pair = schurmann::extract_implementing_pair(&b, &phi);
    let mut certs = vec![
        Certificate::flag("generating", gen.pass),
        Certificate::at_most("structure_relation", structure, tol),
        Certificate::at_most("unit_value", linalg::max_abs(&phi.eval(&b.one())), tol),
        Certificate::at_most("cocycle_relation", triple.cocycle_residual(&b), tol),
        Certificate::at_most("inner_product", triple.inner_product_residual(&b), tol),
        Certificate::at_most("representation", triple.pi_residual(&b), tol),
    ];
    if let Some(res) = triple.implementing_residual(&b) {
        certs.push(Certificate::at_most("implementing_pair", res, tol));
    }
    let data = json!({
        "generating": gen,
        "triple": triple.to_file(),
        "phi": kernel_json(&phi),
        "extracted_xi": dvec_to_json(&pair.xi),
        "extraction_residual": num(pair.residual),
    });
    Ok(Report::new("schurmann", certs, data))
}

/// `{"contractive": {"psi": ..., "zeta": [...]}}` or
/// `{"preunital": {"rho": [...], "isometry": [[...]], "xi": [...]}}`.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum WitnessFile {
    Contractive { psi: KernelMapFile, zeta: Vec<Cx> },
    Preunital { rho: Vec<Vec<Vec<Cx>>>, isometry: Vec<Vec<Cx>>, xi: Vec<Cx> },
}

impl WitnessFile {
    fn into_witness(self) -> Result<Witness> {
        Ok(match self {
            WitnessFile::Contractive { psi, zeta } => {
                Witness::Contractive { psi: KernelMap::from_file(&psi)?, zeta: dvec_from_json(&zeta) }
            }
            WitnessFile::Preunital { rho, isometry, xi } => Witness::Preunital {
                rho: rho.iter().map(|m| square_from_json(m)).collect::<Result<_>>()?,
                isometry: crate::json::mat_from_json(&isometry)?,
                xi: dvec_from_json(&xi),
            },
        })
    }
}

fn run_classify(cfg: &ExperimentConfig) -> Result<Report> {
    let (b, phi) = match &cfg.phi {
        Some(path) => (algebra(cfg)?, KernelMap::from_file(&read_json(path)?)?),
        None => {
            let s = spec(cfg)?;
            (s.cocycle.algebra, s.cocycle.phi)
        }
    };
    let witness = cfg.witness.as_deref().map(|p| read_json::<WitnessFile>(p)?.into_witness()).transpose()?;
    let cls = schurmann::classify_generator(&b, &phi, witness.as_ref(), cfg.tol())?;
    let certs = vec![Certificate::flag("classified", cls.class != schurmann::GeneratorClass::Unclassified)];
    Ok(Report::new("classify", certs, serde_json::to_value(&cls)?))
}

fn run_evolve(cfg: &ExperimentConfig) -> Result<Report> {
    let s = spec(cfg)?;
    let k = s.cocycle.noise_dim();
    let f = step_or_zero(&cfg.f, k)?;
    let g = step_or_zero(&cfg.g, k)?;
    let b = parse_element(&s.cocycle.algebra, cfg.b.as_deref().unwrap_or("one"))?;
    let times = match (&cfg.grid, cfg.t) {
        (Some(grid), _) => grid.clone(),
        (None, Some(t)) => vec![t],
        (None, None) => return Err(Error::Precondition("missing parameter `t`".into())),
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        nonnegative_time("t", t)?;
        let z = cocycle::cocycle_matrix_element(&s.cocycle, &f, &g, t, &b, cfg.t_max)?;
        rows.push(vec![num(t), num(z.re), num(z.im)]);
    }
    let data = json!({
        "convention": "<e(f), l_t(b) e(g)>, conjugate-linear in f",
        "values": rows,
    });
    Ok(Report::new("evolve", vec![], data).with_table(Table { header: vec!["t".into(), "re".into(), "im".into()], rows }))
}

fn run_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let s = spec(cfg)?;
    let k = s.cocycle.noise_dim();
    let f = step_or_zero(&cfg.f, k)?;
    let g = step_or_zero(&cfg.g, k)?;
    let t = nonnegative_time("t", cfg.require(&cfg.t, "t")?)?;
    let shift = nonnegative_time("s", cfg.s.unwrap_or(0.0))?;
    let tol = cfg.tol();
    let identity = cocycle::verify_cocycle_identity(&s.cocycle, &f, &g, shift, t)?;
    let mut certs = vec![Certificate::at_most("cocycle_identity", identity, tol)];
    let mut data = json!({ "s": shift, "t": t, "cocycle_identity": num(identity) });
    if let Some(text) = &cfg.b {
        let b = parse_element(&s.cocycle.algebra, text)?;
        let h_fd = cfg.h_fd.unwrap_or(cocycle::DEFAULT_H_FD);
        let rep = cocycle::verify_integral_equation(&s.cocycle, &f, &g, t, &b, h_fd)?;
        // Centered differences are exact up to a constant times h_fd².
        certs.push(Certificate::at_most("integral_equation", rep.residual, 100.0 * h_fd * h_fd));
        data["integral_equation"] = serde_json::to_value(&rep)?;
    }
    Ok(Report::new("verify", certs, data))
}

fn run_cp_witness(cfg: &ExperimentConfig) -> Result<Report> {
    let s = spec(cfg)?;
    let t = nonnegative_time("t", cfg.require(&cfg.t, "t")?)?;
    let tol = cfg.tol();
    let (min_eig, data) = match &cfg.fs {
        Some(fs) => {
            let fs: Vec<StepFunction> = fs.iter().map(|f| parse_step(f)).collect::<Result<_>>()?;
            let elems = match &cfg.elements {
                Some(list) => list.iter().map(|e| parse_element(&s.cocycle.algebra, e)).collect::<Result<Vec<_>>>()?,
                None => vec![s.cocycle.algebra.one(); fs.len()],
            };
            let m = cocycle::cp_gram_matrix(&s.cocycle, t, &fs, &elems, cfg.t_max)?;
            let min = linalg::min_eigenvalue(&m);
            (min, json!({ "gram": mat_to_json(&m), "min_eig": num(min) }))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
            let trials = cfg.trials.unwrap_or(50);
            let found = cocycle::cp_witness_search(&s.cocycle, t, &mut rng, trials, 3)?;
            (found.min_eig, json!({ "seed": cfg.seed(), "search": found }))
        }
    };
    Ok(Report::new("cp-witness", vec![Certificate::nonnegative("min_eig", min_eig, tol)], data))
}

fn run_walk(cfg: &ExperimentConfig) -> Result<Report> {
    let s = spec(cfg)?;
    let b = &s.cocycle.algebra;
    let h = cfg.require(&cfg.h, "h")?;
    let tol = cfg.tol();
    let scheme = walk::walk_map(b, &s.pi, &s.xi, None, h)?;
    let diff = walk::scaled_difference_identity(b, &s.cocycle.phi, &s.pi, &s.xi, h)?;
    let certs = vec![
        Certificate::at_most("implementing_pair", s.pair_residual, tol),
        Certificate::at_most("unitarity", walk::unitarity_residual(&scheme.v), WALK_IDENTITY_TOL),
        Certificate::at_most("difference_identity", diff.residual, WALK_IDENTITY_TOL),
        Certificate::at_most("star_homomorphism", scheme.psi.star_hom_residual(b), tol),
    ];
    let mut data = json!({
        "h": h,
        "U": mat_to_json(&scheme.v),
        "psi": kernel_json(&scheme.psi),
        "difference": diff,
    });
    if let Some(n) = cfg.steps {
        let k = s.cocycle.noise_dim();
        let f = step_or_zero(&cfg.f, k)?;
        let g = step_or_zero(&cfg.g, k)?;
        let elem = parse_element(b, cfg.b.as_deref().unwrap_or("one"))?;
        let z = walk::walk_matrix_element(b, &scheme.psi, h, n, &f, &g, &elem, cfg.t_max)?;
        data["steps"] = json!(n);
        data["matrix_element"] = json!([num(z.re), num(z.im)]);
    }
    Ok(Report::new("walk", certs, data))
}

fn run_walk_converge(cfg: &ExperimentConfig) -> Result<Report> {
    let s = spec(cfg)?;
    let b = &s.cocycle.algebra;
    let k = s.cocycle.noise_dim();
    let f = step_or_zero(&cfg.f, k)?;
    let g = step_or_zero(&cfg.g, k)?;
    let t_final = nonnegative_time("T", cfg.t_final.unwrap_or(1.0))?;
    let h_grid = cfg.h_grid.clone().unwrap_or_else(|| (2..=7).map(|e| 2f64.powi(-e)).collect());
    let elems = elements(cfg, b)?;
    let src = WalkSource { pi: &s.pi, xi: &s.xi, d: None };
    let rows = walk::convergence_table(&s.cocycle, src, t_final, &f, &g, &elems, &h_grid, cfg.t_max)?;
    let nonincreasing = rows.windows(2).all(|w| w[1].err <= w[0].err);
    let certs = vec![
        Certificate::at_most("implementing_pair", s.pair_residual, cfg.tol()),
        Certificate::flag("nonincreasing", nonincreasing),
    ];
    let table_rows = rows
        .iter()
        .map(|r| vec![num(r.h), num(r.err), r.ratio.map_or(Value::Null, num)])
        .collect();
    let data = json!({
        "T": t_final,
        "norm": "supremum of matrix-element deviations over grid times and the listed elements",
        "rows": rows,
    });
    Ok(Report::new("walk-converge", certs, data)
        .with_table(Table { header: vec!["h".into(), "err".into(), "ratio".into()], rows: table_rows }))
}

fn run_levy_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let s = spec(cfg)?;
    let b = s.cocycle.algebra.clone();
    let h = cfg.h.unwrap_or(0.25);
    let n = cfg.n_steps.unwrap_or(4);
    let tol = cfg.tol.unwrap_or(levy::AXIOM_TOL);
    let scheme = walk::walk_map(&b, &s.pi, &s.xi, None, h)?;
    let vacuum = scheme.vacuum_functional();
    let process =
        DiscreteLevyProcess::with_budget(b.clone(), scheme.psi, n, cfg.budget.unwrap_or(levy::DEFAULT_BUDGET))?;
    let rep = levy::verify_wqlp_axioms_with_tol(&process, tol)?;
    let walk_consistency = levy::vacuum_functional(&process, 0, n)?.distance(&convolution_power(&b, &vacuum, n));
    let certs = vec![
        Certificate::at_most("chain", rep.chain, tol),
        Certificate::at_most("diagonal", rep.diagonal, tol),
        Certificate::at_most("stationarity", rep.stationarity, tol),
        Certificate::at_most("independence", rep.independence, tol),
        Certificate::at_most("walk_consistency", walk_consistency, tol),
    ];
    Ok(Report::new("levy-verify", certs, json!({ "h": h, "N": n, "axioms": rep })))
}

fn run_states(cfg: &ExperimentConfig) -> Result<Report> {
    let b = algebra(cfg)?;
    let g = gamma(cfg, &b)?;
    let grid = cfg.grid.clone().unwrap_or_else(|| (0..=10).map(|i| i as f64 / 10.0).collect());
    let tol = cfg.tol.unwrap_or(1e-10);
    let rep = levy::semigroup_of_states(&b, &g, &grid, tol)?;
    let derivative = levy::semigroup_derivative_at_zero(&b, &g, 1e-5);
    let gen = schurmann::check_generating_with_tol(&b, &derivative, DERIVATIVE_TOL).pass;
    let certs = vec![
        Certificate::flag("states", rep.rows.iter().all(|r| r.is_state)),
        Certificate::at_most("semigroup", rep.semigroup_residual, tol.max(1e-9)),
        Certificate::flag("derivative_generating", gen),
    ];
    let mut header = vec!["t".to_string()];
    for l in b.labels() {
        header.push(format!("re({l})"));
        header.push(format!("im({l})"));
    }
    header.extend(["unit_residual", "gram_min_eig", "is_state"].map(String::from));
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![num(r.t)];
            for z in &r.coeffs {
                row.push(num(z.0.re));
                row.push(num(z.0.im));
            }
            row.extend([num(r.unit_residual), num(r.gram_min_eig), Value::Bool(r.is_state)]);
            row
        })
        .collect();
    let data = json!({ "gamma": vec_to_json(&g.coeffs), "report": rep, "derivative": vec_to_json(&derivative.coeffs) });
    Ok(Report::new("states", certs, data).with_table(Table { header, rows }))
}
