//! Task pipelines. Each returns the `result` object of the report and the
//! files to write next to it.

use std::fmt::Write as _;
use std::path::Path;

use anicap::body::{self, CapBody};
use anicap::domain::Layout;
use anicap::measures;
use anicap::solver::{self, Formulation, SolveSpec};
use anicap::verify::{self, Comparison};
use anicap::{CapillaryCap, Domain};
use serde_json::{json, Map, Value};

use crate::config::{parse_resolution, ConfigError, FormulationChoice, MeasuresConfig, RunConfig, Task};
use crate::expr::{Expr, Vars};

pub const SCHEMA_VERSION: u32 = 1;

/// Exit status and error class of a failed run.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Module(anicap::Error),
}

impl RunError {
    pub fn class(&self) -> &'static str {
        match self {
            RunError::Config(_) => "ConfigError",
            RunError::Module(e) => e.class(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Module(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Module(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<anicap::Error> for RunError {
    fn from(e: anicap::Error) -> Self {
        RunError::Module(e)
    }
}

pub struct Outcome {
    pub result: Value,
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
    /// Exit status when the run itself succeeded (verify failures give 1).
    pub status: i32,
}

/// Runs `task` on a validated config.
pub fn execute(cfg: &RunConfig, task: Task) -> Result<Outcome, RunError> {
    cfg.validate(task)?;
    let norm = cfg.build_norm()?;
    if task == Task::CheckNorm {
        return check_norm(cfg, &norm);
    }
    let cap = CapillaryCap::build(norm, cfg.omega0)?;
    match task {
        Task::CheckCondition => check_condition(&cap),
        Task::Verify => run_verify(cfg, &cap),
        _ => {
            let domain = Domain::new(&cap, cfg.grid.scheme.scheme(), cfg.resolution()?)?;
            match task {
                Task::Solve => run_solve(cfg, &domain),
                Task::Measures => run_measures(cfg, &domain),
                Task::Psum => run_psum(cfg, &domain),
                _ => unreachable!(),
            }
        }
    }
}

/// Full report document.
pub fn report(cfg: &RunConfig, task: Task, outcome: &Result<Outcome, RunError>) -> Value {
    let config = serde_json::to_value(cfg).expect("config is serializable");
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("tool".into(), json!(concat!("anicap ", env!("CARGO_PKG_VERSION"))));
    doc.insert("task".into(), json!(task.name()));
    doc.insert("config".into(), config);
    match outcome {
        Ok(o) => {
            doc.insert("status".into(), json!(if o.status == 0 { "ok" } else { "failed" }));
            doc.insert("result".into(), o.result.clone());
        }
        Err(e) => {
            doc.insert("status".into(), json!("error"));
            doc.insert("error".into(), json!({ "class": e.class(), "message": e.to_string() }));
        }
    }
    Value::Object(doc)
}

/// Nodal field of an expression on the domain.
pub fn eval_field(domain: &Domain, src: &str) -> Result<Vec<f64>, ConfigError> {
    let e = Expr::parse(src, domain.n()).map_err(|err| ConfigError(format!("'{src}': {err}")))?;
    let ell = domain.ell();
    let kernels: Vec<Vec<f64>> = if e.uses_kernel() { (0..domain.n()).map(|a| domain.kernel(a)).collect() } else { Vec::new() };
    Ok(domain
        .grid()
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let k: Vec<f64> = kernels.iter().map(|kv| kv[i]).collect();
            e.eval(&Vars { xi: &node.point, ell: ell[i], kernel: &k })
        })
        .collect())
}

fn read_nodal(path: &str, len: usize) -> Result<Vec<f64>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {path}: {e}")))?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or(line).trim();
        match last.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && ln == 0 => continue, // header
            Err(_) => return Err(ConfigError(format!("{path}:{}: not a number: '{last}'", ln + 1))),
        }
    }
    if out.len() != len {
        return Err(ConfigError(format!("{path} has {} values, the grid has {len} nodes", out.len())));
    }
    Ok(out)
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn grid_json(domain: &Domain) -> Value {
    let r = domain.grid().resolution;
    let res = match domain.grid().layout {
        Layout::Curve { nodes } => json!({ "intervals": nodes - 1 }),
        Layout::Polar { rings, angles } => json!({ "rings": rings, "angles": angles }),
    };
    json!({
        "scheme": domain.scheme().name(),
        "resolution": res,
        "primary": r.primary,
        "secondary": r.secondary,
        "nodes": domain.len(),
        "spacing": domain.grid().spacing(),
    })
}

fn admissibility_json(b: &CapBody<'_>) -> Value {
    let a = b.admissibility();
    json!({
        "admissible": a.admissible,
        "robin_residual": a.robin_residual,
        "robin_tolerance": a.robin_tolerance,
        "min_eigenvalue": a.min_eigenvalue,
        "min_value": a.min_value,
    })
}

fn measures_json(b: &CapBody<'_>, mc: Option<(usize, u64)>) -> Result<Value, anicap::Error> {
    let r = measures::measure_report(b, mc)?;
    let s = r.slacks;
    Ok(json!({
        "quermassintegrals": r.quermass,
        "volume": r.volume,
        "volume_mc": r.volume_mc.map(|m| json!({ "volume": m.volume, "std_error": m.std_error, "samples": m.samples })),
        "inradius": r.inradius,
        "anisotropic_area": r.anisotropic_area,
        "bottom_face_area": r.bottom_face_area,
        "slacks": {
            "inradius_bound": s.inradius_bound,
            "inradius_bound_derived": s.inradius_bound_derived,
            "quermass_inradius": s.quermass_inradius,
            "isoperimetric": s.isoperimetric,
            "area_consistency": s.area_consistency,
        },
    }))
}

/// `solution.csv` plus the geometry export of an admissible body.
fn body_files(b: &CapBody<'_>, extra: &[(&str, &[f64])]) -> (Vec<(String, String)>, Value) {
    let d = b.domain();
    let n = d.n();
    let mut csv = String::from("node,boundary,u1,u2");
    for c in 1..=n + 1 {
        let _ = write!(csv, ",xi{c}");
    }
    csv.push_str(",s,det_tau,tau_min");
    for (name, _) in extra {
        let _ = write!(csv, ",{name}");
    }
    csv.push('\n');
    let det = b.det_tau();
    for (i, node) in d.grid().nodes.iter().enumerate() {
        let _ = write!(csv, "{i},{},{:e},{:e}", u8::from(node.boundary), node.coords[0], node.coords[1]);
        for c in 0..=n {
            let _ = write!(csv, ",{:e}", node.point[c]);
        }
        let _ = write!(csv, ",{:e},{:e},{:e}", b.values()[i], det[i], b.tau().eigen[i][0]);
        for (_, v) in extra {
            let _ = write!(csv, ",{:e}", v[i]);
        }
        csv.push('\n');
    }
    let mut files = vec![("solution.csv".to_string(), csv)];
    let geometry = match b.reconstruct() {
        Ok(pts) => {
            let (name, text) = if n == 1 { ("curve.csv", curve_csv(&pts)) } else { ("surface.obj", surface_obj(d, &pts)) };
            files.push((name.into(), text));
            json!(name)
        }
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    (files, geometry)
}

fn curve_csv(pts: &[[f64; 3]]) -> String {
    let mut s = String::from("x,y\n");
    for p in pts {
        let _ = writeln!(s, "{:e},{:e}", p[0], p[1]);
    }
    s
}

/// Closed mesh: the reconstructed surface, an inner polygon over the
/// shifted pole and the flat bottom face.
fn surface_obj(d: &Domain, pts: &[[f64; 3]]) -> String {
    let (rings, angles) = match d.grid().layout {
        Layout::Polar { rings, angles } => (rings, angles),
        Layout::Curve { .. } => unreachable!(),
    };
    let mut s = String::from("# anicap reconstructed capillary surface\n");
    for p in pts {
        let _ = writeln!(s, "v {:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    let v = |i: usize, j: usize| i * angles + (j % angles) + 1;
    s.push_str("f");
    for j in 0..angles {
        let _ = write!(s, " {}", v(0, j));
    }
    s.push('\n');
    for i in 0..rings - 1 {
        for j in 0..angles {
            let _ = writeln!(s, "f {} {} {}", v(i, j), v(i + 1, j), v(i + 1, j + 1));
            let _ = writeln!(s, "f {} {} {}", v(i, j), v(i + 1, j + 1), v(i, j + 1));
        }
    }
    s.push_str("f");
    for j in (0..angles).rev() {
        let _ = write!(s, " {}", v(rings - 1, j));
    }
    s.push('\n');
    s
}

fn run_solve(cfg: &RunConfig, d: &Domain) -> Result<Outcome, RunError> {
    let sc = cfg.solve.as_ref().expect("validated");
    let f = match (&sc.f, &sc.f_file) {
        (_, Some(path)) => read_nodal(path, d.len())?,
        (Some(expr), None) => eval_field(d, expr)?,
        (None, None) => vec![1.0; d.len()],
    };
    let tilde = if sc.formulation == FormulationChoice::Translated { Some(d.tilde()?) } else { None };
    let mut spec = SolveSpec::new(d, sc.p, f.clone());
    if let Some(t) = &tilde {
        spec = spec.translated(t);
    }
    if let Some(t) = sc.tol {
        spec.tol = t;
    }
    if let Some(m) = sc.max_iter {
        spec.max_iter = m;
    }
    if let Some(init) = &sc.initial {
        spec = spec.with_initial(eval_field(d, init)?);
    }
    let res = solver::solve(&spec)?;
    let b = &res.body;
    let ell = d.ell();
    let dg = &res.diagnostics;
    let trace: Vec<Value> = res
        .trace
        .iter()
        .map(|h| json!({ "t": h.t, "accepted": h.accepted, "iterations": h.iterations(), "residuals": h.residuals, "min_eigenvalue": h.min_eigenvalue }))
        .collect();
    // the data the discrete equation actually carries: projected and
    // shifted by the kernel multipliers for p = 1, scaled by η for p = n+1
    let mut eq_data = if sc.p == 1.0 { solver::compat_project(d, &f)?.f } else { f.clone() };
    for (a, lam) in dg.multipliers.iter().enumerate() {
        for (v, k) in eq_data.iter_mut().zip(d.kernel(a)) {
            *v -= lam * k;
        }
    }
    if let Some(eta) = res.eta {
        eq_data.iter_mut().for_each(|v| *v *= eta);
    }
    let mut result = json!({
        "grid": grid_json(d),
        "p": sc.p,
        "formulation": match spec.formulation { Formulation::Original => "original", Formulation::Translated => "translated" },
        "even": spec.even,
        "sup_error_vs_ell": sup_dist(b.values(), &ell),
        "eta": res.eta,
        "equation_defect": solver::equation_defect(d, sc.p, &eq_data, b.values()),
        "diagnostics": {
            "final_residual": dg.final_residual,
            "tolerance": dg.tolerance,
            "robin_residual": dg.robin_residual,
            "gauge_defect": dg.gauge_defect,
            "compat_defect": dg.compat_defect,
            "compat_removed": dg.compat_removed,
            "kernel_removed": dg.kernel_removed,
            "multipliers": dg.multipliers,
            "min_eigenvalue_history": dg.min_eigenvalue_history,
            "c0": dg.c0.map(|c| json!({ "lower": c.lower, "upper": c.upper, "lower_slack": c.lower_slack, "upper_slack": c.upper_slack, "holds": c.holds })),
        },
        "homotopy": trace,
        "admissibility": admissibility_json(b),
        "body": {
            "min": b.min_value(),
            "max": b.values().iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)),
            "integral": d.integrate(b.values()),
        },
    });
    result["measures"] = measures_json(b, None).unwrap_or_else(|e| json!({ "skipped": e.to_string() }));
    let (files, geometry) = body_files(b, &[("f", &f), ("ell", &ell)]);
    result["geometry"] = geometry;
    Ok(Outcome { result, files, status: 0 })
}

fn run_measures(cfg: &RunConfig, d: &Domain) -> Result<Outcome, RunError> {
    let mc = cfg.measures.clone().unwrap_or(MeasuresConfig {
        body: "ell".into(),
        mc_samples: 0,
        mc_seed: None,
        speed: "ell".into(),
        variational_step: 1e-3,
    });
    let b = CapBody::new(d, eval_field(d, &mc.body)?);
    let adm = admissibility_json(&b);
    b.require_admissible()?;
    let samples = if mc.mc_samples > 0 { Some((mc.mc_samples, mc.mc_seed.unwrap_or(cfg.seed))) } else { None };
    let mut result = json!({ "grid": grid_json(d), "admissibility": adm, "measures": measures_json(&b, samples)? });
    let n = d.n() as i32;
    let speed = eval_field(d, &mc.speed)?;
    let mut var = Vec::new();
    for k in -1..n {
        var.push(match measures::variational_check(&b, &speed, k, mc.variational_step) {
            Ok(v) => json!({ "k": k, "lhs": v.lhs, "rhs": v.rhs, "relerr": v.relerr }),
            Err(e) => json!({ "k": k, "skipped": e.to_string() }),
        });
    }
    result["variational"] = json!(var);
    let area = measures::area_measure_density(&b, 1.0, 0)?;
    result["area_measure"] = json!({
        "total": d.integrate(&area.density),
        "normalization_defect": area.normalization_defect,
        "compat_defect": solver::compat_defect(d, &area.density),
    });
    let curv: Vec<Value> = (0..=d.n())
        .map(|k| {
            let h = measures::hk_curvature(&b, k).unwrap_or_default();
            json!({ "k": k, "min": h.iter().fold(f64::INFINITY, |m, v| m.min(*v)), "max": h.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) })
        })
        .collect();
    result["curvatures"] = json!(curv);
    let (files, geometry) = body_files(&b, &[("area_density", &area.density)]);
    result["geometry"] = geometry;
    Ok(Outcome { result, files, status: 0 })
}

fn run_psum(cfg: &RunConfig, d: &Domain) -> Result<Outcome, RunError> {
    let pc = cfg.psum.as_ref().expect("validated");
    let k = CapBody::new(d, eval_field(d, &pc.k)?);
    let l = CapBody::new(d, eval_field(d, &pc.l)?);
    k.require_admissible()?;
    l.require_admissible()?;
    let s = body::psum(pc.a, &k, pc.b, &l, pc.p)?;
    let m = pc.oracle_t;
    let ts: Vec<f64> = (0..m).map(|i| if m == 1 { 0.5 } else { i as f64 / (m - 1) as f64 }).collect();
    let rings = if d.n() == 1 { 2 } else { 4 };
    let cloud = body::pointcloud_psum_oracle(pc.a, &k.surface_samples(rings)?, pc.b, &l.surface_samples(rings)?, pc.p, &ts);
    let h = body::support_of_points(d, &cloud);
    let mut result = json!({
        "grid": grid_json(d),
        "a": pc.a, "b": pc.b, "p": pc.p,
        "admissibility": admissibility_json(&s),
        "volumes": { "k": measures::volume(&k)?, "l": measures::volume(&l)?, "sum": measures::volume(&s).ok() },
        "oracle": { "points": cloud.len(), "support_sup_deviation": sup_dist(&h, s.values()) },
    });
    if (pc.a + pc.b - 1.0).abs() < 1e-12 {
        result["brunn_minkowski_slack"] = json!(measures::brunn_minkowski_slack(&k, &l, pc.p, pc.b).ok());
    }
    let (files, geometry) = body_files(&s, &[("k", k.values()), ("l", l.values())]);
    result["geometry"] = geometry;
    Ok(Outcome { result, files, status: 0 })
}

fn check_norm(cfg: &RunConfig, norm: &anicap::MinkowskiNorm) -> Result<Outcome, RunError> {
    let (lo, hi) = anicap::wulff::admissible_interval(norm);
    let sym = norm.symmetry();
    let det = norm.detect_symmetry();
    let d = norm.dim();
    let mut hom: f64 = 0.0;
    let mut euler: f64 = 0.0;
    for y in anicap::norm::sphere_sample(d, 200) {
        let f = norm.eval(&y);
        let y3: [f64; 3] = [2.5 * y[0], 2.5 * y[1], 2.5 * y[2]];
        hom = hom.max((norm.eval(&y3) - 2.5 * f).abs() / f);
        let psi = norm.cahn_hoffman(&y);
        euler = euler.max((psi[0] * y[0] + psi[1] * y[1] + psi[2] * y[2] - f).abs());
    }
    let result = json!({
        "family": norm.family_name(),
        "dim": d,
        "n": cfg.n,
        "convex": true,
        "min_af_eigenvalue": norm.min_af(),
        "declared_symmetry": { "horizontal": sym.horizontal, "vertical": sym.vertical },
        "detected_symmetry": { "horizontal": det.horizontal, "vertical": det.vertical },
        "admissible_omega0": [lo, hi],
        "homogeneity_defect": hom,
        "euler_defect": euler,
    });
    Ok(Outcome { result, files: Vec::new(), status: 0 })
}

fn check_condition(cap: &CapillaryCap) -> Result<Outcome, RunError> {
    let r = cap.condition_check()?;
    let result = json!({
        "omega0": cap.omega0(),
        "e_f": &cap.e_f()[..cap.dim()],
        "holds": r.holds,
        "margin": r.margin,
        "max_q_tilde": r.max_q_tilde,
        "min_boundary_curvature": r.min_boundary_curvature,
        "formula_deviation": r.formula_deviation,
        "curvature_deviation": r.curvature_deviation,
        "samples": r.samples,
    });
    Ok(Outcome { result, files: Vec::new(), status: 0 })
}

fn run_verify(cfg: &RunConfig, cap: &CapillaryCap) -> Result<Outcome, RunError> {
    let mut vc = verify::VerifyConfig::new(cfg.grid.scheme.scheme(), cfg.resolution()?, cfg.seed);
    if let Some(v) = &cfg.verify {
        vc.corrupt_q = v.corrupt_q;
        if let Some(s) = &v.spectral_cap {
            vc.spectral_cap = parse_resolution(s, 2)?;
        }
    }
    let rep = verify::run_suite(cap, &vc);
    let checks: Vec<Value> = rep
        .checks
        .iter()
        .map(|c| {
            json!({
                "id": c.id(),
                "measured": c.measured,
                "tolerance": c.tolerance,
                "comparison": match c.comparison { Comparison::AtMost => "at_most", Comparison::AtLeast => "at_least" },
                "passed": c.passed,
                "note": c.note,
            })
        })
        .collect();
    let failed = rep.failures().count();
    let result = json!({
        "passed": rep.passed(),
        "total": rep.checks.len(),
        "failed": failed,
        "failures": rep.failures().map(|c| c.id()).collect::<Vec<_>>(),
        "checks": checks,
    });
    Ok(Outcome { result, files: Vec::new(), status: if rep.passed() { 0 } else { 1 } })
}

/// Writes `report.json` and the artifacts into `dir`.
pub fn write_outputs(dir: &Path, report: &Value, files: &[(String, String)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(dir.join("report.json"), text)?;
    for (name, contents) in files {
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(())
}
