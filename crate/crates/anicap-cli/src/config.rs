//! Run configuration: a TOML file with one block per concern.

use std::path::{Path, PathBuf};

use anicap::{MinkowskiNorm, Monomial, NormFamily, Resolution, Scheme, Symmetry};
use serde::{Deserialize, Serialize};

use crate::expr::Expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Solve,
    Measures,
    Psum,
    CheckNorm,
    CheckCondition,
    Verify,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Measures => "measures",
            Task::Psum => "psum",
            Task::CheckNorm => "check-norm",
            Task::CheckCondition => "check-condition",
            Task::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub n: usize,
    #[serde(default)]
    pub omega0: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub norm: NormConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<MeasuresConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psum: Option<PsumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Isotropic,
    Ellipsoidal,
    Perturbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryChoice {
    /// Detected from samples of the norm.
    #[default]
    Auto,
    Both,
    Horizontal,
    Vertical,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub family: Family,
    /// Row-major `(n+1)×(n+1)` matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub symmetry: SymmetryChoice,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coef: f64,
    pub exps: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    #[default]
    Fd,
    PlainFd,
    Spectral,
}

impl SchemeChoice {
    pub fn scheme(self) -> Scheme {
        match self {
            SchemeChoice::Fd => Scheme::FiniteDifference,
            SchemeChoice::PlainFd => Scheme::PlainFiniteDifference,
            SchemeChoice::Spectral => Scheme::Spectral,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub scheme: SchemeChoice,
    /// `N` or `NxM`; defaults to `200` for curves and `32x64` for surfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationChoice {
    #[default]
    Original,
    Translated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub p: f64,
    /// Data as an expression; exclusive with `f_file`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Nodal data, one value per line in node order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_file: Option<String>,
    #[serde(default)]
    pub formulation: FormulationChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// Initial body expression: Newton at `t = 1` instead of continuation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuresConfig {
    #[serde(default = "default_body")]
    pub body: String,
    #[serde(default)]
    pub mc_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_seed: Option<u64>,
    /// Speed of the first-variation check.
    #[serde(default = "default_body")]
    pub speed: String,
    #[serde(default = "default_step")]
    pub variational_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsumConfig {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub k: String,
    pub l: String,
    /// Number of `t` values of the point-cloud oracle.
    #[serde(default = "default_oracle")]
    pub oracle_t: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    /// Test hook: perturbs every `Q` component of the metric.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt_q: Option<f64>,
    /// Largest spectral grid of the measure checks, `NxM`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_cap: Option<String>,
}

fn default_body() -> String {
    "ell".into()
}

fn default_step() -> f64 {
    1e-3
}

fn default_oracle() -> usize {
    33
}

/// Invalid or incomplete configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// `N`, `NxM` or `N×M`.
pub fn parse_resolution(s: &str, n: usize) -> Result<Resolution, ConfigError> {
    let parts: Vec<&str> = s.split(['x', 'X', '×']).map(str::trim).collect();
    let nums = parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| ConfigError(format!("bad resolution '{s}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    match (n, nums.as_slice()) {
        (1, [m]) => Ok(Resolution::curve(*m)),
        (1, [m, 1]) => Ok(Resolution::curve(*m)),
        (2, [m]) => Ok(Resolution::polar(*m, *m)),
        (2, [r, a]) => Ok(Resolution::polar(*r, *a)),
        _ => bad(format!("resolution '{s}' does not fit n = {n}")),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(format!("cannot parse config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        // relative data files are resolved against the config's directory
        if let Some(s) = cfg.solve.as_mut() {
            if let Some(f) = &s.f_file {
                let p = Path::new(f);
                if p.is_relative() {
                    if let Some(dir) = path.parent() {
                        s.f_file = Some(dir.join(p).to_string_lossy().into_owned());
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn resolution(&self) -> Result<Resolution, ConfigError> {
        match &self.grid.resolution {
            Some(s) => parse_resolution(s, self.n),
            None if self.n == 1 => Ok(Resolution::curve(200)),
            None => Ok(Resolution::polar(32, 64)),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.out.clone().unwrap_or_else(|| "anicap-out".into()))
    }

    /// Checks ranges and that the block needed by `task` is present.
    pub fn validate(&self, task: Task) -> Result<(), ConfigError> {
        if self.n != 1 && self.n != 2 {
            return bad(format!("n must be 1 or 2, got {}", self.n));
        }
        if !self.omega0.is_finite() || self.omega0.abs() >= 1.0 {
            return bad("omega0 must lie in (-1, 1)");
        }
        let res = self.resolution()?;
        if self.n == 2 && res.secondary % 2 == 1 {
            return bad("the angular resolution must be even");
        }
        self.norm_block_check()?;
        let n = self.n;
        let expr = |what: &str, s: &str| Expr::parse(s, n).map(|_| ()).map_err(|e| ConfigError(format!("{what}: {e}")));
        match task {
            Task::Solve => {
                let s = self.solve.as_ref().ok_or_else(|| ConfigError("task solve needs a [solve] block".into()))?;
                if !(s.p >= 1.0) || !s.p.is_finite() {
                    return bad("solve.p must be a finite number >= 1");
                }
                match (&s.f, &s.f_file) {
                    (Some(_), Some(_)) => return bad("give either solve.f or solve.f_file, not both"),
                    (Some(f), None) => expr("solve.f", f)?,
                    (None, Some(file)) => {
                        if !Path::new(file).is_file() {
                            return bad(format!("solve.f_file {file} does not exist"));
                        }
                    }
                    (None, None) => {}
                }
                if let Some(i) = &s.initial {
                    expr("solve.initial", i)?;
                }
                if let Some(t) = s.tol {
                    if !(t > 0.0) {
                        return bad("solve.tol must be positive");
                    }
                }
            }
            Task::Measures => {
                if let Some(m) = &self.measures {
                    expr("measures.body", &m.body)?;
                    expr("measures.speed", &m.speed)?;
                    if !(m.variational_step > 0.0) {
                        return bad("measures.variational_step must be positive");
                    }
                    if m.mc_samples > 100_000_000 {
                        return bad("measures.mc_samples is capped at 1e8");
                    }
                }
            }
            Task::Psum => {
                let p = self.psum.as_ref().ok_or_else(|| ConfigError("task psum needs a [psum] block".into()))?;
                if !(p.a >= 0.0 && p.b >= 0.0 && p.a + p.b > 0.0) {
                    return bad("psum.a and psum.b must be nonnegative and not both zero");
                }
                if !(p.p >= 1.0) || !p.p.is_finite() {
                    return bad("psum.p must be a finite number >= 1");
                }
                expr("psum.k", &p.k)?;
                expr("psum.l", &p.l)?;
                if p.oracle_t == 0 {
                    return bad("psum.oracle_t must be positive");
                }
            }
            Task::Verify => {
                if let Some(v) = &self.verify {
                    if let Some(s) = &v.spectral_cap {
                        parse_resolution(s, 2)?;
                    }
                }
            }
            Task::CheckNorm | Task::CheckCondition => {}
        }
        Ok(())
    }

    fn norm_block_check(&self) -> Result<(), ConfigError> {
        let d = self.n + 1;
        let nb = &self.norm;
        match nb.family {
            Family::Isotropic => {
                if nb.matrix.is_some() || nb.epsilon.is_some() || !nb.terms.is_empty() {
                    return bad("an isotropic norm takes no matrix, epsilon or terms");
                }
            }
            Family::Ellipsoidal | Family::Perturbed => {
                let m = nb.matrix.as_ref().ok_or_else(|| ConfigError("norm.matrix is required".into()))?;
                if m.len() != d * d {
                    return bad(format!("norm.matrix needs {} entries, got {}", d * d, m.len()));
                }
                if m.iter().any(|v| !v.is_finite()) {
                    return bad("norm.matrix has non-finite entries");
                }
            }
        }
        if nb.family == Family::Perturbed {
            if nb.epsilon.map_or(true, |e| !e.is_finite()) {
                return bad("a perturbed norm needs a finite norm.epsilon");
            }
            for t in &nb.terms {
                if t.exps.len() != d {
                    return bad(format!("every term needs {d} exponents"));
                }
                if !t.coef.is_finite() {
                    return bad("term coefficients must be finite");
                }
            }
        } else if nb.family == Family::Ellipsoidal && (nb.epsilon.is_some() || !nb.terms.is_empty()) {
            return bad("an ellipsoidal norm takes no epsilon or terms");
        }
        Ok(())
    }

    /// The norm and the symmetry it was declared with.
    pub fn build_norm(&self) -> anicap::Result<MinkowskiNorm> {
        let d = self.n + 1;
        let nb = &self.norm;
        let mut m = [[0.0; 3]; 3];
        if let Some(v) = &nb.matrix {
            for i in 0..d {
                for j in 0..d {
                    m[i][j] = v[i * d + j];
                }
            }
        }
        let family = match nb.family {
            Family::Isotropic => NormFamily::Isotropic,
            Family::Ellipsoidal => NormFamily::Ellipsoidal { m },
            Family::Perturbed => NormFamily::Perturbed {
                m,
                eps: nb.epsilon.unwrap_or(0.0),
                terms: nb
                    .terms
                    .iter()
                    .map(|t| {
                        let mut exps = [0; 3];
                        exps[..d].copy_from_slice(&t.exps);
                        Monomial { coef: t.coef, exps }
                    })
                    .collect(),
            },
        };
        let sym = match nb.symmetry {
            SymmetryChoice::Both => Symmetry::both(),
            SymmetryChoice::Horizontal => Symmetry { horizontal: true, vertical: false },
            SymmetryChoice::Vertical => Symmetry { horizontal: false, vertical: true },
            SymmetryChoice::None => Symmetry::none(),
            SymmetryChoice::Auto => {
                let plain = MinkowskiNorm::new(d, family.clone(), Symmetry::none())?;
                plain.detect_symmetry()
            }
        };
        MinkowskiNorm::new(d, family, sym)
    }
}
