//! Problem files, grid CSV/PGM output, JSON reports.
//!
//! A problem file is JSON:
//!
//! ```json
//! {
//!   "domain":   { "nx": 17, "ny": 17, "h": 0.0625, "origin": [0, 0], "shape": "rectangle" },
//!   "boundary": { "kind": "expression", "expr": "x + 0.5 * y" },
//!   "exponent": { "family": "gaussian", "base": 2, "amplitude": 1, "center": [0.5, 0.5], "width": 0.25 },
//!   "epsilon": 0.1,
//!   "tolerances": { "residual_tol": 1e-8 },
//!   "scheme": { "stencil": "directional", "log_magnitude": "upwind-log" }
//! }
//! ```
//!
//! See `problems/README.md` in the crate for every field.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exponent::{exponent_from_family, exponent_from_samples, ExponentFamily, ExponentField};
use crate::grid::{BoundaryData, Domain, GridFunction, Shape};
use crate::operator::{Probe, SchemeOptions, SmoothProbe};
use crate::solvers::{k_schedule_up_to, Problem, Tolerances};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    #[serde(default)]
    pub origin: [f64; 2],
    #[serde(default = "rectangle")]
    pub shape: Shape,
}

fn rectangle() -> Shape {
    Shape::Rectangle
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundarySpec {
    Constant { value: f64 },
    /// Expression in `x` and `y` (evalexpr syntax: `math::sin(x)`, `x^2`;
    /// write `0.5`, not `1/2`, which is integer division).
    Expression { expr: String },
    /// CSV with columns `x,y,value` covering every boundary node.
    Csv { path: PathBuf },
    /// Any built-in probe: `affine`, `cone`, `aronsson`, `halfsquare`,
    /// `exponential`, `trig`.
    #[serde(untagged)]
    Probe(Probe),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ExponentSpec {
    Constant {
        value: f64,
    },
    Affine {
        a: [f64; 2],
        b: f64,
    },
    Gaussian {
        base: f64,
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
    /// Expression for `p` in `x` and `y`; `grad ln p` by differences.
    Expression {
        expr: String,
    },
    /// CSV with columns `x,y,p` covering every node of the array.
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub residual_tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub damping: Option<f64>,
    pub relaxation: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Direct,
    Variational,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackSpec {
    pub center: Option<[f64; 2]>,
    pub radii: Option<Vec<f64>>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub domain: DomainSpec,
    pub boundary: BoundarySpec,
    pub exponent: ExponentSpec,
    #[serde(default)]
    pub epsilon: f64,
    /// Epsilon list for sandwich runs.
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub k_schedule: Option<Vec<f64>>,
    /// Cap on `k p_max` for the default schedule.
    #[serde(default)]
    pub kp_max: Option<f64>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub scheme: SchemeOptions,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub harnack: Option<HarnackSpec>,
}

/// A parsed problem file with its directory (for relative paths) and hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ProblemConfig,
    pub base_dir: PathBuf,
    /// SHA-256 of the file contents, hex.
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let bytes = fs::read(path)?;
    let config: ProblemConfig = serde_json::from_slice(&bytes)?;
    Ok(LoadedConfig {
        config,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        hash: sha256_hex(&bytes),
    })
}

pub fn parse_config(text: &str) -> Result<ProblemConfig> {
    Ok(serde_json::from_str(text)?)
}

/// Compiled `f(x, y)` expression.
pub struct Expression {
    tree: evalexpr::Node<DefaultNumericTypes>,
    source: String,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Expression(format!("{source}: {e}")))?;
        Ok(Expression {
            tree,
            source: source.to_string(),
        })
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        let bad = |e: evalexpr::EvalexprError| Error::Expression(format!("{}: {e}", self.source));
        ctx.set_value("x".into(), Value::Float(x[0])).map_err(bad)?;
        ctx.set_value("y".into(), Value::Float(x[1])).map_err(bad)?;
        self.tree.eval_number_with_context(&ctx).map_err(bad)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ProblemConfig {
    pub fn build_domain(&self) -> Result<Arc<Domain>> {
        let d = &self.domain;
        Domain::new(d.nx, d.ny, d.h, d.origin, d.shape)
    }

    pub fn build_boundary(&self, domain: &Arc<Domain>, base: &Path) -> Result<BoundaryData> {
        match &self.boundary {
            BoundarySpec::Constant { value } => BoundaryData::from_fn(domain, |_| *value),
            BoundarySpec::Expression { expr } => {
                let e = Expression::parse(expr)?;
                let values = domain
                    .boundary()
                    .iter()
                    .map(|&idx| e.eval(domain.position(idx)))
                    .collect::<Result<Vec<f64>>>()?;
                BoundaryData::new(domain, values)
            }
            BoundarySpec::Csv { path } => read_boundary_csv(&resolve(base, path), domain),
            BoundarySpec::Probe(p) => BoundaryData::from_fn(domain, |x| p.value(x)),
        }
    }

    pub fn build_exponent(&self, domain: &Arc<Domain>, base: &Path) -> Result<ExponentField> {
        match &self.exponent {
            ExponentSpec::Constant { value } => {
                exponent_from_family(domain, &ExponentFamily::Constant { value: *value })
            }
            ExponentSpec::Affine { a, b } => exponent_from_family(domain, &ExponentFamily::Affine { a: *a, b: *b }),
            ExponentSpec::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => exponent_from_family(
                domain,
                &ExponentFamily::Gaussian {
                    base: *base,
                    amplitude: *amplitude,
                    center: *center,
                    width: *width,
                },
            ),
            ExponentSpec::Expression { expr } => {
                let e = Expression::parse(expr)?;
                let p = (0..domain.len())
                    .map(|idx| e.eval(domain.position(idx)))
                    .collect::<Result<Vec<f64>>>()?;
                exponent_from_samples(domain, p)
            }
            ExponentSpec::Csv { path } => read_exponent_csv(&resolve(base, path), domain),
        }
    }

    pub fn build_problem(&self, base: &Path) -> Result<Problem> {
        let domain = self.build_domain()?;
        let boundary = self.build_boundary(&domain, base)?;
        let exponent = self.build_exponent(&domain, base)?;
        let mut problem = Problem::new(boundary, exponent)?;
        let t = &self.tolerances;
        let defaults = problem.tolerances;
        let residual_tol = t.residual_tol.unwrap_or(defaults.residual_tol);
        problem = problem.with_tolerances(Tolerances {
            residual_tol,
            step_tol: t.step_tol.unwrap_or(1e-3 * residual_tol),
            max_iters: t.max_iters.unwrap_or(defaults.max_iters),
            damping: t.damping.unwrap_or(defaults.damping),
            relaxation: t.relaxation.unwrap_or(defaults.relaxation),
        });
        if let Some(k) = &self.k_schedule {
            problem = problem.with_k_schedule(k.clone())?;
        } else if let Some(cap) = self.kp_max {
            let schedule = k_schedule_up_to(&problem.exponent, cap);
            problem = problem.with_k_schedule(schedule)?;
        }
        problem = problem.with_epsilon(self.epsilon)?.with_scheme(self.scheme);
        Ok(problem)
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::param(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    atomic_write(path, &text)
}

/// CSV with one row per record; headers from the field names.
pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    atomic_write(path, &bytes)
}

/// `x,y,value` for every active node, 17 significant digits.
pub fn solution_csv(u: &GridFunction) -> Result<Vec<u8>> {
    let d = u.domain();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "value"])?;
    for idx in 0..d.len() {
        if !d.is_active(idx) {
            continue;
        }
        let x = d.position(idx);
        w.write_record([
            format!("{:.16e}", x[0]),
            format!("{:.16e}", x[1]),
            format!("{:.16e}", u.get(idx)),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_solution_csv(path: &Path, u: &GridFunction) -> Result<()> {
    atomic_write(path, &solution_csv(u)?)
}

/// Plain PGM, values scaled min-max over active nodes to 0..255, top row
/// first; nodes outside the domain are black.
pub fn pgm(u: &GridFunction) -> Vec<u8> {
    let d = u.domain();
    let (lo, hi) = u.active_range();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P2\n{} {}\n255\n", d.nx(), d.ny());
    for j in (0..d.ny()).rev() {
        let row: Vec<String> = (0..d.nx())
            .map(|i| {
                let idx = j * d.nx() + i;
                if d.is_active(idx) {
                    (((u.get(idx) - lo) / span) * 255.0).round().clamp(0.0, 255.0).to_string()
                } else {
                    "0".to_string()
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_pgm(path: &Path, u: &GridFunction) -> Result<()> {
    atomic_write(path, &pgm(u))
}

/// Index of the node at `x`, if `x` is a node of the array.
fn node_at(domain: &Domain, x: [f64; 2]) -> Option<usize> {
    let o = domain.origin();
    let h = domain.h();
    let fi = (x[0] - o[0]) / h;
    let fj = (x[1] - o[1]) / h;
    let (i, j) = (fi.round(), fj.round());
    if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 || i < 0.0 || j < 0.0 {
        return None;
    }
    let (i, j) = (i as usize, j as usize);
    (i < domain.nx() && j < domain.ny()).then(|| j * domain.nx() + i)
}

/// Reads `x,y,<value>` rows and places them on nodes of the array.
fn read_nodal_csv(path: &Path, domain: &Domain) -> Result<Vec<Option<f64>>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = vec![None; domain.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::param(format!(
                "{}: row {} has {} columns, expected 3",
                path.display(),
                line + 2,
                rec.len()
            )));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k].parse::<f64>().map_err(|e| {
                Error::param(format!("{}: row {}: {e}", path.display(), line + 2))
            })
        };
        let x = [num(0)?, num(1)?];
        let idx = node_at(domain, x).ok_or_else(|| {
            Error::param(format!(
                "{}: ({}, {}) is not a grid node",
                path.display(),
                x[0],
                x[1]
            ))
        })?;
        out[idx] = Some(num(2)?);
    }
    Ok(out)
}

pub fn read_exponent_csv(path: &Path, domain: &Arc<Domain>) -> Result<ExponentField> {
    let vals = read_nodal_csv(path, domain)?;
    let p = vals
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            v.ok_or_else(|| {
                let n = domain.node(idx);
                Error::param(format!("{}: no exponent value for node ({}, {})", path.display(), n.i, n.j))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    exponent_from_samples(domain, p)
}

pub fn read_boundary_csv(path: &Path, domain: &Arc<Domain>) -> Result<BoundaryData> {
    let vals = read_nodal_csv(path, domain)?;
    let values = domain
        .boundary()
        .iter()
        .map(|&idx| {
            vals[idx].ok_or_else(|| {
                let n = domain.node(idx);
                Error::param(format!("{}: no value for boundary node ({}, {})", path.display(), n.i, n.j))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    BoundaryData::new(domain, values)
}

/// Reads a solution CSV written by [`write_solution_csv`] back onto `domain`.
pub fn read_solution_csv(path: &Path, domain: &Arc<Domain>) -> Result<GridFunction> {
    let vals = read_nodal_csv(path, domain)?;
    let mut values = vec![0.0; domain.len()];
    for idx in 0..domain.len() {
        match vals[idx] {
            Some(v) => values[idx] = v,
            None if domain.is_active(idx) => {
                let n = domain.node(idx);
                return Err(Error::param(format!("{}: missing node ({}, {})", path.display(), n.i, n.j)));
            }
            None => {}
        }
    }
    GridFunction::from_values(domain, values)
}
