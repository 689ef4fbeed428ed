use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    caccioppoli_check, check_comparison, convergence_order_with, ConvergenceSetup, CutoffFunction, FullOperator,
};
use crate::error::Result;
use crate::exponent::{exponent_from_family, ExponentField};
use crate::gadgets::{check_g_properties, monotonicity_inequality_gap, GFunctionParams};
use crate::grid::{make_domain, BoundaryData, GridFunction, Shape};
use crate::operator::{normalized_inf_discrete_with, Probe, SchemeOptions};
use crate::solvers::{energy, energy_gradient, solve_direct, SourceSign};
use crate::suite;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub fuzz_cases: usize,
    pub reduction_cases: usize,
    pub comparison_pairs: usize,
    pub scheme: SchemeOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            fuzz_cases: 100_000,
            reduction_cases: 200,
            comparison_pairs: 5,
            scheme: SchemeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            metrics: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        if self.failures.len() < 20 {
            self.failures.push(msg);
        }
    }

    fn from_error(name: &str, e: crate::Error) -> Self {
        let mut c = CheckResult::new(name);
        c.fail(e.to_string());
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Runs the property suite with the library's discrete operator.
pub fn verify_suite(opts: &VerifyOptions) -> VerifyReport {
    verify_suite_with(opts, &crate::operator::full_operator_discrete_with)
}

/// Runs the property suite with `full_op` standing in for the discrete
/// variable-exponent operator in the reduction and consistency checks.
pub fn verify_suite_with(opts: &VerifyOptions, full_op: &FullOperator) -> VerifyReport {
    // one independent stream per check, so adding cases to one check does
    // not reshuffle the others
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k));
    let checks = vec![
        inequality_fuzz(&mut rng(1), opts.fuzz_cases),
        g_properties(&mut rng(2)),
        run("operator-reduction", || reduction(&mut rng(3), opts.reduction_cases, &opts.scheme, full_op)),
        run("operator-consistency", || consistency(&opts.scheme, full_op)),
        run("comparison", || comparison(&mut rng(4), opts.comparison_pairs)),
        run("caccioppoli", caccioppoli),
        run("energy-gradient", || gradient_check(&mut rng(5))),
    ];
    VerifyReport {
        seed: opts.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::from_error(name, e))
}

fn inequality_fuzz<R: Rng>(rng: &mut R, cases: usize) -> CheckResult {
    let mut c = CheckResult::new("inequality-fuzz");
    let mut min_gap = f64::INFINITY;
    for case in 0..cases {
        let dim = rng.random_range(1..=4);
        let q = rng.random_range(2.0..=20.0);
        let mut a = unit_ball_point(rng, dim);
        let b = unit_ball_point(rng, dim);
        match case % 50 {
            0 => a = b.clone(),
            1 => a.iter_mut().for_each(|v| *v = 0.0),
            2 => a = b.iter().map(|v| -v).collect(),
            _ => {}
        }
        match monotonicity_inequality_gap(&a, &b, q) {
            Ok(gap) => {
                min_gap = min_gap.min(gap);
                if !(gap >= -1e-12) {
                    c.fail(format!("gap {gap:e} at q = {q}, a = {a:?}, b = {b:?}"));
                }
            }
            Err(e) => c.fail(e.to_string()),
        }
    }
    c.metric("cases", cases as f64);
    c.metric("min_gap", min_gap);
    c
}

/// Uniform direction, uniform radius in `[0, 1]`: keeps both sides of the
/// inequality below 4 for every `q`, so an absolute tolerance is meaningful.
pub(crate) fn unit_ball_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            let r: f64 = rng.random_range(0.0..=1.0);
            return v.iter().map(|x| x / n * r).collect();
        }
    }
}

fn g_properties<R: Rng>(rng: &mut R) -> CheckResult {
    let mut c = CheckResult::new("g-properties");
    let mut params = Vec::new();
    for alpha in [0.5, 1.0, 5.0, 50.0] {
        for a in [1.1, 1.5, 1.9] {
            params.push((alpha, a));
        }
    }
    for _ in 0..8 {
        params.push((rng.random_range(0.1..20.0), rng.random_range(1.01..1.99)));
    }
    let mut worst: f64 = 0.0;
    for (alpha, a) in params {
        let p = match GFunctionParams::new(alpha, a) {
            Ok(p) => p,
            Err(e) => {
                c.fail(e.to_string());
                continue;
            }
        };
        let mut t = vec![0.0, 1e3 / alpha];
        t.extend((0..40).map(|_| rng.random_range(0.0..20.0 / alpha)));
        let r = check_g_properties(&p, &t, 1e-6);
        worst = worst.max(r.max_identity_error);
        for f in r.failures {
            c.fail(format!("alpha = {alpha}, A = {a}: {f}"));
        }
    }
    c.metric("max_identity_error", worst);
    c
}

/// Constant exponent: the full operator must equal the normalized one bit
/// for bit.
fn reduction<R: Rng>(rng: &mut R, cases: usize, scheme: &SchemeOptions, full_op: &FullOperator) -> Result<CheckResult> {
    let mut c = CheckResult::new("operator-reduction");
    let mut nodes = 0usize;
    for _ in 0..cases {
        let n = rng.random_range(4..=12);
        let d = make_domain(n, n, 1.0 / (n - 1) as f64, Shape::Rectangle)?;
        let vals: Vec<f64> = (0..d.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let u = GridFunction::from_values(&d, vals)?;
        let field = ExponentField::constant(&d, rng.random_range(1.5..10.0))?;
        for &idx in d.interior() {
            let node = d.node(idx);
            let a = full_op(&u, node, &field, scheme)?;
            let b = normalized_inf_discrete_with(&u, node, scheme)?;
            nodes += 1;
            if a.to_bits() != b.to_bits() {
                c.fail(format!("{a:e} != {b:e} at {node:?} on {n}x{n}"));
            }
        }
    }
    c.metric("functions", cases as f64);
    c.metric("nodes", nodes as f64);
    Ok(c)
}

fn consistency(scheme: &SchemeOptions, full_op: &FullOperator) -> Result<CheckResult> {
    let mut c = CheckResult::new("operator-consistency");
    let setup = ConvergenceSetup {
        origin: [0.0, 0.0],
        extent: 1.0,
        points: vec![[0.5, 0.5], [0.375, 0.625], [0.625, 0.25]],
        scheme: *scheme,
    };
    let h = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let p = suite::bump_exponent();
    let probes = [
        ("trig", Probe::Trig),
        ("exponential", Probe::Exponential { a: [0.8, 0.5] }),
        ("cone", Probe::Cone { vertex: [-0.5, -0.5], scale: 1.0 }),
    ];
    for (name, probe) in probes {
        let r = convergence_order_with(&probe, &p, &h, &setup, full_op)?;
        let order = r.full_order.value();
        c.metric(&format!("{name}_order"), order);
        c.metric(&format!("{name}_finest_error"), *r.full_errors.last().unwrap_or(&f64::NAN));
        if !(order >= 1.0) {
            c.fail(format!("{name}: fitted order {order:.3} < 1 (errors {:?})", r.full_errors));
        }
    }
    Ok(c)
}

fn comparison<R: Rng>(rng: &mut R, pairs: usize) -> Result<CheckResult> {
    let mut c = CheckResult::new("comparison");
    let p = suite::bump_exponent();
    let mut problems = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let (a, b) = suite::ordered_pair(rng, 17, &p)?;
        problems.push((a.with_scheme(SchemeOptions::monotone()), b.with_scheme(SchemeOptions::monotone())));
    }
    let results: Vec<Result<(f64, f64)>> = problems
        .par_iter()
        .map(|(a, b)| {
            let (u, _) = solve_direct(a)?;
            let (v, _) = solve_direct(b)?;
            let tol = 10.0 * a.tolerances.residual_tol.max(b.tolerances.residual_tol);
            let r = check_comparison(&u, &v, tol)?;
            Ok((r.max_violation, tol))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (i, r) in results.into_iter().enumerate() {
        let (v, tol) = r?;
        worst = worst.max(v);
        if v > tol {
            c.fail(format!("pair {i}: violation {v:e} > {tol:e}"));
        }
    }
    c.metric("pairs", pairs as f64);
    c.metric("max_violation", worst);
    Ok(c)
}

fn caccioppoli() -> Result<CheckResult> {
    let mut c = CheckResult::new("caccioppoli");
    let problems = suite::regression_problems(17)?;
    let results: Vec<Result<(f64, bool, bool)>> = problems
        .par_iter()
        .map(|np| {
            let (u, _) = solve_direct(&np.problem)?;
            let zeta = CutoffFunction::new(&np.problem.domain, [0.5, 0.5], 0.2)?;
            let r = caccioppoli_check(&u, &zeta, &np.problem.exponent, 1.0)?;
            let classical = !np.problem.exponent.is_constant() || r.rhs == r.rhs_classical;
            Ok((r.rhs + r.slack - r.lhs, r.passed, classical))
        })
        .collect();
    let mut margin = f64::INFINITY;
    for (np, r) in problems.iter().zip(results) {
        let (m, passed, classical) = r?;
        margin = margin.min(m);
        if !passed {
            c.fail(format!("{}: lhs exceeds rhs + slack by {:e}", np.name, -m));
        }
        if !classical {
            c.fail(format!("{}: constant exponent but rhs differs from the classical one", np.name));
        }
    }
    c.metric("problems", problems.len() as f64);
    c.metric("min_margin", margin);
    Ok(c)
}

fn gradient_check<R: Rng>(rng: &mut R) -> Result<CheckResult> {
    let mut c = CheckResult::new("energy-gradient");
    let d = make_domain(9, 9, 0.125, Shape::Rectangle)?;
    let field = exponent_from_family(&d, &suite::bump_exponent())?;
    let k = 16.0 / field.p_max();
    let coef: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0)];
    let f = BoundaryData::from_fn(&d, |x| coef[0] * x[0] + coef[1] * x[1] + 0.2 * (coef[2] * x[0] * x[1]).sin())?;
    let mut u = f.extend(0.0);
    for &idx in d.interior() {
        u.set(idx, rng.random_range(-0.5..0.5));
    }
    let (eps, sign) = (0.3, SourceSign::Upper);
    let g = energy_gradient(&u, k, &field, eps, sign)?;
    let step = 1e-6;
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &idx in d.interior() {
        let base = u.get(idx);
        let mut up = u.clone();
        up.set(idx, base + step);
        let mut dn = u.clone();
        dn.set(idx, base - step);
        let fd = (energy(&up, k, &field, eps, sign)? - energy(&dn, k, &field, eps, sign)?) / (2.0 * step);
        err = err.max((fd - g.get(idx)).abs());
        scale = scale.max(g.get(idx).abs());
    }
    let rel = err / scale.max(f64::MIN_POSITIVE);
    c.metric("kp_max", k * field.p_max());
    c.metric("relative_error", rel);
    if !(rel <= 1e-5) {
        c.fail(format!("gradient differs from finite differences by {rel:e} (relative)"));
    }
    Ok(c)
}
