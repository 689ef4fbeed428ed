//! Discrete `kp(x)`-energy and its minimization.
//!
//! The energy is integrated with corner triangles: every active node `a`
//! and quadrant `(sx, sy)` whose two arms `b = a + sx e1`, `c = a + sy e2`
//! are active contribute
//!
//! ```text
//! (h^2 / 4) |g|^q / q,    g = ((u_b - u_a) sx / h, (u_c - u_a) sy / h),    q = k p(a),
//! ```
//!
//! which averages the two P1 triangulations of each cell. For `q = 2` the
//! Euler-Lagrange equation is the 5-point Laplacian. The source term is
//! lumped: `-sign h^2 eps^{k p_i - 1} u_i` per interior node.
//!
//! Minimization is nonlinear successive over-relaxation: each interior node
//! in turn moves to (a relaxed multiple of) the exact minimizer of the energy
//! as a function of that node alone. Each local problem is convex in one
//! variable and is solved by safeguarded Newton on its derivative, evaluated
//! with a common log-scale so that very large `q` neither overflows nor
//! loses the small-gradient terms.

use std::time::Instant;

use crate::error::{Error, Result, Unconverged};
use crate::exponent::ExponentField;
use crate::grid::{diff_sup_norm, GridFunction};

use super::{push_history, Problem, SolveReport, SourceSign, StageReport};

#[derive(Debug, Clone, Copy)]
struct Term {
    a: usize,
    b: usize,
    c: usize,
    sx: f64,
    sy: f64,
    q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    A,
    B,
    C,
}

/// Terms, node-to-term adjacency and source coefficients for one `k`.
struct Discretization {
    h: f64,
    ln_w: f64,
    terms: Vec<Term>,
    interior: Vec<usize>,
    adj_start: Vec<usize>,
    adj: Vec<(usize, Role)>,
    /// `sign eps^{k p_i - 1} h^2` at interior nodes, indexed like `interior`.
    source: Vec<f64>,
}

impl Discretization {
    fn new(field: &ExponentField, k: f64, epsilon: f64, sign: SourceSign) -> Result<Self> {
        let d = field.domain();
        let kp_min = k * field.p_min();
        if !(kp_min >= 2.0 - 1e-12) {
            return Err(Error::param(format!("k p_min = {kp_min} must be at least 2")));
        }
        let (nx, ny, h) = (d.nx(), d.ny(), d.h());
        let mut terms = Vec::new();
        for a in 0..d.len() {
            if !d.is_active(a) {
                continue;
            }
            let node = d.node(a);
            for sx in [1i64, -1] {
                let bi = node.i as i64 + sx;
                if bi < 0 || bi >= nx as i64 {
                    continue;
                }
                let b = node.j * nx + bi as usize;
                if !d.is_active(b) {
                    continue;
                }
                for sy in [1i64, -1] {
                    let cj = node.j as i64 + sy;
                    if cj < 0 || cj >= ny as i64 {
                        continue;
                    }
                    let c = cj as usize * nx + node.i;
                    if !d.is_active(c) {
                        continue;
                    }
                    terms.push(Term {
                        a,
                        b,
                        c,
                        sx: sx as f64,
                        sy: sy as f64,
                        q: k * field.p(a),
                    });
                }
            }
        }

        let interior = d.interior().to_vec();
        let mut pos = vec![usize::MAX; d.len()];
        for (p, &idx) in interior.iter().enumerate() {
            pos[idx] = p;
        }
        let mut lists: Vec<Vec<(usize, Role)>> = vec![Vec::new(); interior.len()];
        for (t, term) in terms.iter().enumerate() {
            for (node, role) in [(term.a, Role::A), (term.b, Role::B), (term.c, Role::C)] {
                if pos[node] != usize::MAX {
                    lists[pos[node]].push((t, role));
                }
            }
        }
        let mut adj_start = Vec::with_capacity(interior.len() + 1);
        let mut adj = Vec::new();
        for l in lists {
            adj_start.push(adj.len());
            adj.extend(l);
        }
        adj_start.push(adj.len());

        let s = sign.value();
        let source = interior
            .iter()
            .map(|&idx| {
                if s == 0.0 || epsilon == 0.0 {
                    0.0
                } else {
                    s * epsilon.powf(k * field.p(idx) - 1.0) * h * h
                }
            })
            .collect();

        Ok(Discretization {
            h,
            ln_w: (0.25 * h * h).ln(),
            terms,
            interior,
            adj_start,
            adj,
            source,
        })
    }

    #[inline]
    fn grad(&self, t: &Term, v: &[f64]) -> [f64; 2] {
        [
            (v[t.b] - v[t.a]) * t.sx / self.h,
            (v[t.c] - v[t.a]) * t.sy / self.h,
        ]
    }

    fn energy(&self, u: &GridFunction) -> Result<f64> {
        Ok(self.energy_with_scale(u)?.0)
    }

    /// Energy and the sum of the absolute values of its terms, the scale of
    /// its rounding error.
    fn energy_with_scale(&self, u: &GridFunction) -> Result<(f64, f64)> {
        let v = u.values();
        let mut sum = 0.0;
        let mut scale = 0.0;
        for t in &self.terms {
            let g = self.grad(t, v);
            let n = g[0].hypot(g[1]);
            if n < 1e-300 {
                continue;
            }
            let e = t.q * n.ln();
            if e > 700.0 {
                return Err(Error::Overflow(format!(
                    "|grad u|^q with q = {:.3} and |grad u| = {n:.3e} exceeds exp(700)",
                    t.q
                )));
            }
            let term = (self.ln_w - t.q.ln() + e).exp();
            sum += term;
            scale += term;
        }
        for (p, &idx) in self.interior.iter().enumerate() {
            sum -= self.source[p] * v[idx];
            scale += (self.source[p] * v[idx]).abs();
        }
        Ok((sum, scale))
    }

    fn gradient(&self, u: &GridFunction) -> Result<GridFunction> {
        let v = u.values();
        let d = u.domain();
        let mut out = vec![0.0; d.len()];
        for t in &self.terms {
            let g = self.grad(t, v);
            let n = g[0].hypot(g[1]);
            let coef = if t.q == 2.0 {
                (self.ln_w).exp()
            } else if n < 1e-300 {
                continue;
            } else {
                let e = (t.q - 2.0) * n.ln();
                if e > 700.0 {
                    return Err(Error::Overflow(format!("|grad u|^(q-2) with q = {:.3}", t.q)));
                }
                (self.ln_w + e).exp()
            };
            let gx = coef * g[0] * t.sx / self.h;
            let gy = coef * g[1] * t.sy / self.h;
            out[t.a] -= gx + gy;
            out[t.b] += gx;
            out[t.c] += gy;
        }
        for (p, &idx) in self.interior.iter().enumerate() {
            out[idx] -= self.source[p];
        }
        for (idx, o) in out.iter_mut().enumerate() {
            if !d.is_interior(idx) {
                *o = 0.0;
            }
        }
        GridFunction::from_values(d, out)
    }
}

/// Affine dependence of one term's gradient on the node being relaxed.
#[derive(Debug, Clone, Copy, Default)]
struct Local {
    g: [f64; 2],
    d: [f64; 2],
    q: f64,
}

const MAX_LOCAL: usize = 12;

struct LocalProblem {
    terms: [Local; MAX_LOCAL],
    len: usize,
    ln_w: f64,
    source: f64,
}

impl LocalProblem {
    fn gather(disc: &Discretization, p: usize, v: &[f64]) -> Self {
        let mut lp = LocalProblem {
            terms: [Local::default(); MAX_LOCAL],
            len: 0,
            ln_w: disc.ln_w,
            source: disc.source[p],
        };
        let inv = 1.0 / disc.h;
        for &(t, role) in &disc.adj[disc.adj_start[p]..disc.adj_start[p + 1]] {
            let term = &disc.terms[t];
            let d = match role {
                Role::A => [-term.sx * inv, -term.sy * inv],
                Role::B => [term.sx * inv, 0.0],
                Role::C => [0.0, term.sy * inv],
            };
            lp.terms[lp.len] = Local {
                g: disc.grad(term, v),
                d,
                q: term.q,
            };
            lp.len += 1;
        }
        lp
    }

    fn max_grad(&self) -> f64 {
        self.terms[..self.len]
            .iter()
            .fold(0.0, |m, t| m.max(t.g[0].hypot(t.g[1])))
    }

    /// Scaled derivative of the local energy and its slope at offset `tau`.
    /// Both carry the same positive factor, so the sign and the Newton step
    /// are exact.
    fn derivative(&self, tau: f64) -> (f64, f64) {
        let mut logs = [f64::NEG_INFINITY; MAX_LOCAL];
        let mut top = if self.source != 0.0 {
            self.source.abs().ln()
        } else {
            f64::NEG_INFINITY
        };
        for (k, t) in self.terms[..self.len].iter().enumerate() {
            let gx = t.g[0] + tau * t.d[0];
            let gy = t.g[1] + tau * t.d[1];
            let n2 = gx * gx + gy * gy;
            logs[k] = if t.q == 2.0 {
                self.ln_w
            } else if n2 == 0.0 {
                f64::NEG_INFINITY
            } else {
                self.ln_w + 0.5 * (t.q - 2.0) * n2.ln()
            };
            top = top.max(logs[k]);
        }
        if top == f64::NEG_INFINITY {
            return (0.0, 0.0);
        }
        let mut f = 0.0;
        let mut fp = 0.0;
        for (k, t) in self.terms[..self.len].iter().enumerate() {
            if logs[k] == f64::NEG_INFINITY {
                continue;
            }
            let gx = t.g[0] + tau * t.d[0];
            let gy = t.g[1] + tau * t.d[1];
            let n2 = gx * gx + gy * gy;
            let c = (logs[k] - top).exp();
            let gd = gx * t.d[0] + gy * t.d[1];
            f += c * gd;
            let dd = t.d[0] * t.d[0] + t.d[1] * t.d[1];
            fp += c * if n2 > 0.0 { dd + (t.q - 2.0) * gd * gd / n2 } else { dd };
        }
        if self.source != 0.0 {
            f -= self.source.signum() * (self.source.abs().ln() - top).exp();
        }
        (f, fp)
    }

    /// `psi(tau1) - psi(tau0)` for the local energy, up to a positive factor.
    fn energy_change(&self, tau0: f64, tau1: f64) -> f64 {
        let term_log = |t: &Local, tau: f64| {
            let gx = t.g[0] + tau * t.d[0];
            let gy = t.g[1] + tau * t.d[1];
            let n2 = gx * gx + gy * gy;
            if n2 == 0.0 {
                f64::NEG_INFINITY
            } else {
                self.ln_w - t.q.ln() + 0.5 * t.q * n2.ln()
            }
        };
        let mut top = f64::NEG_INFINITY;
        let mut pairs = [(f64::NEG_INFINITY, f64::NEG_INFINITY); MAX_LOCAL];
        for (k, t) in self.terms[..self.len].iter().enumerate() {
            pairs[k] = (term_log(t, tau0), term_log(t, tau1));
            top = top.max(pairs[k].0).max(pairs[k].1);
        }
        let lin = self.source * (tau1 - tau0);
        if lin != 0.0 {
            top = top.max(lin.abs().ln());
        }
        if top == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut change = 0.0;
        for &(l0, l1) in &pairs[..self.len] {
            change += (l1 - top).exp() - (l0 - top).exp();
        }
        if lin != 0.0 {
            change -= lin.signum() * (lin.abs().ln() - top).exp();
        }
        change
    }

    /// Offset of the local minimizer, to absolute accuracy `tol`.
    fn solve(&self, scale: f64, tol: f64) -> f64 {
        let (f0, fp0) = self.derivative(0.0);
        if f0 == 0.0 {
            return 0.0;
        }
        let dir = -f0.signum();
        let mut step = if fp0 > 0.0 { (f0 / fp0).abs() } else { scale };
        if !(step > 0.0) || !step.is_finite() {
            step = scale;
        }
        let mut inner = 0.0;
        let mut outer = f64::NAN;
        for _ in 0..400 {
            let x = dir * step;
            let (f, _) = self.derivative(x);
            if f == 0.0 {
                return x;
            }
            if f.signum() != f0.signum() {
                outer = x;
                break;
            }
            inner = x;
            step *= 2.0;
        }
        if outer.is_nan() {
            return inner;
        }
        // f(lo) < 0 < f(hi), lo < hi; Newton steps that leave the bracket or
        // fail to halve the step are replaced by bisection.
        let (mut lo, mut hi) = if dir > 0.0 { (inner, outer) } else { (outer, inner) };
        let mut x = 0.5 * (lo + hi);
        let mut dx_old = hi - lo;
        let mut dx = dx_old;
        let (mut f, mut fp) = self.derivative(x);
        for _ in 0..2000 {
            if f == 0.0 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let out_of_bracket = ((x - hi) * fp - f) * ((x - lo) * fp - f) > 0.0;
            if !(fp > 0.0) || out_of_bracket || (2.0 * f).abs() > (dx_old * fp).abs() {
                dx_old = dx;
                dx = 0.5 * (hi - lo);
                x = lo + dx;
            } else {
                dx_old = dx;
                dx = f / fp;
                x -= dx;
            }
            if dx.abs() <= tol || hi - lo <= tol {
                return x;
            }
            (f, fp) = self.derivative(x);
        }
        0.5 * (lo + hi)
    }
}

fn check_domain(u: &GridFunction, field: &ExponentField) -> Result<()> {
    if std::sync::Arc::ptr_eq(u.domain(), field.domain()) || **u.domain() == **field.domain() {
        Ok(())
    } else {
        Err(Error::DomainMismatch)
    }
}

/// Discrete energy `sum (h^2/4) |g|^{kp}/(kp) - sign sum h^2 eps^{kp-1} u`.
pub fn energy(u: &GridFunction, k: f64, field: &ExponentField, epsilon: f64, sign: SourceSign) -> Result<f64> {
    check_domain(u, field)?;
    Discretization::new(field, k, epsilon, sign)?.energy(u)
}

/// Partial derivatives of [`energy`] with respect to interior values; zero
/// at boundary and outside nodes.
pub fn energy_gradient(
    u: &GridFunction,
    k: f64,
    field: &ExponentField,
    epsilon: f64,
    sign: SourceSign,
) -> Result<GridFunction> {
    check_domain(u, field)?;
    Discretization::new(field, k, epsilon, sign)?.gradient(u)
}

/// Minimizes the energy for one `k` with the boundary pinned to the data.
pub fn minimize_energy(
    problem: &Problem,
    k: f64,
    sign: SourceSign,
    warm_start: Option<&GridFunction>,
) -> Result<(GridFunction, SolveReport)> {
    let start = Instant::now();
    let mut report = SolveReport::new("variational");
    let stage = minimize_stage(problem, k, sign, warm_start, &mut report)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    let (u, stage) = stage;
    report.iterations = stage.iterations;
    report.final_residual = stage.final_step;
    report.final_energy = Some(stage.energy);
    report.k_reached = Some(k);
    report.converged = stage.converged;
    report.stages.push(stage);
    if !report.converged {
        return Err(Error::NotConverged(Box::new(Unconverged { solution: u, report })));
    }
    Ok((u, report))
}

fn minimize_stage(
    problem: &Problem,
    k: f64,
    sign: SourceSign,
    warm_start: Option<&GridFunction>,
    report: &mut SolveReport,
) -> Result<(GridFunction, StageReport)> {
    problem.validate()?;
    let disc = Discretization::new(&problem.exponent, k, problem.epsilon, sign)?;
    let mut u = match warm_start {
        Some(w) => {
            w.check_same_domain(&problem.initial_guess())?;
            let mut u = w.clone();
            let mismatch = problem
                .domain
                .boundary()
                .iter()
                .zip(problem.boundary.values())
                .fold(0.0f64, |m, (&idx, &f)| m.max((u.get(idx) - f).abs()));
            if mismatch > problem.tolerances.residual_tol {
                report
                    .warnings
                    .push(format!("warm start differed from boundary data by {mismatch:.3e}; reset"));
            }
            problem.boundary.apply(&mut u)?;
            u
        }
        None => problem.initial_guess(),
    };

    let tol = &problem.tolerances;
    let omega = tol.relaxation;
    let local_tol = 1e-3 * tol.step_tol;
    let floor = 1e-8 * (1.0 + problem.boundary.lipschitz_constant()) + problem.epsilon;
    let n = disc.interior.len();
    let mut energy_now = disc.energy(&u)?;
    report.energy_history.clear();
    report.energy_history.push(energy_now);
    let mut stride = 1;
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    let mut converged = false;

    while iterations < tol.max_iters {
        let forward = iterations % 2 == 0;
        let mut max_step = 0.0f64;
        for s in 0..n {
            let p = if forward { s } else { n - 1 - s };
            let idx = disc.interior[p];
            let lp = LocalProblem::gather(&disc, p, u.values());
            let scale = disc.h * (lp.max_grad() + floor);
            let tau = lp.solve(scale, local_tol);
            max_step = max_step.max(tau.abs());
            let mut applied = tau;
            if omega != 1.0 && tau != 0.0 {
                let relaxed = omega * tau;
                if lp.energy_change(0.0, relaxed) <= 0.0 {
                    applied = relaxed;
                }
            }
            let old = u.get(idx);
            u.set(idx, old + applied);
        }
        iterations += 1;
        last_step = max_step;
        push_history(&mut report.residual_history, &mut stride, iterations, max_step);
        let (e, scale) = disc.energy_with_scale(&u)?;
        if e > energy_now + 1e-13 * (disc.terms.len() as f64).sqrt() * scale {
            report.warnings.push(format!(
                "energy rose from {energy_now:.15e} to {e:.15e} at sweep {iterations} (k = {k})"
            ));
        }
        energy_now = e;
        report.energy_history.push(e);
        if max_step <= tol.step_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        report.warnings.push(format!(
            "k = {k}: step {last_step:.3e} above {:.3e} after {iterations} sweeps",
            tol.step_tol
        ));
    }
    let stage = StageReport {
        k,
        kp_max: k * problem.exponent.p_max(),
        iterations,
        final_step: last_step,
        energy: energy_now,
        distance_to_previous: None,
        converged,
    };
    Ok((u, stage))
}

/// Runs [`minimize_energy`] along the problem's `k` schedule with warm starts
/// and returns the last minimizer.
pub fn solve_variational_limit(problem: &Problem, sign: SourceSign) -> Result<(GridFunction, SolveReport)> {
    let start = Instant::now();
    problem.validate()?;
    let mut report = SolveReport::new("variational");
    let mut current: Option<GridFunction> = None;
    for &k in &problem.k_schedule {
        let (u, mut stage) = minimize_stage(problem, k, sign, current.as_ref(), &mut report)?;
        if let Some(prev) = &current {
            stage.distance_to_previous = Some(diff_sup_norm(prev, &u)?);
        }
        report.iterations += stage.iterations;
        report.final_residual = stage.final_step;
        report.final_energy = Some(stage.energy);
        report.k_reached = Some(k);
        let ok = stage.converged;
        report.stages.push(stage);
        current = Some(u);
        if !ok {
            report.converged = false;
            report.wall_time_s = start.elapsed().as_secs_f64();
            return Err(Error::NotConverged(Box::new(Unconverged {
                solution: current.unwrap(),
                report,
            })));
        }
    }
    report.converged = true;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((current.expect("schedule is nonempty"), report))
}

/// Lower, plain and upper variational-limit solutions for the same data.
#[derive(Debug, Clone)]
pub struct Triple {
    pub lower: GridFunction,
    pub equation: GridFunction,
    pub upper: GridFunction,
    pub lower_report: SolveReport,
    pub equation_report: SolveReport,
    pub upper_report: SolveReport,
}

pub fn solve_triple(problem: &Problem) -> Result<Triple> {
    let (equation, (lower, upper)) = rayon::join(
        || solve_variational_limit(problem, SourceSign::Equation),
        || {
            rayon::join(
                || solve_variational_limit(problem, SourceSign::Lower),
                || solve_variational_limit(problem, SourceSign::Upper),
            )
        },
    );
    let (equation, equation_report) = equation?;
    let (lower, lower_report) = lower?;
    let (upper, upper_report) = upper?;
    Ok(Triple {
        lower,
        equation,
        upper,
        lower_report,
        equation_report,
        upper_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{exponent_from_family, ExponentFamily};
    use crate::grid::{make_domain, BoundaryData, Shape};

    fn square(n: usize) -> std::sync::Arc<crate::grid::Domain> {
        make_domain(n, n, 1.0 / (n - 1) as f64, Shape::Rectangle).unwrap()
    }

    #[test]
    fn energy_hand_values() {
        let d = square(9);
        let field = ExponentField::constant(&d, 2.0).unwrap();
        let zero = GridFunction::zeros(&d);
        assert_eq!(energy(&zero, 1.0, &field, 0.0, SourceSign::Equation).unwrap(), 0.0);
        // |grad x1|^2 / 2 over the unit square
        let x = GridFunction::sample(&d, |x| x[0]).unwrap();
        let e = energy(&x, 1.0, &field, 0.0, SourceSign::Equation).unwrap();
        assert!((e - 0.5).abs() < 1e-14, "{e}");
    }

    #[test]
    fn source_sign_is_linear() {
        let d = square(7);
        let field = exponent_from_family(&d, &ExponentFamily::Affine { a: [1.0, 0.5], b: 2.0 }).unwrap();
        let u = GridFunction::sample(&d, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let k = 1.5;
        let eps = 0.4;
        let e = |s| energy(&u, k, &field, eps, s).unwrap();
        let lhs = e(SourceSign::Upper) + e(SourceSign::Lower);
        assert!((lhs - 2.0 * e(SourceSign::Equation)).abs() < 1e-13 * lhs.abs().max(1.0));

        let g0 = energy_gradient(&u, k, &field, eps, SourceSign::Equation).unwrap();
        let g1 = energy_gradient(&u, k, &field, eps, SourceSign::Upper).unwrap();
        let h2 = d.h() * d.h();
        for &i in d.interior() {
            let expect = -h2 * eps.powf(k * field.p(i) - 1.0);
            assert!((g1.get(i) - g0.get(i) - expect).abs() < 1e-15);
        }
        for &i in d.boundary() {
            assert_eq!(g0.get(i), 0.0);
        }
    }

    #[test]
    fn single_node_minimizer_is_stationary() {
        let d = square(3);
        let field = ExponentField::constant(&d, 3.0).unwrap();
        let f = BoundaryData::from_fn(&d, |x| x[0] * x[0] + 0.3 * x[1]).unwrap();
        let problem = Problem::new(f, field.clone()).unwrap();
        let (u, _) = minimize_energy(&problem, 2.0, SourceSign::Equation, None).unwrap();
        let g = energy_gradient(&u, 2.0, &field, 0.0, SourceSign::Equation).unwrap();
        assert!(g.get(d.interior()[0]).abs() < 1e-9);
    }

    #[test]
    fn affine_data_is_reproduced_at_every_k() {
        let d = square(9);
        let field = exponent_from_family(
            &d,
            &ExponentFamily::Gaussian {
                base: 2.0,
                amplitude: 1.0,
                center: [0.5, 0.5],
                width: 0.25,
            },
        )
        .unwrap();
        let f = BoundaryData::from_fn(&d, |x| 0.6 * x[0] + 0.8 * x[1]).unwrap();
        let problem = Problem::new(f, field).unwrap();
        let (u, report) = solve_variational_limit(&problem, SourceSign::Equation).unwrap();
        assert!(report.stages.len() >= 3);
        for &i in d.interior() {
            let x = d.position(i);
            assert!((u.get(i) - 0.6 * x[0] - 0.8 * x[1]).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_epsilon_triple_coincides() {
        let d = square(9);
        let field = ExponentField::constant(&d, 2.0).unwrap();
        let f = BoundaryData::from_fn(&d, |x| x[0] * x[1]).unwrap();
        let problem = Problem::new(f, field).unwrap().with_kp_cap(16.0).unwrap();
        let t = solve_triple(&problem).unwrap();
        assert!(diff_sup_norm(&t.lower, &t.upper).unwrap() < 1e-7);
        assert!(diff_sup_norm(&t.lower, &t.equation).unwrap() < 1e-7);
    }

    #[test]
    fn overflowing_gradients_are_reported() {
        let d = square(5);
        let field = ExponentField::constant(&d, 2.0).unwrap();
        let u = GridFunction::sample(&d, |x| 1e6 * x[0]).unwrap();
        assert!(matches!(
            energy(&u, 40.0, &field, 0.0, SourceSign::Equation),
            Err(Error::Overflow(_))
        ));
    }
}
