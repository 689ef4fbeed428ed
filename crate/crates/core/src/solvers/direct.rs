use std::time::Instant;

use crate::error::{Error, Result, Unconverged};
use crate::grid::GridFunction;
use crate::operator::{log_term_split, neighbor_sum, residual_sup};

use super::{push_history, Problem, SolveReport};

/// Solves the discrete equation directly by damped nonlinear Gauss-Seidel.
///
/// Each node is moved to the value that zeroes its own residual with the
/// neighbor combination and the log term frozen,
/// `u <- (1 - w) u + w (S / 2 + h^2 / 2 * ln(m) <g, D ln p>)`
/// (for [`LogMagnitude::Monotone`](crate::operator::LogMagnitude::Monotone)
/// the term's own dependence on `u` is solved for as well),
/// sweeping red nodes then black nodes. Stops once the residual sup-norm is
/// below `tolerances.residual_tol`.
pub fn solve_direct(problem: &Problem) -> Result<(GridFunction, SolveReport)> {
    solve_direct_from(problem, None)
}

/// [`solve_direct`] starting from `warm_start` (boundary values are reset to
/// the data).
pub fn solve_direct_from(
    problem: &Problem,
    warm_start: Option<&GridFunction>,
) -> Result<(GridFunction, SolveReport)> {
    problem.validate()?;
    let start = Instant::now();
    let mut report = SolveReport::new("direct");
    let d = &problem.domain;
    let mut u = match warm_start {
        Some(w) => {
            w.check_same_domain(&problem.initial_guess())?;
            let mut u = w.clone();
            problem.boundary.apply(&mut u)?;
            u
        }
        None => problem.initial_guess(),
    };
    let tol = &problem.tolerances;
    let omega = tol.damping;
    if !(omega > 0.0 && omega <= 2.0) {
        return Err(Error::param(format!("damping {omega} must lie in (0, 2]")));
    }
    let opts = problem.scheme;
    let scale = problem.boundary.min().abs().max(problem.boundary.max().abs());
    let guard = opts.guard.unwrap_or(1e-8 * (1.0 + scale) / d.h());
    let h2 = d.h() * d.h();
    let field = &problem.exponent;
    let with_log = !field.is_constant();

    let (red, black): (Vec<usize>, Vec<usize>) = d.interior().iter().partition(|&&idx| {
        let n = d.node(idx);
        (n.i + n.j).is_multiple_of(2)
    });

    let mut stride = 1;
    let mut residual = residual_sup(&u, field, &opts, guard);
    push_history(&mut report.residual_history, &mut stride, 0, residual);
    let mut iterations = 0;
    while residual > tol.residual_tol && iterations < tol.max_iters {
        for color in [&red, &black] {
            for &idx in color.iter() {
                let s = neighbor_sum(&u, idx, opts.stencil, guard);
                let (a, b) = if with_log {
                    log_term_split(&u, idx, field, opts.log_magnitude, guard)
                } else {
                    (0.0, 0.0)
                };
                // (s - 2u) / h^2 + a - b u = 0
                let target = (s + h2 * a) / (2.0 + h2 * b);
                let old = u.get(idx);
                u.set(idx, (1.0 - omega) * old + omega * target);
            }
        }
        iterations += 1;
        residual = residual_sup(&u, field, &opts, guard);
        if !residual.is_finite() {
            report.iterations = iterations;
            report.final_residual = residual;
            report.warnings.push(format!("residual became non-finite at sweep {iterations}"));
            report.wall_time_s = start.elapsed().as_secs_f64();
            return Err(Error::NotConverged(Box::new(Unconverged { solution: u, report })));
        }
        push_history(&mut report.residual_history, &mut stride, iterations, residual);
    }
    report.iterations = iterations;
    report.final_residual = residual;
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.converged = residual <= tol.residual_tol;
    if !report.converged {
        return Err(Error::NotConverged(Box::new(Unconverged { solution: u, report })));
    }
    Ok((u, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{exponent_from_family, ExponentFamily, ExponentField};
    use crate::grid::{diff_sup_norm, make_domain, BoundaryData, Shape};
    use crate::operator::{Probe, SmoothProbe};

    #[test]
    fn affine_data_for_nonconstant_exponent() {
        let d = make_domain(17, 17, 1.0 / 16.0, Shape::Rectangle).unwrap();
        let field = exponent_from_family(&d, &ExponentFamily::Affine { a: [1.0, 0.5], b: 2.0 }).unwrap();
        let f = BoundaryData::from_fn(&d, |x| 0.8 * x[0] - 0.6 * x[1]).unwrap();
        let problem = Problem::new(f, field).unwrap();
        let (u, report) = solve_direct(&problem).unwrap();
        assert!(report.final_residual <= problem.tolerances.residual_tol);
        let exact = GridFunction::sample(&d, |x| 0.8 * x[0] - 0.6 * x[1]).unwrap();
        assert!(diff_sup_norm(&u, &exact).unwrap() < 1e-6);
    }

    #[test]
    fn cone_with_outside_vertex() {
        let cone = Probe::Cone {
            vertex: [-0.5, -0.5],
            scale: 1.0,
        };
        let mut errors = Vec::new();
        for n in [9, 17, 33] {
            let d = make_domain(n, n, 1.0 / (n - 1) as f64, Shape::Rectangle).unwrap();
            let f = BoundaryData::from_fn(&d, |x| cone.value(x)).unwrap();
            let problem = Problem::new(f, ExponentField::constant(&d, 2.0).unwrap()).unwrap();
            let (u, _) = solve_direct(&problem).unwrap();
            let exact = GridFunction::sample(&d, |x| cone.value(x)).unwrap();
            errors.push(diff_sup_norm(&u, &exact).unwrap());
        }
        // O(h) or better
        assert!(errors[0] < 0.05 && errors[1] < 0.6 * errors[0] && errors[2] < 0.6 * errors[1], "{errors:?}");
    }

    #[test]
    fn warm_start_at_solution_needs_no_sweeps() {
        let d = make_domain(9, 9, 0.125, Shape::Rectangle).unwrap();
        let f = BoundaryData::from_fn(&d, |x| x[0] * x[0] - x[1]).unwrap();
        let problem = Problem::new(f, ExponentField::constant(&d, 2.0).unwrap()).unwrap();
        let (u, _) = solve_direct(&problem).unwrap();
        let (_, again) = solve_direct_from(&problem, Some(&u)).unwrap();
        assert!(again.iterations <= 1);
    }

    #[test]
    fn rejects_bad_damping() {
        let d = make_domain(5, 5, 0.25, Shape::Rectangle).unwrap();
        let f = BoundaryData::from_fn(&d, |x| x[0]).unwrap();
        let mut problem = Problem::new(f, ExponentField::constant(&d, 2.0).unwrap()).unwrap();
        problem.tolerances.damping = 2.5;
        assert!(matches!(solve_direct(&problem), Err(Error::InvalidParameter(_))));
    }
}
