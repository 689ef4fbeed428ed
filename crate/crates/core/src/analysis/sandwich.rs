use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{diff_sup_norm, GridFunction};
use crate::solvers::{solve_variational_limit, Problem, SourceSign};

use super::fit_line;

#[derive(Debug, Clone, Serialize)]
pub struct SandwichRow {
    pub epsilon: f64,
    /// `|u_plus - u_minus|_inf`; `None` when a solve failed.
    pub diff_sup: Option<f64>,
    /// `max (u_minus - h)^+`
    pub lower_violation: f64,
    /// `max (h - u_plus)^+`
    pub upper_violation: f64,
    pub iterations: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    /// Slope of `ln diff` against `ln eps` over rows with `diff > 50 tol`.
    pub kappa: Option<f64>,
    pub kappa_residual: Option<f64>,
    pub kappa_points: usize,
    /// Largest `k` of the schedule.
    pub k_used: f64,
    /// Solver tolerance `tol`; orderings are checked against `10 tol`.
    pub tolerance: f64,
    pub ordering_ok: bool,
    pub strictly_decreasing: bool,
}

impl SandwichReport {
    pub fn epsilons(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.epsilon).collect()
    }

    pub fn max_violation(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m, r| m.max(r.lower_violation).max(r.upper_violation))
    }
}

fn positive_part_max(a: &GridFunction, b: &GridFunction) -> f64 {
    let d = a.domain();
    (0..d.len())
        .filter(|&idx| d.is_active(idx))
        .fold(0.0, |m, idx| m.max(a.get(idx) - b.get(idx)))
}

/// Solves the plain equation once and the upper and lower auxiliary
/// equations for every `eps`, then measures ordering and the gap
/// `u_plus - u_minus`.
pub fn sandwich_experiment(problem: &Problem, epsilons: &[f64]) -> Result<SandwichReport> {
    if epsilons.is_empty() {
        return Err(Error::param("epsilon list is empty"));
    }
    for &e in epsilons {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::param(format!("epsilon {e} must lie in (0, 1)")));
        }
    }
    if !epsilons.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::param("epsilons must be strictly decreasing"));
    }
    let base = problem.clone().with_epsilon(0.0)?;
    let (h, _) = solve_variational_limit(&base, SourceSign::Equation)?;
    let tol = problem.tolerances.residual_tol;

    let rows: Vec<SandwichRow> = epsilons
        .par_iter()
        .map(|&eps| {
            let run = || -> Result<(GridFunction, GridFunction, usize)> {
                let pe = problem.clone().with_epsilon(eps)?;
                let (plus, minus) = rayon::join(
                    || solve_variational_limit(&pe, SourceSign::Upper),
                    || solve_variational_limit(&pe, SourceSign::Lower),
                );
                let (plus, rp) = plus?;
                let (minus, rm) = minus?;
                Ok((plus, minus, rp.iterations + rm.iterations))
            };
            match run() {
                Ok((plus, minus, iterations)) => SandwichRow {
                    epsilon: eps,
                    diff_sup: diff_sup_norm(&plus, &minus).ok(),
                    lower_violation: positive_part_max(&minus, &h),
                    upper_violation: positive_part_max(&h, &plus),
                    iterations,
                    error: None,
                },
                Err(e) => SandwichRow {
                    epsilon: eps,
                    diff_sup: None,
                    lower_violation: 0.0,
                    upper_violation: 0.0,
                    iterations: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.diff_sup.filter(|&d| d > 50.0 * tol).map(|d| (r.epsilon.ln(), d.ln())))
        .unzip();
    let (kappa, kappa_residual) = if x.len() >= 2 {
        let (s, _, res) = fit_line(&x, &y);
        (Some(s), Some(res))
    } else {
        (None, None)
    };
    let all_solved = rows.iter().all(|r| r.error.is_none());
    let ordering_ok = all_solved
        && rows
            .iter()
            .all(|r| r.lower_violation <= 10.0 * tol && r.upper_violation <= 10.0 * tol);
    let strictly_decreasing = all_solved
        && rows
            .windows(2)
            .all(|w| matches!((w[0].diff_sup, w[1].diff_sup), (Some(a), Some(b)) if b < a));
    Ok(SandwichReport {
        kappa_points: x.len(),
        rows,
        kappa,
        kappa_residual,
        k_used: *problem.k_schedule.last().expect("validated schedule"),
        tolerance: tol,
        ordering_ok,
        strictly_decreasing,
    })
}
