//! Solvers for the Dirichlet problem.
//!
//! * [`solve_variational_limit`] minimizes the discrete `kp(x)`-energy along
//!   an increasing `k` schedule, warm-starting each stage. With a source sign
//!   of `+1` / `-1` it produces the upper / lower auxiliary solutions, with `0`
//!   the solution of the equation itself.
//! * [`solve_direct`] iterates on the discrete operator (damped nonlinear
//!   Gauss-Seidel, red-black order).

mod direct;
mod variational;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::grid::{BoundaryData, Domain, GridFunction};
use crate::operator::SchemeOptions;

pub use direct::{solve_direct, solve_direct_from};
pub use variational::{
    energy, energy_gradient, minimize_energy, solve_triple, solve_variational_limit, Triple,
};

/// Largest `k p(x)` the variational solver is meant for.
pub const MAX_KP: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceSign {
    /// Lower auxiliary equation (`+eps^{kp-1}` source).
    Lower,
    Equation,
    /// Upper auxiliary equation (`-eps^{kp-1}` source).
    Upper,
}

impl SourceSign {
    pub fn value(self) -> f64 {
        match self {
            SourceSign::Lower => -1.0,
            SourceSign::Equation => 0.0,
            SourceSign::Upper => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Sup-norm bound on the discrete operator residual (direct solver), also
    /// the accuracy unit used when comparing solutions.
    pub residual_tol: f64,
    /// Bound on the largest single-node correction in a sweep of the
    /// variational solver.
    pub step_tol: f64,
    pub max_iters: usize,
    /// Damping `omega` of the direct solver.
    pub damping: f64,
    /// Over-relaxation of the coordinate-descent sweeps.
    pub relaxation: f64,
}

impl Tolerances {
    /// Defaults for boundary data with Lipschitz constant `lipschitz`.
    pub fn for_lipschitz(lipschitz: f64) -> Self {
        let residual_tol = 1e-8 * (1.0 + lipschitz);
        Tolerances {
            residual_tol,
            step_tol: 1e-3 * residual_tol,
            max_iters: 100_000,
            damping: 0.8,
            relaxation: 1.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub domain: Arc<Domain>,
    pub boundary: BoundaryData,
    pub exponent: ExponentField,
    pub epsilon: f64,
    pub k_schedule: Vec<f64>,
    pub tolerances: Tolerances,
    pub scheme: SchemeOptions,
}

/// `k p_min` doubling from 2 while `k p_max` stays within [`MAX_KP`].
pub fn default_k_schedule(exponent: &ExponentField) -> Vec<f64> {
    k_schedule_up_to(exponent, MAX_KP)
}

/// Doubling schedule from `k = 2 / p_min` while `k p_max <= kp_cap`.
pub fn k_schedule_up_to(exponent: &ExponentField, kp_cap: f64) -> Vec<f64> {
    let mut k = 2.0 / exponent.p_min();
    let mut out = vec![k];
    loop {
        k *= 2.0;
        if k * exponent.p_max() > kp_cap * (1.0 + 1e-12) {
            break;
        }
        out.push(k);
    }
    out
}

impl Problem {
    pub fn new(boundary: BoundaryData, exponent: ExponentField) -> Result<Self> {
        let domain = Arc::clone(boundary.domain());
        if !(Arc::ptr_eq(&domain, exponent.domain()) || *domain == **exponent.domain()) {
            return Err(Error::DomainMismatch);
        }
        let tolerances = Tolerances::for_lipschitz(boundary.lipschitz_constant());
        let k_schedule = default_k_schedule(&exponent);
        let p = Problem {
            domain,
            boundary,
            exponent,
            epsilon: 0.0,
            k_schedule,
            tolerances,
            scheme: SchemeOptions::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_k_schedule(mut self, k_schedule: Vec<f64>) -> Result<Self> {
        self.k_schedule = k_schedule;
        self.validate()?;
        Ok(self)
    }

    /// Keeps the default schedule but stops at `k p_max <= kp_cap`.
    pub fn with_kp_cap(self, kp_cap: f64) -> Result<Self> {
        let schedule = k_schedule_up_to(&self.exponent, kp_cap);
        self.with_k_schedule(schedule)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_scheme(mut self, scheme: SchemeOptions) -> Self {
        self.scheme = scheme;
        self
    }

    /// Same problem with boundary data shifted by `c`.
    pub fn shifted(&self, c: f64) -> Problem {
        Problem {
            boundary: self.boundary.shifted(c),
            ..self.clone()
        }
    }

    pub fn with_boundary(&self, boundary: BoundaryData) -> Result<Problem> {
        if !(Arc::ptr_eq(&self.domain, boundary.domain()) || *self.domain == **boundary.domain()) {
            return Err(Error::DomainMismatch);
        }
        Ok(Problem {
            boundary,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(Error::param(format!("epsilon = {} must lie in [0, 1)", self.epsilon)));
        }
        if self.k_schedule.is_empty() {
            return Err(Error::param("k schedule is empty"));
        }
        for w in self.k_schedule.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::param("k schedule must be strictly increasing"));
            }
        }
        let kp_min = self.k_schedule[0] * self.exponent.p_min();
        if !(kp_min >= 2.0 - 1e-12) {
            return Err(Error::param(format!("k p_min = {kp_min} must be at least 2")));
        }
        Ok(())
    }

    /// Initial iterate: boundary data, interior filled with the boundary mean.
    pub fn initial_guess(&self) -> GridFunction {
        self.boundary.extend(self.boundary.mean())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub k: f64,
    pub kp_max: f64,
    pub iterations: usize,
    /// Largest single-node correction in the last sweep.
    pub final_step: f64,
    pub energy: f64,
    /// Sup-distance to the previous stage's minimizer.
    pub distance_to_previous: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub final_energy: Option<f64>,
    pub k_reached: Option<f64>,
    pub wall_time_s: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
    /// Residual after every sweep, thinned to at most a few hundred entries.
    pub residual_history: Vec<f64>,
    pub stages: Vec<StageReport>,
    /// Energy after every accepted sweep of the last minimization.
    #[serde(skip)]
    pub energy_history: Vec<f64>,
}

impl SolveReport {
    pub(crate) fn new(method: &str) -> Self {
        SolveReport {
            method: method.to_string(),
            iterations: 0,
            final_residual: f64::NAN,
            final_energy: None,
            k_reached: None,
            wall_time_s: 0.0,
            converged: false,
            warnings: Vec::new(),
            residual_history: Vec::new(),
            stages: Vec::new(),
            energy_history: Vec::new(),
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{} after {} iterations, residual {:.3e}{}",
            self.method,
            self.iterations,
            self.final_residual,
            if self.converged { "" } else { " (not converged)" }
        )
    }
}

/// Keeps a residual history bounded: once full, drops every other entry.
pub(crate) fn push_history(history: &mut Vec<f64>, stride: &mut usize, counter: usize, value: f64) {
    const CAP: usize = 512;
    if !counter.is_multiple_of(*stride) {
        return;
    }
    history.push(value);
    if history.len() >= CAP {
        let thinned: Vec<f64> = history.iter().step_by(2).copied().collect();
        *history = thinned;
        *stride *= 2;
    }
}
