//! Fixed problems shared by the verification command, the examples and the
//! test suites.

use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::exponent::{exponent_from_family, ExponentFamily};
use crate::grid::{make_domain, BoundaryData, Domain, Shape};
use crate::operator::{Probe, SmoothProbe};
use crate::solvers::Problem;

#[derive(Debug, Clone)]
pub struct NamedProblem {
    pub name: &'static str,
    pub problem: Problem,
}

/// `p = 2 + exp(-|x - (0.5, 0.5)|^2 / (2 * 0.25^2))`, between 2 and 3.
pub fn bump_exponent() -> ExponentFamily {
    ExponentFamily::Gaussian {
        base: 2.0,
        amplitude: 1.0,
        center: [0.5, 0.5],
        width: 0.25,
    }
}

pub fn affine_exponent() -> ExponentFamily {
    ExponentFamily::Affine { a: [1.0, 0.5], b: 2.0 }
}

fn unit(n: usize, shape: Shape) -> Result<Arc<Domain>> {
    make_domain(n, n, 1.0 / (n - 1) as f64, shape)
}

fn problem(d: &Arc<Domain>, f: impl Fn([f64; 2]) -> f64, p: &ExponentFamily) -> Result<Problem> {
    Problem::new(BoundaryData::from_fn(d, f)?, exponent_from_family(d, p)?)
}

/// Ten problems on the unit square or its inscribed disk (`n x n` nodes)
/// with boundary data bounded below by a positive constant, so their
/// solutions are positive.
pub fn regression_problems(n: usize) -> Result<Vec<NamedProblem>> {
    let sq = unit(n, Shape::Rectangle)?;
    let disk = unit(n, Shape::Disk)?;
    let c2 = ExponentFamily::Constant { value: 2.0 };
    let bump = bump_exponent();
    let aff = affine_exponent();
    let cone = Probe::Cone {
        vertex: [-0.5, -0.5],
        scale: 1.0,
    };
    let lin = |x: [f64; 2]| 1.0 + 0.6 * x[0] + 0.8 * x[1];
    Ok(vec![
        NamedProblem { name: "affine-constant", problem: problem(&sq, lin, &c2)? },
        NamedProblem { name: "affine-bump", problem: problem(&sq, lin, &bump)? },
        NamedProblem { name: "cone-constant", problem: problem(&sq, |x| cone.value(x), &c2)? },
        NamedProblem { name: "cone-affine", problem: problem(&sq, |x| cone.value(x), &aff)? },
        NamedProblem {
            name: "trig-bump",
            problem: problem(&sq, |x| 1.0 + 0.5 * (2.0 * x[0]).sin() * x[1].cos(), &bump)?,
        },
        NamedProblem { name: "saddle-bump", problem: problem(&sq, |x| 1.0 + x[0] * x[1], &bump)? },
        NamedProblem {
            name: "quadratic-affine",
            problem: problem(&sq, |x| 1.0 + 0.3 * (x[0] * x[0] - x[1] * x[1]), &aff)?,
        },
        NamedProblem { name: "small-bump", problem: problem(&sq, |x| 0.05 + 0.2 * x[0] * x[0], &bump)? },
        NamedProblem { name: "disk-affine", problem: problem(&disk, |x| 1.0 + 0.5 * x[0], &bump)? },
        NamedProblem {
            name: "disk-exponential",
            problem: problem(&disk, |x| x[0].exp() - 0.9 + 0.3 * x[1], &aff)?,
        },
    ])
}

/// 17x17 unit square, bump exponent, small boundary slope `f = 0.02 x1`.
///
/// The source `eps^{kp-1}` only moves the solution where `|grad u|` is
/// comparable to `eps`, so the gap between upper and lower solutions is
/// visible for the usual epsilon range only with gentle boundary data.
pub fn sandwich_problem() -> Result<Problem> {
    let d = unit(17, Shape::Rectangle)?;
    problem(&d, |x| 0.02 * x[0], &bump_exponent())
}

/// `x1^{4/3} - x2^{4/3}` on `[0.25, 1.25]^2` with constant `p = 2` and
/// spacing `h` (`1/h` must be an integer).
pub fn aronsson_problem(h: f64) -> Result<Problem> {
    let n = (1.0 / h).round() as usize + 1;
    let d = Domain::new(n, n, h, [0.25, 0.25], Shape::Rectangle)?;
    problem(&d, |x| Probe::Aronsson.value(x), &ExponentFamily::Constant { value: 2.0 })
}

/// Boundary data pair `f <= f + bump` on the `n x n` unit square.
pub fn ordered_pair<R: Rng>(rng: &mut R, n: usize, exponent: &ExponentFamily) -> Result<(Problem, Problem)> {
    let d = unit(n, Shape::Rectangle)?;
    let a: [f64; 4] = [
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.5..3.0),
        rng.random_range(0.0..0.3),
    ];
    let c: [f64; 2] = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
    let base = move |x: [f64; 2]| a[0] * x[0] + a[1] * x[1] * x[1] + 0.3 * (a[2] * x[0]).sin();
    let bump = move |x: [f64; 2]| a[3] * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / 0.1).exp();
    Ok((
        problem(&d, base, exponent)?,
        problem(&d, move |x| base(x) + bump(x), exponent)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_data_positive() {
        for np in regression_problems(9).unwrap() {
            assert!(np.problem.boundary.min() > 0.0, "{}", np.name);
        }
    }
}
