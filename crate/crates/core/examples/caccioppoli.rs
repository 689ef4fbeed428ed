//! Logarithmic Caccioppoli estimate on the positive regression problems.
//!
//! cargo run --release --example caccioppoli

use varinf::analysis::{caccioppoli_check, CutoffFunction};
use varinf::solvers::solve_direct;
use varinf::suite::regression_problems;

fn main() -> varinf::Result<()> {
    for np in regression_problems(33)? {
        let (u, _) = solve_direct(&np.problem)?;
        let zeta = CutoffFunction::new(&np.problem.domain, [0.5, 0.5], 0.2)?;
        let r = caccioppoli_check(&u, &zeta, &np.problem.exponent, 1.0)?;
        println!(
            "{:18} lhs {:8.4} rhs {:8.3} classical {:8.3} {}",
            np.name,
            r.lhs,
            r.rhs,
            r.rhs_classical,
            if r.passed { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
