//! The kp(x)-energy minimizers along the k schedule.
//!
//! cargo run --release --example variational_limit

use varinf::grid::diff_sup_norm;
use varinf::solvers::{solve_direct, solve_variational_limit, SourceSign};
use varinf::suite::regression_problems;

fn main() -> varinf::Result<()> {
    let problems = regression_problems(17)?;
    let np = problems.iter().find(|p| p.name == "trig-bump").expect("suite problem");
    let (u, report) = solve_variational_limit(&np.problem, SourceSign::Equation)?;
    println!("{}: {}", np.name, report.summary());
    for s in &report.stages {
        println!(
            "  k = {:7.3} (k p_max = {:5.1}) sweeps {:5} energy {:.6e} moved {:.2e}",
            s.k,
            s.kp_max,
            s.iterations,
            s.energy,
            s.distance_to_previous.unwrap_or(f64::NAN)
        );
    }
    let (v, _) = solve_direct(&np.problem)?;
    println!("sup distance to the direct solution: {:.3e}", diff_sup_norm(&u, &v)?);
    Ok(())
}
