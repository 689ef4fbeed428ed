//! Upper and lower auxiliary solutions closing in on the solution.
//!
//! cargo run --release --example sandwich

use varinf::analysis::sandwich_experiment;
use varinf::suite::sandwich_problem;

fn main() -> varinf::Result<()> {
    let problem = sandwich_problem()?;
    let report = sandwich_experiment(&problem, &[0.4, 0.2, 0.1, 0.05])?;
    println!("k = {}, tolerance {:.1e}", report.k_used, report.tolerance);
    for r in &report.rows {
        println!(
            "eps = {:5} sup(u+ - u-) = {:.4e}  ordering violations {:.1e} / {:.1e}",
            r.epsilon,
            r.diff_sup.unwrap_or(f64::NAN),
            r.lower_violation,
            r.upper_violation
        );
    }
    println!(
        "ordered: {}, strictly decreasing: {}, fitted kappa: {:?}",
        report.ordering_ok, report.strictly_decreasing, report.kappa
    );
    Ok(())
}
