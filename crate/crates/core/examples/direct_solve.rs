//! Direct solver on the Aronsson function under refinement.
//!
//! cargo run --release --example direct_solve

use varinf::operator::{Probe, SmoothProbe};
use varinf::solvers::solve_direct;
use varinf::suite::aronsson_problem;

fn main() -> varinf::Result<()> {
    let mut previous: Option<f64> = None;
    for h in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let problem = aronsson_problem(h)?;
        let (u, report) = solve_direct(&problem)?;
        let d = u.domain();
        let err = d
            .interior()
            .iter()
            .fold(0.0f64, |m, &i| m.max((u.get(i) - Probe::Aronsson.value(d.position(i))).abs()));
        let factor = previous.map(|e| format!(", reduced by {:.2}", e / err)).unwrap_or_default();
        println!(
            "h = 1/{:<3} sweeps {:6} sup error {err:.3e}{factor}",
            (1.0 / h).round(),
            report.iterations
        );
        previous = Some(err);
    }
    Ok(())
}
