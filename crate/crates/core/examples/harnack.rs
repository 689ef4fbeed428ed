//! Harnack ratios, multiplicative constants and the Lipschitz bound.
//!
//! cargo run --release --example harnack

use varinf::analysis::{fit_harnack_family, harnack_check, lipschitz_bound_check, HarnackOptions};
use varinf::solvers::solve_direct;
use varinf::suite::regression_problems;

fn main() -> varinf::Result<()> {
    let opts = HarnackOptions::default();
    let mut all = Vec::new();
    for np in regression_problems(33)? {
        let (u, _) = solve_direct(&np.problem)?;
        let lip = lipschitz_bound_check(&u, &np.problem.boundary)?;
        let mut line = format!("{:18} grad/L {:.3}", np.name, lip.ratio.unwrap_or(f64::NAN));
        for r in [0.1, 0.15, 0.2] {
            let rep = harnack_check(&u, [0.5, 0.5], r, &opts)?;
            line += &format!(
                " | R {r}: ratio {:.3} C1 {:.3} C2 {:.3}",
                rep.ratio,
                rep.c1.unwrap_or(f64::NAN),
                rep.c2.unwrap_or(f64::NAN)
            );
            all.push(rep);
        }
        println!("{line}");
    }
    let fit = fit_harnack_family(&all, &opts);
    println!(
        "family bound exp({:.3} + {:.3} R (sup_2R u + R)), bounded: {}",
        fit.a, fit.b, fit.bounded
    );
    Ok(())
}
