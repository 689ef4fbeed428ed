//! Ordered boundary data give ordered solutions.
//!
//! The default scheme is consistent but not monotone, so small interior
//! violations at discretization level are possible; the monotone scheme
//! orders discrete solutions exactly.
//!
//! cargo run --release --example comparison

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varinf::analysis::check_comparison;
use varinf::operator::SchemeOptions;
use varinf::solvers::solve_direct;
use varinf::suite::{bump_exponent, ordered_pair};

fn main() -> varinf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..5 {
        let (lo, hi) = ordered_pair(&mut rng, 17, &bump_exponent())?;
        let mut line = format!("pair {i}:");
        for (name, scheme) in [("default", SchemeOptions::default()), ("monotone", SchemeOptions::monotone())] {
            let (u, _) = solve_direct(&lo.clone().with_scheme(scheme))?;
            let (v, _) = solve_direct(&hi.clone().with_scheme(scheme))?;
            let r = check_comparison(&u, &v, 10.0 * lo.tolerances.residual_tol)?;
            line += &format!("  {name} violation {:.2e}", r.max_violation);
        }
        println!("{line}");
    }
    Ok(())
}
