//! Loading a problem file and writing the CLI's output files.
//!
//! cargo run --release --example problem_file -- problems/aronsson.json out/example

use std::path::PathBuf;

use varinf::io::{load_config, write_pgm, write_solution_csv};
use varinf::solvers::solve_direct;

fn main() -> varinf::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| root.join("problems/aronsson.json"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("varinf-example"));

    let loaded = load_config(&config)?;
    println!("{} (sha256 {})", config.display(), &loaded.hash[..16]);
    let problem = loaded.config.build_problem(&loaded.base_dir)?;
    let (u, report) = solve_direct(&problem)?;
    println!("{}", report.summary());

    std::fs::create_dir_all(&out)?;
    write_solution_csv(&out.join("solution.csv"), &u)?;
    write_pgm(&out.join("solution.pgm"), &u)?;
    println!("wrote {}", out.display());
    Ok(())
}
