//! Domains, boundary data and exponent fields.
//!
//! cargo run --example grid_and_exponent

use varinf::exponent::{exponent_from_family, exponent_from_samples, validate, ExponentFamily};
use varinf::grid::{make_domain, BoundaryData, Shape};

fn main() -> varinf::Result<()> {
    let square = make_domain(17, 17, 1.0 / 16.0, Shape::Rectangle)?;
    let disk = make_domain(17, 17, 1.0 / 16.0, Shape::Disk)?;
    for (name, d) in [("square", &square), ("disk", &disk)] {
        println!(
            "{name}: {} nodes, {} interior, {} boundary",
            d.len(),
            d.interior().len(),
            d.boundary().len()
        );
    }

    let f = BoundaryData::from_fn(&square, |x| x[0] * x[0] - x[1])?;
    println!(
        "boundary data in [{:.3}, {:.3}], Lipschitz constant {:.3}",
        f.min(),
        f.max(),
        f.lipschitz_constant()
    );

    let bump = ExponentFamily::Gaussian {
        base: 2.0,
        amplitude: 1.0,
        center: [0.5, 0.5],
        width: 0.25,
    };
    let p = exponent_from_family(&square, &bump)?;
    let diag = validate(&p);
    println!(
        "bump exponent: p in [{:.3}, {:.3}], sup |grad ln p| = {:.3}",
        diag.p_min, diag.p_max, diag.grad_log_p_sup
    );

    // sampled values get grad ln p from finite differences
    let samples: Vec<f64> = (0..square.len())
        .map(|i| {
            let x = square.position(i);
            2.0 + x[0] * x[1]
        })
        .collect();
    let q = exponent_from_samples(&square, samples)?;
    println!("sampled 2 + xy: p in [{:.3}, {:.3}]", q.p_min(), q.p_max());

    // p <= 1 is rejected
    let bad = exponent_from_family(&square, &ExponentFamily::Affine { a: [1.0, 0.0], b: 0.5 });
    println!("affine 0.5 + x rejected: {}", bad.unwrap_err());
    Ok(())
}
