//! Discrete operators against closed-form values on smooth probes.
//!
//! cargo run --release --example operator_consistency

use varinf::analysis::{convergence_order, ConvergenceSetup};
use varinf::exponent::ExponentFamily;
use varinf::operator::{delta_inf_x_continuous, LogMagnitude, Probe, SchemeOptions, Stencil};

fn main() -> varinf::Result<()> {
    let p = ExponentFamily::Gaussian {
        base: 2.0,
        amplitude: 1.0,
        center: [0.5, 0.5],
        width: 0.25,
    };
    let probe = Probe::Exponential { a: [0.8, 0.5] };
    println!(
        "continuous D_inf(x) of exp(0.8 x + 0.5 y) at (0.5, 0.5): {:.6}",
        delta_inf_x_continuous(&probe, [0.5, 0.5], &p)
    );

    let h = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let schemes = [
        ("directional + upwind log", SchemeOptions::default()),
        (
            "directional + centered log",
            SchemeOptions {
                log_magnitude: LogMagnitude::Centered,
                ..SchemeOptions::default()
            },
        ),
        (
            "axis4 + upwind log",
            SchemeOptions {
                stencil: Stencil::Axis4,
                ..SchemeOptions::default()
            },
        ),
        ("monotone", SchemeOptions::monotone()),
    ];
    for (name, scheme) in schemes {
        let setup = ConvergenceSetup {
            origin: [0.0, 0.0],
            extent: 1.0,
            points: vec![[0.5, 0.5], [0.375, 0.625], [0.625, 0.25]],
            scheme,
        };
        let r = convergence_order(&probe, &p, &h, &setup)?;
        let errs: Vec<String> = r.full_errors.iter().map(|e| format!("{e:.2e}")).collect();
        println!("{name:28} errors {} order {:.2}", errs.join(" "), r.full_order.value());
    }
    Ok(())
}
