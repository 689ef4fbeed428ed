//! The monotonicity inequality, the approximate identity g and reference
//! solutions.
//!
//! cargo run --example gadgets

use varinf::exponent::ExponentField;
use varinf::gadgets::{
    check_g_properties, g_eval, g_inverse, monotonicity_inequality_gap, reference_solutions, GFunctionParams,
    ReferenceKind,
};
use varinf::grid::{make_domain, sup_norm, Shape};
use varinf::operator::{residual_field, SchemeOptions};

fn main() -> varinf::Result<()> {
    for q in [2.0, 3.0, 8.0] {
        let gap = monotonicity_inequality_gap(&[0.3, -0.2], &[-0.5, 0.9], q)?;
        println!("q = {q}: gap {gap:.4e}");
    }

    let p = GFunctionParams::new(2.0, 1.5)?;
    for t in [0.0, 0.5, 2.0, 10.0] {
        let g = g_eval(t, &p);
        println!("g({t}) = {g:.6}, g^-1(g(t)) = {:.6}", g_inverse(g, &p));
    }
    let samples: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
    let r = check_g_properties(&p, &samples, 1e-6);
    println!(
        "g properties on {} samples: {} (max g - t {:.4} < {:.4})",
        r.samples,
        if r.passed() { "hold" } else { "FAIL" },
        r.max_shift,
        r.shift_bound
    );

    let d = make_domain(17, 17, 1.0 / 16.0, Shape::Rectangle)?;
    let field = ExponentField::constant(&d, 3.0)?;
    for kind in [
        ReferenceKind::AffineUnit { e: [0.6, 0.8] },
        ReferenceKind::Cone { vertex: [-0.5, 0.5] },
        ReferenceKind::Cone { vertex: [0.5, 0.5] },
    ] {
        let r = reference_solutions(&kind, &d)?;
        let res = sup_norm(&residual_field(&r.values, &field, &SchemeOptions::default()));
        println!("{kind:?}: solution {}, discrete residual {res:.2e}", r.is_solution);
    }
    Ok(())
}
