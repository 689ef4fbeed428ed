//! Numerical checks of comparison, sandwich, Lipschitz, Caccioppoli and
//! Harnack estimates, plus operator convergence orders.

mod convergence;
mod estimates;
mod sandwich;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{BoundaryData, GridFunction, Node};

pub use convergence::{
    convergence_order, convergence_order_with, ConvergenceReport, ConvergenceSetup, FullOperator, Order,
};
pub use estimates::{
    caccioppoli_check, fit_harnack_family, harnack_check, CaccioppoliReport, CutoffFunction,
    HarnackFamilyFit, HarnackOptions, HarnackReport,
};
pub use sandwich::{sandwich_experiment, SandwichReport, SandwichRow};

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// `max (u_sub - v_super)^+` over interior nodes.
    pub max_violation: f64,
    pub worst_node: Option<Node>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Interior ordering check of a sub/super pair that is ordered on the
/// boundary. A boundary violation is an error, not a failed check.
pub fn check_comparison(u_sub: &GridFunction, v_super: &GridFunction, tolerance: f64) -> Result<ComparisonReport> {
    u_sub.check_same_domain(v_super)?;
    let d = u_sub.domain();
    let boundary = d
        .boundary()
        .iter()
        .fold(0.0f64, |m, &idx| m.max(u_sub.get(idx) - v_super.get(idx)));
    if boundary > 0.0 {
        return Err(Error::BoundaryOrdering(boundary));
    }
    let mut max_violation = 0.0;
    let mut worst_node = None;
    for &idx in d.interior() {
        let v = u_sub.get(idx) - v_super.get(idx);
        if v > max_violation {
            max_violation = v;
            worst_node = Some(d.node(idx));
        }
    }
    Ok(ComparisonReport {
        max_violation,
        worst_node,
        tolerance,
        passed: max_violation <= tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub h: f64,
    /// Max centered-gradient magnitude over interior nodes.
    pub max_gradient: f64,
    pub boundary_lipschitz: f64,
    /// `max_gradient / boundary_lipschitz`; `None` for constant data.
    pub ratio: Option<f64>,
}

pub fn lipschitz_bound_check(u: &GridFunction, f: &BoundaryData) -> Result<LipschitzReport> {
    if !(std::sync::Arc::ptr_eq(u.domain(), f.domain()) || **u.domain() == **f.domain()) {
        return Err(Error::DomainMismatch);
    }
    let max_gradient = u.domain().interior().iter().fold(0.0f64, |m, &idx| {
        let g = u.grad_c(idx);
        m.max(g[0].hypot(g[1]))
    });
    let l = f.lipschitz_constant();
    Ok(LipschitzReport {
        h: u.domain().h(),
        max_gradient,
        boundary_lipschitz: l,
        ratio: (l > 0.0).then(|| max_gradient / l),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementSummary {
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: f64,
    /// Ratio at the finest grid over ratio at the coarsest.
    pub growth: f64,
    /// Set when the ratio keeps increasing under refinement by more than
    /// `growth_limit` overall.
    pub blow_up: bool,
}

/// Summarizes [`lipschitz_bound_check`] reports ordered from coarse to fine.
pub fn lipschitz_refinement(reports: &[LipschitzReport], growth_limit: f64) -> RefinementSummary {
    let ratios: Vec<Option<f64>> = reports.iter().map(|r| r.ratio).collect();
    let vals: Vec<f64> = ratios.iter().flatten().copied().collect();
    let max_ratio = vals.iter().copied().fold(0.0, f64::max);
    let growth = match (vals.first(), vals.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 1.0,
    };
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    RefinementSummary {
        ratios,
        max_ratio,
        growth,
        blow_up: vals.len() >= 2 && increasing && growth > growth_limit,
    }
}

/// Least-squares line through `(x, y)`: slope, intercept and RMS residual.
pub(crate) fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_domain, Shape};

    #[test]
    fn comparison_basics() {
        let d = make_domain(9, 9, 0.125, Shape::Rectangle).unwrap();
        let u = GridFunction::sample(&d, |x| x[0] * x[1]).unwrap();
        let r = check_comparison(&u, &u, 0.0).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert!(r.passed);
        let v = u.map(|a| a + 1.0);
        assert_eq!(check_comparison(&u, &v, 0.0).unwrap().max_violation, 0.0);
        assert!(matches!(check_comparison(&v, &u, 0.0), Err(Error::BoundaryOrdering(_))));

        let mut w = u.clone();
        let mid = d.index(Node::new(4, 4));
        w.set(mid, u.get(mid) - 0.25);
        let r = check_comparison(&u, &w, 0.1).unwrap();
        assert_eq!(r.max_violation, 0.25);
        assert_eq!(r.worst_node, Some(Node::new(4, 4)));
        assert!(!r.passed);
    }

    #[test]
    fn lipschitz_of_affine_is_one() {
        let d = make_domain(9, 9, 0.125, Shape::Rectangle).unwrap();
        let phi = |x: [f64; 2]| 0.6 * x[0] + 0.8 * x[1];
        let u = GridFunction::sample(&d, phi).unwrap();
        let f = BoundaryData::from_fn(&d, phi).unwrap();
        let r = lipschitz_bound_check(&u, &f).unwrap();
        assert!((r.ratio.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c, r) = fit_line(&x, &y);
        assert!((s - 2.5).abs() < 1e-12 && (c + 1.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn refinement_flags_growth() {
        let mk = |r: f64| LipschitzReport {
            h: 0.1,
            max_gradient: r,
            boundary_lipschitz: 1.0,
            ratio: Some(r),
        };
        assert!(!lipschitz_refinement(&[mk(1.0), mk(1.1), mk(1.05)], 1.5).blow_up);
        assert!(lipschitz_refinement(&[mk(1.0), mk(2.0), mk(4.0)], 1.5).blow_up);
    }
}
