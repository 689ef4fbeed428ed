use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{exponent_from_fn, ExponentField, ExponentFn};
use crate::grid::{Domain, GridFunction, Node, Shape};
use crate::operator::{full_operator_discrete_with, normalized_inf_discrete_with, normalized_targets, SchemeOptions, SmoothProbe};

use super::fit_line;

/// Square window and fixed sample points for a refinement study. Every
/// point must be a node of the coarsest grid.
#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub origin: [f64; 2],
    pub extent: f64,
    pub points: Vec<[f64; 2]>,
    pub scheme: SchemeOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Order {
    /// Errors at rounding level for every `h`.
    Exact,
    Fitted { order: f64, residual: f64 },
}

impl Order {
    /// Fitted order, or infinity for exact reproduction.
    pub fn value(&self) -> f64 {
        match *self {
            Order::Exact => f64::INFINITY,
            Order::Fitted { order, .. } => order,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub h: Vec<f64>,
    /// Max error of the normalized infinity-Laplacian over the sample points.
    pub normalized_errors: Vec<f64>,
    /// Max error of the full variable-exponent operator.
    pub full_errors: Vec<f64>,
    pub normalized_order: Order,
    pub full_order: Order,
}

fn order_of(h: &[f64], errors: &[f64], floor: f64) -> Order {
    let (x, y): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .unzip();
    if x.len() < 2 {
        return Order::Exact;
    }
    let (order, _, residual) = fit_line(&x, &y);
    Order::Fitted { order, residual }
}

/// Signature of a pointwise discrete `D_inf(x)` (normalized), as in
/// [`full_operator_discrete_with`].
pub type FullOperator = dyn Fn(&GridFunction, Node, &ExponentField, &SchemeOptions) -> Result<f64> + Sync;

/// Max-over-points error of the discrete operators against the continuous
/// targets for each `h`, with log-log fitted orders.
pub fn convergence_order(
    probe: &dyn SmoothProbe,
    exponent: &dyn ExponentFn,
    h_list: &[f64],
    setup: &ConvergenceSetup,
) -> Result<ConvergenceReport> {
    convergence_order_with(probe, exponent, h_list, setup, &full_operator_discrete_with)
}

/// [`convergence_order`] with the full operator replaced by `full_op`.
pub fn convergence_order_with(
    probe: &dyn SmoothProbe,
    exponent: &dyn ExponentFn,
    h_list: &[f64],
    setup: &ConvergenceSetup,
    full_op: &FullOperator,
) -> Result<ConvergenceReport> {
    if h_list.len() < 3 {
        return Err(Error::param("need at least 3 grid spacings"));
    }
    if !h_list.windows(2).all(|w| w[1] < w[0]) {
        return Err(Error::param("grid spacings must decrease"));
    }
    let mut targets = Vec::with_capacity(setup.points.len());
    for &x in &setup.points {
        let g = probe.gradient(x);
        if g[0].hypot(g[1]) < 1e-6 {
            return Err(Error::param(format!(
                "probe gradient vanishes near ({}, {})",
                x[0], x[1]
            )));
        }
        targets.push(normalized_targets(probe, x, exponent).expect("nonzero gradient"));
    }
    let scale = targets
        .iter()
        .fold(1.0f64, |m, t| m.max(t.0.abs()).max(t.1.abs()));

    let mut normalized_errors = Vec::new();
    let mut full_errors = Vec::new();
    for &h in h_list {
        let cells = setup.extent / h;
        let n = cells.round();
        if (cells - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::param(format!("extent {} is not a multiple of h = {h}", setup.extent)));
        }
        let n = n as usize + 1;
        let d = Domain::new(n, n, h, setup.origin, Shape::Rectangle)?;
        let u = GridFunction::sample(&d, |x| probe.value(x))?;
        let field = exponent_from_fn(&d, exponent)?;
        let mut en: f64 = 0.0;
        let mut ef: f64 = 0.0;
        for (x, t) in setup.points.iter().zip(&targets) {
            let node = node_at(&d, *x)?;
            let a = normalized_inf_discrete_with(&u, node, &setup.scheme)?;
            let b = full_op(&u, node, &field, &setup.scheme)?;
            en = en.max((a - t.0).abs());
            ef = ef.max((b - t.1).abs());
        }
        normalized_errors.push(en);
        full_errors.push(ef);
    }
    let floor = 1e-9 * scale;
    Ok(ConvergenceReport {
        h: h_list.to_vec(),
        normalized_order: order_of(h_list, &normalized_errors, floor),
        full_order: order_of(h_list, &full_errors, floor),
        normalized_errors,
        full_errors,
    })
}

fn node_at(d: &Domain, x: [f64; 2]) -> Result<Node> {
    let o = d.origin();
    let h = d.h();
    let fi = (x[0] - o[0]) / h;
    let fj = (x[1] - o[1]) / h;
    let (i, j) = (fi.round(), fj.round());
    if (fi - i).abs() > 1e-9 || (fj - j).abs() > 1e-9 || i < 0.0 || j < 0.0 {
        return Err(Error::param(format!("sample point ({}, {}) is not a grid node", x[0], x[1])));
    }
    let node = Node::new(i as usize, j as usize);
    d.check_interior(node)?;
    Ok(node)
}
