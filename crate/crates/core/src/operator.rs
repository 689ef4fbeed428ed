//! Pointwise evaluation of the infinity-Laplacian and of its variable-exponent
//! variant
//!
//! ```text
//! D_inf(x) u = <D^2u Du, Du> + |Du|^2 ln|Du| <Du, D ln p>,
//! ```
//!
//! in continuous form (on probes with known derivatives) and in discrete form
//! on grid functions. The discrete operator works with the equation divided
//! by `|Du|^2`:
//!
//! ```text
//! N(u) + ln|Du| <Du, D ln p> = 0,     N(u) = <D^2u Du, Du> / |Du|^2.
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent::{ExponentField, ExponentFn};
use crate::grid::{sup_norm, GridFunction, Node};

/// A C^2 function with closed-form derivatives.
pub trait SmoothProbe: Sync {
    fn value(&self, x: [f64; 2]) -> f64;
    fn gradient(&self, x: [f64; 2]) -> [f64; 2];
    fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2];
}

/// Largest off-diagonal mismatch of the probe's Hessian over `points`.
pub fn hessian_asymmetry(probe: &dyn SmoothProbe, points: &[[f64; 2]]) -> f64 {
    points.iter().fold(0.0, |m, &x| {
        let hx = probe.hessian(x);
        m.max((hx[0][1] - hx[1][0]).abs())
    })
}

/// Probes with closed-form derivatives used across tests, examples and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Probe {
    /// `<e, x> + c`
    Affine { e: [f64; 2], c: f64 },
    /// `|x|^2 / 2`
    HalfSquare,
    /// `x1^{4/3} - x2^{4/3}` (odd extension of the powers)
    Aronsson,
    /// `scale * |x - vertex|`
    Cone { vertex: [f64; 2], scale: f64 },
    /// `exp(<a, x>)`
    Exponential { a: [f64; 2] },
    /// `x1 + x2 / 2 + sin(2 x1) cos(x2) / 4`
    Trig,
}

fn pow43(t: f64) -> f64 {
    t.signum() * t.abs().powf(4.0 / 3.0)
}

impl SmoothProbe for Probe {
    fn value(&self, x: [f64; 2]) -> f64 {
        match *self {
            Probe::Affine { e, c } => e[0] * x[0] + e[1] * x[1] + c,
            Probe::HalfSquare => 0.5 * (x[0] * x[0] + x[1] * x[1]),
            Probe::Aronsson => pow43(x[0]) - pow43(x[1]),
            Probe::Cone { vertex, scale } => scale * (x[0] - vertex[0]).hypot(x[1] - vertex[1]),
            Probe::Exponential { a } => (a[0] * x[0] + a[1] * x[1]).exp(),
            Probe::Trig => x[0] + 0.5 * x[1] + 0.25 * (2.0 * x[0]).sin() * x[1].cos(),
        }
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            Probe::Affine { e, .. } => e,
            Probe::HalfSquare => x,
            Probe::Aronsson => [
                4.0 / 3.0 * x[0].cbrt(),
                -4.0 / 3.0 * x[1].cbrt(),
            ],
            Probe::Cone { vertex, scale } => {
                let r = (x[0] - vertex[0]).hypot(x[1] - vertex[1]);
                [scale * (x[0] - vertex[0]) / r, scale * (x[1] - vertex[1]) / r]
            }
            Probe::Exponential { a } => {
                let v = (a[0] * x[0] + a[1] * x[1]).exp();
                [a[0] * v, a[1] * v]
            }
            Probe::Trig => [
                1.0 + 0.5 * (2.0 * x[0]).cos() * x[1].cos(),
                0.5 - 0.25 * (2.0 * x[0]).sin() * x[1].sin(),
            ],
        }
    }

    fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        match *self {
            Probe::Affine { .. } => [[0.0; 2]; 2],
            Probe::HalfSquare => [[1.0, 0.0], [0.0, 1.0]],
            Probe::Aronsson => {
                let xx = 4.0 / 9.0 / x[0].abs().cbrt().powi(2);
                let yy = -4.0 / 9.0 / x[1].abs().cbrt().powi(2);
                [[xx, 0.0], [0.0, yy]]
            }
            Probe::Cone { vertex, scale } => {
                let dx = x[0] - vertex[0];
                let dy = x[1] - vertex[1];
                let r = dx.hypot(dy);
                let r3 = r * r * r;
                [
                    [scale * dy * dy / r3, -scale * dx * dy / r3],
                    [-scale * dx * dy / r3, scale * dx * dx / r3],
                ]
            }
            Probe::Exponential { a } => {
                let v = (a[0] * x[0] + a[1] * x[1]).exp();
                [
                    [a[0] * a[0] * v, a[0] * a[1] * v],
                    [a[0] * a[1] * v, a[1] * a[1] * v],
                ]
            }
            Probe::Trig => {
                let (s2, c2) = (2.0 * x[0]).sin_cos();
                let (sy, cy) = x[1].sin_cos();
                [
                    [-s2 * cy, -0.5 * c2 * sy],
                    [-0.5 * c2 * sy, -0.25 * s2 * cy],
                ]
            }
        }
    }
}

/// A probe assembled from closures.
pub struct FnProbe<V, G, H> {
    pub value: V,
    pub gradient: G,
    pub hessian: H,
}

impl<V, G, H> SmoothProbe for FnProbe<V, G, H>
where
    V: Fn([f64; 2]) -> f64 + Sync,
    G: Fn([f64; 2]) -> [f64; 2] + Sync,
    H: Fn([f64; 2]) -> [[f64; 2]; 2] + Sync,
{
    fn value(&self, x: [f64; 2]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        (self.gradient)(x)
    }

    fn hessian(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        (self.hessian)(x)
    }
}

/// `<H Dphi, Dphi>` at `x`.
pub fn delta_inf_continuous(probe: &dyn SmoothProbe, x: [f64; 2]) -> f64 {
    let g = probe.gradient(x);
    let hm = probe.hessian(x);
    g[0] * (hm[0][0] * g[0] + hm[0][1] * g[1]) + g[1] * (hm[1][0] * g[0] + hm[1][1] * g[1])
}

/// `D_inf phi + |Dphi|^2 ln|Dphi| <Dphi, D ln p>`, with the second term taken
/// as 0 where `Dphi = 0` (the limit of `s^2 ln s`).
pub fn delta_inf_x_continuous(probe: &dyn SmoothProbe, x: [f64; 2], exponent: &dyn ExponentFn) -> f64 {
    let g = probe.gradient(x);
    let s2 = g[0] * g[0] + g[1] * g[1];
    let base = delta_inf_continuous(probe, x);
    if s2 == 0.0 {
        return base;
    }
    let gl = exponent.grad_log_p(x);
    base + s2 * 0.5 * s2.ln() * (g[0] * gl[0] + g[1] * gl[1])
}

/// Continuous targets of the two discrete operators at `x`:
/// `(D_inf phi / |Dphi|^2, D_inf(x) phi / |Dphi|^2)`. `None` where `Dphi = 0`.
pub fn normalized_targets(
    probe: &dyn SmoothProbe,
    x: [f64; 2],
    exponent: &dyn ExponentFn,
) -> Option<(f64, f64)> {
    let g = probe.gradient(x);
    let s2 = g[0] * g[0] + g[1] * g[1];
    if s2 == 0.0 {
        return None;
    }
    let normalized = delta_inf_continuous(probe, x) / s2;
    let gl = exponent.grad_log_p(x);
    Some((normalized, normalized + 0.5 * s2.ln() * (g[0] * gl[0] + g[1] * gl[1])))
}

/// Which neighbors enter the discrete normalized infinity-Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// `(max + min - 2u) / h^2` over the four axis neighbors. Monotone, but
    /// consistent only where the gradient is axis-aligned.
    Axis4,
    /// Second difference along the centered-gradient direction `n`:
    /// `n1^2 D_xx + n2^2 D_yy + 2 n1 n2 D_xy` on the 3x3 block. Second-order
    /// consistent wherever the gradient does not vanish; falls back to
    /// [`Stencil::Axis4`] at gradient-degenerate nodes and where a diagonal
    /// neighbor is outside the domain.
    #[default]
    Directional,
}

/// Discretization of the log term `ln|Du| <Du, D ln p>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogMagnitude {
    /// Upwind magnitude inside the logarithm, centered gradient outside.
    #[default]
    UpwindLog,
    /// Centered gradient throughout.
    Centered,
    /// Lax-Friedrichs form
    /// `ln(|g|^2 + d^2)/2 <g, D ln p> + theta/(2h) (sum of axis neighbors - 4u)`
    /// with `theta = |D ln p| (1 + |ln d|)` and `d` the guard. Nondecreasing
    /// in every neighbor value; with [`Stencil::Axis4`] the whole scheme is
    /// monotone, at the price of `O(h)` artificial diffusion.
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeOptions {
    pub stencil: Stencil,
    pub log_magnitude: LogMagnitude,
    /// Gradient-zero guard; `None` means [`default_guard`].
    pub guard: Option<f64>,
}

impl SchemeOptions {
    /// [`Stencil::Axis4`] with [`LogMagnitude::Monotone`]: every residual is
    /// nondecreasing in each neighbor value, so discrete solutions obey
    /// comparison exactly. Consistent only where the gradient is
    /// axis-aligned.
    pub fn monotone() -> Self {
        SchemeOptions {
            stencil: Stencil::Axis4,
            log_magnitude: LogMagnitude::Monotone,
            guard: None,
        }
    }

    pub fn guard_for(&self, u: &GridFunction) -> f64 {
        self.guard.unwrap_or_else(|| default_guard(u))
    }
}

/// `1e-8 (1 + |u|_inf) / h`
pub fn default_guard(u: &GridFunction) -> f64 {
    1e-8 * (1.0 + sup_norm(u)) / u.domain().h()
}

/// Neighbor combination `S` with `N(u) = (S - 2u) / h^2`.
#[inline]
pub(crate) fn neighbor_sum(u: &GridFunction, idx: usize, stencil: Stencil, guard: f64) -> f64 {
    let d = u.domain();
    let v = u.values();
    let [e, w, n, s] = d.axis_neighbors(idx);
    let axis4 = || {
        let a = [v[e], v[w], v[n], v[s]];
        let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
        hi + lo
    };
    match stencil {
        Stencil::Axis4 => axis4(),
        Stencil::Directional => {
            let g = u.grad_c(idx);
            let mag = g[0].hypot(g[1]);
            let diag = d.diagonal_neighbors(idx);
            if !(mag >= guard) || mag == 0.0 || diag.iter().any(|&k| !d.is_active(k)) {
                return axis4();
            }
            let (nx, ny) = (g[0] / mag, g[1] / mag);
            let [ne, nw, se, sw] = diag;
            nx * nx * (v[e] + v[w])
                + ny * ny * (v[n] + v[s])
                + 0.5 * nx * ny * (v[ne] - v[nw] - v[se] + v[sw])
        }
    }
}

#[inline]
pub(crate) fn normalized_at(u: &GridFunction, idx: usize, stencil: Stencil, guard: f64) -> f64 {
    let h = u.domain().h();
    (neighbor_sum(u, idx, stencil, guard) - 2.0 * u.get(idx)) / (h * h)
}

/// The log term at `idx`, split as `a - b u(idx)` with the rest of the
/// stencil frozen. `b` is nonzero only for [`LogMagnitude::Monotone`].
#[inline]
pub(crate) fn log_term_split(
    u: &GridFunction,
    idx: usize,
    field: &ExponentField,
    magnitude: LogMagnitude,
    guard: f64,
) -> (f64, f64) {
    let g = u.grad_c(idx);
    let gl = field.grad_log_p(idx);
    let dot = g[0] * gl[0] + g[1] * gl[1];
    let m = match magnitude {
        LogMagnitude::UpwindLog => u.grad_mag_upwind(idx),
        LogMagnitude::Centered => g[0].hypot(g[1]),
        LogMagnitude::Monotone => {
            let d = u.domain();
            let v = u.values();
            let theta = gl[0].hypot(gl[1]) * (1.0 + guard.ln().abs());
            let c = theta / (2.0 * d.h());
            let sum: f64 = d.axis_neighbors(idx).iter().map(|&k| v[k]).sum();
            let h = 0.5 * (g[0] * g[0] + g[1] * g[1] + guard * guard).ln() * dot;
            return (h + c * sum, 4.0 * c);
        }
    };
    if !(m >= guard) || m == 0.0 {
        return (0.0, 0.0);
    }
    (m.ln() * dot, 0.0)
}

/// `ln(m) <g_c, D ln p>` (0 where `m < guard`), or its monotone variant.
#[inline]
pub(crate) fn log_term_at(
    u: &GridFunction,
    idx: usize,
    field: &ExponentField,
    magnitude: LogMagnitude,
    guard: f64,
) -> f64 {
    let (a, b) = log_term_split(u, idx, field, magnitude, guard);
    if b == 0.0 {
        a
    } else {
        a - b * u.get(idx)
    }
}

#[inline]
pub(crate) fn full_at(
    u: &GridFunction,
    idx: usize,
    field: &ExponentField,
    opts: &SchemeOptions,
    guard: f64,
) -> f64 {
    let normalized = normalized_at(u, idx, opts.stencil, guard);
    if field.is_constant() {
        return normalized;
    }
    normalized + log_term_at(u, idx, field, opts.log_magnitude, guard)
}

/// Discrete normalized infinity-Laplacian with the default scheme.
pub fn normalized_inf_discrete(u: &GridFunction, node: Node) -> Result<f64> {
    normalized_inf_discrete_with(u, node, &SchemeOptions::default())
}

pub fn normalized_inf_discrete_with(u: &GridFunction, node: Node, opts: &SchemeOptions) -> Result<f64> {
    let idx = u.domain().check_interior(node)?;
    Ok(normalized_at(u, idx, opts.stencil, opts.guard_for(u)))
}

/// Normalized discrete `D_inf(x)` at an interior node with gradient guard `guard`.
pub fn full_operator_discrete(u: &GridFunction, node: Node, field: &ExponentField, guard: f64) -> Result<f64> {
    let opts = SchemeOptions {
        guard: Some(guard),
        ..SchemeOptions::default()
    };
    full_operator_discrete_with(u, node, field, &opts)
}

pub fn full_operator_discrete_with(
    u: &GridFunction,
    node: Node,
    field: &ExponentField,
    opts: &SchemeOptions,
) -> Result<f64> {
    let idx = u.domain().check_interior(node)?;
    Ok(full_at(u, idx, field, opts, opts.guard_for(u)))
}

/// The discrete operator at every interior node, 0 elsewhere.
pub fn residual_field(u: &GridFunction, field: &ExponentField, opts: &SchemeOptions) -> GridFunction {
    let guard = opts.guard_for(u);
    let d = u.domain();
    let vals: Vec<(usize, f64)> = d
        .interior()
        .par_iter()
        .map(|&idx| (idx, full_at(u, idx, field, opts, guard)))
        .collect();
    let mut r = GridFunction::zeros(d);
    for (idx, v) in vals {
        r.set(idx, v);
    }
    r
}

/// Max of `|residual|` over interior nodes.
pub(crate) fn residual_sup(u: &GridFunction, field: &ExponentField, opts: &SchemeOptions, guard: f64) -> f64 {
    u.domain()
        .interior()
        .iter()
        .fold(0.0, |m, &idx| m.max(full_at(u, idx, field, opts, guard).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{exponent_from_family, exponent_from_samples, ExponentFamily, FnExponent};
    use crate::grid::{make_domain, Domain, Shape};
    use std::sync::Arc;

    fn unit_square(n: usize) -> Arc<Domain> {
        make_domain(n, n, 1.0 / (n - 1) as f64, Shape::Rectangle).unwrap()
    }

    fn exp_x1() -> FnExponent<impl Fn([f64; 2]) -> f64 + Sync, impl Fn([f64; 2]) -> [f64; 2] + Sync> {
        FnExponent {
            p: |x: [f64; 2]| x[0].exp(),
            grad_log_p: |_| [1.0, 0.0],
        }
    }

    #[test]
    fn continuous_infinity_laplacian() {
        let affine = Probe::Affine { e: [0.3, -2.0], c: 1.0 };
        assert_eq!(delta_inf_continuous(&affine, [0.4, 0.1]), 0.0);
        assert_eq!(delta_inf_continuous(&Probe::HalfSquare, [1.0, 1.0]), 2.0);
        for x in [[0.3, 0.7], [1.2, 0.4], [2.0, 1.5]] {
            let v = delta_inf_continuous(&Probe::Aronsson, x);
            assert!(v.abs() < 1e-14, "{v}");
        }
        let pts = [[0.3, 0.7], [1.2, 0.4]];
        for p in [Probe::Aronsson, Probe::Trig, Probe::Cone { vertex: [-1.0, 0.0], scale: 2.0 }] {
            assert_eq!(hessian_asymmetry(&p, &pts), 0.0);
        }
    }

    #[test]
    fn continuous_variable_exponent_operator() {
        let p = exp_x1();
        let unit = Probe::Affine { e: [0.6, 0.8], c: 0.0 };
        assert!(delta_inf_x_continuous(&unit, [0.5, 0.5], &p).abs() < 1e-15);
        let two = Probe::Affine { e: [2.0, 0.0], c: 0.0 };
        let v = delta_inf_x_continuous(&two, [0.5, 0.5], &p);
        assert!((v - 8.0 * 2f64.ln()).abs() < 1e-14);
        assert!((v - 5.5452).abs() < 1e-4);
        let flat = Probe::Affine { e: [0.0, 0.0], c: 3.0 };
        assert_eq!(delta_inf_x_continuous(&flat, [0.5, 0.5], &p), 0.0);
    }

    #[test]
    fn normalized_discrete_cases() {
        let d = unit_square(9);
        let opts_axis = SchemeOptions { stencil: Stencil::Axis4, ..Default::default() };
        for opts in [SchemeOptions::default(), opts_axis] {
            let u = GridFunction::sample(&d, |x| 3.0 * x[1] - 1.0).unwrap();
            let sq = GridFunction::sample(&d, |x| x[0] * x[0]).unwrap();
            for &idx in d.interior() {
                let node = d.node(idx);
                assert!(normalized_inf_discrete_with(&u, node, &opts).unwrap().abs() < 1e-10);
                let v = normalized_inf_discrete_with(&sq, node, &opts).unwrap();
                assert!((v - 2.0).abs() < 1e-9, "{v} at {node:?}");
            }
        }
    }

    #[test]
    fn normalized_discrete_vanishes_on_aronsson() {
        // off-axis node at (0.75, 0.5) on grids over [0.25, 1.25]^2
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [9, 17, 33] {
            let h = 1.0 / (n - 1) as f64;
            let d = Domain::new(n, n, h, [0.25, 0.25], Shape::Rectangle).unwrap();
            let u = GridFunction::sample(&d, |x| Probe::Aronsson.value(x)).unwrap();
            let node = Node::new((n - 1) / 2, (n - 1) / 4);
            errs.push(normalized_inf_discrete(&u, node).unwrap().abs());
            hs.push(h);
        }
        let order = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
        assert!(order >= 0.5, "{errs:?} order {order}");
    }

    #[test]
    fn full_operator_cases() {
        let d = Domain::new(17, 17, 1.0 / 16.0, [0.2, 0.1], Shape::Rectangle).unwrap();
        let p: Vec<f64> = (0..d.len()).map(|idx| d.position(idx)[0].exp()).collect();
        let field = exponent_from_samples(&d, p).unwrap();
        let unit = GridFunction::sample(&d, |x| 0.8 * x[0] - 0.6 * x[1]).unwrap();
        let flat = GridFunction::constant(&d, 2.0);
        let two = GridFunction::sample(&d, |x| 2.0 * x[0]).unwrap();
        let guard = default_guard(&two);
        for &idx in d.interior() {
            let node = d.node(idx);
            assert!(full_operator_discrete(&unit, node, &field, guard).unwrap().abs() < 1e-12);
            assert_eq!(full_operator_discrete(&flat, node, &field, guard).unwrap(), 0.0);
            let v = full_operator_discrete(&two, node, &field, guard).unwrap();
            assert!((v - 2.0 * 2f64.ln()).abs() < 1e-9, "{v}");
        }
        assert!(full_operator_discrete(&two, Node::new(0, 0), &field, guard).is_err());
    }

    #[test]
    fn constant_exponent_reduces_bit_exactly() {
        let d = unit_square(9);
        let field = ExponentField::constant(&d, 3.5).unwrap();
        let u = GridFunction::sample(&d, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let guard = default_guard(&u);
        for &idx in d.interior() {
            let node = d.node(idx);
            let a = full_operator_discrete(&u, node, &field, guard).unwrap();
            let b = normalized_inf_discrete_with(&u, node, &SchemeOptions { guard: Some(guard), ..Default::default() })
                .unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn residual_field_matches_pointwise_loop() {
        let d = unit_square(11);
        let field = exponent_from_family(
            &d,
            &ExponentFamily::Gaussian { base: 2.0, amplitude: 1.0, center: [0.5, 0.5], width: 0.3 },
        )
        .unwrap();
        let u = GridFunction::sample(&d, |x| (x[0] + 0.2).powf(1.5) - x[1]).unwrap();
        let opts = SchemeOptions::default();
        let r = residual_field(&u, &field, &opts);
        let guard = default_guard(&u);
        for idx in 0..d.len() {
            let expect = if d.is_interior(idx) {
                full_operator_discrete(&u, d.node(idx), &field, guard).unwrap()
            } else {
                0.0
            };
            assert_eq!(r.get(idx), expect);
        }
        let unit = GridFunction::sample(&d, |x| x[1]).unwrap();
        assert!(sup_norm(&residual_field(&unit, &field, &opts)) < 1e-12);
    }

    #[test]
    fn scaling_toward_constant_sends_operator_to_zero() {
        let d = unit_square(17);
        let field = exponent_from_family(&d, &ExponentFamily::Affine { a: [1.0, 0.5], b: 2.0 }).unwrap();
        let node = Node::new(6, 9);
        let mut prev = f64::INFINITY;
        for s in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
            let u = GridFunction::sample(&d, |x| s * Probe::Trig.value(x)).unwrap();
            let v = full_operator_discrete(&u, node, &field, 1e-14).unwrap().abs();
            assert!(v < prev);
            prev = v;
            let c = delta_inf_x_continuous(
                &FnProbe {
                    value: |x| s * Probe::Trig.value(x),
                    gradient: |x| Probe::Trig.gradient(x).map(|g| s * g),
                    hessian: |x| Probe::Trig.hessian(x).map(|r| r.map(|h| s * h)),
                },
                [0.4, 0.6],
                &ExponentFamily::Affine { a: [1.0, 0.5], b: 2.0 },
            );
            assert!(c.abs() < 10.0 * s * s);
        }
        assert!(prev < 1e-3);
    }
}
