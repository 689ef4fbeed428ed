use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::grid::{dist, Domain, GridFunction, Node};

/// Radial cutoff `min(1, (2R - |x - c|)^+ / R)`: 1 on `B_R`, 0 outside
/// `B_2R`, slope `1/R` in between.
#[derive(Debug, Clone)]
pub struct CutoffFunction {
    values: GridFunction,
    center: [f64; 2],
    radius: f64,
}

impl CutoffFunction {
    pub fn new(domain: &Arc<Domain>, center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("radius {radius} must be positive")));
        }
        if !domain.contains_ball(center, 2.0 * radius) {
            return Err(Error::BallNotContained {
                x: center[0],
                y: center[1],
                radius: 2.0 * radius,
            });
        }
        let values = GridFunction::sample(domain, |x| {
            ((2.0 * radius - dist(x, center)).max(0.0) / radius).min(1.0)
        })?;
        Ok(CutoffFunction { values, center, radius })
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn support_radius(&self) -> f64 {
        2.0 * self.radius
    }

    /// Gradient bound guaranteed for any cutoff of this kind.
    pub fn gradient_bound(&self) -> f64 {
        2.0 / self.radius
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaccioppoliReport {
    /// `max |zeta D ln u|^p`
    pub lhs: f64,
    /// `max |D zeta + zeta ln(zeta / u) D ln p|^p`
    pub rhs: f64,
    /// `max |D zeta|^p`, the constant-exponent right-hand side.
    pub rhs_classical: f64,
    pub slack: f64,
    pub lhs_node: Option<Node>,
    pub passed: bool,
}

/// Discrete check of `sup |zeta D ln u|^p <= sup |D zeta + zeta ln(zeta/u) D ln p|^p`
/// with centered differences and slack `slack_constant * h`.
pub fn caccioppoli_check(
    u: &GridFunction,
    zeta: &CutoffFunction,
    field: &ExponentField,
    slack_constant: f64,
) -> Result<CaccioppoliReport> {
    u.check_same_domain(zeta.values())?;
    let d = u.domain();
    if !(Arc::ptr_eq(d, field.domain()) || **d == **field.domain()) {
        return Err(Error::DomainMismatch);
    }
    let z = zeta.values();
    let mut min_u = f64::INFINITY;
    for &idx in d.interior() {
        if z.get(idx) > 0.0 {
            min_u = min_u.min(u.get(idx));
            for nb in d.axis_neighbors(idx) {
                min_u = min_u.min(u.get(nb));
            }
        }
    }
    if !(min_u > 0.0) {
        return Err(Error::NotPositive(min_u));
    }

    let mut lhs = 0.0f64;
    let mut lhs_node = None;
    let mut rhs = 0.0f64;
    let mut rhs_classical = 0.0f64;
    for &idx in d.interior() {
        let p = field.p(idx);
        let zv = z.get(idx);
        let gz = z.grad_c(idx);
        let (mut rx, mut ry) = (gz[0], gz[1]);
        if zv > 0.0 {
            let uv = u.get(idx);
            let gu = u.grad_c(idx);
            let l = (zv * gu[0] / uv).hypot(zv * gu[1] / uv).powf(p);
            if l > lhs {
                lhs = l;
                lhs_node = Some(d.node(idx));
            }
            let c = zv * (zv / uv).ln();
            let gl = field.grad_log_p(idx);
            rx += c * gl[0];
            ry += c * gl[1];
        }
        rhs = rhs.max(rx.hypot(ry).powf(p));
        rhs_classical = rhs_classical.max(gz[0].hypot(gz[1]).powf(p));
    }
    let slack = slack_constant * d.h();
    Ok(CaccioppoliReport {
        lhs,
        rhs,
        rhs_classical,
        slack,
        lhs_node,
        passed: lhs <= rhs + slack,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HarnackOptions {
    /// Shift `R^alpha` in the multiplicative form; 1 gives the shift `R`.
    pub alpha: f64,
    /// Points per axis of the logarithmic `(C1, C2)` search grid.
    pub grid_points: usize,
    pub c_min: f64,
    pub c_max: f64,
}

impl Default for HarnackOptions {
    fn default() -> Self {
        HarnackOptions {
            alpha: 1.0,
            grid_points: 50,
            c_min: 1e-3,
            c_max: 1e3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnackReport {
    pub center: [f64; 2],
    pub radius: f64,
    pub alpha: f64,
    pub shift: f64,
    pub nodes_in_ball: usize,
    pub sup_r: f64,
    pub inf_r: f64,
    /// `sup_{B_R} u / (inf_{B_R} u + R)`
    pub ratio: f64,
    pub sup_2r: f64,
    /// `|u + shift|_inf` over `B_2R`.
    pub shifted_norm: f64,
    /// `max ln((u(x)+s)/(u(y)+s)) / |x-y|` over pairs in `B_R`.
    pub max_log_slope: f64,
    /// Smallest (by `C1 + C2`) grid pair with
    /// `u(x)+s <= exp(C2 |x-y|/R) exp(C1 |u+s| |x-y|) (u(y)+s)`.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub feasible: bool,
}

fn log_grid(opts: &HarnackOptions) -> Vec<f64> {
    let n = opts.grid_points.max(2);
    let (a, b) = (opts.c_min.ln(), opts.c_max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Harnack ratio on `B_R(center)` and a feasible pair of constants for the
/// multiplicative form.
pub fn harnack_check(u: &GridFunction, center: [f64; 2], radius: f64, opts: &HarnackOptions) -> Result<HarnackReport> {
    let d = u.domain();
    if !(radius > 0.0) || !(opts.alpha > 0.0) {
        return Err(Error::param("radius and alpha must be positive"));
    }
    if !d.contains_ball(center, 2.0 * radius) {
        return Err(Error::BallNotContained {
            x: center[0],
            y: center[1],
            radius: 2.0 * radius,
        });
    }
    let mut inner = Vec::new();
    let mut sup_2r = f64::NEG_INFINITY;
    let mut min_2r = f64::INFINITY;
    for idx in 0..d.len() {
        if !d.is_active(idx) {
            continue;
        }
        let x = d.position(idx);
        let r = dist(x, center);
        if r <= 2.0 * radius {
            sup_2r = sup_2r.max(u.get(idx));
            min_2r = min_2r.min(u.get(idx));
            if r <= radius {
                inner.push(idx);
            }
        }
    }
    if inner.is_empty() {
        return Err(Error::param("no grid node in the ball"));
    }
    if min_2r < 0.0 {
        return Err(Error::NotPositive(min_2r));
    }
    let sup_r = inner.iter().fold(f64::NEG_INFINITY, |m, &i| m.max(u.get(i)));
    let inf_r = inner.iter().fold(f64::INFINITY, |m, &i| m.min(u.get(i)));
    let shift = radius.powf(opts.alpha);
    let shifted_norm = sup_2r + shift;

    let mut max_log_slope = 0.0f64;
    for (a, &i) in inner.iter().enumerate() {
        let xi = d.position(i);
        let li = (u.get(i) + shift).ln();
        for &j in &inner[a + 1..] {
            let r = dist(xi, d.position(j));
            let s = (li - (u.get(j) + shift).ln()).abs() / r;
            max_log_slope = max_log_slope.max(s);
        }
    }

    let grid = log_grid(opts);
    let mut best: Option<(f64, f64)> = None;
    for &c1 in &grid {
        for &c2 in &grid {
            if c2 / radius + c1 * shifted_norm >= max_log_slope {
                let better = match best {
                    None => true,
                    Some((b1, b2)) => c1 + c2 < b1 + b2 || (c1 + c2 == b1 + b2 && c2 < b2),
                };
                if better {
                    best = Some((c1, c2));
                }
            }
        }
    }
    Ok(HarnackReport {
        center,
        radius,
        alpha: opts.alpha,
        shift,
        nodes_in_ball: inner.len(),
        sup_r,
        inf_r,
        ratio: sup_r / (inf_r + radius),
        sup_2r,
        shifted_norm,
        max_log_slope,
        c1: best.map(|b| b.0),
        c2: best.map(|b| b.1),
        feasible: best.is_some(),
    })
}

/// Common bound `C <= exp(a + b R (S + R))` over a family of Harnack
/// reports, `S = sup_{B_2R} u`. Increasing in `S` because `b >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct HarnackFamilyFit {
    pub a: f64,
    pub b: f64,
    /// Largest `ln C - (a + b R (S + R))`; nonpositive when the fit bounds
    /// every member.
    pub max_excess: f64,
    pub all_finite: bool,
    pub bounded: bool,
}

impl HarnackFamilyFit {
    pub fn bound(&self, radius: f64, sup_2r: f64) -> f64 {
        (self.a + self.b * radius * (sup_2r + radius)).exp()
    }
}

pub fn fit_harnack_family(reports: &[HarnackReport], opts: &HarnackOptions) -> HarnackFamilyFit {
    let all_finite = reports.iter().all(|r| r.ratio.is_finite());
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.ratio.is_finite() && r.ratio > 0.0)
        .map(|r| (r.ratio.ln(), r.radius * (r.sup_2r + r.radius)))
        .collect();
    let mut bs = vec![0.0];
    bs.extend(log_grid(opts));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &b in &bs {
        let a = pts.iter().fold(0.0f64, |m, &(lc, t)| m.max(lc - b * t));
        if a + b < best.0 {
            best = (a + b, a, b);
        }
    }
    let (a, b) = (best.1, best.2);
    let max_excess = pts
        .iter()
        .fold(f64::NEG_INFINITY, |m, &(lc, t)| m.max(lc - a - b * t));
    HarnackFamilyFit {
        a,
        b,
        max_excess,
        all_finite,
        bounded: all_finite && max_excess <= 1e-12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{exponent_from_family, ExponentFamily};
    use crate::grid::{make_domain, Shape};

    fn dom() -> Arc<Domain> {
        make_domain(17, 17, 1.0 / 16.0, Shape::Rectangle).unwrap()
    }

    #[test]
    fn cutoff_invariants() {
        let d = dom();
        let z = CutoffFunction::new(&d, [0.5, 0.5], 0.2).unwrap();
        for idx in 0..d.len() {
            let x = d.position(idx);
            let v = z.values().get(idx);
            assert!((0.0..=1.0).contains(&v));
            let r = dist(x, [0.5, 0.5]);
            if r <= 0.2 {
                assert_eq!(v, 1.0);
            }
            if r >= 0.4 {
                assert_eq!(v, 0.0);
            }
        }
        for &idx in d.interior() {
            let g = z.values().grad_c(idx);
            assert!(g[0].hypot(g[1]) <= z.gradient_bound() + d.h());
        }
        assert!(CutoffFunction::new(&d, [0.5, 0.5], 0.3).is_err());
    }

    #[test]
    fn harnack_constant_and_loop_oracle() {
        let d = dom();
        let u = GridFunction::constant(&d, 2.0);
        let r = harnack_check(&u, [0.5, 0.5], 0.2, &HarnackOptions::default()).unwrap();
        assert_eq!(r.ratio, 2.0 / 2.2);
        assert!(r.ratio < 1.0);

        let u = GridFunction::sample(&d, |x| 0.6 * x[0] + 0.8 * x[1] + 0.1).unwrap();
        let r = harnack_check(&u, [0.5, 0.5], 0.2, &HarnackOptions::default()).unwrap();
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for idx in 0..d.len() {
            if dist(d.position(idx), [0.5, 0.5]) <= 0.2 {
                hi = hi.max(u.get(idx));
                lo = lo.min(u.get(idx));
            }
        }
        assert_eq!(r.ratio, hi / (lo + 0.2));
        assert!(r.feasible);

        let lam = 3.0;
        let v = u.map(|a| lam * a);
        let rv = harnack_check(&v, [0.5, 0.5], 0.2, &HarnackOptions::default()).unwrap();
        assert_eq!(rv.ratio, lam * hi / (lam * lo + 0.2));
    }

    #[test]
    fn harnack_rejects_negative_and_large_balls() {
        let d = dom();
        let u = GridFunction::sample(&d, |x| x[0] - 0.5).unwrap();
        assert!(matches!(
            harnack_check(&u, [0.5, 0.5], 0.2, &HarnackOptions::default()),
            Err(Error::NotPositive(_))
        ));
        let u = GridFunction::constant(&d, 1.0);
        assert!(matches!(
            harnack_check(&u, [0.5, 0.5], 0.3, &HarnackOptions::default()),
            Err(Error::BallNotContained { .. })
        ));
    }

    #[test]
    fn caccioppoli_hand_cases() {
        let d = dom();
        let z = CutoffFunction::new(&d, [0.5, 0.5], 0.2).unwrap();
        let p2 = exponent_from_family(&d, &ExponentFamily::Constant { value: 2.0 }).unwrap();

        let u = GridFunction::constant(&d, 3.0);
        let r = caccioppoli_check(&u, &z, &p2, 0.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.passed);
        assert_eq!(r.rhs, r.rhs_classical);

        let u = GridFunction::sample(&d, |x| x[0] + 0.5).unwrap();
        let r = caccioppoli_check(&u, &z, &p2, 0.0).unwrap();
        let mut lhs = 0.0f64;
        for &idx in d.interior() {
            let zv = z.values().get(idx);
            lhs = lhs.max((zv / u.get(idx)).powi(2));
        }
        assert!((r.lhs - lhs).abs() <= 1e-12 * lhs);
        assert!(r.rhs >= (1.0 / 0.2f64).powi(2) * (1.0 - 1e-12));
        assert_eq!(r.rhs, r.rhs_classical);

        let u = GridFunction::sample(&d, |x| x[0] - 0.2).unwrap();
        assert!(matches!(caccioppoli_check(&u, &z, &p2, 0.0), Err(Error::NotPositive(_))));
    }

    #[test]
    fn family_fit_bounds_members() {
        let d = dom();
        let mut reports = Vec::new();
        for c in [0.5, 1.0, 2.0] {
            let u = GridFunction::sample(&d, |x| c * (x[0] + 0.1)).unwrap();
            reports.push(harnack_check(&u, [0.5, 0.5], 0.15, &HarnackOptions::default()).unwrap());
        }
        let fit = fit_harnack_family(&reports, &HarnackOptions::default());
        assert!(fit.bounded);
        for r in &reports {
            assert!(r.ratio <= fit.bound(r.radius, r.sup_2r) * (1.0 + 1e-12));
        }
    }
}
