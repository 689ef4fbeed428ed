//! The variable exponent `p(x) > 1` and its logarithmic gradient.
//!
//! The field stores `grad ln p` per node because the operator consumes it
//! pointwise. A field whose stored gradient vanishes identically is treated
//! as constant, and the operator then reduces bit-exactly to the classical
//! infinity-Laplacian.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Node};

/// Continuous description of an exponent: `p` and `grad ln p` at any point.
pub trait ExponentFn: Sync {
    fn p(&self, x: [f64; 2]) -> f64;
    fn grad_log_p(&self, x: [f64; 2]) -> [f64; 2];
}

/// Closed-form exponent families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ExponentFamily {
    Constant { value: f64 },
    /// `p(x) = <a, x> + b`
    Affine { a: [f64; 2], b: f64 },
    /// `p(x) = base + amplitude * exp(-|x - center|^2 / (2 width^2))`
    Gaussian {
        base: f64,
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
}

impl ExponentFn for ExponentFamily {
    fn p(&self, x: [f64; 2]) -> f64 {
        match *self {
            ExponentFamily::Constant { value } => value,
            ExponentFamily::Affine { a, b } => a[0] * x[0] + a[1] * x[1] + b,
            ExponentFamily::Gaussian {
                base,
                amplitude,
                center,
                width,
            } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                base + amplitude * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
            }
        }
    }

    fn grad_log_p(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            ExponentFamily::Constant { .. } => [0.0, 0.0],
            ExponentFamily::Affine { a, .. } => {
                let p = self.p(x);
                [a[0] / p, a[1] / p]
            }
            ExponentFamily::Gaussian {
                amplitude,
                center,
                width,
                ..
            } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let w2 = width * width;
                let bump = amplitude * (-(dx * dx + dy * dy) / (2.0 * w2)).exp();
                let p = self.p(x);
                [-bump * dx / (w2 * p), -bump * dy / (w2 * p)]
            }
        }
    }
}

/// An exponent given by a pair of closures.
pub struct FnExponent<P, G> {
    pub p: P,
    pub grad_log_p: G,
}

impl<P, G> ExponentFn for FnExponent<P, G>
where
    P: Fn([f64; 2]) -> f64 + Sync,
    G: Fn([f64; 2]) -> [f64; 2] + Sync,
{
    fn p(&self, x: [f64; 2]) -> f64 {
        (self.p)(x)
    }

    fn grad_log_p(&self, x: [f64; 2]) -> [f64; 2] {
        (self.grad_log_p)(x)
    }
}

#[derive(Debug, Clone)]
pub struct ExponentField {
    domain: Arc<Domain>,
    p: Vec<f64>,
    grad_log_p: Vec<[f64; 2]>,
    p_min: f64,
    p_max: f64,
    grad_log_p_sup: f64,
}

impl ExponentField {
    /// Validating constructor. Statistics are taken over active nodes; the
    /// `p > 1` requirement is enforced at every node of the array.
    pub fn new(domain: &Arc<Domain>, p: Vec<f64>, grad_log_p: Vec<[f64; 2]>) -> Result<Self> {
        let field = Self::from_parts_unchecked(domain, p, grad_log_p)?;
        let diag = validate(&field);
        if let Some(&node) = diag.non_finite.first().or(diag.violations.first()) {
            return Err(Error::InvalidExponent {
                i: node.i,
                j: node.j,
                value: field.p[domain.index(node)],
            });
        }
        Ok(field)
    }

    /// Builds a field without checking `p > 1`, for feeding [`validate`].
    pub fn from_parts_unchecked(
        domain: &Arc<Domain>,
        p: Vec<f64>,
        grad_log_p: Vec<[f64; 2]>,
    ) -> Result<Self> {
        let n = domain.len();
        if p.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: p.len() });
        }
        if grad_log_p.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: grad_log_p.len(),
            });
        }
        let mut field = ExponentField {
            domain: Arc::clone(domain),
            p,
            grad_log_p,
            p_min: f64::INFINITY,
            p_max: f64::NEG_INFINITY,
            grad_log_p_sup: 0.0,
        };
        for idx in 0..n {
            if !domain.is_active(idx) {
                continue;
            }
            field.p_min = field.p_min.min(field.p[idx]);
            field.p_max = field.p_max.max(field.p[idx]);
            let g = field.grad_log_p[idx];
            field.grad_log_p_sup = field.grad_log_p_sup.max(g[0].hypot(g[1]));
        }
        Ok(field)
    }

    pub fn constant(domain: &Arc<Domain>, value: f64) -> Result<Self> {
        exponent_from_family(domain, &ExponentFamily::Constant { value })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    #[inline]
    pub fn p(&self, idx: usize) -> f64 {
        self.p[idx]
    }

    #[inline]
    pub fn grad_log_p(&self, idx: usize) -> [f64; 2] {
        self.grad_log_p[idx]
    }

    pub fn p_values(&self) -> &[f64] {
        &self.p
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn grad_log_p_sup(&self) -> f64 {
        self.grad_log_p_sup
    }

    /// True when the stored `grad ln p` vanishes at every active node.
    pub fn is_constant(&self) -> bool {
        self.grad_log_p_sup == 0.0
    }
}

/// Samples a closed-form family; `grad ln p` comes from the family's own formula.
pub fn exponent_from_family(domain: &Arc<Domain>, family: &ExponentFamily) -> Result<ExponentField> {
    if let ExponentFamily::Gaussian { width, .. } = family {
        if !(*width > 0.0) {
            return Err(Error::param("gaussian width must be positive"));
        }
    }
    exponent_from_fn(domain, family)
}

pub fn exponent_from_fn(domain: &Arc<Domain>, exp: &dyn ExponentFn) -> Result<ExponentField> {
    let n = domain.len();
    let mut p = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for idx in 0..n {
        let x = domain.position(idx);
        p.push(exp.p(x));
        g.push(exp.grad_log_p(x));
    }
    ExponentField::new(domain, p, g)
}

/// Builds a field from nodal samples, differentiating `ln p` numerically:
/// centered differences inside the node array, second-order one-sided
/// differences on its edges.
pub fn exponent_from_samples(domain: &Arc<Domain>, p_values: Vec<f64>) -> Result<ExponentField> {
    let (nx, ny) = (domain.nx(), domain.ny());
    if p_values.len() != nx * ny {
        return Err(Error::LengthMismatch {
            expected: nx * ny,
            got: p_values.len(),
        });
    }
    for (idx, &v) in p_values.iter().enumerate() {
        let node = domain.node(idx);
        if !v.is_finite() {
            return Err(Error::NonFinite { i: node.i, j: node.j, value: v });
        }
        if v <= 1.0 {
            return Err(Error::InvalidExponent { i: node.i, j: node.j, value: v });
        }
    }
    let lp: Vec<f64> = p_values.iter().map(|v| v.ln()).collect();
    let h = domain.h();
    let diff = |k: usize, len: usize, at: &dyn Fn(usize) -> f64| -> f64 {
        if k == 0 {
            (4.0 * (at(1) - at(0)) - (at(2) - at(0))) / (2.0 * h)
        } else if k == len - 1 {
            (4.0 * (at(len - 1) - at(len - 2)) - (at(len - 1) - at(len - 3))) / (2.0 * h)
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        }
    };
    let mut grad = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let gx = diff(i, nx, &|k| lp[j * nx + k]);
            let gy = diff(j, ny, &|k| lp[k * nx + i]);
            grad.push([gx, gy]);
        }
    }
    ExponentField::new(domain, p_values, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentDiagnostics {
    pub p_min: f64,
    pub p_max: f64,
    pub grad_log_p_sup: f64,
    /// Nodes with `p <= 1`.
    pub violations: Vec<Node>,
    /// Nodes where `p` or `grad ln p` is not finite.
    pub non_finite: Vec<Node>,
}

impl ExponentDiagnostics {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.non_finite.is_empty()
    }
}

pub fn validate(field: &ExponentField) -> ExponentDiagnostics {
    let mut violations = Vec::new();
    let mut non_finite = Vec::new();
    for (idx, (&p, g)) in field.p.iter().zip(&field.grad_log_p).enumerate() {
        let node = field.domain.node(idx);
        if !p.is_finite() || !g[0].is_finite() || !g[1].is_finite() {
            non_finite.push(node);
        } else if p <= 1.0 {
            violations.push(node);
        }
    }
    ExponentDiagnostics {
        p_min: field.p_min,
        p_max: field.p_max,
        grad_log_p_sup: field.grad_log_p_sup,
        violations,
        non_finite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_domain, Shape};

    fn unit_square(n: usize) -> Arc<Domain> {
        make_domain(n, n, 1.0 / (n - 1) as f64, Shape::Rectangle).unwrap()
    }

    #[test]
    fn constant_family() {
        let d = unit_square(9);
        let f = exponent_from_family(&d, &ExponentFamily::Constant { value: 2.0 }).unwrap();
        assert!(f.is_constant());
        assert_eq!((f.p_min(), f.p_max(), f.grad_log_p_sup()), (2.0, 2.0, 0.0));
        let diag = validate(&f);
        assert!(diag.ok());
        assert_eq!(diag.p_min, 2.0);
    }

    #[test]
    fn affine_family() {
        let d = unit_square(9);
        let f = exponent_from_family(&d, &ExponentFamily::Affine { a: [1.0, 0.0], b: 2.0 }).unwrap();
        for idx in 0..d.len() {
            let x = d.position(idx);
            let g = f.grad_log_p(idx);
            assert!((g[0] - 1.0 / (2.0 + x[0])).abs() < 1e-15);
            assert_eq!(g[1], 0.0);
        }
        assert_eq!(f.p_min(), 2.0);
        assert_eq!(f.p_max(), 3.0);
    }

    #[test]
    fn rejects_p_at_most_one() {
        let d = unit_square(5);
        let r = exponent_from_family(&d, &ExponentFamily::Affine { a: [1.0, 0.0], b: 0.5 });
        assert!(matches!(r, Err(Error::InvalidExponent { .. })));
        let r = exponent_from_samples(&d, vec![1.0; 25]);
        assert!(matches!(r, Err(Error::InvalidExponent { .. })));
        let mut v = vec![2.0; 25];
        v[3] = f64::NAN;
        assert!(matches!(exponent_from_samples(&d, v), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn tampered_field_is_flagged() {
        let d = unit_square(5);
        let f = ExponentField::constant(&d, 2.0).unwrap();
        let mut p = f.p_values().to_vec();
        p[12] = 1.0;
        let bad = ExponentField::from_parts_unchecked(&d, p, vec![[0.0; 2]; 25]).unwrap();
        let diag = validate(&bad);
        assert!(!diag.ok());
        assert_eq!(diag.violations, vec![Node::new(2, 2)]);
    }

    #[test]
    fn samples_of_constant_and_exponential() {
        let d = unit_square(9);
        let f = exponent_from_samples(&d, vec![3.0; 81]).unwrap();
        assert!(f.is_constant());

        let d = Domain::new(17, 17, 1.0 / 16.0, [0.2, 0.0], Shape::Rectangle).unwrap();
        let p: Vec<f64> = (0..d.len()).map(|idx| d.position(idx)[0].exp()).collect();
        let f = exponent_from_samples(&d, p).unwrap();
        for idx in 0..d.len() {
            let g = f.grad_log_p(idx);
            assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_gradient_matches_differences_of_log_p() {
        let fam = ExponentFamily::Gaussian {
            base: 2.0,
            amplitude: 1.0,
            center: [0.4, 0.6],
            width: 0.25,
        };
        let mut errs = Vec::new();
        for n in [9, 17, 33] {
            let d = unit_square(n);
            let exact = exponent_from_family(&d, &fam).unwrap();
            let sampled = exponent_from_samples(&d, exact.p_values().to_vec()).unwrap();
            let mut err = 0.0f64;
            for idx in 0..d.len() {
                let a = exact.grad_log_p(idx);
                let b = sampled.grad_log_p(idx);
                err = err.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
            errs.push(err);
        }
        let order = (errs[0] / errs[2]).ln() / 4.0f64.ln();
        assert!(order >= 1.9, "errors {errs:?}, order {order}");
    }
}
