//! Standalone utilities behind the uniqueness argument: the monotonicity
//! inequality for `|z|^{q-2} z`, the approximation of the identity
//! `g(t) = ln(1 + A(e^{a t} - 1)) / a`, and sampled reference solutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dist, Domain, GridFunction};
use crate::operator::{Probe, SmoothProbe};

/// `|z|^{q-2} z`, with the zero vector mapped to zero.
fn power_map(z: &[f64], q: f64) -> Vec<f64> {
    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        return vec![0.0; z.len()];
    }
    let s = n.powf(q - 2.0);
    z.iter().map(|v| s * v).collect()
}

/// `<|b|^{q-2} b - |a|^{q-2} a, b - a> - 2^{2-q} |b - a|^q`; nonnegative for `q >= 2`.
pub fn monotonicity_inequality_gap(a: &[f64], b: &[f64], q: f64) -> Result<f64> {
    if !(q >= 2.0) {
        return Err(Error::param(format!("exponent q = {q} must be at least 2")));
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    let pa = power_map(a, q);
    let pb = power_map(b, q);
    let mut lhs = 0.0;
    let mut d2 = 0.0;
    for k in 0..a.len() {
        let d = b[k] - a[k];
        lhs += (pb[k] - pa[k]) * d;
        d2 += d * d;
    }
    let rhs = 2f64.powf(2.0 - q) * d2.sqrt().powf(q);
    Ok(lhs - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GFunctionParams {
    alpha: f64,
    a: f64,
}

impl GFunctionParams {
    /// Requires `alpha > 0` and `1 < A < 2`.
    pub fn new(alpha: f64, a: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param(format!("alpha = {alpha} must be positive")));
        }
        if !(a > 1.0 && a < 2.0) {
            return Err(Error::param(format!("A = {a} must lie in (1, 2)")));
        }
        Ok(GFunctionParams { alpha, a })
    }

    /// Like [`GFunctionParams::new`] but admits the identity case `A = 1`.
    pub fn with_identity(alpha: f64, a: f64) -> Result<Self> {
        if a == 1.0 && alpha > 0.0 && alpha.is_finite() {
            return Ok(GFunctionParams { alpha, a });
        }
        Self::new(alpha, a)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `alpha t` past which `e^{alpha t}` would overflow.
    pub fn is_asymptotic(&self, t: f64) -> bool {
        self.alpha * t > 700.0
    }
}

// g(t) = t + ln(A - (A-1) e^{-at}) / a, which never overflows for t >= 0.
pub fn g_eval(t: f64, params: &GFunctionParams) -> f64 {
    let GFunctionParams { alpha, a } = *params;
    t + (a - (a - 1.0) * (-alpha * t).exp()).ln() / alpha
}

pub fn g_prime(t: f64, params: &GFunctionParams) -> f64 {
    let GFunctionParams { alpha, a } = *params;
    a / (a - (a - 1.0) * (-alpha * t).exp())
}

/// `g(t) - t` without cancellation.
fn g_shift(t: f64, params: &GFunctionParams) -> f64 {
    let GFunctionParams { alpha, a } = *params;
    (a - (a - 1.0) * (-alpha * t).exp()).ln() / alpha
}

/// `g'(t) - 1` without cancellation.
fn g_slope_excess(t: f64, params: &GFunctionParams) -> f64 {
    let GFunctionParams { alpha, a } = *params;
    let e = (a - 1.0) * (-alpha * t).exp();
    e / (a - e)
}

/// Closed-form inverse of [`g_eval`].
pub fn g_inverse(s: f64, params: &GFunctionParams) -> f64 {
    let GFunctionParams { alpha, a } = *params;
    s + (1.0 / a + (1.0 - 1.0 / a) * (-alpha * s).exp()).ln() / alpha
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct GPropertyReport {
    pub samples: usize,
    /// Samples at `t = 0`, where both strict bounds hold with equality.
    pub limit_cases: usize,
    pub asymptotic_samples: usize,
    /// Largest `g(t) - t` seen, to compare with `(A-1)/alpha`.
    pub max_shift: f64,
    pub shift_bound: f64,
    /// Largest `|g''/g' + alpha (g' - 1)|` with `g''` from central differences.
    pub max_identity_error: f64,
    pub failures: Vec<String>,
}

impl GPropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks, at every sample `t >= 0`:
///
/// * `0 < g(t) - t < (A-1)/alpha`
/// * `0 < g'(t) - 1 < A - 1`
/// * `g''/g' = -alpha (g' - 1)`, with `g''` from central differences of `g'`
/// * `0 <= ln g'(t) <= g'(t) - 1`
///
/// At `t = 0` the strict bounds degenerate to equalities and only the
/// non-strict forms are checked; the same holds once `e^{-alpha t}`
/// underflows, where `g(t) - t` and `g'(t) - 1` are exactly at their limits
/// in floating point.
pub fn check_g_properties(params: &GFunctionParams, t_samples: &[f64], fd_tol: f64) -> GPropertyReport {
    let GFunctionParams { alpha, a } = *params;
    let mut r = GPropertyReport {
        samples: t_samples.len(),
        shift_bound: (a - 1.0) / alpha,
        ..Default::default()
    };
    let step = 1e-4 / alpha.max(1.0);
    for &t in t_samples {
        if !(t >= 0.0) {
            r.failures.push(format!("sample t = {t} is negative"));
            continue;
        }
        if params.is_asymptotic(t) {
            r.asymptotic_samples += 1;
        }
        let gp = g_prime(t, params);
        let shift = g_shift(t, params);
        let slope = g_slope_excess(t, params);
        r.max_shift = r.max_shift.max(shift);
        // once e^{-alpha t} underflows, g' - 1 is 0 in floating point
        let strict = t > 0.0 && a > 1.0 && (-alpha * t).exp() > 0.0;
        if t == 0.0 {
            r.limit_cases += 1;
        }
        let shift_ok = if strict {
            shift > 0.0 && shift < r.shift_bound
        } else {
            shift >= 0.0 && shift <= r.shift_bound
        };
        if !shift_ok {
            r.failures.push(format!("shift bound fails at t = {t}: g - t = {shift:e}"));
        }
        let slope_ok = if strict {
            slope > 0.0 && slope < a - 1.0
        } else {
            slope >= 0.0 && slope <= a - 1.0
        };
        if !slope_ok {
            r.failures.push(format!("slope bound fails at t = {t}: g' - 1 = {slope:e}"));
        }

        let g2 = (g_prime(t + step, params) - g_prime(t - step, params)) / (2.0 * step);
        let err = (g2 / gp + alpha * slope).abs();
        r.max_identity_error = r.max_identity_error.max(err);
        if err > fd_tol {
            r.failures.push(format!("g''/g' identity off by {err:e} at t = {t}"));
        }

        let lg = slope.ln_1p();
        if !(lg >= 0.0 && lg <= slope) {
            r.failures.push(format!("log bound fails at t = {t}: ln g' = {lg:e}"));
        }
    }
    r
}

/// Closed-form solutions (or subsolutions) sampled for use as oracles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReferenceKind {
    /// `<e, x>` with `|e| = 1`: a solution for every exponent.
    AffineUnit { e: [f64; 2] },
    /// `|x - vertex|`: a solution for constant exponents when the vertex is
    /// outside the closed domain, a subsolution otherwise.
    Cone { vertex: [f64; 2] },
    /// `x1^{4/3} - x2^{4/3}`, infinity-harmonic for constant exponents away
    /// from the coordinate axes.
    Aronsson,
}

impl ReferenceKind {
    pub fn probe(&self) -> Probe {
        match *self {
            ReferenceKind::AffineUnit { e } => Probe::Affine { e, c: 0.0 },
            ReferenceKind::Cone { vertex } => Probe::Cone { vertex, scale: 1.0 },
            ReferenceKind::Aronsson => Probe::Aronsson,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub values: GridFunction,
    /// False when the sampled function is only a subsolution (cone vertex inside).
    pub is_solution: bool,
}

pub fn reference_solutions(kind: &ReferenceKind, domain: &Arc<Domain>) -> Result<ReferenceSolution> {
    let mut is_solution = true;
    match *kind {
        ReferenceKind::AffineUnit { e } => {
            let n = e[0].hypot(e[1]);
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::param(format!("affine direction must be a unit vector, |e| = {n}")));
            }
        }
        ReferenceKind::Cone { vertex } => {
            let (lo, hi) = domain.bounding_box();
            let h = domain.h();
            let near = (0..domain.len())
                .filter(|&idx| domain.is_active(idx))
                .any(|idx| dist(domain.position(idx), vertex) < 0.5 * h);
            let inside_box =
                vertex[0] >= lo[0] && vertex[0] <= hi[0] && vertex[1] >= lo[1] && vertex[1] <= hi[1];
            if near || (inside_box && domain.contains_ball(vertex, 0.0)) {
                is_solution = false;
            }
        }
        ReferenceKind::Aronsson => {
            let (lo, hi) = domain.bounding_box();
            let crosses = |a: f64, b: f64| a <= 0.0 && b >= 0.0;
            if crosses(lo[0], hi[0]) || crosses(lo[1], hi[1]) {
                return Err(Error::param("Aronsson reference needs a domain avoiding the coordinate axes"));
            }
        }
    }
    let probe = kind.probe();
    let values = GridFunction::sample(domain, |x| probe.value(x))?;
    Ok(ReferenceSolution { values, is_solution })
}
