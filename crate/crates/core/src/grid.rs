//! Uniform square grids, nodal functions on them, and the discrete calculus
//! primitives shared by the operator, solver, and analysis modules.
//!
//! Nodes are indexed row-major: `idx = j * nx + i`, and node `(i, j)` sits at
//! `origin + (i h, j h)`. Every node is classified as interior (an unknown),
//! boundary (carries Dirichlet data, adjacent to some interior node), or
//! outside (ignored).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Rectangle,
    /// Disk inscribed in the rectangle spanned by the grid.
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub i: usize,
    pub j: usize,
}

impl Node {
    pub fn new(i: usize, j: usize) -> Self {
        Node { i, j }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    shape: Shape,
    kind: Vec<NodeKind>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
}

/// Builds a domain with its lower-left node at the origin.
pub fn make_domain(nx: usize, ny: usize, h: f64, shape: Shape) -> Result<Arc<Domain>> {
    Domain::new(nx, ny, h, [0.0, 0.0], shape)
}

impl Domain {
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2], shape: Shape) -> Result<Arc<Domain>> {
        if nx < 3 || ny < 3 {
            return Err(Error::DimensionTooSmall { nx, ny });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidSpacing(h));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::param("origin must be finite"));
        }

        let mut inside = vec![false; nx * ny];
        let center = [
            origin[0] + 0.5 * (nx - 1) as f64 * h,
            origin[1] + 0.5 * (ny - 1) as f64 * h,
        ];
        let radius = 0.5 * ((nx - 1).min(ny - 1)) as f64 * h;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                inside[j * nx + i] = match shape {
                    Shape::Rectangle => true,
                    Shape::Disk => {
                        let x = origin[0] + i as f64 * h - center[0];
                        let y = origin[1] + j as f64 * h - center[1];
                        (x * x + y * y).sqrt() < radius
                    }
                };
            }
        }

        let mut kind = vec![NodeKind::Outside; nx * ny];
        let mut interior = Vec::new();
        for idx in 0..nx * ny {
            if inside[idx] {
                kind[idx] = NodeKind::Interior;
                interior.push(idx);
            }
        }
        let mut boundary = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                if inside[idx] {
                    continue;
                }
                // 8-neighborhood, so every interior node has its full 3x3
                // block available
                let touches = (j.saturating_sub(1)..=(j + 1).min(ny - 1))
                    .any(|jj| (i.saturating_sub(1)..=(i + 1).min(nx - 1)).any(|ii| inside[jj * nx + ii]));
                if touches {
                    kind[idx] = NodeKind::Boundary;
                    boundary.push(idx);
                }
            }
        }
        if boundary.is_empty() {
            return Err(Error::EmptyBoundary);
        }

        Ok(Arc::new(Domain {
            nx,
            ny,
            h,
            origin,
            shape,
            kind,
            interior,
            boundary,
        }))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, node: Node) -> usize {
        node.j * self.nx + node.i
    }

    #[inline]
    pub fn node(&self, idx: usize) -> Node {
        Node::new(idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let n = self.node(idx);
        [
            self.origin[0] + n.i as f64 * self.h,
            self.origin[1] + n.j as f64 * self.h,
        ]
    }

    #[inline]
    pub fn kind(&self, idx: usize) -> NodeKind {
        self.kind[idx]
    }

    #[inline]
    pub fn is_interior(&self, idx: usize) -> bool {
        self.kind[idx] == NodeKind::Interior
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        self.kind[idx] == NodeKind::Boundary
    }

    /// Interior or boundary.
    #[inline]
    pub fn is_active(&self, idx: usize) -> bool {
        self.kind[idx] != NodeKind::Outside
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Lower-left and upper-right corners of the node array.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        (
            self.origin,
            [
                self.origin[0] + (self.nx - 1) as f64 * self.h,
                self.origin[1] + (self.ny - 1) as f64 * self.h,
            ],
        )
    }

    /// Center of the bounding box (also the disk center).
    pub fn center(&self) -> [f64; 2] {
        let (lo, hi) = self.bounding_box();
        [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]
    }

    /// East, west, north, south neighbor indices of an interior node.
    #[inline]
    pub(crate) fn axis_neighbors(&self, idx: usize) -> [usize; 4] {
        [idx + 1, idx - 1, idx + self.nx, idx - self.nx]
    }

    /// NE, NW, SE, SW neighbor indices of an interior node.
    #[inline]
    pub(crate) fn diagonal_neighbors(&self, idx: usize) -> [usize; 4] {
        let n = self.nx;
        [idx + n + 1, idx + n - 1, idx - n + 1, idx - n - 1]
    }

    pub(crate) fn check_interior(&self, node: Node) -> Result<usize> {
        if node.i >= self.nx || node.j >= self.ny {
            return Err(Error::NotInterior { i: node.i, j: node.j });
        }
        let idx = self.index(node);
        if !self.is_interior(idx) {
            return Err(Error::NotInterior { i: node.i, j: node.j });
        }
        Ok(idx)
    }

    /// Whether a closed ball lies inside the closure of the domain.
    pub fn contains_ball(&self, center: [f64; 2], radius: f64) -> bool {
        let (lo, hi) = self.bounding_box();
        let tol = 1e-12 * (1.0 + radius);
        match self.shape {
            Shape::Rectangle => {
                center[0] - radius >= lo[0] - tol
                    && center[0] + radius <= hi[0] + tol
                    && center[1] - radius >= lo[1] - tol
                    && center[1] + radius <= hi[1] + tol
            }
            Shape::Disk => {
                let c = self.center();
                let r = 0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1]);
                dist(center, c) + radius <= r + tol
            }
        }
    }
}

#[inline]
pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Nodal values on a domain.
#[derive(Debug, Clone)]
pub struct GridFunction {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn constant(domain: &Arc<Domain>, c: f64) -> Self {
        GridFunction {
            domain: Arc::clone(domain),
            values: vec![c; domain.len()],
        }
    }

    pub fn from_values(domain: &Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        for (idx, &v) in values.iter().enumerate() {
            if domain.is_active(idx) && !v.is_finite() {
                let n = domain.node(idx);
                return Err(Error::NonFinite { i: n.i, j: n.j, value: v });
            }
        }
        Ok(GridFunction {
            domain: Arc::clone(domain),
            values,
        })
    }

    /// Samples `phi` at every node of the array (including outside nodes).
    pub fn sample<F>(domain: &Arc<Domain>, phi: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let mut values = Vec::with_capacity(domain.len());
        for idx in 0..domain.len() {
            let v = phi(domain.position(idx));
            if !v.is_finite() {
                let n = domain.node(idx);
                return Err(Error::NonFinite { i: n.i, j: n.j, value: v });
            }
            values.push(v);
        }
        Ok(GridFunction {
            domain: Arc::clone(domain),
            values,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, node: Node) -> f64 {
        self.values[self.domain.index(node)]
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn set(&mut self, idx: usize, value: f64) {
        self.values[idx] = value;
    }

    pub fn same_domain(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub(crate) fn check_same_domain(&self, other: &GridFunction) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    /// Pointwise map over active nodes; outside nodes are copied unchanged.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| if self.domain.is_active(idx) { f(v) } else { v })
            .collect();
        GridFunction {
            domain: Arc::clone(&self.domain),
            values,
        }
    }

    /// Minimum and maximum over active nodes.
    pub fn active_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (idx, &v) in self.values.iter().enumerate() {
            if self.domain.is_active(idx) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    /// Centered gradient at an interior node, without the interior check.
    #[inline]
    pub(crate) fn grad_c(&self, idx: usize) -> [f64; 2] {
        let [e, w, n, s] = self.domain.axis_neighbors(idx);
        let inv = 0.5 / self.domain.h;
        let v = &self.values;
        [(v[e] - v[w]) * inv, (v[n] - v[s]) * inv]
    }

    /// Upwind gradient magnitude at an interior node, without the interior check.
    ///
    /// With backward/forward differences `D-`, `D+` along each axis, the two
    /// Godunov magnitudes are
    ///
    /// ```text
    /// G+ = sqrt( max(D-x, -D+x, 0)^2 + max(D-y, -D+y, 0)^2 )
    /// G- = sqrt( max(-D-x, D+x, 0)^2 + max(-D-y, D+y, 0)^2 )
    /// ```
    ///
    /// and the returned value is their root mean square `sqrt((G+^2 + G-^2)/2)`.
    /// On data monotone along each axis this is at least the centered
    /// magnitude, it is exact on affine functions, and the O(h) biases of
    /// `G+` and `G-` cancel so the error on smooth monotone data is O(h^2).
    #[inline]
    pub(crate) fn grad_mag_upwind(&self, idx: usize) -> f64 {
        let [e, w, n, s] = self.domain.axis_neighbors(idx);
        let inv = 1.0 / self.domain.h;
        let v = &self.values;
        let c = v[idx];
        let dxm = (c - v[w]) * inv;
        let dxp = (v[e] - c) * inv;
        let dym = (c - v[s]) * inv;
        let dyp = (v[n] - c) * inv;
        let gpx = dxm.max(-dxp).max(0.0);
        let gpy = dym.max(-dyp).max(0.0);
        let gmx = (-dxm).max(dxp).max(0.0);
        let gmy = (-dym).max(dyp).max(0.0);
        (0.5 * (gpx * gpx + gpy * gpy + gmx * gmx + gmy * gmy)).sqrt()
    }
}

/// `((u_E - u_W) / 2h, (u_N - u_S) / 2h)` at an interior node.
pub fn gradient_centered(u: &GridFunction, node: Node) -> Result<[f64; 2]> {
    let idx = u.domain.check_interior(node)?;
    Ok(u.grad_c(idx))
}

/// Monotone-compatible gradient magnitude at an interior node; see
/// [`GridFunction`]'s upwind formula for the exact definition.
pub fn gradient_magnitude_upwind(u: &GridFunction, node: Node) -> Result<f64> {
    let idx = u.domain.check_interior(node)?;
    Ok(u.grad_mag_upwind(idx))
}

/// Max of `|u|` over interior and boundary nodes.
pub fn sup_norm(u: &GridFunction) -> f64 {
    u.values
        .iter()
        .enumerate()
        .filter(|(idx, _)| u.domain.is_active(*idx))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// Max of `|u - v|` over interior and boundary nodes.
pub fn diff_sup_norm(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    u.check_same_domain(v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .enumerate()
        .filter(|(idx, _)| u.domain.is_active(*idx))
        .fold(0.0, |m, (_, (a, b))| m.max((a - b).abs())))
}

/// Dirichlet data: one value per boundary node, in `Domain::boundary()` order.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    domain: Arc<Domain>,
    values: Vec<f64>,
    lipschitz: f64,
}

impl BoundaryData {
    pub fn new(domain: &Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        let nb = domain.boundary().len();
        if values.len() != nb {
            return Err(Error::LengthMismatch {
                expected: nb,
                got: values.len(),
            });
        }
        for (&idx, &v) in domain.boundary().iter().zip(&values) {
            if !v.is_finite() {
                let n = domain.node(idx);
                return Err(Error::NonFinite { i: n.i, j: n.j, value: v });
            }
        }
        let mut data = BoundaryData {
            domain: Arc::clone(domain),
            values,
            lipschitz: 0.0,
        };
        data.lipschitz = estimate_lipschitz(&data, domain)?;
        Ok(data)
    }

    pub fn from_fn<F>(domain: &Arc<Domain>, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let values = domain.boundary().iter().map(|&idx| f(domain.position(idx))).collect();
        Self::new(domain, values)
    }

    /// Restriction of a grid function to the boundary nodes.
    pub fn from_grid(u: &GridFunction) -> Result<Self> {
        let values = u.domain.boundary().iter().map(|&idx| u.values[idx]).collect();
        Self::new(&u.domain, values)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Same data shifted by a constant.
    pub fn shifted(&self, c: f64) -> BoundaryData {
        BoundaryData {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|v| v + c).collect(),
            lipschitz: self.lipschitz,
        }
    }

    /// Writes the boundary values into `u` (which must live on the same domain).
    pub fn apply(&self, u: &mut GridFunction) -> Result<()> {
        if !(Arc::ptr_eq(&self.domain, &u.domain) || *self.domain == *u.domain) {
            return Err(Error::DomainMismatch);
        }
        for (&idx, &v) in self.domain.boundary().iter().zip(&self.values) {
            u.values[idx] = v;
        }
        Ok(())
    }

    /// Grid function equal to the data on the boundary and `fill` elsewhere.
    pub fn extend(&self, fill: f64) -> GridFunction {
        let mut u = GridFunction::constant(&self.domain, fill);
        for (&idx, &v) in self.domain.boundary().iter().zip(&self.values) {
            u.values[idx] = v;
        }
        u
    }
}

/// Max over boundary node pairs of `|f(x) - f(y)| / |x - y|`.
pub fn estimate_lipschitz(f: &BoundaryData, domain: &Domain) -> Result<f64> {
    let nodes = domain.boundary();
    if nodes.len() < 2 || f.values.len() != nodes.len() {
        return Err(Error::TooFewBoundaryNodes(nodes.len().min(f.values.len())));
    }
    let pos: Vec<[f64; 2]> = nodes.iter().map(|&idx| domain.position(idx)).collect();
    let mut best = 0.0f64;
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let slope = (f.values[a] - f.values[b]).abs() / dist(pos[a], pos[b]);
            best = best.max(slope);
        }
    }
    Ok(best)
}
