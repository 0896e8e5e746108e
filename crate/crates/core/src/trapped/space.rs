use std::sync::Arc;

use crate::fields::{CartesianField, CartesianGrid, DerivativeScheme, Discretization, RadialField, RadialGrid};
use crate::riesz::cache::KernelCache;
use crate::riesz::{FourierRiesz, RadialRiesz, RieszOperator};
use crate::{par, Error, Result};

/// Grid of the working frame, in frame coordinates `y`.
#[derive(Clone, Debug, PartialEq)]
pub enum FrameGrid {
    Radial { nodes: usize, r_max: f64 },
    Cartesian { n: usize, half_width: f64, scheme: DerivativeScheme },
}

impl Default for FrameGrid {
    fn default() -> Self {
        Self::Radial { nodes: 4096, r_max: 20.0 }
    }
}

impl FrameGrid {
    pub fn spacing(&self) -> f64 {
        match *self {
            Self::Radial { nodes, r_max } => r_max / nodes as f64,
            Self::Cartesian { n, half_width, .. } => 2.0 * half_width / n as f64,
        }
    }

    /// Largest `|y|` covered along the axes.
    pub fn extent(&self) -> f64 {
        match *self {
            Self::Radial { r_max, .. } => r_max,
            Self::Cartesian { half_width, .. } => half_width,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Self::Radial { .. })
    }
}

enum Kind {
    Radial { grid: Arc<RadialGrid>, op: RadialRiesz },
    Cartesian { grid: Arc<CartesianGrid>, op: FourierRiesz },
}

/// A frame grid together with its Riesz operator for one exponent γ.
pub struct FrameSpace {
    spec: FrameGrid,
    gamma: f64,
    kind: Kind,
}

impl std::fmt::Debug for FrameSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameSpace").field("spec", &self.spec).field("gamma", &self.gamma).finish()
    }
}

impl FrameSpace {
    pub fn new(spec: &FrameGrid, gamma: f64) -> Result<Self> {
        Self::build(spec, gamma, None)
    }

    /// As [`Self::new`], reusing cached radial kernel tables.
    pub fn with_cache(spec: &FrameGrid, gamma: f64, cache: &KernelCache) -> Result<Self> {
        Self::build(spec, gamma, Some(cache))
    }

    fn build(spec: &FrameGrid, gamma: f64, cache: Option<&KernelCache>) -> Result<Self> {
        let kind = match *spec {
            FrameGrid::Radial { nodes, r_max } => {
                let grid = Arc::new(RadialGrid::new(3, nodes, r_max)?);
                let op = match cache {
                    Some(c) => RadialRiesz::with_cache(grid.clone(), gamma, c)?,
                    None => RadialRiesz::new(grid.clone(), gamma)?,
                };
                Kind::Radial { grid, op }
            }
            FrameGrid::Cartesian { n, half_width, scheme } => {
                let grid = Arc::new(CartesianGrid::cube(n, half_width, scheme)?);
                let op = FourierRiesz::new(grid.clone(), gamma)?;
                Kind::Cartesian { grid, op }
            }
        };
        Ok(Self { spec: spec.clone(), gamma, kind })
    }

    pub fn spec(&self) -> &FrameGrid {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_radial(&self) -> bool {
        self.spec.is_radial()
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            Kind::Radial { grid, .. } => grid.len(),
            Kind::Cartesian { grid, .. } => grid.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weights(&self) -> &[f64] {
        match &self.kind {
            Kind::Radial { grid, .. } => Discretization::weights(grid.as_ref()),
            Kind::Cartesian { grid, .. } => Discretization::weights(grid.as_ref()),
        }
    }

    pub fn radial_grid(&self) -> Option<&Arc<RadialGrid>> {
        match &self.kind {
            Kind::Radial { grid, .. } => Some(grid),
            Kind::Cartesian { .. } => None,
        }
    }

    pub fn cartesian_grid(&self) -> Option<&Arc<CartesianGrid>> {
        match &self.kind {
            Kind::Cartesian { grid, .. } => Some(grid),
            Kind::Radial { .. } => None,
        }
    }

    /// Frame coordinates of node `i`; radial nodes lie on the first axis.
    pub fn position(&self, i: usize) -> [f64; 3] {
        match &self.kind {
            Kind::Radial { grid, .. } => [grid.nodes()[i], 0.0, 0.0],
            Kind::Cartesian { grid, .. } => grid.point(i),
        }
    }

    pub fn sample<F: Fn([f64; 3]) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        par::fill(&mut out, |i| f(self.position(i)));
        out
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let w = self.weights();
        par::sum(a.len(), |i| w[i] * a[i] * b[i])
    }

    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Radial { grid, .. } => grid.neg_laplacian(u),
            Kind::Cartesian { grid, .. } => grid.neg_laplacian(u),
        }
    }

    /// Approximate inverse of `-Δ + V + shift`: exact on radial grids, a
    /// few conjugate-gradient steps preconditioned by the transform inverse
    /// of `-Δ + shift` on Cartesian ones.
    pub fn precondition(&self, f: &[f64], shift: f64, potential: Option<&[f64]>) -> Vec<f64> {
        match &self.kind {
            Kind::Radial { grid, .. } => grid.precondition_with(f, shift, potential),
            Kind::Cartesian { grid, .. } => match potential {
                Some(v) if v.iter().fold(0.0f64, |m, x| m.max(x.abs())) > 1e-3 * shift => {
                    shifted_cg(grid, f, shift, v)
                }
                _ => grid.precondition(f, shift),
            },
        }
    }

    pub fn riesz(&self) -> &dyn RieszOperator {
        match &self.kind {
            Kind::Radial { op, .. } => op,
            Kind::Cartesian { op, .. } => op,
        }
    }

    /// Interpolant of a frame field, zero outside the grid.
    pub fn interpolant(&self, values: &[f64]) -> Result<Box<dyn Fn([f64; 3]) -> f64 + Send + Sync>> {
        match &self.kind {
            Kind::Radial { grid, .. } => {
                let f = RadialField::new(grid.clone(), values.to_vec())?;
                let r_max = grid.r_max();
                Ok(Box::new(move |y: [f64; 3]| {
                    let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                    if r > r_max {
                        0.0
                    } else {
                        f.eval(r)
                    }
                }))
            }
            Kind::Cartesian { grid, .. } => {
                let f = CartesianField::new(grid.clone(), values.to_vec())?;
                let l = grid.half_width();
                Ok(Box::new(move |y: [f64; 3]| {
                    if (0..3).any(|a| y[a].abs() > l[a]) {
                        0.0
                    } else {
                        f.eval(y)
                    }
                }))
            }
        }
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() == self.len() {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!("{} samples for {} frame nodes", values.len(), self.len())))
        }
    }
}

const CG_TOLERANCE: f64 = 1e-3;
const CG_MAX_ITERATIONS: usize = 40;

// Truncated preconditioned CG for (-Δ + V + shift) x = f. Every iterate is
// a descent direction, which is all the flow needs.
fn shifted_cg(grid: &CartesianGrid, f: &[f64], shift: f64, v: &[f64]) -> Vec<f64> {
    let n = f.len();
    let dot = |a: &[f64], b: &[f64]| par::sum(n, |i| a[i] * b[i]);
    let apply = |x: &[f64]| {
        let lap = grid.neg_laplacian(x);
        (0..n).map(|i| lap[i] + (v[i] + shift) * x[i]).collect::<Vec<f64>>()
    };
    let mut x = vec![0.0; n];
    let mut r = f.to_vec();
    let target = CG_TOLERANCE * dot(f, f).sqrt();
    let mut z = grid.precondition(&r, shift);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..CG_MAX_ITERATIONS {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        z = grid.precondition(&r, shift);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}
