use std::sync::Arc;

use super::interp::{self, LeftEnd};
use super::Discretization;
use crate::special::sphere_area;
use crate::{Error, Result};

/// Uniform radial grid with nodes `r_j = (j + 1/2) h`, `h = R_max / M`.
///
/// Quadrature weights are `|S^{N-1}| r_j^{N-1} h` (midpoint rule in the
/// radial measure). For integrands that are smooth and even in `r` this is
/// the trapezoid rule on the whole line and converges spectrally.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    dim: usize,
    r_max: f64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // r_j^{(N-1)/2}
    lift: Vec<f64>,
    centrifugal: f64,
}

impl RadialGrid {
    pub fn new(dim: usize, nodes: usize, r_max: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} < 3")));
        }
        if nodes < 8 {
            return Err(Error::InvalidGrid(format!("{nodes} radial nodes")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("R_max = {r_max}")));
        }
        let h = r_max / nodes as f64;
        let area = sphere_area(dim);
        let m = (dim as f64 - 1.0) / 2.0;
        let r: Vec<f64> = (0..nodes).map(|j| (j as f64 + 0.5) * h).collect();
        let weights = r.iter().map(|&r| area * r.powi(dim as i32 - 1) * h).collect();
        let lift = r.iter().map(|&r| r.powf(m)).collect();
        Ok(Self {
            dim,
            r_max,
            h,
            nodes: r,
            weights,
            lift,
            centrifugal: (dim as f64 - 1.0) * (dim as f64 - 3.0) / 4.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Short identifier used for cache keys and checkpoints.
    pub fn signature(&self) -> String {
        format!("radial:N{}:M{}:R{:016x}", self.dim, self.len(), self.r_max.to_bits())
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        crate::par::sum(f.len(), |i| self.weights[i] * f[i])
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    fn to_v(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.lift).map(|(u, l)| u * l).collect()
    }

    // Second difference of v with the odd ghost v_{-1} = -v_0 at the origin
    // and v_M = 0 beyond R_max.
    fn second_difference(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        let mut out = vec![0.0; n];
        for j in 0..n {
            let left = if j == 0 { -v[0] } else { v[j - 1] };
            let right = if j + 1 < n { v[j + 1] } else { 0.0 };
            out[j] = (right - 2.0 * v[j] + left) * inv_h2;
        }
        out
    }

    /// Fourth-order accurate `-Δu`.
    ///
    /// In `v = r^m u`, `m = (N-1)/2`, the operator is
    /// `-r^{-m} (D₂ - h²/12 D₂² - c/r²) v` with `c = (N-1)(N-3)/4`.
    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let v = self.to_v(u);
        let d2 = self.second_difference(&v);
        let d4 = self.second_difference(&d2);
        let k = self.h * self.h / 12.0;
        (0..v.len())
            .map(|j| {
                let r = self.nodes[j];
                -(d2[j] - k * d4[j] - self.centrifugal * v[j] / (r * r)) / self.lift[j]
            })
            .collect()
    }

    /// Discrete `∫|∇u|²`, the quadratic form of [`Self::neg_laplacian`].
    pub fn kinetic(&self, u: &[f64]) -> f64 {
        let v = self.to_v(u);
        let d2 = self.second_difference(&v);
        let area = sphere_area(self.dim);
        let k = self.h * self.h / 12.0;
        let mut acc = 0.0;
        for j in 0..v.len() {
            let r = self.nodes[j];
            acc += -v[j] * d2[j] + k * d2[j] * d2[j] + self.centrifugal * v[j] * v[j] / (r * r);
        }
        area * self.h * acc
    }

    /// Solve `(-Δ₂ + shift) x = f` with the second-order tridiagonal operator.
    pub fn precondition(&self, f: &[f64], shift: f64) -> Vec<f64> {
        self.precondition_with(f, shift, None)
    }

    /// Solve `(-Δ₂ + V + shift) x = f` for a nodal potential `V`.
    pub fn precondition_with(&self, f: &[f64], shift: f64, potential: Option<&[f64]>) -> Vec<f64> {
        let n = f.len();
        let inv_h2 = 1.0 / (self.h * self.h);
        let rhs: Vec<f64> = f.iter().zip(&self.lift).map(|(f, l)| f * l).collect();
        let diag: Vec<f64> = (0..n)
            .map(|j| {
                let base = if j == 0 { 3.0 } else { 2.0 };
                let r = self.nodes[j];
                base * inv_h2 + self.centrifugal / (r * r) + shift + potential.map_or(0.0, |v| v[j])
            })
            .collect();
        let off = -inv_h2;
        let v = solve_tridiagonal_symmetric(&diag, off, &rhs);
        v.iter().zip(&self.lift).map(|(v, l)| v / l).collect()
    }
}

// Thomas algorithm for a symmetric tridiagonal system with constant
// off-diagonal.
fn solve_tridiagonal_symmetric(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

impl Discretization for RadialGrid {
    fn len(&self) -> usize {
        self.nodes.len()
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        RadialGrid::neg_laplacian(self, u)
    }
    fn precondition(&self, f: &[f64], shift: f64) -> Vec<f64> {
        RadialGrid::precondition(self, f, shift)
    }
    fn kinetic(&self, u: &[f64]) -> f64 {
        RadialGrid::kinetic(self, u)
    }
}

/// A radial function sampled on a [`RadialGrid`].
#[derive(Clone, Debug)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at node {j}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Self {
        let values = grid.sample(f);
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn mass(&self) -> f64 {
        let w = self.grid.weights();
        crate::par::sum(self.values.len(), |i| w[i] * self.values[i] * self.values[i])
    }

    pub fn kinetic(&self) -> f64 {
        self.grid.kinetic(&self.values)
    }

    pub fn laplacian(&self) -> RadialField {
        let values = self.grid.neg_laplacian(&self.values).into_iter().map(|x| -x).collect();
        RadialField { grid: self.grid.clone(), values }
    }

    pub fn scaled(&self, c: f64) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Value at radius `r` by four-point interpolation (even about 0, zero
    /// beyond `R_max`).
    pub fn eval(&self, r: f64) -> f64 {
        let h = self.grid.spacing();
        interp::cubic(&self.values, 0.5 * h, h, r.abs(), LeftEnd::EvenAboutOrigin)
    }

    /// Resample onto another radial grid.
    pub fn resample(&self, grid: Arc<RadialGrid>) -> RadialField {
        let values = grid.nodes().iter().map(|&r| self.eval(r)).collect();
        RadialField { grid, values }
    }

    /// `|u|` at the last node, a truncation diagnostic for the Dirichlet cut.
    pub fn boundary_value(&self) -> f64 {
        self.values.last().map_or(0.0, |v| v.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ball_volume;
    use std::f64::consts::PI;

    fn grid(n: usize, r: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(3, n, r).unwrap())
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::new(2, 100, 10.0).is_err());
        assert!(RadialGrid::new(3, 4, 10.0).is_err());
        assert!(RadialGrid::new(3, 100, -1.0).is_err());
    }

    #[test]
    fn nodes_increasing_and_weights_positive() {
        let g = grid(257, 7.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights().iter().all(|&w| w > 0.0));
        assert!((g.nodes()[0] - 0.5 * g.spacing()).abs() < 1e-15);
    }

    #[test]
    fn ball_volume_from_indicator() {
        // relative midpoint error is h^2 / (4 R^2) for cell-aligned R
        let g = grid(5000, 5.0);
        for &r in &[1.0, 2.0, 5.0] {
            let f = g.sample(|x| if x < r { 1.0 } else { 0.0 });
            let v = g.integrate(&f);
            let exact = ball_volume(3, r);
            assert!(((v - exact) / exact).abs() < 1e-6, "R={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_integrates_to_zero() {
        let g = grid(64, 5.0);
        assert_eq!(g.integrate(&vec![0.0; 64]), 0.0);
    }

    #[test]
    fn gaussian_integral_is_spectral() {
        let g = grid(400, 10.0);
        let f = g.sample(|r| (-r * r).exp());
        assert!((g.integrate(&f) - PI.powf(1.5)).abs() < 1e-8);
    }

    #[test]
    fn linear_radial_density_is_exact() {
        // midpoint rule is exact for integrands linear in r (radial measure)
        let g = grid(100, 3.0);
        let area = 4.0 * PI;
        let f = g.sample(|r| (2.0 + 5.0 * r) / (r * r));
        let exact = area * (2.0 * 3.0 + 2.5 * 9.0);
        assert!((g.integrate(&f) - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn gaussian_kinetic_energy() {
        let g = grid(4096, 20.0);
        let u = RadialField::from_fn(g, |r| (-r * r / 2.0).exp());
        let exact = 1.5 * PI.powf(1.5);
        assert!((u.kinetic() - exact).abs() < 1e-4, "{} vs {exact}", u.kinetic());
    }

    #[test]
    fn kinetic_of_constant_interior_vanishes() {
        // u ≡ 1 on the grid: only the Dirichlet cut at R_max contributes
        let g = grid(1000, 10.0);
        let u = RadialField::from_fn(g.clone(), |_| 1.0);
        let h = g.spacing();
        let t = u.kinetic();
        let cut = 4.0 * PI * (10.0 - h / 2.0).powi(2) / h;
        assert!(t > 0.0 && t < 1.5 * cut);
        let lap = u.laplacian();
        assert!(lap.values()[..990].iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn laplacian_of_gaussian_pointwise() {
        let g = grid(2000, 12.0);
        let u = RadialField::from_fn(g.clone(), |r| (-r * r / 2.0).exp());
        let lap = u.laplacian();
        let h = g.spacing();
        for (j, &r) in g.nodes().iter().enumerate().take(1500) {
            let exact = (r * r - 3.0) * (-r * r / 2.0).exp();
            assert!((lap.values()[j] - exact).abs() < 10.0 * h * h, "r={r}");
        }
    }

    #[test]
    fn laplacian_is_symmetric() {
        let g = grid(800, 10.0);
        let u = RadialField::from_fn(g.clone(), |r| (-(r - 1.0).powi(2)).exp());
        let v = RadialField::from_fn(g.clone(), |r| r * r * (-r * r / 3.0).exp());
        let a = g.integrate(&mul(u.laplacian().values(), v.values()));
        let b = g.integrate(&mul(u.values(), v.laplacian().values()));
        assert!((a - b).abs() < 1e-8 * a.abs());
    }

    #[test]
    fn kinetic_matches_laplacian_form() {
        let g = grid(500, 10.0);
        let u = RadialField::from_fn(g.clone(), |r| (1.0 + r) * (-r).exp());
        let t = g.integrate(&mul(u.values(), &g.neg_laplacian(u.values())));
        assert!((t - u.kinetic()).abs() < 1e-10 * t);
    }

    #[test]
    fn kinetic_scales_quadratically() {
        let g = grid(6000, 24.0);
        let base = |r: f64| (-r * r / 2.0).exp() * (1.0 + 0.3 * r * r);
        let u = RadialField::from_fn(g.clone(), base);
        for &t in &[0.5f64, 2.0] {
            let ut = RadialField::from_fn(g.clone(), |r| t.powf(1.5) * base(t * r));
            assert!(((ut.mass() - u.mass()) / u.mass()).abs() < 1e-6);
            let rel = (ut.kinetic() - t * t * u.kinetic()) / (t * t * u.kinetic());
            assert!(rel.abs() < 1e-6, "t={t}: {rel}");
        }
    }

    #[test]
    fn higher_dimension_operator_is_consistent() {
        let g = Arc::new(RadialGrid::new(5, 3000, 12.0).unwrap());
        let u = RadialField::from_fn(g.clone(), |r| (-r * r / 2.0).exp());
        // -Δ e^{-r²/2} = (N - r²) e^{-r²/2} in ℝ^N
        let lap = u.laplacian();
        for (j, &r) in g.nodes().iter().enumerate().skip(5).take(1500) {
            let exact = (r * r - 5.0) * (-r * r / 2.0).exp();
            assert!((lap.values()[j] - exact).abs() < 1e-3, "r={r}");
        }
        // ∫|∇u|² = (N/2) ∫u² for this Gaussian
        let rel = (u.kinetic() - 2.5 * u.mass()) / u.kinetic();
        assert!(rel.abs() < 1e-4, "{rel}");
    }

    #[test]
    fn preconditioner_inverts_second_order_operator() {
        let g = grid(300, 10.0);
        let f = g.sample(|r| (-r * r).exp());
        let x = g.precondition(&f, 1.0);
        // (-Δ₂ + 1) x = f in the v variables
        let v: Vec<f64> = x.iter().zip(g.nodes()).map(|(x, r)| x * r).collect();
        let d2 = g.second_difference(&v);
        for j in 0..300 {
            let lhs = (-d2[j] + v[j]) / g.nodes()[j];
            assert!((lhs - f[j]).abs() < 1e-9);
        }
    }

    fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(a, b)| a * b).collect()
    }
}
