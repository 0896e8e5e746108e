use std::sync::Arc;

use num_complex::Complex64;

use super::fft::{frequency, Fft3};
use super::interp::{self, LeftEnd};
use super::Discretization;
use crate::{par, Error, Result};

/// How derivatives are evaluated on a [`CartesianGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    /// Multiplication by `-|k|²` in Fourier space.
    #[default]
    Spectral,
    /// Seven-point second-order stencil; no complex work arrays.
    FiniteDifference,
}

impl std::str::FromStr for DerivativeScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "fd" | "finite-difference" => Ok(Self::FiniteDifference),
            other => Err(Error::InvalidParameter(format!("derivative scheme `{other}`"))),
        }
    }
}

/// Periodic box `[-L_a, L_a)` in ℝ³ with `n_a` nodes per axis.
///
/// Nodes are `x_i = -L + i h`, so the origin is a node and the reflection
/// `x → -x` maps the lattice onto itself.
#[derive(Clone, Debug)]
pub struct CartesianGrid {
    shape: [usize; 3],
    half_width: [f64; 3],
    h: [f64; 3],
    scheme: DerivativeScheme,
    weights: Vec<f64>,
    symbol: Vec<f64>,
    fft: Arc<Fft3>,
}

impl CartesianGrid {
    pub fn new(shape: [usize; 3], half_width: [f64; 3], scheme: DerivativeScheme) -> Result<Self> {
        for (&n, &l) in shape.iter().zip(&half_width) {
            if n < 32 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!("axis with {n} nodes")));
            }
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidGrid(format!("half width {l}")));
            }
        }
        let h = [0, 1, 2].map(|a| 2.0 * half_width[a] / shape[a] as f64);
        let len = shape.iter().product();
        let cell = h[0] * h[1] * h[2];
        let [n0, n1, n2] = shape;
        let axis_symbol = |a: usize, j: usize| -> f64 {
            let k = frequency(j, shape[a], h[a]);
            match scheme {
                DerivativeScheme::Spectral => k * k,
                DerivativeScheme::FiniteDifference => {
                    let s = (0.5 * k * h[a]).sin();
                    4.0 * s * s / (h[a] * h[a])
                }
            }
        };
        let s0: Vec<f64> = (0..n0).map(|j| axis_symbol(0, j)).collect();
        let s1: Vec<f64> = (0..n1).map(|j| axis_symbol(1, j)).collect();
        let s2: Vec<f64> = (0..n2).map(|j| axis_symbol(2, j)).collect();
        let mut symbol = vec![0.0; len];
        par::fill(&mut symbol, |idx| {
            let (i, j, k) = (idx / (n1 * n2), (idx / n2) % n1, idx % n2);
            s0[i] + s1[j] + s2[k]
        });
        Ok(Self {
            shape,
            half_width,
            h,
            scheme,
            weights: vec![cell; len],
            symbol,
            fft: Arc::new(Fft3::new(shape)),
        })
    }

    /// Cube `[-L, L)³` with `n` nodes per axis.
    pub fn cube(n: usize, half_width: f64, scheme: DerivativeScheme) -> Result<Self> {
        Self::new([n; 3], [half_width; 3], scheme)
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn half_width(&self) -> [f64; 3] {
        self.half_width
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.h
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }

    pub fn fft(&self) -> &Arc<Fft3> {
        &self.fft
    }

    pub fn signature(&self) -> String {
        format!(
            "cartesian:{}x{}x{}:L{:016x}:{:016x}:{:016x}",
            self.shape[0],
            self.shape[1],
            self.shape[2],
            self.half_width[0].to_bits(),
            self.half_width[1].to_bits(),
            self.half_width[2].to_bits()
        )
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        -self.half_width[axis] + i as f64 * self.h[axis]
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let [_, n1, n2] = self.shape;
        [idx / (n1 * n2), (idx / n2) % n1, idx % n2]
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.coordinate(0, i), self.coordinate(1, j), self.coordinate(2, k)]
    }

    pub fn sample<F: Fn([f64; 3]) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        par::fill(&mut out, |idx| f(self.point(idx)));
        out
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.cell_volume() * par::sum(f.len(), |i| f[i])
    }

    /// Multiply by `m(k)` in Fourier space, with `m` indexed like the grid.
    pub fn fourier_multiply(&self, u: &[f64], m: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.forward(&mut buf);
        let n2 = self.shape[2];
        par::for_each_row(&mut buf, n2, |row, line| {
            for (k, z) in line.iter_mut().enumerate() {
                *z *= m(row * n2 + k);
            }
        });
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        match self.scheme {
            DerivativeScheme::Spectral => self.fourier_multiply(u, |i| self.symbol[i]),
            DerivativeScheme::FiniteDifference => self.stencil(u),
        }
    }

    fn stencil(&self, u: &[f64]) -> Vec<f64> {
        let [n0, n1, n2] = self.shape;
        let c = self.h.map(|h| 1.0 / (h * h));
        let mut out = vec![0.0; u.len()];
        par::fill(&mut out, |idx| {
            let [i, j, k] = self.unravel(idx);
            let at = |i: usize, j: usize, k: usize| u[(i * n1 + j) * n2 + k];
            let centre = u[idx];
            let d0 = 2.0 * centre - at((i + 1) % n0, j, k) - at((i + n0 - 1) % n0, j, k);
            let d1 = 2.0 * centre - at(i, (j + 1) % n1, k) - at(i, (j + n1 - 1) % n1, k);
            let d2 = 2.0 * centre - at(i, j, (k + 1) % n2) - at(i, j, (k + n2 - 1) % n2);
            c[0] * d0 + c[1] * d1 + c[2] * d2
        });
        out
    }

    /// Exact periodic inverse of `-Δ + shift` for the active scheme.
    pub fn precondition(&self, f: &[f64], shift: f64) -> Vec<f64> {
        self.fourier_multiply(f, |i| 1.0 / (self.symbol[i] + shift))
    }

    pub fn kinetic(&self, u: &[f64]) -> f64 {
        let lap = self.neg_laplacian(u);
        self.integrate(&u.iter().zip(&lap).map(|(a, b)| a * b).collect::<Vec<_>>())
    }
}

impl Discretization for CartesianGrid {
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn weights(&self) -> &[f64] {
        &self.weights
    }
    fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        CartesianGrid::neg_laplacian(self, u)
    }
    fn precondition(&self, f: &[f64], shift: f64) -> Vec<f64> {
        CartesianGrid::precondition(self, f, shift)
    }
}

/// A real function sampled on a [`CartesianGrid`].
#[derive(Clone, Debug)]
pub struct CartesianField {
    grid: Arc<CartesianGrid>,
    values: Vec<f64>,
}

impl CartesianField {
    pub fn new(grid: Arc<CartesianGrid>, values: Vec<f64>) -> Result<Self> {
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

    pub fn from_fn<F: Fn([f64; 3]) -> f64 + Sync + Send>(grid: Arc<CartesianGrid>, f: F) -> Self {
        let values = grid.sample(f);
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<CartesianGrid> {
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
        self.grid.cell_volume() * par::sum(self.values.len(), |i| self.values[i] * self.values[i])
    }

    pub fn kinetic(&self) -> f64 {
        self.grid.kinetic(&self.values)
    }

    pub fn laplacian(&self) -> CartesianField {
        let values = self.grid.neg_laplacian(&self.values).into_iter().map(|x| -x).collect();
        CartesianField { grid: self.grid.clone(), values }
    }

    /// Tricubic Lagrange interpolation with periodic wrap.
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let g = &self.grid;
        let [n0, n1, n2] = g.shape;
        let h = g.h;
        let base = [0, 1, 2].map(|a| ((x[a] + g.half_width[a]) / h[a]).floor() as isize);
        let mut plane = [0.0; 4];
        let mut line = [0.0; 4];
        for (a, p) in plane.iter_mut().enumerate() {
            let i = (base[0] - 1 + a as isize).rem_euclid(n0 as isize) as usize;
            for (b, l) in line.iter_mut().enumerate() {
                let j = (base[1] - 1 + b as isize).rem_euclid(n1 as isize) as usize;
                let row = &self.values[(i * n1 + j) * n2..(i * n1 + j + 1) * n2];
                *l = interp::cubic(row, -g.half_width[2], h[2], x[2], LeftEnd::Periodic);
            }
            let y0 = g.coordinate(1, 0) + (base[1] - 1) as f64 * h[1];
            *p = interp::cubic(&line, y0, h[1], x[1], LeftEnd::Zero);
        }
        let x0 = g.coordinate(0, 0) + (base[0] - 1) as f64 * h[0];
        interp::cubic(&plane, x0, h[0], x[0], LeftEnd::Zero)
    }

    /// Index and value of the largest sample; ties within `1e-12` go to the
    /// lexicographically smallest coordinates. The flag reports a tie.
    pub fn argmax(&self) -> (usize, f64, bool) {
        let top = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut best: Option<usize> = None;
        let mut ties = 0;
        for (idx, &v) in self.values.iter().enumerate() {
            if top - v <= 1e-12 {
                ties += 1;
                let better = match best {
                    None => true,
                    Some(b) => lex_less(self.grid.point(idx), self.grid.point(b)),
                };
                if better {
                    best = Some(idx);
                }
            }
        }
        let idx = best.unwrap_or(0);
        (idx, self.values[idx], ties > 1)
    }
}

fn lex_less(a: [f64; 3], b: [f64; 3]) -> bool {
    a.partial_cmp(&b) == Some(std::cmp::Ordering::Less)
}
