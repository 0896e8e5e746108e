use std::sync::Arc;

use super::{check_gamma, RadialRiesz, RieszOperator};
use crate::fields::fft::{frequency, Fft3};
use crate::fields::{CartesianGrid, RadialField, RadialGrid};
use crate::special::riesz_symbol_constant;
use crate::{par, Error, Result};

/// Riesz potential on a [`CartesianGrid`] by multiplication with
/// `c_{3,γ} |ξ|^{γ-3}` on a grid doubled along every axis.
///
/// Densities are zero-padded into the doubled box, so periodic images sit
/// at least one box width away. The symbol is singular at `ξ = 0`; the
/// zero mode is set to 0 and replaced by a smooth correction kernel
/// `S(z) = s₀ + s₂|z|²`, which models what the periodic images and the
/// implied neutralizing background add to `|z|^{-γ}` inside the box.
/// Both coefficients are fixed at construction against the radial
/// discretization on a reference Gaussian: `s₂` by a least-squares fit of
/// the potential on `|x| ≤ 5`, then `s₀` so that `D_γ` matches exactly.
/// `S` only touches the Fourier data at `ξ = 0` (a constant and a
/// second-derivative term), so this is a regularization of the zero mode.
pub struct FourierRiesz {
    grid: Arc<CartesianGrid>,
    gamma: f64,
    padded: Fft3,
    symbol: Vec<f64>,
    background: [f64; 2],
}

impl std::fmt::Debug for FourierRiesz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierRiesz")
            .field("shape", &self.grid.shape())
            .field("gamma", &self.gamma)
            .field("background", &self.background)
            .finish()
    }
}

impl FourierRiesz {
    pub fn new(grid: Arc<CartesianGrid>, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let shape = grid.shape().map(|n| 2 * n);
        let h = grid.spacing();
        let c = riesz_symbol_constant(3, gamma);
        let [n0, n1, n2] = shape;
        let mut symbol = vec![0.0; n0 * n1 * n2];
        par::fill(&mut symbol, |idx| {
            let (i, j, k) = (idx / (n1 * n2), (idx / n2) % n1, idx % n2);
            let xi2 = frequency(i, n0, h[0]).powi(2)
                + frequency(j, n1, h[1]).powi(2)
                + frequency(k, n2, h[2]).powi(2);
            if idx == 0 {
                0.0
            } else {
                c * xi2.powf(0.5 * (gamma - 3.0))
            }
        });
        let mut op = Self { grid, gamma, padded: Fft3::new(shape), symbol, background: [0.0; 2] };
        op.calibrate()?;
        Ok(op)
    }

    pub fn grid(&self) -> &Arc<CartesianGrid> {
        &self.grid
    }

    /// Coefficients `(s₀, s₂)` of the zero-mode correction kernel.
    pub fn background(&self) -> [f64; 2] {
        self.background
    }

    // Fit S against the radial path on e^{-|x|²}.
    fn calibrate(&mut self) -> Result<()> {
        let l = self.grid.half_width().into_iter().fold(f64::INFINITY, f64::min);
        if l < 5.0 {
            return Err(Error::InvalidGrid(format!(
                "half width {l} too small for zero-mode calibration (need ≥ 5)"
            )));
        }
        let rho = self.grid.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp());
        let radial = Arc::new(RadialGrid::new(3, 4096, 16.0)?);
        let rho_r = radial.sample(|r| (-r * r).exp());
        let rop = RadialRiesz::new(radial, self.gamma)?;
        let phi_r = RadialField::new(rop.grid().clone(), rop.potential(&rho_r))?;
        let target = rop.pairing(&rho_r, &rho_r);

        let bare = self.bare(&rho);
        let mut fit = [[0.0; 2]; 2];
        let mut rhs = [0.0; 2];
        for (idx, b) in bare.iter().enumerate() {
            let p = self.grid.point(idx);
            let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            if r2 <= 25.0 {
                let e = phi_r.eval(r2.sqrt()) - b;
                for (a, f) in [1.0, r2].iter().enumerate() {
                    fit[a][0] += f;
                    fit[a][1] += f * r2;
                    rhs[a] += f * e;
                }
            }
        }
        let det = fit[0][0] * fit[1][1] - fit[0][1] * fit[1][0];
        let q = self.grid.integrate(&rho);
        let s2 = (fit[0][0] * rhs[1] - fit[1][0] * rhs[0]) / det / q;
        self.background = [0.0, s2];
        let current = self.pairing(&rho, &rho);
        self.background[0] = (target - current) / (q * q);
        Ok(())
    }

    fn bare(&self, density: &[f64]) -> Vec<f64> {
        self.padded.padded_convolve(density, self.grid.shape(), &self.symbol)
    }
}

impl RieszOperator for FourierRiesz {
    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn weights(&self) -> &[f64] {
        <CartesianGrid as crate::fields::Discretization>::weights(&self.grid)
    }

    // m(ξ) is the continuum transform of the kernel, i.e. h³ times the
    // lattice transform, which cancels the h³ of the quadrature.
    fn potential(&self, density: &[f64]) -> Vec<f64> {
        let bare = self.bare(density);
        let g = &self.grid;
        let n = density.len();
        let q = g.integrate(density);
        let moment = |f: &(dyn Fn([f64; 3]) -> f64 + Sync)| {
            g.cell_volume() * par::sum(n, |i| f(g.point(i)) * density[i])
        };
        let m1 = [0, 1, 2].map(|a| moment(&|p| p[a]));
        let m2 = moment(&|p| p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        let [s0, s2] = self.background;
        let mut phi = vec![0.0; n];
        par::fill(&mut phi, |i| {
            let p = g.point(i);
            let x2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            let dot = p[0] * m1[0] + p[1] * m1[1] + p[2] * m1[2];
            bare[i] + s0 * q + s2 * (x2 * q - 2.0 * dot + m2)
        });
        phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DerivativeScheme;
    use crate::special::erf;
    use std::f64::consts::PI;

    fn cube(n: usize, l: f64) -> Arc<CartesianGrid> {
        Arc::new(CartesianGrid::cube(n, l, DerivativeScheme::Spectral).unwrap())
    }

    #[test]
    fn calibration_transfers_to_other_widths() {
        let g = cube(64, 8.0);
        for &gamma in &[1.0, 1.5, 1.9] {
            let op = FourierRiesz::new(g.clone(), gamma).unwrap();
            let radial = Arc::new(RadialGrid::new(3, 4096, 16.0).unwrap());
            let rop = RadialRiesz::new(radial.clone(), gamma).unwrap();
            for &alpha in &[0.6, 2.0] {
                let u = g.sample(|x| (-alpha * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp());
                let ur = radial.sample(|r| (-alpha * r * r / 2.0).exp());
                let (d, dr) = (op.energy(&u), rop.energy(&ur));
                assert!(((d - dr) / dr).abs() < 1e-3, "γ={gamma} α={alpha}: {d} vs {dr}");
            }
        }
    }

    #[test]
    fn coulomb_potential_pointwise() {
        let g = cube(64, 8.0);
        let op = FourierRiesz::new(g.clone(), 1.0).unwrap();
        let rho = g.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() / PI.powf(1.5));
        let phi = op.potential(&rho);
        for idx in (0..g.len()).step_by(997) {
            let p = g.point(idx);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if r < 5.0 {
                let exact = if r == 0.0 { 2.0 / PI.sqrt() } else { erf(r) / r };
                assert!(((phi[idx] - exact) / exact).abs() < 1e-3, "r={r}: {} vs {exact}", phi[idx]);
            }
        }
    }

    #[test]
    fn symbol_positive_off_zero() {
        let op = FourierRiesz::new(cube(32, 5.0), 1.5).unwrap();
        assert!(op.symbol[1..].iter().all(|&m| m > 0.0));
    }

    #[test]
    fn rejects_tiny_box() {
        assert!(FourierRiesz::new(cube(32, 3.0), 1.0).is_err());
    }

    #[test]
    fn coulomb_background_is_the_neutralizing_term() {
        // a uniform background of total charge -1 in the padded cube adds
        // (2π/3) |x|² / V to the Coulomb potential
        let g = cube(64, 8.0);
        let op = FourierRiesz::new(g, 1.0).unwrap();
        let v = 32f64.powi(3);
        let s2 = op.background()[1];
        assert!(((s2 + 2.0 * PI / (3.0 * v)) / s2).abs() < 0.05, "{s2}");
    }
}
