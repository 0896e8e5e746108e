//! Riesz potentials `φ = |x|^{-γ} * ρ` and the Hartree energy
//! `D_γ(u,u) = ∫∫ u²(x) u²(y) |x-y|^{-γ} dx dy`.
//!
//! Two discretizations are provided and checked against each other:
//! [`RadialRiesz`] works with the angular-reduced kernel on a radial grid,
//! [`FourierRiesz`] multiplies by the Fourier symbol on a zero-padded
//! Cartesian grid.

pub mod cache;
mod fourier;
pub use fourier::FourierRiesz;
mod radial;


pub use radial::RadialRiesz;

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::special::{gauss_legendre_on, sphere_area};
use crate::{par, Error, Result};

/// Action of the Riesz potential on densities sampled on a grid.
pub trait RieszOperator: Send + Sync {
    fn gamma(&self) -> f64;

    /// Quadrature weights of the underlying grid.
    fn weights(&self) -> &[f64];

    /// `φ = |x|^{-γ} * ρ` at the grid nodes.
    fn potential(&self, density: &[f64]) -> Vec<f64>;

    /// `φ_u` for the density `u²`.
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let rho: Vec<f64> = u.iter().map(|x| x * x).collect();
        self.potential(&rho)
    }

    /// `∫∫ ρ₁(x) ρ₂(y) |x-y|^{-γ}`.
    fn pairing(&self, rho1: &[f64], rho2: &[f64]) -> f64 {
        let phi = self.potential(rho1);
        let w = self.weights();
        par::sum(phi.len(), |i| w[i] * phi[i] * rho2[i])
    }

    /// `D_γ(u,u)`.
    fn energy(&self, u: &[f64]) -> f64 {
        let rho: Vec<f64> = u.iter().map(|x| x * x).collect();
        self.pairing(&rho, &rho)
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Riesz exponent γ = {gamma} outside (0, 2]")))
    }
}

/// Angular-reduced kernel `K_{N,γ}(r,s) = ∫_{S^{N-1}} |r e₁ - s ω|^{-γ} dω`.
///
/// Closed forms in three dimensions, Gauss–Legendre quadrature otherwise.
pub fn radial_kernel_eval(r: f64, s: f64, gamma: f64, dim: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(format!("kernel radii r = {r}, s = {s}")));
    }
    if dim < 3 {
        return Err(Error::InvalidParameter(format!("dimension {dim}")));
    }
    if dim == 3 {
        let d = (r - s).abs();
        if gamma == 2.0 {
            if d == 0.0 {
                return Err(Error::DiagonalSingularity(r));
            }
            return Ok(2.0 * PI / (r * s) * ((r + s) / d).ln());
        }
        let b = 2.0 - gamma;
        return Ok(2.0 * PI / (b * r * s) * ((r + s).powf(b) - d.powf(b)));
    }
    Ok(angular_quadrature(r, s, gamma, dim))
}

/// `|S^{N-2}| ∫_0^π (r² + s² - 2rs cos θ)^{-γ/2} sin^{N-2} θ dθ` on a
/// geometrically graded partition toward `θ = 0`, where the integrand
/// peaks when `r ≈ s`.
pub(crate) fn angular_quadrature(r: f64, s: f64, gamma: f64, dim: usize) -> f64 {
    let p = dim as i32 - 2;
    let f = |t: f64| {
        // r² + s² - 2rs cos θ without cancellation
        let half = (0.5 * t).sin();
        let d2 = (r - s) * (r - s) + 4.0 * r * s * half * half;
        d2.powf(-0.5 * gamma) * t.sin().powi(p)
    };
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let rule = RULE.get_or_init(|| gauss_legendre_on(20, 0.0, 1.0));
    let panel = |lo: f64, hi: f64| -> f64 {
        rule.iter().map(|&(x, w)| w * f(lo + (hi - lo) * x)).sum::<f64>() * (hi - lo)
    };
    let mut acc = 0.0;
    let mut hi = PI;
    for _ in 0..40 {
        let lo = 0.25 * hi;
        acc += panel(lo, hi);
        hi = lo;
    }
    acc += panel(0.0, hi);
    sphere_area(dim - 1) * acc
}
