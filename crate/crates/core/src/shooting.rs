//! Independent ground-state solver by self-consistent shooting.
//!
//! Shares nothing with [`crate::groundstate`] beyond the special functions:
//! the grid starts at `r = 0`, the Riesz potential is computed through the
//! radial Fourier transform, and the profile comes from Numerov shooting on
//! the linear eigenproblem `-Δψ - φψ = Eψ`. A solution with eigenvalue `E`
//! is mapped to `E = -1` by `Q(r) = λ^{(N+2-γ)/2} ψ(λr)`, `λ = (-E)^{-1/2}`,
//! and the amplitude is fixed by the Nehari identity. Three dimensions only.

use std::f64::consts::PI;

use crate::fields::interp::{self, LeftEnd};
use crate::special::{riesz_symbol_constant, zeta};
use crate::{par, Error, Result};

#[derive(Clone, Debug)]
pub struct ShootingConfig {
    pub nodes: usize,
    pub r_max: f64,
    pub k_max: f64,
    pub dk: f64,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            nodes: 4000,
            r_max: 20.0,
            k_max: 40.0,
            dk: 0.02,
            damping: 0.9,
            tolerance: 1e-9,
            max_iterations: 400,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShootingSolution {
    pub gamma: f64,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub mass: f64,
    pub iterations: usize,
    /// Relative change of the last self-consistency update.
    pub change: f64,
}

struct Grid {
    h: f64,
    r: Vec<f64>,
}

impl Grid {
    // trapezoid for 4π ∫ f r² dr; the integrand is even in r
    fn integrate(&self, f: &[f64]) -> f64 {
        let n = f.len();
        let mut acc = 0.0;
        for i in 1..n - 1 {
            acc += f[i] * self.r[i] * self.r[i];
        }
        acc += 0.5 * f[n - 1] * self.r[n - 1] * self.r[n - 1];
        4.0 * PI * self.h * acc
    }
}

/// `|x|^{-γ} * ρ` for radial `ρ` sampled at `r_i = i h`.
struct FourierPotential {
    gamma: f64,
    c: f64,
    k: Vec<f64>,
    dk: f64,
    // ζ(1-γ, 1/2) for the k^{γ-1} endpoint behaviour of the inverse transform
    hurwitz: f64,
}

impl FourierPotential {
    fn new(gamma: f64, k_max: f64, dk: f64) -> Self {
        let n = (k_max / dk).ceil() as usize;
        let s = 1.0 - gamma;
        let hurwitz = if s.abs() < 1e-14 { 0.0 } else { (2f64.powf(s) - 1.0) * zeta(s) };
        Self {
            gamma,
            c: riesz_symbol_constant(3, gamma),
            k: (0..n).map(|j| (j as f64 + 0.5) * dk).collect(),
            dk,
            hurwitz,
        }
    }

    fn apply(&self, grid: &Grid, rho: &[f64]) -> Vec<f64> {
        let h = grid.h;
        let r = &grid.r;
        let n = r.len();
        // g(k) = ∫ s ρ(s) sin(ks) ds, trapezoid (odd integrand, spectral);
        // sin(k r_i) by the three-term recurrence in i
        let sr: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { 0.5 } else { 1.0 } * r[i] * rho[i])
            .collect();
        let g: Vec<f64> = par::map(&self.k, |&k| {
            let c2 = 2.0 * (k * h).cos();
            let (mut prev, mut cur) = (0.0, (k * h).sin());
            let mut acc = 0.0;
            for v in &sr[1..] {
                acc += v * cur;
                let next = c2 * cur - prev;
                prev = cur;
                cur = next;
            }
            h * acc
        });
        let a1 = {
            let mut acc = 0.0;
            for i in 1..n {
                let wt = if i == n - 1 { 0.5 } else { 1.0 };
                acc += wt * r[i] * r[i] * rho[i];
            }
            h * acc
        };
        let weight: Vec<f64> = self.k.iter().zip(&g).map(|(k, g)| g * k.powf(self.gamma - 3.0)).collect();
        let pref = 2.0 * self.c / PI;
        let endpoint = self.dk.powf(self.gamma) * a1 * self.hurwitz;
        let dk = self.dk;
        par::map(r, |&ri| {
            if ri == 0.0 {
                let s: f64 = self.k.iter().zip(&weight).map(|(k, w)| w * k).sum();
                // integrand k^{γ-1} A(k²) with A(0) = a1
                return pref * (dk * s - endpoint);
            }
            // sin((j + 1/2) dk r) by recurrence in j
            let c2 = 2.0 * (dk * ri).cos();
            let (mut prev, mut cur) = ((-0.5 * dk * ri).sin(), (0.5 * dk * ri).sin());
            let mut s = 0.0;
            for w in &weight {
                s += w * cur;
                let next = c2 * cur - prev;
                prev = cur;
                cur = next;
            }
            pref * (dk * s - endpoint * ri) / ri
        })
    }
}

/// Numerov integration of `y'' = -(φ + E) y` from `y(0) = 0`; returns
/// the number of sign changes and the samples.
fn shoot(grid: &Grid, phi: &[f64], e: f64) -> (usize, Vec<f64>) {
    let h2 = grid.h * grid.h;
    let n = phi.len();
    let f: Vec<f64> = phi.iter().map(|p| -(p + e)).collect();
    let mut y = vec![0.0; n];
    y[1] = grid.h;
    let mut nodes = 0;
    for i in 1..n - 1 {
        let a = 1.0 - h2 * f[i + 1] / 12.0;
        let b = 2.0 + 10.0 * h2 * f[i] / 12.0;
        let c = 1.0 - h2 * f[i - 1] / 12.0;
        y[i + 1] = (b * y[i] - c * y[i - 1]) / a;
        if y[i + 1] * y[i] < 0.0 {
            nodes += 1;
        }
        if y[i + 1].abs() > 1e200 {
            let last = y[i + 1];
            y[i + 2..].iter_mut().for_each(|v| *v = last);
            break;
        }
    }
    (nodes, y)
}

/// Lowest eigenpair of `-Δ - φ` with Dirichlet data at `r_max`, as `ψ` with
/// `∫ψ² = 1`.
fn ground_level(grid: &Grid, phi: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut lo = -phi[1..].iter().cloned().fold(0.0, f64::max) - 1.0;
    let mut hi = 0.0;
    if shoot(grid, phi, hi).0 == 0 {
        return Err(Error::InvalidParameter("potential has no bound state".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shoot(grid, phi, mid).0 == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * lo.abs() {
            break;
        }
    }
    let e = 0.5 * (lo + hi);
    let (_, mut y) = shoot(grid, phi, lo);
    // cut the exponentially growing error at the smallest |y| past the peak
    // and continue with the asymptotic decay
    let peak = y.iter().enumerate().fold(0, |b, (i, v)| if v.abs() > y[b].abs() { i } else { b });
    let mut cut = y.len() - 1;
    for i in peak + 1..y.len() - 1 {
        if y[i + 1].abs() >= y[i].abs() || y[i] <= 0.0 {
            cut = i;
            break;
        }
    }
    let kappa = (-e).sqrt();
    let y_cut = y[cut].max(0.0);
    for i in cut + 1..y.len() {
        y[i] = y_cut * (-kappa * (grid.r[i] - grid.r[cut])).exp();
    }
    let psi: Vec<f64> = y
        .iter()
        .zip(&grid.r)
        .enumerate()
        .map(|(i, (y, r))| if i == 0 { 0.0 } else { y / r })
        .collect();
    let mut psi = psi;
    // ψ(0) from the even extension: quartic fit through ψ(h), ψ(2h)
    psi[0] = (4.0 * psi[1] - psi[2]) / 3.0;
    let norm = grid.integrate(&psi.iter().map(|p| p * p).collect::<Vec<_>>()).sqrt();
    Ok((e, psi.iter().map(|p| p / norm).collect()))
}

pub fn solve(gamma: f64, config: &ShootingConfig) -> Result<ShootingSolution> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::InvalidParameter(format!("γ = {gamma}")));
    }
    let n = config.nodes + 1;
    let h = config.r_max / config.nodes as f64;
    let grid = Grid { h, r: (0..n).map(|i| i as f64 * h).collect() };
    let pot = FourierPotential::new(gamma, config.k_max, config.dk);

    let mut q: Vec<f64> = grid.r.iter().map(|r| 2.0 * (-r * r / 2.0).exp()).collect();
    let mut change = f64::INFINITY;
    for it in 0..config.max_iterations {
        let rho: Vec<f64> = q.iter().map(|x| x * x).collect();
        let phi = pot.apply(&grid, &rho);
        let (e, psi) = ground_level(&grid, &phi)?;
        let lambda = 1.0 / (-e).sqrt();
        // ψ̃(r) = ψ(λr) solves -Δψ̃ + ψ̃ = Φψ̃ with Φ(r) = λ² φ(λr)
        let sample = |v: &[f64], x: f64| interp::cubic(v, 0.0, h, x, LeftEnd::Zero);
        let even = |v: &[f64], x: f64| {
            // even extension about r = 0 for the leftmost stencil
            if x < 2.0 * h {
                let ext: Vec<f64> = [v[2], v[1]].into_iter().chain(v.iter().cloned()).collect();
                interp::cubic(&ext, -2.0 * h, h, x, LeftEnd::Zero)
            } else {
                sample(v, x)
            }
        };
        let psi_t: Vec<f64> = grid.r.iter().map(|&r| even(&psi, lambda * r)).collect();
        let big_phi: Vec<f64> = grid.r.iter().map(|&r| lambda * lambda * even(&phi, lambda * r)).collect();
        let rho_t: Vec<f64> = psi_t.iter().map(|x| x * x).collect();
        let phi_t = pot.apply(&grid, &rho_t);
        let num = grid.integrate(&big_phi.iter().zip(&rho_t).map(|(a, b)| a * b).collect::<Vec<_>>());
        let den = grid.integrate(&phi_t.iter().zip(&rho_t).map(|(a, b)| a * b).collect::<Vec<_>>());
        let amp = (num / den).sqrt();
        let target: Vec<f64> = psi_t.iter().map(|p| amp * p).collect();
        let diff: Vec<f64> = target.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).collect();
        let norm = grid.integrate(&q.iter().map(|x| x * x).collect::<Vec<_>>());
        change = (grid.integrate(&diff) / norm).sqrt();
        let theta = config.damping;
        q = q.iter().zip(&target).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
        if change < config.tolerance {
            let mass = grid.integrate(&q.iter().map(|x| x * x).collect::<Vec<_>>());
            return Ok(ShootingSolution { gamma, r: grid.r, q, mass, iterations: it + 1, change });
        }
    }
    Err(Error::NotConverged {
        iterations: config.max_iterations,
        update: change,
        residual: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::erf;

    fn grid(n: usize, r: f64) -> Grid {
        let h = r / n as f64;
        Grid { h, r: (0..=n).map(|i| i as f64 * h).collect() }
    }

    #[test]
    fn fourier_potential_of_gaussian() {
        let g = grid(4000, 20.0);
        let rho: Vec<f64> = g.r.iter().map(|r| (-r * r).exp() / PI.powf(1.5)).collect();
        let phi = FourierPotential::new(1.0, 40.0, 0.02).apply(&g, &rho);
        for (i, &r) in g.r.iter().enumerate().step_by(97) {
            let exact = if r == 0.0 { 2.0 / PI.sqrt() } else { erf(r) / r };
            assert!((phi[i] - exact).abs() < 1e-7, "r={r}: {} vs {exact}", phi[i]);
        }
    }

    #[test]
    fn endpoint_correction_for_fractional_exponent() {
        // |x|^{-γ} * e^{-|x|²} at the origin: ∫ e^{-s²} s^{2-γ} 4π ds
        let g = grid(4000, 20.0);
        let rho: Vec<f64> = g.r.iter().map(|r| (-r * r).exp()).collect();
        for &gamma in &[0.5, 1.5, 2.0] {
            let phi = FourierPotential::new(gamma, 40.0, 0.02).apply(&g, &rho);
            let exact = 2.0 * PI * crate::special::gamma((3.0 - gamma) / 2.0);
            assert!(((phi[0] - exact) / exact).abs() < 1e-6, "γ={gamma}: {} vs {exact}", phi[0]);
        }
    }

    #[test]
    fn hydrogen_like_level() {
        // -Δ - 2/r has ground level -1 with ψ ∝ e^{-r}
        let g = grid(8000, 40.0);
        let phi: Vec<f64> = g.r.iter().map(|&r| if r == 0.0 { 1e6 } else { 2.0 / r }).collect();
        let (e, _) = ground_level(&g, &phi).unwrap();
        assert!((e + 1.0).abs() < 1e-4, "{e}");
    }
}
