//! Radial ground states `Q_γ` of `-ΔQ + Q - (|x|^{-γ} * Q²) Q = 0`.
//!
//! The solver minimizes the action `J(u) = T/2 + M/2 - D/4` over the Nehari
//! manifold `T + M = D`, where `T = ∫|∇u|²`, `M = ∫u²`, `D = D_γ(u,u)`. Each
//! step moves along the preconditioned gradient `(-Δ₂ + 1)^{-1} J'(u)` with a
//! Barzilai–Borwein length, backtracks until the projected action does not
//! increase, and rescales back onto the manifold.

use std::sync::Arc;

use crate::fields::{RadialField, RadialGrid};
use crate::riesz::{RadialRiesz, RieszOperator};
use crate::{par, Error, Result};

/// Relative slack allowed when comparing actions of successive iterates;
/// below it the difference is rounding noise.
pub const ACTION_SLACK: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative `H¹` size of the last update.
    pub update_tolerance: f64,
    /// `‖-ΔQ + Q - φQ‖ / ‖Q‖` in `L²`.
    pub residual_tolerance: f64,
    /// Abort once negative samples had to be clipped more often than this.
    pub max_clips: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            update_tolerance: 1e-9,
            residual_tolerance: 1e-6,
            max_clips: 10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateSolution {
    pub gamma: f64,
    pub dim: usize,
    pub q: RadialField,
    pub mass: f64,
    pub kinetic: f64,
    pub hartree: f64,
    pub action: f64,
    pub pohozaev: (f64, f64),
    pub decay_rate: f64,
    pub iterations: usize,
    pub update_norm: f64,
    pub residual: f64,
    pub clips: usize,
    /// Action after every accepted step.
    pub history: Vec<f64>,
}

impl GroundStateSolution {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.q.grid()
    }

    /// Ground-state energy `I_γ = M / (4 - γ)`.
    pub fn ground_energy(&self) -> f64 {
        self.mass / (4.0 - self.gamma)
    }
}

struct State {
    u: Vec<f64>,
    t: f64,
    m: f64,
    d: f64,
    phi: Vec<f64>,
}

impl State {
    fn new(grid: &RadialGrid, op: &RadialRiesz, u: Vec<f64>) -> Self {
        let t = grid.kinetic(&u);
        let m = weighted_sq(grid.weights(), &u);
        let phi = op.apply(&u);
        let d = weighted_dot3(grid.weights(), &phi, &u, &u);
        Self { u, t, m, d, phi }
    }

    fn action(&self) -> f64 {
        0.5 * self.t + 0.5 * self.m - 0.25 * self.d
    }
}

fn weighted_sq(w: &[f64], u: &[f64]) -> f64 {
    par::sum(u.len(), |i| w[i] * u[i] * u[i])
}

fn weighted_dot3(w: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    par::sum(a.len(), |i| w[i] * a[i] * b[i] * c[i])
}

/// Rescale `u` onto the Nehari manifold: `t(u) = ((T + M) / D)^{1/2}`.
pub fn nehari_project(u: &RadialField, op: &RadialRiesz) -> Result<RadialField> {
    let grid = u.grid();
    let d = op.energy(u.values());
    if !(d > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let t = ((u.kinetic() + u.mass()) / d).sqrt();
    Ok(u.scaled(t))
        .and_then(|f| RadialField::new(grid.clone(), f.into_values()))
}

/// Relative Nehari defect `|T + M - D| / D`.
pub fn nehari_residual(u: &RadialField, op: &RadialRiesz) -> f64 {
    let d = op.energy(u.values());
    ((u.kinetic() + u.mass() - d) / d).abs()
}

fn project(grid: &RadialGrid, op: &RadialRiesz, u: Vec<f64>) -> Result<State> {
    let s = State::new(grid, op, u);
    if !(s.d > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let t = ((s.t + s.m) / s.d).sqrt();
    let t2 = t * t;
    Ok(State {
        u: s.u.iter().map(|x| x * t).collect(),
        t: s.t * t2,
        m: s.m * t2,
        d: s.d * t2 * t2,
        phi: s.phi.iter().map(|x| x * t2).collect(),
    })
}

/// `-Δu + u - φ_u u`.
fn gradient(grid: &RadialGrid, s: &State) -> Vec<f64> {
    let lap = grid.neg_laplacian(&s.u);
    lap.iter()
        .zip(&s.u)
        .zip(&s.phi)
        .map(|((l, u), p)| l + u - p * u)
        .collect()
}

fn h1_norm_sq(grid: &RadialGrid, v: &[f64]) -> f64 {
    grid.kinetic(v) + weighted_sq(grid.weights(), v)
}

pub fn solve_ground_state(
    gamma: f64,
    grid: Arc<RadialGrid>,
    init: Option<&RadialField>,
    config: &SolverConfig,
) -> Result<GroundStateSolution> {
    let op = RadialRiesz::new(grid, gamma)?;
    solve_with_operator(&op, init, config)
}

/// Solve with a prebuilt kernel operator. `init` may live on another
/// radial grid (it is resampled); without it the solver starts from
/// `e^{-r²/2}`.
pub fn solve_with_operator(
    op: &RadialRiesz,
    init: Option<&RadialField>,
    config: &SolverConfig,
) -> Result<GroundStateSolution> {
    let grid = op.grid().clone();
    let start = match init {
        Some(f) if Arc::ptr_eq(f.grid(), &grid) => f.values().to_vec(),
        Some(f) => f.resample(grid.clone()).into_values(),
        None => grid.sample(|r| (-0.5 * r * r).exp()),
    };
    if start.iter().any(|&x| x < 0.0) || start.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidParameter("initial guess must be positive".into()));
    }
    let w = grid.weights();

    let mut state = project(&grid, op, start)?;
    let mut history = vec![state.action()];
    let mut grad = gradient(&grid, &state);
    let mut dir = grid.precondition(&grad, 1.0);
    let mut step = 1.0;
    let mut clips = 0;
    let mut update = f64::INFINITY;
    let mut residual = f64::INFINITY;

    for iteration in 0..config.max_iterations {
        residual = weighted_sq(w, &grad).sqrt() / state.m.sqrt();
        if update < config.update_tolerance && residual < config.residual_tolerance {
            return Ok(finish(op, state, history, iteration, update, residual, clips));
        }

        let j0 = state.action();
        let mut trial_step = step;
        let mut accepted = None;
        for _ in 0..60 {
            let mut cand: Vec<f64> = state.u.iter().zip(&dir).map(|(u, p)| u - trial_step * p).collect();
            let negative = cand.iter().any(|&x| x < 0.0);
            if negative {
                cand.iter_mut().for_each(|x| *x = x.max(0.0));
            }
            let next = project(&grid, op, cand)?;
            if next.action() <= j0 + ACTION_SLACK * j0.abs() {
                accepted = Some((next, negative));
                break;
            }
            trial_step *= 0.5;
        }
        let Some((next, clipped)) = accepted else {
            // no decrease at any step length: stationary to rounding
            return Ok(finish(op, state, history, iteration, 0.0, residual, clips));
        };
        if clipped {
            clips += 1;
            if clips > config.max_clips {
                return Err(Error::LostPositivity(clips));
            }
        }

        let s: Vec<f64> = next.u.iter().zip(&state.u).map(|(a, b)| a - b).collect();
        let s_h1 = h1_norm_sq(&grid, &s);
        update = (s_h1 / (next.t + next.m)).sqrt();

        let next_grad = gradient(&grid, &next);
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = par::sum(s.len(), |i| w[i] * s[i] * y[i]);
        // Barzilai–Borwein length in the H¹ metric of the preconditioner
        step = if sy > 0.0 { (s_h1 / sy).clamp(1e-3, 20.0) } else { 1.0 };

        state = next;
        history.push(state.action());
        grad = next_grad;
        dir = grid.precondition(&grad, 1.0);
    }
    Err(Error::NotConverged {
        iterations: config.max_iterations,
        update,
        residual,
    })
}

fn finish(
    op: &RadialRiesz,
    state: State,
    history: Vec<f64>,
    iterations: usize,
    update: f64,
    residual: f64,
    clips: usize,
) -> GroundStateSolution {
    let grid = op.grid().clone();
    let gamma = op.gamma();
    let dim = grid.dim();
    let (t, m, d) = (state.t, state.m, state.d);
    let q = RadialField::new(grid, state.u).expect("iterates stay finite");
    let decay_rate = fit_decay(&q);
    GroundStateSolution {
        gamma,
        dim,
        pohozaev: pohozaev_defects(dim, gamma, t, m, d),
        q,
        mass: m,
        kinetic: t,
        hartree: d,
        action: 0.5 * t + 0.5 * m - 0.25 * d,
        decay_rate,
        iterations,
        update_norm: update,
        residual,
        clips,
        history,
    }
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

/// `(ρ₁, ρ₂)`: the relative defect of
/// `(N-2)/2 T + N/2 M = (2N-γ)/4 D` and the largest pairwise relative
/// defect among `T/γ`, `M/(4-γ)`, `D/4`.
pub fn pohozaev_defects(dim: usize, gamma: f64, t: f64, m: f64, d: f64) -> (f64, f64) {
    let n = dim as f64;
    let rho1 = relative((n - 2.0) / 2.0 * t + n / 2.0 * m, (2.0 * n - gamma) / 4.0 * d);
    let (a, b, c) = (t / gamma, m / (4.0 - gamma), d / 4.0);
    let rho2 = relative(a, b).max(relative(b, c)).max(relative(a, c));
    (rho1, rho2)
}

pub fn pohozaev_check(sol: &GroundStateSolution) -> (f64, f64) {
    pohozaev_defects(sol.dim, sol.gamma, sol.kinetic, sol.mass, sol.hartree)
}

/// `C_γ = (4/(4-γ)) ((4-γ)/γ)^{γ/2} / M`.
pub fn gn_constant_from(gamma: f64, mass: f64) -> f64 {
    4.0 / (4.0 - gamma) * ((4.0 - gamma) / gamma).powf(gamma / 2.0) / mass
}

pub fn gn_constant(sol: &GroundStateSolution) -> f64 {
    gn_constant_from(sol.gamma, sol.mass)
}

/// `D / (C_γ T^{γ/2} M^{(4-γ)/2})`; at most 1 by the sharp inequality.
pub fn gn_ratio(gamma: f64, c_gamma: f64, t: f64, m: f64, d: f64) -> f64 {
    d / (c_gamma * t.powf(gamma / 2.0) * m.powf((4.0 - gamma) / 2.0))
}

/// Least-squares slope of `-ln Q` on `[R_max/2, 3R_max/4]`.
pub fn fit_decay(q: &RadialField) -> f64 {
    let grid = q.grid();
    let r_max = grid.r_max();
    let pts: Vec<(f64, f64)> = grid
        .nodes()
        .iter()
        .zip(q.values())
        .filter(|(r, v)| **r >= 0.5 * r_max && **r <= 0.75 * r_max && **v > 0.0)
        .map(|(r, v)| (*r, v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    -sxy / sxx
}

/// PDE residual `‖-ΔQ + Q - φQ‖ / ‖Q‖` of an arbitrary field.
pub fn residual(u: &RadialField, op: &RadialRiesz) -> f64 {
    let grid = u.grid();
    let s = State::new(grid, op, u.values().to_vec());
    let g = gradient(grid, &s);
    (weighted_sq(grid.weights(), &g) / s.m).sqrt()
}

#[derive(Clone, Debug)]
pub struct MassCurveRow {
    pub gamma: f64,
    pub mass: f64,
    pub kinetic: f64,
    pub hartree: f64,
    pub ground_energy: f64,
    pub decay_rate: f64,
}

#[derive(Clone, Debug)]
pub struct MassCurve {
    pub rows: Vec<MassCurveRow>,
    /// `|M(γ) - M(2)|` strictly decreasing over the last three rows before
    /// `γ = 2` (true when fewer rows exist).
    pub gaps_decreasing: bool,
    pub solutions: Vec<GroundStateSolution>,
}

/// Intermediate continuation nodes between two exponents: spacing 0.05,
/// refined to 0.01 above γ = 1.9.
pub fn continuation_path(from: f64, to: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut g = from;
    loop {
        let h = if g >= 1.9 - 1e-12 { 0.01 } else { 0.05 };
        g += h;
        if g >= to - 1e-9 {
            break;
        }
        out.push(g);
    }
    out
}

/// Solve along increasing `gammas` (must contain 2), warm-starting each
/// solve from the previous one through [`continuation_path`].
pub fn mass_curve(gammas: &[f64], grid: Arc<RadialGrid>, config: &SolverConfig) -> Result<MassCurve> {
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("γ list must be sorted increasing".into()));
    }
    if *gammas.last().unwrap() != 2.0 {
        return Err(Error::InvalidParameter("γ list must end at 2".into()));
    }
    let loose = SolverConfig {
        update_tolerance: 1e-6,
        residual_tolerance: 1e-4,
        ..config.clone()
    };
    let mut solutions: Vec<GroundStateSolution> = Vec::new();
    let mut prev: Option<GroundStateSolution> = None;
    for &g in gammas {
        if let Some(p) = &prev {
            for mid in continuation_path(p.gamma, g) {
                let s = solve_ground_state(mid, grid.clone(), Some(&prev.as_ref().unwrap().q), &loose)?;
                prev = Some(s);
            }
        }
        let s = solve_ground_state(g, grid.clone(), prev.as_ref().map(|p| &p.q), config)?;
        prev = Some(s.clone());
        solutions.push(s);
    }
    let rows: Vec<MassCurveRow> = solutions
        .iter()
        .map(|s| MassCurveRow {
            gamma: s.gamma,
            mass: s.mass,
            kinetic: s.kinetic,
            hartree: s.hartree,
            ground_energy: s.ground_energy(),
            decay_rate: s.decay_rate,
        })
        .collect();
    let m2 = rows.last().unwrap().mass;
    let gaps: Vec<f64> = rows[..rows.len() - 1].iter().map(|r| (r.mass - m2).abs()).collect();
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    let gaps_decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    Ok(MassCurve { rows, gaps_decreasing, solutions })
}
