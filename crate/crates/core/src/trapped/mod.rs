//! Mass-constrained minimizers with a trapping potential.
//!
//! Minimizes `E(u) = ∫|∇u|² + ∫V u² - (a/2) D_γ(u,u)` over `∫u² = 1`.
//!
//! Every solve runs in a frame `x = c + s·y` on the field
//! `w(y) = s^{3/2} u(c + s y)`, in which
//!
//! ```text
//! E(u) = s^{-2} (T_w + P_w - (g/2) D_w),   g = a s^{2-γ},
//! ```
//!
//! with `P_w = ∫ s² V(c + s y) w²`. The physical frame is `c = 0, s = 1`.
//! Close to the critical exponent the minimizer concentrates at scale
//! `ε_γ = (a/M_γ)^{-1/(2-γ)}`, and the solve switches to `s = ε_γ` with
//! one frame per well, its center moved by Newton steps on `∫V w²`.
//!
//! Energy gaps `e_a(γ) - ẽ_a(γ)` are tiny compared to `e_a(γ)` there, so
//! they are measured against a reference minimizer with `V = 0` on the same
//! frame grid and evaluated from differences of fields (see
//! [`TrappedMinimizer::gap_to`]).

mod flow;
mod space;
mod trial;

pub use space::{FrameGrid, FrameSpace};
pub use trial::{cutoff, trial_upper_bound, TrialBound};

use std::sync::Arc;

use crate::fields::{CartesianField, DerivativeScheme, RadialField, RadialGrid};
use crate::groundstate::{solve_ground_state, GroundStateSolution, SolverConfig};
use crate::potential::PotentialSpec;
use crate::{par, Error, Result};

// Center updates stop once the frame moves by less than this fraction of a
// grid cell; translations are nearly flat so tighter targets only chase
// rounding.
const CENTER_TOLERANCE: f64 = 1e-3;

// Residual target of the flow passes between center updates.
const LOOSE_TOLERANCE: f64 = 1e-4;

// Relative energy gain below which another center update is not attempted.
const CENTER_ENERGY_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct TrappedConfig {
    pub grid: FrameGrid,
    pub max_iterations: usize,
    /// `‖Hw - μw‖ / max(|μ_w|, 1)` in frame units.
    pub residual_tolerance: f64,
    /// Use the concentration frame from this γ on (when `a > M_γ`).
    pub rescale_from: f64,
    /// Outer passes alternating flow and center update.
    pub max_center_updates: usize,
}

impl TrappedConfig {
    /// Cartesian frame grid `n³` on `[-L, L)³` with spectral derivatives.
    /// Its residual floor is set by rounding in the periodic Laplacian and
    /// the padded Riesz transform, so the tolerance is looser than on the
    /// radial grid.
    pub fn cartesian(n: usize, half_width: f64) -> Self {
        Self {
            grid: FrameGrid::Cartesian { n, half_width, scheme: DerivativeScheme::Spectral },
            residual_tolerance: 5e-8,
            ..Self::default()
        }
    }
}

impl Default for TrappedConfig {
    fn default() -> Self {
        Self {
            grid: FrameGrid::default(),
            max_iterations: 5000,
            residual_tolerance: 1e-10,
            rescale_from: 1.8,
            max_center_updates: 12,
        }
    }
}

/// Starting field of a run.
#[derive(Clone, Debug, Default)]
pub enum Seed {
    /// Ground-state profile at scale `min(ε_γ, 1)` centered at the well.
    #[default]
    Profile,
    /// Gaussian of the given physical width centered at the well.
    Gaussian { width: f64 },
    /// Frame values from an earlier run on the same frame grid.
    Warm(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct TrappedProblem {
    pub gamma: f64,
    pub a: f64,
    pub potential: PotentialSpec,
    /// Radial ground state `Q_γ`; solved on the default grid when absent.
    pub ground: Option<Arc<GroundStateSolution>>,
    pub seed: Seed,
}

impl TrappedProblem {
    pub fn new(gamma: f64, a: f64, potential: PotentialSpec) -> Self {
        Self { gamma, a, potential, ground: None, seed: Seed::Profile }
    }

    pub fn with_ground(mut self, ground: Arc<GroundStateSolution>) -> Self {
        self.ground = Some(ground);
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }
}

/// `x = center + scale·y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub center: [f64; 3],
    pub scale: f64,
}

impl Frame {
    pub fn physical() -> Self {
        Self { center: [0.0; 3], scale: 1.0 }
    }

    pub fn to_physical(&self, y: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.center[a] + self.scale * y[a])
    }

    pub fn to_frame(&self, x: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| (x[a] - self.center[a]) / self.scale)
    }
}

#[derive(Clone, Debug)]
pub struct TrappedMinimizer {
    pub gamma: f64,
    pub a: f64,
    pub frame: Frame,
    pub space: Arc<FrameSpace>,
    /// Frame values `w`.
    pub w: Vec<f64>,
    /// `e_a(γ) = E_γ(u)`.
    pub energy: f64,
    /// `μ_γ = e - (a/2) D`.
    pub mu: f64,
    pub potential_energy: f64,
    pub kinetic: f64,
    pub hartree: f64,
    /// Grid maximum of `u` in physical coordinates.
    pub zbar: [f64; 3],
    pub peak: f64,
    pub tie: bool,
    /// Relative Euler–Lagrange residual `‖Hu - μu‖ / |μ|` (frame units).
    pub residual: f64,
    pub iterations: usize,
    pub center_updates: usize,
    pub mass_defect: f64,
    pub clipped_mass: f64,
    /// Frame energies `E_w` after every accepted step of the last pass.
    pub history: Vec<f64>,
    /// Index of the seeding well.
    pub well: Option<usize>,
    vpot: Vec<f64>,
    parts: [f64; 3],
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl TrappedMinimizer {
    fn coupling(&self) -> f64 {
        self.a * self.frame.scale.powf(2.0 - self.gamma)
    }

    /// `μ_γ = e_a(γ) - (a/2) D_γ(u,u)`.
    pub fn lagrange_multiplier(&self) -> f64 {
        self.energy - 0.5 * self.a * self.hartree
    }

    /// `⟨(-Δ + V - a φ_u) u, u⟩` from a fresh application of the operator.
    pub fn multiplier_cross_check(&self) -> f64 {
        let sp = &self.space;
        let lap = sp.neg_laplacian(&self.w);
        let phi = sp.riesz().apply(&self.w);
        let g = self.coupling();
        let hw: Vec<f64> = (0..self.w.len())
            .map(|i| lap[i] + self.vpot[i] * self.w[i] - g * phi[i] * self.w[i])
            .collect();
        sp.inner(&hw, &self.w) / sp.inner(&self.w, &self.w) / self.frame.scale.powi(2)
    }

    /// `T_w`, `P_w`, `D_w` in frame units.
    pub fn frame_parts(&self) -> [f64; 3] {
        self.parts
    }

    /// `E_w = T_w + P_w - (g/2) D_w`.
    pub fn frame_energy(&self) -> f64 {
        self.parts[0] + self.parts[1] - 0.5 * self.coupling() * self.parts[2]
    }

    /// `e(self) - e(reference)` for a reference on the same frame grid and
    /// scale, evaluated from `w - w₀` so that no large energies cancel:
    ///
    /// ```text
    /// s² Δe = ⟨w-w₀, -Δ(w+w₀)⟩ + P_w - P_0 - (g/2) ⟨φ[(w-w₀)(w+w₀)], w²+w₀²⟩
    /// ```
    pub fn gap_to(&self, reference: &TrappedMinimizer) -> Result<f64> {
        if !Arc::ptr_eq(&self.space, &reference.space)
            || self.frame.scale != reference.frame.scale
            || self.a != reference.a
        {
            return Err(Error::InconsistentSweep("gap needs a reference on the same frame".into()));
        }
        let sp = &self.space;
        let (w, w0) = (&self.w, &reference.w);
        let diff: Vec<f64> = w.iter().zip(w0).map(|(a, b)| a - b).collect();
        let sum: Vec<f64> = w.iter().zip(w0).map(|(a, b)| a + b).collect();
        let dt = sp.inner(&diff, &sp.neg_laplacian(&sum));
        let drho: Vec<f64> = diff.iter().zip(&sum).map(|(a, b)| a * b).collect();
        let srho: Vec<f64> = w.iter().zip(w0).map(|(a, b)| a * a + b * b).collect();
        let dd = sp.riesz().pairing(&drho, &srho);
        let dp = self.parts[1] - reference.parts[1];
        Ok((dt + dp - 0.5 * self.coupling() * dd) / self.frame.scale.powi(2))
    }

    /// `‖u - u(-·)‖₂`.
    pub fn reflection_asymmetry(&self) -> Result<f64> {
        let s = self.frame.scale;
        let shift = self.frame.center.map(|c| -2.0 * c / s);
        let ext = self.space.spec().extent();
        let overlap = if shift.iter().any(|x| x.abs() > 2.0 * ext) {
            0.0
        } else {
            let f = self.space.interpolant(&self.w)?;
            let refl = self.space.sample(|y| f([shift[0] - y[0], shift[1] - y[1], shift[2] - y[2]]));
            self.space.inner(&self.w, &refl)
        };
        let m = self.space.inner(&self.w, &self.w);
        Ok((2.0 * m - 2.0 * overlap).max(0.0).sqrt())
    }

    pub fn radial_field(&self) -> Option<RadialField> {
        let g = self.space.radial_grid()?;
        RadialField::new(g.clone(), self.w.clone()).ok()
    }

    pub fn cartesian_field(&self) -> Option<CartesianField> {
        let g = self.space.cartesian_grid()?;
        CartesianField::new(g.clone(), self.w.clone()).ok()
    }

    /// Physical `u` at a physical point.
    pub fn eval(&self, x: [f64; 3]) -> Result<f64> {
        let f = self.space.interpolant(&self.w)?;
        Ok(f(self.frame.to_frame(x)) * self.frame.scale.powf(-1.5))
    }

    /// Nearest declared well and its distance to `z̄`.
    pub fn nearest_well(&self, potential: &PotentialSpec) -> Option<(usize, f64)> {
        potential
            .wells()
            .iter()
            .enumerate()
            .map(|(i, c)| (i, dist(*c, self.zbar)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// All runs of one trapped solve.
#[derive(Clone, Debug)]
pub struct TrappedOutcome {
    /// One run per seeding well (a single run without wells).
    pub runs: Vec<TrappedMinimizer>,
    /// Index of the selected (lowest-energy) run.
    pub best: usize,
    /// `V = 0` minimizer on the same frame grid, present when `a > M_γ`.
    pub reference: Option<TrappedMinimizer>,
    pub ground_mass: f64,
    /// `ε_γ`, infinite for `a = 0`.
    pub epsilon: f64,
    pub frame_scale: f64,
}

impl TrappedOutcome {
    pub fn minimizer(&self) -> &TrappedMinimizer {
        &self.runs[self.best]
    }

    /// Gap of run `i` against the reference, if one was computed.
    pub fn gap(&self, i: usize) -> Option<f64> {
        self.reference.as_ref().and_then(|r| self.runs[i].gap_to(r).ok())
    }
}

/// Ground state on the default radial grid.
pub fn default_ground_state(gamma: f64) -> Result<GroundStateSolution> {
    let grid = Arc::new(RadialGrid::new(3, 4096, 20.0)?);
    solve_ground_state(gamma, grid, None, &SolverConfig::default())
}

/// `ε_γ = (a/M)^{-1/(2-γ)}`.
fn epsilon_of(gamma: f64, a: f64, mass: f64) -> f64 {
    if a > 0.0 {
        (a / mass).powf(-1.0 / (2.0 - gamma))
    } else {
        f64::INFINITY
    }
}

/// Solve the constrained problem, one run per well.
pub fn solve_trapped(problem: &TrappedProblem, config: &TrappedConfig) -> Result<TrappedOutcome> {
    let space = Arc::new(FrameSpace::new(&config.grid, problem.gamma)?);
    solve_trapped_in(problem, config, space)
}

/// As [`solve_trapped`] on a prebuilt frame space (its γ must match).
pub fn solve_trapped_in(
    problem: &TrappedProblem,
    config: &TrappedConfig,
    space: Arc<FrameSpace>,
) -> Result<TrappedOutcome> {
    let gamma = problem.gamma;
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::InvalidParameter(format!("trapped solve needs γ ∈ (0, 2), got {gamma}")));
    }
    if !(problem.a >= 0.0) {
        return Err(Error::InvalidParameter(format!("coupling a = {} must be ≥ 0", problem.a)));
    }
    if space.gamma() != gamma || space.spec() != &config.grid {
        return Err(Error::InvalidParameter("frame space does not match the problem".into()));
    }
    let v = &problem.potential;
    v.validate()?;
    let radial = space.is_radial();
    if radial && !v.is_radial() {
        return Err(Error::InvalidParameter("radial frame grid needs a radial potential".into()));
    }

    let ground = match (&problem.ground, problem.a > 0.0) {
        (Some(g), _) => Some(g.clone()),
        (None, true) => Some(Arc::new(default_ground_state(gamma)?)),
        (None, false) => None,
    };
    if ground.as_ref().is_some_and(|g| (g.gamma - gamma).abs() > 1e-12) {
        return Err(Error::InvalidParameter("ground state exponent does not match".into()));
    }
    let mass = ground.as_ref().map_or(f64::NAN, |g| g.mass);
    let eps = epsilon_of(gamma, problem.a, mass);
    let supercritical = problem.a > mass;
    let s = if supercritical && gamma >= config.rescale_from { eps } else { 1.0 };
    if supercritical {
        let h = s * config.grid.spacing();
        if h > eps / 4.0 {
            return Err(Error::Unresolved { spacing: h, limit: eps / 4.0 });
        }
    }
    let rescaled = s != 1.0;
    let settings = flow::Settings {
        max_iterations: config.max_iterations,
        tolerance: config.residual_tolerance,
    };
    let loose = flow::Settings {
        max_iterations: config.max_iterations,
        tolerance: config.residual_tolerance.max(LOOSE_TOLERANCE),
    };

    let seed_at = |frame: &Frame, x: [f64; 3]| -> Vec<f64> {
        let y0 = frame.to_frame(x);
        let width = eps.min(1.0);
        let profile = |y: [f64; 3], width: f64, q: bool| {
            let r = dist(y, y0) * frame.scale / width;
            match (&ground, q) {
                (Some(g), true) => g.q.eval(r),
                _ => (-0.5 * r * r).exp(),
            }
        };
        match &problem.seed {
            Seed::Profile => space.sample(|y| profile(y, width, eps <= 1.0)),
            Seed::Gaussian { width } => space.sample(|y| profile(y, *width, false)),
            Seed::Warm(w) => w.clone(),
        }
    };

    let reference = if supercritical {
        let frame = Frame { center: [0.0; 3], scale: s };
        let zero = vec![0.0; space.len()];
        let init = match &problem.seed {
            Seed::Warm(w) => w.clone(),
            _ => seed_at(&frame, [0.0; 3]),
        };
        let st = flow::run(&space, &zero, problem.a * s.powf(2.0 - gamma), init, &settings)?;
        Some(assemble(problem, &space, frame, zero, st, None, 0))
    } else {
        None
    };

    let wells = v.wells();
    let starts: Vec<(Option<usize>, [f64; 3])> = if radial || wells.is_empty() {
        vec![(if wells.is_empty() { None } else { Some(0) }, [0.0; 3])]
    } else {
        wells.iter().enumerate().map(|(i, c)| (Some(i), *c)).collect()
    };

    let runs: Vec<Result<TrappedMinimizer>> = par::map(&starts, |&(well, x)| {
        let mut frame = if rescaled { Frame { center: x, scale: s } } else { Frame::physical() };
        let mut init = match (&reference, &problem.seed) {
            (Some(r), Seed::Profile) if rescaled => r.w.clone(),
            _ => seed_at(&frame, x),
        };
        let coupling = problem.a * s.powf(2.0 - gamma);
        let mut updates = 0;
        let movable = rescaled && !radial;
        if movable {
            // translation is the slowest mode of the flow in a shallow frame
            // potential, so place the seed before the first pass
            frame.center = recenter(&space, &init, frame, v);
        }
        // center updates alternate with loose passes; the last pass is tight
        let mut tight = !movable;
        let mut last = f64::INFINITY;
        loop {
            let vpot = space.sample(|y| s * s * v.eval(frame.to_physical(y)));
            let st = flow::run(&space, &vpot, coupling, init, if tight { &settings } else { &loose })?;
            let energy = st.t + st.p - 0.5 * coupling * st.d;
            // in a nearly flat well the center slides in ever smaller steps;
            // stop once a full tight cycle no longer pays
            let stalled = tight && last - energy <= CENTER_ENERGY_TOLERANCE * energy.abs();
            if tight {
                last = energy;
            }
            let settled = !movable || stalled || updates >= config.max_center_updates || {
                let c = recenter(&space, &st.w, frame, v);
                let done = dist(c, frame.center) <= CENTER_TOLERANCE * space.spec().spacing() * s;
                if !done {
                    frame.center = c;
                    updates += 1;
                }
                done
            };
            if settled && tight {
                return Ok(assemble(problem, &space, frame, vpot, st, well, updates));
            }
            tight |= settled;
            init = st.w;
        }
    });
    let runs: Vec<TrappedMinimizer> = runs.into_iter().collect::<Result<_>>()?;

    let score = |m: &TrappedMinimizer| match &reference {
        Some(r) => m.gap_to(r).unwrap_or(f64::INFINITY),
        None => m.energy,
    };
    let mut best = 0;
    for i in 1..runs.len() {
        if score(&runs[i]) < score(&runs[best]) {
            best = i;
        }
    }
    Ok(TrappedOutcome { runs, best, reference, ground_mass: mass, epsilon: eps, frame_scale: s })
}

// Minimize c ↦ ∫V(c + s y) w(y)² dy by Newton steps with the analytic
// gradient and Hessian of V.
fn recenter(space: &FrameSpace, w: &[f64], frame: Frame, v: &PotentialSpec) -> [f64; 3] {
    let s = frame.scale;
    let wt = space.weights();
    let mut c = frame.center;
    let chunks: Vec<std::ops::Range<usize>> =
        (0..w.len()).step_by(4096).map(|lo| lo..(lo + 4096).min(w.len())).collect();
    for _ in 0..30 {
        // gradient and Hessian moments in one sweep, summed in chunk order
        let parts = par::map(&chunks, |range| {
            let mut acc = [0.0; 12];
            for i in range.clone() {
                let y = space.position(i);
                let (g, h) = v.derivatives([0, 1, 2].map(|a| c[a] + s * y[a]));
                let q = wt[i] * w[i] * w[i];
                for a in 0..3 {
                    acc[a] += q * g[a];
                    for b in 0..3 {
                        acc[3 + 3 * a + b] += q * h[a][b];
                    }
                }
            }
            acc
        });
        let mut m = [0.0; 12];
        for p in &parts {
            for k in 0..12 {
                m[k] += p[k];
            }
        }
        let g = [m[0], m[1], m[2]];
        let h = [[m[3], m[4], m[5]], [m[6], m[7], m[8]], [m[9], m[10], m[11]]];
        let Some(step) = solve_spd3(h, g) else { break };
        c = [0, 1, 2].map(|a| c[a] - step[a]);
        if step.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-12 * s {
            break;
        }
    }
    c
}

// Cholesky solve of a 3×3 symmetric system; None unless positive definite.
fn solve_spd3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let mut sum = 0.5 * (a[i][j] + a[j][i]);
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = [0.0; 3];
    for i in 0..3 {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        x[i] = (y[i] - (i + 1..3).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

fn assemble(
    problem: &TrappedProblem,
    space: &Arc<FrameSpace>,
    frame: Frame,
    vpot: Vec<f64>,
    st: flow::FlowState,
    well: Option<usize>,
    center_updates: usize,
) -> TrappedMinimizer {
    let gamma = problem.gamma;
    let s = frame.scale;
    let kinetic = st.t / (s * s);
    let potential_energy = st.p / (s * s);
    let hartree = st.d * s.powf(-gamma);
    let energy = kinetic + potential_energy - 0.5 * problem.a * hartree;
    let mass_defect = (space.inner(&st.w, &st.w) - 1.0).abs();
    let (y, wmax, tie) = match space.cartesian_grid() {
        Some(g) => {
            let f = CartesianField::new(g.clone(), st.w.clone()).expect("finite flow state");
            let (idx, val, tie) = f.argmax();
            (g.point(idx), val, tie)
        }
        // radial fields peak at the origin; report the innermost sample
        None => ([0.0; 3], st.w.iter().cloned().fold(0.0, f64::max), false),
    };
    TrappedMinimizer {
        gamma,
        a: problem.a,
        frame,
        space: space.clone(),
        energy,
        mu: energy - 0.5 * problem.a * hartree,
        potential_energy,
        kinetic,
        hartree,
        zbar: frame.to_physical(y),
        peak: wmax * s.powf(-1.5),
        tie,
        residual: st.residual,
        iterations: st.iterations,
        center_updates,
        mass_defect,
        clipped_mass: st.clipped_mass,
        history: st.history,
        well,
        parts: [st.t, st.p, st.d],
        w: st.w,
        vpot,
    }
}

#[cfg(test)]
mod tests;
