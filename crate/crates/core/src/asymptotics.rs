//! Closed-form scalings near the critical exponent, profile extraction and
//! the concentration report of a γ-sweep.
//!
//! With `M = ‖Q_γ‖₂²`:
//!
//! ```text
//! ε_γ = (a/M)^{-1/(2-γ)},   τ_γ = √(γ/(4-γ)) / ε_γ,
//! ẽ_a(γ) = ((γ-2)/(4-γ)) ε_γ^{-2}
//! ```
//!
//! `ẽ_a(γ)` is the minimum of `∫|∇u|² - (a/2) D_γ(u,u)` at unit mass,
//! attained by `ε^{-3/2} Q_γ(|x|/ε) / √M`.

use std::sync::Arc;

use crate::fields::{CartesianField, CartesianGrid, RadialField, RadialGrid};
use crate::groundstate::GroundStateSolution;
use crate::potential::PotentialSpec;
use crate::riesz::{RadialRiesz, RieszOperator};
use crate::trapped::{TrappedMinimizer, TrappedOutcome};
use crate::{Error, Result};

fn check(gamma: f64, a: f64, mass: f64) -> Result<()> {
    if gamma == 2.0 {
        return Err(Error::CriticalExponent);
    }
    if !(gamma > 0.0 && gamma < 2.0) || !(a > 0.0) || !(mass > 0.0) {
        return Err(Error::InvalidParameter(format!("need γ ∈ (0,2), a > 0, M > 0 (γ={gamma}, a={a}, M={mass})")));
    }
    Ok(())
}

pub fn epsilon(gamma: f64, a: f64, mass: f64) -> Result<f64> {
    check(gamma, a, mass)?;
    Ok((a / mass).powf(-1.0 / (2.0 - gamma)))
}

pub fn tau(gamma: f64, a: f64, mass: f64) -> Result<f64> {
    check(gamma, a, mass)?;
    Ok((gamma / (4.0 - gamma)).sqrt() * (a / mass).powf(1.0 / (2.0 - gamma)))
}

pub fn tilde_e(gamma: f64, a: f64, mass: f64) -> Result<f64> {
    check(gamma, a, mass)?;
    Ok((gamma - 2.0) / (4.0 - gamma) * (a / mass).powf(2.0 / (2.0 - gamma)))
}

/// `Ẽ_γ(Q̃_γ)` evaluated numerically: the ground state is dilated exactly
/// by building it on the grid scaled by `ε` and normalized to unit mass.
pub fn tilde_energy_of_profile(ground: &GroundStateSolution, a: f64) -> Result<f64> {
    let gamma = ground.gamma;
    let eps = epsilon(gamma, a, ground.mass)?;
    let g = ground.grid();
    let scaled = Arc::new(RadialGrid::new(g.dim(), g.len(), g.r_max() * eps)?);
    let factor = eps.powf(-0.5 * g.dim() as f64) / ground.mass.sqrt();
    let q = RadialField::new(scaled.clone(), ground.q.values().iter().map(|v| v * factor).collect())?;
    let op = RadialRiesz::new(scaled, gamma)?;
    Ok(q.kinetic() - 0.5 * a * op.energy(q.values()))
}

/// `ṽ(r) = ε^{3/2} u(ε r)` on `target`.
pub fn rescale_radial(u: &RadialField, eps: f64, target: Arc<RadialGrid>) -> Result<RadialField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    if eps * target.r_max() > u.grid().r_max() * (1.0 + 1e-12) {
        return Err(Error::DomainExceeded(format!(
            "rescaled lattice reaches r = {} beyond R_max = {}",
            eps * target.r_max(),
            u.grid().r_max()
        )));
    }
    let c = eps.powf(0.5 * u.grid().dim() as f64);
    let values = target.nodes().iter().map(|&r| c * u.eval(eps * r)).collect();
    RadialField::new(target, values)
}

/// `ṽ(x) = ε^{3/2} u(ε x + z̄)` on `target`.
pub fn rescale_cartesian(
    u: &CartesianField,
    zbar: [f64; 3],
    eps: f64,
    target: Arc<CartesianGrid>,
) -> Result<CartesianField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    let l = u.grid().half_width();
    let t = target.half_width();
    let h = u.grid().spacing();
    for a in 0..3 {
        // the top lattice point sits one cell inside the upper face
        let lo = -eps * t[a] + zbar[a];
        let hi = eps * (t[a] - target.spacing()[a]) + zbar[a];
        if lo < -l[a] - 1e-12 || hi > l[a] - h[a] + 1e-12 {
            return Err(Error::DomainExceeded(format!("rescaled lattice leaves the box along axis {a}")));
        }
    }
    let c = eps.powf(1.5);
    let values = target.sample(|x| c * u.eval([0, 1, 2].map(|a| eps * x[a] + zbar[a])));
    CartesianField::new(target, values)
}

/// `ṽ` of a trapped minimizer on its own frame grid. When the frame is the
/// concentration frame at the maximum point the values are copied.
/// Points outside the frame grid read as zero.
pub fn rescaled_minimizer(m: &TrappedMinimizer, eps: f64) -> Result<Vec<f64>> {
    let s = m.frame.scale;
    if s == eps && m.zbar == m.frame.center {
        return Ok(m.w.clone());
    }
    let sp = &m.space;
    let f = sp.interpolant(&m.w)?;
    let c = (eps / s).powf(1.5);
    let mut out = Vec::with_capacity(sp.len());
    for i in 0..sp.len() {
        let x = sp.position(i);
        let y = m.frame.to_frame([0, 1, 2].map(|a| eps * x[a] + m.zbar[a]));
        out.push(c * f(y));
    }
    Ok(out)
}

/// `(d₂, d_{H¹})` between `ṽ` (frame values of `m.space`) and
/// `Q₂/‖Q₂‖₂` sampled radially on the same grid.
pub fn profile_distance(m: &TrappedMinimizer, vtilde: &[f64], q2: &GroundStateSolution) -> (f64, f64) {
    let sp = &m.space;
    let n = q2.mass.sqrt();
    let target = sp.sample(|x| q2.q.eval((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()) / n);
    let diff: Vec<f64> = vtilde.iter().zip(&target).map(|(a, b)| a - b).collect();
    let l2 = sp.inner(&diff, &diff);
    let grad = sp.inner(&diff, &sp.neg_laplacian(&diff));
    (l2.sqrt(), (l2 + grad).max(0.0).sqrt())
}

/// `∫|x|^p Q²` over ℝ³ for a radial profile.
pub fn radial_moment(q: &RadialField, p: f64) -> f64 {
    let g = q.grid();
    let f: Vec<f64> = g.nodes().iter().zip(q.values()).map(|(r, v)| r.powf(p) * v * v).collect();
    g.integrate(&f)
}

/// `λ_{i₀} / ‖Q₂‖₂² ∫|x|^p Q₂²`: the limiting bound on `gap / ε^p`.
pub fn gap_rate_bound(potential: &PotentialSpec, q2: &GroundStateSolution) -> Result<f64> {
    let f = potential.flatness()?;
    let lambda = potential.flattest_coefficient()?;
    Ok(lambda * radial_moment(&q2.q, f.order) / q2.mass)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub gamma: f64,
    pub a: f64,
    pub mass: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub tilde_e: f64,
    pub energy: f64,
    /// `e_a(γ) - ẽ_a(γ)` against the discrete potential-free minimum.
    pub gap: f64,
    /// `e_a(γ) - ẽ_a(γ)` against the closed form.
    pub gap_closed_form: f64,
    pub potential_energy: f64,
    pub mu: f64,
    /// `ε² ∫|∇u|²`.
    pub beta2: f64,
    pub d2: f64,
    pub dh1: f64,
    pub zbar: [f64; 3],
    /// Nearest declared well and its distance.
    pub well: Option<usize>,
    pub well_distance: f64,
    /// `|z̄ - y₀| / ε` with `y₀` the nearest flattest well.
    pub rho: f64,
    /// `gap / ε^p`.
    pub gap_rate: f64,
}

impl ScalingReport {
    /// Build the row of one trapped solve. The gap needs the outcome's
    /// potential-free reference.
    pub fn from_outcome(
        outcome: &TrappedOutcome,
        potential: &PotentialSpec,
        q2: &GroundStateSolution,
    ) -> Result<Self> {
        let m = outcome.minimizer();
        let (gamma, a, mass) = (m.gamma, m.a, outcome.ground_mass);
        let eps = epsilon(gamma, a, mass)?;
        let te = tilde_e(gamma, a, mass)?;
        let gap = outcome
            .gap(outcome.best)
            .ok_or_else(|| Error::InconsistentSweep("run has no potential-free reference (needs a > M_γ)".into()))?;
        let vt = rescaled_minimizer(m, eps)?;
        let (d2, dh1) = profile_distance(m, &vt, q2);
        let wells = potential.wells();
        let nearest = m.nearest_well(potential);
        let (order, y0) = match potential.flatness() {
            Ok(f) => {
                let pick = f
                    .flattest
                    .iter()
                    .map(|&i| wells[i])
                    .min_by(|p, q| dist(*p, m.zbar).total_cmp(&dist(*q, m.zbar)));
                (f.order, pick)
            }
            Err(_) => (f64::NAN, wells.first().copied()),
        };
        let rho = y0.map_or(f64::NAN, |y| dist(y, m.zbar) / eps);
        Ok(Self {
            gamma,
            a,
            mass,
            epsilon: eps,
            tau: tau(gamma, a, mass)?,
            tilde_e: te,
            energy: m.energy,
            gap,
            gap_closed_form: m.energy - te,
            potential_energy: m.potential_energy,
            mu: m.mu,
            beta2: eps * eps * m.kinetic,
            d2,
            dh1,
            zbar: m.zbar,
            well: nearest.map(|n| n.0),
            well_distance: nearest.map_or(f64::NAN, |n| n.1),
            rho,
            gap_rate: gap / eps.powf(order),
        })
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Tolerance on `|β² - 1|` at the last exponent.
pub const BETA_TOLERANCE: f64 = 0.15;
/// Allowed excess of `gap / ε^p` over its limiting bound.
pub const GAP_RATE_TOLERANCE: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct Verdicts {
    pub gap_nonnegative: bool,
    pub gap_decreasing: bool,
    pub potential_decreasing: bool,
    pub beta_close: bool,
    pub beta_improving: bool,
    pub d2_decreasing: bool,
    /// `None` when the potential has no flatness data.
    pub selects_flattest: Option<bool>,
    pub rho_decreasing: bool,
    pub gap_rate_bounded: Option<bool>,
    /// The limiting bound on `gap / ε^p`.
    pub gap_rate_bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConcentrationReport {
    pub rows: Vec<ScalingReport>,
    pub verdicts: Verdicts,
}

/// Strictly decreasing over the final three entries.
pub fn tail_decreasing(values: &[f64]) -> bool {
    let tail = &values[values.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] < w[0])
}

pub fn concentration_report(
    rows: Vec<ScalingReport>,
    potential: &PotentialSpec,
    q2: &GroundStateSolution,
) -> Result<ConcentrationReport> {
    concentration_report_with_bound(rows, potential, gap_rate_bound(potential, q2).ok())
}

/// Same as [`concentration_report`] with the gap-rate bound supplied, for
/// rows read back from disk.
pub fn concentration_report_with_bound(
    rows: Vec<ScalingReport>,
    potential: &PotentialSpec,
    bound: Option<f64>,
) -> Result<ConcentrationReport> {
    if rows.len() < 3 {
        return Err(Error::InconsistentSweep(format!("{} rows; need at least 3", rows.len())));
    }
    if rows.windows(2).any(|w| w[1].gamma <= w[0].gamma) {
        return Err(Error::InconsistentSweep("γ must increase along the sweep".into()));
    }
    if rows.windows(2).any(|w| w[1].a != w[0].a) {
        return Err(Error::InconsistentSweep("coupling a differs between rows".into()));
    }
    let col = |f: fn(&ScalingReport) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let last = rows.last().unwrap();
    let beta_dev: Vec<f64> = col(|r| (r.beta2 - 1.0).abs());
    let flat = potential.flatness().ok();
    let selects_flattest = flat.as_ref().map(|f| last.well.is_some_and(|w| f.flattest.contains(&w)));
    // ρ that is exactly zero has reached its limit
    let rho = col(|r| r.rho);
    let rho_tail = &rho[rho.len().saturating_sub(3)..];
    let rho_decreasing = rho_tail.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    let verdicts = Verdicts {
        gap_nonnegative: rows.iter().all(|r| r.gap >= -1e-8),
        gap_decreasing: tail_decreasing(&col(|r| r.gap)),
        potential_decreasing: tail_decreasing(&col(|r| r.potential_energy)),
        beta_close: (last.beta2 - 1.0).abs() <= BETA_TOLERANCE,
        beta_improving: tail_decreasing(&beta_dev),
        d2_decreasing: tail_decreasing(&col(|r| r.d2)),
        selects_flattest,
        rho_decreasing,
        gap_rate_bounded: bound.map(|b| last.gap_rate <= (1.0 + GAP_RATE_TOLERANCE) * b),
        gap_rate_bound: bound,
    };
    Ok(ConcentrationReport { rows, verdicts })
}
