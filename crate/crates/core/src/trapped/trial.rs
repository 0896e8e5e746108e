//! Cut-off trial functions built from the ground state.

use std::sync::Arc;

use super::{Frame, FrameSpace};
use crate::groundstate::GroundStateSolution;
use crate::potential::PotentialSpec;
use crate::{Error, Result};

/// Smooth cut-off: 1 on `[0, R]`, 0 beyond `2R`, quintic smoothstep in
/// between (`|φ'| ≤ 15/(8R)`).
pub fn cutoff(t: f64, radius: f64) -> f64 {
    let x = (t / radius - 1.0).clamp(0.0, 1.0);
    1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

#[derive(Clone, Debug)]
pub struct TrialBound {
    /// `E_γ(ω)`.
    pub value: f64,
    /// `A = ‖Q̃‖ / ‖φ_R Q̃‖ ≥ 1`.
    pub amplitude: f64,
    pub frame: Frame,
    pub radius: f64,
    /// `E_w(ω)` in frame units.
    pub frame_energy: f64,
}

/// `E_γ(ω)` for `ω = A φ_R(x - x₀) Q̃(x - x₀)`, where
/// `Q̃(x) = ε^{-3/2} Q(|x|/ε) / ‖Q‖₂` minimizes the potential-free energy.
///
/// The energy is evaluated on `space` in the frame centered at `x₀` with
/// the given scale.
pub fn trial_upper_bound(
    ground: &GroundStateSolution,
    a: f64,
    potential: &PotentialSpec,
    x0: [f64; 3],
    radius: f64,
    space: &Arc<FrameSpace>,
    scale: f64,
) -> Result<TrialBound> {
    let gamma = ground.gamma;
    if !(gamma > 0.0 && gamma < 2.0) || space.gamma() != gamma {
        return Err(Error::InvalidParameter("trial bound needs matching γ ∈ (0, 2)".into()));
    }
    if !(a > 0.0) || !(radius > 0.0) {
        return Err(Error::InvalidParameter("trial bound needs a > 0 and R > 0".into()));
    }
    if space.is_radial() && x0 != [0.0; 3] {
        return Err(Error::InvalidParameter("radial frames are centered at the origin".into()));
    }
    let ext = space.spec().extent();
    if 2.0 * radius / scale > ext {
        return Err(Error::DomainExceeded(format!(
            "cut-off radius 2R = {} exceeds the frame (extent {} at scale {scale})",
            2.0 * radius,
            ext * scale
        )));
    }
    let m = ground.mass;
    let eps = (a / m).powf(-1.0 / (2.0 - gamma));
    let frame = Frame { center: x0, scale };
    let norm = |y: [f64; 3]| (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    // frame values of Q̃ and of the cut-off trial function, before A
    let q = space.sample(|y| ground.q.eval(norm(y) * scale / eps));
    let cut = space.sample(|y| cutoff(norm(y) * scale, radius));
    let w: Vec<f64> = q.iter().zip(&cut).map(|(q, c)| q * c).collect();
    let amplitude = (space.inner(&q, &q) / space.inner(&w, &w)).sqrt();
    let n = space.inner(&w, &w).sqrt();
    let w: Vec<f64> = w.iter().map(|x| x / n).collect();

    let lap = space.neg_laplacian(&w);
    let t = space.inner(&w, &lap);
    let vpot = space.sample(|y| scale * scale * potential.eval(frame.to_physical(y)));
    let vw: Vec<f64> = w.iter().zip(&vpot).map(|(a, b)| a * b).collect();
    let p = space.inner(&vw, &w);
    let d = space.riesz().energy(&w);
    let g = a * scale.powf(2.0 - gamma);
    let frame_energy = t + p - 0.5 * g * d;
    Ok(TrialBound {
        value: frame_energy / (scale * scale),
        amplitude,
        frame,
        radius,
        frame_energy,
    })
}
