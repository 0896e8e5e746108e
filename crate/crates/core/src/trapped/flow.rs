//! Normalized, preconditioned gradient flow on the unit sphere of `L²`.

use super::FrameSpace;
use crate::groundstate::ACTION_SLACK;
use crate::{Error, Result};

/// A flow that can no longer lower the energy is accepted below this
/// residual; the energy is then resolved to rounding.
const STALL_ACCEPT: f64 = 1e-6;

pub(crate) struct Settings {
    pub max_iterations: usize,
    pub tolerance: f64,
}

/// Converged frame state of `E_w = T + P - (g/2) D` at unit mass.
#[derive(Clone, Debug)]
pub(crate) struct FlowState {
    pub w: Vec<f64>,
    pub t: f64,
    pub p: f64,
    pub d: f64,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub clipped_mass: f64,
}

struct Eval {
    w: Vec<f64>,
    t: f64,
    p: f64,
    d: f64,
    grad: Vec<f64>,
}

impl Eval {
    fn energy(&self, g: f64) -> f64 {
        self.t + self.p - 0.5 * g * self.d
    }

    fn mu(&self, g: f64) -> f64 {
        self.t + self.p - g * self.d
    }
}

fn normalize(space: &FrameSpace, w: &mut [f64]) {
    let n = space.inner(w, w).sqrt();
    w.iter_mut().for_each(|x| *x /= n);
}

// Terms of the energy and the projected gradient `Hw - μw`.
fn evaluate(space: &FrameSpace, vpot: &[f64], g: f64, w: Vec<f64>) -> Eval {
    let lap = space.neg_laplacian(&w);
    let phi = space.riesz().apply(&w);
    let t = space.inner(&w, &lap);
    let vw: Vec<f64> = w.iter().zip(vpot).map(|(w, v)| w * v).collect();
    let p = space.inner(&vw, &w);
    let pw: Vec<f64> = w.iter().zip(&phi).map(|(w, f)| w * f).collect();
    let d = space.inner(&pw, &w);
    let mu = t + p - g * d;
    let grad = (0..w.len()).map(|i| lap[i] + vw[i] - g * pw[i] - mu * w[i]).collect();
    Eval { w, t, p, d, grad }
}

pub(crate) fn run(
    space: &FrameSpace,
    vpot: &[f64],
    coupling: f64,
    init: Vec<f64>,
    settings: &Settings,
) -> Result<FlowState> {
    space.check_len(&init)?;
    if init.iter().any(|x| !x.is_finite()) || init.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidParameter("initial field must be finite and nonzero".into()));
    }
    let mut w = init;
    normalize(space, &mut w);
    let mut cur = evaluate(space, vpot, coupling, w);
    let mut history = vec![cur.energy(coupling)];
    let mut step = 1.0;
    let mut residual = f64::INFINITY;
    let precond_v = Some(vpot);

    for iteration in 0..=settings.max_iterations {
        let mu = cur.mu(coupling);
        residual = space.inner(&cur.grad, &cur.grad).sqrt() / mu.abs().max(1.0);
        if residual < settings.tolerance {
            return Ok(finish(space, vpot, coupling, cur, residual, iteration, history));
        }
        if iteration == settings.max_iterations {
            break;
        }
        let shift = (-mu).max(0.0) + 1.0;
        let mut dir = space.precondition(&cur.grad, shift, precond_v);
        let along = space.inner(&dir, &cur.w);
        dir.iter_mut().zip(&cur.w).for_each(|(d, w)| *d -= along * w);

        let e0 = cur.energy(coupling);
        let mut tau = step;
        let mut accepted = None;
        for _ in 0..60 {
            let mut cand: Vec<f64> = cur.w.iter().zip(&dir).map(|(w, d)| w - tau * d).collect();
            normalize(space, &mut cand);
            let next = evaluate(space, vpot, coupling, cand);
            if next.energy(coupling) <= e0 + ACTION_SLACK * e0.abs() {
                accepted = Some(next);
                break;
            }
            tau *= 0.5;
        }
        let Some(next) = accepted else {
            // stationary to rounding; accept if the residual is already small
            if residual < STALL_ACCEPT.max(settings.tolerance) {
                return Ok(finish(space, vpot, coupling, cur, residual, iteration, history));
            }
            return Err(Error::NotConverged { iterations: iteration, update: 0.0, residual });
        };

        let s: Vec<f64> = next.w.iter().zip(&cur.w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next.grad.iter().zip(&cur.grad).map(|(a, b)| a - b).collect();
        let lap_s = space.neg_laplacian(&s);
        let shifted: Vec<f64> = match precond_v {
            Some(v) => s.iter().zip(v).map(|(s, v)| s * (v + shift)).collect(),
            None => s.iter().map(|s| s * shift).collect(),
        };
        let sps = space.inner(&s, &lap_s) + space.inner(&s, &shifted);
        let sy = space.inner(&s, &y);
        step = if sy > 0.0 { (sps / sy).clamp(1e-3, 20.0) } else { 1.0 };

        cur = next;
        history.push(cur.energy(coupling));
    }
    Err(Error::NotConverged { iterations: settings.max_iterations, update: f64::NAN, residual })
}

fn finish(
    space: &FrameSpace,
    vpot: &[f64],
    coupling: f64,
    cur: Eval,
    residual: f64,
    iterations: usize,
    history: Vec<f64>,
) -> FlowState {
    let negative: f64 = {
        let neg: Vec<f64> = cur.w.iter().map(|&x| x.min(0.0)).collect();
        space.inner(&neg, &neg)
    };
    let (cur, residual) = if negative > 0.0 {
        let mut w: Vec<f64> = cur.w.iter().map(|&x| x.max(0.0)).collect();
        normalize(space, &mut w);
        let e = evaluate(space, vpot, coupling, w);
        let r = space.inner(&e.grad, &e.grad).sqrt() / e.mu(coupling).abs().max(1.0);
        (e, r)
    } else {
        (cur, residual)
    };
    FlowState {
        t: cur.t,
        p: cur.p,
        d: cur.d,
        w: cur.w,
        residual,
        iterations,
        history,
        clipped_mass: negative,
    }
}
