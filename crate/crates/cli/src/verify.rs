//! Invariant battery on small grids, run by `hartree verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use hartree::asymptotics::{epsilon, tilde_e, tilde_energy_of_profile};
use hartree::groundstate::{gn_constant, gn_ratio, pohozaev_check, solve_ground_state, GroundStateSolution};
use hartree::io::Checkpoint;
use hartree::potential::PotentialSpec;
use hartree::riesz::{FourierRiesz, RadialRiesz, RieszOperator};
use hartree::special::{erf, gamma as gamma_fn};
use hartree::trapped::{solve_trapped, FrameGrid, TrappedConfig, TrappedProblem};
use hartree::{CartesianGrid, DerivativeScheme, RadialField, RadialGrid, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::manifest::Manifest;
use crate::table::{num, Table};
use crate::CliError;

pub const VERIFY_NODES: usize = 2048;
pub const VERIFY_R_MAX: f64 = 16.0;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Pass when `value` lies in `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), value, lo, hi }
    }

    fn below(name: impl Into<String>, value: f64, hi: f64) -> Self {
        Self::new(name, value, f64::NEG_INFINITY, hi)
    }

    pub fn pass(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

fn solver_err(what: &str) -> impl FnOnce(hartree::Error) -> CliError + '_ {
    move |e| CliError::Solver { run: format!("verify {what}"), source: e }
}

fn grid() -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(3, VERIFY_NODES, VERIFY_R_MAX).expect("static grid"))
}

/// `D_γ` of `e^{-α r²/2}` in ℝ³.
pub fn gaussian_self_energy(alpha: f64, g: f64) -> f64 {
    (PI / alpha).powi(3) * alpha.powf(g / 2.0) * 2f64.powf(-g / 2.0) * gamma_fn((3.0 - g) / 2.0) / gamma_fn(1.5)
}

/// Positive radial field made of three random Gaussian shells.
pub fn random_field(grid: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> RadialField {
    let bumps: Vec<(f64, f64, f64)> =
        (0..3).map(|_| (rng.gen_range(0.2..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.3..3.0))).collect();
    RadialField::from_fn(grid.clone(), |r| bumps.iter().map(|&(c, r0, a)| c * (-a * (r - r0) * (r - r0)).exp()).sum())
}

fn ground_checks(sols: &[GroundStateSolution], rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    for s in sols {
        let (p1, p2) = pohozaev_check(s);
        out.push(Check::below(format!("pohozaev γ={}", s.gamma), p1.max(p2), 1e-5));
        let c = gn_constant(s);
        out.push(Check::below(
            format!("gn equality γ={}", s.gamma),
            (gn_ratio(s.gamma, c, s.kinetic, s.mass, s.hartree) - 1.0).abs(),
            1e-5,
        ));
        let op = RadialRiesz::new(s.grid().clone(), s.gamma).expect("grid is valid");
        let worst = (0..20)
            .map(|_| {
                let u = random_field(s.grid(), rng);
                gn_ratio(s.gamma, c, u.kinetic(), u.mass(), op.energy(u.values()))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(Check::below(format!("gn inequality γ={} (max ratio)", s.gamma), worst, 1.0));
    }
    out
}

fn riesz_checks() -> Result<Vec<Check>, CliError> {
    let g = grid();
    let mut out = Vec::new();
    let op = RadialRiesz::new(g.clone(), 1.0).map_err(solver_err("riesz"))?;
    let rho = g.sample(|r| (-r * r).exp() / PI.powf(1.5));
    let phi = op.potential(&rho);
    let worst = g
        .nodes()
        .iter()
        .zip(&phi)
        .filter(|(r, _)| **r < 10.0)
        .map(|(&r, &p)| ((p - erf(r) / r) * r / erf(r)).abs())
        .fold(0.0, f64::max);
    out.push(Check::below("coulomb potential of a gaussian", worst, 1e-4));
    for gm in [1.0, 1.5, 1.9] {
        let op = RadialRiesz::new(g.clone(), gm).map_err(solver_err("riesz"))?;
        let u = g.sample(|r| (-r * r / 2.0).exp());
        let exact = gaussian_self_energy(1.0, gm);
        out.push(Check::below(format!("gaussian self-energy γ={gm}"), ((op.energy(&u) - exact) / exact).abs(), 1e-4));
    }
    let cube = Arc::new(CartesianGrid::cube(32, 6.0, DerivativeScheme::Spectral).map_err(solver_err("riesz"))?);
    for gm in [1.0, 1.5, 1.9] {
        let f = FourierRiesz::new(cube.clone(), gm).map_err(solver_err("riesz"))?;
        let r = RadialRiesz::new(g.clone(), gm).map_err(solver_err("riesz"))?;
        let u = cube.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp());
        let ur = g.sample(|r| (-r * r / 2.0).exp());
        let (d, dr) = (f.energy(&u), r.energy(&ur));
        out.push(Check::below(format!("fourier vs radial D γ={gm}"), ((d - dr) / dr).abs(), 1e-3));
    }
    Ok(out)
}

/// Run the battery. Ground states are solved on a 2048-node grid.
pub fn battery(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid();
    let cfg = SolverConfig::default();
    let sols = [1.0, 1.5, 2.0]
        .iter()
        .map(|&gm| solve_ground_state(gm, g.clone(), None, &cfg))
        .collect::<hartree::Result<Vec<_>>>()
        .map_err(solver_err("ground"))?;
    let mut out = ground_checks(&sols, &mut rng);
    out.extend(riesz_checks()?);

    let q15 = &sols[1];
    let m2 = sols[2].mass;
    for k in [1.2, 2.0] {
        let a = k * q15.mass;
        let te = tilde_e(1.5, a, q15.mass).map_err(solver_err("closed form"))?;
        let num_e = tilde_energy_of_profile(q15, a).map_err(solver_err("closed form"))?;
        out.push(Check::below(format!("closed-form ẽ γ=1.5 a={k}M"), ((num_e - te) / te).abs(), 1e-3));
    }

    let a = 1.5 * m2;
    let config = TrappedConfig {
        grid: FrameGrid::Radial { nodes: VERIFY_NODES, r_max: VERIFY_R_MAX },
        ..TrappedConfig::default()
    };
    let problem = TrappedProblem::new(1.5, a, PotentialSpec::harmonic()).with_ground(Arc::new(q15.clone()));
    let outcome = solve_trapped(&problem, &config).map_err(solver_err("trapped"))?;
    let m = outcome.minimizer();
    let eps = epsilon(1.5, a, q15.mass).map_err(solver_err("trapped"))?;
    let gap = outcome.gap(outcome.best).unwrap_or(f64::NAN);
    out.push(Check::new("trapped gap γ=1.5 (≥ 0)", gap, -1e-8, f64::INFINITY));
    out.push(Check::below("trapped μ γ=1.5 (< 0)", m.mu, -f64::MIN_POSITIVE));
    out.push(Check::new("trapped μ ε² γ=1.5", m.mu * eps * eps, -10.0, -0.01));
    out.push(Check::below("trapped Euler–Lagrange residual γ=1.5", m.residual, 1e-5));

    let again = solve_ground_state(1.0, g, None, &cfg).map_err(solver_err("determinism"))?;
    let same = again.q.values() == sols[0].q.values() && again.mass.to_bits() == sols[0].mass.to_bits();
    out.push(Check::new("deterministic rerun (1 = identical)", f64::from(u8::from(same)), 1.0, 1.0));
    let ck = Checkpoint::radial(&sols[0].q).with_meta("gamma", 1.0);
    let round = Checkpoint::from_bytes(&ck.to_bytes()).map(|c| c == ck).unwrap_or(false);
    out.push(Check::new("checkpoint round trip (1 = identical)", f64::from(u8::from(round)), 1.0, 1.0));
    Ok(out)
}

pub fn verify_cmd(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let checks = m.stage("verify battery", || battery(cfg.seed))?;
    let mut t = Table::new(&["check", "value", "lo", "hi", "pass"], 1);
    for c in &checks {
        println!("{} {:<48} {:.3e}", if c.pass() { "PASS" } else { "FAIL" }, c.name, c.value);
        t.rows.push(vec![c.name.clone(), num(c.value), num(c.lo), num(c.hi), c.pass().to_string()]);
    }
    // keep battery order rather than sorting by name
    let path = cfg.output_dir().join("verify.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
    w.write_record(&t.header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in &t.rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_closed_form_matches_coulomb_limit() {
        // γ = 1: D = π^{5/2} √2 / α^{5/2} for e^{-α r²/2}
        for alpha in [0.5f64, 1.0, 3.0] {
            let exact = PI.powf(2.5) * 2f64.sqrt() / alpha.powf(2.5);
            assert!((gaussian_self_energy(alpha, 1.0) - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn random_fields_are_seeded() {
        let g = Arc::new(RadialGrid::new(3, 64, 8.0).unwrap());
        let a = random_field(&g, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_field(&g, &mut ChaCha8Rng::seed_from_u64(3));
        let c = random_field(&g, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(a.values().iter().all(|&x| x > 0.0));
    }
}
