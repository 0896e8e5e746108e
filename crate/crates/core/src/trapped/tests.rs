use super::*;
use crate::asymptotics::tilde_e;

fn radial_ground(gamma: f64) -> Arc<GroundStateSolution> {
    Arc::new(default_ground_state(gamma).unwrap())
}

fn assert_monotone(history: &[f64]) {
    for w in history.windows(2) {
        assert!(w[1] <= w[0] + 1e-13 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn radial_oscillator() {
    let p = TrappedProblem::new(1.0, 0.0, PotentialSpec::harmonic());
    let out = solve_trapped(&p, &TrappedConfig::default()).unwrap();
    let m = out.minimizer();
    assert!((m.energy - 3.0).abs() < 1e-4, "e = {}", m.energy);
    assert!((m.lagrange_multiplier() - 3.0).abs() < 1e-4);
    assert!(m.mass_defect < 1e-12);
    assert!(m.residual < 1e-5);
    assert!(m.w.iter().all(|&x| x >= 0.0));
    assert_monotone(&m.history);
    assert!(out.reference.is_none());
}

#[test]
fn cartesian_oscillator_is_centered() {
    let cfg = TrappedConfig::cartesian(32, 6.0);
    let p = TrappedProblem::new(1.0, 0.0, PotentialSpec::harmonic());
    let out = solve_trapped(&p, &cfg).unwrap();
    let m = out.minimizer();
    assert!((m.energy - 3.0).abs() < 1e-4, "e = {}", m.energy);
    let h = cfg.grid.spacing();
    assert!(m.zbar.iter().all(|c| c.abs() <= h));
    assert_monotone(&m.history);
}

#[test]
fn symmetric_problem_keeps_the_maximum_at_the_center() {
    let gamma = 1.0;
    let ground = radial_ground(gamma);
    let a = 0.8 * ground.mass;
    let cfg = TrappedConfig::cartesian(32, 6.0);
    let p = TrappedProblem::new(gamma, a, PotentialSpec::harmonic()).with_ground(ground.clone());
    let out = solve_trapped(&p, &cfg).unwrap();
    let m = out.minimizer();
    let h = cfg.grid.spacing();
    assert!(m.zbar.iter().all(|c| c.abs() <= h), "z̄ = {:?}", m.zbar);
    assert!(m.residual < 1e-5);
    let mu = m.lagrange_multiplier();
    assert!((m.multiplier_cross_check() - mu).abs() < 1e-5 * mu.abs());
    assert!(m.energy - tilde_e(gamma, a, ground.mass).unwrap() >= -1e-8);
    assert!(m.reflection_asymmetry().unwrap() < 1e-6);
}

#[test]
fn supercritical_radial_gap_and_trial_bound() {
    let gamma = 1.5;
    let ground = radial_ground(gamma);
    let a = 1.5 * ground.mass;
    let p = TrappedProblem::new(gamma, a, PotentialSpec::harmonic()).with_ground(ground.clone());
    let out = solve_trapped(&p, &TrappedConfig::default()).unwrap();
    let m = out.minimizer();
    assert_eq!(out.frame_scale, 1.0);
    let te = tilde_e(gamma, a, ground.mass).unwrap();
    let gap = out.gap(out.best).unwrap();
    assert!(gap >= 0.0);
    // discrete and closed-form references agree at this scale
    assert!((gap - (m.energy - te)).abs() < 1e-6, "{gap} vs {}", m.energy - te);
    assert!(gap >= m.potential_energy - 1e-9);
    let mu = m.lagrange_multiplier();
    assert!((m.multiplier_cross_check() - mu).abs() < 1e-5 * mu.abs());

    let eps = out.epsilon;
    let tau = (gamma / (4.0 - gamma)).sqrt() / eps;
    let radius = 10.0 / tau;
    let tb = trial_upper_bound(&ground, a, &PotentialSpec::harmonic(), [0.0; 3], radius, &m.space, 1.0).unwrap();
    assert!(tb.value >= m.energy - 1e-12 * m.energy.abs());
    assert!(tb.amplitude >= 1.0 && tb.amplitude <= 1.0 + 1e-3, "A = {}", tb.amplitude);
    let too_big = trial_upper_bound(&ground, a, &PotentialSpec::harmonic(), [0.0; 3], 15.0, &m.space, 1.0);
    assert!(matches!(too_big, Err(Error::DomainExceeded(_))));
}

#[test]
fn concentrated_multiplier_is_negative() {
    let gamma = 1.9;
    let ground = radial_ground(gamma);
    let q2 = radial_ground(2.0);
    let a = 1.5 * q2.mass;
    let p = TrappedProblem::new(gamma, a, PotentialSpec::harmonic()).with_ground(ground);
    let out = solve_trapped(&p, &TrappedConfig::default()).unwrap();
    let m = out.minimizer();
    assert!(out.frame_scale < 1.0);
    assert!(m.mu < 0.0);
    let scaled = m.mu * out.epsilon.powi(2);
    assert!(scaled > -10.0 && scaled < -0.01);
    assert!(out.gap(out.best).unwrap() >= -1e-8);
}

#[test]
fn coarse_frames_are_rejected() {
    let gamma = 1.9;
    let ground = radial_ground(gamma);
    let a = 1.5 * ground.mass;
    let cfg = TrappedConfig { grid: FrameGrid::Radial { nodes: 64, r_max: 20.0 }, ..Default::default() };
    let p = TrappedProblem::new(gamma, a, PotentialSpec::harmonic()).with_ground(ground);
    assert!(matches!(solve_trapped(&p, &cfg), Err(Error::Unresolved { .. })));
}

#[test]
fn radial_frames_need_radial_potentials() {
    let v = PotentialSpec::product_wells(vec![crate::potential::Well { center: [1.0, 0.0, 0.0], exponent: 2.0 }]);
    let p = TrappedProblem::new(1.0, 0.0, v);
    assert!(solve_trapped(&p, &TrappedConfig::default()).is_err());
}

#[test]
fn gap_requires_a_matching_reference() {
    let p = TrappedProblem::new(1.0, 0.0, PotentialSpec::harmonic());
    let a = solve_trapped(&p, &TrappedConfig::default()).unwrap();
    let b = solve_trapped(&p, &TrappedConfig::default()).unwrap();
    assert!(a.minimizer().gap_to(b.minimizer()).is_err());
    assert_eq!(a.minimizer().gap_to(a.minimizer()).unwrap(), 0.0);
}

#[test]
fn spd_solve() {
    let a = [[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]];
    let x = solve_spd3(a, [1.0, 2.0, 3.0]).unwrap();
    for i in 0..3 {
        let r: f64 = (0..3).map(|j| a[i][j] * x[j]).sum();
        assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-14);
    }
    assert!(solve_spd3([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]], [1.0; 3]).is_none());
}

#[test]
fn cutoff_profile() {
    assert_eq!(cutoff(0.5, 1.0), 1.0);
    assert_eq!(cutoff(1.0, 1.0), 1.0);
    assert_eq!(cutoff(2.0, 1.0), 0.0);
    assert!((cutoff(1.5, 1.0) - 0.5).abs() < 1e-15);
    let slope = (0..1000)
        .map(|k| {
            let t = 1.0 + k as f64 / 1000.0;
            (cutoff(t + 1e-6, 1.0) - cutoff(t, 1.0)).abs() / 1e-6
        })
        .fold(0.0, f64::max);
    assert!(slope <= 15.0 / 8.0 + 1e-4);
}
