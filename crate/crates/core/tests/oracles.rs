//! Solutions checked against independent computations.

use std::f64::consts::PI;
use std::sync::Arc;

use hartree::asymptotics::{tilde_e, tilde_energy_of_profile};
use hartree::groundstate::{gn_constant, gn_ratio, pohozaev_check, solve_ground_state};
use hartree::riesz::{RadialRiesz, RieszOperator};
use hartree::shooting::{self, ShootingConfig};
use hartree::special::{erf, gamma};
use hartree::{RadialGrid, SolverConfig};

fn grid(n: usize, r: f64) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::new(3, n, r).unwrap())
}

#[test]
fn critical_mass_agrees_with_shooting_and_grid_doubling() {
    let cfg = SolverConfig::default();
    let coarse = solve_ground_state(2.0, grid(2048, 20.0), None, &cfg).unwrap();
    let fine = solve_ground_state(2.0, grid(4096, 20.0), None, &cfg).unwrap();
    assert!((coarse.mass - fine.mass).abs() / fine.mass < 1e-3, "{} vs {}", coarse.mass, fine.mass);

    let shot = shooting::solve(2.0, &ShootingConfig::default()).unwrap();
    assert!((shot.mass - fine.mass).abs() / fine.mass < 5e-3, "shooting {} vs flow {}", shot.mass, fine.mass);
}

#[test]
fn shooting_tracks_the_flow_below_the_critical_exponent() {
    let flow = solve_ground_state(1.0, grid(2048, 20.0), None, &SolverConfig::default()).unwrap();
    let shot = shooting::solve(1.0, &ShootingConfig::default()).unwrap();
    assert!((shot.mass - flow.mass).abs() / flow.mass < 5e-3, "shooting {} vs flow {}", shot.mass, flow.mass);
}

#[test]
fn gaussian_coulomb_closed_forms() {
    let g = grid(4096, 20.0);
    let op = RadialRiesz::new(g.clone(), 1.0).unwrap();
    for alpha in [0.7, 2.5] {
        let rho = g.sample(|r| (alpha / PI).powf(1.5) * (-alpha * r * r).exp());
        let phi = op.potential(&rho);
        for (&r, &p) in g.nodes().iter().zip(&phi).step_by(37) {
            let exact = erf(alpha.sqrt() * r) / r;
            assert!(((p - exact) / exact).abs() < 1e-4, "α={alpha} r={r}: {p} vs {exact}");
        }
    }
    // D_γ(e^{-r²/2}) = π³ 2^{-γ/2} Γ((3-γ)/2) / Γ(3/2)
    for gm in [0.5, 1.0, 1.5, 1.9, 2.0] {
        let op = RadialRiesz::new(g.clone(), gm).unwrap();
        let u = g.sample(|r| (-r * r / 2.0).exp());
        let exact = PI.powi(3) * 2f64.powf(-gm / 2.0) * gamma((3.0 - gm) / 2.0) / gamma(1.5);
        let d = op.energy(&u);
        assert!(((d - exact) / exact).abs() < 1e-6, "γ={gm}: {d} vs {exact}");
    }
}

#[test]
fn identities_at_converged_ground_states() {
    let g = grid(4096, 20.0);
    for gm in [0.5, 1.5] {
        let q = solve_ground_state(gm, g.clone(), None, &SolverConfig::default()).unwrap();
        let (p1, p2) = pohozaev_check(&q);
        assert!(p1 < 1e-5 && p2 < 1e-5, "γ={gm}: {p1:.2e} {p2:.2e}");
        let eq = gn_ratio(gm, gn_constant(&q), q.kinetic, q.mass, q.hartree);
        assert!((eq - 1.0).abs() < 1e-5, "γ={gm}: GN ratio {eq}");
        // the ground energy identity I = J(Q) = M/(4-γ)
        assert!((q.action - q.ground_energy()).abs() / q.action < 1e-5);
        let a = 1.5 * q.mass;
        let closed = tilde_e(gm, a, q.mass).unwrap();
        let numeric = tilde_energy_of_profile(&q, a).unwrap();
        assert!(((numeric - closed) / closed).abs() < 1e-3, "γ={gm}: {numeric} vs {closed}");
    }
}
