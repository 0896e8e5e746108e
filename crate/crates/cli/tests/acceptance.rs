//! Acceptance battery: one pass/fail line per criterion.
//!
//! Runs without the test harness so each line is printed as soon as the
//! criterion finishes. A failed criterion is reported, not hidden; the
//! process still exits 0 so the remaining targets of `cargo test` run.
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use hartree::asymptotics::{concentration_report, tilde_energy_of_profile, tilde_e, ConcentrationReport, ScalingReport};
use hartree::groundstate::{gn_constant, gn_ratio, pohozaev_check, solve_ground_state, GroundStateSolution};
use hartree::potential::{PotentialSpec, Well};
use hartree::riesz::{FourierRiesz, RadialRiesz, RieszOperator};
use hartree::shooting::{self, ShootingConfig};
use hartree::special::erf;
use hartree::trapped::{solve_trapped_in, FrameSpace, TrappedConfig, TrappedProblem};
use hartree::{CartesianGrid, DerivativeScheme, RadialGrid, SolverConfig};
use hartree_cli::verify::{gaussian_self_energy, random_field};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NODES: usize = 4096;
const R_MAX: f64 = 20.0;

type Outcome = Result<(bool, String), String>;

struct Shared {
    grid: Arc<RadialGrid>,
    ground: Vec<(GroundStateSolution, f64)>,
}

impl Shared {
    fn q(&self, gamma: f64) -> &GroundStateSolution {
        &self.ground.iter().find(|(s, _)| s.gamma == gamma).expect("solved exponent").0
    }

    fn a_star(&self) -> f64 {
        self.q(2.0).mass
    }
}

fn shared() -> Shared {
    let grid = Arc::new(RadialGrid::new(3, NODES, R_MAX).unwrap());
    let ground = [0.5, 1.0, 1.5, 1.7, 1.8, 1.9, 1.95, 2.0]
        .iter()
        .map(|&g| {
            let t = Instant::now();
            let s = solve_ground_state(g, grid.clone(), None, &SolverConfig::default())
                .unwrap_or_else(|e| panic!("ground state γ={g}: {e}"));
            (s, t.elapsed().as_secs_f64())
        })
        .collect();
    Shared { grid, ground }
}

fn criterion_1(s: &Shared) -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for (q, secs) in &s.ground {
        if q.gamma == 1.7 || q.gamma == 1.9 {
            continue;
        }
        let (p1, p2) = pohozaev_check(q);
        worst = worst.max(p1).max(p2);
        slowest = slowest.max(*secs);
    }
    Ok((worst < 1e-5 && slowest < 10.0, format!("max Pohozaev residual {worst:.2e} (< 1e-5), slowest solve {slowest:.1} s (< 10 s)")))
}

fn criterion_2(s: &Shared) -> Outcome {
    let m2 = s.a_star();
    let gaps: Vec<f64> = [1.5, 1.8, 1.9, 1.95].iter().map(|&g| (s.q(g).mass - m2).abs()).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let final_rel = gaps[3] / m2;

    let fine = Arc::new(RadialGrid::new(3, 2 * NODES, R_MAX).unwrap());
    let m2_fine = solve_ground_state(2.0, fine, None, &SolverConfig::default()).map_err(|e| e.to_string())?.mass;
    let doubling = (m2_fine - m2).abs() / m2;
    let shot = shooting::solve(2.0, &ShootingConfig::default()).map_err(|e| e.to_string())?;
    let oracle = (shot.mass - m2).abs() / m2;
    let pass = decreasing && final_rel < 0.02 && doubling < 1e-3 && oracle < 5e-3;
    Ok((
        pass,
        format!(
            "gaps {:.4e} {:.4e} {:.4e} {:.4e} decreasing={decreasing}, final {:.2}% (< 2%), doubling {doubling:.1e} (< 1e-3), shooting {oracle:.1e} (< 5e-3)",
            gaps[0],
            gaps[1],
            gaps[2],
            gaps[3],
            100.0 * final_rel
        ),
    ))
}

fn criterion_3(s: &Shared) -> Outcome {
    let equality = s
        .ground
        .iter()
        .map(|(q, _)| (gn_ratio(q.gamma, gn_constant(q), q.kinetic, q.mass, q.hartree) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = f64::NEG_INFINITY;
    for g in [1.0, 1.5, 1.9] {
        let q = s.q(g);
        let op = RadialRiesz::new(s.grid.clone(), g).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let u = random_field(&s.grid, &mut rng);
            worst = worst.max(gn_ratio(g, gn_constant(q), u.kinetic(), u.mass(), op.energy(u.values())) - 1.0);
        }
    }
    Ok((equality < 1e-5 && worst <= 0.0, format!("equality defect {equality:.2e} (< 1e-5), largest random defect {worst:.3e} (≤ 0)")))
}

fn criterion_4(s: &Shared) -> Outcome {
    let mut worst = 0.0f64;
    for g in [1.0, 1.5, 1.8] {
        let q = s.q(g);
        for k in [1.2, 1.5, 2.0] {
            let a = k * s.a_star();
            let closed = tilde_e(g, a, q.mass).map_err(|e| e.to_string())?;
            let numeric = tilde_energy_of_profile(q, a).map_err(|e| e.to_string())?;
            worst = worst.max(((numeric - closed) / closed).abs());
        }
    }
    Ok((worst < 1e-3, format!("max relative deviation {worst:.2e} (< 1e-3) over 9 pairs")))
}

fn criterion_5(s: &Shared) -> Outcome {
    let cube = Arc::new(CartesianGrid::cube(64, 8.0, DerivativeScheme::Spectral).map_err(|e| e.to_string())?);
    let mut paths = 0.0f64;
    let mut self_energy = 0.0f64;
    for g in [1.0, 1.5, 1.9] {
        let f = FourierRiesz::new(cube.clone(), g).map_err(|e| e.to_string())?;
        let r = RadialRiesz::new(s.grid.clone(), g).map_err(|e| e.to_string())?;
        for alpha in [0.6, 1.0, 2.0] {
            let u = cube.sample(|x| (-alpha * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp());
            let ur = s.grid.sample(|r| (-alpha * r * r / 2.0).exp());
            let (d, dr) = (f.energy(&u), r.energy(&ur));
            paths = paths.max(((d - dr) / dr).abs());
        }
    }
    let coulomb = RadialRiesz::new(s.grid.clone(), 1.0).map_err(|e| e.to_string())?;
    let mut potential = 0.0f64;
    for alpha in [0.5, 1.0, 4.0] {
        let rho = s.grid.sample(|r| (alpha / PI).powf(1.5) * (-alpha * r * r).exp());
        let phi = coulomb.potential(&rho);
        for (&r, &p) in s.grid.nodes().iter().zip(&phi) {
            if r < 10.0 {
                let exact = erf(alpha.sqrt() * r) / r;
                potential = potential.max(((p - exact) / exact).abs());
            }
        }
        let u = s.grid.sample(|r| (-alpha * r * r / 2.0).exp());
        let exact = gaussian_self_energy(alpha, 1.0);
        self_energy = self_energy.max(((coulomb.energy(&u) - exact) / exact).abs());
    }
    let pass = paths < 1e-3 && potential < 1e-4 && self_energy < 1e-4;
    Ok((
        pass,
        format!("radial vs Fourier {paths:.2e} (< 1e-3), Coulomb potential {potential:.2e}, self-energy {self_energy:.2e} (< 1e-4)"),
    ))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn harmonic_sweep(s: &Shared) -> Result<ConcentrationReport, String> {
    let config = TrappedConfig::default();
    let v = PotentialSpec::harmonic();
    let a = 1.5 * s.a_star();
    let mut rows = Vec::new();
    for g in [1.7, 1.8, 1.9, 1.95] {
        let space = Arc::new(FrameSpace::new(&config.grid, g).map_err(|e| e.to_string())?);
        let p = TrappedProblem::new(g, a, v.clone()).with_ground(Arc::new(s.q(g).clone()));
        let out = solve_trapped_in(&p, &config, space).map_err(|e| format!("γ={g}: {e}"))?;
        rows.push(ScalingReport::from_outcome(&out, &v, s.q(2.0)).map_err(|e| e.to_string())?);
    }
    concentration_report(rows, &v, s.q(2.0)).map_err(|e| e.to_string())
}

fn col(r: &ConcentrationReport, f: fn(&ScalingReport) -> f64) -> Vec<f64> {
    r.rows.iter().map(f).collect()
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(" ")
}

fn criterion_6(r: &ConcentrationReport) -> Outcome {
    let gap = col(r, |x| x.gap);
    let pot = col(r, |x| x.potential_energy);
    let last = r.rows.last().unwrap();
    let rel = last.gap / last.tilde_e.abs();
    let pass = gap.iter().all(|&g| g >= 0.0) && strictly_decreasing(&gap) && rel < 0.1 && strictly_decreasing(&pot);
    Ok((pass, format!("gap [{}], final {rel:.2e}·|ẽ| (< 0.1); ∫Vu² [{}]", fmt(&gap), fmt(&pot))))
}

fn criterion_7(r: &ConcentrationReport) -> Outcome {
    let d2 = col(r, |x| x.d2);
    let beta = col(r, |x| x.beta2);
    let dev: Vec<f64> = beta.iter().map(|b| (b - 1.0).abs()).collect();
    let last_d2 = *d2.last().unwrap();
    let last_dev = *dev.last().unwrap();
    let pass = strictly_decreasing(&d2) && last_d2 < 0.05 && last_dev <= 0.15 && strictly_decreasing(&dev);
    Ok((
        pass,
        format!(
            "d₂ [{}] decreasing={} final<0.05={}; β² [{}] final within 15%={} monotone={}",
            fmt(&d2),
            strictly_decreasing(&d2),
            last_d2 < 0.05,
            fmt(&beta),
            last_dev <= 0.15,
            strictly_decreasing(&dev)
        ),
    ))
}

fn criterion_9(r: &ConcentrationReport) -> Outcome {
    let scaled: Vec<f64> = r.rows.iter().map(|x| x.mu * x.epsilon * x.epsilon).collect();
    let pass = r.rows.iter().all(|x| x.mu < 0.0) && scaled.iter().all(|&m| m > -10.0 && m < -0.01);
    Ok((pass, format!("μ ε² [{}] in (-10, -0.01)", fmt(&scaled))))
}

fn criterion_8(s: &Shared) -> Outcome {
    let v = PotentialSpec::product_wells(vec![
        Well { center: [1.0, 0.0, 0.0], exponent: 2.0 },
        Well { center: [-1.0, 0.0, 0.0], exponent: 4.0 },
    ]);
    let config = TrappedConfig::cartesian(64, 8.0);
    let a = 1.5 * s.a_star();
    let mut rows = Vec::new();
    for g in [1.8, 1.9, 1.95] {
        let space = Arc::new(FrameSpace::new(&config.grid, g).map_err(|e| e.to_string())?);
        let p = TrappedProblem::new(g, a, v.clone()).with_ground(Arc::new(s.q(g).clone()));
        let out = solve_trapped_in(&p, &config, space).map_err(|e| format!("γ={g}: {e}"))?;
        rows.push(ScalingReport::from_outcome(&out, &v, s.q(2.0)).map_err(|e| e.to_string())?);
    }
    let r = concentration_report(rows, &v, s.q(2.0)).map_err(|e| e.to_string())?;
    let rho = col(&r, |x| x.rho);
    let last = r.rows.last().unwrap();
    let bound = r.verdicts.gap_rate_bound.unwrap_or(f64::NAN);
    let at_p4 = last.well == Some(1);
    let rho_ok = rho.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    let rate_ok = last.gap_rate <= 1.2 * bound;
    Ok((
        at_p4 && rho_ok && rate_ok,
        format!(
            "final well {:?} (want 1, at -e₁), ρ [{}] decreasing={rho_ok}, q {:.4e} vs 1.2×{bound:.4e}",
            last.well,
            fmt(&rho),
            last.gap_rate
        ),
    ))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let mut full = vec!["hartree"];
    full.extend_from_slice(args);
    match hartree_cli::commands::main_with_args(full) {
        0 => Ok(()),
        code => Err(format!("`hartree {}` exited with {code}", args.join(" "))),
    }
}

fn same_files(a: &Path, b: &Path, names: &[&str]) -> Result<Vec<String>, String> {
    let mut differing = Vec::new();
    for n in names {
        let x = std::fs::read(a.join(n)).map_err(|e| format!("{n}: {e}"))?;
        let y = std::fs::read(b.join(n)).map_err(|e| format!("{n}: {e}"))?;
        if x != y {
            differing.push(n.to_string());
        }
    }
    Ok(differing)
}

fn criterion_10() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut dirs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let o = out.to_str().unwrap().to_string();
        let cache = tmp.path().join(format!("cache{k}"));
        let c = cache.to_str().unwrap().to_string();
        run_cli(&["ground", "--gamma", "1.5", "--gamma", "2", "-o", &o, "--cache-dir", &c])?;
        run_cli(&[
            "sweep", "--gamma", "1.7", "--gamma", "1.8", "--gamma", "1.9", "--a", "1.5a*", "--potential", "harmonic",
            "--nodes", "2048", "--r-max", "16", "-o", &o, "--cache-dir", &c,
        ])?;
        dirs.push(out);
    }
    let names = ["groundstates.csv", "trapped.csv", "scaling_report.csv", "scaling_verdicts.csv", "ground/q_N3_g2_M4096_R20.csv"];
    let differing = same_files(&dirs[0], &dirs[1], &names)?;
    // a rerun into the same directory hits the caches and must not change anything
    let before: Vec<Vec<u8>> = names[..4].iter().map(|n| std::fs::read(dirs[0].join(n)).unwrap()).collect();
    let o = dirs[0].to_str().unwrap().to_string();
    let c = tmp.path().join("cache0");
    run_cli(&["ground", "--gamma", "2", "-o", &o, "--cache-dir", c.to_str().unwrap()])?;
    let after: Vec<Vec<u8>> = names[..4].iter().map(|n| std::fs::read(dirs[0].join(n)).unwrap()).collect();
    let pass = differing.is_empty() && before == after;
    Ok((pass, format!("{} CSVs compared across fresh runs, differing: {:?}; cached rerun identical: {}", names.len(), differing, before == after)))
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |n: usize| only.as_ref().map_or(true, |o| o.contains(&n));
    let print = |n: usize, t: Instant, r: Outcome| {
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok((true, d)) => println!("criterion {n}: PASS ({secs:.0} s) {d}"),
            Ok((false, d)) => println!("criterion {n}: FAIL ({secs:.0} s) {d}"),
            Err(e) => println!("criterion {n}: FAIL ({secs:.0} s) error: {e}"),
        }
    };
    let t = Instant::now();
    let s = shared();
    println!("acceptance: ground states solved in {:.0} s", t.elapsed().as_secs_f64());
    for (n, f) in [(1, criterion_1 as fn(&Shared) -> Outcome), (2, criterion_2), (3, criterion_3), (4, criterion_4), (5, criterion_5)] {
        if wanted(n) {
            let t = Instant::now();
            print(n, t, f(&s));
        }
    }
    if wanted(6) || wanted(7) || wanted(9) {
        let t = Instant::now();
        match harmonic_sweep(&s) {
            Ok(r) => {
                for (n, f) in [(6, criterion_6 as fn(&ConcentrationReport) -> Outcome), (7, criterion_7), (9, criterion_9)] {
                    if wanted(n) {
                        print(n, t, f(&r));
                    }
                }
            }
            Err(e) => {
                for n in [6, 7, 9] {
                    if wanted(n) {
                        print(n, t, Err(e.clone()));
                    }
                }
            }
        }
    }
    if wanted(8) {
        let t = Instant::now();
        print(8, t, criterion_8(&s));
    }
    if wanted(10) {
        let t = Instant::now();
        print(10, t, criterion_10());
    }
}
