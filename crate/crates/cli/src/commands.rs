use std::path::{Path, PathBuf};
use std::sync::Arc;

use hartree::asymptotics::{
    concentration_report_with_bound, epsilon, radial_moment, tau, tilde_e, ConcentrationReport, ScalingReport,
};
use hartree::groundstate::{gn_constant, gn_ratio, solve_with_operator, GroundStateSolution};
use hartree::io::{read_radial_csv, save_radial_csv, Checkpoint};
use hartree::potential::PotentialSpec;
use hartree::riesz::cache::KernelCache;
use hartree::riesz::RadialRiesz;
use hartree::trapped::{solve_trapped_in, FrameGrid, FrameSpace, TrappedOutcome, TrappedProblem};
use hartree::{RadialField, RadialGrid};
use sha2::{Digest, Sha256};

use crate::config::{parse_potential, Coupling, RunConfig};
use crate::manifest::Manifest;
use crate::plot::Chart;
use crate::table::{num, parse_num, Table};
use crate::{Cli, CliError, Command, Common, GroundArgs, TrappedArgs};

pub const GROUND_HEADER: &[&str] = &[
    "dim",
    "gamma",
    "nodes",
    "r_max",
    "mass",
    "kinetic",
    "hartree",
    "action",
    "ground_energy",
    "pohozaev_1",
    "pohozaev_2",
    "gn_defect",
    "decay_rate",
    "residual",
    "iterations",
    "checkpoint",
];

pub const TRAPPED_HEADER: &[&str] = &[
    "potential",
    "grid",
    "a",
    "gamma",
    "mass",
    "epsilon",
    "tau",
    "tilde_e",
    "energy",
    "mu",
    "potential_energy",
    "kinetic",
    "hartree",
    "zbar_x",
    "zbar_y",
    "zbar_z",
    "well",
    "well_distance",
    "gap",
    "gap_closed_form",
    "beta2",
    "d2",
    "dh1",
    "rho",
    "gap_rate",
    "residual",
    "iterations",
    "checkpoint",
];

pub const REPORT_HEADER: &[&str] = &[
    "potential",
    "grid",
    "a",
    "gamma",
    "epsilon",
    "tau",
    "tilde_e",
    "energy",
    "gap",
    "gap_closed_form",
    "potential_energy",
    "mu",
    "mu_eps2",
    "beta2",
    "d2",
    "dh1",
    "zbar_x",
    "zbar_y",
    "zbar_z",
    "well",
    "rho",
    "gap_rate",
    "gap_rate_bound",
];

pub const VERDICT_HEADER: &[&str] = &["potential", "grid", "a", "check", "value"];

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hartree: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ground { common, ground } => {
            let cfg = effective(&common, Some(&ground), None)?;
            with_manifest("ground", &cfg, |m| ground_cmd(&cfg, m))
        }
        Command::Trapped { common, trapped } => {
            let cfg = effective(&common, None, Some(&trapped))?;
            with_manifest("trapped", &cfg, |m| trapped_cmd(&cfg, m).map(|_| ()))
        }
        Command::Sweep { common, trapped } => {
            let cfg = effective(&common, None, Some(&trapped))?;
            with_manifest("sweep", &cfg, |m| {
                let keys = trapped_cmd(&cfg, m)?;
                m.stage("report", || report_cmd(&cfg, Some(&keys)))
            })
        }
        Command::Report { common } => {
            let cfg = effective(&common, None, None)?;
            with_manifest("report", &cfg, |m| m.stage("report", || report_cmd(&cfg, None)))
        }
        Command::Verify { common, seed } => {
            let mut cfg = effective(&common, None, None)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            with_manifest("verify", &cfg, |m| crate::verify::verify_cmd(&cfg, m))
        }
    }
}

/// Config file (or defaults) with command-line overrides, validated.
pub fn effective(common: &Common, g: Option<&GroundArgs>, t: Option<&TrappedArgs>) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &common.output {
        cfg.output = Some(o.clone());
    }
    cfg.cache_override = common.cache_dir.clone();
    cfg.plots |= common.plots;
    if let Some(g) = g {
        if !g.gammas.is_empty() {
            cfg.ground.gammas = g.gammas.clone();
        }
        set(&mut cfg.ground.dim, g.dim);
        set(&mut cfg.ground.nodes, g.nodes);
        set(&mut cfg.ground.r_max, g.r_max);
        set(&mut cfg.ground.residual_tolerance, g.tolerance);
        if let Some(w) = &g.warm_start {
            cfg.ground.warm_start = Some(w.clone());
        }
    }
    if let Some(t) = t {
        if !t.gammas.is_empty() {
            cfg.trapped.gammas = t.gammas.clone();
        }
        set(&mut cfg.trapped.a, t.a.clone());
        set(&mut cfg.trapped.potential, t.potential.clone());
        set(&mut cfg.trapped.grid, t.grid.clone());
        set(&mut cfg.trapped.nodes, t.nodes);
        set(&mut cfg.trapped.r_max, t.r_max);
        set(&mut cfg.trapped.n, t.n);
        set(&mut cfg.trapped.half_width, t.half_width);
        if t.tolerance.is_some() {
            cfg.trapped.residual_tolerance = t.tolerance;
        }
        if cfg.trapped.gammas.is_empty() {
            return Err(CliError::Usage("no γ given (use --gamma or trapped.gammas)".into()));
        }
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn with_manifest(
    command: &str,
    cfg: &RunConfig,
    f: impl FnOnce(&mut Manifest) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let out = cfg.output_dir();
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Usage(format!("output directory {} is not writable: {e}", out.display())))?;
    let mut m = Manifest::new(command, cfg.hash());
    let result = f(&mut m);
    m.save(&out)?;
    result
}

/// Short file-name tag for a γ value.
pub fn gamma_tag(g: f64) -> String {
    format!("{g}").replace('.', "p")
}

fn short_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn ground_cmd(cfg: &RunConfig, m: &mut Manifest) -> Result<(), CliError> {
    let mut gammas = cfg.ground.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    for g in gammas {
        let sol = m.stage(format!("ground γ={g}"), || ground_state(cfg, g))?;
        record_ground(cfg, &sol)?;
    }
    Ok(())
}

/// Ground state from the cache, or solved from the default Gaussian (or the
/// configured warm start) and cached. Cached loads reproduce every stored
/// float, so reruns are byte-identical.
pub fn ground_state(cfg: &RunConfig, gamma: f64) -> Result<GroundStateSolution, CliError> {
    let g = &cfg.ground;
    let warm = match &g.warm_start {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| CliError::Usage(format!("warm start {}: {e}", p.display())))?;
            Some((Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect::<String>(), p.clone()))
        }
        None => None,
    };
    let key = format!(
        "ground:N{}:g{:016x}:M{}:R{:016x}:tol{:016x},{:016x},{}:warm{}",
        g.dim,
        gamma.to_bits(),
        g.nodes,
        g.r_max.to_bits(),
        g.residual_tolerance.to_bits(),
        g.update_tolerance.to_bits(),
        g.max_iterations,
        warm.as_ref().map_or("none", |w| w.0.as_str())
    );
    let cache_dir = cfg.cache_dir();
    std::fs::create_dir_all(&cache_dir)?;
    let path = cache_dir.join(format!("ground-{}.ckpt", &hex(&Sha256::digest(key.as_bytes()))[..32]));
    if let Ok(c) = Checkpoint::load(&path) {
        if c.meta.get("key") == Some(&key) {
            if let Ok(sol) = solution_from_checkpoint(&c) {
                return Ok(sol);
            }
        }
    }
    let run = format!("ground γ={gamma}");
    let grid = Arc::new(RadialGrid::new(g.dim, g.nodes, g.r_max).map_err(CliError::solver(&run))?);
    let op = RadialRiesz::with_cache(grid, gamma, &KernelCache::new(&cache_dir)).map_err(CliError::solver(&run))?;
    let init = match &warm {
        Some((_, p)) => Some(load_profile(p, g.dim)?),
        None => None,
    };
    let sol = solve_with_operator(&op, init.as_ref(), &cfg.solver_config()).map_err(CliError::solver(&run))?;
    solution_checkpoint(&sol).with_meta("key", &key).save(&path).map_err(CliError::solver(&run))?;
    Ok(sol)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Radial profile from a checkpoint or an `r,u` CSV.
pub fn load_profile(path: &Path, dim: usize) -> Result<RadialField, CliError> {
    let bad = |e: hartree::Error| CliError::Usage(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "csv") {
        read_radial_csv(std::fs::File::open(path)?, dim).map_err(bad)
    } else {
        Checkpoint::load(path).and_then(|c| c.to_radial()).map_err(bad)
    }
}

pub fn solution_checkpoint(sol: &GroundStateSolution) -> Checkpoint {
    Checkpoint::radial(&sol.q)
        .with_meta("gamma", num(sol.gamma))
        .with_meta("mass", num(sol.mass))
        .with_meta("kinetic", num(sol.kinetic))
        .with_meta("hartree", num(sol.hartree))
        .with_meta("action", num(sol.action))
        .with_meta("pohozaev_1", num(sol.pohozaev.0))
        .with_meta("pohozaev_2", num(sol.pohozaev.1))
        .with_meta("decay_rate", num(sol.decay_rate))
        .with_meta("iterations", sol.iterations)
        .with_meta("update_norm", num(sol.update_norm))
        .with_meta("residual", num(sol.residual))
        .with_meta("clips", sol.clips)
}

pub fn solution_from_checkpoint(c: &Checkpoint) -> hartree::Result<GroundStateSolution> {
    let q = c.to_radial()?;
    let f = |k: &str| c.meta_f64(k);
    Ok(GroundStateSolution {
        gamma: f("gamma")?,
        dim: q.grid().dim(),
        mass: f("mass")?,
        kinetic: f("kinetic")?,
        hartree: f("hartree")?,
        action: f("action")?,
        pohozaev: (f("pohozaev_1")?, f("pohozaev_2")?),
        decay_rate: f("decay_rate")?,
        iterations: f("iterations")? as usize,
        update_norm: f("update_norm")?,
        residual: f("residual")?,
        clips: f("clips")? as usize,
        history: vec![],
        q,
    })
}

fn record_ground(cfg: &RunConfig, sol: &GroundStateSolution) -> Result<(), CliError> {
    let out = cfg.output_dir();
    let dir = out.join("ground");
    std::fs::create_dir_all(&dir)?;
    let grid = sol.grid();
    let stem = format!("q_N{}_g{}_M{}_R{}", sol.dim, gamma_tag(sol.gamma), grid.len(), gamma_tag(grid.r_max()));
    save_radial_csv(&sol.q, &dir.join(format!("{stem}.csv"))).map_err(|e| CliError::Io(e.to_string()))?;
    let ckpt = PathBuf::from("ground").join(format!("{stem}.ckpt"));
    solution_checkpoint(sol).save(&out.join(&ckpt)).map_err(|e| CliError::Io(e.to_string()))?;

    let path = out.join("groundstates.csv");
    let mut t = Table::load_or_new(&path, GROUND_HEADER, 4)?;
    let gn = gn_ratio(sol.gamma, gn_constant(sol), sol.kinetic, sol.mass, sol.hartree) - 1.0;
    t.upsert(vec![
        sol.dim.to_string(),
        num(sol.gamma),
        grid.len().to_string(),
        num(grid.r_max()),
        num(sol.mass),
        num(sol.kinetic),
        num(sol.hartree),
        num(sol.action),
        num(sol.ground_energy()),
        num(sol.pohozaev.0),
        num(sol.pohozaev.1),
        num(gn),
        num(sol.decay_rate),
        num(sol.residual),
        sol.iterations.to_string(),
        ckpt.to_string_lossy().replace('\\', "/"),
    ]);
    t.save(&path)
}

/// Key of a trapped run in `trapped.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrappedKey {
    pub potential: String,
    pub grid: String,
    pub a: String,
}

pub fn grid_label(grid: &FrameGrid) -> String {
    match grid {
        FrameGrid::Radial { nodes, r_max } => format!("radial:{nodes}:{r_max}"),
        FrameGrid::Cartesian { n, half_width, scheme } => format!("cartesian:{n}:{half_width}:{scheme:?}"),
    }
}

fn trapped_cmd(cfg: &RunConfig, m: &mut Manifest) -> Result<TrappedKey, CliError> {
    let t = &cfg.trapped;
    let potential = parse_potential(&t.potential).map_err(CliError::Usage)?;
    let tcfg = cfg.trapped_config().map_err(CliError::Usage)?;
    let coupling = Coupling::parse(&t.a).map_err(CliError::Usage)?;
    if t.grid == "cartesian" {
        potential
            .check_confining(t.half_width)
            .map_err(|e| CliError::Usage(format!("trapped.potential: {e}")))?;
    }
    let q2 = m.stage("ground γ=2", || ground_state(cfg, 2.0))?;
    record_ground(cfg, &q2)?;
    let a = coupling.resolve(q2.mass);
    let key = TrappedKey { potential: t.potential.trim().to_string(), grid: grid_label(&tcfg.grid), a: num(a) };

    let mut gammas = t.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let cache = KernelCache::new(cfg.cache_dir());
    for g in gammas {
        let ground = m.stage(format!("ground γ={g}"), || ground_state(cfg, g))?;
        record_ground(cfg, &ground)?;
        let run = format!("trapped γ={g} a={a}");
        let outcome = m.stage(&run, || {
            let space = Arc::new(FrameSpace::with_cache(&tcfg.grid, g, &cache).map_err(CliError::solver(&run))?);
            let problem = TrappedProblem::new(g, a, potential.clone()).with_ground(Arc::new(ground));
            solve_trapped_in(&problem, &tcfg, space).map_err(CliError::solver(&run))
        })?;
        record_trapped(cfg, &key, &outcome, &potential, &q2)?;
    }
    Ok(key)
}

fn record_trapped(
    cfg: &RunConfig,
    key: &TrappedKey,
    outcome: &TrappedOutcome,
    potential: &PotentialSpec,
    q2: &GroundStateSolution,
) -> Result<(), CliError> {
    let out = cfg.output_dir();
    let dir = out.join("trapped");
    std::fs::create_dir_all(&dir)?;
    let mz = outcome.minimizer();
    let stem = format!("u_{}_g{}", short_hash(&format!("{}|{}|{}", key.potential, key.grid, key.a)), gamma_tag(mz.gamma));
    let ckpt = PathBuf::from("trapped").join(format!("{stem}.ckpt"));
    let base = match (mz.radial_field(), mz.cartesian_field()) {
        (Some(f), _) => Checkpoint::radial(&f),
        (_, Some(f)) => Checkpoint::cartesian(&f),
        _ => unreachable!("a minimizer lives on a radial or Cartesian frame"),
    };
    let [cx, cy, cz] = mz.frame.center;
    base.with_meta("gamma", num(mz.gamma))
        .with_meta("a", num(mz.a))
        .with_meta("potential", &key.potential)
        .with_meta("frame_center", format!("{},{},{}", num(cx), num(cy), num(cz)))
        .with_meta("frame_scale", num(mz.frame.scale))
        .with_meta("energy", num(mz.energy))
        .with_meta("mu", num(mz.mu))
        .save(&out.join(&ckpt))
        .map_err(|e| CliError::Io(e.to_string()))?;

    let mass = outcome.ground_mass;
    let (g, a) = (mz.gamma, mz.a);
    let closed = |f: fn(f64, f64, f64) -> hartree::Result<f64>| f(g, a, mass).unwrap_or(f64::NAN);
    let report = ScalingReport::from_outcome(outcome, potential, q2).ok();
    let r = |f: fn(&ScalingReport) -> f64| report.as_ref().map_or(f64::NAN, f);
    let well = mz.nearest_well(potential);
    let path = out.join("trapped.csv");
    let mut t = Table::load_or_new(&path, TRAPPED_HEADER, 4)?;
    t.upsert(vec![
        key.potential.clone(),
        key.grid.clone(),
        key.a.clone(),
        num(g),
        num(mass),
        num(closed(epsilon)),
        num(closed(tau)),
        num(closed(tilde_e)),
        num(mz.energy),
        num(mz.mu),
        num(mz.potential_energy),
        num(mz.kinetic),
        num(mz.hartree),
        num(mz.zbar[0]),
        num(mz.zbar[1]),
        num(mz.zbar[2]),
        well.map_or(String::new(), |w| w.0.to_string()),
        num(well.map_or(f64::NAN, |w| w.1)),
        num(r(|s| s.gap)),
        num(mz.energy - closed(tilde_e)),
        num(r(|s| s.beta2)),
        num(r(|s| s.d2)),
        num(r(|s| s.dh1)),
        num(r(|s| s.rho)),
        num(r(|s| s.gap_rate)),
        num(mz.residual),
        mz.iterations.to_string(),
        ckpt.to_string_lossy().replace('\\', "/"),
    ]);
    t.save(&path)
}

/// Rows of `trapped.csv` grouped by key, each group sorted by γ.
fn trapped_groups(t: &Table) -> Vec<(TrappedKey, Vec<Vec<String>>)> {
    let mut groups: Vec<(TrappedKey, Vec<Vec<String>>)> = Vec::new();
    for row in &t.rows {
        let key = TrappedKey { potential: row[0].clone(), grid: row[1].clone(), a: row[2].clone() };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(row.clone()),
            None => groups.push((key, vec![row.clone()])),
        }
    }
    groups
}

fn scaling_row(t: &Table, row: &[String]) -> ScalingReport {
    let f = |name: &str| parse_num(&row[t.column(name).expect("trapped.csv column")]);
    let well = &row[t.column("well").unwrap()];
    ScalingReport {
        gamma: f("gamma"),
        a: f("a"),
        mass: f("mass"),
        epsilon: f("epsilon"),
        tau: f("tau"),
        tilde_e: f("tilde_e"),
        energy: f("energy"),
        gap: f("gap"),
        gap_closed_form: f("gap_closed_form"),
        potential_energy: f("potential_energy"),
        mu: f("mu"),
        beta2: f("beta2"),
        d2: f("d2"),
        dh1: f("dh1"),
        zbar: [f("zbar_x"), f("zbar_y"), f("zbar_z")],
        well: well.parse().ok(),
        well_distance: f("well_distance"),
        rho: f("rho"),
        gap_rate: f("gap_rate"),
    }
}

/// `Q₂` from the finest `γ = 2`, `N = 3` checkpoint listed in groundstates.csv.
fn load_q2(out: &Path) -> Result<Option<GroundStateSolution>, CliError> {
    let t = Table::load_or_new(&out.join("groundstates.csv"), GROUND_HEADER, 4)?;
    let best = t
        .rows
        .iter()
        .filter(|r| r[0] == "3" && parse_num(&r[1]) == 2.0)
        .max_by_key(|r| r[2].parse::<usize>().unwrap_or(0));
    let Some(row) = best else { return Ok(None) };
    let c = Checkpoint::load(&out.join(&row[15])).map_err(|e| CliError::Io(format!("{}: {e}", row[15])))?;
    solution_from_checkpoint(&c).map(Some).map_err(|e| CliError::Io(format!("{}: {e}", row[15])))
}

/// Build the scaling report of every complete sweep in trapped.csv (or
/// only the group `only`).
pub fn report_cmd(cfg: &RunConfig, only: Option<&TrappedKey>) -> Result<(), CliError> {
    let out = cfg.output_dir();
    let tpath = out.join("trapped.csv");
    if !tpath.exists() {
        return Err(CliError::Usage(format!("{} not found; run `trapped` or `sweep` first", tpath.display())));
    }
    let trapped = Table::load_or_new(&tpath, TRAPPED_HEADER, 4)?;
    let q2 = load_q2(&out)?;
    let rpath = out.join("scaling_report.csv");
    let vpath = out.join("scaling_verdicts.csv");
    let mut rows = Table::load_or_new(&rpath, REPORT_HEADER, 4)?;
    let mut verdicts = Table::load_or_new(&vpath, VERDICT_HEADER, 4)?;
    let mut produced = 0;
    for (key, group) in trapped_groups(&trapped) {
        if only.is_some_and(|k| *k != key) {
            continue;
        }
        let potential = parse_potential(&key.potential).map_err(CliError::Usage)?;
        let srows: Vec<ScalingReport> = group.iter().map(|r| scaling_row(&trapped, r)).collect();
        if srows.len() < 3 || srows.iter().any(|r| r.gap.is_nan()) {
            continue;
        }
        let bound = match (&q2, potential.flatness()) {
            (Some(q), Ok(f)) => potential.flattest_coefficient().ok().map(|l| l * radial_moment(&q.q, f.order) / q.mass),
            _ => None,
        };
        let rep = concentration_report_with_bound(srows, &potential, bound)
            .map_err(|e| CliError::Usage(format!("report for {}: {e}", key.potential)))?;
        write_report(&key, &rep, &mut rows, &mut verdicts);
        if cfg.plots {
            write_plots(&out, &key, &rep)?;
        }
        produced += 1;
    }
    if produced == 0 {
        return Err(CliError::Usage("no complete sweep (≥ 3 exponents with gaps) in trapped.csv".into()));
    }
    rows.save(&rpath)?;
    verdicts.save(&vpath)
}

fn write_report(key: &TrappedKey, rep: &ConcentrationReport, rows: &mut Table, verdicts: &mut Table) {
    let bound = rep.verdicts.gap_rate_bound.unwrap_or(f64::NAN);
    for r in &rep.rows {
        rows.upsert(vec![
            key.potential.clone(),
            key.grid.clone(),
            key.a.clone(),
            num(r.gamma),
            num(r.epsilon),
            num(r.tau),
            num(r.tilde_e),
            num(r.energy),
            num(r.gap),
            num(r.gap_closed_form),
            num(r.potential_energy),
            num(r.mu),
            num(r.mu * r.epsilon * r.epsilon),
            num(r.beta2),
            num(r.d2),
            num(r.dh1),
            num(r.zbar[0]),
            num(r.zbar[1]),
            num(r.zbar[2]),
            r.well.map_or(String::new(), |w| w.to_string()),
            num(r.rho),
            num(r.gap_rate),
            num(bound),
        ]);
    }
    let v = &rep.verdicts;
    let opt = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
    for (check, value) in [
        ("gap_nonnegative", v.gap_nonnegative.to_string()),
        ("gap_decreasing", v.gap_decreasing.to_string()),
        ("potential_decreasing", v.potential_decreasing.to_string()),
        ("beta_close", v.beta_close.to_string()),
        ("beta_improving", v.beta_improving.to_string()),
        ("d2_decreasing", v.d2_decreasing.to_string()),
        ("selects_flattest", opt(v.selects_flattest)),
        ("rho_decreasing", v.rho_decreasing.to_string()),
        ("gap_rate_bounded", opt(v.gap_rate_bounded)),
    ] {
        verdicts.upsert(vec![key.potential.clone(), key.grid.clone(), key.a.clone(), check.into(), value]);
    }
}

fn write_plots(out: &Path, key: &TrappedKey, rep: &ConcentrationReport) -> Result<(), CliError> {
    let dir = out.join("plots");
    std::fs::create_dir_all(&dir)?;
    let tag = short_hash(&format!("{}|{}|{}", key.potential, key.grid, key.a));
    let pts = |f: fn(&ScalingReport) -> (f64, f64)| rep.rows.iter().map(f).collect::<Vec<_>>();
    let charts = [
        ("gap", Chart { title: "energy gap", x_label: "γ", y_label: "e - ẽ", log_x: false, log_y: true }, pts(|r| (r.gamma, r.gap))),
        ("d2", Chart { title: "profile distance", x_label: "γ", y_label: "d₂", log_x: false, log_y: false }, pts(|r| (r.gamma, r.d2))),
        ("rho", Chart { title: "distance to well", x_label: "γ", y_label: "ρ", log_x: false, log_y: false }, pts(|r| (r.gamma, r.rho))),
        ("rate", Chart { title: "gap rate", x_label: "ε", y_label: "e - ẽ", log_x: true, log_y: true }, pts(|r| (r.epsilon, r.gap))),
    ];
    for (name, chart, points) in charts {
        std::fs::write(dir.join(format!("{tag}_{name}.svg")), chart.render(&points))?;
    }
    Ok(())
}
