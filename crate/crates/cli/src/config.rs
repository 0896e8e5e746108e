//! Run configuration, read from TOML with one section per stage.
//!
//! ```toml
//! output = "out"
//! seed = 7
//!
//! [ground]
//! gammas = [1.5, 1.8, 2.0]
//! nodes = 4096
//! r_max = 20.0
//!
//! [trapped]
//! gammas = [1.7, 1.8, 1.9, 1.95]
//! a = "1.5a*"
//! potential = "harmonic"
//! grid = "radial"
//! ```

use std::path::{Path, PathBuf};

use hartree::potential::{PotentialSpec, Well};
use hartree::riesz::cache::CACHE_DIR_ENV;
use hartree::trapped::{FrameGrid, TrappedConfig};
use hartree::{DerivativeScheme, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Largest radial node count accepted.
pub const MAX_RADIAL_NODES: usize = 1 << 20;
/// Largest Cartesian side; the padded Riesz transform works on `(2n)³`.
pub const MAX_CARTESIAN_SIDE: usize = 128;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    /// `--cache-dir`; beats the environment. Not part of the hash.
    #[serde(skip)]
    pub cache_override: Option<PathBuf>,
    /// Seed for random test fields in `verify`.
    pub seed: u64,
    pub plots: bool,
    pub ground: GroundSection,
    pub trapped: TrappedSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundSection {
    pub gammas: Vec<f64>,
    pub dim: usize,
    pub nodes: usize,
    pub r_max: f64,
    pub residual_tolerance: f64,
    pub update_tolerance: f64,
    pub max_iterations: usize,
    pub warm_start: Option<PathBuf>,
}

impl Default for GroundSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            gammas: vec![2.0],
            dim: 3,
            nodes: 4096,
            r_max: 20.0,
            residual_tolerance: s.residual_tolerance,
            update_tolerance: s.update_tolerance,
            max_iterations: s.max_iterations,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrappedSection {
    pub gammas: Vec<f64>,
    /// Absolute (`"2.5"`) or a multiple of `a*` (`"1.5a*"`).
    pub a: String,
    /// `harmonic`, `harmonic:<scale>`, `wells:x,y,z^p;x,y,z^p` or
    /// `table:<path>` with `r,v` columns.
    pub potential: String,
    /// `radial` or `cartesian`.
    pub grid: String,
    pub nodes: usize,
    pub r_max: f64,
    pub n: usize,
    pub half_width: f64,
    pub scheme: String,
    pub residual_tolerance: Option<f64>,
    pub max_iterations: usize,
    pub rescale_from: f64,
    pub max_center_updates: usize,
}

impl Default for TrappedSection {
    fn default() -> Self {
        let c = TrappedConfig::default();
        Self {
            gammas: vec![],
            a: "1.5a*".into(),
            potential: "harmonic".into(),
            grid: "radial".into(),
            nodes: 4096,
            r_max: 20.0,
            n: 64,
            half_width: 8.0,
            scheme: "spectral".into(),
            residual_tolerance: None,
            max_iterations: c.max_iterations,
            rescale_from: c.rescale_from,
            max_center_updates: c.max_center_updates,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    Absolute(f64),
    /// Multiple of `a* = ‖Q₂‖₂²`.
    Critical(f64),
}

impl Coupling {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        let (num, critical) = match t.strip_suffix("a*") {
            Some(rest) => (rest.trim().trim_end_matches('*').trim(), true),
            None => (t, false),
        };
        let v: f64 = num.parse().map_err(|_| format!("`{text}` is not a number or a multiple like `1.5a*`"))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(format!("coupling `{text}` must be finite and nonnegative"));
        }
        Ok(if critical { Self::Critical(v) } else { Self::Absolute(v) })
    }

    pub fn resolve(self, a_star: f64) -> f64 {
        match self {
            Self::Absolute(a) => a,
            Self::Critical(k) => k * a_star,
        }
    }
}

/// Parse the potential syntax described on [`TrappedSection::potential`].
pub fn parse_potential(text: &str) -> Result<PotentialSpec, String> {
    let t = text.trim();
    let spec = if t == "harmonic" {
        PotentialSpec::harmonic()
    } else if let Some(s) = t.strip_prefix("harmonic:") {
        let scale = s.trim().parse().map_err(|_| format!("bad harmonic scale `{s}`"))?;
        PotentialSpec::Harmonic { scale }
    } else if let Some(rest) = t.strip_prefix("wells:") {
        let mut wells = Vec::new();
        for part in rest.split(';').filter(|p| !p.trim().is_empty()) {
            let (c, p) = part.split_once('^').ok_or_else(|| format!("well `{part}` lacks `^exponent`"))?;
            let xs: Vec<f64> = c
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| format!("bad well center `{c}`"))?;
            if xs.len() != 3 {
                return Err(format!("well center `{c}` needs three coordinates"));
            }
            let exponent = p.trim().parse().map_err(|_| format!("bad well exponent `{p}`"))?;
            wells.push(Well { center: [xs[0], xs[1], xs[2]], exponent });
        }
        PotentialSpec::product_wells(wells)
    } else if let Some(path) = t.strip_prefix("table:") {
        read_table(Path::new(path.trim()))?
    } else {
        return Err(format!("unknown potential `{t}`; expected harmonic, wells:… or table:…"));
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn read_table(path: &Path) -> Result<PotentialSpec, String> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (i, rec) in rd.deserialize::<(f64, f64)>().enumerate() {
        let (a, b) = rec.map_err(|e| format!("{} row {}: {e}", path.display(), i + 2))?;
        r.push(a);
        v.push(b);
    }
    Ok(PotentialSpec::Tabulated { r, v })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Parse TOML; errors carry the line and field.
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// `--cache-dir`, then `HARTREE_CACHE_DIR`, then the config, then
    /// `<output>/cache`.
    pub fn cache_dir(&self) -> PathBuf {
        if let Some(d) = &self.cache_override {
            return d.clone();
        }
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.cache_dir.clone().unwrap_or_else(|| self.output_dir().join("cache")),
        }
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        let g = &self.ground;
        for &x in &g.gammas {
            check_gamma("ground.gammas", x)?;
        }
        if g.dim < 2 {
            return Err(format!("ground.dim: N = {} must be at least 2", g.dim));
        }
        if g.nodes < 16 || g.nodes > MAX_RADIAL_NODES {
            return Err(format!("ground.nodes: {} outside [16, {MAX_RADIAL_NODES}]", g.nodes));
        }
        positive("ground.r_max", g.r_max)?;
        positive("ground.residual_tolerance", g.residual_tolerance)?;
        positive("ground.update_tolerance", g.update_tolerance)?;
        let t = &self.trapped;
        for &x in &t.gammas {
            check_gamma("trapped.gammas", x)?;
            if x >= 2.0 {
                return Err("trapped.gammas: the trapped problem needs γ < 2".into());
            }
        }
        Coupling::parse(&t.a).map_err(|e| format!("trapped.a: {e}"))?;
        parse_potential(&t.potential).map_err(|e| format!("trapped.potential: {e}"))?;
        self.trapped_config().map_err(|e| format!("trapped.grid: {e}"))?;
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            max_iterations: self.ground.max_iterations,
            update_tolerance: self.ground.update_tolerance,
            residual_tolerance: self.ground.residual_tolerance,
            ..SolverConfig::default()
        }
    }

    pub fn trapped_config(&self) -> Result<TrappedConfig, String> {
        let t = &self.trapped;
        let mut c = match t.grid.as_str() {
            "radial" => {
                if t.nodes < 16 || t.nodes > MAX_RADIAL_NODES {
                    return Err(format!("trapped.nodes: {} outside [16, {MAX_RADIAL_NODES}]", t.nodes));
                }
                positive("trapped.r_max", t.r_max)?;
                TrappedConfig { grid: FrameGrid::Radial { nodes: t.nodes, r_max: t.r_max }, ..TrappedConfig::default() }
            }
            "cartesian" => {
                if t.n < 8 || t.n > MAX_CARTESIAN_SIDE || t.n % 2 != 0 {
                    return Err(format!("trapped.n: {} must be even and in [8, {MAX_CARTESIAN_SIDE}]", t.n));
                }
                positive("trapped.half_width", t.half_width)?;
                let scheme: DerivativeScheme =
                    t.scheme.parse().map_err(|_| format!("trapped.scheme: unknown `{}`", t.scheme))?;
                let mut c = TrappedConfig::cartesian(t.n, t.half_width);
                c.grid = FrameGrid::Cartesian { n: t.n, half_width: t.half_width, scheme };
                c
            }
            other => return Err(format!("unknown grid `{other}`; expected radial or cartesian")),
        };
        if let Some(tol) = t.residual_tolerance {
            positive("trapped.residual_tolerance", tol)?;
            c.residual_tolerance = tol;
        }
        c.max_iterations = t.max_iterations;
        c.rescale_from = t.rescale_from;
        c.max_center_updates = t.max_center_updates;
        Ok(c)
    }
}

fn check_gamma(field: &str, g: f64) -> Result<(), String> {
    if g > 0.0 && g <= 2.0 {
        Ok(())
    } else {
        Err(format!("{field}: γ = {g} outside (0, 2]"))
    }
}

fn positive(field: &str, x: f64) -> Result<(), String> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(format!("{field}: {x} must be positive"))
    }
}
