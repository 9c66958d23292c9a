//! Resolved run configuration: built-in defaults, overridden by a config
//! file, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::args::{CommonArgs, EngineName, Figure, Format, InitMode, PsoArgs};
use crate::error::{Error, Result};
use crate::objective::DEFAULT_ENUMERATION_CAP;
use crate::posterior::DEFAULT_GRID_SIZE;
use crate::pso::PsoConfig;

pub const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoSettings {
    pub swarm_size: usize,
    pub c1: f64,
    pub c2: f64,
    pub chi: Option<f64>,
    pub v_max: f64,
    pub penalty: f64,
    pub iterations: usize,
    pub init: InitMode,
    /// Defaults to 0.5 below ten measurements and 0.1 from ten on.
    pub radius: Option<f64>,
    pub per_dimension_random: bool,
}

impl Default for PsoSettings {
    fn default() -> Self {
        let d = PsoConfig::default();
        Self {
            swarm_size: d.swarm_size,
            c1: d.c1,
            c2: d.c2,
            chi: d.chi,
            v_max: d.v_max,
            penalty: d.penalty,
            iterations: d.iterations,
            init: InitMode::Range,
            radius: None,
            per_dimension_random: d.per_dimension_random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: String,
    pub n: Option<usize>,
    pub engine: Option<EngineName>,
    pub grid_size: usize,
    pub cap: usize,
    pub mc: bool,
    pub mc_samples: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub times: Option<Vec<f64>>,
    pub omega: Option<f64>,
    pub trials: Option<usize>,
    pub figure: Option<Figure>,
    pub pso: PsoSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            n: None,
            engine: None,
            grid_size: DEFAULT_GRID_SIZE,
            cap: DEFAULT_ENUMERATION_CAP,
            mc: false,
            mc_samples: 100_000,
            seed: 0,
            format: Format::Csv,
            out: None,
            times: None,
            omega: None,
            trials: None,
            figure: None,
            pso: PsoSettings::default(),
        }
    }
}

impl RunConfig {
    /// Defaults, then `common.config` if given, then the flags in `common`.
    pub fn resolve(command: &str, common: &CommonArgs) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        cfg.command = command.to_string();
        macro_rules! set {
            ($($field:ident <- $flag:expr),* $(,)?) => {$( if let Some(v) = $flag.clone() { cfg.$field = v; } )*};
        }
        set!(grid_size <- common.grid_size, cap <- common.cap, mc_samples <- common.samples,
             seed <- common.seed, format <- common.format);
        if common.n.is_some() {
            cfg.n = common.n;
        }
        if common.engine.is_some() {
            cfg.engine = common.engine;
        }
        // The destination never comes from a file, so replaying an output
        // does not overwrite it.
        cfg.out.clone_from(&common.out);
        Ok(cfg)
    }

    pub fn apply_pso(&mut self, a: &PsoArgs) {
        let p = &mut self.pso;
        macro_rules! set {
            ($($field:ident <- $flag:expr),* $(,)?) => {$( if let Some(v) = $flag { p.$field = v; } )*};
        }
        set!(swarm_size <- a.swarm_size, c1 <- a.c1, c2 <- a.c2, v_max <- a.vmax,
             iterations <- a.iters, init <- a.init, penalty <- a.penalty);
        if a.chi.is_some() {
            p.chi = a.chi;
        }
        if a.radius.is_some() {
            p.radius = a.radius;
        }
        p.per_dimension_random |= a.per_dimension_random;
    }

    /// Reads a JSON file, or the `# config:` line of an earlier output.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let json = text
            .lines()
            .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
            .map(str::to_string)
            .unwrap_or(text);
        let value: serde_json::Value = serde_json::from_str(&json)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        // An echoed output may carry the whole report; the config is nested.
        let value = match value.get("config") {
            Some(inner) if inner.is_object() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn require_n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(n) => Err(Error::Config(format!("--n must be at least 1, got {n}"))),
            None => Err(Error::Config("--n is required".into())),
        }
    }
}
