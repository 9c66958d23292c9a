use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "qfreq", version, about = "Qubit frequency estimation schedules: greedy, swarm-optimized, evaluated and simulated")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Greedy locally-optimal integer schedule.
    Lona {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Particle-swarm optimization of a continuous schedule.
    Pso {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pso: PsoArgs,
    },
    /// Expected posterior variance of a schedule.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Estimate by Monte Carlo instead of enumerating outcomes.
        #[arg(long)]
        mc: bool,
    },
    /// Simulate one measurement record, or benchmark over random frequencies.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// True frequency in units of ω₀ for a single trajectory.
        #[arg(long)]
        omega: Option<f64>,
        /// Number of benchmark trials over ω ~ Uniform(0, ω₀).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Data behind the performance and convergence figures.
    FigureData {
        #[arg(value_enum)]
        which: Figure,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pso: PsoArgs,
        /// Read the convergence trace from an earlier `pso` CSV output.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    Fig1,
    Fig2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineName {
    Fourier,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    #[default]
    Range,
    AroundLona,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Number of measurements.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineName>,
    /// Grid points for the grid engine.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// Largest schedule length that may be enumerated exactly.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Monte-Carlo samples.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON configuration, or an earlier output whose `# config:` line is reused.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PsoArgs {
    #[arg(long)]
    pub swarm_size: Option<usize>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Explicit constriction factor; otherwise derived from c1 + c2.
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub vmax: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, value_enum)]
    pub init: Option<InitMode>,
    /// Half-width of the initial perturbation around the greedy schedule.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Objective value assigned to positions with a negative increment.
    #[arg(long)]
    pub penalty: Option<f64>,
    /// Draw r1, r2 per dimension rather than once per particle.
    #[arg(long)]
    pub per_dimension_random: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScheduleArgs {
    /// Comma-separated evolution times in units of Δt.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    /// File with evolution times separated by commas, whitespace or newlines.
    #[arg(long, conflicts_with = "times")]
    pub file: Option<PathBuf>,
}
