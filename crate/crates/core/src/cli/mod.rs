//! The `qfreq` command line.
//!
//! CSV outputs start with `#` comment lines, the first two being the command
//! and `# config: <json>` holding the fully resolved configuration, so
//! `--config <previous output>` repeats a run. Column layouts:
//!
//! * `lona`: `step,time,expected_variance`. `time` is the ascending schedule;
//!   `expected_variance` is `E[V]` of the greedy schedule after `step` picks.
//! * `pso`: `iteration,best_ev,mean_ev,spread`, best schedule in the comments.
//! * `figure-data fig1`: `step,lona_ev,linear_ev,pso_ev`.
//! * `figure-data fig2`: `pso_step,global_best_ev,swarm_avg_ev,spread`.
//!
//! `eval` and `simulate` always write a single JSON object.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 enumeration cap
//! or I/O failure, 1 anything else.

pub mod args;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lona::lona_schedule_capped;
use crate::model::{Frequency, Schedule};
use crate::objective::{expected_variance_mc_with, Engine, Evaluator};
use crate::pso::{self, Init, PsoConfig, TraceRow};
use crate::reference;
use crate::simulator::{benchmark_schedule_with, run_trajectory_with, EngineChoice};

use args::{Cli, Command, EngineName, Figure, Format, InitMode, ScheduleArgs};
use config::{RunConfig, CONFIG_PREFIX};
use output::{float, json_compact, json_pretty, Csv};

pub const LONA_HEADER: [&str; 3] = ["step", "time", "expected_variance"];
pub const PSO_HEADER: [&str; 4] = ["iteration", "best_ev", "mean_ev", "spread"];
pub const FIG1_HEADER: [&str; 4] = ["step", "lona_ev", "linear_ev", "pso_ev"];
pub const FIG2_HEADER: [&str; 4] = ["pso_step", "global_best_ev", "swarm_avg_ev", "spread"];

/// Parse `args`, run the command, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EnumerationCap { .. } | Error::Io(_) => 3,
        Error::Domain(_) | Error::Config(_) | Error::NonInteger(_) | Error::Json(_) => 2,
        Error::ZeroMass(_) | Error::NoFeasiblePoint => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Lona { common } => {
            let cfg = RunConfig::resolve("lona", &common)?;
            emit(&cfg, &cmd_lona(&cfg)?)
        }
        Command::Pso { common, pso } => {
            let mut cfg = RunConfig::resolve("pso", &common)?;
            cfg.apply_pso(&pso);
            emit(&cfg, &cmd_pso(&cfg)?)
        }
        Command::Eval { common, schedule, mc } => {
            let mut cfg = RunConfig::resolve("eval", &common)?;
            cfg.mc |= mc;
            set_times(&mut cfg, &schedule)?;
            emit(&cfg, &cmd_eval(&cfg)?)
        }
        Command::Simulate { common, schedule, omega, trials } => {
            let mut cfg = RunConfig::resolve("simulate", &common)?;
            set_times(&mut cfg, &schedule)?;
            cfg.omega = omega.or(cfg.omega);
            cfg.trials = trials.or(cfg.trials);
            emit(&cfg, &cmd_simulate(&cfg)?)
        }
        Command::FigureData { which, common, pso, from } => {
            let mut cfg = RunConfig::resolve("figure-data", &common)?;
            cfg.apply_pso(&pso);
            cfg.figure = Some(which);
            let text = match which {
                Figure::Fig1 => cmd_fig1(&cfg)?,
                Figure::Fig2 => cmd_fig2(&cfg, from.as_deref())?,
            };
            emit(&cfg, &text)
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn set_times(cfg: &mut RunConfig, args: &ScheduleArgs) -> Result<()> {
    if let Some(times) = &args.times {
        cfg.times = Some(times.clone());
    } else if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path)?;
        let times = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad time {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        cfg.times = Some(times);
    }
    Ok(())
}

fn schedule_of(cfg: &RunConfig) -> Result<Schedule> {
    let times = cfg.times.clone().ok_or_else(|| Error::Config("--times or --file is required".into()))?;
    Schedule::new(times).map_err(|e| Error::Config(e.to_string()))
}

fn header(cfg: &RunConfig) -> Result<Csv> {
    let mut csv = Csv::default();
    csv.comment(format!("qfreq {}", cfg.command));
    csv.comment(format!("{}{}", CONFIG_PREFIX.trim_start_matches("# "), json_compact(cfg)?));
    Ok(csv)
}

fn json_report<T: Serialize>(cfg: &RunConfig, body: T) -> Result<String> {
    #[derive(Serialize)]
    struct Report<'a, T> {
        config: &'a RunConfig,
        #[serde(flatten)]
        body: T,
    }
    Ok(json_pretty(&Report { config: cfg, body })? + "\n")
}

pub fn cmd_lona(cfg: &RunConfig) -> Result<String> {
    let n = cfg.require_n()?;
    let trace = lona_schedule_capped(n, cfg.cap)?;
    match cfg.format {
        Format::Json => json_report(cfg, &trace),
        Format::Csv => {
            let mut csv = header(cfg)?;
            let order: Vec<String> = trace.selection_order.iter().map(u32::to_string).collect();
            csv.comment(format!("selection_order: {}", order.join(",")));
            csv.row(LONA_HEADER);
            for (k, (m, ev)) in trace.schedule.iter().zip(&trace.per_step_ev).enumerate() {
                csv.row([(k + 1).to_string(), m.to_string(), float(*ev)]);
            }
            Ok(csv.finish())
        }
    }
}

/// The swarm configuration a run resolves to, including the greedy base
/// schedule for `around-lona` initialization.
pub fn pso_config(cfg: &RunConfig, n: usize) -> Result<PsoConfig> {
    let s = &cfg.pso;
    let init = match s.init {
        InitMode::Range => Init::default(),
        InitMode::AroundLona => {
            let base = lona_schedule_capped(n, cfg.cap)?;
            Init::AroundSchedule {
                base: base.schedule.iter().map(|&m| f64::from(m)).collect(),
                radius: s.radius.unwrap_or_else(|| reference::around_lona_radius(n)),
            }
        }
    };
    let pc = PsoConfig {
        swarm_size: s.swarm_size,
        c1: s.c1,
        c2: s.c2,
        chi: s.chi,
        v_max: s.v_max,
        penalty: s.penalty,
        init,
        iterations: s.iterations,
        seed: cfg.seed,
        per_dimension_random: s.per_dimension_random,
        ..PsoConfig::default()
    };
    pc.resolved_chi()?;
    if pc.iterations == 0 {
        return Err(Error::Config("--iters must be at least 1".into()));
    }
    Ok(pc)
}

/// Run the swarm on the grid-engine expected variance.
pub fn run_pso(cfg: &RunConfig, n: usize) -> Result<pso::PsoResult> {
    if cfg.engine == Some(EngineName::Fourier) {
        return Err(Error::Config("the swarm searches real times; use --engine grid".into()));
    }
    let evaluator = Evaluator::new(Engine::Grid { size: cfg.grid_size }).with_cap(cfg.cap);
    if n > cfg.cap {
        return Err(Error::EnumerationCap { len: n, cap: cfg.cap });
    }
    let pc = pso_config(cfg, n)?;
    // Grid size is validated once here so the objective below cannot fail.
    evaluator.expected_variance(&Schedule::empty())?;
    let base = |s: &Schedule| evaluator.expected_variance(s).map_or(f64::INFINITY, |r| r.expected_variance);
    pso::optimize(&pc, n, pso::barrier(base, pc.penalty))
}

pub fn cmd_pso(cfg: &RunConfig) -> Result<String> {
    let n = cfg.require_n()?;
    let result = run_pso(cfg, n)?;
    match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                best_times: &'a [f64],
                best_ev: f64,
                trace: &'a [TraceRow],
            }
            json_report(cfg, Body { best_times: result.best.times(), best_ev: result.value, trace: &result.trace.rows })
        }
        Format::Csv => {
            let mut csv = header(cfg)?;
            csv.comment(format!("best_times: {}", output::float_list(result.best.times())));
            csv.comment(format!("best_ev: {}", float(result.value)));
            csv.row(PSO_HEADER);
            for r in &result.trace.rows {
                csv.row([r.iteration.to_string(), float(r.best_ev), float(r.mean_ev), float(r.spread)]);
            }
            Ok(csv.finish())
        }
    }
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<String> {
    let s = schedule_of(cfg)?;
    let engine = match cfg.engine {
        Some(EngineName::Fourier) => Engine::Fourier,
        Some(EngineName::Grid) => Engine::Grid { size: cfg.grid_size },
        None if s.integer_times().is_some_and(|t| !t.contains(&0)) => Engine::Fourier,
        None => Engine::Grid { size: cfg.grid_size },
    };
    #[derive(Serialize)]
    struct EvalOut<'a> {
        times: &'a [f64],
        expected_variance: f64,
        method: &'static str,
        engine: &'static str,
        branches: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        stderr: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    }
    let out = if cfg.mc {
        let choice = EngineChoice { grid_size: cfg.grid_size };
        let r = expected_variance_mc_with(&s, cfg.mc_samples, cfg.seed, choice)?;
        let engine = if s.times().iter().all(|&t| t >= 1.0 && t.fract() == 0.0) { "fourier" } else { "grid" };
        EvalOut {
            times: s.times(),
            expected_variance: r.expected_variance,
            method: r.method.name(),
            engine,
            branches: r.branch_count,
            stderr: r.stderr,
            seed: Some(cfg.seed),
        }
    } else {
        // The value does not depend on order; evaluating the ascending
        // schedule makes permutations print identical values.
        let r = Evaluator::new(engine).with_cap(cfg.cap).expected_variance(&s.sorted())?;
        EvalOut {
            times: s.times(),
            expected_variance: r.expected_variance,
            method: r.method.name(),
            engine: engine.name(),
            branches: r.branch_count,
            stderr: None,
            seed: None,
        }
    };
    Ok(json_compact(&out)? + "\n")
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<String> {
    let s = schedule_of(cfg)?;
    let engine = EngineChoice { grid_size: cfg.grid_size };
    match (cfg.trials, cfg.omega) {
        (Some(trials), _) => json_report(cfg, benchmark_schedule_with(&s, trials, cfg.seed, engine)?),
        (None, Some(w)) => {
            let w = Frequency::new(w).map_err(|e| Error::Config(e.to_string()))?;
            json_report(cfg, run_trajectory_with(&s, w, cfg.seed, engine)?)
        }
        (None, None) => Err(Error::Config("simulate needs --omega or --trials".into())),
    }
}

/// Performance curves: greedy schedule, `m_k = k`, and reference swarm
/// schedules where available.
pub fn cmd_fig1(cfg: &RunConfig) -> Result<String> {
    let n = cfg.n.unwrap_or(10);
    if n == 0 {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    let lona = lona_schedule_capped(n, cfg.cap)?;
    let exact = Evaluator::new(Engine::Fourier).with_cap(cfg.cap);
    let grid = Evaluator::new(Engine::Grid { size: cfg.grid_size }).with_cap(cfg.cap);
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let linear: Vec<u32> = (1..=k as u32).collect();
        let linear_ev = exact.expected_variance(&Schedule::from_integers(&linear))?.expected_variance;
        let pso_ev = match reference::pso_schedule(k) {
            Some(times) => Some(grid.expected_variance(&Schedule::new(times.to_vec())?)?.expected_variance),
            None => None,
        };
        rows.push((k, lona.per_step_ev[k - 1], linear_ev, pso_ev));
    }
    match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                step: usize,
                lona_ev: f64,
                linear_ev: f64,
                pso_ev: Option<f64>,
            }
            let rows: Vec<Row> =
                rows.into_iter().map(|(step, lona_ev, linear_ev, pso_ev)| Row { step, lona_ev, linear_ev, pso_ev }).collect();
            json_report(cfg, serde_json::json!({ "rows": serde_json::to_value(&rows)? }))
        }
        Format::Csv => {
            let mut csv = header(cfg)?;
            csv.row(FIG1_HEADER);
            for (k, l, lin, p) in rows {
                csv.row([k.to_string(), float(l), float(lin), p.map(float).unwrap_or_default()]);
            }
            Ok(csv.finish())
        }
    }
}

/// Swarm convergence, from an inline run or an earlier `pso` CSV.
pub fn cmd_fig2(cfg: &RunConfig, from: Option<&Path>) -> Result<String> {
    let rows = match from {
        Some(path) => read_trace(path)?,
        None => run_pso(cfg, cfg.n.unwrap_or(5))?.trace.rows,
    };
    match cfg.format {
        Format::Json => json_report(cfg, serde_json::json!({ "rows": serde_json::to_value(&rows)? })),
        Format::Csv => {
            let mut csv = header(cfg)?;
            csv.row(FIG2_HEADER);
            for r in rows {
                csv.row([r.iteration.to_string(), float(r.best_ev), float(r.mean_ev), float(r.spread)]);
            }
            Ok(csv.finish())
        }
    }
}

fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let text = std::fs::read_to_string(path)?;
    let bad = |msg: &str| Error::Config(format!("{}: {msg}", path.display()));
    let (head, rows) = output::parse_csv(&text).ok_or_else(|| bad("empty file"))?;
    if head != PSO_HEADER {
        return Err(bad("not a pso trace"));
    }
    rows.iter()
        .map(|r| {
            let num = |i: usize| r.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| bad("malformed row"));
            Ok(TraceRow {
                iteration: r[0].parse().map_err(|_| bad("malformed row"))?,
                best_ev: num(1)?,
                mean_ev: num(2)?,
                spread: num(3)?,
            })
        })
        .collect()
}
