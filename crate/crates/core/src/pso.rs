//! Constriction-factor particle swarm over time increments.
//!
//! Particles move in increment space (`dt₁ = t₁`, `dt_k = t_k − t_{k−1}`), so
//! every ascending schedule has exactly one position. Positions with a
//! negative increment are not evaluated; they score a fixed penalty that is
//! worse than any expected variance.
//!
//! Velocity update, per particle and step:
//! `v ← χ (v + r₁c₁(x_l − x) + r₂c₂(x_g − x))`, then each component is clamped
//! to `[−v_max, v_max]` and `x ← x + v`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dt_to_schedule, dt_to_times, is_feasible, times_to_dt, DtVector, Schedule, PRIOR_VARIANCE};
use crate::simulator::stream_rng;

/// `χ = 2 / |2 − φ − √(φ² − 4φ)|` with `φ = c₁ + c₂ > 4`.
pub fn constriction_factor(c1: f64, c2: f64) -> Result<f64> {
    let phi = c1 + c2;
    if !(phi > 4.0) {
        return Err(Error::Domain(format!("constriction factor needs c1 + c2 > 4, got {phi}")));
    }
    Ok(2.0 / (2.0 - phi - (phi * phi - 4.0 * phi).sqrt()).abs())
}

/// How initial positions are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Init {
    /// `dt₁` uniform in `dt1`, later increments uniform in `dti`.
    Range { dt1: (f64, f64), dti: (f64, f64) },
    /// Each time of `base` moved uniformly within `±radius`, negative times
    /// clamped to 0, then sorted.
    AroundSchedule { base: Vec<f64>, radius: f64 },
}

impl Default for Init {
    fn default() -> Self {
        Init::Range { dt1: (0.0, 1.5), dti: (0.0, 2.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub c1: f64,
    pub c2: f64,
    /// Overrides the constriction factor derived from `c1 + c2`.
    pub chi: Option<f64>,
    pub v_max: f64,
    pub penalty: f64,
    pub init: Init,
    pub init_velocity: (f64, f64),
    pub iterations: usize,
    pub seed: u64,
    /// Draw `r₁, r₂` per dimension instead of once per particle.
    pub per_dimension_random: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 16,
            c1: 2.05,
            c2: 2.05,
            chi: None,
            v_max: 2.0,
            penalty: 10.0,
            init: Init::default(),
            init_velocity: (-1.0, 1.0),
            iterations: 200,
            seed: 0,
            per_dimension_random: false,
        }
    }
}

impl PsoConfig {
    /// The constriction factor in effect, after validating the rest.
    pub fn resolved_chi(&self) -> Result<f64> {
        if self.swarm_size == 0 {
            return Err(Error::Config("swarm size must be positive".into()));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::Config(format!("v_max must be positive, got {}", self.v_max)));
        }
        if !(self.penalty > PRIOR_VARIANCE) {
            return Err(Error::Config(format!(
                "penalty {} must exceed the prior variance {PRIOR_VARIANCE}",
                self.penalty
            )));
        }
        if !(self.init_velocity.0 < self.init_velocity.1) {
            return Err(Error::Config("empty initial velocity range".into()));
        }
        match self.chi {
            Some(chi) if chi > 0.0 && chi.is_finite() => Ok(chi),
            Some(chi) => Err(Error::Config(format!("chi must be positive, got {chi}"))),
            None => constriction_factor(self.c1, self.c2).map_err(|e| Error::Config(e.to_string())),
        }
    }
}

/// Evaluate `base` on the schedule of `d`, or return `penalty` without
/// calling `base` when any increment is negative.
pub fn penalized_objective<F>(d: &DtVector, base: F, penalty: f64) -> f64
where
    F: FnOnce(&Schedule) -> f64,
{
    match dt_to_schedule(d) {
        Ok(s) => base(&s),
        Err(_) => penalty,
    }
}

/// Increment-space objective that applies the barrier around `base`.
pub fn barrier<F>(base: F, penalty: f64) -> impl Fn(&[f64]) -> f64 + Sync
where
    F: Fn(&Schedule) -> f64 + Sync,
{
    move |d: &[f64]| penalized_objective(&DtVector(d.to_vec()), &base, penalty)
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub value: f64,
    pub best_position: Vec<f64>,
    pub best_value: f64,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Global best objective so far.
    pub best_ev: f64,
    /// Mean current objective over particles at feasible positions.
    pub mean_ev: f64,
    /// Root-mean-square distance of the particles from their centroid.
    pub spread: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SwarmTrace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub global_best_position: Vec<f64>,
    pub global_best_value: f64,
    pub chi: f64,
    pub trace: SwarmTrace,
}

pub fn init_swarm<F>(cfg: &PsoConfig, dim: usize, objective: &F) -> Result<Swarm>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chi = cfg.resolved_chi()?;
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if let Init::AroundSchedule { base, radius } = &cfg.init {
        if base.len() != dim {
            return Err(Error::Config(format!("base schedule has {} times, expected {dim}", base.len())));
        }
        if !(*radius >= 0.0) {
            return Err(Error::Config(format!("radius must be non-negative, got {radius}")));
        }
    }
    let particles: Vec<Particle> = (0..cfg.swarm_size)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, i as u64);
            let position = initial_position(&cfg.init, dim, &mut rng);
            let (lo, hi) = cfg.init_velocity;
            let velocity = (0..dim).map(|_| rng.random_range(lo..hi).clamp(-cfg.v_max, cfg.v_max)).collect();
            let value = objective(&position);
            Particle { best_position: position.clone(), best_value: value, position, velocity, value, rng }
        })
        .collect();

    let (gbest, gval) = particles
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, p)| if p.best_value < bv { (i, p.best_value) } else { (bi, bv) });
    let mut swarm = Swarm {
        global_best_position: particles[gbest].best_position.clone(),
        global_best_value: gval,
        particles,
        chi,
        trace: SwarmTrace::default(),
    };
    swarm.record(0);
    Ok(swarm)
}

fn initial_position(init: &Init, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match init {
        Init::Range { dt1, dti } => (0..dim)
            .map(|k| {
                let (lo, hi) = if k == 0 { *dt1 } else { *dti };
                rng.random_range(lo..hi)
            })
            .collect(),
        Init::AroundSchedule { base, radius } => {
            let mut times: Vec<f64> =
                base.iter().map(|&t| (t + radius * (2.0 * rng.random::<f64>() - 1.0)).max(0.0)).collect();
            times.sort_by(f64::total_cmp);
            times_to_dt(&times).map(|d| d.0).unwrap_or_default()
        }
    }
}

/// One synchronous swarm update: every particle moves against the global best
/// from the start of the step, then bests are refreshed in particle order.
pub fn step_swarm<F>(swarm: &mut Swarm, cfg: &PsoConfig, objective: &F)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let chi = swarm.chi;
    let global = swarm.global_best_position.clone();
    swarm.particles.par_iter_mut().for_each(|p| {
        move_particle(p, &global, chi, cfg);
        p.value = objective(&p.position);
        if p.value < p.best_value {
            p.best_value = p.value;
            p.best_position.clone_from(&p.position);
        }
    });
    for p in &swarm.particles {
        if p.best_value < swarm.global_best_value {
            swarm.global_best_value = p.best_value;
            swarm.global_best_position.clone_from(&p.best_position);
        }
    }
    let next = swarm.trace.rows.last().map_or(0, |r| r.iteration + 1);
    swarm.record(next);
}

fn move_particle(p: &mut Particle, global: &[f64], chi: f64, cfg: &PsoConfig) {
    let (mut r1, mut r2) = (p.rng.random::<f64>(), p.rng.random::<f64>());
    for k in 0..p.position.len() {
        if cfg.per_dimension_random && k > 0 {
            r1 = p.rng.random();
            r2 = p.rng.random();
        }
        let x = p.position[k];
        let v = chi * (p.velocity[k] + r1 * cfg.c1 * (p.best_position[k] - x) + r2 * cfg.c2 * (global[k] - x));
        let v = v.clamp(-cfg.v_max, cfg.v_max);
        p.velocity[k] = v;
        p.position[k] = x + v;
    }
}

impl Swarm {
    fn record(&mut self, iteration: usize) {
        let feasible: Vec<f64> =
            self.particles.iter().filter(|p| is_feasible(&p.position)).map(|p| p.value).collect();
        let mean_ev = if feasible.is_empty() {
            f64::NAN
        } else {
            feasible.iter().sum::<f64>() / feasible.len() as f64
        };
        let n = self.particles.len() as f64;
        let dim = self.global_best_position.len();
        let centroid: Vec<f64> =
            (0..dim).map(|k| self.particles.iter().map(|p| p.position[k]).sum::<f64>() / n).collect();
        let spread = (self
            .particles
            .iter()
            .map(|p| p.position.iter().zip(&centroid).map(|(x, c)| (x - c).powi(2)).sum::<f64>())
            .sum::<f64>()
            / n)
            .sqrt();
        self.trace.rows.push(TraceRow { iteration, best_ev: self.global_best_value, mean_ev, spread });
    }
}

#[derive(Debug, Clone)]
pub struct PsoResult {
    /// Ascending times of the global best position.
    pub best: Schedule,
    pub best_dt: DtVector,
    pub value: f64,
    pub trace: SwarmTrace,
}

pub fn optimize<F>(cfg: &PsoConfig, dim: usize, objective: F) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if cfg.iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    let mut swarm = init_swarm(cfg, dim, &objective)?;
    for _ in 0..cfg.iterations {
        step_swarm(&mut swarm, cfg, &objective);
    }
    let best_dt = DtVector(swarm.global_best_position);
    if !best_dt.is_feasible() || !swarm.global_best_value.is_finite() {
        return Err(Error::NoFeasiblePoint);
    }
    let best = Schedule::new(dt_to_times(&best_dt))?;
    Ok(PsoResult { best, best_dt, value: swarm.global_best_value, trace: swarm.trace })
}
