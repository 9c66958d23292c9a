//! Simulated measurement records for a known frequency.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; trial `i`
//! of a batch uses stream `i` of that generator. Within a trial the first
//! uniform draw is the true frequency (batches only) and each subsequent draw
//! `u` decides one measurement: `Plus` iff `u < p(+ | t, ω)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{likelihood, Frequency, Outcome, Schedule};
use crate::numeric::RunningStats;
use crate::posterior::{FourierPosterior, GridPosterior, Moments, Posterior, DEFAULT_GRID_SIZE};

/// Generator for stream `stream` under master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn sample_outcome<R: Rng + ?Sized>(t: f64, omega: Frequency, rng: &mut R) -> Result<Outcome> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("evolution time must be non-negative, got {t}")));
    }
    Ok(draw(t, omega.value(), rng))
}

#[inline]
fn draw<R: Rng + ?Sized>(t: f64, omega: f64, rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    if u < likelihood(t, omega, Outcome::Plus) {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// One simulated run of a schedule and the posterior it leaves behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub true_omega: f64,
    pub schedule: Schedule,
    pub outcomes: Vec<Outcome>,
    pub final_mean: f64,
    pub final_variance: f64,
    pub squared_error: f64,
}

/// Which engine a trajectory uses: Fourier when every time is a positive
/// integer, otherwise a grid of `grid_size` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineChoice {
    pub grid_size: usize,
}

impl Default for EngineChoice {
    fn default() -> Self {
        Self { grid_size: DEFAULT_GRID_SIZE }
    }
}

impl EngineChoice {
    fn uses_fourier(&self, s: &Schedule) -> bool {
        s.times().iter().all(|&t| t >= 1.0 && t.fract() == 0.0)
    }

    /// Simulate `s` at `omega` and return the outcomes and final moments.
    pub(crate) fn simulate<R: Rng + ?Sized>(
        &self,
        s: &Schedule,
        omega: f64,
        rng: &mut R,
    ) -> Result<(Vec<Outcome>, Moments)> {
        if self.uses_fourier(s) {
            simulate_with(FourierPosterior::flat_prior(), s, omega, rng)
        } else {
            simulate_with(GridPosterior::flat_prior(self.grid_size)?, s, omega, rng)
        }
    }
}

fn simulate_with<P: Posterior, R: Rng + ?Sized>(
    prior: P,
    s: &Schedule,
    omega: f64,
    rng: &mut R,
) -> Result<(Vec<Outcome>, Moments)> {
    let mut post = prior;
    let mut outcomes = Vec::with_capacity(s.len());
    for &t in s.times() {
        let o = draw(t, omega, rng);
        post = post.update(t, o)?;
        outcomes.push(o);
    }
    Ok((outcomes, post.moments()?))
}

pub fn run_trajectory(s: &Schedule, true_omega: Frequency, seed: u64) -> Result<TrajectoryRecord> {
    run_trajectory_with(s, true_omega, seed, EngineChoice::default())
}

pub fn run_trajectory_with(
    s: &Schedule,
    true_omega: Frequency,
    seed: u64,
    engine: EngineChoice,
) -> Result<TrajectoryRecord> {
    let mut rng = stream_rng(seed, 0);
    let (outcomes, m) = engine.simulate(s, true_omega.value(), &mut rng)?;
    Ok(TrajectoryRecord {
        true_omega: true_omega.value(),
        schedule: s.clone(),
        outcomes,
        final_mean: m.mean,
        final_variance: m.variance,
        squared_error: (m.mean - true_omega.value()).powi(2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub trials: usize,
    pub mean_squared_error: f64,
    pub mse_stderr: f64,
    pub mean_posterior_variance: f64,
    /// Standard error of `mean_posterior_variance`.
    pub stderr: f64,
}

pub const MIN_TRIALS: usize = 100;

/// Average estimation performance of `s` over `ω ~ Uniform(0, ω₀)`, using the
/// posterior mean as the point estimate.
pub fn benchmark_schedule(s: &Schedule, trials: usize, seed: u64) -> Result<BenchmarkReport> {
    benchmark_schedule_with(s, trials, seed, EngineChoice::default())
}

pub fn benchmark_schedule_with(
    s: &Schedule,
    trials: usize,
    seed: u64,
    engine: EngineChoice,
) -> Result<BenchmarkReport> {
    let per_trial = sample_posteriors(s, trials, seed, engine)?;
    let errors: RunningStats = per_trial.iter().map(|(w, m)| (m.mean - w).powi(2)).collect();
    let variances: RunningStats = per_trial.iter().map(|(_, m)| m.variance).collect();
    Ok(BenchmarkReport {
        trials,
        mean_squared_error: errors.mean(),
        mse_stderr: errors.stderr(),
        mean_posterior_variance: variances.mean(),
        stderr: variances.stderr(),
    })
}

/// `(true ω, final moments)` per trial, in trial order.
pub(crate) fn sample_posteriors(
    s: &Schedule,
    trials: usize,
    seed: u64,
    engine: EngineChoice,
) -> Result<Vec<(f64, Moments)>> {
    if trials < MIN_TRIALS {
        return Err(Error::Domain(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let omega: f64 = rng.random();
            let (_, m) = engine.simulate(s, omega, &mut rng)?;
            Ok((omega, m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_outcomes() {
        let mut rng = stream_rng(1, 0);
        let zero = Frequency::new(0.0).unwrap();
        let top = Frequency::new(1.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(sample_outcome(1.0, zero, &mut rng).unwrap(), Outcome::Minus);
            assert_eq!(sample_outcome(1.0, top, &mut rng).unwrap(), Outcome::Plus);
        }
        assert!(sample_outcome(-1.0, top, &mut rng).is_err());
    }

    #[test]
    fn half_probability_frequency() {
        let mut rng = stream_rng(2024, 3);
        let w = Frequency::new(0.5).unwrap();
        let n = 100_000;
        let plus = (0..n).filter(|_| sample_outcome(1.0, w, &mut rng).unwrap() == Outcome::Plus).count();
        assert!((plus as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn empty_schedule_keeps_prior() {
        let r = run_trajectory(&Schedule::empty(), Frequency::new(0.3).unwrap(), 5).unwrap();
        assert!((r.final_mean - 0.5).abs() < 1e-15);
        assert!((r.final_variance - 1.0 / 12.0).abs() < 1e-15);
        assert!(r.outcomes.is_empty());

        let b = benchmark_schedule(&Schedule::empty(), 100, 9).unwrap();
        assert_eq!(b.mean_posterior_variance, 1.0 / 12.0);
        assert_eq!(b.stderr, 0.0);
    }

    #[test]
    fn trajectory_is_reproducible() {
        let s = Schedule::new(vec![1.0, 2.5, 3.0]).unwrap();
        let w = Frequency::new(0.41).unwrap();
        let engine = EngineChoice { grid_size: 2000 };
        let a = run_trajectory_with(&s, w, 17, engine).unwrap();
        let b = run_trajectory_with(&s, w, 17, engine).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcomes.len(), 3);
        assert!((a.squared_error - (a.final_mean - a.true_omega).powi(2)).abs() < 1e-18);
    }

    #[test]
    fn repetition_shrinks_variance() {
        let s = Schedule::from_integers(&[1; 50]);
        let w = Frequency::new(1.0 / 3.0).unwrap();
        let stats: RunningStats =
            (0..40).map(|seed| run_trajectory(&s, w, seed).unwrap().final_variance).collect();
        assert!(stats.mean() < 1.0 / 120.0, "{}", stats.mean());
    }

    #[test]
    fn too_few_trials() {
        assert!(benchmark_schedule(&Schedule::from_integers(&[1]), 99, 0).is_err());
    }
}
