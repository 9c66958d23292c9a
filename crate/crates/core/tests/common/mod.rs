//! Independent oracles and property checks shared by the integration tests.
//!
//! Oracles integrate the product of likelihoods directly with composite
//! Simpson quadrature; they share nothing with the library's posterior code.

#![allow(dead_code)]

use std::f64::consts::PI;

use qfreq::objective::{outcome_tree, Engine, Evaluator};
use qfreq::posterior::{FourierPosterior, GridPosterior};
use qfreq::{Outcome, Schedule};

pub const SIMPSON_PANELS: usize = 20_000;

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `Π_k p(o_k | ω)` written out from the measurement model.
pub fn string_likelihood(times: &[f64], outcomes: &[Outcome], w: f64) -> f64 {
    times
        .iter()
        .zip(outcomes)
        .map(|(&t, o)| {
            let s = (PI * t * w / 2.0).sin().powi(2);
            match o {
                Outcome::Plus => s,
                Outcome::Minus => 1.0 - s,
            }
        })
        .product()
}

/// `(mass, mean, variance)` of one outcome string under a flat prior.
pub fn oracle_branch(times: &[f64], outcomes: &[Outcome]) -> (f64, f64, f64) {
    let l = |w: f64| string_likelihood(times, outcomes, w);
    let mass = simpson(l, 0.0, 1.0, SIMPSON_PANELS);
    let mean = simpson(|w| w * l(w), 0.0, 1.0, SIMPSON_PANELS) / mass;
    let var = simpson(|w| (w - mean).powi(2) * l(w), 0.0, 1.0, SIMPSON_PANELS) / mass;
    (mass, mean, var)
}

pub fn all_strings(n: usize) -> Vec<Vec<Outcome>> {
    (0..1u32 << n)
        .map(|bits| {
            (0..n).map(|k| if bits >> (n - 1 - k) & 1 == 0 { Outcome::Plus } else { Outcome::Minus }).collect()
        })
        .collect()
}

/// Expected posterior variance by brute force over every outcome string.
pub fn oracle_expected_variance(times: &[f64]) -> f64 {
    all_strings(times.len())
        .iter()
        .map(|o| {
            let (mass, _, var) = oracle_branch(times, o);
            if mass > 0.0 {
                mass * var
            } else {
                0.0
            }
        })
        .sum()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn engines_for(s: &Schedule) -> Vec<Engine> {
    let mut e = vec![Engine::grid()];
    if s.integer_times().is_some_and(|t| !t.contains(&0)) {
        e.push(Engine::Fourier);
    }
    e
}

/// Branch masses sum to one, the posterior means average to the prior mean,
/// and the expected variance lies in `[0, 1/12]` and matches the evaluator.
pub fn check_tree_identities(s: &Schedule, engine: Engine) -> Result<(), String> {
    let tree = outcome_tree(s, engine, 16).map_err(|e| e.to_string())?;
    ensure(tree.len() == 1 << s.len(), || format!("{} branches for {} times", tree.len(), s.len()))?;
    let mass: f64 = tree.iter().map(|b| b.probability).sum();
    ensure((mass - 1.0).abs() <= 1e-9, || format!("{s:?} {}: masses sum to {mass}", engine.name()))?;
    let mean: f64 = tree.iter().filter_map(|b| b.mean.map(|m| m * b.probability)).sum();
    ensure((mean - 0.5).abs() <= 1e-9, || format!("{s:?} {}: total expectation {mean}", engine.name()))?;
    let ev: f64 = tree.iter().filter_map(|b| b.variance.map(|v| v * b.probability)).sum();
    // Equality holds when every posterior is symmetric about ½ (all times even).
    ensure((0.0..=1.0 / 12.0 + 1e-12).contains(&ev), || format!("{s:?} {}: E[V] = {ev}", engine.name()))?;
    let reported = Evaluator::new(engine).expected_variance(s).map_err(|e| e.to_string())?.expected_variance;
    ensure((reported - ev).abs() <= 1e-12, || format!("{s:?} {}: evaluator {reported} vs tree {ev}", engine.name()))
}

/// `E[V]` is unchanged by reversing and rotating the schedule.
pub fn check_permutation_invariance(s: &Schedule, engine: Engine) -> Result<(), String> {
    let ev = |t: Vec<f64>| {
        Evaluator::new(engine)
            .expected_variance(&Schedule::new(t).unwrap())
            .map(|r| r.expected_variance)
            .map_err(|e| e.to_string())
    };
    let base = ev(s.times().to_vec())?;
    let mut rev = s.times().to_vec();
    rev.reverse();
    let mut rot = s.times().to_vec();
    rot.rotate_left(s.len() / 2);
    for (name, t) in [("reversed", rev), ("rotated", rot)] {
        let other = ev(t)?;
        ensure((other - base).abs() <= 1e-12, || format!("{s:?} {name}: {other} vs {base}"))?;
    }
    Ok(())
}

/// The cosine series and the grid agree at every grid point, relative to the
/// largest posterior value, after the same updates.
pub fn check_pointwise(times: &[u32], outcomes: &[Outcome], grid_size: usize) -> Result<(), String> {
    let mut f = FourierPosterior::flat_prior();
    let mut g = GridPosterior::flat_prior(grid_size).unwrap();
    for (&m, &o) in times.iter().zip(outcomes) {
        f = f.bayes_update(m, o).unwrap();
        g = g.grid_update(f64::from(m), o).unwrap();
    }
    let scale = g.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (j, (w, v)) in g.midpoints().zip(g.values()).enumerate() {
        let fv = f.evaluate_at(w).unwrap();
        ensure((fv - v).abs() <= 1e-12 * scale, || {
            format!("{times:?} {outcomes:?} at point {j}: series {fv} vs grid {v} (scale {scale})")
        })?;
    }
    Ok(())
}

/// Every branch's mass, mean and variance match direct quadrature.
pub fn check_moments_vs_quadrature(s: &Schedule, engine: Engine) -> Result<(), String> {
    let tree = outcome_tree(s, engine, 16).map_err(|e| e.to_string())?;
    // The midpoint grid is only second-order accurate for non-integer times.
    let mass_tol = if engine == Engine::Fourier { 1e-9 } else { 1e-6 };
    for b in &tree {
        let (mass, mean, var) = oracle_branch(s.times(), &b.outcomes);
        ensure((b.probability - mass).abs() <= mass_tol, || format!("{s:?} {:?}: mass {} vs {mass}", b.outcomes, b.probability))?;
        if mass < 1e-12 {
            continue;
        }
        let (m, v) = (b.mean.unwrap(), b.variance.unwrap());
        ensure((m - mean).abs() <= 1e-6 && (v - var).abs() <= 1e-6, || {
            format!("{s:?} {:?} {}: ({m}, {v}) vs quadrature ({mean}, {var})", b.outcomes, engine.name())
        })?;
    }
    Ok(())
}

/// Random integer schedule of length `n` with times in `1..=max`.
pub fn random_integer_times(rng: &mut impl rand::Rng, n: usize, max: u32) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(1..=max)).collect()
}

pub fn random_real_times(rng: &mut impl rand::Rng, n: usize, max: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..max)).collect()
}

/// Run the whole property suite: every string exhaustively for short
/// schedules, sampled schedules for longer ones.
pub fn property_suite(seed: u64) -> Result<usize, String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;
    // Exhaustive: every outcome string of random schedules up to N = 8.
    for n in 0..=8 {
        for _ in 0..3 {
            let ints = random_integer_times(&mut rng, n, 6);
            let s = Schedule::from_integers(&ints);
            for engine in engines_for(&s) {
                check_tree_identities(&s, engine)?;
                check_permutation_invariance(&s, engine)?;
                checks += 2;
            }
            let reals = Schedule::new(random_real_times(&mut rng, n, 4.0)).unwrap();
            check_tree_identities(&reals, Engine::grid())?;
            check_permutation_invariance(&reals, Engine::grid())?;
            checks += 2;
            if n <= 5 {
                check_moments_vs_quadrature(&s, Engine::Fourier)?;
                check_moments_vs_quadrature(&reals, Engine::grid())?;
                checks += 2;
            }
            for o in all_strings(n) {
                check_pointwise(&ints, &o, 1_000)?;
                checks += 1;
            }
        }
    }
    // Sampled: longer schedules.
    for n in 9..=12 {
        let ints = random_integer_times(&mut rng, n, 5);
        let s = Schedule::from_integers(&ints);
        for engine in engines_for(&s) {
            check_tree_identities(&s, engine)?;
            check_permutation_invariance(&s, engine)?;
            checks += 2;
        }
        for _ in 0..8 {
            let o: Vec<Outcome> = (0..n).map(|_| if rng.random::<bool>() { Outcome::Plus } else { Outcome::Minus }).collect();
            check_pointwise(&ints, &o, 1_000)?;
            checks += 1;
        }
    }
    Ok(checks)
}


/// How many of `seeds` seeds put the Monte-Carlo estimate and the benchmark's
/// mean squared error within three standard errors of the exact value.
///
/// With the posterior mean as the estimator, the expected squared error
/// equals the expected posterior variance, so both estimate the same number.
pub fn mc_consistency(s: &Schedule, seeds: u64, samples: usize) -> (usize, usize) {
    use qfreq::objective::expected_variance_mc;
    use qfreq::simulator::benchmark_schedule;
    let engine = engines_for(s).pop().unwrap();
    let exact = Evaluator::new(engine).expected_variance(s).unwrap().expected_variance;
    let mut agree = (0, 0);
    for seed in 0..seeds {
        let mc = expected_variance_mc(s, samples, seed).unwrap();
        if (mc.expected_variance - exact).abs() <= 3.0 * mc.stderr.unwrap() {
            agree.0 += 1;
        }
        let b = benchmark_schedule(s, samples, seed).unwrap();
        if (b.mean_squared_error - exact).abs() <= 3.0 * b.mse_stderr {
            agree.1 += 1;
        }
    }
    agree
}
