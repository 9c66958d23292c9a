//! Expected posterior variance `E[V]` of a non-adaptive schedule.
//!
//! `E[V] = Σ_r P(r) V(r)` over all `2^N` outcome strings. The exact routes walk
//! the outcome tree depth first so every node is built once from its parent;
//! the Monte-Carlo route samples the frequency and the outcomes instead.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Outcome, Schedule};
use crate::numeric::{CompensatedSum, RunningStats};
use crate::posterior::{self, FourierPosterior, GridPosterior, Posterior, RawMoments, DEFAULT_GRID_SIZE};
use crate::simulator::{self, EngineChoice};

pub const DEFAULT_ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Fourier,
    Grid { size: usize },
}

impl Engine {
    pub fn grid() -> Self {
        Engine::Grid { size: DEFAULT_GRID_SIZE }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Fourier => "fourier",
            Engine::Grid { .. } => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactFourier,
    ExactGrid,
    MonteCarlo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExactFourier => "exact-fourier",
            Method::ExactGrid => "exact-grid",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveReport {
    /// In units of `ω₀²`.
    pub expected_variance: f64,
    /// Leaves enumerated, or samples drawn for Monte Carlo.
    pub branch_count: u64,
    pub method: Method,
    /// Sum of all branch probabilities; 1 up to rounding for exact methods.
    pub total_mass: f64,
    pub stderr: Option<f64>,
}

/// Exact evaluator with a fixed engine and enumeration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluator {
    pub engine: Engine,
    pub cap: usize,
}

impl Evaluator {
    pub fn new(engine: Engine) -> Self {
        Self { engine, cap: DEFAULT_ENUMERATION_CAP }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn expected_variance(&self, s: &Schedule) -> Result<ObjectiveReport> {
        if s.len() > self.cap {
            return Err(Error::EnumerationCap { len: s.len(), cap: self.cap });
        }
        let (ev, mass, method) = match self.engine {
            Engine::Fourier => {
                check_fourier_times(s)?;
                let mut ev = CompensatedSum::new();
                let mut mass = CompensatedSum::new();
                walk_tree(FourierPosterior::flat_prior(), s.times(), &mut Vec::new(), &mut |_, raw| {
                    mass.add(raw.mass);
                    ev.add(raw.weighted_variance());
                })?;
                (ev.value(), mass.value(), Method::ExactFourier)
            }
            Engine::Grid { size } => {
                let (ev, mass) = posterior::grid::tree_expected_variance(s.times(), size)?;
                (ev, mass, Method::ExactGrid)
            }
        };
        Ok(ObjectiveReport {
            expected_variance: ev,
            branch_count: 1u64 << s.len(),
            method,
            total_mass: mass,
            stderr: None,
        })
    }
}

/// Exact `E[V]` with the default enumeration cap.
pub fn expected_variance_exact(s: &Schedule, engine: Engine) -> Result<ObjectiveReport> {
    Evaluator::new(engine).expected_variance(s)
}

fn check_fourier_times(s: &Schedule) -> Result<()> {
    match s.times().iter().find(|&&t| !(t >= 1.0 && t.fract() == 0.0)) {
        Some(&t) => Err(Error::NonInteger(t)),
        None => Ok(()),
    }
}

/// Depth-first traversal calling `leaf` with each outcome string and the
/// unnormalized moments of its posterior.
fn walk_tree<P: Posterior>(
    node: P,
    times: &[f64],
    path: &mut Vec<Outcome>,
    leaf: &mut dyn FnMut(&[Outcome], RawMoments),
) -> Result<()> {
    let Some((&t, rest)) = times.split_first() else {
        leaf(path, node.raw_moments());
        return Ok(());
    };
    for o in Outcome::BOTH {
        let child = node.update(t, o)?;
        path.push(o);
        walk_tree(child, rest, path, leaf)?;
        path.pop();
    }
    Ok(())
}

/// `E[V]` of `prefix ++ [m]` for every candidate `m`, from one walk of the
/// prefix tree.
///
/// At each prefix leaf with coefficients `a`, appending time `m` splits the
/// leaf into two children whose moments are linear in `a`:
/// `K(child±) = ½K(a) ∓ ¼ Σ_q a(q) [k(q+m) + k(|q−m|)]`, so no child series
/// is materialized.
pub fn next_time_scores(prefix: &Schedule, candidates: &[u32], cap: usize) -> Result<Vec<f64>> {
    if prefix.len() + 1 > cap {
        return Err(Error::EnumerationCap { len: prefix.len() + 1, cap });
    }
    check_fourier_times(prefix)?;
    if let Some(&bad) = candidates.iter().find(|&&m| m == 0) {
        return Err(Error::NonInteger(f64::from(bad)));
    }
    let max_m = candidates.iter().copied().max().unwrap_or(0) as usize;
    let span = prefix.total_time() as usize + max_m + 1;
    let kernels = MomentKernels::new(span);
    let mut sums = vec![CompensatedSum::new(); candidates.len()];
    let mut visit = |leaf: &FourierPosterior| {
        let a = leaf.coeffs();
        let base = kernels.apply(a, |q| q);
        for (acc, &m) in sums.iter_mut().zip(candidates) {
            let m = m as usize;
            let shifted = kernels.apply2(a, |q| q + m, |q| q.abs_diff(m));
            for sign in [-0.25, 0.25] {
                let raw = RawMoments {
                    mass: 0.5 * base.mass + sign * shifted.mass,
                    first: 0.5 * base.first + sign * shifted.first,
                    second: 0.5 * base.second + sign * shifted.second,
                };
                acc.add(raw.weighted_variance());
            }
        }
    };
    walk_leaves(FourierPosterior::flat_prior(), prefix.times(), &mut visit)?;
    Ok(sums.iter().map(CompensatedSum::value).collect())
}

fn walk_leaves(node: FourierPosterior, times: &[f64], leaf: &mut dyn FnMut(&FourierPosterior)) -> Result<()> {
    match times.split_first() {
        None => {
            leaf(&node);
            Ok(())
        }
        Some((&t, rest)) => {
            for o in Outcome::BOTH {
                walk_leaves(node.update(t, o)?, rest, leaf)?;
            }
            Ok(())
        }
    }
}

/// Tabulated moment integrals of `cos(qπω)` about `½`.
struct MomentKernels {
    first: Vec<f64>,
    second: Vec<f64>,
}

impl MomentKernels {
    fn new(len: usize) -> Self {
        let mut first = vec![0.0; len];
        let mut second = vec![0.0; len];
        second[0] = 1.0 / 12.0;
        for q in 1..len {
            let x = q as f64 * std::f64::consts::PI;
            if q % 2 == 1 {
                first[q] = -2.0 / (x * x);
            } else {
                second[q] = 2.0 / (x * x);
            }
        }
        Self { first, second }
    }

    fn kernel(&self, i: usize) -> (f64, f64, f64) {
        (if i == 0 { 1.0 } else { 0.0 }, self.first[i], self.second[i])
    }

    fn apply(&self, a: &[f64], idx: impl Fn(usize) -> usize) -> RawMoments {
        let mut out = RawMoments { mass: 0.0, first: 0.0, second: 0.0 };
        for (q, &c) in a.iter().enumerate() {
            let (k0, k1, k2) = self.kernel(idx(q));
            out.mass += c * k0;
            out.first += c * k1;
            out.second += c * k2;
        }
        out
    }

    fn apply2(&self, a: &[f64], i: impl Fn(usize) -> usize, j: impl Fn(usize) -> usize) -> RawMoments {
        let x = self.apply(a, i);
        let y = self.apply(a, j);
        RawMoments { mass: x.mass + y.mass, first: x.first + y.first, second: x.second + y.second }
    }
}

/// One leaf of the outcome tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub outcomes: Vec<Outcome>,
    /// Marginal probability of the outcome string.
    pub probability: f64,
    /// `None` for zero-probability branches.
    pub mean: Option<f64>,
    pub variance: Option<f64>,
}

/// Every branch of the outcome tree, in lexicographic order with `Plus` first.
pub fn outcome_tree(s: &Schedule, engine: Engine, cap: usize) -> Result<Vec<Branch>> {
    if s.len() > cap {
        return Err(Error::EnumerationCap { len: s.len(), cap });
    }
    let mut out = Vec::with_capacity(1 << s.len());
    let mut push = |path: &[Outcome], raw: RawMoments| {
        let m = raw.normalize().ok();
        out.push(Branch {
            outcomes: path.to_vec(),
            probability: raw.mass,
            mean: m.map(|m| m.mean),
            variance: m.map(|m| m.variance),
        });
    };
    match engine {
        Engine::Fourier => {
            check_fourier_times(s)?;
            walk_tree(FourierPosterior::flat_prior(), s.times(), &mut Vec::new(), &mut push)?;
        }
        Engine::Grid { size } => {
            walk_tree(GridPosterior::flat_prior(size)?, s.times(), &mut Vec::new(), &mut push)?;
        }
    }
    Ok(out)
}

/// Monte-Carlo estimate of `E[V]`.
///
/// Sample `i` uses its own generator stream, so the estimate depends only on
/// `(s, samples, seed, grid_size)` and not on the thread count.
pub fn expected_variance_mc(s: &Schedule, samples: usize, seed: u64) -> Result<ObjectiveReport> {
    expected_variance_mc_with(s, samples, seed, EngineChoice::default())
}

pub fn expected_variance_mc_with(
    s: &Schedule,
    samples: usize,
    seed: u64,
    engine: EngineChoice,
) -> Result<ObjectiveReport> {
    let draws = simulator::sample_posteriors(s, samples, seed, engine)?;
    let stats: RunningStats = draws.iter().map(|(_, m)| m.variance).collect();
    Ok(ObjectiveReport {
        expected_variance: stats.mean(),
        branch_count: samples as u64,
        method: Method::MonteCarlo,
        total_mass: 1.0,
        stderr: Some(stats.stderr()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{likelihood, PRIOR_VARIANCE};

    fn ev(times: &[u32], engine: Engine) -> f64 {
        expected_variance_exact(&Schedule::from_integers(times), engine).unwrap().expected_variance
    }

    #[test]
    fn empty_schedule_is_prior_variance() {
        assert!((ev(&[], Engine::Fourier) - PRIOR_VARIANCE).abs() < 1e-15);
        assert!((ev(&[], Engine::grid()) - PRIOR_VARIANCE).abs() < 1e-8);
    }

    #[test]
    fn single_measurement_against_two_branch_quadrature() {
        let g = 200_000;
        let h = 1.0 / g as f64;
        let mut total = 0.0;
        for o in Outcome::BOTH {
            let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for j in 0..g {
                let w = (j as f64 + 0.5) * h;
                let u = likelihood(1.0, w, o);
                s0 += u * h;
                s1 += u * w * h;
                s2 += u * w * w * h;
            }
            total += s0 * (s2 / s0 - (s1 / s0).powi(2));
        }
        assert!((ev(&[1], Engine::Fourier) - total).abs() < 1e-10);
    }

    #[test]
    fn permutation_invariant() {
        let a = ev(&[1, 1, 1, 2, 3], Engine::Fourier);
        let b = ev(&[3, 2, 1, 1, 1], Engine::Fourier);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cap_and_integer_checks() {
        let long = Schedule::from_integers(&[1; 17]);
        assert!(matches!(
            expected_variance_exact(&long, Engine::Fourier),
            Err(Error::EnumerationCap { len: 17, cap: 16 })
        ));
        let real = Schedule::new(vec![1.5]).unwrap();
        assert!(matches!(expected_variance_exact(&real, Engine::Fourier), Err(Error::NonInteger(_))));
        let zero = Schedule::new(vec![0.0, 1.0]).unwrap();
        assert!(expected_variance_exact(&zero, Engine::Fourier).is_err());
        assert!(expected_variance_exact(&zero, Engine::grid()).is_ok());
    }

    #[test]
    fn grid_fast_path_matches_generic_walk() {
        let s = Schedule::new(vec![1.06, 0.5, 2.3, 2.0]).unwrap();
        let engine = Engine::Grid { size: 3000 };
        let fast = expected_variance_exact(&s, engine).unwrap();
        let branches = outcome_tree(&s, engine, 16).unwrap();
        let slow: f64 = branches.iter().map(|b| b.probability * b.variance.unwrap_or(0.0)).sum();
        assert!((fast.expected_variance - slow).abs() < 1e-14);
        assert!((fast.total_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn next_time_scores_match_full_enumeration() {
        let prefix = Schedule::from_integers(&[1, 3, 1, 2]);
        let candidates = [1, 2, 3, 4, 7];
        let scores = next_time_scores(&prefix, &candidates, 16).unwrap();
        for (&m, score) in candidates.iter().zip(&scores) {
            let mut s = prefix.clone();
            s.push(f64::from(m)).unwrap();
            assert!((ev_of(&s) - score).abs() < 1e-15, "m={m}");
        }
        let empty = next_time_scores(&Schedule::empty(), &[1, 2], 16).unwrap();
        assert!((empty[0] - ev(&[1], Engine::Fourier)).abs() < 1e-16);
        assert!(next_time_scores(&Schedule::from_integers(&[1; 16]), &[1], 16).is_err());
        assert!(next_time_scores(&prefix, &[0], 16).is_err());
    }

    fn ev_of(s: &Schedule) -> f64 {
        expected_variance_exact(s, Engine::Fourier).unwrap().expected_variance
    }

    #[test]
    fn monte_carlo_empty_schedule_is_exact() {
        let r = expected_variance_mc(&Schedule::empty(), 500, 3).unwrap();
        assert_eq!(r.expected_variance, PRIOR_VARIANCE);
        assert_eq!(r.stderr, Some(0.0));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let s = Schedule::from_integers(&[1, 1, 2]);
        let a = expected_variance_mc(&s, 1000, 11).unwrap();
        let b = expected_variance_mc(&s, 1000, 11).unwrap();
        assert_eq!(a, b);
        assert!(expected_variance_mc(&s, 10, 11).is_err());
    }
}
