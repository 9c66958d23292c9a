//! Measurement model shared by every engine.
//!
//! All quantities are dimensionless: the Nyquist bound `ω₀` and the minimal
//! time step `Δt` are both 1. A frequency therefore lives in `[0, 1]`, an
//! evolution time is a multiple of `Δt`, and variances are in units of `ω₀²`.
//! [`Units`] converts to physical values for display.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance of the flat prior on `[0, ω₀]`, in units of `ω₀²`.
pub const PRIOR_VARIANCE: f64 = 1.0 / 12.0;

/// Mean of the flat prior, in units of `ω₀`.
pub const PRIOR_MEAN: f64 = 0.5;

/// Physical scale attached to the dimensionless internal units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub omega0: f64,
}

impl Units {
    /// Units implied by a minimal accessible time step, `ω₀ = π / Δt`.
    pub fn from_time_step(delta_t: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {delta_t}")));
        }
        Ok(Self { omega0: PI / delta_t })
    }

    pub fn delta_t(&self) -> f64 {
        PI / self.omega0
    }

    pub fn frequency(&self, f: Frequency) -> f64 {
        f.value() * self.omega0
    }

    pub fn variance(&self, v: f64) -> f64 {
        v * self.omega0 * self.omega0
    }
}

impl Default for Units {
    fn default() -> Self {
        Self { omega0: 1.0 }
    }
}

/// A frequency in units of `ω₀`, guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("frequency {value} outside [0, ω₀]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Result of a projective measurement in the computational basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Probability of `outcome` after free evolution for time `t` at frequency `omega`.
///
/// `p(+) = sin²(π t ω / 2)` and `p(−) = cos²(π t ω / 2)`.
pub fn outcome_probability(t: f64, omega: f64, outcome: Outcome) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("evolution time must be non-negative, got {t}")));
    }
    let omega = Frequency::new(omega)?.value();
    Ok(likelihood(t, omega, outcome))
}

/// Unchecked form of [`outcome_probability`] for hot loops.
#[inline]
pub(crate) fn likelihood(t: f64, omega: f64, outcome: Outcome) -> f64 {
    let s = (0.5 * PI * t * omega).sin();
    let plus = s * s;
    match outcome {
        Outcome::Plus => plus,
        Outcome::Minus => 1.0 - plus,
    }
}

/// Ordered evolution times in units of `Δt`.
///
/// Times are non-negative and finite. The order is the order in which the
/// measurements are performed; the expected variance does not depend on it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Schedule {
    times: Vec<f64>,
}

impl Schedule {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if let Some(bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Domain(format!("evolution time must be non-negative, got {bad}")));
        }
        Ok(Self { times })
    }

    pub fn from_integers(times: &[u32]) -> Self {
        Self { times: times.iter().map(|&m| f64::from(m)).collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// True when every time is a whole multiple of `Δt`.
    pub fn is_integer(&self) -> bool {
        self.times.iter().all(|t| t.fract() == 0.0)
    }

    /// The integer times, or `None` if any time is fractional or too large.
    pub fn integer_times(&self) -> Option<Vec<u32>> {
        self.times
            .iter()
            .map(|&t| (t.fract() == 0.0 && t <= f64::from(u32::MAX)).then_some(t as u32))
            .collect()
    }

    pub fn is_ascending(&self) -> bool {
        self.times.windows(2).all(|w| w[0] <= w[1])
    }

    /// The same times in ascending order.
    pub fn sorted(&self) -> Self {
        let mut times = self.times.clone();
        times.sort_by(f64::total_cmp);
        Self { times }
    }

    pub fn push(&mut self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("evolution time must be non-negative, got {t}")));
        }
        self.times.push(t);
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.times.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for Schedule {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        Self::new(times)
    }
}

impl From<Schedule> for Vec<f64> {
    fn from(s: Schedule) -> Self {
        s.times
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.times.iter().map(|t| t.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Time increments: `dts[0] = t₁`, `dts[k] = t_{k+1} − t_k`.
///
/// This is the particle-swarm search coordinate. Negative entries are allowed
/// and mark the vector infeasible.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DtVector(pub Vec<f64>);

impl DtVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Feasible iff no increment is negative; zero increments repeat a time.
    pub fn is_feasible(&self) -> bool {
        is_feasible(&self.0)
    }
}

pub fn is_feasible(dts: &[f64]) -> bool {
    dts.iter().all(|&d| d >= 0.0)
}

/// Cumulative sum of the increments. The result may contain negative times
/// when the vector is infeasible, so it is returned as raw values.
pub fn dt_to_times(d: &DtVector) -> Vec<f64> {
    d.0.iter()
        .scan(0.0, |acc, &dt| {
            *acc += dt;
            Some(*acc)
        })
        .collect()
}

/// Feasible increments as a [`Schedule`]; errors on infeasible input.
pub fn dt_to_schedule(d: &DtVector) -> Result<Schedule> {
    if !d.is_feasible() {
        return Err(Error::Domain("negative time increment".into()));
    }
    Schedule::new(dt_to_times(d))
}

/// First differences of the times, with the first time kept as-is.
pub fn times_to_dt(times: &[f64]) -> Result<DtVector> {
    let (&first, _) = times
        .split_first()
        .ok_or_else(|| Error::Domain("cannot difference an empty schedule".into()))?;
    let mut dts = Vec::with_capacity(times.len());
    dts.push(first);
    dts.extend(times.windows(2).map(|w| w[1] - w[0]));
    Ok(DtVector(dts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn probability_examples() {
        assert_eq!(outcome_probability(1.0, 0.0, Outcome::Plus).unwrap(), 0.0);
        assert!((outcome_probability(1.0, 1.0, Outcome::Plus).unwrap() - 1.0).abs() < 1e-15);
        assert!(outcome_probability(2.0, 0.5, Outcome::Minus).unwrap().abs() < 1e-15);
    }

    #[test]
    fn probability_domain_errors() {
        assert!(outcome_probability(-1.0, 0.5, Outcome::Plus).is_err());
        assert!(outcome_probability(1.0, 1.5, Outcome::Plus).is_err());
        assert!(outcome_probability(1.0, -0.1, Outcome::Minus).is_err());
        assert!(outcome_probability(f64::NAN, 0.1, Outcome::Minus).is_err());
    }

    #[test]
    fn dt_examples() {
        assert_eq!(dt_to_times(&DtVector(vec![1.0, 1.0, 1.0])), vec![1.0, 2.0, 3.0]);
        assert_eq!(dt_to_times(&DtVector(vec![2.0])), vec![2.0]);
        let t = dt_to_times(&DtVector(vec![1.060, 0.022, 0.337, 0.719, 0.732]));
        for (a, b) in t.iter().zip([1.060, 1.082, 1.419, 2.138, 2.870]) {
            assert!((a - b).abs() < 1e-12);
        }

        assert_eq!(times_to_dt(&[1.0, 2.0, 3.0]).unwrap().0, vec![1.0, 1.0, 1.0]);
        assert_eq!(
            times_to_dt(&[1.0, 1.0, 1.0, 2.0, 3.0]).unwrap().0,
            vec![1.0, 0.0, 0.0, 1.0, 1.0]
        );
        let d = times_to_dt(&[3.0, 1.0]).unwrap();
        assert_eq!(d.0, vec![3.0, -2.0]);
        assert!(!d.is_feasible());
        assert!(times_to_dt(&[]).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(vec![1.0, -0.5]).is_err());
        assert!(Schedule::new(vec![f64::INFINITY]).is_err());
        let s = Schedule::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert!(s.is_integer());
        assert_eq!(s.integer_times(), Some(vec![3, 1, 2]));
        assert!(!s.is_ascending());
        assert_eq!(s.sorted().times(), &[1.0, 2.0, 3.0]);
        assert!(!Schedule::new(vec![1.5]).unwrap().is_integer());
        assert!(dt_to_schedule(&DtVector(vec![1.0, -0.1])).is_err());
    }

    #[test]
    fn units_from_time_step() {
        let u = Units::from_time_step(PI).unwrap();
        assert!((u.omega0 - 1.0).abs() < 1e-15);
        assert!((u.delta_t() - PI).abs() < 1e-15);
        assert!(Units::from_time_step(0.0).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_sum_to_one(t in 0.0f64..100.0, w in 0.0f64..=1.0) {
            let p = outcome_probability(t, w, Outcome::Plus).unwrap();
            let q = outcome_probability(t, w, Outcome::Minus).unwrap();
            prop_assert!((p + q - 1.0).abs() <= 1e-15);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn periodic_in_frequency(m in 1u32..20, w in 0.0f64..=1.0) {
            let period = 2.0 / f64::from(m);
            let shifted = w + period;
            prop_assume!(shifted <= 1.0);
            let a = outcome_probability(f64::from(m), w, Outcome::Plus).unwrap();
            let b = outcome_probability(f64::from(m), shifted, Outcome::Plus).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn dt_round_trip(d in proptest::collection::vec(-3.0f64..3.0, 1..12)) {
            let times = dt_to_times(&DtVector(d.clone()));
            let back = times_to_dt(&times).unwrap();
            for (x, y) in back.0.iter().zip(&d) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + times.iter().fold(0.0f64, |m, t| m.max(t.abs()))));
            }
        }

        #[test]
        fn integer_dt_round_trip_is_exact(d in proptest::collection::vec(-50i32..50, 1..12)) {
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            let back = times_to_dt(&dt_to_times(&DtVector(d.clone()))).unwrap();
            prop_assert_eq!(back.0, d);
        }
    }
}
