use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Frequency, Outcome};
use crate::posterior::{Posterior, RawMoments};

/// Exact posterior for integer evolution times, stored as a cosine series
/// `U(ω) = Σ_{q=0}^{M} a(q) cos(qπω)`.
///
/// `a(0)` is the constant term itself (not twice it), so `∫₀¹ U = a(0)`.
/// Each update with time `m` extends the bandwidth `M` by exactly `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierPosterior {
    coeffs: Vec<f64>,
    measurements: usize,
}

impl FourierPosterior {
    pub fn flat_prior() -> Self {
        Self { coeffs: vec![1.0], measurements: 0 }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn measurement_count(&self) -> usize {
        self.measurements
    }

    /// Multiply by `p(outcome | ω) = ½(1 ∓ cos(mπω))`.
    ///
    /// Uses `cos(qθ)cos(mθ) = ½[cos((q+m)θ) + cos(|q−m|θ)]`, scattering each
    /// source coefficient onto its two targets.
    pub fn bayes_update(&self, m: u32, outcome: Outcome) -> Result<Self> {
        if m == 0 {
            return Err(Error::NonInteger(0.0));
        }
        let m = m as usize;
        let sign = match outcome {
            Outcome::Plus => -0.25,
            Outcome::Minus => 0.25,
        };
        let mut next = vec![0.0; self.coeffs.len() + m];
        for (q, &a) in self.coeffs.iter().enumerate() {
            next[q] += 0.5 * a;
            next[q + m] += sign * a;
            next[q.abs_diff(m)] += sign * a;
        }
        Ok(Self { coeffs: next, measurements: self.measurements + 1 })
    }

    /// `U(ω)` at a frequency in `[0, 1]`.
    pub fn evaluate_at(&self, omega: f64) -> Result<f64> {
        let omega = Frequency::new(omega)?.value();
        Ok(self.eval_unchecked(omega))
    }

    pub(crate) fn eval_unchecked(&self, omega: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(q, a)| a * (q as f64 * PI * omega).cos())
            .sum()
    }
}

impl Default for FourierPosterior {
    fn default() -> Self {
        Self::flat_prior()
    }
}

/// `∫₀¹ (ω−½) cos(qπω) dω = ((−1)^q − 1)/(qπ)²` for `q ≥ 1`.
fn first_moment_kernel(q: usize) -> f64 {
    if q.is_multiple_of(2) {
        0.0
    } else {
        let x = q as f64 * PI;
        -2.0 / (x * x)
    }
}

/// `∫₀¹ (ω−½)² cos(qπω) dω = ((−1)^q + 1)/(qπ)²` for `q ≥ 1`.
fn second_moment_kernel(q: usize) -> f64 {
    if q.is_multiple_of(2) {
        let x = q as f64 * PI;
        2.0 / (x * x)
    } else {
        0.0
    }
}

impl Posterior for FourierPosterior {
    fn update(&self, t: f64, outcome: Outcome) -> Result<Self> {
        if !(t >= 1.0 && t.fract() == 0.0 && t <= f64::from(u32::MAX)) {
            return Err(Error::NonInteger(t));
        }
        self.bayes_update(t as u32, outcome)
    }

    fn raw_moments(&self) -> RawMoments {
        let a0 = self.coeffs[0];
        let (first, second) = self.coeffs[1..]
            .iter()
            .enumerate()
            .rev()
            .fold((0.0, 0.0), |(f, s), (i, &a)| {
                let q = i + 1;
                (f + a * first_moment_kernel(q), s + a * second_moment_kernel(q))
            });
        RawMoments { mass: a0, first, second: a0 / 12.0 + second }
    }
}
