//! Unnormalized posteriors over the frequency, starting from a flat prior.
//!
//! Both engines keep the prior folded into the stored function, so the total
//! mass of a posterior is also the marginal probability of the outcome string
//! that produced it.

mod fourier;
pub(crate) mod grid;

pub use fourier::FourierPosterior;
pub use grid::{GridPosterior, DEFAULT_GRID_SIZE};

use crate::error::{Error, Result};
use crate::model::Outcome;

/// Unnormalized moments about the prior mean: `∫U`, `∫(ω−½)U`, `∫(ω−½)²U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMoments {
    pub mass: f64,
    pub first: f64,
    pub second: f64,
}

impl RawMoments {
    pub fn normalize(&self) -> Result<Moments> {
        if !(self.mass > 0.0) {
            return Err(Error::ZeroMass(self.mass));
        }
        let offset = self.first / self.mass;
        let variance = self.second / self.mass - offset * offset;
        let mean = 0.5 + offset;
        Ok(Moments { mean, second_moment: variance + mean * mean, variance })
    }

    /// `mass × variance`, the contribution of one branch to the expected
    /// variance. Zero for an empty branch.
    pub fn weighted_variance(&self) -> f64 {
        if self.mass > 0.0 {
            self.second - self.first * self.first / self.mass
        } else {
            0.0
        }
    }
}

impl std::ops::Sub for RawMoments {
    type Output = RawMoments;

    fn sub(self, rhs: Self) -> Self {
        RawMoments {
            mass: self.mass - rhs.mass,
            first: self.first - rhs.first,
            second: self.second - rhs.second,
        }
    }
}

/// Moments of the normalized posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Operations shared by the posterior engines.
pub trait Posterior: Clone + Send + Sync {
    /// Multiply by the likelihood of `outcome` at evolution time `t`.
    fn update(&self, t: f64, outcome: Outcome) -> Result<Self>;

    fn raw_moments(&self) -> RawMoments;

    fn total_mass(&self) -> f64 {
        self.raw_moments().mass
    }

    fn moments(&self) -> Result<Moments> {
        self.raw_moments().normalize()
    }
}
