//! Bayesian estimation of a single qubit precession frequency from
//! fixed-basis measurements, and optimization of the measurement schedule.
//!
//! * [`model`] measurement likelihood, schedules and their increment form.
//! * [`posterior`] exact cosine-series and grid posteriors.
//! * [`objective`] expected posterior variance of a schedule.
//! * [`lona`] greedy integer schedules.
//! * [`pso`] constriction-factor particle swarm over time increments.
//! * [`simulator`] simulated measurement records and Monte-Carlo benchmarks.
//! * [`cli`] the `qfreq` command line.

pub mod cli;
pub mod error;
pub mod lona;
pub mod model;
pub mod numeric;
pub mod objective;
pub mod posterior;
pub mod pso;
pub mod reference;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{DtVector, Frequency, Outcome, Schedule};
pub use objective::{expected_variance_exact, expected_variance_mc, Engine, Evaluator, ObjectiveReport};
