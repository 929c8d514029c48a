//! Stationary Markov measures, orbit sampling and empirical statistics.

mod markov;
mod sampling;

pub use markov::{rational_from_decimal, MarkovMeasure};
pub use sampling::{empirical_distribution, local_pressure_sequence, sample_orbit, EmpiricalDistribution};
