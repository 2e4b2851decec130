//! Generalized coverage processes whose finite-dimensional laws are infinitely divisible.

pub mod corrstruct;
pub mod coverage;
pub mod error;
pub mod fidi;
pub mod levy;
pub mod onoff;
pub mod rng;
pub mod stats;
pub mod verify;

pub use corrstruct::{a_to_b, b_to_a, CorrelationStructure, ServiceDistribution, TimeGrid, WeightMatrix};
pub use coverage::{CoverageModel, CoverageSample};
pub use error::{Error, Result};
pub use fidi::{FidiSampler, FidiTriplet, GcidProcess};
pub use levy::{IncrementSampler, LevyExponent, LevyMeasure, MarkDistribution, PowerDensity, SamplerOptions};
pub use onoff::{OnOffArraySpec, OnOffSource};
pub use rng::SeededRng;
