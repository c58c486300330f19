//! Ensemble statistics: arrival-time histograms, residence-time maps and
//! separation growth of perturbed optimal-navigation paths.

mod occupancy;
mod sensitivity;
mod summary;

pub use occupancy::{occupancy, Bounds, OccupancyGrid};
pub use sensitivity::{sensitivity, SensitivityConfig, SensitivityCurve, DEFAULT_GROWTH_FACTOR};
pub use summary::{
    action_fraction, summarize, summarize_with_range, EnsembleSummary, Histogram, DEFAULT_BINS, DEFAULT_RANGE,
};
