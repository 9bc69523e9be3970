//! Scoring of simulations against indicator data, grid search over the
//! calibrated parameters, and Monte Carlo sensitivity ensembles.

pub mod dataset;
pub mod grid;
pub mod monte_carlo;
pub mod objective;
pub mod scoring;

pub use dataset::{reference_quarters, EmpiricalDataset, Indicator, Observation, Quarter};
pub use grid::{
    grid_search, Axis, AxisName, AxisValue, CalibrationContext, GridPoint, GridResult,
    GridSearchOptions, GridSpec, ScoredPoint,
};
pub use monte_carlo::{
    monte_carlo, Band, Distribution, DistributionSet, Ensemble, MonteCarloSetup, Observable, Sample,
};
pub use objective::{aad_vw, quarterly_average, total_aad, weighted_deviation, Deviation};
pub use scoring::{synthesize_dataset, CellScore, PointScore, Scorer, SectorFit, SectorMapping};
