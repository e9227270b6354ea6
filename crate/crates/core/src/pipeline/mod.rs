//! Feature construction, grid search and end-to-end experiment runs.

pub mod config;
pub mod entropy;
pub mod experiment;
pub mod features;
pub mod grid;
pub mod models;
pub mod svg;

pub use config::{DataSource, Decomposition, ExperimentConfig};
pub use entropy::{entropy_analysis, EntropyResult};
pub use experiment::{load_data, run_experiment, train_model, ExperimentOutput, ModelRun};
pub use features::{build_features, build_features_causal, FeatureMatrix};
pub use grid::{grid_search, Grid, GridOutcome};
pub use models::{ModelKind, ModelSettings, TrainedModel};
