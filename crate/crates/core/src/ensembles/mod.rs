//! Tree ensembles and the persistence baseline.

pub mod forest;
pub mod gbm;
pub mod persistence;
pub mod tree;

pub use forest::{fit_rfr, ForestModel, ForestParams};
pub use gbm::{fit_gbm, l2_gradient, l2_loss, GbmModel, GbmParams};
pub use persistence::{persistence_forecast, PersistenceMode};
pub use tree::{fit_tree, fit_tree_on, Node, RegressionTree, TreeParams};
