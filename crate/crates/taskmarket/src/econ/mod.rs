//! A small linear panel-estimation engine: within-transform fixed effects,
//! least squares, cluster-robust covariance, and two-stage least squares.

pub mod data;
pub mod estimate;
pub mod fe;
pub mod iv;
pub mod ols;

pub use data::PanelDataset;
pub use estimate::{estimate_spec, DesignSpec, EstimateResult, InstrumentSpec, TermEstimate};
pub use fe::within_transform;
pub use iv::{two_sls, TwoSlsFit};
pub use ols::{classical_se, cluster_robust_se, ols, two_way_cluster_se, OlsFit};
