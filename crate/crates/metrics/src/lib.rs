//! Evaluation metrics for simulated developmental outcomes.
//!
//! Prediction error (RMSE, MAE), paired significance tests (Student t,
//! Wilcoxon signed-rank), inter-rater and partition agreement (Gwet's AC1,
//! ARI, NMI), robustness across repeated runs, and the two reference
//! predictors (pre-test mean and in-sample OLS).

mod agreement;
mod authenticity;
mod baseline;
mod error;
mod paired;
mod report;
mod robustness;
mod sample;
pub mod special;

pub use agreement::{adjusted_rand_index, gwets_ac1, label_set, normalized_mutual_info};
pub use authenticity::{ingest_authenticity_ratings, AuthenticityRating, RatingSummary};
pub use baseline::{baseline_mean_predict, regression_reference, RegressionFit};
pub use error::MetricsError;
pub use paired::{paired_t_test, wilcoxon_signed_rank, TTestResult, WilcoxonResult};
pub use report::{
    evaluate_method, render_comparison_table, DimensionMetrics, Method, MetricKind, MetricReport,
};
pub use robustness::{robustness_variance, DimensionVariance, RobustnessSummary};
pub use sample::{mae, rmse, PairedSample};

pub type Result<T> = std::result::Result<T, MetricsError>;
