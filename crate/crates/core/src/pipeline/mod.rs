//! End-to-end fitting and prediction, metrics, and file formats.

mod io;
mod metrics;
mod model;

pub use io::{
    load_trajectory, parse_channel_expr, parse_complex, parse_complex_list, read_mode_shapes, read_trajectory_csv,
    save_trajectory, write_trajectory_csv,
};
pub use metrics::{nmte, nmte_summary};
pub use model::{
    fit_model, modal_content, zero_fixed_point, FitOptions, FitReport, FixedPoint, PredictOptions, SsmModel,
    TrajectorySummary, MODEL_FORMAT_VERSION,
};
