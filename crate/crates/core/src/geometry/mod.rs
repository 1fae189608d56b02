//! Canonical one-form, phase-space metric, charts, curvature and loop actions.

pub mod charts;
pub mod contour;
pub mod curvature;
pub mod forms;

pub use charts::{ChartDomain, ChartRegistry, CoordinateMap, Pushforward};
pub use contour::{bohr_sommerfeld, bohr_sommerfeld_in, loop_action, loop_action_with};
pub use curvature::{gaussian_curvature, gaussian_curvature_with_step};
pub use forms::{
    canonical_one_form, canonical_one_form_with_step, fubini_study_metric, fubini_study_metric_gauged, variance_metric,
    MetricTensor, OneForm, Sym2,
};
