//! Grid decomposition, class-wise discretization and observation tables.

mod discretize;
mod grid;
mod observe;

pub use discretize::{
    aspect_category, direction_category, fit_discretizer, motion, size_bin, velocity_bin,
    ClassStats, DiscretizationModel, DiscretizerParams, Moments, Motion, SizeMeasure,
};
pub use grid::{build_grid, intersection_category, BoxMode, GridSpec};
pub use observe::{
    cell_intersections, generate_observations, motion_from, object_features, ModelKind,
    ObjectFeatures, Observation, ObservationTable,
};
